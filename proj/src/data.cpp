#include "renet/data.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace renet::data {

namespace {

const std::vector<int> kEmptyNeighbors;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        std::size_t next = line.find('\t', pos);
        if (next == std::string::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return fields;
}

long long parse_nonneg(const std::string& field, const std::string& where,
                       const std::string& what) {
    std::string v = trim(field);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(where + ": " + what + " must be a non-negative integer, got '" + v + "'");
    }
    try {
        return std::stoll(v);
    } catch (const std::exception&) {
        throw ParseError(where + ": " + what + " out of range: '" + v + "'");
    }
}

}  // namespace

GraphSlice::GraphSlice(int t, std::vector<Event> events, SliceOrigin origin)
    : t_(t), origin_(origin), events_(std::move(events)) {
    std::sort(events_.begin(), events_.end());
    events_.erase(std::unique(events_.begin(), events_.end()), events_.end());
    std::set<int> subjects, nodes;
    for (const Event& e : events_) {
        if (e.t != t_) {
            throw DomainError("slice at t=" + std::to_string(t_) + " received event at t=" +
                              std::to_string(e.t));
        }
        subjects.insert(e.s);
        nodes.insert(e.s);
        nodes.insert(e.o);
        index_sr_[{e.s, e.r}].push_back(e.o);
    }
    subjects_.assign(subjects.begin(), subjects.end());
    nodes_.assign(nodes.begin(), nodes.end());
    pairs_.reserve(index_sr_.size());
    for (const auto& [key, objs] : index_sr_) pairs_.push_back(key);
}

std::vector<int> GraphSlice::relations_of(int s) const {
    std::vector<int> rels;
    for (auto it = index_sr_.lower_bound({s, 0}); it != index_sr_.end() && it->first.first == s;
         ++it) {
        rels.push_back(it->first.second);
    }
    return rels;
}

const std::vector<int>& GraphSlice::neighbors(int s, int r) const {
    auto it = index_sr_.find({s, r});
    return it == index_sr_.end() ? kEmptyNeighbors : it->second;
}

int Vocab::intern(const std::string& label) {
    auto it = ids.find(label);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(label);
    ids.emplace(label, id);
    return id;
}

std::optional<int> Vocab::lookup(const std::string& label) const {
    auto it = ids.find(label);
    if (it == ids.end()) return std::nullopt;
    return it->second;
}

long long Dataset::num_events() const {
    long long n = 0;
    for (const auto& sl : slices) n += static_cast<long long>(sl.events().size());
    return n;
}

std::vector<const GraphSlice*> Dataset::split_slices(SliceOrigin which) const {
    std::vector<const GraphSlice*> out;
    for (const auto& sl : slices) {
        if (sl.origin() == which) out.push_back(&sl);
    }
    return out;
}

std::vector<const GraphSlice*> Dataset::train_slices() const { return split_slices(SliceOrigin::train); }
std::vector<const GraphSlice*> Dataset::valid_slices() const { return split_slices(SliceOrigin::valid); }
std::vector<const GraphSlice*> Dataset::test_slices() const { return split_slices(SliceOrigin::test); }

Dataset dataset_from_events(std::vector<Event> events, int num_entities, int num_relations) {
    Dataset ds;
    int max_ent = -1, max_rel = -1;
    std::set<int> times;
    for (const Event& e : events) {
        max_ent = std::max({max_ent, e.s, e.o});
        max_rel = std::max(max_rel, e.r);
        times.insert(e.t);
    }
    ds.num_entities = std::max(num_entities, max_ent + 1);
    ds.num_relations = std::max(num_relations, max_rel + 1);
    ds.num_base_relations = ds.num_relations;

    std::map<int, int> remap;
    int next = 0;
    for (int t : times) {
        remap[t] = next++;
        ds.raw_times.push_back(t);
    }
    std::vector<std::vector<Event>> per_slice(times.size());
    for (Event e : events) {
        int nt = remap[e.t];
        e.t = nt;
        per_slice[static_cast<std::size_t>(nt)].push_back(e);
    }
    ds.slices.reserve(per_slice.size());
    for (std::size_t i = 0; i < per_slice.size(); ++i) {
        ds.slices.emplace_back(static_cast<int>(i), std::move(per_slice[i]));
    }
    return ds;
}

Dataset parse_quadruples(std::istream& in, QuadFormat format, const std::string& source_name) {
    std::vector<Event> events;
    Vocab entities, relations;
    std::string line;
    long long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string where = source_name + ":" + std::to_string(lineno);
        auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw ParseError(where + ": expected 4 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        Event e;
        if (format == QuadFormat::ids) {
            e.s = static_cast<int>(parse_nonneg(fields[0], where, "subject"));
            e.r = static_cast<int>(parse_nonneg(fields[1], where, "relation"));
            e.o = static_cast<int>(parse_nonneg(fields[2], where, "object"));
        } else {
            e.s = entities.intern(trim(fields[0]));
            e.r = relations.intern(trim(fields[1]));
            e.o = entities.intern(trim(fields[2]));
        }
        long long t = parse_nonneg(fields[3], where, "timestamp");
        if (t > INT32_MAX) throw ParseError(where + ": timestamp too large");
        e.t = static_cast<int>(t);
        events.push_back(e);
    }
    Dataset ds = dataset_from_events(std::move(events));
    if (format == QuadFormat::labeled) {
        ds.num_entities = static_cast<int>(entities.names.size());
        ds.num_relations = static_cast<int>(relations.names.size());
        ds.num_base_relations = ds.num_relations;
        ds.entity_vocab = std::move(entities);
        ds.relation_vocab = std::move(relations);
    }
    return ds;
}

Dataset parse_quadruples_file(const std::string& path, QuadFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_quadruples(in, format, path);
}

void write_quadruples(std::ostream& out, const Dataset& ds) {
    for (const auto& sl : ds.slices) {
        for (const Event& e : sl.events()) {
            out << e.s << '\t' << e.r << '\t' << e.o << '\t' << e.t << '\n';
        }
    }
}

std::vector<SpanFact> parse_span_facts(std::istream& in, const std::string& source_name) {
    std::vector<SpanFact> facts;
    std::string line;
    long long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string where = source_name + ":" + std::to_string(lineno);
        auto fields = split_tabs(line);
        if (fields.size() != 5) {
            throw ParseError(where + ": expected 5 tab-separated fields, got " +
                             std::to_string(fields.size()));
        }
        SpanFact f;
        f.s = static_cast<int>(parse_nonneg(fields[0], where, "subject"));
        f.r = static_cast<int>(parse_nonneg(fields[1], where, "relation"));
        f.o = static_cast<int>(parse_nonneg(fields[2], where, "object"));
        f.t_start = parse_nonneg(fields[3], where, "t_start");
        f.t_end = parse_nonneg(fields[4], where, "t_end");
        facts.push_back(f);
    }
    return facts;
}

std::vector<Event> expand_time_spans(const std::vector<SpanFact>& facts, long long unit,
                                     long long cutoff) {
    if (unit <= 0) throw DomainError("expand_time_spans: unit must be positive");
    std::vector<Event> events;
    for (const SpanFact& f : facts) {
        if (f.t_start > f.t_end) {
            throw DomainError("expand_time_spans: span [" + std::to_string(f.t_start) + "," +
                              std::to_string(f.t_end) + "] has t_start > t_end");
        }
        for (long long t = f.t_start; t <= f.t_end; t += unit) {
            if (t < cutoff) continue;
            if (t > INT32_MAX) throw DomainError("expand_time_spans: timestamp too large");
            events.push_back(Event{f.s, f.r, f.o, static_cast<int>(t)});
        }
    }
    return events;
}

void split_by_time(Dataset& ds, double train_frac, double valid_frac) {
    int T = ds.num_timestamps();
    if (T < 3) {
        throw DomainError("split_by_time: need at least 3 distinct timestamps, have " +
                          std::to_string(T));
    }
    double total = static_cast<double>(ds.num_events());
    std::vector<double> cum(static_cast<std::size_t>(T) + 1, 0.0);
    for (int i = 0; i < T; ++i) {
        cum[static_cast<std::size_t>(i) + 1] =
            cum[static_cast<std::size_t>(i)] + static_cast<double>(ds.slices[static_cast<std::size_t>(i)].events().size());
    }
    for (double& c : cum) c /= total;

    double f1 = train_frac;
    double f2 = train_frac + valid_frac;
    int best_i = 1, best_j = 2;
    double best = 1e300;
    for (int i = 1; i <= T - 2; ++i) {
        for (int j = i + 1; j <= T - 1; ++j) {
            double cost = std::abs(cum[static_cast<std::size_t>(i)] - f1) +
                          std::abs(cum[static_cast<std::size_t>(j)] - f2);
            if (cost < best) {
                best = cost;
                best_i = i;
                best_j = j;
            }
        }
    }
    ds.splits = SplitBounds{best_i, best_j};
    for (int i = 0; i < T; ++i) {
        ds.slices[static_cast<std::size_t>(i)].set_origin(
            i < best_i ? SliceOrigin::train : (i < best_j ? SliceOrigin::valid : SliceOrigin::test));
    }
}

void add_inverse_relations(Dataset& ds) {
    if (ds.inverse_augmented) {
        throw DomainError("add_inverse_relations: dataset is already augmented");
    }
    int rb = ds.num_base_relations;
    std::vector<GraphSlice> augmented;
    augmented.reserve(ds.slices.size());
    for (const auto& sl : ds.slices) {
        std::vector<Event> events = sl.events();
        std::size_t n = events.size();
        events.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const Event& e = events[i];
            events.push_back(Event{e.o, e.r + rb, e.s, e.t});
        }
        GraphSlice next(sl.t(), std::move(events), sl.origin());
        augmented.push_back(std::move(next));
    }
    ds.slices = std::move(augmented);
    ds.num_relations = 2 * rb;
    ds.inverse_augmented = true;
}

std::vector<int> history_window(const Dataset& ds, int s, int t, int m) {
    if (m < 1) throw DomainError("history_window: m must be >= 1");
    std::vector<int> found;
    for (int i = ds.num_timestamps() - 1; i >= 0 && static_cast<int>(found.size()) < m; --i) {
        const GraphSlice& sl = ds.slices[static_cast<std::size_t>(i)];
        if (sl.t() >= t) continue;
        const auto& subj = sl.active_subjects();
        if (std::binary_search(subj.begin(), subj.end(), s)) found.push_back(i);
    }
    std::reverse(found.begin(), found.end());
    return found;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

struct MotifAllocator {
    int num_entities;
    std::set<int> reserved;
    int cursor = 0;

    int take() {
        while (cursor < num_entities && reserved.count(cursor)) ++cursor;
        if (cursor >= num_entities) {
            throw ConfigError("synthetic spec: not enough entities for motif allocation");
        }
        return cursor++;
    }

    std::vector<int> take_n(int n) {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out.push_back(take());
        return out;
    }
};

std::map<std::string, std::string> parse_kv_tokens(const std::string& body,
                                                   const std::string& where) {
    std::map<std::string, std::string> kv;
    std::istringstream toks(body);
    std::string tok;
    while (toks >> tok) {
        std::size_t colon = tok.find(':');
        if (colon == std::string::npos) {
            throw ParseError(where + ": motif token '" + tok + "' is not key:value");
        }
        kv[tok.substr(0, colon)] = tok.substr(colon + 1);
    }
    return kv;
}

int kv_int(const std::map<std::string, std::string>& kv, const std::string& key, int fallback,
           const std::string& where) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw ParseError(where + ": bad integer for '" + key + "': " + it->second);
    }
}

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback, const std::string& where) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ParseError(where + ": bad number for '" + key + "': " + it->second);
    }
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::istream& in, const std::string& source_name) {
    SyntheticSpec spec;
    std::string line;
    long long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::string where = source_name + ":" + std::to_string(lineno);
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_nonneg(value, where, "seed"));
        } else if (key == "entities") {
            spec.num_entities = static_cast<int>(parse_nonneg(value, where, "entities"));
        } else if (key == "relations") {
            spec.num_relations = static_cast<int>(parse_nonneg(value, where, "relations"));
        } else if (key == "slices") {
            spec.num_slices = static_cast<int>(parse_nonneg(value, where, "slices"));
        } else if (key == "noise") {
            spec.noise_rate = std::stod(value);
        } else if (key == "noise_subject_pool") {
            spec.noise_subject_pool = static_cast<int>(parse_nonneg(value, where, key));
        } else if (key == "noise_object_pool") {
            spec.noise_object_pool = static_cast<int>(parse_nonneg(value, where, key));
        } else if (key == "periodic") {
            auto kv = parse_kv_tokens(value, where);
            PeriodicMotif p;
            p.s = kv_int(kv, "s", 0, where);
            p.r = kv_int(kv, "r", 0, where);
            p.o = kv_int(kv, "o", 0, where);
            p.period = kv_int(kv, "period", 1, where);
            p.phase = kv_int(kv, "phase", 0, where);
            spec.periodic.push_back(p);
        } else if (key == "chain") {
            auto kv = parse_kv_tokens(value, where);
            ChainMotif c;
            c.r1 = kv_int(kv, "r1", 0, where);
            c.r2 = kv_int(kv, "r2", 1, where);
            auto mode = kv.find("mode");
            if (mode != kv.end()) {
                if (mode->second == "cycle") {
                    c.mode = ChainMotif::Mode::cycle;
                } else if (mode->second == "relay") {
                    c.mode = ChainMotif::Mode::relay;
                } else {
                    throw ParseError(where + ": unknown chain mode '" + mode->second + "'");
                }
            }
            c.instances = kv_int(kv, "instances", 1, where);
            c.pool = kv_int(kv, "pool", 3, where);
            c.rate = kv_double(kv, "rate", 1.0, where);
            c.clutter_rate = kv_double(kv, "clutter", 0.0, where);
            c.clutter_pool = kv_int(kv, "clutter_pool", 0, where);
            spec.chains.push_back(c);
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    return spec;
}

SyntheticSpec parse_synthetic_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_synthetic_spec(in, path);
}

Dataset generate_synthetic(const SyntheticSpec& spec, SyntheticStats* stats) {
    if (spec.num_entities <= 0 || spec.num_relations <= 0 || spec.num_slices <= 0) {
        throw ConfigError("synthetic spec: entities, relations and slices must be positive");
    }
    for (const PeriodicMotif& p : spec.periodic) {
        if (p.r < 0 || p.r >= spec.num_relations) {
            throw ConfigError("synthetic spec: periodic motif references unknown relation " +
                              std::to_string(p.r));
        }
        if (p.s < 0 || p.s >= spec.num_entities || p.o < 0 || p.o >= spec.num_entities) {
            throw ConfigError("synthetic spec: periodic motif references unknown entity");
        }
        if (p.period < 1) throw ConfigError("synthetic spec: periodic motif period must be >= 1");
    }
    for (const ChainMotif& c : spec.chains) {
        if (c.r1 < 0 || c.r1 >= spec.num_relations || c.r2 < 0 || c.r2 >= spec.num_relations) {
            throw ConfigError("synthetic spec: chain motif references unknown relation");
        }
        if (c.instances < 1 || c.pool < 1) {
            throw ConfigError("synthetic spec: chain motif needs instances >= 1 and pool >= 1");
        }
    }
    if (spec.noise_rate < 0.0 || spec.noise_rate >= 1.0) {
        throw ConfigError("synthetic spec: noise rate must be in [0, 1)");
    }

    MotifAllocator alloc{spec.num_entities, {}, 0};
    for (const PeriodicMotif& p : spec.periodic) {
        alloc.reserved.insert(p.s);
        alloc.reserved.insert(p.o);
    }

    struct ChainInstance {
        const ChainMotif* motif;
        int subject;
        std::vector<int> pool;
        std::vector<int> clutter;
        int cycle_pos = 0;   // cycle mode
        int relay_obj = 0;   // relay mode, object announced most recently
    };
    std::vector<ChainInstance> instances;
    for (const ChainMotif& c : spec.chains) {
        for (int i = 0; i < c.instances; ++i) {
            ChainInstance inst;
            inst.motif = &c;
            inst.subject = alloc.take();
            inst.pool = alloc.take_n(c.pool);
            if (c.clutter_pool > 0) inst.clutter = alloc.take_n(c.clutter_pool);
            instances.push_back(std::move(inst));
        }
    }
    std::vector<int> noise_subjects, noise_objects;
    if (spec.noise_subject_pool > 0) noise_subjects = alloc.take_n(spec.noise_subject_pool);
    if (spec.noise_object_pool > 0) noise_objects = alloc.take_n(spec.noise_object_pool);

    Rng rng(spec.seed);
    for (ChainInstance& inst : instances) {
        inst.cycle_pos = static_cast<int>(rng.below(inst.pool.size()));
        inst.relay_obj = inst.pool[rng.below(inst.pool.size())];
    }

    int T = spec.num_slices;
    std::vector<std::set<Event>> slices(static_cast<std::size_t>(T));
    SyntheticStats local{};

    auto put = [&](int t, Event e, bool noise) {
        if (t < 0 || t >= T) return;
        e.t = t;
        if (slices[static_cast<std::size_t>(t)].insert(e).second) {
            (noise ? local.noise_events : local.motif_events) += 1;
        }
    };

    for (int t = 0; t < T; ++t) {
        for (const PeriodicMotif& p : spec.periodic) {
            if (t >= p.phase && (t - p.phase) % p.period == 0) {
                put(t, Event{p.s, p.r, p.o, t}, false);
            }
        }
        for (ChainInstance& inst : instances) {
            const ChainMotif& c = *inst.motif;
            bool can_trigger = t + 1 < T;
            if (c.mode == ChainMotif::Mode::cycle) {
                if (can_trigger && rng.bernoulli(c.rate)) {
                    int obj = inst.pool[static_cast<std::size_t>(inst.cycle_pos)];
                    put(t, Event{inst.subject, c.r1, obj, t}, false);
                    put(t + 1, Event{inst.subject, c.r2, obj, t + 1}, false);
                    if (!inst.clutter.empty() && rng.bernoulli(c.clutter_rate)) {
                        int n = 1 + static_cast<int>(rng.below(2));
                        for (int j = 0; j < n; ++j) {
                            put(t + 1,
                                Event{inst.subject, c.r2,
                                      inst.clutter[rng.below(inst.clutter.size())], t + 1},
                                false);
                        }
                    }
                    inst.cycle_pos = (inst.cycle_pos + 1) % static_cast<int>(inst.pool.size());
                }
            } else {
                // relay: steady effect stream, re-announced object on triggers
                put(t, Event{inst.subject, c.r2, inst.relay_obj, t}, false);
                if (!inst.clutter.empty() && rng.bernoulli(c.clutter_rate)) {
                    int n = 1 + static_cast<int>(rng.below(2));
                    for (int j = 0; j < n; ++j) {
                        put(t,
                            Event{inst.subject, c.r2, inst.clutter[rng.below(inst.clutter.size())],
                                  t},
                            false);
                    }
                }
                if (can_trigger && rng.bernoulli(c.rate)) {
                    int obj = inst.pool[rng.below(inst.pool.size())];
                    put(t, Event{inst.subject, c.r1, obj, t}, false);
                    put(t + 1, Event{inst.subject, c.r2, obj, t + 1}, false);
                    inst.relay_obj = obj;
                }
            }
        }
        // Noise on top of the motif events of this slice.
        if (spec.noise_rate > 0.0) {
            double n_motif = static_cast<double>(slices[static_cast<std::size_t>(t)].size());
            double want = spec.noise_rate / (1.0 - spec.noise_rate) * n_motif;
            int n = static_cast<int>(want + rng.uniform());
            for (int j = 0; j < n; ++j) {
                int s = noise_subjects.empty()
                            ? static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.num_entities)))
                            : noise_subjects[rng.below(noise_subjects.size())];
                int o = noise_objects.empty()
                            ? static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.num_entities)))
                            : noise_objects[rng.below(noise_objects.size())];
                int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.num_relations)));
                put(t, Event{s, r, o, t}, true);
            }
        }
    }

    std::vector<Event> events;
    for (int t = 0; t < T; ++t) {
        events.insert(events.end(), slices[static_cast<std::size_t>(t)].begin(),
                      slices[static_cast<std::size_t>(t)].end());
    }
    if (stats) *stats = local;
    Dataset ds = dataset_from_events(std::move(events), spec.num_entities, spec.num_relations);
    return ds;
}

// ---------------------------------------------------------------------------
// Archive

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "events.tsv");
        if (!out) throw IoError("cannot write '" + dir + "/events.tsv'");
        write_quadruples(out, ds);
    }
    nlohmann::json meta;
    meta["num_entities"] = ds.num_entities;
    meta["num_relations"] = ds.num_relations;
    meta["num_base_relations"] = ds.num_base_relations;
    meta["inverse_augmented"] = ds.inverse_augmented;
    meta["raw_times"] = ds.raw_times;
    if (ds.splits) {
        meta["splits"] = {{"train_end", ds.splits->train_end}, {"valid_end", ds.splits->valid_end}};
    }
    {
        std::ofstream out(fs::path(dir) / "meta.json");
        if (!out) throw IoError("cannot write '" + dir + "/meta.json'");
        out << meta.dump(2) << '\n';
    }
    auto write_vocab = [&](const Vocab& v, const std::string& name) {
        if (v.empty()) return;
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw IoError("cannot write '" + dir + "/" + name + "'");
        for (std::size_t i = 0; i < v.names.size(); ++i) {
            out << v.names[i] << '\t' << i << '\n';
        }
    };
    write_vocab(ds.entity_vocab, "entities.tsv");
    write_vocab(ds.relation_vocab, "relations.tsv");
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream metain(fs::path(dir) / "meta.json");
    if (!metain) throw IoError("cannot open '" + dir + "/meta.json'");
    nlohmann::json meta = nlohmann::json::parse(metain);

    Dataset ds = parse_quadruples_file((fs::path(dir) / "events.tsv").string(), QuadFormat::ids);
    ds.num_entities = meta.at("num_entities").get<int>();
    ds.num_relations = meta.at("num_relations").get<int>();
    ds.num_base_relations = meta.at("num_base_relations").get<int>();
    ds.inverse_augmented = meta.at("inverse_augmented").get<bool>();
    ds.raw_times = meta.at("raw_times").get<std::vector<long long>>();
    if (meta.contains("splits")) {
        SplitBounds b;
        b.train_end = meta["splits"].at("train_end").get<int>();
        b.valid_end = meta["splits"].at("valid_end").get<int>();
        ds.splits = b;
        for (int i = 0; i < ds.num_timestamps(); ++i) {
            ds.slices[static_cast<std::size_t>(i)].set_origin(
                i < b.train_end ? SliceOrigin::train
                                : (i < b.valid_end ? SliceOrigin::valid : SliceOrigin::test));
        }
    }

    auto read_vocab = [&](Vocab& v, const std::string& name) {
        std::ifstream in(fs::path(dir) / name);
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() != 2) throw ParseError(dir + "/" + name + ": bad vocab line");
            v.intern(fields[0]);
        }
    };
    read_vocab(ds.entity_vocab, "entities.tsv");
    read_vocab(ds.relation_vocab, "relations.tsv");
    return ds;
}

}  // namespace renet::data
