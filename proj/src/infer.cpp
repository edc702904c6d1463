#include "renet/infer.hpp"

#include <algorithm>
#include <cmath>

namespace renet::infer {

using model::HistoryState;
using model::ModelParams;

namespace {

std::uint64_t triple_key(int s, int r, int o) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 40) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 20) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(o));
}

bool better(const ScoredEvent& a, const ScoredEvent& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.s != b.s) return a.s < b.s;
    if (a.r != b.r) return a.r < b.r;
    return a.o < b.o;
}

/// Categorical sampler over an explicit probability vector.
class Categorical {
public:
    explicit Categorical(const std::vector<double>& p) : cum_(p) {
        double run = 0.0;
        for (double& c : cum_) {
            run += c;
            c = run;
        }
        total_ = run;
    }

    int draw(Rng& rng) const {
        double u = rng.uniform() * total_;
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) return static_cast<int>(cum_.size()) - 1;
        return static_cast<int>(it - cum_.begin());
    }

private:
    std::vector<double> cum_;
    double total_ = 0.0;
};

}  // namespace

data::GraphSlice GeneratedGraph::as_slice() const {
    std::vector<data::Event> evs;
    evs.reserve(events.size());
    for (const ScoredEvent& e : events) evs.push_back(data::Event{e.s, e.r, e.o, t});
    return data::GraphSlice(t, std::move(evs), data::SliceOrigin::generated);
}

GeneratedGraph sample_graph(const HistoryState& state, const ModelParams& params,
                            const InferConfig& cfg, int t, Rng& rng,
                            const HeadOverrides* overrides) {
    if (cfg.M < 1) throw ConfigError("sample_graph: M must be >= 1");
    GeneratedGraph out;
    out.t = t;
    if (cfg.k == 0) return out;
    if (cfg.k < 0) throw ConfigError("sample_graph: k must be >= 0");

    const std::vector<double>& ps = (overrides && !overrides->subject_p.empty())
                                        ? overrides->subject_p
                                        : model::score_subjects(state, params).p;
    Categorical subject_sampler(ps);
    std::vector<int> sampled;
    sampled.reserve(static_cast<std::size_t>(cfg.M));
    for (int i = 0; i < cfg.M; ++i) sampled.push_back(subject_sampler.draw(rng));
    std::sort(sampled.begin(), sampled.end());
    sampled.erase(std::unique(sampled.begin(), sampled.end()), sampled.end());

    // Min-heap of the k best triples; heap top is the current worst keeper.
    auto worse = [](const ScoredEvent& a, const ScoredEvent& b) { return better(a, b); };
    std::vector<ScoredEvent> heap;
    heap.reserve(static_cast<std::size_t>(cfg.k) + 1);

    for (int s : sampled) {
        const std::vector<double> pr = (overrides && !overrides->relation_p.empty())
                                           ? overrides->relation_p
                                           : model::score_relations(state, params, s).p;
        for (int r = 0; r < params.cfg.num_relations; ++r) {
            double psr = ps[static_cast<std::size_t>(s)] * pr[static_cast<std::size_t>(r)];
            model::Distribution po = model::score_objects(state, params, s, r);
            for (int o = 0; o < params.cfg.num_entities; ++o) {
                ScoredEvent ev{s, r, o, psr * po.p[static_cast<std::size_t>(o)]};
                if (static_cast<int>(heap.size()) < cfg.k) {
                    heap.push_back(ev);
                    std::push_heap(heap.begin(), heap.end(), worse);
                } else if (better(ev, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), worse);
                    heap.back() = ev;
                    std::push_heap(heap.begin(), heap.end(), worse);
                }
            }
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse);
    out.events = std::move(heap);
    return out;
}

HistoryState multi_step_state(const HistoryState& state, const ModelParams& params,
                              const InferConfig& cfg, const HeadOverrides* overrides) {
    if (cfg.dt < 1) throw ConfigError("multi_step_state: horizon must be >= 1");
    HistoryState walk = state;
    if (cfg.mode == InferMode::no_multi_step) return walk;
    Rng rng(cfg.seed ^ 0xd1f4a9c36bull);
    for (int step = 1; step <= cfg.dt - 1; ++step) {
        int t = walk.last_t + 1;
        GeneratedGraph g = sample_graph(walk, params, cfg, t, rng, overrides);
        if (!g.events.empty()) {
            model::encode_slice(walk, g.as_slice(), params);
        }
    }
    return walk;
}

KnownTriples::KnownTriples(const data::Dataset& ds) {
    for (const auto& sl : ds.slices) {
        for (const data::Event& e : sl.events()) insert(e.s, e.r, e.o);
    }
}

void KnownTriples::insert(int s, int r, int o) { set_.insert(triple_key(s, r, o)); }

bool KnownTriples::contains(int s, int r, int o) const {
    return set_.count(triple_key(s, r, o)) != 0;
}

double rank_candidates(const RankQuery& query, const HistoryState& state,
                       const ModelParams& params, Filter filter, const KnownTriples& known) {
    if (query.ground_truth < 0 || query.ground_truth >= params.cfg.num_entities) {
        throw DomainError("rank_candidates: ground-truth id out of range");
    }
    model::Distribution dist = model::score_objects(state, params, query.s, query.r);
    double gt_score = dist.p[static_cast<std::size_t>(query.ground_truth)];

    long long greater = 0, tied = 0;
    for (int o = 0; o < params.cfg.num_entities; ++o) {
        if (o != query.ground_truth && filter == Filter::filtered &&
            known.contains(query.s, query.r, o)) {
            continue;
        }
        double p = dist.p[static_cast<std::size_t>(o)];
        if (p > gt_score) {
            ++greater;
        } else if (p == gt_score) {
            ++tied;  // includes the ground truth itself
        }
    }
    return static_cast<double>(greater) + (static_cast<double>(tied) + 1.0) / 2.0;
}

}  // namespace renet::infer
