#include "renet/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace renet::model {

using num::Tape;
using num::Value;

namespace {

Value glorot(Rng& rng, int rows, int cols) {
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (double& x : data) x = rng.uniform(-a, a);
    if (cols == 1) return Value::leaf({rows}, std::move(data), true);
    return Value::leaf({rows, cols}, std::move(data), true);
}

GruWeights init_gru(Rng& rng, int d, int input_dim) {
    GruWeights w;
    w.Wz = glorot(rng, d, input_dim);
    w.Uz = glorot(rng, d, d);
    w.Wr = glorot(rng, d, input_dim);
    w.Ur = glorot(rng, d, d);
    w.Wh = glorot(rng, d, input_dim);
    w.Uh = glorot(rng, d, d);
    return w;
}

void push_gru(num::ParamList& out, const std::string& prefix, const GruWeights& w) {
    out.push_back({prefix + ".Wz", w.Wz});
    out.push_back({prefix + ".Uz", w.Uz});
    out.push_back({prefix + ".Wr", w.Wr});
    out.push_back({prefix + ".Ur", w.Ur});
    out.push_back({prefix + ".Wh", w.Wh});
    out.push_back({prefix + ".Uh", w.Uh});
}

void push_aggregator(num::ParamList& out, const agg::AggregatorWeights& w) {
    if (w.config.kind == agg::AggregatorKind::attentive) {
        out.push_back({"attn.W", w.attentive.W});
        out.push_back({"attn.v", w.attentive.v});
    } else if (w.config.kind == agg::AggregatorKind::rgcn) {
        for (std::size_t l = 0; l < w.rgcn.size(); ++l) {
            const auto& layer = w.rgcn[l];
            out.push_back({"rgcn.l" + std::to_string(l) + ".self", layer.self_loop});
            for (std::size_t r = 0; r < layer.rel_blocks.size(); ++r) {
                for (std::size_t b = 0; b < layer.rel_blocks[r].size(); ++b) {
                    out.push_back({"rgcn.l" + std::to_string(l) + ".r" + std::to_string(r) +
                                       ".b" + std::to_string(b),
                                   layer.rel_blocks[r][b]});
                }
            }
        }
    }
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg) {
    if (cfg.num_entities <= 0 || cfg.num_relations <= 0 || cfg.d <= 0) {
        throw ConfigError("model: num_entities, num_relations and d must be positive");
    }
    if (cfg.aggregator.kind == agg::AggregatorKind::rgcn) {
        if (cfg.aggregator.blocks <= 0 || cfg.d % cfg.aggregator.blocks != 0) {
            throw ConfigError("model: embedding dim " + std::to_string(cfg.d) +
                              " not divisible by rgcn block count " +
                              std::to_string(cfg.aggregator.blocks));
        }
        if (cfg.aggregator.layers < 1) throw ConfigError("model: rgcn needs at least 1 layer");
    }

    Rng rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    ModelParams p;
    p.cfg = cfg;
    int d = cfg.d;
    p.ent_emb = glorot(rng, cfg.num_entities, d);
    p.rel_emb = glorot(rng, cfg.num_relations, d);
    p.gru_global = init_gru(rng, d, d);
    p.gru_pair = init_gru(rng, d, 4 * d);
    p.gru_entity = init_gru(rng, d, 3 * d);

    p.aggregator.config = cfg.aggregator;
    if (cfg.aggregator.kind == agg::AggregatorKind::attentive) {
        p.aggregator.attentive.W = glorot(rng, d, 3 * d);
        p.aggregator.attentive.v = glorot(rng, d, 1);
    } else if (cfg.aggregator.kind == agg::AggregatorKind::rgcn) {
        int bd = d / cfg.aggregator.blocks;
        for (int l = 0; l < cfg.aggregator.layers; ++l) {
            agg::RgcnLayer layer;
            layer.rel_blocks.resize(static_cast<std::size_t>(cfg.num_relations));
            for (int r = 0; r < cfg.num_relations; ++r) {
                for (int b = 0; b < cfg.aggregator.blocks; ++b) {
                    layer.rel_blocks[static_cast<std::size_t>(r)].push_back(glorot(rng, bd, bd));
                }
            }
            layer.self_loop = glorot(rng, d, d);
            p.aggregator.rgcn.push_back(std::move(layer));
        }
    }

    p.w_obj = glorot(rng, cfg.num_entities, 3 * d);
    p.w_rel = glorot(rng, cfg.num_relations, 2 * d);
    p.w_subj = glorot(rng, cfg.num_entities, d);
    return p;
}

num::ParamList ModelParams::named_params() const {
    num::ParamList out;
    out.push_back({"ent_emb", ent_emb});
    out.push_back({"rel_emb", rel_emb});
    push_gru(out, "gru_global", gru_global);
    push_gru(out, "gru_pair", gru_pair);
    push_gru(out, "gru_entity", gru_entity);
    push_aggregator(out, aggregator);
    out.push_back({"w_obj", w_obj});
    out.push_back({"w_rel", w_rel});
    out.push_back({"w_subj", w_subj});
    return out;
}

num::ParamList ModelParams::global_head_params() const {
    num::ParamList out;
    push_gru(out, "gru_global", gru_global);
    push_aggregator(out, aggregator);
    out.push_back({"w_subj", w_subj});
    return out;
}

Value StateView::global() const {
    if (overlay_ && overlay_->global.defined()) return overlay_->global;
    if (base_.has_global()) return Value::leaf({d_}, base_.global);
    return Value::zeros({d_});
}

Value StateView::entity(int s) const {
    if (overlay_) {
        auto it = overlay_->h_entity.find(s);
        if (it != overlay_->h_entity.end()) return it->second;
    }
    auto it = base_.h_entity.find(s);
    if (it != base_.h_entity.end()) return Value::leaf({d_}, it->second);
    return Value::zeros({d_});
}

Value StateView::pair(int s, int r) const {
    if (overlay_) {
        auto it = overlay_->h_pair.find({s, r});
        if (it != overlay_->h_pair.end()) return it->second;
    }
    auto it = base_.h_pair.find({s, r});
    if (it != base_.h_pair.end()) return Value::leaf({d_}, it->second);
    return Value::zeros({d_});
}

Value gru_step(Tape& tape, const GruWeights& w, const Value& input, const Value& h_prev) {
    if (input.size() != w.Wz.cols()) {
        throw ShapeError("gru_step: input size " + std::to_string(input.size()) +
                         " does not match cell input dim " + std::to_string(w.Wz.cols()));
    }
    Value z = tape.sigmoid(tape.add(tape.matmul(w.Wz, input), tape.matmul(w.Uz, h_prev)));
    Value r = tape.sigmoid(tape.add(tape.matmul(w.Wr, input), tape.matmul(w.Ur, h_prev)));
    Value cand = tape.tanh(
        tape.add(tape.matmul(w.Wh, input), tape.matmul(w.Uh, tape.mul(r, h_prev))));
    Value one = Value::leaf({z.size()}, std::vector<double>(static_cast<std::size_t>(z.size()), 1.0));
    return tape.add(tape.mul(tape.sub(one, z), h_prev), tape.mul(z, cand));
}

EncodedSlice encode_slice_on_tape(Tape& tape, const StateView& view,
                                  const data::GraphSlice& slice, const ModelParams& params) {
    agg::EmbeddingView emb = params.embeddings();
    agg::SliceAggregation aggcache(tape, emb, params.aggregator, slice);

    EncodedSlice out;
    out.global = gru_step(tape, params.gru_global, aggcache.global_input(), view.global());

    for (int s : slice.active_subjects()) {
        Value e_s = emb.entity(tape, s);
        Value ent_in = tape.concat({e_s, aggcache.entity_input(s), out.global});
        out.h_entity.emplace(s, gru_step(tape, params.gru_entity, ent_in, view.entity(s)));
    }
    for (const auto& [s, r] : slice.active_pairs()) {
        Value e_s = emb.entity(tape, s);
        Value e_r = emb.relation(tape, r);
        Value pair_in = tape.concat({e_s, e_r, aggcache.pair_input(s, r), out.global});
        out.h_pair.emplace(std::make_pair(s, r),
                           gru_step(tape, params.gru_pair, pair_in, view.pair(s, r)));
    }
    return out;
}

void encode_slice(HistoryState& state, const data::GraphSlice& slice, const ModelParams& params) {
    if (slice.t() <= state.last_t) {
        throw DomainError("encode_slice: non-increasing timestamp " + std::to_string(slice.t()) +
                          " after " + std::to_string(state.last_t));
    }
    Tape tape;
    tape.set_recording(false);
    StateView view(state, params.cfg.d);
    EncodedSlice enc = encode_slice_on_tape(tape, view, slice, params);

    state.global = enc.global.data();
    for (const auto& [s, v] : enc.h_entity) state.h_entity[s] = v.data();
    for (const auto& [sr, v] : enc.h_pair) state.h_pair[sr] = v.data();
    state.window.push_back(slice);
    while (static_cast<int>(state.window.size()) > params.cfg.m) state.window.pop_front();
    state.last_t = slice.t();
    state.encode_counts[slice.origin()] += 1;
}

double Distribution::sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

Value object_logits(Tape& tape, const StateView& view, const ModelParams& params, int s, int r) {
    agg::EmbeddingView emb = params.embeddings();
    Value feat = tape.concat({emb.entity(tape, s), emb.relation(tape, r), view.pair(s, r)});
    return tape.matmul(params.w_obj, feat);
}

Value relation_logits(Tape& tape, const StateView& view, const ModelParams& params, int s) {
    agg::EmbeddingView emb = params.embeddings();
    Value feat = tape.concat({emb.entity(tape, s), view.entity(s)});
    return tape.matmul(params.w_rel, feat);
}

Value subject_logits(Tape& tape, const StateView& view, const ModelParams& params) {
    return tape.matmul(params.w_subj, view.global());
}

namespace {

Distribution softmax_distribution(Tape& tape, const Value& logits) {
    return Distribution{tape.softmax(logits).data()};
}

}  // namespace

Distribution score_objects(const HistoryState& state, const ModelParams& params, int s, int r) {
    Tape tape;
    tape.set_recording(false);
    StateView view(state, params.cfg.d);
    return softmax_distribution(tape, object_logits(tape, view, params, s, r));
}

Distribution score_relations(const HistoryState& state, const ModelParams& params, int s) {
    Tape tape;
    tape.set_recording(false);
    StateView view(state, params.cfg.d);
    return softmax_distribution(tape, relation_logits(tape, view, params, s));
}

Distribution score_subjects(const HistoryState& state, const ModelParams& params) {
    Tape tape;
    tape.set_recording(false);
    StateView view(state, params.cfg.d);
    return softmax_distribution(tape, subject_logits(tape, view, params));
}

double joint_event_probability(const HistoryState& state, const ModelParams& params, int s,
                               int r, int o) {
    if (o < 0 || o >= params.cfg.num_entities) {
        throw DomainError("joint_event_probability: object id out of range");
    }
    Distribution ps = score_subjects(state, params);
    Distribution pr = score_relations(state, params, s);
    Distribution po = score_objects(state, params, s, r);
    return ps.p[static_cast<std::size_t>(s)] * pr.p[static_cast<std::size_t>(r)] *
           po.p[static_cast<std::size_t>(o)];
}

// ---------------------------------------------------------------------------
// Checkpoint io

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& out, const std::vector<double>& data) {
    for (double x : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

std::vector<double> read_f64_le(std::istream& in, std::size_t n) {
    std::vector<double> data(n);
    for (std::size_t j = 0; j < n; ++j) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        double x;
        std::memcpy(&x, &bits, 8);
        data[j] = x;
    }
    return data;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");

    nlohmann::json header;
    header["format"] = "renet-checkpoint";
    header["version"] = kCheckpointVersion;
    header["num_entities"] = params.cfg.num_entities;
    header["num_relations"] = params.cfg.num_relations;
    header["d"] = params.cfg.d;
    header["m"] = params.cfg.m;
    header["aggregator"] = agg::aggregator_name(params.cfg.aggregator.kind);
    header["rgcn_layers"] = params.cfg.aggregator.layers;
    header["rgcn_blocks"] = params.cfg.aggregator.blocks;
    header["activation"] = agg::activation_name(params.cfg.aggregator.activation);
    header["lambda1"] = params.cfg.lambda1;
    header["lambda2"] = params.cfg.lambda2;
    header["seed"] = params.cfg.seed;
    header["init"] = "glorot_uniform";

    std::string htext = header.dump();
    out.write("RENETCKP", 8);
    write_u32(out, static_cast<std::uint32_t>(htext.size()));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));

    num::ParamList plist = params.named_params();
    write_u32(out, static_cast<std::uint32_t>(plist.size()));
    for (const auto& p : plist) {
        write_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        const auto& shape = p.value.shape();
        write_u32(out, static_cast<std::uint32_t>(shape.size()));
        for (int dim : shape) write_u32(out, static_cast<std::uint32_t>(dim));
        write_f64_le(out, p.value.data());
    }
    if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "RENETCKP") {
        throw ParseError("'" + path + "' is not a renet checkpoint");
    }
    std::uint32_t hlen = read_u32(in);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    nlohmann::json header = nlohmann::json::parse(htext);
    if (header.at("version").get<std::uint32_t>() != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version");
    }

    ModelConfig cfg;
    cfg.num_entities = header.at("num_entities").get<int>();
    cfg.num_relations = header.at("num_relations").get<int>();
    cfg.d = header.at("d").get<int>();
    cfg.m = header.at("m").get<int>();
    cfg.aggregator.kind = agg::aggregator_from_string(header.at("aggregator").get<std::string>());
    cfg.aggregator.layers = header.at("rgcn_layers").get<int>();
    cfg.aggregator.blocks = header.at("rgcn_blocks").get<int>();
    cfg.aggregator.activation =
        agg::activation_from_string(header.at("activation").get<std::string>());
    cfg.lambda1 = header.at("lambda1").get<double>();
    cfg.lambda2 = header.at("lambda2").get<double>();
    cfg.seed = header.at("seed").get<std::uint64_t>();

    ModelParams params = ModelParams::init(cfg);
    num::ParamList plist = params.named_params();
    std::map<std::string, Value> byname;
    for (const auto& p : plist) byname.emplace(p.name, p.value);

    std::uint32_t count = read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t nlen = read_u32(in);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        std::uint32_t rank = read_u32(in);
        std::size_t numel = 1;
        std::vector<int> shape;
        for (std::uint32_t k = 0; k < rank; ++k) {
            int dim = static_cast<int>(read_u32(in));
            shape.push_back(dim);
            numel *= static_cast<std::size_t>(dim);
        }
        std::vector<double> data = read_f64_le(in, numel);
        auto it = byname.find(name);
        if (it == byname.end()) throw ParseError("checkpoint array '" + name + "' is unknown");
        if (it->second.shape() != shape) {
            throw ParseError("checkpoint array '" + name + "' has shape " + format_shape(shape) +
                             ", expected " + format_shape(it->second.shape()));
        }
        it->second.mutable_data() = std::move(data);
    }
    if (!in) throw IoError("truncated checkpoint '" + path + "'");
    return params;
}

}  // namespace renet::model
