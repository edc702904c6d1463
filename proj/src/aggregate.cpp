#include "renet/aggregate.hpp"

#include <algorithm>

namespace renet::agg {

using num::Tape;
using num::Value;

AggregatorKind aggregator_from_string(const std::string& name) {
    if (name == "none") return AggregatorKind::none;
    if (name == "mean") return AggregatorKind::mean;
    if (name == "attn" || name == "attentive") return AggregatorKind::attentive;
    if (name == "rgcn") return AggregatorKind::rgcn;
    throw ConfigError("unknown aggregator '" + name + "'");
}

const char* aggregator_name(AggregatorKind k) {
    switch (k) {
        case AggregatorKind::none: return "none";
        case AggregatorKind::mean: return "mean";
        case AggregatorKind::attentive: return "attn";
        case AggregatorKind::rgcn: return "rgcn";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + name + "'");
}

const char* activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

long long rgcn_params_per_relation(int d_in, int d_out, int blocks) {
    return static_cast<long long>(d_in) * d_out / blocks;
}

Value EmbeddingView::entity(Tape& tape, int id) const {
    if (id < 0 || id >= entities.rows()) {
        throw DomainError("entity id " + std::to_string(id) + " out of range [0," +
                          std::to_string(entities.rows()) + ")");
    }
    return tape.slice(entities, id * d, d);
}

Value EmbeddingView::relation(Tape& tape, int id) const {
    if (id < 0 || id >= relations.rows()) {
        throw DomainError("relation id " + std::to_string(id) + " out of range [0," +
                          std::to_string(relations.rows()) + ")");
    }
    return tape.slice(relations, id * d, d);
}

Value mean_aggregate(num::Tape& tape, const EmbeddingView& emb,
                     const std::vector<int>& neighbors) {
    if (neighbors.empty()) return Value::zeros({emb.d});
    Value sum = emb.entity(tape, neighbors[0]);
    for (std::size_t i = 1; i < neighbors.size(); ++i) {
        sum = tape.add(sum, emb.entity(tape, neighbors[i]));
    }
    return tape.scale(sum, 1.0 / static_cast<double>(neighbors.size()));
}

Value attentive_aggregate(num::Tape& tape, const EmbeddingView& emb, const AttentiveWeights& w,
                          int s, int r, const std::vector<int>& neighbors) {
    if (neighbors.empty()) return Value::zeros({emb.d});
    Value e_s = emb.entity(tape, s);
    Value e_r = emb.relation(tape, r);
    std::vector<Value> scores;
    std::vector<Value> rows;
    scores.reserve(neighbors.size());
    rows.reserve(neighbors.size());
    for (int o : neighbors) {
        Value e_o = emb.entity(tape, o);
        Value feat = tape.concat({e_s, e_r, e_o});
        scores.push_back(tape.dot(w.v, tape.tanh(tape.matmul(w.W, feat))));
        rows.push_back(e_o);
    }
    Value alpha = tape.softmax(tape.concat(std::span<const Value>(scores.data(), scores.size())));
    Value stacked = tape.reshape(tape.concat(std::span<const Value>(rows.data(), rows.size())),
                                 {static_cast<int>(rows.size()), emb.d});
    return tape.matmul(tape.transpose(stacked), alpha);
}

namespace {

Value apply_activation(Tape& tape, Activation act, const Value& x) {
    return act == Activation::relu ? tape.relu(x) : x;
}

/// y = diag(A_1, ..., A_B) x via per-block matvecs.
Value block_diag_matvec(Tape& tape, const std::vector<Value>& blocks, const Value& x) {
    if (blocks.size() == 1) return tape.matmul(blocks[0], x);
    std::vector<Value> parts;
    parts.reserve(blocks.size());
    int off = 0;
    for (const Value& blk : blocks) {
        int din = blk.cols();
        parts.push_back(tape.matmul(blk, tape.slice(x, off, din)));
        off += din;
    }
    return tape.concat(std::span<const Value>(parts.data(), parts.size()));
}

}  // namespace

std::map<int, Value> rgcn_all_nodes(num::Tape& tape, const EmbeddingView& emb,
                                    const AggregatorWeights& w, const data::GraphSlice& slice) {
    std::map<int, Value> states;
    for (int node : slice.nodes()) states.emplace(node, emb.entity(tape, node));

    for (const RgcnLayer& layer : w.rgcn) {
        std::map<int, Value> next;
        for (int node : slice.nodes()) {
            Value acc = tape.matmul(layer.self_loop, states.at(node));
            for (int r : slice.relations_of(node)) {
                const auto& objs = slice.neighbors(node, r);
                double norm = 1.0 / static_cast<double>(objs.size());
                for (int o : objs) {
                    Value msg = block_diag_matvec(tape, layer.rel_blocks[static_cast<std::size_t>(r)],
                                                  states.at(o));
                    acc = tape.add(acc, tape.scale(msg, norm));
                }
            }
            next.emplace(node, apply_activation(tape, w.config.activation, acc));
        }
        states = std::move(next);
    }
    return states;
}

Value rgcn_aggregate(num::Tape& tape, const EmbeddingView& emb, const AggregatorWeights& w,
                     const data::GraphSlice& slice, int s) {
    const auto& nodes = slice.nodes();
    if (std::binary_search(nodes.begin(), nodes.end(), s)) {
        return rgcn_all_nodes(tape, emb, w, slice).at(s);
    }
    // Node outside the slice: self-loop path only, through every layer.
    Value h = emb.entity(tape, s);
    for (const RgcnLayer& layer : w.rgcn) {
        h = apply_activation(tape, w.config.activation, tape.matmul(layer.self_loop, h));
    }
    return h;
}

SliceAggregation::SliceAggregation(num::Tape& tape, const EmbeddingView& emb,
                                   const AggregatorWeights& w, const data::GraphSlice& slice)
    : tape_(tape), emb_(emb), w_(w), slice_(slice), zero_(Value::zeros({emb.d})) {
    if (w_.config.kind == AggregatorKind::rgcn && !slice_.empty()) {
        rgcn_nodes_ = rgcn_all_nodes(tape_, emb_, w_, slice_);
    }
}

Value SliceAggregation::pair_input(int s, int r) {
    switch (w_.config.kind) {
        case AggregatorKind::none:
            return zero_;
        case AggregatorKind::rgcn: {
            auto it = rgcn_nodes_.find(s);
            return it == rgcn_nodes_.end() ? zero_ : it->second;
        }
        case AggregatorKind::mean:
        case AggregatorKind::attentive: {
            auto key = std::make_pair(s, r);
            auto it = pair_cache_.find(key);
            if (it != pair_cache_.end()) return it->second;
            const auto& objs = slice_.neighbors(s, r);
            Value out = w_.config.kind == AggregatorKind::mean
                            ? mean_aggregate(tape_, emb_, objs)
                            : attentive_aggregate(tape_, emb_, w_.attentive, s, r, objs);
            pair_cache_.emplace(key, out);
            return out;
        }
    }
    return zero_;
}

Value SliceAggregation::entity_input(int s) {
    switch (w_.config.kind) {
        case AggregatorKind::none:
            return zero_;
        case AggregatorKind::rgcn: {
            auto it = rgcn_nodes_.find(s);
            return it == rgcn_nodes_.end() ? zero_ : it->second;
        }
        case AggregatorKind::mean:
        case AggregatorKind::attentive: {
            auto it = entity_cache_.find(s);
            if (it != entity_cache_.end()) return it->second;
            std::vector<int> rels = slice_.relations_of(s);
            Value out;
            if (rels.empty()) {
                out = zero_;
            } else {
                Value sum = pair_input(s, rels[0]);
                for (std::size_t i = 1; i < rels.size(); ++i) {
                    sum = tape_.add(sum, pair_input(s, rels[i]));
                }
                out = tape_.scale(sum, 1.0 / static_cast<double>(rels.size()));
            }
            entity_cache_.emplace(s, out);
            return out;
        }
    }
    return zero_;
}

Value SliceAggregation::global_input() {
    const auto& subjects = slice_.active_subjects();
    if (subjects.empty()) return zero_;
    std::vector<Value> parts;
    parts.reserve(subjects.size());
    for (int s : subjects) parts.push_back(entity_input(s));
    return tape_.max_pool(std::span<const Value>(parts.data(), parts.size()));
}

}  // namespace renet::agg
