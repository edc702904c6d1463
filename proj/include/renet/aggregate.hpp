#pragma once

#include <map>
#include <string>
#include <vector>

#include "renet/data.hpp"
#include "renet/optim.hpp"
#include "renet/value.hpp"

namespace renet::agg {

enum class AggregatorKind { none, mean, attentive, rgcn };

AggregatorKind aggregator_from_string(const std::string& name);
const char* aggregator_name(AggregatorKind k);

enum class Activation { relu, identity };

Activation activation_from_string(const std::string& name);
const char* activation_name(Activation a);

/// Block-diagonal per-relation weights for one message-passing layer:
/// diag(A_1r, ..., A_Br) with A_kr of shape (d/B, d/B), plus a dense
/// self-loop matrix.
struct RgcnLayer {
    std::vector<std::vector<num::Value>> rel_blocks;  // [relation][block] (d/B, d/B)
    num::Value self_loop;                             // (d, d)
};

struct AttentiveWeights {
    num::Value W;  // (d, 3d)
    num::Value v;  // (d)
};

struct AggregatorConfig {
    AggregatorKind kind = AggregatorKind::rgcn;
    int layers = 2;
    int blocks = 2;
    Activation activation = Activation::relu;
};

struct AggregatorWeights {
    AggregatorConfig config;
    AttentiveWeights attentive;      // defined when kind == attentive
    std::vector<RgcnLayer> rgcn;     // defined when kind == rgcn, size == layers
};

/// Per-relation trainable parameter count of one rgcn layer: d_out*d_in/B.
long long rgcn_params_per_relation(int d_in, int d_out, int blocks);

/// Embedding lookup context shared by the aggregators: rows of the entity
/// and relation embedding matrices as tape values.
struct EmbeddingView {
    const num::Value& entities;   // (num_entities, d)
    const num::Value& relations;  // (num_relations, d)
    int d;

    num::Value entity(num::Tape& tape, int id) const;
    num::Value relation(num::Tape& tape, int id) const;
};

/// Element-wise mean of neighbor embeddings; zero vector for an empty set.
num::Value mean_aggregate(num::Tape& tape, const EmbeddingView& emb,
                          const std::vector<int>& neighbors);

/// Additive-attention weighted sum over neighbor embeddings; zero vector for
/// an empty set.
num::Value attentive_aggregate(num::Tape& tape, const EmbeddingView& emb,
                               const AttentiveWeights& w, int s, int r,
                               const std::vector<int>& neighbors);

/// Multi-relational message passing restricted to the slice's edges; returns
/// the top-layer states of every slice node. Layer 0 states are the entity
/// embeddings; normalization is per-relation in-degree.
std::map<int, num::Value> rgcn_all_nodes(num::Tape& tape, const EmbeddingView& emb,
                                         const AggregatorWeights& w,
                                         const data::GraphSlice& slice);

num::Value rgcn_aggregate(num::Tape& tape, const EmbeddingView& emb, const AggregatorWeights& w,
                          const data::GraphSlice& slice, int s);

/// Per-slice aggregation cache so that rgcn message passing and the
/// per-subject vectors are computed once per encoded slice.
class SliceAggregation {
public:
    SliceAggregation(num::Tape& tape, const EmbeddingView& emb, const AggregatorWeights& w,
                     const data::GraphSlice& slice);

    /// g for the pair (s, r): relation-restricted for mean/attentive,
    /// whole-neighborhood for rgcn, zero for none.
    num::Value pair_input(int s, int r);
    /// g for entity s feeding the entity-level and global paths:
    /// relation-averaged for mean/attentive.
    num::Value entity_input(int s);
    /// Element-wise max over entity_input of all active subjects; zero
    /// vector for an empty slice.
    num::Value global_input();

private:
    num::Tape& tape_;
    const EmbeddingView& emb_;
    const AggregatorWeights& w_;
    const data::GraphSlice& slice_;
    std::map<int, num::Value> rgcn_nodes_;
    std::map<std::pair<int, int>, num::Value> pair_cache_;
    std::map<int, num::Value> entity_cache_;
    num::Value zero_;
};

}  // namespace renet::agg
