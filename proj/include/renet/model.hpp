#pragma once

#include <array>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "renet/aggregate.hpp"
#include "renet/data.hpp"
#include "renet/optim.hpp"
#include "renet/value.hpp"

namespace renet::model {

struct GruWeights {
    num::Value Wz, Uz, Wr, Ur, Wh, Uh;
};

struct ModelConfig {
    int num_entities = 0;
    int num_relations = 0;  // after inverse augmentation
    int d = 200;
    int m = 10;
    agg::AggregatorConfig aggregator;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    std::uint64_t seed = 0;
};

/// All learnable arrays: embeddings, the three recurrent cells, aggregator
/// weights and the three linear softmax heads. Initialization is uniform in
/// [-a, a] with a = sqrt(6/(fan_in+fan_out)).
struct ModelParams {
    ModelConfig cfg;

    num::Value ent_emb;  // (num_entities, d)
    num::Value rel_emb;  // (num_relations, d)
    GruWeights gru_global;  // input d
    GruWeights gru_pair;    // input 4d: [e_s : e_r : g : H]
    GruWeights gru_entity;  // input 3d: [e_s : g : H]
    agg::AggregatorWeights aggregator;
    num::Value w_obj;   // (num_entities, 3d)
    num::Value w_rel;   // (num_relations, 2d)
    num::Value w_subj;  // (num_entities, d)

    static ModelParams init(const ModelConfig& cfg);

    num::ParamList named_params() const;
    /// Subject head, global GRU and aggregator weights: the groups trained
    /// during the pretraining stage.
    num::ParamList global_head_params() const;

    agg::EmbeddingView embeddings() const { return {ent_emb, rel_emb, cfg.d}; }
};

/// Sliding recurrent state: the global vector, per-entity and per-pair local
/// vectors, and the window of the last m encoded slices. Absent keys denote
/// zero vectors (cold start).
struct HistoryState {
    std::vector<double> global;  // dim d; empty means cold start
    std::map<int, std::vector<double>> h_entity;
    std::map<std::pair<int, int>, std::vector<double>> h_pair;
    std::deque<data::GraphSlice> window;
    int last_t = -1;
    std::map<data::SliceOrigin, long long> encode_counts;

    bool has_global() const { return !global.empty(); }
};

/// Newly computed recurrent vectors for one slice, still attached to a tape.
struct EncodedSlice {
    num::Value global;
    std::map<int, num::Value> h_entity;
    std::map<std::pair<int, int>, num::Value> h_pair;
};

/// Read access to the recurrent state while building a loss: values from an
/// optional in-tape overlay take precedence over the stored numeric state.
class StateView {
public:
    StateView(const HistoryState& base, int d, const EncodedSlice* overlay = nullptr)
        : base_(base), overlay_(overlay), d_(d) {}

    num::Value global() const;
    num::Value entity(int s) const;
    num::Value pair(int s, int r) const;

private:
    const HistoryState& base_;
    const EncodedSlice* overlay_;
    int d_;
};

/// One gated-recurrent-unit step:
/// h' = (1-z) o h + z o tanh(Wh a + Uh (r o h)).
num::Value gru_step(num::Tape& tape, const GruWeights& w, const num::Value& input,
                    const num::Value& h_prev);

/// Computes the slice's recurrent updates on the tape: the global vector via
/// the global cell and, for every active subject / (subject, relation) pair,
/// the local vectors. Inactive entities are untouched.
EncodedSlice encode_slice_on_tape(num::Tape& tape, const StateView& view,
                                  const data::GraphSlice& slice, const ModelParams& params);

/// Advances the numeric state by one slice (teacher-forced or generated).
/// Errors on non-increasing timestamps.
void encode_slice(HistoryState& state, const data::GraphSlice& slice, const ModelParams& params);

struct Distribution {
    std::vector<double> p;
    double sum() const;
};

// Probability heads. The *_logits forms stay on the tape for loss terms; the
// score_* forms return normalized numeric distributions.
num::Value object_logits(num::Tape& tape, const StateView& view, const ModelParams& params,
                         int s, int r);
num::Value relation_logits(num::Tape& tape, const StateView& view, const ModelParams& params,
                           int s);
num::Value subject_logits(num::Tape& tape, const StateView& view, const ModelParams& params);

Distribution score_objects(const HistoryState& state, const ModelParams& params, int s, int r);
Distribution score_relations(const HistoryState& state, const ModelParams& params, int s);
Distribution score_subjects(const HistoryState& state, const ModelParams& params);

double joint_event_probability(const HistoryState& state, const ModelParams& params, int s,
                               int r, int o);

// Checkpoint: self-describing JSON header followed by named little-endian
// f64 arrays.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace renet::model
