#pragma once

#include <unordered_set>
#include <vector>

#include "renet/data.hpp"
#include "renet/model.hpp"

namespace renet::infer {

enum class InferMode { multi_step, no_multi_step };

struct InferConfig {
    int M = 1000;       // subjects sampled per generated step
    int k = 1000;       // triples kept per generated graph
    int dt = 1;         // horizon
    InferMode mode = InferMode::multi_step;
    std::uint64_t seed = 0;
};

/// Optional drop-in replacements for the subject / relation heads
/// (empirical-probability ablations). The object head is never replaced.
struct HeadOverrides {
    std::vector<double> subject_p;   // empty = use the trained head
    std::vector<double> relation_p;  // empty = use the trained head
};

struct ScoredEvent {
    int s = 0, r = 0, o = 0;
    double p = 0.0;
};

/// Up to k events ranked by estimated probability, descending; ties resolve
/// to ascending (s, r, o).
struct GeneratedGraph {
    int t = 0;
    std::vector<ScoredEvent> events;

    data::GraphSlice as_slice() const;
};

/// Samples M subjects (categorical, with replacement, then deduplicated),
/// enumerates all (r, o) per sampled subject and keeps the global top-k by
/// joint probability.
GeneratedGraph sample_graph(const model::HistoryState& state, const model::ModelParams& params,
                            const InferConfig& cfg, int t, Rng& rng,
                            const HeadOverrides* overrides = nullptr);

/// Walks the horizon on a copy of the state: for each intermediate step one
/// graph is sampled and encoded (empty graphs are skipped, so k = 0 leaves
/// the copy untouched). In no_multi_step mode the copy is returned as-is.
/// The input state is never mutated.
model::HistoryState multi_step_state(const model::HistoryState& state,
                                     const model::ModelParams& params, const InferConfig& cfg,
                                     const HeadOverrides* overrides = nullptr);

/// Triple set keyed time-agnostically, for the filtered ranking setting.
class KnownTriples {
public:
    KnownTriples() = default;
    explicit KnownTriples(const data::Dataset& ds);
    void insert(int s, int r, int o);
    bool contains(int s, int r, int o) const;
    std::size_t size() const { return set_.size(); }

private:
    std::unordered_set<std::uint64_t> set_;
};

enum class Filter { raw, filtered };

struct RankQuery {
    int s = 0;
    int r = 0;
    int ground_truth = 0;
};

/// Rank of the ground-truth object among all entities under the object head,
/// with exact score ties receiving the average of their positional ranks.
/// Filtered mode removes other known-true objects of (s, r) before ranking.
double rank_candidates(const RankQuery& query, const model::HistoryState& state,
                       const model::ModelParams& params, Filter filter,
                       const KnownTriples& known);

}  // namespace renet::infer
