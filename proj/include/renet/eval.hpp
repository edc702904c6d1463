#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "renet/data.hpp"
#include "renet/infer.hpp"
#include "renet/model.hpp"

namespace renet::eval {

struct MetricReport {
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    long long n_queries = 0;
    std::string mode;
};

/// MRR = mean(1/rank); Hits@c = fraction with rank <= c. Ranks may be
/// fractional (average-rank ties). Errors on an empty list.
MetricReport mrr_hits(const std::vector<double>& ranks);

enum class Direction { both, object_side, subject_side };

struct RankRecord {
    int t = 0;
    int dt = 0;
    bool subject_side = false;
    double rank_raw = 0.0;
    double rank_filtered = 0.0;
};

struct TimePoint {
    int t = 0;
    double mrr = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    long long n = 0;
};

struct EvalOptions {
    infer::Filter filter = infer::Filter::filtered;
    int threads = 1;
    const infer::HeadOverrides* overrides = nullptr;
};

/// Rank log of one split evaluation plus the no-leakage audit counter.
struct SplitEvaluation {
    std::vector<RankRecord> records;
    long long eval_split_encodes = 0;  // encoder reads of the evaluated split; must be 0

    std::vector<double> ranks(infer::Filter f, Direction dir) const;
    MetricReport report(infer::Filter f, Direction dir = Direction::both) const;
};

/// Evaluates every event of the split in both query directions (subject side
/// via inverse relations) under multi-step inference from the boundary of
/// the observed data. One generation walk is shared across the split: at
/// each timestamp queries are scored first, then the generated graph is
/// sampled and encoded. The ground truth of the evaluated split never enters
/// a state update.
SplitEvaluation evaluate_split(const data::Dataset& ds, data::SliceOrigin split,
                               const model::ModelParams& params, const infer::InferConfig& icfg,
                               const EvalOptions& opts = {});

/// Metrics grouped per test timestamp, in time order.
std::vector<TimePoint> per_timestamp_report(const std::vector<RankRecord>& records,
                                            infer::Filter f, Direction dir = Direction::both);

/// Frequency distributions from the train split, usable as drop-in
/// replacements for the subject/relation heads.
struct EmpiricalBaseline {
    std::vector<double> p_subject;   // p_e(s)
    std::vector<double> p_relation;  // p_e(r); p_e(s,r) factorizes as the product
};

EmpiricalBaseline empirical_baseline(const std::vector<const data::GraphSlice*>& train,
                                     int num_entities, int num_relations);

void write_metrics_csv(std::ostream& out, const std::vector<MetricReport>& reports);
void write_per_timestamp_csv(std::ostream& out, const std::vector<TimePoint>& series);

}  // namespace renet::eval
