#include "renet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <map>
#include <ostream>

namespace renet::eval {

using data::Dataset;
using data::GraphSlice;
using data::SliceOrigin;
using model::HistoryState;
using model::ModelParams;

MetricReport mrr_hits(const std::vector<double>& ranks) {
    if (ranks.empty()) throw DomainError("mrr_hits: empty rank list");
    MetricReport r;
    for (double rank : ranks) {
        if (rank < 1.0) throw DomainError("mrr_hits: rank below 1");
        r.mrr += 1.0 / rank;
        if (rank <= 1.0) r.hits1 += 1.0;
        if (rank <= 3.0) r.hits3 += 1.0;
        if (rank <= 10.0) r.hits10 += 1.0;
    }
    double n = static_cast<double>(ranks.size());
    r.mrr /= n;
    r.hits1 /= n;
    r.hits3 /= n;
    r.hits10 /= n;
    r.n_queries = static_cast<long long>(ranks.size());
    return r;
}

std::vector<double> SplitEvaluation::ranks(infer::Filter f, Direction dir) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const RankRecord& rec : records) {
        if (dir == Direction::object_side && rec.subject_side) continue;
        if (dir == Direction::subject_side && !rec.subject_side) continue;
        out.push_back(f == infer::Filter::raw ? rec.rank_raw : rec.rank_filtered);
    }
    return out;
}

MetricReport SplitEvaluation::report(infer::Filter f, Direction dir) const {
    MetricReport r = mrr_hits(ranks(f, dir));
    r.mode = f == infer::Filter::raw ? "raw" : "filtered";
    return r;
}

SplitEvaluation evaluate_split(const Dataset& ds, SliceOrigin split, const ModelParams& params,
                               const infer::InferConfig& icfg, const EvalOptions& opts) {
    if (!ds.splits) throw DomainError("evaluate_split: dataset has no split boundaries");
    auto eval_slices = ds.split_slices(split);
    if (eval_slices.empty()) throw DomainError("evaluate_split: split is empty");

    // Observed history: every real slice strictly before the split.
    int first_t = eval_slices.front()->t();
    std::vector<const GraphSlice*> context;
    for (const auto& sl : ds.slices) {
        if (sl.origin() == split) continue;
        if (sl.origin() == SliceOrigin::generated) continue;
        if (sl.t() < first_t) context.push_back(&sl);
    }
    auto train = ds.train_slices();
    if (!train.empty() && first_t <= train.back()->t()) {
        throw DomainError("evaluate_split: split overlaps training timestamps");
    }

    HistoryState state;
    for (const GraphSlice* sl : context) model::encode_slice(state, *sl, params);
    int boundary_t = state.last_t;

    infer::KnownTriples known(ds);
    Rng rng(icfg.seed ^ 0x8f1c352bd9e7ull);

    SplitEvaluation out;
    int rb = ds.num_base_relations;

    for (const GraphSlice* sl : eval_slices) {
        // With multi-step inference, generate through any timestamp gap up to
        // (but excluding) this slice, then score, then generate this step.
        if (icfg.mode == infer::InferMode::multi_step) {
            while (state.last_t + 1 < sl->t()) {
                int t = state.last_t + 1;
                infer::GeneratedGraph g = infer::sample_graph(state, params, icfg, t, rng,
                                                              opts.overrides);
                if (g.events.empty()) break;  // nothing to encode, state cannot advance
                model::encode_slice(state, g.as_slice(), params);
            }
        }

        std::vector<infer::RankQuery> queries;
        std::vector<bool> subject_side;
        for (const data::Event& e : sl->events()) {
            if (e.r >= rb) continue;  // mirrored copy of a base event
            queries.push_back({e.s, e.r, e.o});
            subject_side.push_back(false);
            if (ds.inverse_augmented) {
                queries.push_back({e.o, e.r + rb, e.s});
                subject_side.push_back(true);
            }
        }

        std::vector<RankRecord> recs(queries.size());
        auto score_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                RankRecord rec;
                rec.t = sl->t();
                rec.dt = sl->t() - boundary_t;
                rec.subject_side = subject_side[i];
                rec.rank_raw =
                    infer::rank_candidates(queries[i], state, params, infer::Filter::raw, known);
                rec.rank_filtered = infer::rank_candidates(queries[i], state, params,
                                                           infer::Filter::filtered, known);
                recs[i] = rec;
            }
        };
        int threads = std::max(1, opts.threads);
        if (threads == 1 || queries.size() < 2) {
            score_range(0, queries.size());
        } else {
            std::size_t chunk = (queries.size() + threads - 1) / static_cast<std::size_t>(threads);
            std::vector<std::future<void>> futs;
            for (std::size_t lo = 0; lo < queries.size(); lo += chunk) {
                std::size_t hi = std::min(queries.size(), lo + chunk);
                futs.push_back(std::async(std::launch::async, score_range, lo, hi));
            }
            for (auto& f : futs) f.get();
        }
        out.records.insert(out.records.end(), recs.begin(), recs.end());

        if (icfg.mode == infer::InferMode::multi_step) {
            infer::GeneratedGraph g =
                infer::sample_graph(state, params, icfg, sl->t(), rng, opts.overrides);
            if (!g.events.empty()) model::encode_slice(state, g.as_slice(), params);
        }
    }

    auto it = state.encode_counts.find(split);
    out.eval_split_encodes = it == state.encode_counts.end() ? 0 : it->second;
    return out;
}

std::vector<TimePoint> per_timestamp_report(const std::vector<RankRecord>& records,
                                            infer::Filter f, Direction dir) {
    std::map<int, std::vector<double>> by_t;
    for (const RankRecord& rec : records) {
        if (dir == Direction::object_side && rec.subject_side) continue;
        if (dir == Direction::subject_side && !rec.subject_side) continue;
        by_t[rec.t].push_back(f == infer::Filter::raw ? rec.rank_raw : rec.rank_filtered);
    }
    std::vector<TimePoint> series;
    for (const auto& [t, ranks] : by_t) {
        MetricReport r = mrr_hits(ranks);
        series.push_back({t, r.mrr, r.hits3, r.hits10, r.n_queries});
    }
    return series;
}

EmpiricalBaseline empirical_baseline(const std::vector<const GraphSlice*>& train,
                                     int num_entities, int num_relations) {
    long long total = 0;
    for (const GraphSlice* sl : train) total += static_cast<long long>(sl->events().size());
    if (total == 0) throw DomainError("empirical_baseline: empty train split");

    EmpiricalBaseline b;
    b.p_subject.assign(static_cast<std::size_t>(num_entities), 0.0);
    b.p_relation.assign(static_cast<std::size_t>(num_relations), 0.0);
    for (const GraphSlice* sl : train) {
        for (const data::Event& e : sl->events()) {
            b.p_subject[static_cast<std::size_t>(e.s)] += 1.0;
            b.p_relation[static_cast<std::size_t>(e.r)] += 1.0;
        }
    }
    for (double& p : b.p_subject) p /= static_cast<double>(total);
    for (double& p : b.p_relation) p /= static_cast<double>(total);
    return b;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricReport>& reports) {
    out << "mode,MRR,H@1,H@3,H@10,n_queries\n";
    char buf[200];
    for (const MetricReport& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%lld\n", r.mode.c_str(), r.mrr,
                      r.hits1, r.hits3, r.hits10, r.n_queries);
        out << buf;
    }
}

void write_per_timestamp_csv(std::ostream& out, const std::vector<TimePoint>& series) {
    out << "t,MRR,H@3,H@10,n\n";
    char buf[160];
    for (const TimePoint& tp : series) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%lld\n", tp.t, tp.mrr, tp.hits3,
                      tp.hits10, tp.n);
        out << buf;
    }
}

}  // namespace renet::eval
