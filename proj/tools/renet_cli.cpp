#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "renet/data.hpp"
#include "renet/eval.hpp"
#include "renet/infer.hpp"
#include "renet/model.hpp"
#include "renet/train.hpp"

namespace fs = std::filesystem;
using namespace renet;

namespace {

std::string default_out(const std::string& subcommand) {
    const char* root = std::getenv("RENET_OUT_ROOT");
    if (root && *root) return (fs::path(root) / subcommand).string();
    return "out-" + subcommand;
}

void write_snapshot(const CLI::App& app, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "run_config.txt");
    out << app.config_to_str(true, false);
}

void write_stats(const data::Dataset& ds, const std::string& out_dir) {
    long long train = 0, valid = 0, test = 0;
    for (const auto& sl : ds.slices) {
        long long n = static_cast<long long>(sl.events().size());
        switch (sl.origin()) {
            case data::SliceOrigin::train: train += n; break;
            case data::SliceOrigin::valid: valid += n; break;
            case data::SliceOrigin::test: test += n; break;
            default: break;
        }
    }
    long long gap = 0;
    for (std::size_t i = 1; i < ds.raw_times.size(); ++i) {
        long long d = ds.raw_times[i] - ds.raw_times[i - 1];
        if (d > 0 && (gap == 0 || d < gap)) gap = d;
    }
    std::ofstream out(fs::path(out_dir) / "stats.txt");
    out << "entities = " << ds.num_entities << "\n"
        << "relations = " << ds.num_base_relations << "\n"
        << "timestamps = " << ds.num_timestamps() << "\n"
        << "events_total = " << ds.num_events() << "\n"
        << "events_train = " << train << "\n"
        << "events_valid = " << valid << "\n"
        << "events_test = " << test << "\n"
        << "time_gap = " << gap << "\n";
}

data::Dataset load_augmented(const std::string& dir) {
    data::Dataset ds = data::load_dataset(dir);
    if (!ds.inverse_augmented) data::add_inverse_relations(ds);
    return ds;
}

void check_vocab(const data::Dataset& ds, const model::ModelParams& params) {
    if (ds.num_entities != params.cfg.num_entities ||
        ds.num_relations != params.cfg.num_relations) {
        throw DomainError("checkpoint vocabulary (" + std::to_string(params.cfg.num_entities) +
                          " entities, " + std::to_string(params.cfg.num_relations) +
                          " relations) does not match dataset (" +
                          std::to_string(ds.num_entities) + ", " +
                          std::to_string(ds.num_relations) + ")");
    }
}

std::string eval_mode_tag(infer::Filter f, const infer::InferConfig& icfg,
                          const model::ModelParams& params, const std::string& direction) {
    std::string mode = f == infer::Filter::raw ? "raw" : "filtered";
    mode += icfg.mode == infer::InferMode::multi_step ? ";multi_step" : ";no_multi_step";
    mode += ";";
    mode += agg::aggregator_name(params.cfg.aggregator.kind);
    mode += ";" + direction;
    return mode;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "id";
    bool span = false;
    long long span_unit = 1;
    long long cutoff = 0;
    double train_frac = 0.8, valid_frac = 0.1;
    std::string out;
};

void run_ingest(const IngestArgs& a) {
    data::Dataset ds;
    if (a.span) {
        std::ifstream in(a.input);
        if (!in) throw IoError("cannot open '" + a.input + "'");
        auto facts = data::parse_span_facts(in, a.input);
        ds = data::dataset_from_events(data::expand_time_spans(facts, a.span_unit, a.cutoff));
    } else {
        ds = data::parse_quadruples_file(
            a.input, a.format == "labeled" ? data::QuadFormat::labeled : data::QuadFormat::ids);
    }
    data::split_by_time(ds, a.train_frac, a.valid_frac);
    data::save_dataset(ds, a.out);
    write_stats(ds, a.out);
    std::cout << "ingested " << ds.num_events() << " events over " << ds.num_timestamps()
              << " timestamps into " << a.out << "\n";
}

struct SynthArgs {
    std::string config;
    double train_frac = 0.8, valid_frac = 0.1;
    std::string out;
};

void run_synth(const SynthArgs& a) {
    data::SyntheticSpec spec = data::parse_synthetic_spec_file(a.config);
    data::SyntheticStats stats;
    data::Dataset ds = data::generate_synthetic(spec, &stats);
    data::split_by_time(ds, a.train_frac, a.valid_frac);
    data::save_dataset(ds, a.out);
    write_stats(ds, a.out);
    std::cout << "generated " << stats.motif_events << " motif events and " << stats.noise_events
              << " noise events into " << a.out << "\n";
}

struct TrainArgs {
    std::string dataset;
    std::string out;
    train::TrainConfig tc;
    int d = 200;
    int m = 10;
    std::string aggregator = "rgcn";
    int rgcn_layers = 2;
    int rgcn_blocks = 2;
    std::string activation = "relu";
    int ckpt_every = 0;
    int eval_every = 5;
    int M = 1000;
    int k = 1000;
    int threads = 1;
};

void run_train(const TrainArgs& a) {
    data::Dataset ds = load_augmented(a.dataset);
    auto train_slices = ds.train_slices();
    if (train_slices.empty()) throw DomainError("dataset has no train split");

    model::ModelConfig mc;
    mc.num_entities = ds.num_entities;
    mc.num_relations = ds.num_relations;
    mc.d = a.d;
    mc.m = a.m;
    mc.aggregator.kind = agg::aggregator_from_string(a.aggregator);
    mc.aggregator.layers = a.rgcn_layers;
    mc.aggregator.blocks = a.rgcn_blocks;
    mc.aggregator.activation = agg::activation_from_string(a.activation);
    mc.lambda1 = a.tc.lambda1;
    mc.lambda2 = a.tc.lambda2;
    mc.seed = a.tc.seed;
    model::ModelParams params = model::ModelParams::init(mc);

    fs::create_directories(a.out);
    std::string best_path = (fs::path(a.out) / "checkpoint_best.ckpt").string();
    double best_mrr = -1.0;

    infer::InferConfig icfg;
    icfg.M = a.M;
    icfg.k = a.k;
    icfg.mode = infer::InferMode::multi_step;
    icfg.seed = a.tc.seed;

    train::EpochHook hook = [&](int epoch, const model::ModelParams& p) {
        if (a.ckpt_every > 0 && (epoch + 1) % a.ckpt_every == 0) {
            model::save_checkpoint(
                p, (fs::path(a.out) / ("checkpoint_epoch" + std::to_string(epoch) + ".ckpt"))
                       .string());
        }
        bool last = epoch + 1 == a.tc.epochs;
        if (a.eval_every > 0 && ((epoch + 1) % a.eval_every == 0 || last)) {
            eval::EvalOptions opts;
            opts.threads = a.threads;
            eval::SplitEvaluation ev =
                eval::evaluate_split(ds, data::SliceOrigin::valid, p, icfg, opts);
            double mrr = ev.report(infer::Filter::filtered).mrr;
            std::cout << "epoch " << epoch << " valid filtered MRR " << mrr << "\n";
            if (mrr > best_mrr) {
                best_mrr = mrr;
                model::save_checkpoint(p, best_path);
            }
        }
    };

    train::TrainReport report = train::fit(train_slices, params, a.tc, hook);
    if (best_mrr < 0.0) model::save_checkpoint(params, best_path);
    model::save_checkpoint(params, (fs::path(a.out) / "checkpoint_final.ckpt").string());
    {
        std::ofstream out(fs::path(a.out) / "train_report.csv");
        train::write_report_csv(out, report);
    }
    std::cout << "trained " << a.tc.epochs << " epochs; best valid MRR "
              << (best_mrr < 0 ? 0.0 : best_mrr) << "; checkpoints in " << a.out << "\n";
}

struct EvalArgs {
    std::string dataset;
    std::string checkpoint;
    std::string split = "test";
    std::string filter = "both";
    bool no_multi_step = false;
    int M = 1000;
    int k = 1000;
    std::uint64_t seed = 0;
    std::string empirical = "none";
    int threads = 1;
    std::string out;
};

void run_eval(const EvalArgs& a) {
    data::Dataset ds = load_augmented(a.dataset);
    model::ModelParams params = model::load_checkpoint(a.checkpoint);
    check_vocab(ds, params);

    infer::InferConfig icfg;
    icfg.M = a.M;
    icfg.k = a.k;
    icfg.seed = a.seed;
    icfg.mode = a.no_multi_step ? infer::InferMode::no_multi_step : infer::InferMode::multi_step;

    eval::EmpiricalBaseline base;
    infer::HeadOverrides overrides;
    eval::EvalOptions opts;
    opts.threads = a.threads;
    if (a.empirical != "none") {
        base = eval::empirical_baseline(ds.train_slices(), ds.num_entities, ds.num_relations);
        overrides.subject_p = base.p_subject;
        if (a.empirical == "sr") overrides.relation_p = base.p_relation;
        opts.overrides = &overrides;
    }

    data::SliceOrigin split =
        a.split == "valid" ? data::SliceOrigin::valid : data::SliceOrigin::test;
    eval::SplitEvaluation ev = eval::evaluate_split(ds, split, params, icfg, opts);

    std::vector<infer::Filter> filters;
    if (a.filter == "raw" || a.filter == "both") filters.push_back(infer::Filter::raw);
    if (a.filter == "filtered" || a.filter == "both") filters.push_back(infer::Filter::filtered);
    if (filters.empty()) throw ConfigError("--filter must be raw, filtered or both");

    std::vector<eval::MetricReport> reports;
    for (infer::Filter f : filters) {
        for (auto [dir, name] : {std::pair{eval::Direction::both, "both"},
                                 {eval::Direction::object_side, "object"},
                                 {eval::Direction::subject_side, "subject"}}) {
            eval::MetricReport r = ev.report(f, dir);
            r.mode = eval_mode_tag(f, icfg, params, name);
            reports.push_back(r);
        }
    }

    fs::create_directories(a.out);
    {
        std::ofstream out(fs::path(a.out) / "metrics.csv");
        eval::write_metrics_csv(out, reports);
    }
    {
        std::ofstream out(fs::path(a.out) / "per_timestamp.csv");
        eval::write_per_timestamp_csv(out,
                                      eval::per_timestamp_report(ev.records, filters.back()));
    }
    std::cout << "evaluated " << ev.records.size() << " queries; " << a.split
              << " filtered MRR "
              << (a.filter != "raw" ? ev.report(infer::Filter::filtered).mrr
                                    : ev.report(infer::Filter::raw).mrr)
              << "; audit test-slice encodes " << ev.eval_split_encodes << "\n";
}

struct ForecastArgs {
    std::string dataset;
    std::string checkpoint;
    std::string queries;
    int dt = 1;
    int topn = 10;
    std::string history = "all";
    bool no_multi_step = false;
    int M = 1000;
    int k = 1000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_forecast(const ForecastArgs& a) {
    data::Dataset ds = load_augmented(a.dataset);
    model::ModelParams params = model::load_checkpoint(a.checkpoint);
    check_vocab(ds, params);

    model::HistoryState state;
    for (const auto& sl : ds.slices) {
        if (a.history == "train" && sl.origin() != data::SliceOrigin::train) continue;
        if (a.history == "valid" && sl.origin() == data::SliceOrigin::test) continue;
        model::encode_slice(state, sl, params);
    }

    infer::InferConfig icfg;
    icfg.M = a.M;
    icfg.k = a.k;
    icfg.dt = a.dt;
    icfg.seed = a.seed;
    icfg.mode = a.no_multi_step ? infer::InferMode::no_multi_step : infer::InferMode::multi_step;
    model::HistoryState horizon = infer::multi_step_state(state, params, icfg);

    std::ifstream qin(a.queries);
    if (!qin) throw IoError("cannot open '" + a.queries + "'");

    fs::create_directories(fs::path(a.out).parent_path().empty()
                               ? "."
                               : fs::path(a.out).parent_path().string());
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write '" + a.out + "'");

    infer::KnownTriples known(ds);
    int t_horizon = state.last_t + a.dt;
    std::string line;
    long long lineno = 0, bad = 0;
    while (std::getline(qin, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string s_tok, r_tok, gt_tok;
        ls >> s_tok >> r_tok;
        bool has_gt = static_cast<bool>(ls >> gt_tok);
        int s = -1, r = -1, gt = -1;
        try {
            s = ds.entity_vocab.empty() ? std::stoi(s_tok)
                                        : ds.entity_vocab.lookup(s_tok).value_or(-1);
            r = ds.relation_vocab.empty() ? std::stoi(r_tok)
                                          : ds.relation_vocab.lookup(r_tok).value_or(-1);
            if (has_gt) {
                gt = ds.entity_vocab.empty() ? std::stoi(gt_tok)
                                             : ds.entity_vocab.lookup(gt_tok).value_or(-1);
            }
        } catch (const std::exception&) {
            s = -1;
        }
        if (s < 0 || s >= ds.num_entities || r < 0 || r >= ds.num_relations ||
            (has_gt && (gt < 0 || gt >= ds.num_entities))) {
            std::cerr << "error[E_DOMAIN] " << a.queries << ":" << lineno
                      << ": unknown ids in query '" << line << "'\n";
            ++bad;
            continue;
        }

        model::Distribution dist = model::score_objects(horizon, params, s, r);
        std::vector<int> order(dist.p.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return dist.p[static_cast<std::size_t>(x)] >
                                                    dist.p[static_cast<std::size_t>(y)]; });

        nlohmann::json rec;
        rec["s"] = s;
        rec["r"] = r;
        rec["t"] = t_horizon;
        rec["dt"] = a.dt;
        nlohmann::json cands = nlohmann::json::array();
        for (int i = 0; i < a.topn && i < static_cast<int>(order.size()); ++i) {
            nlohmann::json c;
            c["o"] = order[static_cast<std::size_t>(i)];
            if (!ds.entity_vocab.empty()) {
                c["label"] = ds.entity_vocab.names[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            }
            c["p"] = dist.p[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            cands.push_back(c);
        }
        rec["candidates"] = cands;
        if (has_gt) {
            rec["rank_gt"] = infer::rank_candidates({s, r, gt}, horizon, params,
                                                    infer::Filter::filtered, known);
        }
        out << rec.dump() << "\n";
    }
    std::cout << "forecast written to " << a.out << "\n";
    if (bad > 0) {
        throw DomainError(std::to_string(bad) + " queries referenced unknown ids");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrent event network over temporal knowledge graphs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value config file; flags override");

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Normalize a quadruple or span TSV into a dataset archive");
    ingest->add_option("--input", ia.input, "Input TSV")->required();
    ingest->add_option("--format", ia.format, "id|labeled")->check(CLI::IsMember({"id", "labeled"}));
    ingest->add_flag("--span", ia.span, "Input holds 5-field span facts");
    ingest->add_option("--span-unit", ia.span_unit, "Unit step for span expansion");
    ingest->add_option("--cutoff", ia.cutoff, "Drop events before this raw timestamp");
    ingest->add_option("--train-frac", ia.train_frac, "Train fraction");
    ingest->add_option("--valid-frac", ia.valid_frac, "Valid fraction");
    ingest->add_option("--out", ia.out, "Output directory");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic temporal graph dataset");
    synth->add_option("--spec", sa.config, "Synthetic spec file")->required();
    synth->add_option("--train-frac", sa.train_frac, "Train fraction");
    synth->add_option("--valid-frac", sa.valid_frac, "Valid fraction");
    synth->add_option("--out", sa.out, "Output directory");

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a model on an ingested dataset");
    tr->add_option("--data", ta.dataset, "Dataset archive directory")->required();
    tr->add_option("--out", ta.out, "Output directory");
    tr->add_option("--epochs", ta.tc.epochs, "Training epochs");
    tr->add_option("--lr", ta.tc.lr, "Learning rate");
    tr->add_option("--weight-decay", ta.tc.weight_decay, "Weight decay");
    tr->add_option("--lambda1", ta.tc.lambda1, "Relation loss weight");
    tr->add_option("--lambda2", ta.tc.lambda2, "Subject loss weight");
    tr->add_option("--pretrain-epochs", ta.tc.pretrain_epochs, "Global-head pretraining epochs");
    tr->add_option("--clip-norm", ta.tc.clip_norm, "Gradient clipping max norm (0 = off)");
    tr->add_option("--bptt-window", ta.tc.bptt_window, "Slices re-encoded on the tape per step");
    tr->add_option("--seed", ta.tc.seed, "Seed");
    tr->add_option("--d", ta.d, "Embedding and hidden dimension");
    tr->add_option("--m", ta.m, "History window length");
    tr->add_option("--aggregator", ta.aggregator, "none|mean|attn|rgcn")
        ->check(CLI::IsMember({"none", "mean", "attn", "attentive", "rgcn"}));
    tr->add_option("--rgcn-layers", ta.rgcn_layers, "RGCN layers");
    tr->add_option("--rgcn-blocks", ta.rgcn_blocks, "RGCN diagonal blocks");
    tr->add_option("--activation", ta.activation, "relu|identity")
        ->check(CLI::IsMember({"relu", "identity"}));
    tr->add_option("--ckpt-every", ta.ckpt_every, "Checkpoint every k epochs (0 = off)");
    tr->add_option("--eval-every", ta.eval_every, "Validate every k epochs (0 = off)");
    tr->add_option("--M", ta.M, "Subjects sampled per generated step (validation)");
    tr->add_option("--k", ta.k, "Triples kept per generated graph (validation)");
    tr->add_option("--threads", ta.threads, "Evaluation fan-out threads");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
    ev->add_option("--data", ea.dataset, "Dataset archive directory")->required();
    ev->add_option("--checkpoint", ea.checkpoint, "Checkpoint path")->required();
    ev->add_option("--split", ea.split, "valid|test")->check(CLI::IsMember({"valid", "test"}));
    ev->add_option("--filter", ea.filter, "raw|filtered|both")
        ->check(CLI::IsMember({"raw", "filtered", "both"}));
    ev->add_flag("--no-multi-step", ea.no_multi_step, "Freeze history at the training boundary");
    ev->add_option("--M", ea.M, "Subjects sampled per generated step");
    ev->add_option("--k", ea.k, "Triples kept per generated graph");
    ev->add_option("--seed", ea.seed, "Sampling seed");
    ev->add_option("--empirical", ea.empirical, "none|s|sr: swap in empirical baselines")
        ->check(CLI::IsMember({"none", "s", "sr"}));
    ev->add_option("--threads", ea.threads, "Query fan-out threads");
    ev->add_option("--out", ea.out, "Output directory");

    ForecastArgs fa;
    auto* fc = app.add_subcommand("forecast", "Rank candidates for queries at a future horizon");
    fc->add_option("--data", fa.dataset, "Dataset archive directory")->required();
    fc->add_option("--checkpoint", fa.checkpoint, "Checkpoint path")->required();
    fc->add_option("--queries", fa.queries, "Query TSV: s r [gt_o]")->required();
    fc->add_option("--dt", fa.dt, "Horizon")->check(CLI::PositiveNumber);
    fc->add_option("--topn", fa.topn, "Candidates per query");
    fc->add_option("--history", fa.history, "train|valid|all: observed slices")
        ->check(CLI::IsMember({"train", "valid", "all"}));
    fc->add_flag("--no-multi-step", fa.no_multi_step, "Do not generate intermediate graphs");
    fc->add_option("--M", fa.M, "Subjects sampled per generated step");
    fc->add_option("--k", fa.k, "Triples kept per generated graph");
    fc->add_option("--seed", fa.seed, "Sampling seed");
    fc->add_option("--out", fa.out, "Output JSON-lines file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            if (ia.out.empty()) ia.out = default_out("ingest");
            write_snapshot(*ingest, ia.out);
            run_ingest(ia);
        } else if (*synth) {
            if (sa.out.empty()) sa.out = default_out("synth");
            write_snapshot(*synth, sa.out);
            run_synth(sa);
        } else if (*tr) {
            if (ta.out.empty()) ta.out = default_out("train");
            write_snapshot(*tr, ta.out);
            run_train(ta);
        } else if (*ev) {
            if (ea.out.empty()) ea.out = default_out("eval");
            write_snapshot(*ev, ea.out);
            run_eval(ea);
        } else if (*fc) {
            if (fa.out.empty()) fa.out = (fs::path(default_out("forecast")) / "forecasts.jsonl").string();
            std::string parent = fs::path(fa.out).parent_path().string();
            write_snapshot(*fc, parent.empty() ? "." : parent);
            run_forecast(fa);
        }
    } catch (const Error& e) {
        std::cerr << "error[" << error_code_name(e.code()) << "] " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[E_UNKNOWN] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
