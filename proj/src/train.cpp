#include "renet/train.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

namespace renet::train {

using model::EncodedSlice;
using model::HistoryState;
using model::ModelParams;
using model::StateView;
using num::Tape;
using num::Value;

void write_report_csv(std::ostream& out, const TrainReport& report) {
    out << "epoch,total,obj_term,rel_term,subj_term,seconds\n";
    char buf[160];
    for (const EpochStats& e : report.epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.3f\n", e.epoch, e.total,
                      e.obj_term, e.rel_term, e.subj_term, e.seconds);
        out << buf;
    }
}

namespace {

SliceLoss weighted_loss(Tape& tape, const StateView& view, const data::GraphSlice& slice,
                        const ModelParams& params, double w_obj, double w_rel, double w_subj) {
    SliceLoss out;
    std::vector<Value> terms;
    for (const data::Event& e : slice.events()) {
        if (w_obj != 0.0) {
            Value ce = tape.softmax_cross_entropy(
                model::object_logits(tape, view, params, e.s, e.r), e.o);
            out.obj_term += w_obj * ce.item();
            terms.push_back(w_obj == 1.0 ? ce : tape.scale(ce, w_obj));
        }
        if (w_rel != 0.0) {
            Value ce = tape.softmax_cross_entropy(model::relation_logits(tape, view, params, e.s),
                                                  e.r);
            out.rel_term += w_rel * ce.item();
            terms.push_back(tape.scale(ce, w_rel));
        }
        if (w_subj != 0.0) {
            Value ce =
                tape.softmax_cross_entropy(model::subject_logits(tape, view, params), e.s);
            out.subj_term += w_subj * ce.item();
            terms.push_back(tape.scale(ce, w_subj));
        }
    }
    if (terms.empty()) {
        out.total = Value::zeros({1});
        return out;
    }
    Value total = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) total = tape.add(total, terms[i]);
    out.total = total;
    return out;
}

}  // namespace

SliceLoss compute_loss(Tape& tape, const StateView& view, const data::GraphSlice& slice,
                       const ModelParams& params, double lambda1, double lambda2) {
    return weighted_loss(tape, view, slice, params, 1.0, lambda1, lambda2);
}

namespace {

/// Accumulated on-tape recurrent state for differentiable multi-slice
/// encoding.
struct RunningOverlay {
    EncodedSlice acc;

    void merge(EncodedSlice&& enc) {
        acc.global = enc.global;
        for (auto& [k, v] : enc.h_entity) acc.h_entity[k] = v;
        for (auto& [k, v] : enc.h_pair) acc.h_pair[k] = v;
    }
};

}  // namespace

Value sequence_loss(Tape& tape, const std::vector<const data::GraphSlice*>& slices,
                    const ModelParams& params, double lambda1, double lambda2) {
    HistoryState cold;
    RunningOverlay running;
    Value total = Value::zeros({1});
    for (const data::GraphSlice* slice : slices) {
        StateView view(cold, params.cfg.d, &running.acc);
        SliceLoss sl = compute_loss(tape, view, *slice, params, lambda1, lambda2);
        total = tape.add(total, sl.total);
        running.merge(model::encode_slice_on_tape(tape, view, *slice, params));
    }
    return total;
}

namespace {

struct StepOutcome {
    SliceLoss loss;
};

/// Shared per-slice step machinery: the view re-encodes up to `window`
/// preceding slices on the tape from a lagged numeric snapshot, so that
/// recurrent and aggregator weights receive gradient.
class SequenceTrainer {
public:
    SequenceTrainer(const std::vector<const data::GraphSlice*>& slices, ModelParams& params,
                    int window)
        : slices_(slices), params_(params), window_(std::max(0, window)) {}

    bool done() const { return next_ >= slices_.size(); }

    /// Builds the loss for the next slice on the tape. The caller backprops
    /// and steps the optimizer, then calls advance().
    SliceLoss build_loss(Tape& tape, double w_obj, double w_rel, double w_subj,
                         RunningOverlay& overlay) {
        const data::GraphSlice& target = *slices_[next_];
        for (const data::GraphSlice* sl : pending_) {
            StateView view(lagged_, params_.cfg.d, &overlay.acc);
            overlay.merge(model::encode_slice_on_tape(tape, view, *sl, params_));
        }
        StateView view(lagged_, params_.cfg.d, &overlay.acc);
        return weighted_loss(tape, view, target, params_, w_obj, w_rel, w_subj);
    }

    /// Moves the window forward: the target slice joins the pending window
    /// and the oldest pending slice is folded into the numeric snapshot.
    void advance() {
        pending_.push_back(slices_[next_]);
        while (pending_.size() > static_cast<std::size_t>(window_)) {
            model::encode_slice(lagged_, *pending_.front(), params_);
            pending_.erase(pending_.begin());
        }
        ++next_;
    }

private:
    const std::vector<const data::GraphSlice*>& slices_;
    ModelParams& params_;
    int window_;
    HistoryState lagged_;  // numeric state lagging `pending_` behind
    std::vector<const data::GraphSlice*> pending_;
    std::size_t next_ = 0;
};

}  // namespace

EpochStats train_epoch(const std::vector<const data::GraphSlice*>& slices, ModelParams& params,
                       num::Adam& opt, const TrainConfig& cfg, int epoch_index) {
    if (slices.empty()) throw DomainError("train_epoch: empty train split");
    auto t0 = std::chrono::steady_clock::now();

    num::ParamList trainable = params.named_params();
    EpochStats stats;
    stats.epoch = epoch_index;

    SequenceTrainer seq(slices, params, cfg.bptt_window);
    while (!seq.done()) {
        Tape tape;
        RunningOverlay overlay;
        SliceLoss loss = seq.build_loss(tape, 1.0, cfg.lambda1, cfg.lambda2, overlay);
        if (!loss.total.all_finite()) {
            throw NumericError("train_epoch: non-finite loss at epoch " +
                               std::to_string(epoch_index));
        }
        stats.obj_term += loss.obj_term;
        stats.rel_term += loss.rel_term;
        stats.subj_term += loss.subj_term;
        if (loss.total.requires_grad()) {
            opt.zero_grads(trainable);
            tape.backward(loss.total);
            opt.step(trainable);
        }
        seq.advance();
    }
    stats.total = stats.obj_term + stats.rel_term + stats.subj_term;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

void pretrain_global(const std::vector<const data::GraphSlice*>& slices, ModelParams& params,
                     const TrainConfig& cfg) {
    if (cfg.pretrain_epochs <= 0) return;
    if (slices.empty()) throw DomainError("pretrain_global: empty train split");

    num::AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;
    acfg.clip_norm = cfg.clip_norm;
    num::Adam opt(acfg);
    num::ParamList trainable = params.global_head_params();

    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        SequenceTrainer seq(slices, params, cfg.bptt_window);
        while (!seq.done()) {
            Tape tape;
            RunningOverlay overlay;
            SliceLoss loss = seq.build_loss(tape, 0.0, 0.0, cfg.lambda2, overlay);
            if (loss.total.requires_grad()) {
                opt.zero_grads(trainable);
                tape.backward(loss.total);
                opt.step(trainable);
            }
            seq.advance();
        }
    }
}

TrainReport fit(const std::vector<const data::GraphSlice*>& slices, ModelParams& params,
                const TrainConfig& cfg, const EpochHook& hook) {
    pretrain_global(slices, params, cfg);

    num::AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;
    acfg.clip_norm = cfg.clip_norm;
    num::Adam opt(acfg);

    TrainReport report;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        report.epochs.push_back(train_epoch(slices, params, opt, cfg, epoch));
        if (hook) hook(epoch, params);
    }
    return report;
}

}  // namespace renet::train
