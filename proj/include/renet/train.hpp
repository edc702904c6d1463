#pragma once

#include <functional>
#include <string>
#include <vector>

#include "renet/data.hpp"
#include "renet/model.hpp"
#include "renet/optim.hpp"

namespace renet::train {

struct TrainConfig {
    int epochs = 30;
    double lr = 0.001;
    double weight_decay = 1e-5;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    int pretrain_epochs = 1;
    double clip_norm = 0.0;  // 0 disables
    // Slices per optimizer step is fixed at one (per-slice steps); gradients
    // flow through the re-encoding of this many preceding slices.
    int bptt_window = 1;
    std::uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double total = 0.0;
    double obj_term = 0.0;   // weighted contributions; total is their sum
    double rel_term = 0.0;
    double subj_term = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
};

void write_report_csv(std::ostream& out, const TrainReport& report);

/// Weighted negative-log-likelihood of one slice's events against the given
/// state view: sum of obj + lambda1*rel + lambda2*subj cross-entropy terms.
struct SliceLoss {
    num::Value total;
    double obj_term = 0.0;
    double rel_term = 0.0;
    double subj_term = 0.0;
};

SliceLoss compute_loss(num::Tape& tape, const model::StateView& view,
                       const data::GraphSlice& slice, const model::ModelParams& params,
                       double lambda1, double lambda2);

/// Fully differentiable loss of a slice sequence starting from a cold state:
/// every encode step stays on the tape. Used by gradient checks.
num::Value sequence_loss(num::Tape& tape, const std::vector<const data::GraphSlice*>& slices,
                         const model::ModelParams& params, double lambda1, double lambda2);

/// One teacher-forced pass over the training slices in time order: per slice,
/// loss from the current state, backward, optimizer step, then the
/// ground-truth slice is encoded into the state.
EpochStats train_epoch(const std::vector<const data::GraphSlice*>& slices,
                       model::ModelParams& params, num::Adam& opt, const TrainConfig& cfg,
                       int epoch_index);

/// Pretraining stage: optimizes the subject head, the global cell and the
/// aggregator weights against the lambda2 term; everything else frozen.
void pretrain_global(const std::vector<const data::GraphSlice*>& slices,
                     model::ModelParams& params, const TrainConfig& cfg);

/// Full schedule: pretraining then epochs of teacher forcing. The hook runs
/// after every epoch (checkpointing, validation-based selection).
using EpochHook = std::function<void(int epoch, const model::ModelParams& params)>;

TrainReport fit(const std::vector<const data::GraphSlice*>& slices, model::ModelParams& params,
                const TrainConfig& cfg, const EpochHook& hook = nullptr);

}  // namespace renet::train
