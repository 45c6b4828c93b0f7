#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "tensor.hpp"

namespace mage {

enum class Regime { Supervised, SemiSupervised };
enum class StopReason { MaxEpochs, EarlyStop };

std::string regime_name(Regime r);
Regime parse_regime(const std::string& name);

struct TrainConfig {
    int horizon = 0;  // weeks ahead, 0..7
    int epochs = 200;
    double base_lr = 1e-3;
    double min_lr = 1e-5;
    double weight_decay = 1e-4;
    double agc_lambda = 0.01;
    int patience = 20;
    std::uint64_t seed = 1;
    Regime regime = Regime::Supervised;

    void validate() const;
};

struct ClassWeights {
    double w0;
    double w1;
};

// Inverse-proportion weights w_c = N / (2 N_c): the weighted mass of each
// class comes out equal. Requires both classes present.
ClassWeights class_weights(const std::vector<int>& labels);

// min_lr + (base_lr - min_lr) (1 + cos(pi epoch / total)) / 2, epoch 0-based.
double cosine_lr(int epoch, int total_epochs, double base_lr, double min_lr);

// Per-tensor adaptive gradient clipping with Frobenius norms: rescales the
// gradient so ||g|| <= lambda * max(||w||, 1e-3). The 1e-3 floor keeps
// zero-initialized biases trainable.
std::vector<double> adaptive_gradient_clip(const std::vector<double>& param_values,
                                           std::vector<double> grad, double agc_lambda);

// Adam with decoupled weight decay over a fixed parameter list. Buffers are
// keyed by position; step() consumes the gradients currently attached to the
// tensors.
class AdamW {
  public:
    explicit AdamW(std::vector<std::pair<std::string, Tensor>> params, double weight_decay,
                   double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(double lr);
    void zero_grad();

    long step_count() const { return step_count_; }

  private:
    std::vector<std::pair<std::string, Tensor>> params_;
    std::vector<std::vector<double>> first_moment_;
    std::vector<std::vector<double>> second_moment_;
    double weight_decay_, beta1_, beta2_, eps_;
    long step_count_ = 0;
};

// Weighted BCE averaged over the labeled nodes only. Unlabeled logits
// contribute nothing to the loss value, but their features still reach
// labeled logits through message passing.
Tensor masked_loss(Tape& tape, const Tensor& logits, const std::vector<double>& labels,
                   const std::vector<std::uint8_t>& labeled_mask, const ClassWeights& weights);

// One graph snapshot ready for a full-graph gradient step. target_mask marks
// nodes whose outcome at (week + horizon) was observed.
struct WeekBatch {
    int week = 0;
    SpatialGraph graph;
    Tensor features;
    std::vector<double> targets;
    std::vector<std::uint8_t> target_mask;

    std::size_t labeled_count() const;
};

struct EpochRecord {
    int epoch;  // 0-based; the cosine schedule is indexed by this
    double lr;
    double train_loss;
    double val_loss;
};

struct TrainingRun {
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    StopReason stop_reason = StopReason::MaxEpochs;
    ModelParameters best_params;

    int epochs_completed() const { return static_cast<int>(history.size()); }
};

// `epoch,lr,train_loss,val_loss` rows, one per epoch.
std::string serialize_training_log(const TrainingRun& run);

// Full-graph AdamW training over the per-week sequence: one gradient step
// per week per epoch in chronological order, AGC before each step, cosine
// learning-rate decay per epoch, early stopping on validation loss.
TrainingRun train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::vector<WeekBatch>& train_weeks, const std::vector<WeekBatch>& val_weeks);

// Independent runs with distinct seeds; everything else shared.
std::vector<TrainingRun> train_ensemble(const ModelConfig& model_config, const TrainConfig& train_config,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::vector<WeekBatch>& train_weeks,
                                        const std::vector<WeekBatch>& val_weeks);

// Eval-mode sigmoid probabilities for one member.
std::vector<double> predict_probabilities(const ModelConfig& config, const ModelParameters& params,
                                          const SpatialGraph& graph, const Tensor& features);

// Per-node mean of the members' probabilities.
std::vector<double> ensemble_mean_probabilities(const ModelConfig& config,
                                                const std::vector<ModelParameters>& members,
                                                const SpatialGraph& graph, const Tensor& features);

}  // namespace mage
