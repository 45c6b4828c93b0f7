#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csv.hpp"

namespace mage {

std::string regime_name(Regime r) { return r == Regime::Supervised ? "supervised" : "semi-supervised"; }

Regime parse_regime(const std::string& name) {
    if (name == "supervised") return Regime::Supervised;
    if (name == "semi-supervised") return Regime::SemiSupervised;
    throw_param("unknown regime '" + name + "' (expected supervised or semi-supervised)");
}

void TrainConfig::validate() const {
    if (horizon < 0 || horizon > 7) throw_param("train: horizon must be in 0..7");
    if (epochs < 1) throw_param("train: epochs must be >= 1");
    if (!(base_lr > 0.0) || !(min_lr > 0.0)) throw_param("train: learning rates must be positive");
    if (min_lr > base_lr) throw_param("train: min_lr must not exceed base_lr");
    if (weight_decay < 0.0) throw_param("train: weight_decay must be nonnegative");
    if (!(agc_lambda > 0.0)) throw_param("train: agc_lambda must be positive");
    if (patience < 1) throw_param("train: patience must be >= 1");
}

ClassWeights class_weights(const std::vector<int>& labels) {
    std::size_t n0 = 0, n1 = 0;
    for (int y : labels) {
        if (y == 0)
            ++n0;
        else if (y == 1)
            ++n1;
        else
            throw_data("class_weights: non-binary label " + std::to_string(y));
    }
    if (n0 == 0 || n1 == 0) throw_data("class_weights: training data holds a single class");
    const double n = static_cast<double>(n0 + n1);
    return {n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
}

double cosine_lr(int epoch, int total_epochs, double base_lr, double min_lr) {
    if (total_epochs < 1) throw_param("cosine_lr: total_epochs must be >= 1");
    if (epoch < 0 || epoch > total_epochs) throw_param("cosine_lr: epoch out of [0, total]");
    const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

namespace {

double frobenius_norm(const std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

constexpr double kAgcWeightFloor = 1e-3;

}  // namespace

std::vector<double> adaptive_gradient_clip(const std::vector<double>& param_values, std::vector<double> grad,
                                           double agc_lambda) {
    if (param_values.size() != grad.size()) throw_shape("adaptive_gradient_clip: shape mismatch");
    const double wnorm = std::max(frobenius_norm(param_values), kAgcWeightFloor);
    const double gnorm = frobenius_norm(grad);
    if (gnorm / wnorm > agc_lambda) {
        const double scale = agc_lambda * wnorm / gnorm;
        for (double& g : grad) g *= scale;
    }
    return grad;
}

AdamW::AdamW(std::vector<std::pair<std::string, Tensor>> params, double weight_decay, double beta1,
             double beta2, double eps)
    : params_(std::move(params)), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& [name, t] : params_) {
        (void)name;
        first_moment_.emplace_back(t.size(), 0.0);
        second_moment_.emplace_back(t.size(), 0.0);
    }
}

void AdamW::step(double lr) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));

    for (std::size_t p = 0; p < params_.size(); ++p) {
        auto& [name, tensor] = params_[p];
        auto& values = tensor.values();
        const auto& grad = tensor.grad_buffer();
        auto& m = first_moment_[p];
        auto& v = second_moment_[p];

        for (double g : grad) {
            if (!std::isfinite(g)) throw_numeric("adamw: non-finite gradient in tensor '" + name + "'");
        }

        // Decoupled decay, applied independently of the adaptive step.
        if (weight_decay_ > 0.0) {
            const double shrink = 1.0 - lr * weight_decay_;
            for (double& w : values) w *= shrink;
        }

        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = grad.empty() ? 0.0 : grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            values[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& [name, tensor] : params_) {
        (void)name;
        tensor.zero_grad();
    }
}

Tensor masked_loss(Tape& tape, const Tensor& logits, const std::vector<double>& labels,
                   const std::vector<std::uint8_t>& labeled_mask, const ClassWeights& weights) {
    if (logits.rows() != labels.size() || labels.size() != labeled_mask.size())
        throw_shape("masked_loss: logits/labels/mask sizes disagree");

    std::vector<std::size_t> picked;
    std::vector<std::vector<double>> picked_labels;
    for (std::size_t i = 0; i < labeled_mask.size(); ++i) {
        if (!labeled_mask[i]) continue;
        picked.push_back(i);
        picked_labels.push_back({labels[i]});
    }
    if (picked.empty()) throw_data("masked_loss: zero labeled nodes");

    Tensor selected = tape.gather_rows(logits, picked);
    Tensor label_tensor = Tensor::from_rows(picked_labels);
    return tape.weighted_bce_with_logits(selected, label_tensor, weights.w0, weights.w1);
}

std::size_t WeekBatch::labeled_count() const {
    std::size_t n = 0;
    for (std::uint8_t m : target_mask) n += m != 0;
    return n;
}

std::string serialize_training_log(const TrainingRun& run) {
    std::string out = "epoch,lr,train_loss,val_loss\n";
    for (const auto& rec : run.history) {
        out += std::to_string(rec.epoch) + "," + format_double(rec.lr) + "," + format_double(rec.train_loss) +
               "," + format_double(rec.val_loss) + "\n";
    }
    return out;
}

namespace {

ClassWeights pooled_class_weights(const std::vector<WeekBatch>& weeks, int horizon) {
    std::vector<int> labels;
    for (const auto& batch : weeks) {
        for (std::size_t i = 0; i < batch.target_mask.size(); ++i) {
            if (batch.target_mask[i]) labels.push_back(batch.targets[i] == 1.0 ? 1 : 0);
        }
    }
    if (labels.empty())
        throw_data("train: no labeled targets at horizon " + std::to_string(horizon));
    return class_weights(labels);
}

double evaluate_loss(const ModelConfig& config, const ModelParameters& params,
                     const std::vector<WeekBatch>& weeks, const ClassWeights& weights) {
    double total = 0.0;
    std::size_t counted = 0;
    Rng unused(0);
    for (const auto& batch : weeks) {
        if (batch.labeled_count() == 0) continue;
        Tape tape;
        ForwardResult out = model_forward(tape, batch.features, batch.graph, params, config, false, unused);
        total += masked_loss(tape, out.logits, batch.targets, batch.target_mask, weights).item();
        ++counted;
    }
    if (counted == 0) throw_data("train: validation split holds no labeled targets");
    return total / static_cast<double>(counted);
}

}  // namespace

TrainingRun train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::vector<WeekBatch>& train_weeks, const std::vector<WeekBatch>& val_weeks) {
    model_config.validate();
    train_config.validate();
    if (train_weeks.empty()) throw_data("train: empty training week sequence");
    if (val_weeks.empty()) throw_data("train: empty validation split");
    for (std::size_t i = 1; i < train_weeks.size(); ++i) {
        if (train_weeks[i].week < train_weeks[i - 1].week)
            throw_data("train: training weeks must be chronological");
    }

    const ClassWeights weights = pooled_class_weights(train_weeks, train_config.horizon);

    ModelParameters params = init_parameters(model_config, train_config.seed);
    AdamW optimizer(params.named(), train_config.weight_decay);
    Rng rng(train_config.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainingRun run;
    int epochs_without_improvement = 0;

    for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
        const double lr =
            cosine_lr(epoch, train_config.epochs, train_config.base_lr, train_config.min_lr);

        double train_loss = 0.0;
        std::size_t counted = 0;
        for (const auto& batch : train_weeks) {
            if (batch.labeled_count() == 0) continue;
            Tape tape;
            ForwardResult out =
                model_forward(tape, batch.features, batch.graph, params, model_config, true, rng);
            Tensor loss = masked_loss(tape, out.logits, batch.targets, batch.target_mask, weights);
            tape.backward(loss);

            for (auto& [name, tensor] : params.named()) {
                (void)name;
                auto& grad = tensor.grad_buffer();
                if (grad.empty()) continue;
                grad = adaptive_gradient_clip(tensor.values(), std::move(grad), train_config.agc_lambda);
            }
            optimizer.step(lr);
            optimizer.zero_grad();

            train_loss += loss.item();
            ++counted;
        }
        if (counted == 0) throw_data("train: no labeled targets at horizon " + std::to_string(train_config.horizon));
        train_loss /= static_cast<double>(counted);

        const double val_loss = evaluate_loss(model_config, params, val_weeks, weights);
        run.history.push_back({epoch, lr, train_loss, val_loss});

        if (run.best_epoch < 0 || val_loss < run.best_val_loss) {
            run.best_epoch = epoch;
            run.best_val_loss = val_loss;
            run.best_params = params.clone();
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= train_config.patience) {
                run.stop_reason = StopReason::EarlyStop;
                return run;
            }
        }
    }
    run.stop_reason = StopReason::MaxEpochs;
    return run;
}

std::vector<TrainingRun> train_ensemble(const ModelConfig& model_config, const TrainConfig& train_config,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::vector<WeekBatch>& train_weeks,
                                        const std::vector<WeekBatch>& val_weeks) {
    if (seeds.empty()) throw_param("train_ensemble: need at least one seed");
    std::vector<TrainingRun> runs;
    runs.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        TrainConfig member = train_config;
        member.seed = seed;
        runs.push_back(train(model_config, member, train_weeks, val_weeks));
    }
    return runs;
}

std::vector<double> predict_probabilities(const ModelConfig& config, const ModelParameters& params,
                                          const SpatialGraph& graph, const Tensor& features) {
    Tape tape;
    Rng unused(0);
    ForwardResult out = model_forward(tape, features, graph, params, config, false, unused);
    Tensor probs = tape.sigmoid(out.logits);
    return probs.values();
}

std::vector<double> ensemble_mean_probabilities(const ModelConfig& config,
                                                const std::vector<ModelParameters>& members,
                                                const SpatialGraph& graph, const Tensor& features) {
    if (members.empty()) throw_param("ensemble_mean_probabilities: empty ensemble");
    std::vector<double> mean(graph.num_nodes(), 0.0);
    for (const auto& params : members) {
        const auto probs = predict_probabilities(config, params, graph, features);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += probs[i];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

}  // namespace mage
