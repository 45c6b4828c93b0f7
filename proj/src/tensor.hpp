#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mage {

using Rng = std::mt19937_64;

// Row-major 2-D tensor of doubles. Scalars are 1x1, vectors are 1xN or Nx1.
// A Tensor is a cheap shared handle: copies alias the same storage, which is
// what lets a Tape keep its operands alive across the backward pass.
class Tensor {
  public:
    Tensor() : data_(std::make_shared<Storage>()) {}

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad = false);
    static Tensor from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                              bool requires_grad = false);

    std::size_t rows() const { return data_->rows; }
    std::size_t cols() const { return data_->cols; }
    std::size_t size() const { return data_->values.size(); }
    bool is_scalar() const { return rows() == 1 && cols() == 1; }

    double at(std::size_t r, std::size_t c) const { return data_->values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data_->values[r * cols() + c]; }
    double item() const;

    const std::vector<double>& values() const { return data_->values; }
    std::vector<double>& values() { return data_->values; }

    bool requires_grad() const { return data_->requires_grad; }
    void set_requires_grad(bool on) { data_->requires_grad = on; }

    // Gradient buffer; allocated on demand by the backward pass.
    bool has_grad() const { return !data_->grad.empty(); }
    const std::vector<double>& grad() const;
    std::vector<double>& grad_buffer() { return data_->grad; }  // may be empty
    void zero_grad() { data_->grad.clear(); }

    const std::string& name() const { return data_->name; }
    void set_name(std::string name) { data_->name = std::move(name); }

    // True when both handles alias the same storage.
    bool same_storage(const Tensor& other) const { return data_ == other.data_; }

    // Deep copy with fresh storage (gradient buffer not copied).
    Tensor clone() const;

    void check_finite(const char* what) const;

  private:
    struct Storage {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<double> values;
        std::vector<double> grad;  // empty until backward touches it
        bool requires_grad = false;
        std::string name;
    };

    explicit Tensor(std::shared_ptr<Storage> data) : data_(std::move(data)) {}

    std::shared_ptr<Storage> data_;

    friend class Tape;
};

// Sparse row-mixing recipe: output row v = sum over (src, weight) entries.
// Rows with no entries produce a zero row. Used for neighbor aggregation.
struct RowMix {
    struct Entry {
        std::size_t src;
        double weight;
    };
    std::vector<std::vector<Entry>> rows;
};

// Define-by-run recording of forward operations. The tape is rebuilt for
// every forward pass; parameters live outside it and persist across steps.
// Ops append in execution order, so inputs always precede their consumers
// and one reverse sweep visits every recorded op exactly once.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor add(const Tensor& a, const Tensor& b);  // same shape, elementwise
    Tensor add_row_bias(const Tensor& x, const Tensor& bias);  // bias is 1 x cols
    Tensor mul(const Tensor& a, const Tensor& b);  // same shape, elementwise
    Tensor scale(const Tensor& x, double c);
    Tensor relu(const Tensor& x);
    Tensor sigmoid(const Tensor& x);
    Tensor concat_cols(const Tensor& a, const Tensor& b);
    Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);
    Tensor sum(const Tensor& x);  // scalar
    Tensor gather_rows(const Tensor& x, std::vector<std::size_t> rows);
    Tensor mix_rows(const Tensor& x, const RowMix& mix);

    // Mean over samples of w_{y_i} * (softplus(z_i) - y_i * z_i), the
    // log-sum-exp stable form of class-weighted binary cross-entropy.
    Tensor weighted_bce_with_logits(const Tensor& logits, const Tensor& labels, double w0, double w1);

    // Populates grad for every requires_grad tensor reachable from loss.
    // Gradients accumulate; a second call without a fresh tape is an error.
    void backward(const Tensor& loss);

    std::size_t num_ops() const { return steps_.size(); }

  private:
    struct Step {
        std::vector<std::shared_ptr<Tensor::Storage>> inputs;
        std::shared_ptr<Tensor::Storage> output;
        std::function<void()> backward;
    };

    Tensor record(Tensor output, std::function<void()> backward_fn,
                  std::vector<std::shared_ptr<Tensor::Storage>> inputs);
    std::vector<Step> steps_;
    bool backward_done_ = false;
};

double stable_sigmoid(double x);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued tensor function. The finite-difference side never runs
// the backward pass, so it stands as an independent check of it.
double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Tensor& x, double eps);

}  // namespace mage
