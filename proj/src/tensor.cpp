#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mage {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    std::ostringstream os;
    os << r << "x" << c;
    return os.str();
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            if (aip == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* brow = b + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
            crow[p] += acc;
        }
    }
}

// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            if (aip == 0.0) continue;
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void ensure_grad(std::vector<double>& grad, std::size_t n) {
    if (grad.empty()) grad.assign(n, 0.0);
}

}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    auto s = std::make_shared<Storage>();
    s->rows = rows;
    s->cols = cols;
    s->values.assign(rows * cols, 0.0);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
    Tensor t = zeros(rows, cols, requires_grad);
    std::fill(t.values().begin(), t.values().end(), value);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) { return full(1, 1, value, requires_grad); }

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    auto s = std::make_shared<Storage>();
    s->rows = r;
    s->cols = c;
    s->requires_grad = requires_grad;
    s->values.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw_shape("from_rows: ragged input rows");
        s->values.insert(s->values.end(), row.begin(), row.end());
    }
    return Tensor(std::move(s));
}

Tensor Tensor::from_values(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
    if (values.size() != rows * cols)
        throw_shape("from_values: " + std::to_string(values.size()) + " values for shape " + shape_str(rows, cols));
    auto s = std::make_shared<Storage>();
    s->rows = rows;
    s->cols = cols;
    s->values = std::move(values);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

double Tensor::item() const {
    if (!is_scalar()) throw_shape("item: tensor is " + shape_str(rows(), cols()) + ", not scalar");
    return data_->values[0];
}

const std::vector<double>& Tensor::grad() const {
    if (data_->grad.empty()) throw_data("tensor '" + data_->name + "' has no gradient recorded");
    return data_->grad;
}

Tensor Tensor::clone() const {
    auto s = std::make_shared<Storage>();
    s->rows = rows();
    s->cols = cols();
    s->values = data_->values;
    s->requires_grad = data_->requires_grad;
    s->name = data_->name;
    return Tensor(std::move(s));
}

void Tensor::check_finite(const char* what) const {
    for (double v : data_->values) {
        if (!std::isfinite(v)) {
            throw_numeric(std::string(what) + ": non-finite value in tensor '" + data_->name + "'");
        }
    }
}

Tensor Tape::record(Tensor output, std::function<void()> backward_fn,
                    std::vector<std::shared_ptr<Tensor::Storage>> inputs) {
    output.check_finite("forward");
    bool any_input_grad = false;
    for (const auto& in : inputs) any_input_grad = any_input_grad || in->requires_grad;
    output.data_->requires_grad = any_input_grad;
    if (any_input_grad) {
        steps_.push_back({std::move(inputs), output.data_, std::move(backward_fn)});
    }
    return output;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw_shape("matmul: inner dimensions disagree: " + shape_str(a.rows(), a.cols()) + " vs " +
                    shape_str(b.rows(), b.cols()));
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros(m, n);
    gemm_nn(m, k, n, a.values().data(), b.values().data(), out.values().data());

    auto as = a.data_, bs = b.data_, os = out.data_;
    auto backward = [as, bs, os, m, k, n] {
        if (os->grad.empty()) return;
        if (as->requires_grad) {
            ensure_grad(as->grad, as->values.size());
            gemm_nt(m, n, k, os->grad.data(), bs->values.data(), as->grad.data());
        }
        if (bs->requires_grad) {
            ensure_grad(bs->grad, bs->values.size());
            gemm_tn(m, k, n, as->values.data(), os->grad.data(), bs->grad.data());
        }
    };
    return record(std::move(out), std::move(backward), {a.data_, b.data_});
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw_shape("add: shapes disagree: " + shape_str(a.rows(), a.cols()) + " vs " +
                    shape_str(b.rows(), b.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = a.values()[i] + b.values()[i];

    auto as = a.data_, bs = b.data_, os = out.data_;
    auto backward = [as, bs, os] {
        if (os->grad.empty()) return;
        for (auto* side : {as.get(), bs.get()}) {
            if (!side->requires_grad) continue;
            ensure_grad(side->grad, side->values.size());
            for (std::size_t i = 0; i < side->grad.size(); ++i) side->grad[i] += os->grad[i];
        }
    };
    return record(std::move(out), std::move(backward), {a.data_, b.data_});
}

Tensor Tape::add_row_bias(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols())
        throw_shape("add_row_bias: bias " + shape_str(bias.rows(), bias.cols()) + " does not match " +
                    shape_str(x.rows(), x.cols()));
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    const std::size_t n = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) out.values()[r * n + c] = x.values()[r * n + c] + bias.values()[c];

    auto xs = x.data_, bs = bias.data_, os = out.data_;
    auto backward = [xs, bs, os, n] {
        if (os->grad.empty()) return;
        if (xs->requires_grad) {
            ensure_grad(xs->grad, xs->values.size());
            for (std::size_t i = 0; i < xs->grad.size(); ++i) xs->grad[i] += os->grad[i];
        }
        if (bs->requires_grad) {
            ensure_grad(bs->grad, bs->values.size());
            const std::size_t rows = os->values.size() / n;
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < n; ++c) bs->grad[c] += os->grad[r * n + c];
        }
    };
    return record(std::move(out), std::move(backward), {x.data_, bias.data_});
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw_shape("mul: shapes disagree: " + shape_str(a.rows(), a.cols()) + " vs " +
                    shape_str(b.rows(), b.cols()));
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = a.values()[i] * b.values()[i];

    auto as = a.data_, bs = b.data_, os = out.data_;
    auto backward = [as, bs, os] {
        if (os->grad.empty()) return;
        if (as->requires_grad) {
            ensure_grad(as->grad, as->values.size());
            for (std::size_t i = 0; i < as->grad.size(); ++i) as->grad[i] += os->grad[i] * bs->values[i];
        }
        if (bs->requires_grad) {
            ensure_grad(bs->grad, bs->values.size());
            for (std::size_t i = 0; i < bs->grad.size(); ++i) bs->grad[i] += os->grad[i] * as->values[i];
        }
    };
    return record(std::move(out), std::move(backward), {a.data_, b.data_});
}

Tensor Tape::scale(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = c * x.values()[i];

    auto xs = x.data_, os = out.data_;
    auto backward = [xs, os, c] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t i = 0; i < xs->grad.size(); ++i) xs->grad[i] += c * os->grad[i];
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = x.values()[i] > 0.0 ? x.values()[i] : 0.0;

    auto xs = x.data_, os = out.data_;
    auto backward = [xs, os] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t i = 0; i < xs->grad.size(); ++i)
            if (xs->values[i] > 0.0) xs->grad[i] += os->grad[i];
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor Tape::sigmoid(const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = stable_sigmoid(x.values()[i]);

    auto xs = x.data_, os = out.data_;
    auto backward = [xs, os] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t i = 0; i < xs->grad.size(); ++i) {
            const double s = os->values[i];
            xs->grad[i] += os->grad[i] * s * (1.0 - s);
        }
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        throw_shape("concat_cols: leading dimensions disagree: " + shape_str(a.rows(), a.cols()) + " vs " +
                    shape_str(b.rows(), b.cols()));
    const std::size_t m = a.rows(), p = a.cols(), q = b.cols();
    Tensor out = Tensor::zeros(m, p + q);
    for (std::size_t r = 0; r < m; ++r) {
        std::copy_n(a.values().data() + r * p, p, out.values().data() + r * (p + q));
        std::copy_n(b.values().data() + r * q, q, out.values().data() + r * (p + q) + p);
    }

    auto as = a.data_, bs = b.data_, os = out.data_;
    auto backward = [as, bs, os, m, p, q] {
        if (os->grad.empty()) return;
        if (as->requires_grad) {
            ensure_grad(as->grad, as->values.size());
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < p; ++c) as->grad[r * p + c] += os->grad[r * (p + q) + c];
        }
        if (bs->requires_grad) {
            ensure_grad(bs->grad, bs->values.size());
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < q; ++c) bs->grad[r * q + c] += os->grad[r * (p + q) + p + c];
        }
    };
    return record(std::move(out), std::move(backward), {a.data_, b.data_});
}

Tensor Tape::dropout(const Tensor& x, double p, bool training, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw_param("dropout: p must be in [0, 1), got " + std::to_string(p));
    if (!training) {
        // Eval mode is an exact identity (inverted dropout scales at train time).
        Tensor out = x.clone();
        out.set_requires_grad(false);
        auto xs = x.data_, os = out.data_;
        auto backward = [xs, os] {
            if (os->grad.empty() || !xs->requires_grad) return;
            ensure_grad(xs->grad, xs->values.size());
            for (std::size_t i = 0; i < xs->grad.size(); ++i) xs->grad[i] += os->grad[i];
        };
        return record(std::move(out), std::move(backward), {x.data_});
    }

    const double keep_scale = 1.0 / (1.0 - p);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto mask = std::make_shared<std::vector<double>>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) (*mask)[i] = unif(rng) < p ? 0.0 : keep_scale;

    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out.values()[i] = x.values()[i] * (*mask)[i];

    auto xs = x.data_, os = out.data_;
    auto backward = [xs, os, mask] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t i = 0; i < xs->grad.size(); ++i) xs->grad[i] += os->grad[i] * (*mask)[i];
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    Tensor out = Tensor::scalar(acc);

    auto xs = x.data_, os = out.data_;
    auto backward = [xs, os] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        const double g = os->grad[0];
        for (double& v : xs->grad) v += g;
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::gather_rows(const Tensor& x, std::vector<std::size_t> rows) {
    const std::size_t n = x.cols();
    Tensor out = Tensor::zeros(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= x.rows())
            throw_shape("gather_rows: row index " + std::to_string(rows[i]) + " out of range for " +
                        shape_str(x.rows(), x.cols()));
        std::copy_n(x.values().data() + rows[i] * n, n, out.values().data() + i * n);
    }

    auto xs = x.data_, os = out.data_;
    auto idx = std::make_shared<std::vector<std::size_t>>(std::move(rows));
    auto backward = [xs, os, idx, n] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t i = 0; i < idx->size(); ++i)
            for (std::size_t c = 0; c < n; ++c) xs->grad[(*idx)[i] * n + c] += os->grad[i * n + c];
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::mix_rows(const Tensor& x, const RowMix& mix) {
    const std::size_t n = x.cols();
    Tensor out = Tensor::zeros(mix.rows.size(), n);
    for (std::size_t v = 0; v < mix.rows.size(); ++v) {
        double* orow = out.values().data() + v * n;
        for (const auto& e : mix.rows[v]) {
            if (e.src >= x.rows())
                throw_shape("mix_rows: source row " + std::to_string(e.src) + " out of range for " +
                            shape_str(x.rows(), x.cols()));
            const double* xrow = x.values().data() + e.src * n;
            for (std::size_t c = 0; c < n; ++c) orow[c] += e.weight * xrow[c];
        }
    }

    auto xs = x.data_, os = out.data_;
    auto entries = std::make_shared<RowMix>(mix);
    auto backward = [xs, os, entries, n] {
        if (os->grad.empty() || !xs->requires_grad) return;
        ensure_grad(xs->grad, xs->values.size());
        for (std::size_t v = 0; v < entries->rows.size(); ++v) {
            const double* grow = os->grad.data() + v * n;
            for (const auto& e : entries->rows[v]) {
                double* xrow = xs->grad.data() + e.src * n;
                for (std::size_t c = 0; c < n; ++c) xrow[c] += e.weight * grow[c];
            }
        }
    };
    return record(std::move(out), std::move(backward), {x.data_});
}

Tensor Tape::weighted_bce_with_logits(const Tensor& logits, const Tensor& labels, double w0, double w1) {
    if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
        throw_shape("weighted_bce_with_logits: logits " + shape_str(logits.rows(), logits.cols()) +
                    " vs labels " + shape_str(labels.rows(), labels.cols()));
    if (logits.size() == 0) throw_data("weighted_bce_with_logits: empty input");
    if (!(w0 > 0.0) || !(w1 > 0.0)) throw_param("weighted_bce_with_logits: class weights must be positive");

    const std::size_t n = logits.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels.values()[i];
        if (y != 0.0 && y != 1.0)
            throw_data("weighted_bce_with_logits: non-binary label " + std::to_string(y) + " at index " +
                       std::to_string(i));
        const double z = logits.values()[i];
        const double w = y == 1.0 ? w1 : w0;
        acc += w * (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))));
    }
    Tensor out = Tensor::scalar(acc / static_cast<double>(n));

    auto zs = logits.data_, ys = labels.data_, os = out.data_;
    auto backward = [zs, ys, os, w0, w1, n] {
        if (os->grad.empty() || !zs->requires_grad) return;
        ensure_grad(zs->grad, zs->values.size());
        const double g = os->grad[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = ys->values[i];
            const double w = y == 1.0 ? w1 : w0;
            zs->grad[i] += g * w * (stable_sigmoid(zs->values[i]) - y);
        }
    };
    return record(std::move(out), std::move(backward), {logits.data_, labels.data_});
}

void Tape::backward(const Tensor& loss) {
    if (!loss.is_scalar())
        throw_shape("backward: loss is " + shape_str(loss.rows(), loss.cols()) + ", not scalar");
    if (backward_done_) throw_data("backward: tape already traversed; record a fresh tape first");

    bool found = false;
    for (const auto& step : steps_) {
        if (step.output == loss.data_) {
            found = true;
            break;
        }
    }
    if (!found) throw_data("backward: loss was not recorded on this tape");

    // Leaves (parameters, inputs) must have been reset since the last
    // backward; stale buffers would silently accumulate across steps.
    for (const auto& step : steps_) {
        for (const auto& in : step.inputs) {
            if (!in->requires_grad || in->grad.empty()) continue;
            bool is_leaf = true;
            for (const auto& other : steps_) {
                if (other.output == in) {
                    is_leaf = false;
                    break;
                }
            }
            if (is_leaf)
                throw_data("backward: tensor '" + in->name +
                           "' still carries a gradient from a previous step; reset it first");
        }
    }

    ensure_grad(loss.data_->grad, 1);
    loss.data_->grad[0] += 1.0;

    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) it->backward();
    backward_done_ = true;
}

double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Tensor& x, double eps) {
    Tensor probe = x.clone();
    probe.set_requires_grad(true);
    Tape tape;
    Tensor y = f(tape, probe);
    if (!y.is_scalar()) throw_shape("grad_check: f must be scalar-valued");
    tape.backward(y);
    const std::vector<double> analytic = probe.grad();

    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor xp = x.clone();
        Tensor xm = x.clone();
        xp.values()[i] += eps;
        xm.values()[i] -= eps;
        Tape tp, tm;
        const double fd = (f(tp, xp).item() - f(tm, xm).item()) / (2.0 * eps);
        const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace mage
