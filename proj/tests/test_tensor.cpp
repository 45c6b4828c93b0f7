#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "tensor.hpp"

using namespace mage;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    Tensor t = Tensor::zeros(rows, cols);
    for (double& v : t.values()) v = unif(rng);
    return t;
}

// Keeps relu/fabs kinks away from finite-difference probe points.
Tensor random_tensor_off_kink(std::size_t rows, std::size_t cols, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    std::bernoulli_distribution sign(0.5);
    Tensor t = Tensor::zeros(rows, cols);
    for (double& v : t.values()) v = (sign(rng) ? 1.0 : -1.0) * unif(rng);
    return t;
}

}  // namespace

TEST_CASE("matmul forward") {
    Tensor eye = Tensor::from_rows({{1, 0}, {0, 1}});
    Tensor m = Tensor::from_rows({{1, 2}, {3, 4}});
    Tape tape;
    Tensor out = tape.matmul(eye, m);
    CHECK(out.values() == std::vector<double>{1, 2, 3, 4});

    Tensor a = Tensor::from_rows({{1, 2}});
    Tensor b = Tensor::from_rows({{3}, {4}});
    Tape tape2;
    CHECK(tape2.matmul(a, b).item() == 11.0);
}

TEST_CASE("matmul shape error names both shapes") {
    Tensor a = Tensor::zeros(2, 3);
    Tensor b = Tensor::zeros(4, 5);
    Tape tape;
    try {
        tape.matmul(a, b);
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Shape);
        CHECK(std::string(e.what()).find("2x3") != std::string::npos);
        CHECK(std::string(e.what()).find("4x5") != std::string::npos);
    }
}

TEST_CASE("matmul gradient matches dA = dC.B^T") {
    Tensor a = Tensor::from_rows({{1, 0}, {0, 1}}, true);
    Tensor b = Tensor::from_rows({{2, 3}, {4, 5}});
    Tape tape;
    Tensor loss = tape.sum(tape.matmul(a, b));
    tape.backward(loss);
    CHECK(a.grad() == std::vector<double>{5, 9, 5, 9});

    const double err = grad_check(
        [&](Tape& t, const Tensor& x) { return t.sum(t.matmul(x, b)); }, Tensor::from_rows({{1, 0}, {0, 1}}),
        1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("relu") {
    Tensor x = Tensor::from_rows({{-1, 0, 2}});
    Tape tape;
    CHECK(tape.relu(x).values() == std::vector<double>{0, 0, 2});

    Tensor neg = Tensor::from_rows({{-3, -1}}, true);
    Tape tape2;
    Tensor loss = tape2.sum(tape2.relu(neg));
    tape2.backward(loss);
    CHECK(loss.item() == 0.0);
    CHECK(neg.grad() == std::vector<double>{0, 0});

    Tensor pos = Tensor::scalar(3.0, true);
    Tape tape3;
    tape3.backward(tape3.sum(tape3.relu(pos)));
    CHECK(pos.grad()[0] == 1.0);
    CHECK(grad_check([](Tape& t, const Tensor& v) { return t.sum(t.relu(v)); }, Tensor::scalar(3.0), 1e-5) <
          1e-6);
}

TEST_CASE("sigmoid is stable and saturates cleanly") {
    Tape tape;
    CHECK(tape.sigmoid(Tensor::scalar(0.0)).item() == 0.5);

    const double hi = tape.sigmoid(Tensor::scalar(50.0)).item();
    CHECK(hi >= 1.0 - 1e-20);
    CHECK(hi <= 1.0);
    CHECK(std::isfinite(tape.sigmoid(Tensor::scalar(700.0)).item()));
    CHECK(std::isfinite(tape.sigmoid(Tensor::scalar(-700.0)).item()));

    Tensor x = Tensor::scalar(0.0, true);
    Tape tape2;
    tape2.backward(tape2.sum(tape2.sigmoid(x)));
    CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("concat columns") {
    Tensor a = Tensor::from_rows({{1}});
    Tensor b = Tensor::from_rows({{2, 3}});
    Tape tape;
    CHECK(tape.concat_cols(a, b).values() == std::vector<double>{1, 2, 3});

    Tensor empty = Tensor::zeros(1, 0);
    Tape tape2;
    Tensor same = tape2.concat_cols(a, empty);
    CHECK(same.rows() == 1);
    CHECK(same.cols() == 1);
    CHECK(same.values() == a.values());

    Tensor ag = Tensor::from_rows({{1}}, true);
    Tensor bg = Tensor::from_rows({{2, 3}}, true);
    Tape tape3;
    tape3.backward(tape3.sum(tape3.concat_cols(ag, bg)));
    CHECK(ag.grad() == std::vector<double>{1});
    CHECK(bg.grad() == std::vector<double>{1, 1});

    Tape tape4;
    CHECK_THROWS_AS(tape4.concat_cols(Tensor::zeros(2, 1), Tensor::zeros(3, 1)), Error);
}

TEST_CASE("dropout") {
    Rng rng(11);
    Tensor x = random_tensor(4, 5, rng);

    Tape tape;
    CHECK(tape.dropout(x, 0.7, /*training=*/false, rng).values() == x.values());

    Tape tape2;
    CHECK(tape2.dropout(x, 0.0, /*training=*/true, rng).values() == x.values());

    Tape tape3;
    CHECK_THROWS_AS(tape3.dropout(x, 1.0, true, rng), Error);

    // Inverted dropout keeps the expectation: 1e6 ones, p = 0.2.
    Tensor ones = Tensor::full(1000, 1000, 1.0);
    Rng seeded(20240115);
    Tape tape4;
    Tensor dropped = tape4.dropout(ones, 0.2, true, seeded);
    double mean = 0.0;
    for (double v : dropped.values()) mean += v;
    mean /= static_cast<double>(dropped.size());
    CHECK(mean > 0.99);
    CHECK(mean < 1.01);
}

TEST_CASE("weighted bce with logits") {
    Tape tape;
    Tensor confident = tape.weighted_bce_with_logits(Tensor::scalar(40.0), Tensor::scalar(1.0), 1.0, 1.0);
    CHECK(confident.item() < 1e-15);

    Tape tape2;
    CHECK(tape2.weighted_bce_with_logits(Tensor::scalar(0.0), Tensor::scalar(1.0), 1.0, 1.0).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Tape tape3;
    CHECK(tape3.weighted_bce_with_logits(Tensor::scalar(0.0), Tensor::scalar(1.0), 1.0, 3.0).item() ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));

    Tape tape4;
    CHECK_THROWS_AS(tape4.weighted_bce_with_logits(Tensor::scalar(0.0), Tensor::scalar(0.5), 1.0, 1.0), Error);

    // Stays finite across the whole stated logit range.
    for (double z : {-500.0, -250.0, -1.0, 0.0, 1.0, 250.0, 500.0}) {
        for (double y : {0.0, 1.0}) {
            Tape t;
            CHECK(std::isfinite(t.weighted_bce_with_logits(Tensor::scalar(z), Tensor::scalar(y), 0.5, 5.0).item()));
        }
    }
}

TEST_CASE("backward fills gradients") {
    Tensor x = Tensor::from_rows({{1, 2}, {3, 4}}, true);
    Tape tape;
    tape.backward(tape.sum(x));
    CHECK(x.grad() == std::vector<double>{1, 1, 1, 1});

    Tensor v = Tensor::from_rows({{1, 2}}, true);
    Tape tape2;
    tape2.backward(tape2.sum(tape2.mul(v, v)));
    CHECK(v.grad() == std::vector<double>{2, 4});
    CHECK(grad_check([](Tape& t, const Tensor& u) { return t.sum(t.mul(u, u)); }, Tensor::from_rows({{1, 2}}),
                     1e-5) < 1e-6);
}

TEST_CASE("gradients accumulate across disjoint uses") {
    Tensor x = Tensor::from_rows({{1.5, -0.5}}, true);
    Tensor c1 = Tensor::from_rows({{2, 0}, {0, 2}});
    Tensor c2 = Tensor::from_rows({{0, 3}, {3, 0}});
    Tape tape;
    Tensor total = tape.add(tape.matmul(x, c1), tape.matmul(x, c2));
    tape.backward(tape.sum(total));

    // Unrolled copy: run each branch separately and add the gradients.
    Tensor xa = Tensor::from_rows({{1.5, -0.5}}, true);
    Tape ta;
    ta.backward(ta.sum(ta.matmul(xa, c1)));
    Tensor xb = Tensor::from_rows({{1.5, -0.5}}, true);
    Tape tb;
    tb.backward(tb.sum(tb.matmul(xb, c2)));
    for (std::size_t i = 0; i < 2; ++i) CHECK(x.grad()[i] == xa.grad()[i] + xb.grad()[i]);
}

TEST_CASE("backward error paths") {
    Tensor x = Tensor::from_rows({{1, 2}}, true);
    Tape tape;
    Tensor y = tape.mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), Error);  // not scalar

    Tape tape2;
    Tensor loss = tape2.sum(tape2.mul(x, x));
    tape2.backward(loss);
    CHECK_THROWS_AS(tape2.backward(loss), Error);  // second traversal

    // New tape, stale leaf gradient: must demand an explicit reset.
    Tape tape3;
    Tensor loss3 = tape3.sum(tape3.mul(x, x));
    CHECK_THROWS_AS(tape3.backward(loss3), Error);
    x.zero_grad();
    Tape tape4;
    Tensor loss4 = tape4.sum(tape4.mul(x, x));
    tape4.backward(loss4);
    CHECK(x.grad() == std::vector<double>{2, 4});
}

TEST_CASE("grad_check reference behaviors") {
    Rng rng(7);
    Tensor x = random_tensor(3, 3, rng);
    CHECK(grad_check([](Tape& t, const Tensor& u) { return t.sum(t.mul(u, u)); }, x, 1e-5) < 1e-6);

    Tensor w = random_tensor(3, 1, rng);
    CHECK(grad_check([&](Tape& t, const Tensor& u) { return t.sum(t.matmul(u, w)); }, x, 1e-5) < 1e-10);
}

TEST_CASE("grad_check over every differentiable op, 5 seeds") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        std::uniform_int_distribution<std::size_t> dim(1, 8);
        const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);

        Tensor a = random_tensor_off_kink(m, k, rng);
        Tensor b = random_tensor(k, n, rng);
        Tensor same = random_tensor(m, k, rng);
        Tensor bias = random_tensor(1, k, rng);
        Tensor labels = Tensor::zeros(m, 1);
        for (std::size_t i = 0; i < m; ++i) labels.values()[i] = (i % 2 == 0) ? 1.0 : 0.0;

        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.matmul(x, b)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.add(x, same)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.add_row_bias(x, bias)); }, a, 1e-5) <
              1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.mul(x, same)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.scale(x, -1.7)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.relu(x)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.sigmoid(x)); }, a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.concat_cols(x, same)); }, a, 1e-5) <
              1e-4);
        CHECK(grad_check(
                  [&](Tape& t, const Tensor& x) {
                      Rng fixed(99);  // reseed so both finite-difference probes see one mask
                      return t.sum(t.dropout(x, 0.4, true, fixed));
                  },
                  a, 1e-5) < 1e-4);
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.gather_rows(x, {0, 0, m - 1})); }, a,
                         1e-5) < 1e-4);

        RowMix mix;
        mix.rows.resize(m + 1);
        std::uniform_real_distribution<double> wdist(0.1, 1.0);
        for (auto& row : mix.rows) {
            for (std::size_t s = 0; s < m; ++s)
                if (s % 2 == 0) row.push_back({s, wdist(rng)});
        }
        CHECK(grad_check([&](Tape& t, const Tensor& x) { return t.sum(t.mix_rows(x, mix)); }, a, 1e-5) < 1e-4);

        Tensor logits = random_tensor(m, 1, rng, -3.0, 3.0);
        CHECK(grad_check(
                  [&](Tape& t, const Tensor& x) { return t.weighted_bce_with_logits(x, labels, 0.7, 2.5); },
                  logits, 1e-5) < 1e-4);
    }
}

TEST_CASE("composed mlp forward grad_check") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        Rng rng(seed * 31);
        Tensor x = random_tensor(4, 6, rng);
        Tensor w1 = random_tensor(6, 5, rng);
        Tensor b1 = random_tensor(1, 5, rng);
        Tensor w2 = random_tensor(5, 1, rng);
        Tensor labels = Tensor::from_rows({{1}, {0}, {1}, {0}});

        auto f = [&](Tape& t, const Tensor& w) {
            Tensor h = t.relu(t.add_row_bias(t.matmul(x, w), b1));
            Tensor logits = t.matmul(h, w2);
            return t.weighted_bce_with_logits(logits, labels, 1.0, 2.0);
        };
        CHECK(grad_check(f, w1, 1e-5) < 1e-4);
    }
}

TEST_CASE("determinism: identical seeds give bit-identical results") {
    auto run = [](unsigned seed) {
        Rng rng(seed);
        Tensor x = random_tensor(6, 6, rng);
        x.set_requires_grad(true);
        Tape tape;
        Tensor h = tape.dropout(tape.sigmoid(x), 0.3, true, rng);
        Tensor loss = tape.sum(tape.mul(h, h));
        tape.backward(loss);
        auto out = x.grad();
        out.push_back(loss.item());
        return out;
    };
    CHECK(run(123) == run(123));
    CHECK(run(123) != run(124));
}

TEST_CASE("forward rejects non-finite results") {
    Tensor big = Tensor::scalar(1e308);
    Tape tape;
    CHECK_THROWS_AS(tape.add(big, big), Error);
}
