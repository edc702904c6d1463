#include <doctest.h>

#include <cmath>
#include <random>

#include "renet/gradcheck.hpp"
#include "renet/optim.hpp"
#include "renet/value.hpp"

using namespace renet;
using num::Tape;
using num::Value;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Independent triple-loop oracle for matrix products.
std::vector<double> matmul_oracle(const std::vector<double>& a, int r, int c,
                                  const std::vector<double>& b, int k) {
    std::vector<double> out(static_cast<std::size_t>(r) * k, 0.0);
    for (int i = 0; i < r; ++i) {
        for (int t = 0; t < k; ++t) {
            double s = 0.0;
            for (int j = 0; j < c; ++j) {
                s += a[static_cast<std::size_t>(i) * c + j] * b[static_cast<std::size_t>(j) * k + t];
            }
            out[static_cast<std::size_t>(i) * k + t] = s;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("concat joins 1-D values") {
    Tape tape;
    Value a = Value::leaf({2}, {1, 2});
    Value b = Value::leaf({1}, {3});
    Value c = tape.concat({a, b});
    CHECK(c.data() == std::vector<double>{1, 2, 3});
}

TEST_CASE("max_pool is the elementwise max") {
    Tape tape;
    Value a = Value::leaf({2}, {1, 0});
    Value b = Value::leaf({2}, {0, 1});
    std::vector<Value> parts{a, b};
    Value m = tape.max_pool(std::span<const Value>(parts.data(), parts.size()));
    CHECK(m.data() == std::vector<double>{1, 1});
}

TEST_CASE("matmul matches the triple-loop oracle") {
    Rng rng(11);
    Tape tape;
    auto da = random_vec(rng, 6);
    auto db = random_vec(rng, 6);
    Value a = Value::leaf({2, 3}, da);
    Value b = Value::leaf({3, 2}, db);
    Value c = tape.matmul(a, b);
    auto expect = matmul_oracle(da, 2, 3, db, 2);
    REQUIRE(c.shape() == std::vector<int>{2, 2});
    for (int i = 0; i < 4; ++i) CHECK(c.data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("matvec matches the oracle") {
    Rng rng(12);
    auto da = random_vec(rng, 12);
    auto dx = random_vec(rng, 4);
    Tape tape;
    Value A = Value::leaf({3, 4}, da);
    Value x = Value::leaf({4}, dx);
    Value y = tape.matmul(A, x);
    auto expect = matmul_oracle(da, 3, 4, dx, 1);
    REQUIRE(y.shape() == std::vector<int>{3});
    for (int i = 0; i < 3; ++i) CHECK(y.data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("shape mismatches raise typed errors naming the primitive") {
    Tape tape;
    Value a = Value::leaf({2}, {1, 2});
    Value b = Value::leaf({3}, {1, 2, 3});
    CHECK_THROWS_WITH_AS(tape.add(a, b), doctest::Contains("add"), ShapeError);
    Value m = Value::leaf({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS_WITH_AS(tape.matmul(m, b), doctest::Contains("matmul"), ShapeError);
}

TEST_CASE("softmax_cross_entropy values") {
    Tape tape;
    SUBCASE("uniform logits give log C") {
        Value logits = Value::leaf({4}, {0.7, 0.7, 0.7, 0.7});
        CHECK(tape.softmax_cross_entropy(logits, 2).item() ==
              doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SUBCASE("wide logit gap, high-precision oracle") {
        // -log softmax([10,-10])[0] = log1p(exp(-20))
        Value logits = Value::leaf({2}, {10.0, -10.0});
        double expect = std::log1p(std::exp(-20.0));
        CHECK(tape.softmax_cross_entropy(logits, 0).item() ==
              doctest::Approx(expect).epsilon(1e-9));
        CHECK(expect == doctest::Approx(2.061e-9).epsilon(1e-3));
    }
    SUBCASE("single class is free") {
        Value logits = Value::leaf({1}, {3.25});
        CHECK(tape.softmax_cross_entropy(logits, 0).item() == doctest::Approx(0.0));
    }
    SUBCASE("target out of range") {
        Value logits = Value::leaf({2}, {0.0, 0.0});
        CHECK_THROWS_AS(tape.softmax_cross_entropy(logits, 2), DomainError);
        CHECK_THROWS_AS(tape.softmax_cross_entropy(logits, -1), DomainError);
    }
}

TEST_CASE("softmax normalizes and stays in (0,1)") {
    Rng rng(13);
    Tape tape;
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(rng.below(8));
        Value v = Value::leaf({n}, random_vec(rng, n, -30.0, 30.0));
        Value s = tape.softmax(v);
        double sum = 0.0;
        for (double p : s.data()) {
            CHECK(p > 0.0);
            CHECK(p < 1.0 + 1e-12);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("backward: analytic examples") {
    SUBCASE("d(x*x)/dx = 2x") {
        Tape tape;
        Value x = Value::scalar(3.0, true);
        Value loss = tape.mul(x, x);
        tape.backward(loss);
        CHECK(x.grad()[0] == doctest::Approx(6.0));
    }
    SUBCASE("unused leaf keeps a zero gradient") {
        Tape tape;
        Value x = Value::scalar(2.0, true);
        Value y = Value::scalar(5.0, true);
        Value loss = tape.mul(y, y);
        tape.backward(loss);
        CHECK(x.grad()[0] == 0.0);
        CHECK(y.grad()[0] == doctest::Approx(10.0));
    }
    SUBCASE("non-scalar loss rejected") {
        Tape tape;
        Value x = Value::leaf({2}, {1, 2}, true);
        Value y = tape.add(x, x);
        CHECK_THROWS_AS(tape.backward(y), ShapeError);
    }
}

TEST_CASE("softmax-CE gradient matches central finite differences below 1e-6") {
    Rng rng(17);
    num::ParamList params{{"logits", Value::leaf({5}, random_vec(rng, 5), true)}};
    auto f = [&](Tape& tape) { return tape.softmax_cross_entropy(params[0].value, 3); };
    auto report = num::grad_check(f, params, 1e-6);
    CHECK(report.pass);
    CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("every primitive passes a finite-difference check at 1e-4") {
    Rng rng(29);
    // Scalarize by dotting the output against fixed coefficients.
    auto probe = [&](const char* name, auto&& body, num::ParamList params) {
        auto f = [&](Tape& tape) { return body(tape); };
        auto report = num::grad_check(f, params, 1e-4);
        INFO(name);
        CHECK(report.pass);
    };

    Value a = Value::leaf({4}, random_vec(rng, 4), true);
    Value b = Value::leaf({4}, random_vec(rng, 4), true);
    Value w = Value::leaf({4}, random_vec(rng, 4));
    probe("add", [&](Tape& t) { return t.dot(w, t.add(a, b)); }, {{"a", a}, {"b", b}});
    probe("sub", [&](Tape& t) { return t.dot(w, t.sub(a, b)); }, {{"a", a}, {"b", b}});
    probe("mul", [&](Tape& t) { return t.dot(w, t.mul(a, b)); }, {{"a", a}, {"b", b}});
    probe("scale", [&](Tape& t) { return t.dot(w, t.scale(a, -1.7)); }, {{"a", a}});
    probe("tanh", [&](Tape& t) { return t.dot(w, t.tanh(a)); }, {{"a", a}});
    probe("sigmoid", [&](Tape& t) { return t.dot(w, t.sigmoid(a)); }, {{"a", a}});
    probe("softmax", [&](Tape& t) { return t.dot(w, t.softmax(a)); }, {{"a", a}});
    probe("dot", [&](Tape& t) { return t.dot(a, b); }, {{"a", a}, {"b", b}});
    probe("slice", [&](Tape& t) { return t.dot(t.slice(w, 1, 2), t.slice(a, 0, 2)); }, {{"a", a}});
    probe("concat", [&](Tape& t) {
        Value joined = t.concat({a, b});
        return t.dot(t.concat({w, w}), joined);
    }, {{"a", a}, {"b", b}});

    // relu probed away from the kink.
    Value rin = Value::leaf({4}, {0.5, -0.75, 1.25, -0.3}, true);
    probe("relu", [&](Tape& t) { return t.dot(w, t.relu(rin)); }, {{"rin", rin}});

    Value M = Value::leaf({3, 4}, random_vec(rng, 12), true);
    Value x = Value::leaf({4}, random_vec(rng, 4), true);
    Value wy = Value::leaf({3}, random_vec(rng, 3));
    probe("matmul", [&](Tape& t) { return t.dot(wy, t.matmul(M, x)); }, {{"M", M}, {"x", x}});
    probe("transpose", [&](Tape& t) {
        return t.dot(x, t.matmul(t.transpose(M), wy));
    }, {{"M", M}});

    Value p = Value::leaf({3}, random_vec(rng, 3), true);
    Value q = Value::leaf({3}, random_vec(rng, 3), true);
    // max_pool probed at distinct entries (inputs random, ties measure zero).
    probe("max_pool", [&](Tape& t) {
        std::vector<Value> parts{p, q};
        return t.dot(wy, t.max_pool(std::span<const Value>(parts.data(), parts.size())));
    }, {{"p", p}, {"q", q}});

    probe("softmax_cross_entropy", [&](Tape& t) {
        return t.softmax_cross_entropy(t.matmul(M, x), 1);
    }, {{"M", M}, {"x", x}});
}

TEST_CASE("replaying backward on the same tape twice yields identical gradients") {
    Rng rng(31);
    Tape tape;
    Value a = Value::leaf({4}, random_vec(rng, 4), true);
    Value b = Value::leaf({4}, random_vec(rng, 4), true);
    Value loss = tape.softmax_cross_entropy(tape.mul(tape.tanh(a), b), 2);
    tape.backward(loss);
    std::vector<double> ga = a.grad(), gb = b.grad();
    tape.backward(loss);
    CHECK(a.grad() == ga);  // bitwise
    CHECK(b.grad() == gb);
}

TEST_CASE("determinism: same seed gives bitwise-identical forward and gradients") {
    auto run = [] {
        Rng rng(99);
        Tape tape;
        Value a = Value::leaf({6}, random_vec(rng, 6), true);
        Value W = Value::leaf({3, 6}, random_vec(rng, 18), true);
        Value loss = tape.softmax_cross_entropy(tape.matmul(W, tape.sigmoid(a)), 0);
        tape.backward(loss);
        std::vector<double> out = {loss.item()};
        out.insert(out.end(), a.grad().begin(), a.grad().end());
        out.insert(out.end(), W.grad().begin(), W.grad().end());
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("grad_check on a quadratic is exact to roundoff") {
    num::ParamList params{{"x", Value::leaf({3}, {0.3, -0.7, 1.1}, true)}};
    auto f = [&](Tape& tape) { return tape.dot(params[0].value, params[0].value); };
    auto report = num::grad_check(f, params, 1e-9);
    CHECK(report.pass);
    CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("adam updates") {
    SUBCASE("zero gradients and zero decay leave parameters unchanged") {
        Value p = Value::leaf({3}, {1.0, -2.0, 0.5}, true);
        num::ParamList params{{"p", p}};
        num::Adam opt(num::AdamConfig{});
        opt.zero_grads(params);
        std::vector<double> before = p.data();
        opt.step(params);
        CHECK(p.data() == before);
    }
    SUBCASE("one scalar step matches the closed-form hand oracle") {
        // lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8, g=1:
        //   m=0.1, mhat=1; v=0.001, vhat=1; delta = -lr/(1+eps)
        Value p = Value::scalar(0.0, true);
        p.grad()[0] = 1.0;
        num::ParamList params{{"p", p}};
        num::Adam opt(num::AdamConfig{});
        opt.step(params);
        double expect = -0.001 * 1.0 / (std::sqrt(1.0) + 1e-8);
        CHECK(p.data()[0] == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("first-step bias correction recovers the raw gradient direction") {
        Value p = Value::scalar(1.0, true);
        p.grad()[0] = 0.37;
        num::AdamConfig cfg;
        cfg.eps = 0.0;
        num::Adam opt(cfg);
        num::ParamList params{{"p", p}};
        opt.step(params);
        // mhat = g and vhat = g*g on step one, so the update is exactly -lr*sign(g).
        CHECK(p.data()[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-12));
    }
    SUBCASE("NaN gradient names the parameter") {
        Value p = Value::scalar(1.0, true);
        p.grad()[0] = std::nan("");
        num::ParamList params{{"theta_42", p}};
        num::Adam opt(num::AdamConfig{});
        CHECK_THROWS_WITH_AS(opt.step(params), doctest::Contains("theta_42"), NumericError);
    }
    SUBCASE("weight decay folds into the gradient") {
        Value p = Value::scalar(2.0, true);
        p.grad()[0] = 0.0;
        num::AdamConfig cfg;
        cfg.weight_decay = 0.1;
        num::Adam opt(cfg);
        num::ParamList params{{"p", p}};
        opt.step(params);
        // g' = 0 + 0.1*2 = 0.2; mhat = 0.2, vhat = 0.04 -> delta ~ -lr
        CHECK(p.data()[0] == doctest::Approx(2.0 - 0.001 * 0.2 / (0.2 + 1e-8)).epsilon(1e-9));
    }
}
