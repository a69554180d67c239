#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "regnn/gradcheck.hpp"
#include "regnn/rng.hpp"
#include "regnn/tensor.hpp"

using namespace regnn;

namespace {

Tensor<double> random_tensor(int r, int c, Rng& rng) {
    Tensor<double> t(r, c);
    for (auto& x : t.v) x = rng.uniform(-2.0, 2.0);
    return t;
}

}  // namespace

TEST_CASE("matmul identity and orthogonal basis") {
    Tape<float> tape;
    Var eye = tape.leaf(Tensor<float>(2, 2, {1, 0, 0, 1}));
    Var a = tape.leaf(Tensor<float>(2, 2, {1, 2, 3, 4}));
    Var p = tape.matmul(eye, a);
    CHECK(tape.val(p).v == std::vector<float>{1, 2, 3, 4});

    Var u = tape.leaf(Tensor<float>(1, 2, {1, 0}));
    Var v = tape.leaf(Tensor<float>(2, 1, {0, 1}));
    CHECK(tape.val(tape.matmul(u, v)).v[0] == 0.0f);
}

TEST_CASE("matmul shape mismatch names both shapes") {
    Tape<float> tape;
    Var a = tape.leaf(Tensor<float>(2, 3));
    Var b = tape.leaf(Tensor<float>(2, 3));
    CHECK_THROWS_WITH_AS(tape.matmul(a, b), doctest::Contains("2x3"), DimensionError);
}

TEST_CASE("matmul gradient vs finite differences") {
    Rng rng(7);
    std::vector<Tensor<double>> inputs{random_tensor(3, 4, rng), random_tensor(4, 2, rng)};
    double err = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) {
            return t.sum(t.matmul(in[0], in[1]));
        },
        inputs);
    CHECK(err < 1e-4);
}

TEST_CASE("activations: closed-form points") {
    Tape<float> tape;
    Var z = tape.leaf(Tensor<float>(1, 1, {0}));
    CHECK(tape.val(tape.sigmoid(z)).v[0] == doctest::Approx(0.5));
    CHECK(tape.val(tape.tanh_(z)).v[0] == doctest::Approx(0.0));
    Var l3 = tape.leaf(Tensor<float>(1, 1, {std::log(3.0f)}));
    CHECK(tape.val(tape.sigmoid(l3)).v[0] == doctest::Approx(0.75));
}

TEST_CASE("activation gradients") {
    Rng rng(11);
    for (auto kind : {0, 1}) {
        std::vector<Tensor<double>> inputs{random_tensor(1, 6, rng)};
        double err = grad_check(
            [kind](Tape<double>& t, const std::vector<Var>& in) {
                Var y = kind == 0 ? t.sigmoid(in[0]) : t.tanh_(in[0]);
                return t.sum(t.mul(y, y));
            },
            inputs);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("softmax: symmetry, closed form, stability") {
    Tape<float> tape;
    Var a = tape.softmax_row(tape.leaf(Tensor<float>(1, 2, {0, 0})));
    CHECK(tape.val(a).v[0] == doctest::Approx(0.5));

    Var b = tape.softmax_row(tape.leaf(Tensor<float>(1, 2, {std::log(2.0f), 0})));
    CHECK(tape.val(b).v[0] == doctest::Approx(2.0 / 3.0));
    CHECK(tape.val(b).v[1] == doctest::Approx(1.0 / 3.0));

    Var c = tape.softmax_row(tape.leaf(Tensor<float>(1, 2, {1000, 0})));
    CHECK(tape.val(c).v[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(tape.val(c).v[1]));

    CHECK_THROWS_AS(tape.softmax_row(tape.leaf(Tensor<float>(1, 0))), DimensionError);
}

TEST_CASE("softmax outputs positive and sum to one on random rows") {
    Rng rng(3);
    for (int it = 0; it < 50; ++it) {
        Tape<double> tape;
        int n = 1 + static_cast<int>(rng.next_below(8));
        Var y = tape.softmax_row(tape.leaf(random_tensor(1, n, rng)));
        double s = 0;
        for (double x : tape.val(y).v) {
            CHECK(x > 0.0);
            s += x;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("concat layout and identity") {
    Tape<float> tape;
    Var a = tape.leaf(Tensor<float>(1, 2, {1, 2}));
    Var b = tape.leaf(Tensor<float>(1, 1, {3}));
    Var c = tape.concat_cols({a, b});
    CHECK(tape.val(c).v == std::vector<float>{1, 2, 3});

    Var single = tape.concat_cols({a});
    CHECK(tape.val(single).v == tape.val(a).v);

    Var bad = tape.leaf(Tensor<float>(2, 2));
    CHECK_THROWS_AS(tape.concat_cols({a, bad}), DimensionError);
}

TEST_CASE("concat routes gradients back to parts") {
    Rng rng(5);
    std::vector<Tensor<double>> inputs{random_tensor(1, 3, rng), random_tensor(1, 2, rng)};
    double err = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) {
            return t.sum(t.concat_cols({in[0], in[1]}));
        },
        inputs);
    CHECK(err < 1e-4);
    // Sum over a concat pushes exactly ones into each part.
    Tape<double> tape;
    Var a = tape.leaf(inputs[0], true);
    Var b = tape.leaf(inputs[1], true);
    tape.backward(tape.sum(tape.concat_cols({a, b})));
    for (double g : tape.grad(a).v) CHECK(g == 1.0);
    for (double g : tape.grad(b).v) CHECK(g == 1.0);
}

TEST_CASE("backward: sum and scalar chain") {
    Tape<float> tape;
    Var x = tape.leaf(Tensor<float>(1, 3, {1, 2, 3}), true);
    tape.backward(tape.sum(x));
    CHECK(tape.grad(x).v == std::vector<float>{1, 1, 1});

    Tape<float> t2;
    Var w = t2.leaf(Tensor<float>(1, 1, {2}), true);
    Var z = t2.sigmoid(t2.leaf(Tensor<float>(1, 1, {0})));
    t2.backward(t2.mul(z, w));
    CHECK(t2.grad(w).v[0] == doctest::Approx(0.5));
}

TEST_CASE("backward rejects non-scalar loss") {
    Tape<float> tape;
    Var x = tape.leaf(Tensor<float>(1, 3), true);
    CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("gradient accumulates across k uses of one tensor") {
    Rng rng(13);
    Tensor<double> x0 = random_tensor(1, 4, rng);

    // x used three times.
    Tape<double> shared;
    Var x = shared.leaf(x0, true);
    Var y = shared.add(shared.mul(x, x), x);
    shared.backward(shared.sum(y));

    // Same formula with duplicated independent inputs; total grad is the sum
    // of the per-use grads.
    Tape<double> dup;
    Var a = dup.leaf(x0, true);
    Var b = dup.leaf(x0, true);
    Var c = dup.leaf(x0, true);
    dup.backward(dup.sum(dup.add(dup.mul(a, b), c)));
    for (int j = 0; j < 4; ++j) {
        double want = dup.grad(a).v[j] + dup.grad(b).v[j] + dup.grad(c).v[j];
        CHECK(shared.grad(x).v[j] == doctest::Approx(want));
    }
}

TEST_CASE("grad_check oracle sanity") {
    std::vector<Tensor<double>> id_in{Tensor<double>(1, 3, {0.3, -1.1, 0.7})};
    double err0 = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) { return t.sum(in[0]); }, id_in);
    CHECK(err0 < 1e-9);  // exact up to rounding of x +/- eps

    double err1 = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) { return t.sum(t.tanh_(in[0])); },
        {Tensor<double>(1, 1, {0.4})});
    CHECK(err1 < 1e-7);
}

TEST_CASE("cross entropy closed forms and gradient") {
    Tape<double> tape;
    Var uniform = tape.leaf(Tensor<double>(1, 4, {1, 1, 1, 1}));
    CHECK(tape.val(tape.cross_entropy(uniform, 2)).v[0] == doctest::Approx(std::log(4.0)));

    Var peaked = tape.leaf(Tensor<double>(1, 3, {1000, 0, 0}));
    CHECK(tape.val(tape.cross_entropy(peaked, 0)).v[0] == doctest::Approx(0.0));
    CHECK_THROWS_AS(tape.cross_entropy(uniform, 4), ContractError);

    Rng rng(17);
    double err = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) { return t.cross_entropy(in[0], 1); },
        {random_tensor(1, 5, rng)});
    CHECK(err < 1e-4);
}

TEST_CASE("forward replay is deterministic") {
    Rng rng(19);
    Tensor<double> a = random_tensor(2, 3, rng), b = random_tensor(3, 2, rng);
    auto run = [&] {
        Tape<double> t;
        return t.val(t.tanh_(t.matmul(t.leaf(a), t.leaf(b)))).v;
    };
    CHECK(run() == run());
}

TEST_CASE("row/vstack/softmax_cols gradients") {
    Rng rng(23);
    std::vector<Tensor<double>> inputs{random_tensor(1, 3, rng), random_tensor(1, 3, rng),
                                       random_tensor(1, 3, rng)};
    double err = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) {
            Var s = t.softmax_cols(t.vstack({in[0], in[1], in[2]}));
            Var r = t.mul(t.row(s, 0), t.row(s, 2));
            return t.sum(r);
        },
        inputs);
    CHECK(err < 1e-4);

    // Columns of softmax_cols sum to one.
    Tape<double> tape;
    Var s = tape.softmax_cols(tape.vstack(
        {tape.leaf(inputs[0]), tape.leaf(inputs[1]), tape.leaf(inputs[2])}));
    for (int c = 0; c < 3; ++c) {
        double sum = 0;
        for (int r = 0; r < 3; ++r) sum += tape.val(s).at(r, c);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("dot, scale and slice gradients") {
    Rng rng(29);
    std::vector<Tensor<double>> inputs{random_tensor(1, 4, rng), random_tensor(1, 4, rng),
                                       random_tensor(1, 1, rng)};
    double err = grad_check(
        [](Tape<double>& t, const std::vector<Var>& in) {
            Var d = t.dot(in[0], in[1]);
            Var s = t.scale(in[1], d);
            return t.sum(t.add(t.slice_cols(s, 1, 2), t.slice_cols(t.scale(in[0], in[2]), 0, 2)));
        },
        inputs);
    CHECK(err < 1e-4);
}
