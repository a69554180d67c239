#pragma once

#include <cmath>
#include <vector>

#include "regnn/tensor.hpp"

namespace regnn {

// Compares reverse-mode gradients against central finite differences, always
// in 64-bit floats. `f` receives a fresh tape plus one Var per input tensor
// and must return a scalar loss. Returns
//   max over coordinates of |analytic - numeric| / max(1, |numeric|).
template <class F>
double grad_check(F&& f, const std::vector<Tensor<double>>& inputs, double eps = 1e-5) {
    auto run = [&](const std::vector<Tensor<double>>& xs, bool with_grad,
                   std::vector<Tensor<double>>* grads) -> double {
        Tape<double> tape;
        std::vector<Var> vars;
        vars.reserve(xs.size());
        for (const auto& x : xs) vars.push_back(tape.leaf(x, with_grad));
        Var loss = f(tape, vars);
        double value = tape.val(loss).v[0];
        if (!std::isfinite(value)) throw NumericError("grad_check: non-finite loss");
        if (with_grad) {
            tape.backward(loss);
            grads->clear();
            for (Var v : vars) grads->push_back(tape.grad(v));
        }
        return value;
    };

    std::vector<Tensor<double>> analytic;
    run(inputs, true, &analytic);

    double worst = 0.0;
    std::vector<Tensor<double>> xs = inputs;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        for (std::size_t i = 0; i < xs[t].v.size(); ++i) {
            double keep = xs[t].v[i];
            xs[t].v[i] = keep + eps;
            double up = run(xs, false, nullptr);
            xs[t].v[i] = keep - eps;
            double dn = run(xs, false, nullptr);
            xs[t].v[i] = keep;
            double numeric = (up - dn) / (2.0 * eps);
            double err = std::abs(analytic[t].v[i] - numeric) / std::max(1.0, std::abs(numeric));
            if (!std::isfinite(err)) throw NumericError("grad_check: non-finite difference");
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace regnn
