#pragma once

// Central finite-difference gradient checks (64-bit, eps = 1e-3), shared
// between the unit tests and the acceptance suite.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "straightkit/nets.hpp"

namespace gradcheck {

using straightkit::ParamSet;
using straightkit::Rng;
using straightkit::TensorT;

// Relative error with an absolute floor: differences below the floor are
// finite-difference truncation noise on near-zero gradients.
inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    return std::abs(analytic - numeric) / denom;
}

template <typename T>
TensorT<T> random_tensor(int n, int c, int h, int w, uint64_t seed, double lo = -1.0,
                         double hi = 1.0) {
    TensorT<T> t(n, c, h, w);
    Rng rng(seed);
    for (T& v : t.v) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

// Worst relative error between analytic parameter gradients and central
// differences of `loss` over every element of every parameter.
inline double check_params(ParamSet<double>& params, const std::function<double()>& loss,
                           const std::function<void()>& compute_grads, double eps = 1e-3) {
    compute_grads();
    // Copy analytic gradients before FD evaluations disturb state.
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.push_back(*p.grad);

    double worst = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = *params[pi].data;
        for (size_t i = 0; i < data.size(); ++i) {
            const double orig = data[i];
            data[i] = orig + eps;
            const double lp = loss();
            data[i] = orig - eps;
            const double lm = loss();
            data[i] = orig;
            const double fd = (lp - lm) / (2.0 * eps);
            worst = std::max(worst, rel_err(analytic[pi][i], fd));
        }
    }
    return worst;
}

// Same check for the gradient with respect to an input tensor.
inline double check_input(TensorT<double>& x, const std::vector<double>& analytic,
                          const std::function<double()>& loss, double eps = 1e-3) {
    double worst = 0.0;
    for (size_t i = 0; i < x.v.size(); ++i) {
        const double orig = x.v[i];
        x.v[i] = orig + eps;
        const double lp = loss();
        x.v[i] = orig - eps;
        const double lm = loss();
        x.v[i] = orig;
        worst = std::max(worst, rel_err(analytic[i], (lp - lm) / (2.0 * eps)));
    }
    return worst;
}

// Linear probe loss sum(out * r) whose gradient w.r.t. out is exactly r.
template <typename T>
double probe_loss(const TensorT<T>& out, const TensorT<T>& r) {
    double acc = 0.0;
    for (size_t i = 0; i < out.v.size(); ++i)
        acc += static_cast<double>(out.v[i]) * static_cast<double>(r.v[i]);
    return acc;
}

}  // namespace gradcheck
