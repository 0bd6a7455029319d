#pragma once

#include <cmath>

#include "refldiff/grid.hpp"
#include "refldiff/schedule.hpp"

namespace refl {

// A multi-channel grid tagged with its diffusion timestep. t = 0 is clean
// data, t = T is (approximately) unit Gaussian noise.
template <typename Scalar>
struct NoisyState {
    ChannelGrid<Scalar> x;
    int t = 0;
};

using State = NoisyState<double>;

// x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) noise.
template <typename Scalar>
NoisyState<Scalar> forward_sample(const NoisyState<Scalar>& x0, int t,
                                  const ChannelGrid<Scalar>& noise, const Schedule& sched) {
    if (x0.t != 0) throw InvalidTimestepError("forward_sample: input state must be at t=0");
    sched.require_step(t);
    require_same_shape(x0.x, noise, "forward_sample");
    const double abar = sched.alpha_bar[t - 1];
    NoisyState<Scalar> out;
    out.t = t;
    out.x = x0.x;
    out.x.array() = std::sqrt(abar) * x0.x.array() + std::sqrt(1.0 - abar) * noise.array();
    return out;
}

// x0_hat = (x_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t).
template <typename Scalar>
ChannelGrid<Scalar> predict_clean(const NoisyState<Scalar>& xt, const ChannelGrid<Scalar>& eps_hat,
                                  const Schedule& sched) {
    sched.require_step(xt.t);
    require_same_shape(xt.x, eps_hat, "predict_clean");
    const double abar = sched.alpha_bar[xt.t - 1];
    ChannelGrid<Scalar> out = xt.x;
    out.array() = (xt.x.array() - std::sqrt(1.0 - abar) * eps_hat.array()) / std::sqrt(abar);
    return out;
}

// Ancestral reverse transition; z is ignored when sigma_t = 0.
template <typename Scalar>
NoisyState<Scalar> reverse_step(const NoisyState<Scalar>& xt, const ChannelGrid<Scalar>& eps_hat,
                                const ChannelGrid<Scalar>& z, const Schedule& sched) {
    sched.require_step(xt.t);
    require_same_shape(xt.x, eps_hat, "reverse_step");
    const int t = xt.t;
    const double alpha = sched.alpha[t - 1];
    const double abar = sched.alpha_bar[t - 1];
    const double sigma = sched.sigma[t - 1];
    NoisyState<Scalar> out;
    out.t = t - 1;
    out.x = xt.x;
    out.x.array() =
        (xt.x.array() - ((1.0 - alpha) / std::sqrt(1.0 - abar)) * eps_hat.array()) /
        std::sqrt(alpha);
    if (sigma > 0.0) {
        require_same_shape(xt.x, z, "reverse_step noise");
        out.x.array() += sigma * z.array();
    }
    return out;
}

// Deterministic (eta = 0) step to an arbitrary earlier timestep; t_next = 0
// lands on the clean estimate (alpha_bar_0 = 1).
template <typename Scalar>
NoisyState<Scalar> ddim_step(const NoisyState<Scalar>& xt, const ChannelGrid<Scalar>& eps_hat,
                             int t_next, const Schedule& sched) {
    sched.require_step(xt.t);
    if (t_next < 0 || t_next >= xt.t)
        throw OrderingError("ddim_step: t_next must satisfy 0 <= t_next < t");
    require_same_shape(xt.x, eps_hat, "ddim_step");
    const double abar_next = sched.alpha_bar_at(t_next);
    ChannelGrid<Scalar> x0 = predict_clean(xt, eps_hat, sched);
    NoisyState<Scalar> out;
    out.t = t_next;
    out.x = std::move(x0);
    out.x.array() =
        std::sqrt(abar_next) * out.x.array() + std::sqrt(1.0 - abar_next) * eps_hat.array();
    return out;
}

}  // namespace refl
