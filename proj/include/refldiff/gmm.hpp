#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "refldiff/diffusion.hpp"
#include "refldiff/grid.hpp"

namespace refl {

// Isotropic Gaussian mixture over clean grids. Used as an exact score oracle:
// the noisy marginal at time t is the mixture of N(sqrt(abar) mu_k,
// (abar s_k^2 + 1 - abar) I), so the ideal noise prediction has a closed form.
struct GmmPrior {
    struct Component {
        double weight = 1.0;
        Grid mean;
        double var = 0.0;  // s_k^2
    };
    std::vector<Component> components;

    void validate() const {
        if (components.empty()) throw ConfigError("GmmPrior: no components");
        double wsum = 0.0;
        for (const auto& c : components) {
            if (c.weight < 0.0) throw ConfigError("GmmPrior: negative weight");
            if (c.var < 0.0) throw ConfigError("GmmPrior: negative variance");
            if (!c.mean.same_shape(components.front().mean))
                throw DimensionError("GmmPrior: component means must share one shape");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("GmmPrior: weights must sum to 1");
    }

    static GmmPrior single(Grid mean, double var) {
        GmmPrior p;
        p.components.push_back({1.0, std::move(mean), var});
        return p;
    }
};

namespace detail {

// Responsibilities r_k and scaled means m_k = (sqrt(abar) mu_k - x) / v_k of
// the noisy mixture marginal at alpha_bar = abar.
struct GmmPosterior {
    std::vector<double> resp;
    std::vector<double> var_t;  // v_k = abar s_k^2 + 1 - abar
    double log_marginal = 0.0;
};

inline GmmPosterior gmm_posterior(const GmmPrior& prior, const Grid& x, double abar) {
    const std::size_t K = prior.components.size();
    GmmPosterior post;
    post.resp.resize(K);
    post.var_t.resize(K);
    const double dim = static_cast<double>(x.array().size());
    const double root_abar = std::sqrt(abar);
    std::vector<double> logp(K);
    double max_logp = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        const auto& comp = prior.components[k];
        const double v = abar * comp.var + (1.0 - abar);
        post.var_t[k] = v;
        const double sq = (x.array() - root_abar * comp.mean.array()).square().sum();
        logp[k] = std::log(comp.weight) - 0.5 * (dim * std::log(2.0 * M_PI * v) + sq / v);
        max_logp = std::max(max_logp, logp[k]);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        post.resp[k] = std::exp(logp[k] - max_logp);
        norm += post.resp[k];
    }
    for (auto& r : post.resp) r /= norm;
    post.log_marginal = max_logp + std::log(norm);
    return post;
}

}  // namespace detail

// log p_t(x) of the noisy marginal; exposed for score cross-checks.
inline double gmm_log_marginal(const GmmPrior& prior, const Grid& x, double abar) {
    return detail::gmm_posterior(prior, x, abar).log_marginal;
}

// Ideal noise prediction eps = -sqrt(1 - abar) * grad log p_t(x_t).
inline Grid gmm_denoise(const GmmPrior& prior, const State& xt, const Schedule& sched) {
    sched.require_step(xt.t);
    const double abar = sched.alpha_bar[xt.t - 1];
    const double root_abar = std::sqrt(abar);
    const auto post = detail::gmm_posterior(prior, xt.x, abar);
    Grid eps = xt.x;
    eps.array().setZero();
    for (std::size_t k = 0; k < prior.components.size(); ++k) {
        const auto& comp = prior.components[k];
        eps.array() += (post.resp[k] / post.var_t[k]) *
                       (xt.x.array() - root_abar * comp.mean.array());
    }
    eps.array() *= std::sqrt(1.0 - abar);
    return eps;
}

// upstream^T d(eps)/d(x_t) for the mixture denoiser, in closed form.
inline Grid gmm_denoise_vjp(const GmmPrior& prior, const State& xt, const Grid& upstream,
                            const Schedule& sched) {
    sched.require_step(xt.t);
    require_same_shape(xt.x, upstream, "gmm_denoise_vjp");
    const double abar = sched.alpha_bar[xt.t - 1];
    const double root_abar = std::sqrt(abar);
    const double root_one_minus = std::sqrt(1.0 - abar);
    const auto post = detail::gmm_posterior(prior, xt.x, abar);
    const std::size_t K = prior.components.size();

    // score s = sum_k r_k m_k with m_k = (sqrt(abar) mu_k - x) / v_k;
    // J_s^T u = sum_k r_k (m_k . u)(m_k - s) - (sum_k r_k / v_k) u.
    std::vector<Grid> m(K);
    Grid s = xt.x;
    s.array().setZero();
    double inv_var_mix = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        m[k] = xt.x;
        m[k].array() =
            (root_abar * prior.components[k].mean.array() - xt.x.array()) / post.var_t[k];
        s.array() += post.resp[k] * m[k].array();
        inv_var_mix += post.resp[k] / post.var_t[k];
    }
    Grid out = xt.x;
    out.array() = -inv_var_mix * upstream.array();
    for (std::size_t k = 0; k < K; ++k) {
        const double dot = (m[k].array() * upstream.array()).sum();
        out.array() += post.resp[k] * dot * (m[k].array() - s.array());
    }
    out.array() *= -root_one_minus;  // eps = -sqrt(1-abar) * s
    return out;
}

}  // namespace refl
