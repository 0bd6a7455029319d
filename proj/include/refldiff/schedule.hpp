#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "refldiff/errors.hpp"

namespace refl {

enum class SigmaMode { ancestral, zero };

inline std::string to_string(SigmaMode m) {
    return m == SigmaMode::ancestral ? "ancestral" : "zero";
}

inline SigmaMode sigma_mode_from_string(const std::string& s) {
    if (s == "ancestral") return SigmaMode::ancestral;
    if (s == "zero") return SigmaMode::zero;
    throw ConfigError("unknown sigma_mode '" + s + "' (expected 'ancestral' or 'zero')");
}

// Diffusion constants beta_t, alpha_t, alpha_bar_t, sigma_t for t = 1..T,
// stored 0-based (index t-1). All entries are 64-bit.
struct Schedule {
    int T = 0;
    Eigen::ArrayXd beta;
    Eigen::ArrayXd alpha;
    Eigen::ArrayXd alpha_bar;
    Eigen::ArrayXd sigma;
    SigmaMode sigma_mode = SigmaMode::zero;
    double beta_start = 0.0;
    double beta_end = 0.0;

    // alpha_bar_t with the convention alpha_bar_0 = 1.
    double alpha_bar_at(int t) const {
        if (t < 0 || t > T) throw InvalidTimestepError("alpha_bar_at: t out of [0,T]");
        return t == 0 ? 1.0 : alpha_bar[t - 1];
    }

    void require_step(int t) const {
        if (t < 1 || t > T)
            throw InvalidTimestepError("timestep " + std::to_string(t) + " outside [1," +
                                       std::to_string(T) + "]");
    }
};

constexpr double kDefaultBetaStart = 1e-4;
constexpr double kDefaultBetaEnd = 0.02;

inline Schedule make_schedule(int T, double beta_start = kDefaultBetaStart,
                              double beta_end = kDefaultBetaEnd,
                              SigmaMode sigma_mode = SigmaMode::zero) {
    if (T < 1) throw ConfigError("make_schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_start < 1.0) || !(beta_end > 0.0 && beta_end < 1.0))
        throw ConfigError("make_schedule: beta bounds must lie in (0,1)");
    if (beta_start > beta_end) throw ConfigError("make_schedule: beta_start must be <= beta_end");

    Schedule s;
    s.T = T;
    s.sigma_mode = sigma_mode;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta = T == 1 ? Eigen::ArrayXd::Constant(1, beta_start)
                    : Eigen::ArrayXd::LinSpaced(T, beta_start, beta_end);
    s.alpha = 1.0 - s.beta;
    s.alpha_bar.resize(T);
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        prod *= s.alpha[t];
        s.alpha_bar[t] = prod;
    }
    s.sigma = Eigen::ArrayXd::Zero(T);
    if (sigma_mode == SigmaMode::ancestral) {
        for (int t = 0; t < T; ++t) {
            const double abar_prev = t == 0 ? 1.0 : s.alpha_bar[t - 1];
            s.sigma[t] = std::sqrt(s.beta[t] * (1.0 - abar_prev) / (1.0 - s.alpha_bar[t]));
        }
    }
    return s;
}

}  // namespace refl
