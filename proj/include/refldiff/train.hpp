#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "refldiff/dataset.hpp"
#include "refldiff/denoiser.hpp"

namespace refl {

struct TrainOptions {
    int steps = 3000;
    int batch = 8;
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int threads = 1;
    int log_every = 25;
};

struct TrainResult {
    DenoiserModel model;
    std::vector<std::pair<int, double>> loss_log;  // (step, batch loss)
    double final_loss = 0.0;
};

// Minimizes E || eps - eps_hat(sqrt(abar_t) x0 + sqrt(1-abar_t) eps, t | PE(uv)) ||^2
// with Adam over uniformly sampled timesteps. Deterministic given the seed
// and independent of the thread count (per-sample noise streams, gradients
// merged in sample order). Set `resume_from` to continue from existing
// parameters (optimizer state starts fresh).
TrainResult train_denoiser(const PatchDataset& dataset, const ArchDescriptor& arch,
                           const Schedule& sched, const TrainOptions& opts,
                           const ConvNet* resume_from = nullptr, int step_offset = 0);

}  // namespace refl
