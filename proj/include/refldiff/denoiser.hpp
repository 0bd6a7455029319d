#pragma once

#include <cstdint>
#include <string>

#include "refldiff/diffusion.hpp"
#include "refldiff/encoding.hpp"
#include "refldiff/gmm.hpp"
#include "refldiff/net.hpp"

namespace refl {

enum class DenoiserKind { analytic_gmm, trained };

// The eps_theta(x_t, t | y) abstraction: either an exact Gaussian-mixture
// score oracle (verification) or the trained conv net. Evaluation and vjp
// are pure functions of (state, condition, parameters).
struct DenoiserModel {
    DenoiserKind kind = DenoiserKind::trained;
    GmmPrior gmm;
    ConvNet net;
    double final_train_loss = -1.0;
    int trained_steps = 0;

    bool conditioned() const {
        return kind == DenoiserKind::trained && net.arch().conditioned;
    }
    int pe_bands() const { return kind == DenoiserKind::trained ? net.arch().pe_bands : 0; }

    static DenoiserModel analytic(GmmPrior prior) {
        prior.validate();
        DenoiserModel m;
        m.kind = DenoiserKind::analytic_gmm;
        m.gmm = std::move(prior);
        return m;
    }

    static DenoiserModel trained_net(ConvNet net) {
        DenoiserModel m;
        m.kind = DenoiserKind::trained;
        m.net = std::move(net);
        return m;
    }
};

// Reusable forward-pass record so a denoise followed by its vjp runs the
// network once.
struct DenoiseContext {
    ConvNet::Tape tape;
    bool valid = false;
};

Grid denoise(const DenoiserModel& model, const State& xt, const Condition<double>* cond,
             const Schedule& sched, DenoiseContext* ctx = nullptr);

Grid denoise_vjp(const DenoiserModel& model, const State& xt, const Condition<double>* cond,
                 const Grid& upstream, const Schedule& sched,
                 const DenoiseContext* ctx = nullptr);

// Checkpoint file: magic bytes, JSON header (arch descriptor + training
// schedule parameters), then the parameter vector as little-endian 32-bit
// floats. Only the trained kind is persisted.
struct Checkpoint {
    DenoiserModel model;
    int schedule_T = 0;
    double beta_start = kDefaultBetaStart;
    double beta_end = kDefaultBetaEnd;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace refl
