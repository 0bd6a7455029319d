#include "refldiff/train.hpp"

#include <cmath>

#include "refldiff/parallel.hpp"
#include "refldiff/random.hpp"

namespace refl {

namespace {

// Physical-space 9-channel record -> (x0 in diffusion space, encoded uv).
struct TrainSample {
    Grid x0;  // 7 channels in [-1,1]
    Grid uv;  // 2 channels
};

TrainSample make_sample(const PatchRecord& rec) {
    TrainSample s;
    const Grid full = rec.data.cast<double>();
    s.x0 = Grid(7, full.height(), full.width());
    s.x0.array() = full.array().topRows(7);
    for (Eigen::Index c = 0; c < 4; ++c)
        s.x0.array().row(c) = s.x0.array().row(c) * 2.0 - 1.0;  // albedo [0,1] -> [-1,1]
    s.uv = Grid(2, full.height(), full.width());
    s.uv.array() = full.array().bottomRows(2);
    return s;
}

}  // namespace

TrainResult train_denoiser(const PatchDataset& dataset, const ArchDescriptor& arch,
                           const Schedule& sched, const TrainOptions& opts,
                           const ConvNet* resume_from, int step_offset) {
    arch.validate();
    if (dataset.records.empty()) throw TrainingError("train_denoiser: empty dataset");
    if (opts.steps < 1 || opts.batch < 1) throw ConfigError("train_denoiser: steps and batch must be >= 1");
    if (dataset.records.front().data.channels() != 9)
        throw DimensionError("train_denoiser: records must have 9 channels");

    ConvNet net(arch);
    if (resume_from) {
        if (resume_from->param_count() != net.param_count())
            throw CompatibilityError("train_denoiser: resume parameters do not match the arch");
        net.params() = resume_from->params();
    } else {
        net.init_params(derive_seed(opts.seed, 0x1217ull));
    }

    const Eigen::Index n_params = net.param_count();
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(n_params);
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n_params);
    const std::size_t n_rec = dataset.records.size();

    TrainResult result;
    double loss = 0.0;
    std::vector<Eigen::ArrayXd> sample_grads(static_cast<std::size_t>(opts.batch));
    std::vector<double> sample_losses(static_cast<std::size_t>(opts.batch));

    for (int step = 0; step < opts.steps; ++step) {
        const int global_step = step_offset + step;
        // Batch record indices from a dedicated stream.
        RandomStream pick(derive_seed(opts.seed, 0xBA7C4ull, static_cast<std::uint64_t>(global_step)));
        std::vector<std::size_t> idx(static_cast<std::size_t>(opts.batch));
        for (auto& i : idx) i = static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(n_rec) - 1));

        parallel_for(opts.batch, opts.threads, [&](std::int64_t k) {
            RandomStream rs(derive_seed(opts.seed, 0x5A3Dull,
                                        static_cast<std::uint64_t>(global_step),
                                        static_cast<std::uint64_t>(k)));
            const TrainSample sample = make_sample(dataset.records[idx[static_cast<std::size_t>(k)]]);
            const int t = static_cast<int>(rs.uniform_int(1, sched.T));
            Grid noise(7, sample.x0.height(), sample.x0.width());
            rs.fill_normal(noise);
            State x0{sample.x0, 0};
            const State xt = forward_sample(x0, t, noise, sched);

            Grid input;
            if (arch.conditioned) {
                const Condition<double> cond = positional_encode(sample.uv, arch.pe_bands);
                input = Grid(arch.in_channels(), xt.x.height(), xt.x.width());
                input.array().topRows(7) = xt.x.array();
                input.array().bottomRows(cond.encoded.channels()) = cond.encoded.array();
            } else {
                input = xt.x;
            }
            ConvNet::Tape tape;
            const Grid eps_hat = net.forward(input, t, &tape);
            Grid diff = eps_hat;
            diff.array() -= noise.array();
            const double denom = static_cast<double>(opts.batch) * static_cast<double>(diff.array().size());
            sample_losses[static_cast<std::size_t>(k)] = diff.array().square().sum() / denom;
            Grid upstream = diff;
            upstream.array() *= 2.0 / denom;
            auto& grad = sample_grads[static_cast<std::size_t>(k)];
            grad = Eigen::ArrayXd::Zero(n_params);
            net.backward(tape, upstream, grad);
        });

        loss = 0.0;
        Eigen::ArrayXd grad = Eigen::ArrayXd::Zero(n_params);
        for (int k = 0; k < opts.batch; ++k) {
            loss += sample_losses[static_cast<std::size_t>(k)];
            grad += sample_grads[static_cast<std::size_t>(k)];
        }
        if (!std::isfinite(loss))
            throw TrainingError("train_denoiser: loss became non-finite at step " +
                                std::to_string(global_step));

        // Adam update with bias correction.
        const double t_adam = static_cast<double>(global_step + 1);
        m = opts.adam_beta1 * m + (1.0 - opts.adam_beta1) * grad;
        v = opts.adam_beta2 * v + (1.0 - opts.adam_beta2) * grad.square();
        const double mc = 1.0 - std::pow(opts.adam_beta1, t_adam);
        const double vc = 1.0 - std::pow(opts.adam_beta2, t_adam);
        net.params() -= opts.lr * (m / mc) / ((v / vc).sqrt() + opts.adam_eps);

        if (step % opts.log_every == 0 || step == opts.steps - 1)
            result.loss_log.emplace_back(global_step, loss);
    }

    result.final_loss = loss;
    result.model = DenoiserModel::trained_net(std::move(net));
    result.model.final_train_loss = loss;
    result.model.trained_steps = step_offset + opts.steps;
    return result;
}

}  // namespace refl
