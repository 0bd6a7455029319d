#include "refldiff/denoiser.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace refl {

namespace {

using nlohmann::json;

// Concatenates the noisy data channels with the encoded condition channels.
Grid build_input(const ArchDescriptor& arch, const State& xt, const Condition<double>* cond) {
    if (xt.x.channels() != arch.data_channels)
        throw DimensionError("denoise: state must have " + std::to_string(arch.data_channels) +
                             " channels");
    if (!arch.conditioned) return xt.x;
    if (!cond) throw DimensionError("denoise: model is conditioned but no condition was given");
    if (cond->encoded.height() != xt.x.height() || cond->encoded.width() != xt.x.width())
        throw DimensionError("denoise: condition spatial size does not match the state");
    if (cond->encoded.channels() != encoded_channel_count(arch.pe_bands))
        throw DimensionError("denoise: condition has " + std::to_string(cond->encoded.channels()) +
                             " channels, expected " +
                             std::to_string(encoded_channel_count(arch.pe_bands)));
    Grid input(arch.in_channels(), xt.x.height(), xt.x.width());
    input.array().topRows(arch.data_channels) = xt.x.array();
    input.array().bottomRows(cond->encoded.channels()) = cond->encoded.array();
    return input;
}

}  // namespace

Grid denoise(const DenoiserModel& model, const State& xt, const Condition<double>* cond,
             const Schedule& sched, DenoiseContext* ctx) {
    sched.require_step(xt.t);
    switch (model.kind) {
        case DenoiserKind::analytic_gmm:
            return gmm_denoise(model.gmm, xt, sched);
        case DenoiserKind::trained: {
            const Grid input = build_input(model.net.arch(), xt, cond);
            if (ctx) {
                Grid out = model.net.forward(input, xt.t, &ctx->tape);
                ctx->valid = true;
                return out;
            }
            return model.net.forward(input, xt.t);
        }
    }
    throw CapabilityError("denoise: unsupported model kind");
}

Grid denoise_vjp(const DenoiserModel& model, const State& xt, const Condition<double>* cond,
                 const Grid& upstream, const Schedule& sched, const DenoiseContext* ctx) {
    sched.require_step(xt.t);
    require_same_shape(xt.x, upstream, "denoise_vjp");
    switch (model.kind) {
        case DenoiserKind::analytic_gmm:
            return gmm_denoise_vjp(model.gmm, xt, upstream, sched);
        case DenoiserKind::trained: {
            const ArchDescriptor& arch = model.net.arch();
            ConvNet::Tape local_tape;
            const ConvNet::Tape* tape = nullptr;
            if (ctx && ctx->valid) {
                tape = &ctx->tape;
            } else {
                const Grid input = build_input(arch, xt, cond);
                model.net.forward(input, xt.t, &local_tape);
                tape = &local_tape;
            }
            Grid full = model.net.backward_input(*tape, upstream);
            Grid out(arch.data_channels, xt.x.height(), xt.x.width());
            out.array() = full.array().topRows(arch.data_channels);
            return out;
        }
    }
    throw CapabilityError("denoise_vjp: unsupported model kind");
}

namespace {
constexpr char kMagic[4] = {'M', 'D', 'L', '1'};
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    if (ckpt.model.kind != DenoiserKind::trained)
        throw CapabilityError("save_checkpoint: only trained models are persisted");
    const ArchDescriptor& a = ckpt.model.net.arch();
    json header = {
        {"format", "refldiff-checkpoint"},
        {"version", 1},
        {"kind", "trained"},
        {"arch",
         {{"data_channels", a.data_channels},
          {"out_channels", a.out_channels},
          {"conditioned", a.conditioned},
          {"pe_bands", a.pe_bands},
          {"base_width", a.base_width},
          {"num_blocks", a.num_blocks},
          {"temb_dim", a.temb_dim}}},
        {"schedule", {{"T", ckpt.schedule_T}, {"beta_start", ckpt.beta_start}, {"beta_end", ckpt.beta_end}}},
        {"final_train_loss", ckpt.model.final_train_loss},
        {"trained_steps", ckpt.model.trained_steps},
        {"param_count", ckpt.model.net.param_count()},
    };
    const std::string htext = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open " + path);
    out.write(kMagic, 4);
    const std::uint32_t hlen = static_cast<std::uint32_t>(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(htext.data(), htext.size());
    const auto& p = ckpt.model.net.params();
    std::vector<float> buf(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(p[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("load_checkpoint: bad magic in " + path);
    std::uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    if (!in) throw IoError("load_checkpoint: truncated header in " + path);
    json header;
    try {
        header = json::parse(htext);
    } catch (const json::exception& e) {
        throw IoError("load_checkpoint: invalid header: " + std::string(e.what()));
    }
    if (header.value("kind", "") != std::string("trained"))
        throw CapabilityError("load_checkpoint: unsupported model kind");
    const auto& aj = header.at("arch");
    ArchDescriptor arch;
    arch.data_channels = aj.at("data_channels").get<int>();
    arch.out_channels = aj.at("out_channels").get<int>();
    arch.conditioned = aj.at("conditioned").get<bool>();
    arch.pe_bands = aj.at("pe_bands").get<int>();
    arch.base_width = aj.at("base_width").get<int>();
    arch.num_blocks = aj.at("num_blocks").get<int>();
    arch.temb_dim = aj.at("temb_dim").get<int>();
    arch.validate();

    Checkpoint ckpt;
    ckpt.schedule_T = header.at("schedule").at("T").get<int>();
    ckpt.beta_start = header.at("schedule").at("beta_start").get<double>();
    ckpt.beta_end = header.at("schedule").at("beta_end").get<double>();
    ConvNet net(arch);
    const Eigen::Index n = net.param_count();
    if (header.at("param_count").get<Eigen::Index>() != n)
        throw CompatibilityError("load_checkpoint: parameter count does not match the arch");
    std::vector<float> buf(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw IoError("load_checkpoint: truncated parameters in " + path);
    for (Eigen::Index i = 0; i < n; ++i) net.params()[i] = static_cast<double>(buf[static_cast<std::size_t>(i)]);
    ckpt.model = DenoiserModel::trained_net(std::move(net));
    ckpt.model.final_train_loss = header.value("final_train_loss", -1.0);
    ckpt.model.trained_steps = header.value("trained_steps", 0);
    return ckpt;
}

}  // namespace refl
