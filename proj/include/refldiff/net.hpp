#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "refldiff/encoding.hpp"
#include "refldiff/grid.hpp"

namespace refl {

// Architecture of the trainable noise-prediction network: a stem conv,
// `num_blocks` residual blocks with a per-block timestep-embedding bias, and
// a head conv back to the data channels. The encoded UV condition is
// concatenated to the input when `conditioned`. All convolutions are 3x3,
// stride 1, zero-padded; the nonlinearity is SiLU.
struct ArchDescriptor {
    int data_channels = 7;
    int out_channels = 7;
    bool conditioned = true;
    int pe_bands = 6;
    int base_width = 16;
    int num_blocks = 3;
    int temb_dim = 32;

    int cond_channels() const { return conditioned ? 2 + 4 * pe_bands : 0; }
    int in_channels() const { return data_channels + cond_channels(); }

    void validate() const {
        if (data_channels < 1 || out_channels < 1)
            throw ConfigError("arch: channel counts must be positive");
        if (pe_bands < 0) throw ConfigError("arch: pe_bands must be >= 0");
        if (base_width < 1) throw ConfigError("arch: base_width must be >= 1");
        if (num_blocks < 1) throw ConfigError("arch: num_blocks must be >= 1");
        if (temb_dim < 2 || temb_dim % 2 != 0)
            throw ConfigError("arch: temb_dim must be an even number >= 2");
    }

    bool operator==(const ArchDescriptor&) const = default;
};

// Noise-prediction network with its own reverse-mode differentiation over
// the fixed layer vocabulary (conv3x3, SiLU, bias-add, linear). Evaluation
// is deterministic and read-only over the parameter vector.
class ConvNet {
public:
    ConvNet() = default;
    explicit ConvNet(const ArchDescriptor& arch);

    const ArchDescriptor& arch() const { return arch_; }
    Eigen::Index param_count() const { return static_cast<Eigen::Index>(params_.size()); }
    Eigen::ArrayXd& params() { return params_; }
    const Eigen::ArrayXd& params() const { return params_; }

    void init_params(std::uint64_t seed);

    // Activations recorded by a forward pass, consumed by the backward
    // passes. Valid only for the parameter values it was recorded with.
    struct Tape {
        Eigen::Index h = 0, w = 0;
        int t = 0;
        Eigen::VectorXd e0, pre1, e1, pre2, temb;
        Grid input;
        std::vector<Grid> z;  // residual trunk states z_0..z_B
        std::vector<Grid> p;  // silu(z_i)
        std::vector<Grid> r;  // conv_a output + temb bias
        std::vector<Grid> s;  // silu(r)
        Grid trunk_act;       // silu(z_B)
    };

    // input: (in_channels x H x W) grid, already including the encoded
    // condition channels when the arch is conditioned.
    Grid forward(const Grid& input, int t, Tape* tape = nullptr) const;

    // upstream^T d(out)/d(input); requires a tape from forward().
    Grid backward_input(const Tape& tape, const Grid& upstream) const;

    // Same, but also accumulates parameter gradients into `param_grad`
    // (sized like params).
    Grid backward(const Tape& tape, const Grid& upstream, Eigen::ArrayXd& param_grad) const;

private:
    struct TensorSpec {
        std::string name;
        Eigen::Index rows = 0, cols = 0, offset = 0;
    };

    void build_layout();
    const TensorSpec& tensor(const std::string& name) const;

    ArchDescriptor arch_;
    std::vector<TensorSpec> layout_;
    Eigen::ArrayXd params_;
};

}  // namespace refl
