#include "refldiff/net.hpp"

#include <cmath>
#include <map>

#include "refldiff/random.hpp"

namespace refl {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapC = Eigen::Map<const MatRM>;

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_deriv(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

Grid apply_silu(const Grid& g) {
    Grid out = g;
    out.array() = out.array().unaryExpr([](double x) { return silu(x); });
    return out;
}

// dL/dpre = dL/dpost (.) silu'(pre)
void mul_silu_deriv_inplace(Grid& grad, const Grid& pre) {
    grad.array() *= pre.array().unaryExpr([](double x) { return silu_deriv(x); });
}

// im2col for 3x3 same-padding convolution: Col((C*9) x HW) where row
// c*9 + (ky*3+kx) holds channel c shifted by (ky-1, kx-1), zeros outside.
MatRM im2col3x3(const Grid& x) {
    const Eigen::Index C = x.channels(), H = x.height(), W = x.width();
    MatRM col = MatRM::Zero(C * 9, H * W);
    for (Eigen::Index c = 0; c < C; ++c) {
        const double* src = x.array().row(c).data();
        for (int ky = 0; ky < 3; ++ky) {
            const Eigen::Index dy = ky - 1;
            for (int kx = 0; kx < 3; ++kx) {
                const Eigen::Index dx = kx - 1;
                double* dst = col.row(c * 9 + ky * 3 + kx).data();
                for (Eigen::Index r = 0; r < H; ++r) {
                    const Eigen::Index sr = r + dy;
                    if (sr < 0 || sr >= H) continue;
                    const Eigen::Index c_lo = std::max<Eigen::Index>(0, -dx);
                    const Eigen::Index c_hi = std::min(W, W - dx);
                    if (c_lo >= c_hi) continue;
                    const double* s = src + sr * W + c_lo + dx;
                    double* d = dst + r * W + c_lo;
                    std::copy(s, s + (c_hi - c_lo), d);
                }
            }
        }
    }
    return col;
}

// Adjoint of im2col: scatter-add Col rows back into an image grid.
Grid col2im3x3(const MatRM& col, Eigen::Index C, Eigen::Index H, Eigen::Index W) {
    Grid x(C, H, W);
    for (Eigen::Index c = 0; c < C; ++c) {
        double* dst = x.array().row(c).data();
        for (int ky = 0; ky < 3; ++ky) {
            const Eigen::Index dy = ky - 1;
            for (int kx = 0; kx < 3; ++kx) {
                const Eigen::Index dx = kx - 1;
                const double* src = col.row(c * 9 + ky * 3 + kx).data();
                for (Eigen::Index r = 0; r < H; ++r) {
                    const Eigen::Index sr = r + dy;
                    if (sr < 0 || sr >= H) continue;
                    const Eigen::Index c_lo = std::max<Eigen::Index>(0, -dx);
                    const Eigen::Index c_hi = std::min(W, W - dx);
                    if (c_lo >= c_hi) continue;
                    const double* s = src + r * W + c_lo;
                    double* d = dst + sr * W + c_lo + dx;
                    for (Eigen::Index i = 0; i < c_hi - c_lo; ++i) d[i] += s[i];
                }
            }
        }
    }
    return x;
}

Eigen::VectorXd sinusoidal_embedding(int t, int dim) {
    Eigen::VectorXd e(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq =
            std::exp(-std::log(10000.0) * (half > 1 ? static_cast<double>(i) / (half - 1) : 0.0));
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

}  // namespace

ConvNet::ConvNet(const ArchDescriptor& arch) : arch_(arch) {
    arch_.validate();
    build_layout();
    params_ = Eigen::ArrayXd::Zero(layout_.empty() ? 0 : layout_.back().offset +
                                                        layout_.back().rows * layout_.back().cols);
}

void ConvNet::build_layout() {
    layout_.clear();
    Eigen::Index offset = 0;
    auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        layout_.push_back({name, rows, cols, offset});
        offset += rows * cols;
    };
    const Eigen::Index wdt = arch_.base_width;
    const Eigen::Index D = arch_.temb_dim;
    add("temb1_w", D, D);
    add("temb1_b", D, 1);
    add("temb2_w", D, D);
    add("temb2_b", D, 1);
    add("stem_w", wdt, arch_.in_channels() * 9);
    add("stem_b", wdt, 1);
    for (int ib = 0; ib < arch_.num_blocks; ++ib) {
        const std::string p = "block" + std::to_string(ib) + "_";
        add(p + "a_w", wdt, wdt * 9);
        add(p + "a_b", wdt, 1);
        add(p + "proj_w", wdt, D);
        add(p + "proj_b", wdt, 1);
        add(p + "b_w", wdt, wdt * 9);
        add(p + "b_b", wdt, 1);
    }
    add("head_w", arch_.out_channels, wdt * 9);
    add("head_b", arch_.out_channels, 1);
}

const ConvNet::TensorSpec& ConvNet::tensor(const std::string& name) const {
    for (const auto& t : layout_)
        if (t.name == name) return t;
    throw ConfigError("ConvNet: unknown tensor '" + name + "'");
}

void ConvNet::init_params(std::uint64_t seed) {
    RandomStream rs(seed);
    for (const auto& spec : layout_) {
        double* ptr = params_.data() + spec.offset;
        const Eigen::Index n = spec.rows * spec.cols;
        const bool is_bias = spec.cols == 1;
        const bool is_head = spec.name == "head_w";
        if (is_bias || is_head) {
            std::fill(ptr, ptr + n, 0.0);  // zero-init head: eps_hat starts at 0
        } else {
            const double scale = std::sqrt(2.0 / static_cast<double>(spec.cols));
            for (Eigen::Index i = 0; i < n; ++i) ptr[i] = rs.normal() * scale;
        }
    }
}

Grid ConvNet::forward(const Grid& input, int t, Tape* tape) const {
    if (input.channels() != arch_.in_channels())
        throw DimensionError("ConvNet: expected " + std::to_string(arch_.in_channels()) +
                             " input channels, got " + std::to_string(input.channels()));
    const Eigen::Index H = input.height(), W = input.width(), HW = H * W;
    const Eigen::Index wdt = arch_.base_width, D = arch_.temb_dim;

    auto P = [&](const std::string& name) {
        const auto& s = tensor(name);
        return MapC(params_.data() + s.offset, s.rows, s.cols);
    };

    // Timestep embedding MLP.
    const Eigen::VectorXd e0 = sinusoidal_embedding(t, static_cast<int>(D));
    const Eigen::VectorXd pre1 = P("temb1_w") * e0 + P("temb1_b").col(0);
    Eigen::VectorXd e1 = pre1.unaryExpr([](double x) { return silu(x); });
    const Eigen::VectorXd pre2 = P("temb2_w") * e1 + P("temb2_b").col(0);
    Eigen::VectorXd temb = pre2.unaryExpr([](double x) { return silu(x); });

    auto conv = [&](const Grid& x, const std::string& w, const std::string& b, Eigen::Index cout) {
        const MatRM col = im2col3x3(x);
        Grid out(cout, H, W);
        MapM(out.array().data(), cout, HW).noalias() = P(w) * col;
        out.array().colwise() += Eigen::Map<const Eigen::ArrayXd>(
            params_.data() + tensor(b).offset, cout);
        return out;
    };

    std::vector<Grid> z, pact, ract, sact;
    Grid z0 = conv(input, "stem_w", "stem_b", wdt);
    z.push_back(std::move(z0));
    for (int ib = 0; ib < arch_.num_blocks; ++ib) {
        const std::string pref = "block" + std::to_string(ib) + "_";
        Grid p = apply_silu(z.back());
        Grid r = conv(p, pref + "a_w", pref + "a_b", wdt);
        const Eigen::VectorXd bias = P(pref + "proj_w") * temb +
                                     MapC(params_.data() + tensor(pref + "proj_b").offset, wdt, 1).col(0);
        r.array().colwise() += bias.array();
        Grid s = apply_silu(r);
        Grid u = conv(s, pref + "b_w", pref + "b_b", wdt);
        Grid znext = z.back();
        znext.array() += u.array();
        pact.push_back(std::move(p));
        ract.push_back(std::move(r));
        sact.push_back(std::move(s));
        z.push_back(std::move(znext));
    }
    Grid trunk = apply_silu(z.back());
    Grid out = conv(trunk, "head_w", "head_b", arch_.out_channels);

    if (tape) {
        tape->h = H;
        tape->w = W;
        tape->t = t;
        tape->e0 = e0;
        tape->pre1 = pre1;
        tape->e1 = std::move(e1);
        tape->pre2 = pre2;
        tape->temb = std::move(temb);
        tape->input = input;
        tape->z = std::move(z);
        tape->p = std::move(pact);
        tape->r = std::move(ract);
        tape->s = std::move(sact);
        tape->trunk_act = std::move(trunk);
    }
    return out;
}

Grid ConvNet::backward(const Tape& tape, const Grid& upstream, Eigen::ArrayXd& param_grad) const {
    if (param_grad.size() != params_.size())
        throw DimensionError("ConvNet::backward: param_grad has wrong size");
    const Eigen::Index H = tape.h, W = tape.w, HW = H * W;
    const Eigen::Index wdt = arch_.base_width, D = arch_.temb_dim;
    if (upstream.channels() != arch_.out_channels || upstream.height() != H ||
        upstream.width() != W)
        throw DimensionError("ConvNet::backward: upstream shape mismatch");

    auto P = [&](const std::string& name) {
        const auto& s = tensor(name);
        return MapC(params_.data() + s.offset, s.rows, s.cols);
    };
    auto G = [&](const std::string& name) {
        const auto& s = tensor(name);
        return MapM(param_grad.data() + s.offset, s.rows, s.cols);
    };

    // conv backward: returns d(input); accumulates dW = dOut * col(input)^T.
    auto conv_back = [&](const Grid& dout, const Grid& in, const std::string& w,
                         const std::string& b) {
        const auto& wspec = tensor(w);
        const Eigen::Index cin = wspec.cols / 9;
        MapC dout_m(dout.array().data(), dout.channels(), HW);
        const MatRM col = im2col3x3(in);
        G(w).noalias() += dout_m * col.transpose();
        G(b).col(0).noalias() += dout_m.rowwise().sum();
        MatRM dcol(cin * 9, HW);
        dcol.noalias() = P(w).transpose() * dout_m;
        return col2im3x3(dcol, cin, H, W);
    };

    Eigen::VectorXd dtemb = Eigen::VectorXd::Zero(D);

    // Head.
    Grid dtrunk = conv_back(upstream, tape.trunk_act, "head_w", "head_b");
    Grid dz = dtrunk;
    mul_silu_deriv_inplace(dz, tape.z.back());

    for (int ib = arch_.num_blocks - 1; ib >= 0; --ib) {
        const std::string pref = "block" + std::to_string(ib) + "_";
        // z_{i+1} = z_i + conv_b(silu(r)); dz currently = d z_{i+1}.
        Grid ds = conv_back(dz, tape.s[ib], pref + "b_w", pref + "b_b");
        mul_silu_deriv_inplace(ds, tape.r[ib]);  // ds is now dr
        // temb bias: broadcast add over pixels.
        MapC dr_m(ds.array().data(), wdt, HW);
        const Eigen::VectorXd drow = dr_m.rowwise().sum();
        G(pref + "proj_w").noalias() += drow * tape.temb.transpose();
        G(pref + "proj_b").col(0).noalias() += drow;
        dtemb.noalias() += P(pref + "proj_w").transpose() * drow;
        Grid dp = conv_back(ds, tape.p[ib], pref + "a_w", pref + "a_b");
        mul_silu_deriv_inplace(dp, tape.z[ib]);
        dz.array() += dp.array();  // residual skip + block path
    }

    Grid dinput = conv_back(dz, tape.input, "stem_w", "stem_b");

    // Timestep-embedding MLP backward (parameters only; t is not an input we
    // differentiate with respect to).
    Eigen::VectorXd dpre2 = dtemb;
    for (Eigen::Index i = 0; i < D; ++i) dpre2[i] *= silu_deriv(tape.pre2[i]);
    G("temb2_w").noalias() += dpre2 * tape.e1.transpose();
    G("temb2_b").col(0).noalias() += dpre2;
    Eigen::VectorXd dpre1 = P("temb2_w").transpose() * dpre2;
    for (Eigen::Index i = 0; i < D; ++i) dpre1[i] *= silu_deriv(tape.pre1[i]);
    G("temb1_w").noalias() += dpre1 * tape.e0.transpose();
    G("temb1_b").col(0).noalias() += dpre1;
    return dinput;
}

Grid ConvNet::backward_input(const Tape& tape, const Grid& upstream) const {
    const Eigen::Index H = tape.h, W = tape.w, HW = H * W;
    if (upstream.channels() != arch_.out_channels || upstream.height() != H ||
        upstream.width() != W)
        throw DimensionError("ConvNet::backward_input: upstream shape mismatch");

    auto P = [&](const std::string& name) {
        const auto& s = tensor(name);
        return MapC(params_.data() + s.offset, s.rows, s.cols);
    };
    auto conv_back_in = [&](const Grid& dout, const std::string& w) {
        const auto& wspec = tensor(w);
        const Eigen::Index cin = wspec.cols / 9;
        MapC dout_m(dout.array().data(), dout.channels(), HW);
        MatRM dcol(cin * 9, HW);
        dcol.noalias() = P(w).transpose() * dout_m;
        return col2im3x3(dcol, cin, H, W);
    };

    Grid dz = conv_back_in(upstream, "head_w");
    mul_silu_deriv_inplace(dz, tape.z.back());
    for (int ib = arch_.num_blocks - 1; ib >= 0; --ib) {
        const std::string pref = "block" + std::to_string(ib) + "_";
        Grid ds = conv_back_in(dz, pref + "b_w");
        mul_silu_deriv_inplace(ds, tape.r[ib]);
        Grid dp = conv_back_in(ds, pref + "a_w");
        mul_silu_deriv_inplace(dp, tape.z[ib]);
        dz.array() += dp.array();
    }
    return conv_back_in(dz, "stem_w");
}

}  // namespace refl
