#include "refldiff/render.hpp"

#include <cmath>
#include <string>

#include "refldiff/shading.hpp"

namespace refl {

namespace {

double clampd(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

struct TapWeights {
    Eigen::Index idx[4];
    double w[4];
};

inline TapWeights taps(Eigen::Index H, Eigen::Index W, const BilinearFootprint& f) {
    const Eigen::Index r1 = std::min(f.r0 + 1, H - 1);
    const Eigen::Index c1 = std::min(f.c0 + 1, W - 1);
    TapWeights t;
    t.idx[0] = f.r0 * W + f.c0;
    t.idx[1] = f.r0 * W + c1;
    t.idx[2] = r1 * W + f.c0;
    t.idx[3] = r1 * W + c1;
    t.w[0] = (1.0 - f.fr) * (1.0 - f.fc);
    t.w[1] = (1.0 - f.fr) * f.fc;
    t.w[2] = f.fr * (1.0 - f.fc);
    t.w[3] = f.fr * f.fc;
    return t;
}

// Diffuse/specular/normal sample at one footprint.
struct Sample7 {
    Eigen::Vector3d diffuse;
    double specular;
    Eigen::Vector3d normal_raw;
};

inline Sample7 gather7(const Grid& g, const TapWeights& t) {
    const auto& a = g.array();
    Sample7 s;
    for (int c = 0; c < 3; ++c)
        s.diffuse[c] = t.w[0] * a(c, t.idx[0]) + t.w[1] * a(c, t.idx[1]) +
                       t.w[2] * a(c, t.idx[2]) + t.w[3] * a(c, t.idx[3]);
    s.specular = t.w[0] * a(3, t.idx[0]) + t.w[1] * a(3, t.idx[1]) + t.w[2] * a(3, t.idx[2]) +
                 t.w[3] * a(3, t.idx[3]);
    for (int c = 0; c < 3; ++c) {
        const Eigen::Index row = ch::normal + c;
        s.normal_raw[c] = t.w[0] * a(row, t.idx[0]) + t.w[1] * a(row, t.idx[1]) +
                          t.w[2] * a(row, t.idx[2]) + t.w[3] * a(row, t.idx[3]);
    }
    return s;
}

inline void scatter7(Grid& grad, const TapWeights& t, const Eigen::Vector3d& d_diffuse,
                     double d_specular, const Eigen::Vector3d& d_normal_raw) {
    auto& a = grad.array();
    for (int k = 0; k < 4; ++k) {
        if (t.w[k] == 0.0) continue;
        for (int c = 0; c < 3; ++c) a(c, t.idx[k]) += t.w[k] * d_diffuse[c];
        a(3, t.idx[k]) += t.w[k] * d_specular;
        for (int c = 0; c < 3; ++c) a(ch::normal + c, t.idx[k]) += t.w[k] * d_normal_raw[c];
    }
}

}  // namespace

BilinearFootprint bilinear_footprint(Eigen::Index H, Eigen::Index W, double u, double v) {
    BilinearFootprint f;
    const double tx = clampd(u * static_cast<double>(W) - 0.5, 0.0, static_cast<double>(W - 1));
    const double ty = clampd(v * static_cast<double>(H) - 0.5, 0.0, static_cast<double>(H - 1));
    f.c0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(tx)),
                                  std::max<Eigen::Index>(W - 2, 0));
    f.r0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(ty)),
                                  std::max<Eigen::Index>(H - 2, 0));
    f.fc = W > 1 ? tx - static_cast<double>(f.c0) : 0.0;
    f.fr = H > 1 ? ty - static_cast<double>(f.r0) : 0.0;
    return f;
}

Eigen::VectorXd sample_bilinear(const Grid& g, double u, double v) {
    const auto f = bilinear_footprint(g.height(), g.width(), u, v);
    const auto t = taps(g.height(), g.width(), f);
    Eigen::VectorXd out(g.channels());
    const auto& a = g.array();
    for (Eigen::Index c = 0; c < g.channels(); ++c)
        out[c] = t.w[0] * a(c, t.idx[0]) + t.w[1] * a(c, t.idx[1]) + t.w[2] * a(c, t.idx[2]) +
                 t.w[3] * a(c, t.idx[3]);
    return out;
}

ViewObservation transform_correspondence(const ViewObservation& view, const PatchWindow& window,
                                         Eigen::Index full_h, Eigen::Index full_w) {
    if (window.h < 1 || window.w < 1) throw DimensionError("transform_correspondence: empty window");
    if (window.r0 < 0 || window.c0 < 0 || window.r0 + window.h > full_h ||
        window.c0 + window.w > full_w)
        throw DimensionError("transform_correspondence: window outside the map");
    ViewObservation out = view;
    const double H = static_cast<double>(full_h);
    const double W = static_cast<double>(full_w);
    for (Eigen::Index i = 0; i < view.pixels(); ++i) {
        if (!view.covered(i)) {
            out.uv.array()(0, i) = 0.0;
            out.uv.array()(1, i) = 0.0;
            continue;
        }
        const double u = view.uv.array()(0, i);
        const double v = view.uv.array()(1, i);
        const auto f = bilinear_footprint(full_h, full_w, u, v);
        const bool supported = f.c0 >= window.c0 && f.c0 + 1 <= window.c0 + window.w - 1 &&
                               f.r0 >= window.r0 && f.r0 + 1 <= window.r0 + window.h - 1;
        if (!supported) {
            out.mask[static_cast<std::size_t>(i)] = 0;
            out.uv.array()(0, i) = 0.0;
            out.uv.array()(1, i) = 0.0;
            continue;
        }
        out.uv.array()(0, i) = (u * W - static_cast<double>(window.c0)) / static_cast<double>(window.w);
        out.uv.array()(1, i) = (v * H - static_cast<double>(window.r0)) / static_cast<double>(window.h);
    }
    return out;
}

CompactView build_compact_view(const ViewObservation& view) {
    CompactView cv;
    cv.camera = view.camera;
    cv.pixels.reserve(64);
    for (Eigen::Index i = 0; i < view.pixels(); ++i) {
        if (!view.covered(i)) continue;
        CoveredPixel p;
        p.u = view.uv.array()(0, i);
        p.v = view.uv.array()(1, i);
        if (p.u < 0.0 || p.u > 1.0 || p.v < 0.0 || p.v > 1.0)
            throw CorrespondenceError("covered pixel " + std::to_string(i) +
                                      " has uv outside [0,1]");
        p.target = Eigen::Vector3d(view.image.array()(0, i), view.image.array()(1, i),
                                   view.image.array()(2, i));
        p.pos = Eigen::Vector3d(view.position.array()(0, i), view.position.array()(1, i),
                                view.position.array()(2, i));
        cv.pixels.push_back(p);
    }
    return cv;
}

Grid render_patch(const Grid& refl_physical, const ViewObservation& view,
                  const Lighting& lighting) {
    if (refl_physical.channels() != ch::count)
        throw DimensionError("render: reflectance must have 7 channels");
    Grid img(3, view.height, view.width);
    for (Eigen::Index i = 0; i < view.pixels(); ++i) {
        if (!view.covered(i)) continue;
        const double u = view.uv.array()(0, i);
        const double v = view.uv.array()(1, i);
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0)
            throw CorrespondenceError("covered pixel " + std::to_string(i) +
                                      " has uv outside [0,1]");
        const auto f = bilinear_footprint(refl_physical.height(), refl_physical.width(), u, v);
        const auto tw = taps(refl_physical.height(), refl_physical.width(), f);
        const Sample7 s = gather7(refl_physical, tw);
        const double len = s.normal_raw.norm();
        if (!(len > 1e-12))
            throw NumericalError("degenerate sampled normal at pixel " + std::to_string(i));
        const Eigen::Vector3d pos(view.position.array()(0, i), view.position.array()(1, i),
                                  view.position.array()(2, i));
        const auto shaded =
            shade(s.diffuse, s.specular, s.normal_raw / len, pos, view.camera, lighting);
        img.array()(0, i) = shaded.rgb[0];
        img.array()(1, i) = shaded.rgb[1];
        img.array()(2, i) = shaded.rgb[2];
    }
    return img;
}

LossGrad photometric_loss_grad(const Grid& refl_physical, const std::vector<CompactView>& views,
                               const Lighting& lighting, bool with_grad, long normalization) {
    LossGrad out;
    long total = 0;
    for (const auto& v : views) total += static_cast<long>(v.pixels.size());
    out.covered = total;
    if (total == 0) {
        if (with_grad) {
            out.grad = refl_physical;
            out.grad.array().setZero();
        }
        return out;
    }
    const double norm = static_cast<double>(normalization > 0 ? normalization : total);
    if (with_grad) {
        out.grad = refl_physical;
        out.grad.array().setZero();
    }
    const Eigen::Index H = refl_physical.height();
    const Eigen::Index W = refl_physical.width();
    double loss_sum = 0.0;
    std::size_t pixel_counter = 0;
    for (const auto& view : views) {
        for (const auto& px : view.pixels) {
            const auto f = bilinear_footprint(H, W, px.u, px.v);
            const auto tw = taps(H, W, f);
            const Sample7 s = gather7(refl_physical, tw);
            const double len = s.normal_raw.norm();
            if (!(len > 1e-12))
                throw NumericalError("degenerate sampled normal at covered pixel " +
                                     std::to_string(pixel_counter));
            const Eigen::Vector3d n = s.normal_raw / len;
            const auto shaded = shade(s.diffuse, s.specular, n, px.pos, view.camera, lighting);
            const Eigen::Vector3d residual = shaded.rgb - px.target;
            const double contrib = residual.squaredNorm();
            if (!std::isfinite(contrib))
                throw NumericalError("non-finite residual at covered pixel " +
                                     std::to_string(pixel_counter));
            loss_sum += contrib;
            if (with_grad) {
                const Eigen::Vector3d upstream = (2.0 / norm) * residual;
                const ShadeVjp vjp =
                    shade_vjp(s.diffuse, s.specular, n, px.pos, view.camera, lighting, upstream);
                // Chain through the renormalization n = raw/|raw|.
                const Eigen::Vector3d d_raw =
                    (vjp.d_normal - n * n.dot(vjp.d_normal)) / len;
                scatter7(out.grad, tw, vjp.d_diffuse, vjp.d_specular, d_raw);
            }
            ++pixel_counter;
        }
    }
    out.loss = loss_sum / norm;
    return out;
}

double photometric_loss(const Grid& refl_physical, const std::vector<ViewObservation>& views,
                        const Lighting& lighting) {
    if (views.empty()) throw DimensionError("photometric_loss: needs at least one view");
    std::vector<CompactView> compact;
    compact.reserve(views.size());
    for (const auto& v : views) compact.push_back(build_compact_view(v));
    long total = 0;
    for (const auto& v : compact) total += static_cast<long>(v.pixels.size());
    if (total == 0) throw CoverageError("photometric_loss: no covered pixels in any view");
    return photometric_loss_grad(refl_physical, compact, lighting, false).loss;
}

Grid photometric_grad(const Grid& refl_patch, const PatchWindow& window,
                      const std::vector<ViewObservation>& views, const Lighting& lighting) {
    if (refl_patch.height() != window.h || refl_patch.width() != window.w)
        throw DimensionError("photometric_grad: patch does not match the window extent");
    std::vector<CompactView> compact;
    compact.reserve(views.size());
    for (const auto& v : views) compact.push_back(build_compact_view(v));
    auto lg = photometric_loss_grad(refl_patch, compact, lighting, true);
    if (lg.grad.empty()) {
        lg.grad = refl_patch;
        lg.grad.array().setZero();
    }
    return lg.grad;
}

}  // namespace refl
