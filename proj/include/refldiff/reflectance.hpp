#pragma once

#include <Eigen/Core>

#include <cmath>

#include "refldiff/grid.hpp"

namespace refl {

// Channel layout of the 7-channel reflectance field.
namespace ch {
constexpr Eigen::Index diffuse = 0;   // 3 channels
constexpr Eigen::Index specular = 3;  // 1 channel
constexpr Eigen::Index normal = 4;    // 3 channels
constexpr Eigen::Index count = 7;
}  // namespace ch

// Physical-space reflectance: diffuse and specular albedo in [0,1], normals
// unit length. Construction from diffusion space clamps ranges and
// renormalizes normals; intermediate guidance states bypass this type and
// work on raw grids.
struct ReflectanceMap {
    Grid data;  // 7 x H x W

    Eigen::Index height() const { return data.height(); }
    Eigen::Index width() const { return data.width(); }

    static ReflectanceMap from_physical(Grid g) {
        if (g.channels() != ch::count)
            throw DimensionError("ReflectanceMap: expected 7 channels");
        ReflectanceMap m{std::move(g)};
        m.clamp_and_renormalize();
        return m;
    }

    // Diffusion space maps albedo channels [0,1] -> [-1,1]; normals are used
    // directly (already in [-1,1]).
    static ReflectanceMap from_diffusion(const Grid& x) {
        if (x.channels() != ch::count)
            throw DimensionError("ReflectanceMap: expected 7 channels");
        ReflectanceMap m{x};
        for (Eigen::Index c = 0; c < 4; ++c)
            m.data.array().row(c) = (x.array().row(c) + 1.0) * 0.5;
        m.clamp_and_renormalize();
        return m;
    }

    Grid to_diffusion() const {
        Grid x = data;
        for (Eigen::Index c = 0; c < 4; ++c) x.array().row(c) = data.array().row(c) * 2.0 - 1.0;
        return x;
    }

    void clamp_and_renormalize() {
        for (Eigen::Index c = 0; c < 4; ++c)
            data.array().row(c) = data.array().row(c).cwiseMax(0.0).cwiseMin(1.0);
        for (Eigen::Index i = 0; i < data.pixels(); ++i) {
            Eigen::Vector3d n(data.array()(ch::normal, i), data.array()(ch::normal + 1, i),
                              data.array()(ch::normal + 2, i));
            const double len = n.norm();
            if (len < 1e-8)
                n = Eigen::Vector3d::UnitZ();
            else
                n /= len;
            data.array()(ch::normal, i) = n.x();
            data.array()(ch::normal + 1, i) = n.y();
            data.array()(ch::normal + 2, i) = n.z();
        }
    }
};

// Affine map diffusion -> physical albedo without clamping; normals pass
// through raw. Used while guiding (gradients must not vanish outside the
// nominal range).
inline Grid diffusion_to_physical(const Grid& x) {
    Grid g = x;
    for (Eigen::Index c = 0; c < 4; ++c) g.array().row(c) = (x.array().row(c) + 1.0) * 0.5;
    return g;
}

// Pulls a physical-space texel gradient back to diffusion space.
inline Grid physical_grad_to_diffusion(const Grid& g) {
    Grid out = g;
    for (Eigen::Index c = 0; c < 4; ++c) out.array().row(c) = g.array().row(c) * 0.5;
    return out;
}

// Per-texel UV map with the half-texel convention: texel (r,c) stores
// ((c+0.5)/W, (r+0.5)/H).
inline Grid make_uv_map(Eigen::Index H, Eigen::Index W) {
    Grid uv(2, H, W);
    for (Eigen::Index r = 0; r < H; ++r)
        for (Eigen::Index c = 0; c < W; ++c) {
            uv.at(0, r, c) = (static_cast<double>(c) + 0.5) / static_cast<double>(W);
            uv.at(1, r, c) = (static_cast<double>(r) + 0.5) / static_cast<double>(H);
        }
    return uv;
}

}  // namespace refl
