#pragma once

#include <Eigen/Core>

#include <cmath>

#include "refldiff/lighting.hpp"

namespace refl {

// Co-located flashlight shading: light direction equals view direction, so
// the half vector is the view vector and every microfacet term reduces to a
// function of mu = n.v. The BRDF is Lambert diffuse c/pi plus one
// GGX/Trowbridge-Reitz lobe with Smith shadowing and Schlick Fresnel
// (h.v = 1 under co-location, leaving the constant F0), scaled by the
// specular albedo s. GGX alpha is rho^2.
namespace brdf {

constexpr double kFresnelF0 = 0.04;

// F0 * D(mu) * G1(mu)^2 / (4 mu^2) for mu > 0.
inline double ggx_colocated_lobe(double mu, double rho) {
    const double a = rho * rho;
    const double a2 = a * a;
    const double dterm = 1.0 - mu * mu * (1.0 - a2);          // D denominator root
    const double D = a2 / (M_PI * dterm * dterm);
    const double q = std::sqrt(a2 + (1.0 - a2) * mu * mu);    // Smith G1 radical
    const double g_over = mu + q;                              // G1 = 2 mu / (mu + q)
    return kFresnelF0 * D / (g_over * g_over);
}

// d/d(mu) of ggx_colocated_lobe.
inline double ggx_colocated_lobe_dmu(double mu, double rho) {
    const double a = rho * rho;
    const double a2 = a * a;
    const double dterm = 1.0 - mu * mu * (1.0 - a2);
    const double q = std::sqrt(a2 + (1.0 - a2) * mu * mu);
    const double lobe = ggx_colocated_lobe(mu, rho);
    const double dq = mu * (1.0 - a2) / q;
    return lobe * (4.0 * mu * (1.0 - a2) / dterm - 2.0 * (1.0 + dq) / (mu + q));
}

}  // namespace brdf

struct ShadeResult {
    Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
};

// Gradients of the shaded color with respect to the reflectance inputs,
// contracted against an upstream RGB weight.
struct ShadeVjp {
    Eigen::Vector3d d_diffuse = Eigen::Vector3d::Zero();
    double d_specular = 0.0;
    Eigen::Vector3d d_normal = Eigen::Vector3d::Zero();  // w.r.t. the unit normal
};

namespace detail {

struct ShadeCommon {
    Eigen::Vector3d v;      // view = light direction
    double inv_r2 = 0.0;    // 1 / ||x - o||^2
    double mu = 0.0;        // n . v
    Eigen::Matrix<double, 9, 1> Y;
    Eigen::Vector3d sh_sum; // per-channel SH activation before SoftPlus
};

inline ShadeCommon shade_common(const Eigen::Vector3d& n, const Eigen::Vector3d& x,
                                const Eigen::Vector3d& o, const Lighting& lighting) {
    const Eigen::Vector3d d = o - x;
    const double r2 = d.squaredNorm();
    if (!(r2 > 0.0)) throw GeometryError("shade: camera coincides with the shading point");
    const double nn = n.squaredNorm();
    if (!(nn > 0.0)) throw GeometryError("shade: zero-length normal");
    ShadeCommon c;
    c.inv_r2 = 1.0 / r2;
    c.v = d / std::sqrt(r2);
    c.mu = n.dot(c.v);
    c.Y = sh9(n);
    c.sh_sum = lighting.K.transpose() * c.Y;
    return c;
}

}  // namespace detail

// Shades one point under the co-located flashlight + SH ambient model.
// n must be unit length; callers sampling normals from a map renormalize
// first (see render.hpp).
inline ShadeResult shade(const Eigen::Vector3d& diffuse, double specular, const Eigen::Vector3d& n,
                         const Eigen::Vector3d& x, const Eigen::Vector3d& o,
                         const Lighting& lighting) {
    const auto c = detail::shade_common(n, x, o, lighting);
    ShadeResult out;
    for (int i = 0; i < 3; ++i) out.rgb[i] = diffuse[i] * softplus(c.sh_sum[i]);
    if (c.mu > 0.0) {
        const double lobe = brdf::ggx_colocated_lobe(c.mu, lighting.rho);
        const double flash = lighting.L * c.inv_r2 * c.mu;
        for (int i = 0; i < 3; ++i)
            out.rgb[i] += flash * (diffuse[i] / M_PI + specular * lobe);
    }
    return out;
}

// upstream . d(shade)/d(diffuse, specular, unit normal).
inline ShadeVjp shade_vjp(const Eigen::Vector3d& diffuse, double specular, const Eigen::Vector3d& n,
                          const Eigen::Vector3d& x, const Eigen::Vector3d& o,
                          const Lighting& lighting, const Eigen::Vector3d& upstream) {
    const auto c = detail::shade_common(n, x, o, lighting);
    ShadeVjp vjp;
    // Ambient: c_i * SoftPlus(sh_sum_i).
    Eigen::Vector3d dn_amb = Eigen::Vector3d::Zero();
    const Eigen::Matrix<double, 9, 3> Yg = sh9_grad(n);
    for (int i = 0; i < 3; ++i) {
        const double sp = softplus(c.sh_sum[i]);
        vjp.d_diffuse[i] += upstream[i] * sp;
        const double w = upstream[i] * diffuse[i] * logistic(c.sh_sum[i]);
        dn_amb += w * (Yg.transpose() * lighting.K.col(i));
    }
    vjp.d_normal += dn_amb;
    if (c.mu > 0.0) {
        const double lobe = brdf::ggx_colocated_lobe(c.mu, lighting.rho);
        const double dlobe = brdf::ggx_colocated_lobe_dmu(c.mu, lighting.rho);
        const double scale = lighting.L * c.inv_r2;
        double upsum = 0.0, up_dot_diffuse = 0.0;
        for (int i = 0; i < 3; ++i) {
            vjp.d_diffuse[i] += upstream[i] * scale * c.mu / M_PI;
            upsum += upstream[i];
            up_dot_diffuse += upstream[i] * diffuse[i];
        }
        vjp.d_specular = upsum * scale * c.mu * lobe;
        // d(flash_i)/d(mu) = scale * (c_i/pi + s*lobe + mu * s * dlobe)
        const double dmu = scale * (up_dot_diffuse / M_PI + upsum * specular * (lobe + c.mu * dlobe));
        vjp.d_normal += dmu * c.v;
    }
    return vjp;
}

}  // namespace refl
