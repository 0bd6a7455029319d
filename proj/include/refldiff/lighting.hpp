#pragma once

#include <Eigen/Core>

#include <cmath>

#include "refldiff/errors.hpp"

namespace refl {

// Scene lighting: a co-located point flashlight of intensity L plus
// 2nd-order SH ambient coefficients K (one RGB triple per basis function,
// row l*(l+1)+m) evaluated through SoftPlus, and the fixed roughness rho.
struct Lighting {
    double L = 4.0;
    Eigen::Matrix<double, 9, 3> K = Eigen::Matrix<double, 9, 3>::Zero();
    double rho = 0.4;

    void validate() const {
        if (!(L > 0.0)) throw ConfigError("Lighting: L must be > 0");
        if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("Lighting: rho must be in (0,1]");
        if (!K.allFinite()) throw ConfigError("Lighting: K must be finite");
    }
};

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic(double x) {
    return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Real SH basis values Y_lm(n) for l <= 2, n unit-length, in the usual
// (l,m) flattening Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22.
inline Eigen::Matrix<double, 9, 1> sh9(const Eigen::Vector3d& n) {
    const double x = n.x(), y = n.y(), z = n.z();
    Eigen::Matrix<double, 9, 1> Y;
    Y[0] = 0.28209479177387814;
    Y[1] = 0.4886025119029199 * y;
    Y[2] = 0.4886025119029199 * z;
    Y[3] = 0.4886025119029199 * x;
    Y[4] = 1.0925484305920792 * x * y;
    Y[5] = 1.0925484305920792 * y * z;
    Y[6] = 0.31539156525252005 * (3.0 * z * z - 1.0);
    Y[7] = 1.0925484305920792 * x * z;
    Y[8] = 0.5462742152960396 * (x * x - y * y);
    return Y;
}

// d Y_lm / d n as a 9x3 matrix (treating Y as polynomials on R^3).
inline Eigen::Matrix<double, 9, 3> sh9_grad(const Eigen::Vector3d& n) {
    const double x = n.x(), y = n.y(), z = n.z();
    Eigen::Matrix<double, 9, 3> G = Eigen::Matrix<double, 9, 3>::Zero();
    G(1, 1) = 0.4886025119029199;
    G(2, 2) = 0.4886025119029199;
    G(3, 0) = 0.4886025119029199;
    G(4, 0) = 1.0925484305920792 * y;
    G(4, 1) = 1.0925484305920792 * x;
    G(5, 1) = 1.0925484305920792 * z;
    G(5, 2) = 1.0925484305920792 * y;
    G(6, 2) = 0.31539156525252005 * 6.0 * z;
    G(7, 0) = 1.0925484305920792 * z;
    G(7, 2) = 1.0925484305920792 * x;
    G(8, 0) = 0.5462742152960396 * 2.0 * x;
    G(8, 1) = -0.5462742152960396 * 2.0 * y;
    return G;
}

}  // namespace refl
