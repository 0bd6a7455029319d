#pragma once

#include <cmath>

#include "refldiff/grid.hpp"

namespace refl {

// Positional-encoded UV condition: raw (u, v) followed by, per axis, the
// sin/cos pairs sin(2^f pi a), cos(2^f pi a) for f = 0..bands-1. Channel
// layout: [u, v, sin/cos bands of u..., sin/cos bands of v...].
template <typename Scalar>
struct Condition {
    ChannelGrid<Scalar> encoded;
    int bands = 0;
};

inline Eigen::Index encoded_channel_count(int bands) { return 2 + 4 * static_cast<Eigen::Index>(bands); }

template <typename Scalar>
Condition<Scalar> positional_encode(const ChannelGrid<Scalar>& uv, int bands) {
    if (uv.channels() != 2) throw DimensionError("positional_encode: uv must have 2 channels");
    if (bands < 0) throw DomainError("positional_encode: bands must be >= 0");
    if ((uv.array() < Scalar(0)).any() || (uv.array() > Scalar(1)).any())
        throw DomainError("positional_encode: uv values outside [0,1]");

    Condition<Scalar> cond;
    cond.bands = bands;
    cond.encoded = ChannelGrid<Scalar>(encoded_channel_count(bands), uv.height(), uv.width());
    auto& out = cond.encoded.array();
    out.row(0) = uv.array().row(0);
    out.row(1) = uv.array().row(1);
    const Scalar pi = static_cast<Scalar>(M_PI);
    for (int axis = 0; axis < 2; ++axis) {
        for (int f = 0; f < bands; ++f) {
            const Scalar freq = std::ldexp(Scalar(1), f) * pi;
            const Eigen::Index base = 2 + axis * 2 * bands + 2 * f;
            out.row(base) = (freq * uv.array().row(axis)).sin();
            out.row(base + 1) = (freq * uv.array().row(axis)).cos();
        }
    }
    return cond;
}

}  // namespace refl
