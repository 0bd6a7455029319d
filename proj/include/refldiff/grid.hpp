#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "refldiff/errors.hpp"

namespace refl {

// Dense multi-channel field over a regular grid. Storage is one Eigen array
// with one row per channel and row-major spatial flattening (r * width + c),
// so whole-grid arithmetic is a single Eigen expression and each channel row
// is a contiguous H*W plane.
template <typename Scalar>
class ChannelGrid {
public:
    using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using PlaneMap = Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstPlaneMap =
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    ChannelGrid() = default;

    ChannelGrid(Eigen::Index channels, Eigen::Index height, Eigen::Index width)
        : height_(height), width_(width) {
        if (channels < 1 || height < 1 || width < 1)
            throw DimensionError("ChannelGrid: dimensions must be positive");
        data_ = Storage::Zero(channels, height * width);
    }

    static ChannelGrid constant(Eigen::Index channels, Eigen::Index height, Eigen::Index width,
                                Scalar value) {
        ChannelGrid g(channels, height, width);
        g.data_.setConstant(value);
        return g;
    }

    Eigen::Index channels() const { return data_.rows(); }
    Eigen::Index height() const { return height_; }
    Eigen::Index width() const { return width_; }
    Eigen::Index pixels() const { return height_ * width_; }
    bool empty() const { return data_.size() == 0; }

    Storage& array() { return data_; }
    const Storage& array() const { return data_; }

    Scalar& at(Eigen::Index c, Eigen::Index r, Eigen::Index col) {
        return data_(c, r * width_ + col);
    }
    Scalar at(Eigen::Index c, Eigen::Index r, Eigen::Index col) const {
        return data_(c, r * width_ + col);
    }

    // H x W view of one channel.
    PlaneMap plane(Eigen::Index c) {
        return PlaneMap(data_.row(c).data(), height_, width_);
    }
    ConstPlaneMap plane(Eigen::Index c) const {
        return ConstPlaneMap(data_.row(c).data(), height_, width_);
    }

    bool same_shape(const ChannelGrid& o) const {
        return channels() == o.channels() && height_ == o.height_ && width_ == o.width_;
    }

    template <typename T>
    ChannelGrid<T> cast() const {
        ChannelGrid<T> out(channels(), height_, width_);
        out.array() = data_.template cast<T>();
        return out;
    }

    bool all_finite() const { return data_.isFinite().all(); }

private:
    Storage data_;
    Eigen::Index height_ = 0;
    Eigen::Index width_ = 0;
};

using Grid = ChannelGrid<double>;
using GridF = ChannelGrid<float>;

template <typename Scalar>
void require_same_shape(const ChannelGrid<Scalar>& a, const ChannelGrid<Scalar>& b,
                        const std::string& what) {
    if (!a.same_shape(b))
        throw DimensionError(what + ": shape mismatch (" + std::to_string(a.channels()) + "x" +
                             std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                             " vs " + std::to_string(b.channels()) + "x" +
                             std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
}

// Copy of the axis-aligned subgrid [r0, r0+h) x [c0, c0+w), all channels.
template <typename Scalar>
ChannelGrid<Scalar> slice(const ChannelGrid<Scalar>& g, Eigen::Index r0, Eigen::Index c0,
                          Eigen::Index h, Eigen::Index w) {
    if (r0 < 0 || c0 < 0 || h < 1 || w < 1 || r0 + h > g.height() || c0 + w > g.width())
        throw DimensionError("slice: window out of bounds");
    ChannelGrid<Scalar> out(g.channels(), h, w);
    for (Eigen::Index ch = 0; ch < g.channels(); ++ch)
        out.plane(ch) = g.plane(ch).block(r0, c0, h, w);
    return out;
}

// Writes `patch` into `g` at (r0, c0); shapes must fit.
template <typename Scalar>
void paste(ChannelGrid<Scalar>& g, const ChannelGrid<Scalar>& patch, Eigen::Index r0,
           Eigen::Index c0) {
    if (patch.channels() != g.channels() || r0 < 0 || c0 < 0 ||
        r0 + patch.height() > g.height() || c0 + patch.width() > g.width())
        throw DimensionError("paste: patch does not fit");
    for (Eigen::Index ch = 0; ch < g.channels(); ++ch)
        g.plane(ch).block(r0, c0, patch.height(), patch.width()) = patch.plane(ch);
}

}  // namespace refl
