#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "refldiff/grid.hpp"

namespace refl {

// One overlapped tile of a full-resolution map: a core region from the
// non-overlapped p x p split plus p_pad of padding per side, clamped to the
// map. The occupancy mask M^ij is 1 exactly on the padded bounds.
struct PatchWindow {
    int gi = 0, gj = 0;                        // grid index
    Eigen::Index core_r0 = 0, core_c0 = 0;     // core origin
    Eigen::Index core_h = 0, core_w = 0;       // core extent (clamped at map edge)
    Eigen::Index r0 = 0, c0 = 0;               // padded origin
    Eigen::Index h = 0, w = 0;                 // padded extent

    bool contains(Eigen::Index r, Eigen::Index c) const {
        return r >= r0 && r < r0 + h && c >= c0 && c < c0 + w;
    }
};

inline std::vector<PatchWindow> split_overlapped(Eigen::Index H, Eigen::Index W, Eigen::Index p,
                                                 Eigen::Index p_pad) {
    if (H < 1 || W < 1) throw DimensionError("split_overlapped: empty map");
    if (p < 1 || p > std::min(H, W))
        throw DimensionError("split_overlapped: p must satisfy 1 <= p <= min(H,W)");
    if (p_pad < 0) throw DimensionError("split_overlapped: p_pad must be >= 0");
    const Eigen::Index nrows = (H + p - 1) / p;
    const Eigen::Index ncols = (W + p - 1) / p;
    std::vector<PatchWindow> windows;
    windows.reserve(static_cast<std::size_t>(nrows * ncols));
    for (Eigen::Index i = 0; i < nrows; ++i) {
        for (Eigen::Index j = 0; j < ncols; ++j) {
            PatchWindow win;
            win.gi = static_cast<int>(i);
            win.gj = static_cast<int>(j);
            win.core_r0 = i * p;
            win.core_c0 = j * p;
            win.core_h = std::min(p, H - win.core_r0);
            win.core_w = std::min(p, W - win.core_c0);
            win.r0 = std::max<Eigen::Index>(0, win.core_r0 - p_pad);
            win.c0 = std::max<Eigen::Index>(0, win.core_c0 - p_pad);
            win.h = std::min(H, win.core_r0 + win.core_h + p_pad) - win.r0;
            win.w = std::min(W, win.core_c0 + win.core_w + p_pad) - win.c0;
            windows.push_back(win);
        }
    }
    return windows;
}

template <typename Scalar>
ChannelGrid<Scalar> extract(const ChannelGrid<Scalar>& map, const PatchWindow& win) {
    if (win.r0 < 0 || win.c0 < 0 || win.h < 1 || win.w < 1 || win.r0 + win.h > map.height() ||
        win.c0 + win.w > map.width())
        throw DimensionError("extract: window out of map bounds");
    return slice(map, win.r0, win.c0, win.h, win.w);
}

// Weighted average with the binary occupancy masks: per texel,
// sum of covering patch values / number of covering patches.
template <typename Scalar>
ChannelGrid<Scalar> blend(const std::vector<ChannelGrid<Scalar>>& patches,
                          const std::vector<PatchWindow>& windows, Eigen::Index H,
                          Eigen::Index W) {
    if (patches.size() != windows.size())
        throw DimensionError("blend: patch/window count mismatch");
    if (patches.empty()) throw DimensionError("blend: nothing to blend");
    const Eigen::Index C = patches.front().channels();
    ChannelGrid<Scalar> acc(C, H, W);
    ChannelGrid<Scalar> count(1, H, W);
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const auto& win = windows[k];
        const auto& patch = patches[k];
        if (patch.channels() != C || patch.height() != win.h || patch.width() != win.w)
            throw DimensionError("blend: patch " + std::to_string(k) +
                                 " does not match its window");
        for (Eigen::Index ch = 0; ch < C; ++ch)
            acc.plane(ch).block(win.r0, win.c0, win.h, win.w) += patch.plane(ch);
        count.plane(0).block(win.r0, win.c0, win.h, win.w) += Scalar(1);
    }
    if ((count.array() < Scalar(1)).any())
        throw CoverageError("blend: some texels are covered by no window");
    ChannelGrid<Scalar> out(C, H, W);
    for (Eigen::Index ch = 0; ch < C; ++ch)
        out.array().row(ch) = acc.array().row(ch) / count.array().row(0);
    return out;
}

// Structured-text dump of a window layout, for debugging and test fixtures.
std::string dump_window_layout(const std::vector<PatchWindow>& windows, Eigen::Index H,
                               Eigen::Index W);

}  // namespace refl
