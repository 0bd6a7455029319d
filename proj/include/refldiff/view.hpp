#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "refldiff/grid.hpp"
#include "refldiff/lighting.hpp"

namespace refl {

// One captured view: linear-radiance image plus per-pixel geometry
// attributes (shading position, pixel-to-UV correspondence) and the camera
// position. Covered pixels have valid uv and finite positions; the
// co-located light direction equals the view direction.
struct ViewObservation {
    Eigen::Index height = 0, width = 0;
    Grid image;     // 3 channels
    Grid position;  // 3 channels, meters
    Grid uv;        // 2 channels in [0,1] on covered pixels
    std::vector<std::uint8_t> mask;  // coverage per pixel, row-major
    Eigen::Vector3d camera = Eigen::Vector3d::Zero();

    Eigen::Index pixels() const { return height * width; }
    bool covered(Eigen::Index idx) const { return mask[static_cast<std::size_t>(idx)] != 0; }

    void validate() const {
        if (image.channels() != 3 || position.channels() != 3 || uv.channels() != 2)
            throw DimensionError("ViewObservation: bad channel counts");
        if (image.height() != height || image.width() != width || !image.same_shape(image) ||
            position.height() != height || position.width() != width || uv.height() != height ||
            uv.width() != width || static_cast<Eigen::Index>(mask.size()) != pixels())
            throw DimensionError("ViewObservation: inconsistent dimensions");
    }
};

}  // namespace refl
