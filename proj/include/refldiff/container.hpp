#pragma once

#include <string>
#include <vector>

#include "refldiff/grid.hpp"

namespace refl {

// Map container format: magic "MCH1", a little-endian uint32 header length,
// a JSON header {height, width, channels, channel_names, dtype:"f32le"},
// then the payload as row-major, channel-interleaved 32-bit floats.
struct MapFile {
    Grid grid;
    std::vector<std::string> channel_names;
};

void write_container(const std::string& path, const Grid& grid,
                     const std::vector<std::string>& channel_names);
MapFile read_container(const std::string& path);

inline const std::vector<std::string>& reflectance_channel_names() {
    static const std::vector<std::string> names = {"diffuse_r", "diffuse_g", "diffuse_b",
                                                   "specular",  "normal_x",  "normal_y",
                                                   "normal_z"};
    return names;
}

}  // namespace refl
