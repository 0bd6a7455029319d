#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "refldiff/reflectance.hpp"

namespace refl {

// One 9-channel training patch: 7 reflectance channels in physical space
// followed by the 2 UV channels, plus where it was cropped from.
struct PatchRecord {
    GridF data;
    int source_id = 0;
    Eigen::Index origin_r = 0, origin_c = 0;
};

struct PatchDataset {
    std::vector<PatchRecord> records;
    Eigen::Index patch_size = 0;

    std::size_t size() const { return records.size(); }
};

// n uniformly random axis-aligned crops of the concatenated 9-channel
// (reflectance + UV) maps, cycling over sources uniformly at random.
PatchDataset crop_patch_dataset(const std::vector<std::pair<ReflectanceMap, Grid>>& maps, int n,
                                Eigen::Index p_train, std::uint64_t seed);

// Persistence: all patches stacked vertically into one map container
// (height = n * p) plus a JSON provenance index.
void save_patch_dataset(const PatchDataset& ds, const std::string& container_path,
                        const std::string& index_path);
PatchDataset load_patch_dataset(const std::string& container_path, const std::string& index_path);

}  // namespace refl
