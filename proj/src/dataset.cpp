#include "refldiff/dataset.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "refldiff/container.hpp"
#include "refldiff/random.hpp"

namespace refl {

PatchDataset crop_patch_dataset(const std::vector<std::pair<ReflectanceMap, Grid>>& maps, int n,
                                Eigen::Index p_train, std::uint64_t seed) {
    if (maps.empty()) throw DimensionError("crop_patch_dataset: no source maps");
    if (n < 1) throw DimensionError("crop_patch_dataset: n must be >= 1");
    for (const auto& [refl, uv] : maps) {
        if (p_train < 1 || p_train > refl.height() || p_train > refl.width())
            throw DimensionError("crop_patch_dataset: p_train exceeds a source map size");
        if (uv.channels() != 2 || uv.height() != refl.height() || uv.width() != refl.width())
            throw DimensionError("crop_patch_dataset: uv map does not match its reflectance map");
    }
    PatchDataset ds;
    ds.patch_size = p_train;
    ds.records.reserve(static_cast<std::size_t>(n));
    RandomStream rs(derive_seed(seed, 0xC20Full));
    for (int k = 0; k < n; ++k) {
        const int src = static_cast<int>(rs.uniform_int(0, static_cast<std::int64_t>(maps.size()) - 1));
        const auto& [refl, uv] = maps[static_cast<std::size_t>(src)];
        const Eigen::Index r0 = rs.uniform_int(0, refl.height() - p_train);
        const Eigen::Index c0 = rs.uniform_int(0, refl.width() - p_train);
        PatchRecord rec;
        rec.source_id = src;
        rec.origin_r = r0;
        rec.origin_c = c0;
        Grid both(9, p_train, p_train);
        both.array().topRows(7) = slice(refl.data, r0, c0, p_train, p_train).array();
        both.array().bottomRows(2) = slice(uv, r0, c0, p_train, p_train).array();
        rec.data = both.cast<float>();
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

namespace {
const std::vector<std::string>& patch_channel_names() {
    static const std::vector<std::string> names = {"diffuse_r", "diffuse_g", "diffuse_b",
                                                   "specular",  "normal_x",  "normal_y",
                                                   "normal_z",  "u",         "v"};
    return names;
}
}  // namespace

void save_patch_dataset(const PatchDataset& ds, const std::string& container_path,
                        const std::string& index_path) {
    if (ds.records.empty()) throw IoError("save_patch_dataset: empty dataset");
    const Eigen::Index p = ds.patch_size;
    Grid stacked(9, p * static_cast<Eigen::Index>(ds.records.size()), p);
    nlohmann::json index;
    index["patch_size"] = p;
    index["count"] = ds.records.size();
    index["records"] = nlohmann::json::array();
    for (std::size_t k = 0; k < ds.records.size(); ++k) {
        const auto& rec = ds.records[k];
        if (rec.data.channels() != 9 || rec.data.height() != p || rec.data.width() != p)
            throw DimensionError("save_patch_dataset: inconsistent record shape");
        paste(stacked, rec.data.cast<double>(), static_cast<Eigen::Index>(k) * p, 0);
        index["records"].push_back({{"row", k * static_cast<std::size_t>(p)},
                                    {"source", rec.source_id},
                                    {"origin", {rec.origin_r, rec.origin_c}}});
    }
    write_container(container_path, stacked, patch_channel_names());
    std::ofstream out(index_path);
    if (!out) throw IoError("save_patch_dataset: cannot open " + index_path);
    out << index.dump(2) << "\n";
}

PatchDataset load_patch_dataset(const std::string& container_path, const std::string& index_path) {
    const MapFile mf = read_container(container_path);
    std::ifstream in(index_path);
    if (!in) throw IoError("load_patch_dataset: cannot open " + index_path);
    nlohmann::json index;
    try {
        in >> index;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_patch_dataset: invalid index: " + std::string(e.what()));
    }
    PatchDataset ds;
    ds.patch_size = index.at("patch_size").get<Eigen::Index>();
    const auto& records = index.at("records");
    if (mf.grid.channels() != 9 ||
        mf.grid.height() != ds.patch_size * static_cast<Eigen::Index>(records.size()))
        throw IoError("load_patch_dataset: container does not match the index");
    ds.records.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& rj = records[k];
        PatchRecord rec;
        rec.source_id = rj.at("source").get<int>();
        rec.origin_r = rj.at("origin")[0].get<Eigen::Index>();
        rec.origin_c = rj.at("origin")[1].get<Eigen::Index>();
        rec.data = slice(mf.grid, static_cast<Eigen::Index>(k) * ds.patch_size, 0, ds.patch_size,
                         ds.patch_size)
                       .cast<float>();
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace refl
