#include "refldiff/container.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace refl {

namespace {
constexpr char kMagic[4] = {'M', 'C', 'H', '1'};
}

void write_container(const std::string& path, const Grid& grid,
                     const std::vector<std::string>& channel_names) {
    if (grid.empty()) throw IoError("write_container: empty grid");
    if (static_cast<Eigen::Index>(channel_names.size()) != grid.channels())
        throw DimensionError("write_container: channel name count mismatch");
    nlohmann::json header = {
        {"height", grid.height()},
        {"width", grid.width()},
        {"channels", grid.channels()},
        {"channel_names", channel_names},
        {"dtype", "f32le"},
    };
    const std::string htext = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_container: cannot open " + path);
    out.write(kMagic, 4);
    const std::uint32_t hlen = static_cast<std::uint32_t>(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(htext.data(), htext.size());
    const Eigen::Index C = grid.channels(), N = grid.pixels();
    std::vector<float> buf(static_cast<std::size_t>(C * N));
    // channel-interleaved: all channels of texel 0, then texel 1, ...
    for (Eigen::Index p = 0; p < N; ++p)
        for (Eigen::Index c = 0; c < C; ++c)
            buf[static_cast<std::size_t>(p * C + c)] = static_cast<float>(grid.array()(c, p));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw IoError("write_container: write failed for " + path);
}

MapFile read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_container: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("read_container: bad magic in " + path);
    std::uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    if (!in) throw IoError("read_container: truncated header in " + path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("read_container: invalid header in " + path + ": " + e.what());
    }
    if (header.value("dtype", "") != std::string("f32le"))
        throw IoError("read_container: unsupported dtype in " + path);
    const Eigen::Index H = header.at("height").get<Eigen::Index>();
    const Eigen::Index W = header.at("width").get<Eigen::Index>();
    const Eigen::Index C = header.at("channels").get<Eigen::Index>();
    MapFile mf;
    mf.channel_names = header.at("channel_names").get<std::vector<std::string>>();
    if (static_cast<Eigen::Index>(mf.channel_names.size()) != C)
        throw IoError("read_container: channel name count mismatch in " + path);
    mf.grid = Grid(C, H, W);
    std::vector<float> buf(static_cast<std::size_t>(C * H * W));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw IoError("read_container: truncated payload in " + path);
    for (Eigen::Index p = 0; p < H * W; ++p)
        for (Eigen::Index c = 0; c < C; ++c)
            mf.grid.array()(c, p) = static_cast<double>(buf[static_cast<std::size_t>(p * C + c)]);
    return mf;
}

}  // namespace refl
