#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lafs/geometry.hpp"
#include "lafs/maps.hpp"

namespace lafs {

struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// LMAP: "LMAP" magic, then little-endian u32 version=1, H, W, C (20-byte
// header), then H*W*C little-endian float32, row-major channel-last.
namespace detail {

constexpr char kLmapMagic[4] = {'L', 'M', 'A', 'P'};
constexpr std::uint32_t kLmapVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "LMAP I/O assumes a little-endian host");

inline void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

} // namespace detail

inline void write_map(const DenseMap& map, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw format_error("write_map: cannot open " + path.string());
    os.write(detail::kLmapMagic, 4);
    detail::put_u32(os, detail::kLmapVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(map.height));
    detail::put_u32(os, static_cast<std::uint32_t>(map.width));
    detail::put_u32(os, static_cast<std::uint32_t>(map.channels));
    os.write(reinterpret_cast<const char*>(map.data.data()),
             static_cast<std::streamsize>(map.data.size() * sizeof(float)));
    if (!os) throw format_error("write_map: write failed on " + path.string());
}

inline DenseMap read_map(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw format_error("read_map: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, detail::kLmapMagic, 4) != 0)
        throw format_error("read_map: bad magic in " + path.string());
    const std::uint32_t version = detail::get_u32(is);
    if (version != detail::kLmapVersion)
        throw format_error("read_map: unsupported version in " + path.string());
    const std::uint32_t h = detail::get_u32(is);
    const std::uint32_t w = detail::get_u32(is);
    const std::uint32_t c = detail::get_u32(is);
    if (!is || h == 0 || w == 0 || c == 0)
        throw format_error("read_map: bad header in " + path.string());
    DenseMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    is.read(reinterpret_cast<char*>(map.data.data()),
            static_cast<std::streamsize>(map.data.size() * sizeof(float)));
    if (is.gcount() != static_cast<std::streamsize>(map.data.size() * sizeof(float)))
        throw format_error("read_map: truncated payload in " + path.string());
    for (float v : map.data)
        if (!std::isfinite(v))
            throw format_error("read_map: non-finite value in " + path.string());
    return map;
}

// Box list: JSON array of {"cx","cy","w","h","theta"}, pixels/radians.
inline nlohmann::json boxes_to_json(const std::vector<RotatedBox>& boxes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RotatedBox& b : boxes) {
        arr.push_back({{"cx", b.center.x},
                       {"cy", b.center.y},
                       {"w", b.width},
                       {"h", b.height},
                       {"theta", b.theta}});
    }
    return arr;
}

inline std::vector<RotatedBox> boxes_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw format_error("boxes: expected a JSON array");
    std::vector<RotatedBox> boxes;
    boxes.reserve(arr.size());
    for (const auto& o : arr) {
        boxes.emplace_back(Point{o.at("cx").get<float>(), o.at("cy").get<float>()},
                           o.at("w").get<float>(), o.at("h").get<float>(),
                           o.at("theta").get<float>());
    }
    return boxes;
}

inline void write_boxes(const std::vector<RotatedBox>& boxes,
                        const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw format_error("write_boxes: cannot open " + path.string());
    os << boxes_to_json(boxes).dump(2) << "\n";
}

inline std::vector<RotatedBox> read_boxes(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw format_error("read_boxes: cannot open " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("read_boxes: " + std::string(e.what()));
    }
    return boxes_from_json(j);
}

} // namespace lafs
