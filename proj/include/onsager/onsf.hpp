#pragma once

// ONSF binary field format (little-endian):
//   "ONSF" | u32 version=1 | u32 d | u32 m | u32 n[d] | f64 L[d] | f64 samples[prod(n) * m]
// Nodes are row-major (axis 0 slowest), components fastest.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "onsager/grid.hpp"

namespace onsager::onsf {

inline constexpr char kMagic[4] = {'O', 'N', 'S', 'F'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

template <class T>
void put(std::vector<unsigned char>& out, T v) {
    v = to_little(v);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.insert(out.end(), b, b + sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    template <class T>
    T get(const char* what) {
        if (pos_ + sizeof(T) > bytes_.size())
            throw FormatError(FormatError::Kind::Truncated, std::string("onsf: truncated while reading ") + what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return to_little(v);
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<unsigned char> encode(const GridField& u) {
    const Grid& g = u.grid();
    std::vector<unsigned char> out;
    out.reserve(24 + 12 * static_cast<std::size_t>(g.dim) + u.data().size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    detail::put<std::uint32_t>(out, kVersion);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(u.components()));
    for (int a = 0; a < g.dim; ++a) detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n[a]));
    for (int a = 0; a < g.dim; ++a) detail::put<double>(out, g.length[a]);
    for (double v : u.data()) detail::put<double>(out, v);
    return out;
}

inline GridField decode(std::span<const unsigned char> bytes) {
    using K = FormatError::Kind;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(K::BadMagic, "onsf: bad magic (expected \"ONSF\")");
    detail::Reader r(bytes.subspan(4));
    const auto version = r.get<std::uint32_t>("version");
    if (version != kVersion)
        throw FormatError(K::VersionMismatch, "onsf: version mismatch (file " + std::to_string(version) +
                                                  ", supported " + std::to_string(kVersion) + ")");
    const auto d = r.get<std::uint32_t>("dimension");
    const auto m = r.get<std::uint32_t>("component count");
    if (d != 2 && d != 3) throw FormatError(K::BadHeader, "onsf: dimension must be 2 or 3");
    if (m < 1) throw FormatError(K::BadHeader, "onsf: component count must be >= 1");
    std::vector<int> n(d);
    std::vector<double> len(d);
    for (auto& v : n) v = static_cast<int>(r.get<std::uint32_t>("axis counts"));
    for (auto& v : len) v = r.get<double>("axis lengths");
    Grid g;
    try {
        g = Grid::make(n, len);
    } catch (const PreconditionError& e) {
        throw FormatError(K::BadHeader, std::string("onsf: ") + e.what());
    }
    const std::size_t count = g.size() * m;
    if (r.remaining() < count * sizeof(double))
        throw FormatError(K::Truncated, "onsf: truncated payload (expected " + std::to_string(count) +
                                            " samples, found " + std::to_string(r.remaining() / 8) + ")");
    if (r.remaining() > count * sizeof(double))
        throw FormatError(K::BadHeader, "onsf: trailing bytes after payload");
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = r.get<double>("samples");
        if (!std::isfinite(data[i]))
            throw FormatError(K::NonFinite, "onsf: non-finite sample at index " + std::to_string(i));
    }
    return GridField(g, static_cast<int>(m), std::move(data));
}

inline void write_field(const std::string& path, const GridField& u) {
    const auto bytes = encode(u);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError(FormatError::Kind::Io, "onsf: cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw FormatError(FormatError::Kind::Io, "onsf: write failed for " + path);
}

inline GridField read_field(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError(FormatError::Kind::Io, "onsf: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

} // namespace onsager::onsf
