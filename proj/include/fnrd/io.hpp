#pragma once

/**
 * @file io.hpp
 * @brief Flat little-endian float64 files, JSON sidecars, atomic writes and
 *        the FNV-1a content hash used for cache keys.
 */

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "fnrd/errors.hpp"

namespace fnrd {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Incremental 64-bit FNV-1a.
class ContentHash {
public:
    ContentHash& bytes(const void* data, std::size_t size)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    ContentHash& value(T v)
    {
        return bytes(&v, sizeof(v));
    }

    ContentHash& text(std::string_view s)
    {
        value(static_cast<std::uint64_t>(s.size()));
        return bytes(s.data(), s.size());
    }

    template <class T>
        requires std::is_arithmetic_v<T>
    ContentHash& values(std::span<const T> s)
    {
        value(static_cast<std::uint64_t>(s.size()));
        return bytes(s.data(), s.size_bytes());
    }

    [[nodiscard]] std::uint64_t digest() const noexcept { return state_; }

    [[nodiscard]] std::string hex() const
    {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << state_;
        return os.str();
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) noexcept
{
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) {
            r = (r << 8) | ((v >> (8 * i)) & 0xffU);
        }
        return r;
    }
}

}  // namespace detail

/// Writes `path` via a temporary sibling file and a rename, so readers never
/// observe a partially written file.
template <class Writer>
void atomic_write(const fs::path& path, Writer&& writer)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        }
        writer(os);
        os.flush();
        if (!os) {
            throw ConfigError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path);
}

inline void write_f64(std::ostream& os, std::span<const double> data)
{
    std::vector<std::uint64_t> buf(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &data[i], sizeof(bits));
        buf[i] = detail::to_little_endian(bits);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

inline void write_f64_file(const fs::path& path, std::span<const double> data)
{
    atomic_write(path, [&](std::ostream& os) { write_f64(os, data); });
}

/// Reads a flat float64 file; throws if its size is not `expected` values
/// (unless expected is negative).
inline std::vector<double> read_f64_file(const fs::path& path, std::ptrdiff_t expected = -1)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    const auto size = static_cast<std::size_t>(fs::file_size(path));
    if (size % sizeof(double) != 0 ||
        (expected >= 0 && size != static_cast<std::size_t>(expected) * sizeof(double))) {
        throw ConfigError("'" + path.string() + "' has unexpected size " + std::to_string(size));
    }
    std::vector<std::uint64_t> buf(size / sizeof(double));
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const std::uint64_t bits = detail::to_little_endian(buf[i]);
        std::memcpy(&out[i], &bits, sizeof(bits));
    }
    return out;
}

inline void write_json_file(const fs::path& path, const json& j)
{
    atomic_write(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline json read_json_file(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

inline std::string hash_matrix_bytes(const Eigen::Ref<const Eigen::MatrixXd>& m)
{
    ContentHash h;
    h.value(static_cast<std::int64_t>(m.rows())).value(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            h.value(m(r, c));
        }
    }
    return h.hex();
}

}  // namespace fnrd
