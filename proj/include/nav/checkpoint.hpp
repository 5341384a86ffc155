#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/nn.hpp"

namespace nav {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'N', 'A', 'V', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw CheckpointError("checkpoint truncated");
    return v;
}

}  // namespace detail

/// Writes named parameter tensors as little-endian float32 after a
/// versioned header (magic, format version, config hash).
template <typename T>
void save_params(std::ostream& os, const ParamStore<T>& store, std::uint64_t config_hash) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format assumes a little-endian host");
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_pod(os, kCheckpointVersion);
    detail::write_pod(os, config_hash);
    detail::write_pod(os, static_cast<std::uint32_t>(store.entries.size()));
    for (const auto& e : store.entries) {
        detail::write_pod(os, static_cast<std::uint32_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        detail::write_pod(os, static_cast<std::uint32_t>(e.shape.size()));
        for (int d : e.shape) detail::write_pod(os, static_cast<std::int32_t>(d));
        for (std::size_t i = 0; i < e.size; ++i) {
            detail::write_pod(os, static_cast<float>(store.values[e.offset + i]));
        }
    }
    if (!os) throw CheckpointError("checkpoint write failed");
}

/// Loads into an already-constructed store; names, shapes and the config
/// hash must match.
template <typename T>
void load_params(std::istream& is, ParamStore<T>& store, std::uint64_t config_hash) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw CheckpointError("bad checkpoint magic");
    }
    const auto version = detail::read_pod<std::uint32_t>(is);
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto hash = detail::read_pod<std::uint64_t>(is);
    if (hash != config_hash) {
        throw CheckpointError("checkpoint config hash mismatch");
    }
    const auto n = detail::read_pod<std::uint32_t>(is);
    if (n != store.entries.size()) {
        throw CheckpointError("checkpoint tensor count mismatch");
    }
    for (const auto& e : store.entries) {
        const auto name_len = detail::read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is || name != e.name) throw CheckpointError("checkpoint tensor name mismatch");
        const auto ndim = detail::read_pod<std::uint32_t>(is);
        if (ndim != e.shape.size()) throw CheckpointError("checkpoint tensor rank mismatch");
        for (int d : e.shape) {
            if (detail::read_pod<std::int32_t>(is) != d) {
                throw CheckpointError("checkpoint tensor shape mismatch");
            }
        }
        for (std::size_t i = 0; i < e.size; ++i) {
            store.values[e.offset + i] = static_cast<T>(detail::read_pod<float>(is));
        }
    }
}

template <typename T>
void save_params_file(const std::string& path, const ParamStore<T>& store,
                      std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("cannot open for write: " + path);
    save_params(os, store, config_hash);
}

template <typename T>
void load_params_file(const std::string& path, ParamStore<T>& store, std::uint64_t config_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path);
    load_params(is, store, config_hash);
}

}  // namespace nav
