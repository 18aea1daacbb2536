#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cbd {

// SHA-256 for file/config provenance checksums recorded in run manifests.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    // hex digest; finalizes a copy, so the object stays usable
    std::string hex() const;

    static std::string of_string(std::string_view s);
    static std::string of_file(const std::string& path); // throws on I/O error

private:
    void process_block(const std::uint8_t* p);
    void finalize();

    std::uint32_t h_[8];
    std::uint8_t buf_[64];
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
};

// FNV-1a 64 over raw bytes; cheap integrity tag for tensor payloads.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex64(std::uint64_t v);

} // namespace cbd
