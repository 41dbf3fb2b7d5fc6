#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

// Minimal SHA-256 used for artifact hashing and provenance chains.
class Sha256 {
  public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    // hex digest; finalizes the state (do not update afterwards)
    std::string hex_digest();

  private:
    void process_block(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buf_[64];
    std::size_t buf_len_;
    std::uint64_t total_len_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);  // throws on IO error

}  // namespace forge
