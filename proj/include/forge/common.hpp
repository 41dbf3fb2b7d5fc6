#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace forge {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kTokenizerVersion = "wordlex/1";

// Error classes map 1:1 onto CLI exit codes.
enum class Status : int {
    ok = 0,
    runtime = 1,
    config = 2,
    missing_input = 3,
    divergence = 4,
    protocol = 5,
};

class ForgeError : public std::runtime_error {
  public:
    ForgeError(Status status, const std::string& msg)
        : std::runtime_error(msg), status_(status) {}
    Status status() const noexcept { return status_; }

  private:
    Status status_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
    throw ForgeError(Status::config, msg);
}
[[noreturn]] inline void throw_missing(const std::string& msg) {
    throw ForgeError(Status::missing_input, msg);
}
[[noreturn]] inline void throw_runtime(const std::string& msg) {
    throw ForgeError(Status::runtime, msg);
}
[[noreturn]] inline void throw_divergence(const std::string& msg) {
    throw ForgeError(Status::divergence, msg);
}
[[noreturn]] inline void throw_protocol(const std::string& msg) {
    throw ForgeError(Status::protocol, msg);
}

}  // namespace forge
