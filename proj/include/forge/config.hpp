#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge::config {

enum class ValueType { string, integer, number, boolean };

struct KeySpec {
    const char* key;  // "section.name" or a bare global like "seed"
    ValueType type;
    const char* default_value;
};

const std::vector<KeySpec>& schema();

// Hierarchical key-value configuration with a closed schema: unknown keys are
// rejected, every key has a default, and the canonical dump (sorted key=value
// lines) is hashed into every artifact manifest.
class RunConfig {
  public:
    static RunConfig defaults();

    // INI-style file: `key = value` lines, `[section]` headers, `#` comments
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);

    const std::string& get_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_number(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string canonical_dump() const;
    std::string hash() const;

  private:
    std::map<std::string, std::string> values_;
    static const KeySpec& spec_for(const std::string& key);
};

}  // namespace forge::config
