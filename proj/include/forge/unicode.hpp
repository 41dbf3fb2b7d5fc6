#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace forge::uni {

struct NormalizeReport {
    std::size_t invalid_bytes_replaced = 0;
    std::size_t controls_stripped = 0;
    std::size_t whitespace_runs_collapsed = 0;
};

// Decode UTF-8, replacing invalid sequences with U+FFFD (counted).
std::vector<std::uint32_t> decode_utf8(const std::string& bytes, std::size_t* replaced = nullptr);
std::string encode_utf8(const std::vector<std::uint32_t>& cps);

// Canonical composition (NFC) over code points.
std::vector<std::uint32_t> nfc(const std::vector<std::uint32_t>& cps);
std::string nfc_utf8(const std::string& bytes);

// Full document normalization: UTF-8 repair, NFC, control stripping (all
// C0/C1 except \n and \t), and, when collapse_whitespace is set (text
// modality), whitespace-run collapsing to single spaces. Code modality keeps
// whitespace verbatim.
std::string normalize_text(const std::string& raw, bool collapse_whitespace,
                           NormalizeReport* report = nullptr);

}  // namespace forge::uni
