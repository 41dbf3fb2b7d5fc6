#include "forge/unicode.hpp"

#include <algorithm>
#include <cstddef>

namespace forge::uni {

namespace {

struct UnicodeDecomp {
    std::uint32_t cp;
    std::uint32_t a;
    std::uint32_t b;  // 0xFFFFFFFF for singleton decompositions
};
struct UnicodeCcc {
    std::uint32_t cp;
    std::uint16_t ccc;
};
struct UnicodeComp {
    std::uint32_t a;
    std::uint32_t b;
    std::uint32_t cp;
};

#include "unicode_data.inc"

constexpr std::uint32_t kReplacement = 0xFFFD;

// Hangul syllable composition constants
constexpr std::uint32_t SBase = 0xAC00, LBase = 0x1100, VBase = 0x1161, TBase = 0x11A7;
constexpr std::uint32_t LCount = 19, VCount = 21, TCount = 28;
constexpr std::uint32_t NCount = VCount * TCount, SCount = LCount * NCount;

int combining_class(std::uint32_t cp) {
    std::size_t lo = 0, hi = kCccCount;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (kCcc[mid].cp < cp)
            lo = mid + 1;
        else
            hi = mid;
    }
    return (lo < kCccCount && kCcc[lo].cp == cp) ? kCcc[lo].ccc : 0;
}

const UnicodeDecomp* find_decomp(std::uint32_t cp) {
    std::size_t lo = 0, hi = kDecompCount;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (kDecomp[mid].cp < cp)
            lo = mid + 1;
        else
            hi = mid;
    }
    return (lo < kDecompCount && kDecomp[lo].cp == cp) ? &kDecomp[lo] : nullptr;
}

std::uint32_t find_composite(std::uint32_t a, std::uint32_t b) {
    std::size_t lo = 0, hi = kCompCount;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (kComp[mid].a < a || (kComp[mid].a == a && kComp[mid].b < b))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < kCompCount && kComp[lo].a == a && kComp[lo].b == b) return kComp[lo].cp;
    return 0;
}

void decompose_into(std::uint32_t cp, std::vector<std::uint32_t>& out) {
    if (cp >= SBase && cp < SBase + SCount) {
        std::uint32_t idx = cp - SBase;
        out.push_back(LBase + idx / NCount);
        out.push_back(VBase + (idx % NCount) / TCount);
        if (idx % TCount) out.push_back(TBase + idx % TCount);
        return;
    }
    if (const UnicodeDecomp* d = find_decomp(cp)) {
        decompose_into(d->a, out);
        if (d->b != 0xFFFFFFFF) decompose_into(d->b, out);
        return;
    }
    out.push_back(cp);
}

}  // namespace

std::vector<std::uint32_t> decode_utf8(const std::string& bytes, std::size_t* replaced) {
    std::vector<std::uint32_t> cps;
    cps.reserve(bytes.size());
    std::size_t bad = 0;
    std::size_t i = 0, n = bytes.size();
    while (i < n) {
        unsigned char c = bytes[i];
        if (c < 0x80) {
            cps.push_back(c);
            ++i;
            continue;
        }
        int len;
        std::uint32_t cp, min_cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
            min_cp = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
            min_cp = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
            min_cp = 0x10000;
        } else {
            cps.push_back(kReplacement);
            ++bad;
            ++i;
            continue;
        }
        bool ok = i + len <= n;
        for (int k = 1; ok && k < len; ++k) {
            unsigned char cc = bytes[i + k];
            if ((cc & 0xC0) != 0x80)
                ok = false;
            else
                cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            cps.push_back(kReplacement);
            ++bad;
            ++i;  // resync at the next byte
            continue;
        }
        cps.push_back(cp);
        i += len;
    }
    if (replaced) *replaced = bad;
    return cps;
}

std::string encode_utf8(const std::vector<std::uint32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (std::uint32_t cp : cps) {
        if (cp < 0x80) {
            out.push_back(char(cp));
        } else if (cp < 0x800) {
            out.push_back(char(0xC0 | (cp >> 6)));
            out.push_back(char(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(char(0xE0 | (cp >> 12)));
            out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(char(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(char(0xF0 | (cp >> 18)));
            out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(char(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::vector<std::uint32_t> nfc(const std::vector<std::uint32_t>& cps) {
    // canonical decomposition
    std::vector<std::uint32_t> d;
    d.reserve(cps.size() + 8);
    for (std::uint32_t cp : cps) decompose_into(cp, d);

    // canonical ordering: stable bubble of nonzero-ccc runs
    for (std::size_t i = 1; i < d.size(); ++i) {
        int cc = combining_class(d[i]);
        if (cc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            int prev = combining_class(d[j - 1]);
            if (prev == 0 || prev <= cc) break;
            std::swap(d[j - 1], d[j]);
            --j;
        }
    }

    // canonical composition; last_cc == -1 means nothing follows the starter yet
    std::vector<std::uint32_t> out;
    out.reserve(d.size());
    std::ptrdiff_t last_starter = -1;
    int last_cc = -1;
    for (std::uint32_t cp : d) {
        int cc = combining_class(cp);
        if (last_starter >= 0 && (last_cc == -1 || last_cc < cc)) {
            std::uint32_t starter = out[last_starter];
            std::uint32_t composed = 0;
            if (last_cc == -1 && starter >= LBase && starter < LBase + LCount &&
                cp >= VBase && cp < VBase + VCount) {
                composed = SBase + ((starter - LBase) * VCount + (cp - VBase)) * TCount;
            } else if (last_cc == -1 && starter >= SBase && starter < SBase + SCount &&
                       (starter - SBase) % TCount == 0 && cp > TBase && cp < TBase + TCount) {
                composed = starter + (cp - TBase);
            } else {
                composed = find_composite(starter, cp);
            }
            if (composed) {
                out[last_starter] = composed;
                continue;
            }
        }
        if (cc == 0) {
            last_starter = static_cast<std::ptrdiff_t>(out.size());
            last_cc = -1;
        } else {
            last_cc = cc;
        }
        out.push_back(cp);
    }
    return out;
}

std::string nfc_utf8(const std::string& bytes) { return encode_utf8(nfc(decode_utf8(bytes))); }

std::string normalize_text(const std::string& raw, bool collapse_whitespace,
                           NormalizeReport* report) {
    NormalizeReport rep;
    std::vector<std::uint32_t> cps = decode_utf8(raw, &rep.invalid_bytes_replaced);
    cps = nfc(cps);

    std::vector<std::uint32_t> kept;
    kept.reserve(cps.size());
    for (std::uint32_t cp : cps) {
        bool control = (cp < 0x20 && cp != '\n' && cp != '\t') || cp == 0x7F ||
                       (cp >= 0x80 && cp <= 0x9F);
        if (control) {
            ++rep.controls_stripped;
            continue;
        }
        kept.push_back(cp);
    }

    std::string out;
    if (collapse_whitespace) {
        std::vector<std::uint32_t> collapsed;
        collapsed.reserve(kept.size());
        bool in_run = false;
        for (std::uint32_t cp : kept) {
            bool ws = cp == ' ' || cp == '\t' || cp == '\n';
            if (ws) {
                if (!in_run) collapsed.push_back(' ');
                else ++rep.whitespace_runs_collapsed;
                in_run = true;
            } else {
                in_run = false;
                collapsed.push_back(cp);
            }
        }
        out = encode_utf8(collapsed);
    } else {
        out = encode_utf8(kept);
    }
    if (report) *report = rep;
    return out;
}

}  // namespace forge::uni
