#include "tokgraft/unicode.hpp"

#include <algorithm>

#include "tokgraft/errors.hpp"
#include "unicode_data.hpp"

namespace tokgraft::uni {

namespace {

bool in_ranges(std::uint32_t cp, const data::CpRange* ranges, std::size_t count) {
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (cp > ranges[mid].hi) {
            lo = mid + 1;
        } else if (cp < ranges[mid].lo) {
            hi = mid;
        } else {
            return true;
        }
    }
    return false;
}

// Hangul syllable composition constants (UAX #15 §3.12).
constexpr std::uint32_t kSBase = 0xAC00;
constexpr std::uint32_t kLBase = 0x1100;
constexpr std::uint32_t kVBase = 0x1161;
constexpr std::uint32_t kTBase = 0x11A7;
constexpr std::uint32_t kLCount = 19;
constexpr std::uint32_t kVCount = 21;
constexpr std::uint32_t kTCount = 28;
constexpr std::uint32_t kNCount = kVCount * kTCount;
constexpr std::uint32_t kSCount = kLCount * kNCount;

const data::Decomposition* find_decomposition(std::uint32_t cp) {
    std::size_t lo = 0, hi = data::decompositions_count;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (data::decompositions[mid].cp < cp) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < data::decompositions_count && data::decompositions[lo].cp == cp) {
        return &data::decompositions[lo];
    }
    return nullptr;
}

std::uint32_t compose_pair(std::uint32_t a, std::uint32_t b) {
    // Hangul LV / LVT composition.
    if (a >= kLBase && a < kLBase + kLCount && b >= kVBase && b < kVBase + kVCount) {
        return kSBase + ((a - kLBase) * kVCount + (b - kVBase)) * kTCount;
    }
    if (a >= kSBase && a < kSBase + kSCount && (a - kSBase) % kTCount == 0 &&
        b > kTBase && b < kTBase + kTCount) {
        return a + (b - kTBase);
    }
    std::size_t lo = 0, hi = data::composition_pairs_count;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        const auto& e = data::composition_pairs[mid];
        if (e.first < a || (e.first == a && e.second < b)) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < data::composition_pairs_count) {
        const auto& e = data::composition_pairs[lo];
        if (e.first == a && e.second == b) {
            return e.composed;
        }
    }
    return 0;
}

void decompose_into(std::uint32_t cp, std::vector<std::uint32_t>& out) {
    if (cp >= kSBase && cp < kSBase + kSCount) {
        std::uint32_t index = cp - kSBase;
        out.push_back(kLBase + index / kNCount);
        out.push_back(kVBase + (index % kNCount) / kTCount);
        if (index % kTCount != 0) {
            out.push_back(kTBase + index % kTCount);
        }
        return;
    }
    if (const auto* d = find_decomposition(cp)) {
        decompose_into(d->first, out);
        if (d->second != 0) {
            decompose_into(d->second, out);
        }
        return;
    }
    out.push_back(cp);
}

}  // namespace

bool is_letter(std::uint32_t cp) {
    return in_ranges(cp, data::letter_ranges, data::letter_ranges_count);
}

bool is_mark(std::uint32_t cp) {
    return in_ranges(cp, data::mark_ranges, data::mark_ranges_count);
}

bool is_number(std::uint32_t cp) {
    return in_ranges(cp, data::number_ranges, data::number_ranges_count);
}

bool is_space(std::uint32_t cp) {
    return in_ranges(cp, data::space_ranges, data::space_ranges_count);
}

std::uint8_t combining_class(std::uint32_t cp) {
    std::size_t lo = 0, hi = data::combining_classes_count;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (data::combining_classes[mid].cp < cp) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < data::combining_classes_count && data::combining_classes[lo].cp == cp) {
        return data::combining_classes[lo].ccc;
    }
    return 0;
}

std::size_t decode_utf8(std::string_view s, std::size_t pos, std::uint32_t& cp) {
    if (pos >= s.size()) {
        return 0;
    }
    const auto b0 = static_cast<std::uint8_t>(s[pos]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    std::size_t len;
    std::uint32_t value;
    std::uint32_t min_value;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        value = b0 & 0x1F;
        min_value = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        value = b0 & 0x0F;
        min_value = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        value = b0 & 0x07;
        min_value = 0x10000;
    } else {
        return 0;
    }
    if (pos + len > s.size()) {
        return 0;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<std::uint8_t>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            return 0;
        }
        value = (value << 6) | (b & 0x3F);
    }
    if (value < min_value || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
        return 0;
    }
    cp = value;
    return len;
}

bool is_valid_utf8(std::string_view s) {
    std::size_t pos = 0;
    std::uint32_t cp;
    while (pos < s.size()) {
        std::size_t n = decode_utf8(s, pos, cp);
        if (n == 0) {
            return false;
        }
        pos += n;
    }
    return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp <= 0x7F) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7FF) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0xFFFF) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(const std::vector<std::uint32_t>& cps) {
    std::string out;
    out.reserve(cps.size() * 2);
    for (std::uint32_t cp : cps) {
        append_utf8(out, cp);
    }
    return out;
}

std::vector<std::uint32_t> to_codepoints(std::string_view s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t pos = 0;
    std::uint32_t cp;
    while (pos < s.size()) {
        std::size_t n = decode_utf8(s, pos, cp);
        if (n == 0) {
            raise(Errc::invalid_utf8,
                  "invalid UTF-8 at byte offset " + std::to_string(pos));
        }
        out.push_back(cp);
        pos += n;
    }
    return out;
}

std::string to_nfc(std::string_view s) {
    std::vector<std::uint32_t> cps = to_codepoints(s);

    std::vector<std::uint32_t> decomposed;
    decomposed.reserve(cps.size() + 8);
    for (std::uint32_t cp : cps) {
        decompose_into(cp, decomposed);
    }

    // Canonical ordering: stable sort each run of nonzero-ccc marks.
    std::size_t i = 0;
    while (i < decomposed.size()) {
        if (combining_class(decomposed[i]) == 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < decomposed.size() && combining_class(decomposed[j]) != 0) {
            ++j;
        }
        std::stable_sort(decomposed.begin() + i, decomposed.begin() + j,
                         [](std::uint32_t a, std::uint32_t b) {
                             return combining_class(a) < combining_class(b);
                         });
        i = j;
    }

    // Canonical composition (UAX #15): combine each character with the last
    // starter unless a character of equal or higher combining class blocks it.
    std::vector<std::uint32_t> out;
    out.reserve(decomposed.size());
    std::ptrdiff_t last_starter = -1;
    for (std::uint32_t cp : decomposed) {
        const std::uint8_t ccc = combining_class(cp);
        if (last_starter >= 0) {
            const bool blocked =
                out.size() > static_cast<std::size_t>(last_starter) + 1 &&
                combining_class(out.back()) >= ccc;
            if (!blocked) {
                if (std::uint32_t composed = compose_pair(out[last_starter], cp)) {
                    out[last_starter] = composed;
                    continue;
                }
            }
        }
        out.push_back(cp);
        if (ccc == 0) {
            last_starter = static_cast<std::ptrdiff_t>(out.size()) - 1;
        }
    }
    return encode_utf8(out);
}

}  // namespace tokgraft::uni
