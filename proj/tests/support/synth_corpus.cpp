#include "support/synth_corpus.hpp"

#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "tokgraft/unicode.hpp"

namespace testsup {

namespace {

using tokgraft::uni::append_utf8;
using tokgraft::uni::is_letter;
using tokgraft::uni::is_mark;

std::vector<std::uint32_t> range(std::uint32_t lo, std::uint32_t hi) {
    std::vector<std::uint32_t> cps;
    for (std::uint32_t cp = lo; cp <= hi; ++cp) {
        cps.push_back(cp);
    }
    return cps;
}

std::vector<std::uint32_t> concat(std::vector<std::uint32_t> a,
                                  const std::vector<std::uint32_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<std::uint32_t> keep_letters(std::vector<std::uint32_t> cps) {
    std::erase_if(cps, [](std::uint32_t cp) { return !is_letter(cp); });
    return cps;
}

std::vector<std::uint32_t> keep_marks(std::vector<std::uint32_t> cps) {
    std::erase_if(cps, [](std::uint32_t cp) { return !is_mark(cp); });
    return cps;
}

ScriptSpec make_spec(std::vector<std::uint32_t> consonants, std::vector<std::uint32_t> matras,
                     std::uint32_t virama) {
    ScriptSpec spec;
    spec.consonants = keep_letters(std::move(consonants));
    spec.matras = keep_marks(std::move(matras));
    spec.virama = virama;
    if (spec.consonants.size() < 8 || spec.matras.size() < 4) {
        throw std::runtime_error("script inventory unexpectedly small");
    }
    return spec;
}

std::map<std::string, ScriptSpec> build_scripts() {
    std::map<std::string, ScriptSpec> scripts;
    scripts["hi"] = make_spec(range(0x0915, 0x0939),
                              {0x093E, 0x093F, 0x0940, 0x0941, 0x0942, 0x0947, 0x0948,
                               0x094B, 0x094C},
                              0x094D);
    scripts["bn"] = make_spec(concat(range(0x0995, 0x09A8), range(0x09AA, 0x09B0)),
                              {0x09BE, 0x09BF, 0x09C0, 0x09C1, 0x09C2, 0x09C7, 0x09C8},
                              0x09CD);
    scripts["gu"] = make_spec(concat(range(0x0A95, 0x0AA8), range(0x0AAA, 0x0AB0)),
                              {0x0ABE, 0x0ABF, 0x0AC0, 0x0AC1, 0x0AC2, 0x0AC7, 0x0AC8,
                               0x0ACB, 0x0ACC},
                              0x0ACD);
    // Stand-in block for Marathi so the eight test corpora stay disjoint.
    scripts["mr"] = make_spec(concat(range(0x0A15, 0x0A28), range(0x0A2A, 0x0A30)),
                              {0x0A3E, 0x0A3F, 0x0A40, 0x0A41, 0x0A42, 0x0A47, 0x0A48,
                               0x0A4B, 0x0A4C},
                              0x0A4D);
    scripts["ta"] = make_spec({0x0B95, 0x0B99, 0x0B9A, 0x0B9C, 0x0B9E, 0x0B9F, 0x0BA3,
                               0x0BA4, 0x0BA8, 0x0BA9, 0x0BAA, 0x0BAE, 0x0BAF, 0x0BB0,
                               0x0BB1, 0x0BB2, 0x0BB3, 0x0BB4, 0x0BB5, 0x0BB7, 0x0BB8,
                               0x0BB9},
                              {0x0BBE, 0x0BBF, 0x0BC0, 0x0BC1, 0x0BC2, 0x0BC6, 0x0BC7,
                               0x0BC8},
                              0x0BCD);
    scripts["te"] = make_spec(concat(range(0x0C15, 0x0C28), range(0x0C2A, 0x0C33)),
                              {0x0C3E, 0x0C3F, 0x0C40, 0x0C41, 0x0C42, 0x0C46, 0x0C47},
                              0x0C4D);
    scripts["kn"] = make_spec(concat(range(0x0C95, 0x0CA8), range(0x0CAA, 0x0CB3)),
                              {0x0CBE, 0x0CBF, 0x0CC1, 0x0CC2, 0x0CC6},
                              0x0CCD);
    scripts["ml"] = make_spec(concat(range(0x0D15, 0x0D28), range(0x0D2A, 0x0D39)),
                              {0x0D3E, 0x0D3F, 0x0D40, 0x0D41, 0x0D42, 0x0D46, 0x0D47,
                               0x0D48},
                              0x0D4D);
    return scripts;
}

double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform(rng) * static_cast<double>(n));
}

// Zipf-like sampling over ranks: weight(r) = 1/(r+1).
class ZipfSampler {
public:
    explicit ZipfSampler(std::size_t n) {
        cumulative_.reserve(n);
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / static_cast<double>(r + 1);
            cumulative_.push_back(total);
        }
    }

    std::size_t sample(std::mt19937_64& rng) const {
        const double u = uniform(rng) * cumulative_.back();
        std::size_t lo = 0;
        std::size_t hi = cumulative_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] < u) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

const ScriptSpec& script_for(const std::string& language) {
    static const std::map<std::string, ScriptSpec> scripts = build_scripts();
    auto it = scripts.find(language);
    if (it == scripts.end()) {
        throw std::runtime_error("no script inventory for " + language);
    }
    return it->second;
}

std::vector<std::string> make_lexicon(const ScriptSpec& script, std::size_t size,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> words;
    words.reserve(size);
    std::map<std::string, bool> seen;
    while (words.size() < size) {
        std::string word;
        const std::size_t syllables = 2 + pick(rng, 3);
        for (std::size_t s = 0; s < syllables; ++s) {
            append_utf8(word, script.consonants[pick(rng, script.consonants.size())]);
            const double kind = uniform(rng);
            if (kind < 0.60) {
                append_utf8(word, script.matras[pick(rng, script.matras.size())]);
            } else if (kind < 0.75 && script.virama != 0) {
                append_utf8(word, script.virama);
                append_utf8(word, script.consonants[pick(rng, script.consonants.size())]);
            }
        }
        if (!seen[word]) {
            seen[word] = true;
            words.push_back(word);
        }
    }
    return words;
}

std::vector<std::string> make_lines(const std::vector<std::string>& lexicon,
                                    std::size_t line_count, std::uint64_t sample_seed) {
    std::mt19937_64 rng(sample_seed);
    const ZipfSampler sampler(lexicon.size());
    std::vector<std::string> lines;
    lines.reserve(line_count);
    for (std::size_t i = 0; i < line_count; ++i) {
        std::string line;
        const std::size_t words = 4 + pick(rng, 7);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) {
                line += ' ';
            }
            line += lexicon[sampler.sample(rng)];
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const std::string& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << join_lines(lines);
}

std::vector<std::string> make_corpus(const CorpusSpec& spec) {
    const std::vector<std::string> lexicon =
        make_lexicon(script_for(spec.language), spec.lexicon_size, spec.lexicon_seed);
    return make_lines(lexicon, spec.line_count, spec.sample_seed);
}

std::string random_unicode_string(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string out;
    const std::size_t segments = 1 + pick(rng, 6);
    for (std::size_t s = 0; s < segments; ++s) {
        const double kind = uniform(rng);
        if (kind < 0.25) {
            static const char* ascii[] = {"the",   "Hello", "don't", "42",    "a1b2",
                                          "(ok)",  "x?!",   "mix",   "Tokens"};
            out += ascii[pick(rng, 9)];
        } else if (kind < 0.45) {
            const ScriptSpec& sc = script_for("hi");
            for (std::size_t i = 0; i < 2 + pick(rng, 3); ++i) {
                append_utf8(out, sc.consonants[pick(rng, sc.consonants.size())]);
                if (uniform(rng) < 0.5) {
                    append_utf8(out, sc.matras[pick(rng, sc.matras.size())]);
                }
            }
        } else if (kind < 0.60) {
            const ScriptSpec& sc = script_for("ta");
            for (std::size_t i = 0; i < 2 + pick(rng, 3); ++i) {
                append_utf8(out, sc.consonants[pick(rng, sc.consonants.size())]);
            }
        } else if (kind < 0.75) {
            const ScriptSpec& sc = script_for("ml");
            for (std::size_t i = 0; i < 2 + pick(rng, 3); ++i) {
                append_utf8(out, sc.consonants[pick(rng, sc.consonants.size())]);
                if (uniform(rng) < 0.4) {
                    append_utf8(out, sc.matras[pick(rng, sc.matras.size())]);
                }
            }
        } else if (kind < 0.88) {
            append_utf8(out, 0x1F600 + static_cast<std::uint32_t>(pick(rng, 64)));
        } else {
            // Standalone marks and oddballs that stress the scanner.
            static const std::uint32_t odd[] = {0x094D, 0x0301, 0x00E9, 0x20AC,
                                                0x3042, 0x0416, 0xFFFD};
            append_utf8(out, odd[pick(rng, 7)]);
        }
        if (uniform(rng) < 0.6) {
            out += (uniform(rng) < 0.8) ? " " : "  ";
        }
    }
    return out;
}

}  // namespace testsup
