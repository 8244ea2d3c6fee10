#include "tokgraft/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <semaphore>
#include <unordered_map>
#include <unordered_set>

#include "tokgraft/errors.hpp"
#include "tokgraft/json_util.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/unicode.hpp"

namespace tokgraft {

namespace {

std::uint64_t pack(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct Word {
    std::vector<TokenId> toks;
    std::int64_t freq = 0;
};

}  // namespace

CorpusCounts count_corpus(std::istream& lines) {
    CorpusCounts counts;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!uni::is_valid_utf8(line)) {
            raise(Errc::invalid_utf8, "invalid UTF-8 on line " + std::to_string(line_no));
        }
        for (std::string& chunk : pretokenize(uni::to_nfc(line))) {
            ++counts.word_freqs[std::move(chunk)];
            ++counts.total_chunks;
        }
    }
    return counts;
}

CorpusCounts count_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::io_error, "cannot open " + path.string());
    }
    return count_corpus(in);
}

void merge_counts(CorpusCounts& into, const CorpusCounts& from) {
    for (const auto& [chunk, freq] : from.word_freqs) {
        into.word_freqs[chunk] += freq;
    }
    into.total_chunks += from.total_chunks;
}

std::string corpus_fingerprint(const CorpusCounts& counts) {
    std::string canon;
    for (const auto& [chunk, freq] : counts.word_freqs) {
        canon += chunk;
        canon += '\t';
        canon += std::to_string(freq);
        canon += '\n';
    }
    return sha256_hex(canon);
}

LearnedExtension learn_merges(const CorpusCounts& counts, const Tokenizer& base,
                              const TrainOptions& options) {
    if (options.budget_y < 0) {
        raise(Errc::invalid_argument, "budget_y must be >= 0");
    }
    if (options.min_pair_freq < 1) {
        raise(Errc::invalid_argument, "min_pair_freq must be >= 1");
    }

    LearnedExtension ext;
    ext.language = options.language;
    ext.budget_y = options.budget_y;
    ext.min_pair_freq = options.min_pair_freq;
    ext.base_fingerprint = fingerprint(base.vocab(), base.merges());
    ext.corpus_fingerprint = corpus_fingerprint(counts);
    if (options.budget_y == 0) {
        return ext;
    }

    // Token strings, local ids past the base vocabulary for learned tokens.
    std::vector<std::string> strings;
    strings.reserve(base.vocab().size() + static_cast<std::size_t>(options.budget_y));
    std::unordered_set<std::string> taken;
    for (std::size_t id = 0; id < base.vocab().size(); ++id) {
        strings.push_back(base.vocab().string_of(static_cast<TokenId>(id)));
        taken.insert(strings.back());
    }

    std::vector<Word> words;
    words.reserve(counts.word_freqs.size());
    for (const auto& [chunk, freq] : counts.word_freqs) {
        Word w;
        w.toks = base.encode_chunk(chunk);
        w.freq = freq;
        if (w.toks.size() >= 2) {
            words.push_back(std::move(w));
        }
    }

    std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
    std::unordered_map<std::uint64_t, std::unordered_set<std::size_t>> pair_words;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        const Word& w = words[wi];
        for (std::size_t i = 0; i + 1 < w.toks.size(); ++i) {
            const std::uint64_t p = pack(w.toks[i], w.toks[i + 1]);
            pair_counts[p] += w.freq;
            pair_words[p].insert(wi);
        }
    }

    std::unordered_set<std::uint64_t> banned;
    while (static_cast<std::int64_t>(ext.new_merges.size()) < options.budget_y) {
        // Highest count wins; ties go to the lexicographically smallest
        // (left, right) token-string pair. This total order makes the scan
        // independent of hash iteration order.
        std::uint64_t best = 0;
        std::int64_t best_count = 0;
        bool found = false;
        for (const auto& [p, count] : pair_counts) {
            if (count < options.min_pair_freq || banned.contains(p)) {
                continue;
            }
            if (!found || count > best_count) {
                best = p;
                best_count = count;
                found = true;
                continue;
            }
            if (count == best_count) {
                const std::string& l = strings[static_cast<TokenId>(p >> 32)];
                const std::string& r = strings[static_cast<TokenId>(p & 0xFFFFFFFF)];
                const std::string& bl = strings[static_cast<TokenId>(best >> 32)];
                const std::string& br = strings[static_cast<TokenId>(best & 0xFFFFFFFF)];
                if (l < bl || (l == bl && r < br)) {
                    best = p;
                }
            }
        }
        if (!found) {
            break;
        }

        const TokenId left = static_cast<TokenId>(best >> 32);
        const TokenId right = static_cast<TokenId>(best & 0xFFFFFFFF);
        std::string token = strings[left] + strings[right];
        if (taken.contains(token)) {
            banned.insert(best);
            continue;
        }

        const TokenId new_id = static_cast<TokenId>(strings.size());
        taken.insert(token);
        strings.push_back(token);
        ext.new_merges.push_back(MergeRule{strings[left], strings[right]});
        ext.new_tokens.push_back(strings.back());

        // Rewrite each word containing the pair; counts are updated by
        // subtracting all of the word's old pairs and re-adding the new ones.
        auto where = pair_words.find(best);
        std::vector<std::size_t> affected(where->second.begin(), where->second.end());
        std::sort(affected.begin(), affected.end());
        for (std::size_t wi : affected) {
            Word& w = words[wi];
            bool has_pair = false;
            for (std::size_t i = 0; i + 1 < w.toks.size(); ++i) {
                if (w.toks[i] == left && w.toks[i + 1] == right) {
                    has_pair = true;
                    break;
                }
            }
            if (!has_pair) {
                continue;  // stale index entry from an earlier rewrite
            }
            for (std::size_t i = 0; i + 1 < w.toks.size(); ++i) {
                auto it = pair_counts.find(pack(w.toks[i], w.toks[i + 1]));
                it->second -= w.freq;
                if (it->second <= 0) {
                    pair_counts.erase(it);
                }
            }
            std::vector<TokenId> out;
            out.reserve(w.toks.size());
            for (std::size_t i = 0; i < w.toks.size();) {
                if (i + 1 < w.toks.size() && w.toks[i] == left && w.toks[i + 1] == right) {
                    out.push_back(new_id);
                    i += 2;
                } else {
                    out.push_back(w.toks[i]);
                    ++i;
                }
            }
            w.toks = std::move(out);
            for (std::size_t i = 0; i + 1 < w.toks.size(); ++i) {
                const std::uint64_t p = pack(w.toks[i], w.toks[i + 1]);
                pair_counts[p] += w.freq;
                pair_words[p].insert(wi);
            }
        }
        pair_words.erase(best);
    }
    return ext;
}

std::vector<LearnedExtension> learn_all(const std::vector<LanguageCorpus>& corpora,
                                        const Tokenizer& base, std::int64_t min_pair_freq,
                                        int jobs) {
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        for (std::size_t j = i + 1; j < corpora.size(); ++j) {
            if (corpora[i].language == corpora[j].language) {
                raise(Errc::invalid_argument,
                      "duplicate language in corpus list: " + corpora[i].language);
            }
        }
    }
    if (jobs < 1) {
        jobs = 1;
    }

    auto train_one = [&](const LanguageCorpus& c) {
        try {
            TrainOptions opt;
            opt.budget_y = c.budget_y;
            opt.min_pair_freq = min_pair_freq;
            opt.language = c.language;
            return learn_merges(count_corpus_file(c.path), base, opt);
        } catch (const Error& e) {
            raise(e.code(), "[" + c.language + "] " + e.what());
        }
    };

    std::vector<LearnedExtension> out(corpora.size());
    if (jobs == 1 || corpora.size() <= 1) {
        for (std::size_t i = 0; i < corpora.size(); ++i) {
            out[i] = train_one(corpora[i]);
        }
        return out;
    }

    // Per-language async tasks, bounded by jobs via a counting semaphore.
    std::counting_semaphore<> slots(jobs);
    std::vector<std::future<LearnedExtension>> tasks;
    tasks.reserve(corpora.size());
    for (const LanguageCorpus& c : corpora) {
        tasks.push_back(std::async(std::launch::async, [&, c]() {
            slots.acquire();
            struct Release {
                std::counting_semaphore<>& s;
                ~Release() { s.release(); }
            } release{slots};
            return train_one(c);
        }));
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        out[i] = tasks[i].get();
    }
    return out;
}

nlohmann::json extension_to_json(const LearnedExtension& ext) {
    nlohmann::json merges = nlohmann::json::array();
    for (const MergeRule& rule : ext.new_merges) {
        merges.push_back({rule.left, rule.right});
    }
    return {
        {"language", ext.language},
        {"budget_y", ext.budget_y},
        {"min_pair_freq", ext.min_pair_freq},
        {"base_fingerprint", ext.base_fingerprint},
        {"corpus_fingerprint", ext.corpus_fingerprint},
        {"merges", merges},
        {"tokens", ext.new_tokens},
    };
}

LearnedExtension extension_from_json(const nlohmann::json& j) {
    LearnedExtension ext;
    try {
        ext.language = j.at("language").get<std::string>();
        ext.budget_y = j.at("budget_y").get<std::int64_t>();
        ext.min_pair_freq = j.value("min_pair_freq", std::int64_t{2});
        ext.base_fingerprint = j.value("base_fingerprint", std::string{});
        ext.corpus_fingerprint = j.value("corpus_fingerprint", std::string{});
        for (const auto& pair : j.at("merges")) {
            if (!pair.is_array() || pair.size() != 2) {
                raise(Errc::invalid_format, "extension merge entries must be [left, right]");
            }
            ext.new_merges.push_back(
                MergeRule{pair[0].get<std::string>(), pair[1].get<std::string>()});
        }
        ext.new_tokens = j.at("tokens").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::invalid_format, std::string("malformed extension JSON: ") + e.what());
    }
    if (ext.new_tokens.size() != ext.new_merges.size()) {
        raise(Errc::invalid_format, "extension tokens and merges differ in length");
    }
    for (std::size_t i = 0; i < ext.new_tokens.size(); ++i) {
        if (ext.new_tokens[i] != ext.new_merges[i].left + ext.new_merges[i].right) {
            raise(Errc::invalid_format,
                  "extension token " + std::to_string(i) + " does not match its merge");
        }
    }
    return ext;
}

}  // namespace tokgraft
