#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokgraft/bpe.hpp"

namespace tokgraft {

struct CorpusCounts {
    // Pre-token chunk (post-NFC, raw UTF-8) -> occurrence count. Ordered map
    // so iteration is deterministic regardless of how counts were built.
    std::map<std::string, std::int64_t> word_freqs;
    std::int64_t total_chunks = 0;
};

// Applies NFC then pretokenize to every line; InvalidUtf8 errors carry the
// 1-based line number.
CorpusCounts count_corpus(std::istream& lines);
CorpusCounts count_corpus_file(const std::filesystem::path& path);
void merge_counts(CorpusCounts& into, const CorpusCounts& from);

// SHA-256 over the canonical "chunk\tcount" listing; stable across line order
// and sharding.
std::string corpus_fingerprint(const CorpusCounts& counts);

struct LearnedExtension {
    std::string language;
    std::int64_t budget_y = 0;
    std::int64_t min_pair_freq = 2;
    std::string base_fingerprint;
    std::string corpus_fingerprint;
    std::vector<MergeRule> new_merges;
    std::vector<std::string> new_tokens;  // new_tokens[i] == new_merges[i].left + .right
};

struct TrainOptions {
    std::int64_t budget_y = 0;
    std::int64_t min_pair_freq = 2;
    std::string language;
};

// Continued BPE: corpus chunks are encoded with the frozen base first, then
// the most frequent adjacent pair is merged repeatedly. Ties break on the
// lexicographically smallest (left, right) token-string pair. A pair whose
// concatenation would collide with an existing token string is skipped.
LearnedExtension learn_merges(const CorpusCounts& counts, const Tokenizer& base,
                              const TrainOptions& options);

struct LanguageCorpus {
    std::string language;
    std::filesystem::path path;
    std::int64_t budget_y = 0;
};

// One extension per corpus, each against the same frozen base; `jobs` > 1
// trains languages concurrently. Output order matches input order.
std::vector<LearnedExtension> learn_all(const std::vector<LanguageCorpus>& corpora,
                                        const Tokenizer& base, std::int64_t min_pair_freq,
                                        int jobs);

nlohmann::json extension_to_json(const LearnedExtension& ext);
LearnedExtension extension_from_json(const nlohmann::json& j);

}  // namespace tokgraft
