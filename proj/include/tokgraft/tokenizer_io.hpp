#pragma once

#include <filesystem>
#include <string>

#include "tokgraft/bpe.hpp"
#include "tokgraft/vocabulary.hpp"

namespace tokgraft {

// On-disk layout of a tokenizer directory:
//   vocab.json         flat token-string -> id map, GPT-2 style
//   merges.txt         one "left right" rule per line, rank = line order,
//                      optional leading "#version" line
//   added_tokens.json  array of {"name", "id", "special": true} marking specials
struct TokenizerFiles {
    Vocabulary vocab;
    MergeTable merges;
};

TokenizerFiles load_tokenizer_dir(const std::filesystem::path& dir);
void save_tokenizer_dir(const std::filesystem::path& dir, const Vocabulary& vocab,
                        const MergeTable& merges);

Vocabulary load_vocab_json(const std::filesystem::path& vocab_path,
                           const std::filesystem::path& added_tokens_path);
MergeTable load_merges_txt(const std::filesystem::path& path);

// Specials the shipped base carries: sequence markers, the nine language
// tags, and the task/timestamp controls.
const std::vector<std::string>& default_base_specials();

std::string fingerprint(const Vocabulary& vocab, const MergeTable& merges);

}  // namespace tokgraft
