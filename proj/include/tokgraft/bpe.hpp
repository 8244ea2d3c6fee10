#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokgraft/vocabulary.hpp"

namespace tokgraft {

// GPT-2 style chunking (contractions, letter runs, digit runs, punctuation
// runs, whitespace), with letter runs extended to keep combining marks
// attached so Indic matras never split from their consonants. Chunks
// concatenate back to the input exactly. Throws Error(invalid_utf8).
std::vector<std::string> pretokenize(std::string_view text);

enum class SpecialHandling {
    ignore,  // special surface strings are ordinary text (default)
    parse,   // whole-string match specials and emit their ids
};

enum class DecodeMode {
    strict,  // invalid UTF-8 from reassembled bytes is an error
    lossy,   // invalid sequences become U+FFFD
};

// Immutable encode/decode engine over a vocabulary and merge table; pure
// functions, safe to share across threads.
class Tokenizer {
public:
    Tokenizer(Vocabulary vocab, MergeTable merges);

    std::vector<TokenId> encode(std::string_view text,
                                SpecialHandling specials = SpecialHandling::ignore) const;

    // Greedy rank-ordered BPE over a single pre-token chunk.
    std::vector<TokenId> encode_chunk(std::string_view chunk) const;

    std::string decode(std::span<const TokenId> ids,
                       DecodeMode mode = DecodeMode::strict) const;

    std::size_t token_count(std::string_view text) const { return encode(text).size(); }

    const Vocabulary& vocab() const { return vocab_; }
    const MergeTable& merges() const { return merges_; }
    const ByteSymbolMap& byte_symbols() const { return bytes_; }

private:
    void encode_chunk_into(std::string_view chunk, std::vector<TokenId>& out) const;
    void encode_segment_into(std::string_view segment, std::vector<TokenId>& out) const;

    Vocabulary vocab_;
    MergeTable merges_;
    ByteSymbolMap bytes_;
    std::array<TokenId, 256> byte_token_{};
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, TokenId>> merge_index_;
    std::vector<std::string> decoded_;  // per-id raw bytes (specials keep their name)
    std::vector<std::pair<std::string, TokenId>> specials_by_length_;
};

}  // namespace tokgraft
