#include "tokgraft/bpe.hpp"

#include <algorithm>
#include <limits>

#include "tokgraft/errors.hpp"
#include "tokgraft/unicode.hpp"

namespace tokgraft {

namespace {

constexpr std::uint32_t kNoRank = std::numeric_limits<std::uint32_t>::max();

std::uint64_t pack_pair(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct CpView {
    std::vector<std::uint32_t> cps;
    std::vector<std::size_t> offs;  // offs[i] = byte offset of cps[i]; offs[size] = length
};

CpView scan_codepoints(std::string_view text) {
    CpView v;
    v.cps.reserve(text.size());
    v.offs.reserve(text.size() + 1);
    std::size_t pos = 0;
    std::uint32_t cp;
    while (pos < text.size()) {
        std::size_t n = uni::decode_utf8(text, pos, cp);
        if (n == 0) {
            raise(Errc::invalid_utf8, "invalid UTF-8 at byte offset " + std::to_string(pos));
        }
        v.offs.push_back(pos);
        v.cps.push_back(cp);
        pos += n;
    }
    v.offs.push_back(text.size());
    return v;
}

bool is_word_char(std::uint32_t cp) { return uni::is_letter(cp) || uni::is_mark(cp); }

// Length in code points of a contraction suffix starting at i ('s 't 're
// 've 'm 'll 'd, lowercase as in GPT-2), or 0.
std::size_t contraction_len(const std::vector<std::uint32_t>& cps, std::size_t i) {
    if (cps[i] != '\'' || i + 1 >= cps.size()) {
        return 0;
    }
    const std::uint32_t c1 = cps[i + 1];
    if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') {
        return 2;
    }
    if (i + 2 < cps.size()) {
        const std::uint32_t c2 = cps[i + 2];
        if ((c1 == 'l' && c2 == 'l') || (c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e')) {
            return 3;
        }
    }
    return 0;
}

// Next chunk boundary in code-point index space.
std::size_t next_chunk_end(const std::vector<std::uint32_t>& cps, std::size_t start) {
    const std::size_t n = cps.size();

    if (std::size_t cl = contraction_len(cps, start)) {
        return start + cl;
    }

    // " ?<letter>(<letter>|<mark>)*"
    {
        std::size_t p = start;
        if (cps[p] == ' ' && p + 1 < n) {
            ++p;
        }
        if (uni::is_letter(cps[p])) {
            ++p;
            while (p < n && is_word_char(cps[p])) {
                ++p;
            }
            return p;
        }
    }

    // " ?<number>+"
    {
        std::size_t p = start;
        if (cps[p] == ' ' && p + 1 < n) {
            ++p;
        }
        if (uni::is_number(cps[p])) {
            ++p;
            while (p < n && uni::is_number(cps[p])) {
                ++p;
            }
            return p;
        }
    }

    // " ?[^\s L N]+" (punctuation and stray marks)
    {
        std::size_t p = start;
        if (cps[p] == ' ' && p + 1 < n) {
            ++p;
        }
        std::size_t run_start = p;
        while (p < n && !uni::is_space(cps[p]) && !uni::is_letter(cps[p]) &&
               !uni::is_number(cps[p])) {
            ++p;
        }
        if (p > run_start) {
            return p;
        }
    }

    // Whitespace: a run keeps its last character for the following chunk
    // unless it reaches end of input.
    if (uni::is_space(cps[start])) {
        std::size_t p = start;
        while (p < n && uni::is_space(cps[p])) {
            ++p;
        }
        if (p == n || p - start == 1) {
            return p;
        }
        return p - 1;
    }

    return start + 1;
}

}  // namespace

std::vector<std::string> pretokenize(std::string_view text) {
    std::vector<std::string> chunks;
    const CpView v = scan_codepoints(text);
    std::size_t i = 0;
    while (i < v.cps.size()) {
        const std::size_t end = next_chunk_end(v.cps, i);
        chunks.emplace_back(text.substr(v.offs[i], v.offs[end] - v.offs[i]));
        i = end;
    }
    return chunks;
}

Tokenizer::Tokenizer(Vocabulary vocab, MergeTable merges)
    : vocab_(std::move(vocab)), merges_(std::move(merges)) {
    vocab_.validate();
    merges_.validate_against(vocab_);

    for (int b = 0; b < 256; ++b) {
        auto id = vocab_.id_of(bytes_.symbol_utf8(static_cast<std::uint8_t>(b)));
        if (!id || vocab_.is_special(*id)) {
            raise(Errc::invalid_vocabulary,
                  "vocabulary lacks byte token for value " + std::to_string(b));
        }
        byte_token_[b] = *id;
    }

    merge_index_.reserve(merges_.size() * 2);
    for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
        const auto& r = merges_.rule(rank);
        auto left = vocab_.id_of(r.left);
        auto right = vocab_.id_of(r.right);
        auto merged = vocab_.id_of(r.left + r.right);
        if (!left || !right || !merged) {
            raise(Errc::invalid_vocabulary,
                  "merge rule references unknown token: " + r.left + " " + r.right);
        }
        merge_index_.emplace(pack_pair(*left, *right),
                             std::make_pair(static_cast<std::uint32_t>(rank), *merged));
    }

    decoded_.resize(vocab_.size());
    for (std::size_t id = 0; id < vocab_.size(); ++id) {
        const auto tid = static_cast<TokenId>(id);
        if (vocab_.is_special(tid)) {
            decoded_[id] = vocab_.string_of(tid);
            continue;
        }
        auto raw = bytes_.symbols_to_bytes(vocab_.string_of(tid));
        if (!raw) {
            raise(Errc::invalid_vocabulary,
                  "ordinary token is not a byte-symbol string: " + vocab_.string_of(tid));
        }
        decoded_[id] = std::move(*raw);
    }

    for (const auto& [name, id] : vocab_.specials()) {
        specials_by_length_.emplace_back(name, id);
    }
    std::sort(specials_by_length_.begin(), specials_by_length_.end(),
              [](const auto& a, const auto& b) {
                  if (a.first.size() != b.first.size()) {
                      return a.first.size() > b.first.size();
                  }
                  return a.first < b.first;
              });
}

void Tokenizer::encode_chunk_into(std::string_view chunk, std::vector<TokenId>& out) const {
    std::vector<TokenId> ids;
    ids.reserve(chunk.size());
    for (char c : chunk) {
        ids.push_back(byte_token_[static_cast<std::uint8_t>(c)]);
    }

    // Rank of the pair starting at each position; refreshed around each merge.
    std::vector<std::uint32_t> ranks(ids.size(), kNoRank);
    auto rank_at = [&](std::size_t i) -> std::uint32_t {
        auto it = merge_index_.find(pack_pair(ids[i], ids[i + 1]));
        return it == merge_index_.end() ? kNoRank : it->second.first;
    };
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        ranks[i] = rank_at(i);
    }

    std::size_t count = ids.size();
    while (count > 1) {
        std::uint32_t best = kNoRank;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
            if (ranks[i] < best) {  // strict: ties resolve to the leftmost
                best = ranks[i];
                best_i = i;
            }
        }
        if (best == kNoRank) {
            break;
        }
        ids[best_i] = merge_index_.at(pack_pair(ids[best_i], ids[best_i + 1])).second;
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(best_i) + 1);
        ranks.erase(ranks.begin() + static_cast<std::ptrdiff_t>(best_i) + 1);
        --count;
        if (best_i + 1 < count) {
            ranks[best_i] = rank_at(best_i);
        } else {
            ranks[best_i] = kNoRank;
        }
        if (best_i > 0) {
            ranks[best_i - 1] = rank_at(best_i - 1);
        }
    }
    out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
}

std::vector<TokenId> Tokenizer::encode_chunk(std::string_view chunk) const {
    std::vector<TokenId> out;
    encode_chunk_into(chunk, out);
    return out;
}

void Tokenizer::encode_segment_into(std::string_view segment, std::vector<TokenId>& out) const {
    for (const auto& chunk : pretokenize(segment)) {
        encode_chunk_into(chunk, out);
    }
}

std::vector<TokenId> Tokenizer::encode(std::string_view text, SpecialHandling specials) const {
    std::vector<TokenId> out;
    out.reserve(text.size() / 3 + 1);
    if (specials == SpecialHandling::ignore || specials_by_length_.empty()) {
        encode_segment_into(text, out);
        return out;
    }

    std::size_t segment_start = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        TokenId matched = -1;
        std::size_t matched_len = 0;
        for (const auto& [name, id] : specials_by_length_) {
            if (name.size() <= text.size() - pos &&
                text.compare(pos, name.size(), name) == 0) {
                matched = id;
                matched_len = name.size();
                break;
            }
        }
        if (matched >= 0) {
            if (pos > segment_start) {
                encode_segment_into(text.substr(segment_start, pos - segment_start), out);
            }
            out.push_back(matched);
            pos += matched_len;
            segment_start = pos;
        } else {
            ++pos;
        }
    }
    if (segment_start < text.size()) {
        encode_segment_into(text.substr(segment_start), out);
    }
    return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids, DecodeMode mode) const {
    std::string raw;
    for (TokenId id : ids) {
        if (!vocab_.contains(id)) {
            raise(Errc::unknown_token_id, "unknown token id " + std::to_string(id));
        }
        raw += decoded_[static_cast<std::size_t>(id)];
    }
    if (uni::is_valid_utf8(raw)) {
        return raw;
    }
    if (mode == DecodeMode::strict) {
        raise(Errc::invalid_byte_sequence, "decoded bytes are not valid UTF-8");
    }
    // Lossy: each offending byte becomes U+FFFD.
    std::string repaired;
    repaired.reserve(raw.size());
    std::size_t pos = 0;
    std::uint32_t cp;
    while (pos < raw.size()) {
        std::size_t n = uni::decode_utf8(raw, pos, cp);
        if (n == 0) {
            repaired += "\xEF\xBF\xBD";
            ++pos;
        } else {
            repaired.append(raw, pos, n);
            pos += n;
        }
    }
    return repaired;
}

}  // namespace tokgraft
