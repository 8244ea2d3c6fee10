#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tokgraft {

using TokenId = std::int32_t;

// GPT-2 style bijection between the 256 byte values and printable code
// points: printable Latin-1 bytes map to themselves, the rest to U+0100+n.
class ByteSymbolMap {
public:
    ByteSymbolMap();

    std::uint32_t symbol_for(std::uint8_t byte) const { return forward_[byte]; }
    const std::string& symbol_utf8(std::uint8_t byte) const { return forward_utf8_[byte]; }
    std::optional<std::uint8_t> byte_for(std::uint32_t cp) const;

    // Raw bytes -> symbol string (the representation token strings use).
    std::string bytes_to_symbols(std::string_view bytes) const;
    // Symbol string -> raw bytes; nullopt if any code point is not a symbol.
    std::optional<std::string> symbols_to_bytes(std::string_view symbols) const;

private:
    std::array<std::uint32_t, 256> forward_;
    std::array<std::string, 256> forward_utf8_;
    std::array<std::int16_t, 512> inverse_;  // symbol cp (< 512) -> byte, -1 if none
};

// Dense id<->string map over ordinary tokens plus named special tokens.
// Ordinary token strings are in byte-symbol space; special strings are the
// literal surface forms (e.g. "<SOT>").
class Vocabulary {
public:
    Vocabulary() = default;

    // entries[i] is the string for ordinary-or-special id i; special_ids flags
    // which ids are specials (their string doubles as the special name).
    static Vocabulary from_entries(std::vector<std::string> strings,
                                   std::vector<bool> is_special,
                                   std::size_t base_size);

    // 256 byte-symbol tokens (ids 0..255) followed by the given specials.
    static Vocabulary byte_level_base(const std::vector<std::string>& specials);

    std::size_t size() const { return strings_.size(); }
    std::size_t base_size() const { return base_size_; }

    bool contains(TokenId id) const {
        return id >= 0 && static_cast<std::size_t>(id) < strings_.size();
    }
    const std::string& string_of(TokenId id) const { return strings_[id]; }
    std::optional<TokenId> id_of(std::string_view token) const;
    bool is_special(TokenId id) const { return contains(id) && special_[id]; }

    // Specials by name (name == surface string).
    std::optional<TokenId> special_id(std::string_view name) const;
    std::vector<std::pair<std::string, TokenId>> specials() const;

    // Appends one ordinary token; throws on duplicates. Used by extension.
    TokenId append_token(std::string token);
    TokenId append_special(std::string name);

    // Checks density, bijectivity and special/ordinary disjointness; throws
    // Error(invalid_vocabulary) on violation.
    void validate() const;

private:
    std::vector<std::string> strings_;
    std::vector<bool> special_;
    std::unordered_map<std::string, TokenId> index_;
    std::size_t base_size_ = 0;
};

struct MergeRule {
    std::string left;
    std::string right;

    bool operator==(const MergeRule&) const = default;
};

// Rank-ordered merge rules; rank = position, lower applies first.
class MergeTable {
public:
    MergeTable() = default;
    explicit MergeTable(std::vector<MergeRule> rules);

    std::size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }
    const MergeRule& rule(std::size_t rank) const { return rules_[rank]; }
    const std::vector<MergeRule>& rules() const { return rules_; }

    bool contains(const MergeRule& rule) const;
    void append(MergeRule rule);  // throws on duplicate pair

    // Every rule's left+right concatenation must name a token; throws
    // Error(invalid_vocabulary) otherwise.
    void validate_against(const Vocabulary& vocab) const;

private:
    std::vector<MergeRule> rules_;
    std::unordered_map<std::string, std::size_t> rank_index_;  // "left\x01right" -> rank

    static std::string key(const MergeRule& rule);
};

}  // namespace tokgraft
