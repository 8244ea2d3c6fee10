#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokgraft/bpe.hpp"

namespace tokgraft {

struct LineStat {
    std::int64_t line_no = 0;
    std::int64_t base_tokens = 0;
    std::int64_t ext_tokens = 0;
    double reduction = 1.0;  // ext/base ratio; 1.0 means unchanged
};

struct TokenStatsReport {
    std::vector<LineStat> lines;
    std::int64_t base_total = 0;
    std::int64_t ext_total = 0;
    std::int64_t word_total = 0;
    std::int64_t char_total = 0;
    double mean_reduction_ratio = 1.0;   // mean over nonempty lines of ext/base
    double mean_reduction_percent = 0.0; // 100 * (1 - mean ratio)
};

// Encodes every line with both tokenizers (after NFC, matching ingestion).
TokenStatsReport reduction_report(std::istream& corpus, const Tokenizer& base,
                                  const Tokenizer& extended);

// Aggregate JSON including fertility and fixed per-language token-count
// reference points; per-line data goes to CSV
// (line_no,base_tokens,ext_tokens,reduction).
nlohmann::json stats_to_json(const TokenStatsReport& report);
std::string stats_to_csv(const TokenStatsReport& report);

}  // namespace tokgraft
