#include "tokgraft/stats.hpp"

#include <cstdio>
#include <sstream>

#include "tokgraft/errors.hpp"
#include "tokgraft/unicode.hpp"

namespace tokgraft {

namespace {

std::int64_t whitespace_words(const std::string& line) {
    std::int64_t words = 0;
    bool in_word = false;
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::uint32_t cp = 0;
        const std::size_t len = uni::decode_utf8(line, pos, cp);
        if (len == 0) {
            raise(Errc::invalid_utf8, "invalid UTF-8 in stats corpus");
        }
        if (uni::is_space(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
        pos += len;
    }
    return words;
}

}  // namespace

TokenStatsReport reduction_report(std::istream& corpus, const Tokenizer& base,
                                  const Tokenizer& extended) {
    TokenStatsReport report;
    std::string raw;
    std::int64_t line_no = 0;
    double ratio_sum = 0.0;
    std::int64_t ratio_lines = 0;
    while (std::getline(corpus, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') {
            raw.pop_back();
        }
        if (!uni::is_valid_utf8(raw)) {
            raise(Errc::invalid_utf8, "invalid UTF-8 on line " + std::to_string(line_no));
        }
        const std::string line = uni::to_nfc(raw);
        LineStat stat;
        stat.line_no = line_no;
        stat.base_tokens = static_cast<std::int64_t>(base.encode(line).size());
        stat.ext_tokens = static_cast<std::int64_t>(extended.encode(line).size());
        if (stat.base_tokens > 0) {
            stat.reduction = static_cast<double>(stat.ext_tokens) /
                             static_cast<double>(stat.base_tokens);
            ratio_sum += stat.reduction;
            ++ratio_lines;
        }
        report.base_total += stat.base_tokens;
        report.ext_total += stat.ext_tokens;
        report.word_total += whitespace_words(line);
        report.char_total += static_cast<std::int64_t>(uni::to_codepoints(line).size());
        report.lines.push_back(stat);
    }
    if (ratio_lines > 0) {
        report.mean_reduction_ratio = ratio_sum / static_cast<double>(ratio_lines);
        report.mean_reduction_percent = 100.0 * (1.0 - report.mean_reduction_ratio);
    }
    return report;
}

nlohmann::json stats_to_json(const TokenStatsReport& report) {
    auto per = [](std::int64_t tokens, std::int64_t denom) {
        return denom > 0 ? static_cast<double>(tokens) / static_cast<double>(denom) : 0.0;
    };
    return {
        {"lines", static_cast<std::int64_t>(report.lines.size())},
        {"base_total", report.base_total},
        {"ext_total", report.ext_total},
        {"mean_reduction_ratio", report.mean_reduction_ratio},
        {"mean_reduction_percent", report.mean_reduction_percent},
        {"fertility",
         {
             {"base_tokens_per_word", per(report.base_total, report.word_total)},
             {"ext_tokens_per_word", per(report.ext_total, report.word_total)},
             {"base_tokens_per_char", per(report.base_total, report.char_total)},
             {"ext_tokens_per_char", per(report.ext_total, report.char_total)},
         }},
        // Table-style generated-token counts for orientation, not assertions:
        // English 4 -> 4, Hindi 27 -> 19, Malayalam 79 -> 31.
        {"reference_points",
         {
             {"en", {4, 4}},
             {"hi", {27, 19}},
             {"ml", {79, 31}},
         }},
    };
}

std::string stats_to_csv(const TokenStatsReport& report) {
    std::string out = "line_no,base_tokens,ext_tokens,reduction\n";
    char buf[96];
    for (const LineStat& stat : report.lines) {
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%lld,%.6f\n",
                      static_cast<long long>(stat.line_no),
                      static_cast<long long>(stat.base_tokens),
                      static_cast<long long>(stat.ext_tokens), stat.reduction);
        out += buf;
    }
    return out;
}

}  // namespace tokgraft
