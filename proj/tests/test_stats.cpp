#include <sstream>
#include <string>

#include "doctest.h"
#include "tokgraft/errors.hpp"
#include "tokgraft/stats.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/trainer.hpp"

using namespace tokgraft;

namespace {

Tokenizer byte_base() {
    return Tokenizer(Vocabulary::byte_level_base(default_base_specials()), MergeTable{});
}

Tokenizer extend_on(const Tokenizer& base, const std::vector<std::string>& lines,
                    std::int64_t budget) {
    std::string joined;
    for (const auto& l : lines) {
        joined += l + "\n";
    }
    std::istringstream in(joined);
    CorpusCounts c = count_corpus(in);
    LearnedExtension ext =
        learn_merges(c, base, {.budget_y = budget, .min_pair_freq = 2, .language = "xx"});
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    MergeTable m;
    for (std::size_t i = 0; i < ext.new_merges.size(); ++i) {
        v.append_token(ext.new_tokens[i]);
        m.append(ext.new_merges[i]);
    }
    return Tokenizer(std::move(v), std::move(m));
}

}  // namespace

TEST_CASE("identical tokenizers give ratio one") {
    Tokenizer base = byte_base();
    std::istringstream corpus("I love my country\nso be it\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    REQUIRE(r.lines.size() == 2);
    for (const auto& line : r.lines) {
        CHECK(line.base_tokens == line.ext_tokens);
        CHECK(line.reduction == doctest::Approx(1.0));
    }
    CHECK(r.mean_reduction_ratio == doctest::Approx(1.0));
    CHECK(r.mean_reduction_percent == doctest::Approx(0.0));
    CHECK(r.base_total == r.ext_total);
}

TEST_CASE("line accounting covers words chars and totals") {
    Tokenizer base = byte_base();
    std::istringstream corpus("ab cd\nxyz\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    REQUIRE(r.lines.size() == 2);
    CHECK(r.lines[0].line_no == 1);
    CHECK(r.lines[1].line_no == 2);
    CHECK(r.lines[0].base_tokens == 5);  // byte per char
    CHECK(r.lines[1].base_tokens == 3);
    CHECK(r.word_total == 3);
    CHECK(r.char_total == 8);  // codepoints, excluding newlines
    CHECK(r.base_total == 8);
}

TEST_CASE("extension shrinks counts and the report notices") {
    Tokenizer base = byte_base();
    std::vector<std::string> lines = {"roto kala roto", "kala roto kala"};
    Tokenizer ext = extend_on(base, lines, 30);

    std::istringstream corpus("roto kala\nkala kala roto\n");
    TokenStatsReport r = reduction_report(corpus, base, ext);
    for (const auto& line : r.lines) {
        CHECK(line.ext_tokens < line.base_tokens);
        CHECK(line.reduction < 1.0);
        CHECK(line.reduction > 0.0);
    }
    CHECK(r.mean_reduction_ratio < 1.0);
    CHECK(r.mean_reduction_percent > 0.0);
    CHECK(r.ext_total < r.base_total);
}

TEST_CASE("empty lines are kept but excluded from the mean") {
    Tokenizer base = byte_base();
    std::istringstream corpus("ab\n\ncd\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    REQUIRE(r.lines.size() == 3);
    CHECK(r.lines[1].base_tokens == 0);
    CHECK(r.mean_reduction_ratio == doctest::Approx(1.0));
}

TEST_CASE("nfc is applied before encoding") {
    Tokenizer base = byte_base();
    // Decomposed input: 6 codepoints, but NFC composes to 5 before encoding.
    std::istringstream corpus("cafe\xCC\x81 x\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    REQUIRE(r.lines.size() == 1);
    CHECK(r.lines[0].base_tokens == 7);  // c a f é(2 bytes) space x
}

TEST_CASE("stats json carries fertility and reference points") {
    Tokenizer base = byte_base();
    std::istringstream corpus("some words for the report\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    nlohmann::json j = stats_to_json(r);
    CHECK(j.at("lines") == 1);
    CHECK(j.at("base_total") == r.base_total);
    CHECK(j.at("ext_total") == r.ext_total);
    CHECK(j.at("mean_reduction_ratio").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("mean_reduction_percent").get<double>() == doctest::Approx(0.0));
    CHECK(j.at("fertility").at("base_tokens_per_word").get<double>() > 0.0);
    CHECK(j.at("fertility").at("ext_tokens_per_word").get<double>() > 0.0);
    auto ref = j.at("reference_points");
    CHECK(ref.at("en")[0] == 4);
    CHECK(ref.at("en")[1] == 4);
    CHECK(ref.at("hi")[0] == 27);
    CHECK(ref.at("hi")[1] == 19);
    CHECK(ref.at("ml")[0] == 79);
    CHECK(ref.at("ml")[1] == 31);
}

TEST_CASE("csv has a header and one row per line") {
    Tokenizer base = byte_base();
    std::istringstream corpus("ab\ncd\n");
    TokenStatsReport r = reduction_report(corpus, base, base);
    std::string csv = stats_to_csv(r);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "line_no,base_tokens,ext_tokens,reduction");
    std::string row;
    int rows = 0;
    while (std::getline(in, row)) {
        if (!row.empty()) {
            ++rows;
        }
    }
    CHECK(rows == 2);
    CHECK(csv.find("1,2,2,1.000000") != std::string::npos);
}

TEST_CASE("invalid utf8 lines raise with their line number") {
    Tokenizer base = byte_base();
    std::istringstream corpus("fine\nbad \xFF\n");
    CHECK_THROWS_AS(reduction_report(corpus, base, base), Error);
}
