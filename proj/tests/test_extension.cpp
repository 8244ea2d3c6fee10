#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/synth_corpus.hpp"
#include "tokgraft/errors.hpp"
#include "tokgraft/extension.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/trainer.hpp"

using namespace tokgraft;

namespace {

Tokenizer byte_base() {
    return Tokenizer(Vocabulary::byte_level_base(default_base_specials()), MergeTable{});
}

CorpusCounts counts_of(const std::vector<std::string>& lines) {
    std::string joined;
    for (const auto& l : lines) {
        joined += l;
        joined += '\n';
    }
    std::istringstream in(joined);
    return count_corpus(in);
}

LearnedExtension train(const Tokenizer& base, const std::vector<std::string>& lines,
                       const std::string& lang, std::int64_t budget) {
    return learn_merges(counts_of(lines), base,
                        {.budget_y = budget, .min_pair_freq = 2, .language = lang});
}

LearnedExtension synth_ext(const Tokenizer& base, const std::string& lang,
                           std::int64_t budget, unsigned lexicon_seed = 0) {
    testsup::CorpusSpec spec;
    spec.language = lang;
    spec.lexicon_size = 60;
    spec.line_count = 120;
    if (lexicon_seed != 0) {
        spec.lexicon_seed = lexicon_seed;
    }
    return train(base, testsup::make_corpus(spec), lang, budget);
}

}  // namespace

TEST_CASE("extension appends merges ordered by language then rank") {
    Tokenizer base = byte_base();
    LearnedExtension ta = synth_ext(base, "ta", 12);
    LearnedExtension hi = synth_ext(base, "hi", 12);
    REQUIRE(ta.new_merges.size() == 12);
    REQUIRE(hi.new_merges.size() == 12);

    // Passed out of order; grafting sorts hi before ta.
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {ta, hi}, {});
    REQUIRE(r.merges.size() == 24);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(r.merges.rule(i) == hi.new_merges[i]);
        CHECK(r.merges.rule(12 + i) == ta.new_merges[i]);
    }
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(r.manifest.entries[i].language == "hi");
        CHECK(r.manifest.entries[i].source_rank == static_cast<std::int64_t>(i));
    }
    r.vocab.validate();
    r.merges.validate_against(r.vocab);
}

TEST_CASE("extension is conservative over base ids and merges") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 10);
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {hi}, {"<indo>", "<dra>"});
    REQUIRE(r.vocab.size() > base.vocab().size());
    for (std::size_t i = 0; i < base.vocab().size(); ++i) {
        auto id = static_cast<TokenId>(i);
        CHECK(r.vocab.string_of(id) == base.vocab().string_of(id));
        CHECK(r.vocab.is_special(id) == base.vocab().is_special(id));
    }
    CHECK(r.vocab.base_size() == base.vocab().base_size());
    CHECK(r.manifest.base_fingerprint == fingerprint(base.vocab(), base.merges()));
    CHECK(r.manifest.extended_fingerprint == fingerprint(r.vocab, r.merges));
}

TEST_CASE("duplicate tokens across languages keep the first id and record claimants") {
    Tokenizer base = byte_base();
    // Same lexicon seed and script family paths diverge, so force overlap by
    // training two languages on literally the same text.
    std::vector<std::string> lines = {"roto roto kala", "roto kala kala roto"};
    LearnedExtension a = train(base, lines, "hi", 6);
    LearnedExtension b = train(base, lines, "ta", 6);
    REQUIRE(a.new_tokens == b.new_tokens);

    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {a, b}, {});
    // Every token materializes once, owned by "hi" (first language code).
    CHECK(r.manifest.materialized.at("hi") == static_cast<std::int64_t>(a.new_tokens.size()));
    CHECK(r.manifest.materialized.at("ta") == 0);
    CHECK(r.merges.size() == a.new_merges.size());  // duplicate rules not re-added
    for (const auto& e : r.manifest.entries) {
        CHECK(e.language == "hi");
        REQUIRE(e.claimants.size() == 2);
        CHECK(e.claimants[0] == "hi");
        CHECK(e.claimants[1] == "ta");
    }
}

TEST_CASE("merges colliding with base tokens are dropped") {
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    MergeTable m;
    v.append_token("ro");
    m.append({"r", "o"});
    Tokenizer base(std::move(v), std::move(m));

    // Hand-built extension that claims (r,o) again plus one new pair.
    LearnedExtension ext;
    ext.language = "hi";
    ext.budget_y = 2;
    ext.base_fingerprint = fingerprint(base.vocab(), base.merges());
    ext.new_merges = {MergeRule{"r", "o"}, MergeRule{"k", "a"}};
    ext.new_tokens = {"ro", "ka"};

    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {ext}, {});
    CHECK(r.merges.size() == 2);  // base rule + the one new rule
    CHECK(r.manifest.materialized.at("hi") == 1);
    REQUIRE(r.manifest.entries.size() == 1);
    CHECK(r.manifest.entries[0].token == "ka");
}

TEST_CASE("family prompt specials take the final ids") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 8);
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {hi}, {"<indo>", "<dra>"});
    REQUIRE(r.manifest.family_prompt_tokens.size() == 2);
    std::size_t n = r.vocab.size();
    // In input order, occupying the last two ids.
    CHECK(r.manifest.family_prompt_tokens[0].name == "<indo>");
    CHECK(r.manifest.family_prompt_tokens[1].name == "<dra>");
    CHECK(r.manifest.family_prompt_tokens[0].id == static_cast<TokenId>(n - 2));
    CHECK(r.manifest.family_prompt_tokens[1].id == static_cast<TokenId>(n - 1));
    CHECK(r.vocab.is_special(static_cast<TokenId>(n - 1)));
    CHECK(r.vocab.special_id("<indo>").has_value());

    // Ids sit above every learned token.
    for (const auto& e : r.manifest.entries) {
        CHECK(e.id < r.manifest.family_prompt_tokens[0].id);
    }
}

TEST_CASE("extension ids are stable under unrelated additions") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 10);
    LearnedExtension ta = synth_ext(base, "ta", 10);

    ExtendResult only_hi = extend_vocabulary(base.vocab(), base.merges(), {hi}, {});
    ExtendResult both = extend_vocabulary(base.vocab(), base.merges(), {hi, ta}, {});
    // hi sorts first, so its tokens get identical ids in both grafts.
    for (std::size_t i = 0; i < only_hi.manifest.entries.size(); ++i) {
        CHECK(only_hi.manifest.entries[i].token == both.manifest.entries[i].token);
        CHECK(only_hi.manifest.entries[i].id == both.manifest.entries[i].id);
    }
}

TEST_CASE("grafting is deterministic") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 10);
    LearnedExtension ta = synth_ext(base, "ta", 10);
    ExtendResult r1 = extend_vocabulary(base.vocab(), base.merges(), {hi, ta}, {"<indo>", "<dra>"});
    ExtendResult r2 = extend_vocabulary(base.vocab(), base.merges(), {ta, hi}, {"<indo>", "<dra>"});
    CHECK(r1.manifest.extended_fingerprint == r2.manifest.extended_fingerprint);
    CHECK(manifest_to_json(r1.manifest) == manifest_to_json(r2.manifest));
}

TEST_CASE("stale base fingerprint is rejected") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 5);
    hi.base_fingerprint = std::string(64, 'f');
    try {
        extend_vocabulary(base.vocab(), base.merges(), {hi}, {});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::fingerprint_mismatch);
    }

    // An empty fingerprint means "unchecked" and passes.
    hi.base_fingerprint.clear();
    CHECK_NOTHROW(extend_vocabulary(base.vocab(), base.merges(), {hi}, {}));
}

TEST_CASE("eight disjoint languages materialize their full budgets") {
    Tokenizer base = byte_base();
    std::vector<LearnedExtension> exts;
    std::vector<std::string> langs = {"bn", "gu", "hi", "kn", "ml", "mr", "ta", "te"};
    for (const auto& lang : langs) {
        testsup::CorpusSpec spec;
        spec.language = lang;
        spec.lexicon_size = 150;
        spec.line_count = 700;
        LearnedExtension e = train(base, testsup::make_corpus(spec), lang, 250);
        REQUIRE(e.new_merges.size() == 250);
        exts.push_back(std::move(e));
    }
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), exts, {"<indo>", "<dra>"});
    // Scripts are disjoint, so no cross-language duplicates: 8*250 + 2.
    CHECK(r.vocab.size() == base.vocab().size() + 8 * 250 + 2);
    for (const auto& lang : langs) {
        CHECK(r.manifest.budgets.at(lang) == 250);
        CHECK(r.manifest.materialized.at(lang) == 250);
    }
    for (const auto& e : r.manifest.entries) {
        CHECK(e.claimants.size() == 1);
    }

    // Grafting again with the same inputs is idempotent.
    ExtendResult again = extend_vocabulary(base.vocab(), base.merges(), exts, {"<indo>", "<dra>"});
    CHECK(again.manifest.extended_fingerprint == r.manifest.extended_fingerprint);
}

TEST_CASE("extended tokenizer never lengthens encodings") {
    Tokenizer base = byte_base();
    testsup::CorpusSpec spec;
    spec.language = "hi";
    spec.lexicon_size = 80;
    spec.line_count = 200;
    auto lines = testsup::make_corpus(spec);
    LearnedExtension hi = train(base, lines, "hi", 60);
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {hi}, {"<indo>", "<dra>"});
    Tokenizer ext(r.vocab, r.merges);

    spec.sample_seed = 99;  // held-out lines over the same lexicon
    for (const auto& line : testsup::make_corpus(spec)) {
        auto b = base.encode(line);
        auto e = ext.encode(line);
        CHECK(e.size() <= b.size());
        CHECK(ext.decode(e) == line);
    }
}

TEST_CASE("manifest json shape") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 4);
    ExtendResult r = extend_vocabulary(base.vocab(), base.merges(), {hi}, {"<indo>", "<dra>"});
    nlohmann::json j = manifest_to_json(r.manifest);
    CHECK(j.at("budget_y") == 4);  // uniform budgets collapse to one value
    CHECK(j.at("base_fingerprint") == r.manifest.base_fingerprint);
    CHECK(j.at("extended_fingerprint") == r.manifest.extended_fingerprint);
    CHECK(j.at("entries").size() == r.manifest.entries.size());
    CHECK(j.at("family_prompt_tokens").size() == 2);
    CHECK(j.at("budgets").at("hi") == 4);
    CHECK(j.at("materialized").at("hi") == 4);

    LearnedExtension ta = synth_ext(base, "ta", 6);
    ExtendResult mixed = extend_vocabulary(base.vocab(), base.merges(), {hi, ta}, {});
    CHECK(manifest_to_json(mixed.manifest).at("budget_y").is_null());
}

TEST_CASE("unknown merge sides are rejected") {
    Tokenizer base = byte_base();
    LearnedExtension bad;
    bad.language = "hi";
    bad.budget_y = 1;
    bad.new_merges = {MergeRule{"zz", "q"}};  // "zz" is not a token anywhere
    bad.new_tokens = {"zzq"};
    CHECK_THROWS_AS(extend_vocabulary(base.vocab(), base.merges(), {bad}, {}), Error);
}

TEST_CASE("duplicate family prompt names are rejected") {
    Tokenizer base = byte_base();
    LearnedExtension hi = synth_ext(base, "hi", 3);
    CHECK_THROWS_AS(extend_vocabulary(base.vocab(), base.merges(), {hi}, {"<indo>", "<indo>"}),
                    Error);
}
