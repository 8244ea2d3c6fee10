// Acceptance gate: one line per criterion, each with pinned tolerances and a
// runtime budget. Exit 0 only when all nine pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracle_trainer.hpp"
#include "support/synth_corpus.hpp"
#include "tokgraft/decoder.hpp"
#include "tokgraft/extension.hpp"
#include "tokgraft/json_util.hpp"
#include "tokgraft/kernels.hpp"
#include "tokgraft/prompt.hpp"
#include "tokgraft/stats.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/trainer.hpp"

using namespace tokgraft;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int number;
    std::string label;
    double limit_seconds;
    std::function<bool(std::string&)> run;  // fills a failure reason
};

std::string env_or_fail(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr) {
        std::cerr << "environment variable missing: " << name << "\n";
        std::exit(2);
    }
    return v;
}

fs::path workspace() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "tokgraft_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CorpusCounts counts_of_lines(const std::vector<std::string>& lines) {
    std::istringstream in(testsup::join_lines(lines));
    return count_corpus(in);
}

Tokenizer load_base_tokenizer() {
    TokenizerFiles f = load_tokenizer_dir(env_or_fail("TOKGRAFT_BASE_DIR"));
    return Tokenizer(std::move(f.vocab), std::move(f.merges));
}

Tokenizer graft(const Tokenizer& base, const std::vector<LearnedExtension>& exts,
                ExtensionManifest* manifest_out = nullptr) {
    ExtendResult r =
        extend_vocabulary(base.vocab(), base.merges(), exts, {"<indo>", "<dra>"});
    if (manifest_out != nullptr) {
        *manifest_out = r.manifest;
    }
    return Tokenizer(std::move(r.vocab), std::move(r.merges));
}

LearnedExtension train_on(const Tokenizer& base, const std::vector<std::string>& lines,
                          const std::string& lang, std::int64_t budget) {
    return learn_merges(counts_of_lines(lines), base,
                        {.budget_y = budget, .min_pair_freq = 2, .language = lang});
}

int run_cli(const std::string& args) {
    std::string cmd = env_or_fail("TOKGRAFT_CLI") + (" " + args);
    int status = std::system(cmd.c_str());
#ifdef _WIN32
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- criterion 1

bool criterion_english_baseline(std::string& why) {
    Tokenizer base = load_base_tokenizer();
    const std::string sentence = "I love my country";
    std::vector<TokenId> before = base.encode(sentence);
    if (before.size() != 4) {
        why = "base encodes to " + std::to_string(before.size()) + " tokens, want 4";
        return false;
    }
    if (base.decode(before) != sentence) {
        why = "base decode mismatch";
        return false;
    }

    testsup::CorpusSpec spec;
    spec.language = "hi";
    spec.lexicon_size = 60;
    spec.line_count = 150;
    Tokenizer extended =
        graft(base, {train_on(base, testsup::make_corpus(spec), "hi", 50)});
    std::vector<TokenId> after = extended.encode(sentence);
    if (after.size() != 4) {
        why = "extended encodes to " + std::to_string(after.size()) + " tokens, want 4";
        return false;
    }
    if (after != before) {
        why = "token ids changed after extension";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_roundtrip(std::string& why) {
    Tokenizer base = load_base_tokenizer();
    testsup::CorpusSpec spec;
    spec.language = "ml";
    spec.lexicon_size = 50;
    spec.line_count = 120;
    Tokenizer extended =
        graft(base, {train_on(base, testsup::make_corpus(spec), "ml", 40)});

    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        std::string s = testsup::random_unicode_string(seed);
        if (base.decode(base.encode(s)) != s) {
            why = "base roundtrip failed on seed " + std::to_string(seed);
            return false;
        }
        if (extended.decode(extended.encode(s)) != s) {
            why = "extended roundtrip failed on seed " + std::to_string(seed);
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_oracle(std::string& why) {
    Tokenizer base(Vocabulary::byte_level_base(default_base_specials()), MergeTable{});
    const std::vector<std::string> langs = {"hi", "ta", "ml", "bn"};
    for (int i = 0; i < 20; ++i) {
        testsup::CorpusSpec spec;
        spec.language = langs[i % langs.size()];
        spec.lexicon_size = 10;
        spec.line_count = 25;
        spec.lexicon_seed = 300 + i;
        spec.sample_seed = 7000 + i;
        CorpusCounts counts = counts_of_lines(testsup::make_corpus(spec));
        if (counts.word_freqs.size() > 50) {
            why = "corpus " + std::to_string(i) + " has " +
                  std::to_string(counts.word_freqs.size()) + " distinct chunks, want <= 50";
            return false;
        }
        TrainOptions opt{.budget_y = 30, .min_pair_freq = 2, .language = spec.language};
        LearnedExtension fast = learn_merges(counts, base, opt);
        LearnedExtension slow = testsup::oracle_learn_merges(counts, base, opt);
        if (fast.new_merges != slow.new_merges || fast.new_tokens != slow.new_tokens) {
            why = "merge sequence diverges from the oracle on corpus " + std::to_string(i);
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_reduction(std::string& why) {
    Tokenizer base = load_base_tokenizer();
    testsup::CorpusSpec train_spec;
    train_spec.language = "hi";
    train_spec.lexicon_size = 700;
    train_spec.line_count = 4000;
    train_spec.sample_seed = 1;
    LearnedExtension ext = train_on(base, testsup::make_corpus(train_spec), "hi", 250);
    if (ext.new_merges.size() != 250) {
        why = "training materialized " + std::to_string(ext.new_merges.size()) +
              " merges, want 250";
        return false;
    }
    Tokenizer extended = graft(base, {ext});

    testsup::CorpusSpec held = train_spec;
    held.sample_seed = 2;  // same lexicon, disjoint sentences
    held.line_count = 5000;
    std::istringstream corpus(testsup::join_lines(testsup::make_corpus(held)));
    TokenStatsReport report = reduction_report(corpus, base, extended);
    if (report.lines.size() < 5000) {
        why = "held-out corpus too small";
        return false;
    }
    for (const LineStat& line : report.lines) {
        if (line.ext_tokens > line.base_tokens) {
            why = "line " + std::to_string(line.line_no) + " grew from " +
                  std::to_string(line.base_tokens) + " to " + std::to_string(line.ext_tokens);
            return false;
        }
    }
    if (report.mean_reduction_percent < 15.0) {
        why = "mean reduction " + std::to_string(report.mean_reduction_percent) +
              "% is below 15%";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_budget_sweep(std::string& why) {
    Tokenizer base = load_base_tokenizer();
    testsup::CorpusSpec train_spec;
    train_spec.language = "hi";
    train_spec.lexicon_size = 700;
    train_spec.line_count = 4000;
    train_spec.sample_seed = 11;
    std::vector<std::string> train_lines = testsup::make_corpus(train_spec);
    CorpusCounts counts = counts_of_lines(train_lines);

    testsup::CorpusSpec held = train_spec;
    held.sample_seed = 12;
    held.line_count = 1500;
    const std::string held_text = testsup::join_lines(testsup::make_corpus(held));

    const std::vector<std::int64_t> budgets = {1000, 500, 250, 125};
    std::vector<double> reductions;
    for (std::int64_t y : budgets) {
        LearnedExtension ext = learn_merges(
            counts, base, {.budget_y = y, .min_pair_freq = 2, .language = "hi"});
        ExtensionManifest manifest;
        Tokenizer extended = graft(base, {ext}, &manifest);
        if (manifest.materialized.at("hi") > y) {
            why = "y=" + std::to_string(y) + " materialized " +
                  std::to_string(manifest.materialized.at("hi")) + " tokens";
            return false;
        }
        std::istringstream corpus(held_text);
        TokenStatsReport report = reduction_report(corpus, base, extended);
        reductions.push_back(report.mean_reduction_percent);
    }

    // Reduction must not grow as the budget shrinks; one dedup-driven
    // violation across the sweep is tolerated but flagged.
    int violations = 0;
    for (std::size_t i = 1; i < reductions.size(); ++i) {
        if (reductions[i] > reductions[i - 1] + 1e-9) {
            ++violations;
            std::cout << "  note: sweep violation, y=" << budgets[i] << " reduces "
                      << reductions[i] << "% vs " << reductions[i - 1] << "% at y="
                      << budgets[i - 1] << "\n";
        }
    }
    if (violations > 1) {
        why = std::to_string(violations) + " monotonicity violations, at most 1 allowed";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_head_expansion(std::string& why) {
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<std::size_t> vocab_dist(4, 600);
    std::uniform_int_distribution<std::size_t> hidden_dist(4, 96);
    std::uniform_real_distribution<float> hidden_val(-1.0f, 1.0f);

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t vocab = vocab_dist(rng);
        const std::size_t hidden = hidden_dist(rng);
        TokenHead head = random_head(vocab, hidden, rng());
        std::vector<float> h(hidden);
        for (auto& x : h) {
            x = hidden_val(rng);
        }
        std::vector<float> logits_before(vocab);
        kern::ops().matvec(head.weights.data(), h.data(), logits_before.data(), vocab, hidden);
        for (std::size_t r = 0; r < vocab; ++r) {
            logits_before[r] += head.bias[r];
        }

        for (std::size_t k : {std::size_t{1}, std::size_t{250}, std::size_t{2002}}) {
            TokenHead big = expand_head(head, k, rng());
            std::vector<float> logits_after(big.vocab_size);
            kern::ops().matvec(big.weights.data(), h.data(), logits_after.data(),
                               big.vocab_size, hidden);
            for (std::size_t r = 0; r < big.vocab_size; ++r) {
                logits_after[r] += big.bias[r];
            }
            if (std::memcmp(logits_before.data(), logits_after.data(),
                            vocab * sizeof(float)) != 0) {
                why = "old-token logits changed (vocab=" + std::to_string(vocab) +
                      ", k=" + std::to_string(k) + ")";
                return false;
            }
            std::vector<float> probs(big.vocab_size);
            kern::softmax(logits_after.data(), probs.data(), big.vocab_size);
            double sum = 0.0;
            for (float p : probs) {
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                why = "softmax sums to " + std::to_string(sum);
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_decode_cost(std::string& why) {
    BenchConfig cfg;
    cfg.vocab_size = 2048;
    cfg.hidden_dim = 256;
    cfg.num_layers = 4;
    cfg.seed = 7;
    cfg.n_values = {32, 64, 128, 256, 512};
    cfg.runs = 3;
    cfg.warmup = 1;
    const std::vector<TokenId> prompt = {1, 2, 3};

    BenchRun bench = run_benchmark(cfg, prompt);
    if (bench.fit.r_squared < 0.95) {
        why = "fit r^2 = " + std::to_string(bench.fit.r_squared) + ", want >= 0.95";
        return false;
    }

    // Measured 79-vs-31 ratio, median of three timed runs each.
    TokenHead head = random_head(cfg.vocab_size, cfg.hidden_dim, cfg.seed);
    auto median_ms = [&](std::int64_t n) {
        std::vector<double> runs;
        for (int r = 0; r < 4; ++r) {
            ToyDecoder decoder(
                {.hidden_dim = cfg.hidden_dim, .num_layers = cfg.num_layers, .rng_seed = 8},
                head);
            double ms = measure_decode_ms(decoder, prompt, n);
            if (r > 0) {  // first run is warmup
                runs.push_back(ms);
            }
        }
        std::sort(runs.begin(), runs.end());
        return runs[runs.size() / 2];
    };
    const double t79 = median_ms(79);
    const double t31 = median_ms(31);
    const double ratio = t79 / t31;
    const double lo = 0.8 * (79.0 / 31.0);
    const double hi = 1.2 * (79.0 / 31.0) * (79.0 / 31.0);
    std::cout << "  note: measured 79v31 ratio " << ratio << ", bounds [" << lo << ", " << hi
              << "], fit r^2 " << bench.fit.r_squared << "\n";
    if (ratio < lo || ratio > hi) {
        why = "ratio " + std::to_string(ratio) + " outside [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_prompts(std::string& why) {
    Tokenizer base = load_base_tokenizer();
    testsup::CorpusSpec spec;
    spec.language = "hi";
    spec.lexicon_size = 40;
    spec.line_count = 80;
    Tokenizer extended =
        graft(base, {train_on(base, testsup::make_corpus(spec), "hi", 20)});
    LanguageFamilyMap map = LanguageFamilyMap::defaults();

    const std::vector<std::pair<std::string, std::string>> golden = {
        {"hi", "<SOTP><indo><SOT><|hi|><|transcribe|><|notimestamps|>"},
        {"gu", "<SOTP><indo><SOT><|gu|><|transcribe|><|notimestamps|>"},
        {"mr", "<SOTP><indo><SOT><|mr|><|transcribe|><|notimestamps|>"},
        {"bn", "<SOTP><indo><SOT><|bn|><|transcribe|><|notimestamps|>"},
        {"ta", "<SOTP><dra><SOT><|ta|><|transcribe|><|notimestamps|>"},
        {"te", "<SOTP><dra><SOT><|te|><|transcribe|><|notimestamps|>"},
        {"kn", "<SOTP><dra><SOT><|kn|><|transcribe|><|notimestamps|>"},
        {"ml", "<SOTP><dra><SOT><|ml|><|transcribe|><|notimestamps|>"},
    };

    std::map<std::string, TokenId> family_token_of_lang;
    for (const auto& [lang, want] : golden) {
        PromptSequence p =
            build_prompt(lang, "transcribe", false, extended.vocab(), map, true);
        std::string got = render_prompt(p, extended.vocab());
        if (got != want) {
            why = lang + " prompt is \"" + got + "\"";
            return false;
        }
        if (!p.family_prompt.has_value()) {
            why = lang + " prompt lacks a family slot";
            return false;
        }
        family_token_of_lang[lang] = p.ids[*p.family_prompt];
    }

    const std::vector<std::string> indo = {"hi", "gu", "mr", "bn"};
    const std::vector<std::string> dra = {"ta", "te", "kn", "ml"};
    for (const auto& lang : indo) {
        if (family_token_of_lang[lang] != family_token_of_lang["hi"]) {
            why = "indo family token differs for " + lang;
            return false;
        }
    }
    for (const auto& lang : dra) {
        if (family_token_of_lang[lang] != family_token_of_lang["ta"]) {
            why = "dra family token differs for " + lang;
            return false;
        }
    }
    if (family_token_of_lang["hi"] == family_token_of_lang["ta"]) {
        why = "indo and dra share one family token";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_determinism(std::string& why) {
    fs::path root = workspace() / "determinism";
    fs::create_directories(root);
    testsup::CorpusSpec spec;
    spec.language = "ta";
    spec.lexicon_size = 120;
    spec.line_count = 400;
    fs::path corpus = root / "corpus.txt";
    testsup::write_lines(corpus, testsup::make_corpus(spec));
    fs::path held = root / "held.txt";
    spec.sample_seed = 5;
    spec.line_count = 300;
    testsup::write_lines(held, testsup::make_corpus(spec));

    auto pipeline = [&](const std::string& tag) -> fs::path {
        fs::path dir = root / tag;
        fs::create_directories(dir);
        std::string base_dir = env_or_fail("TOKGRAFT_BASE_DIR");
        std::string q = "\"";
        std::vector<std::string> steps = {
            "train-bpe --base " + q + base_dir + q + " --corpus " + q + corpus.string() + q +
                " --language ta -y 80 --seed 21 --out " + q + (dir / "ext.json").string() + q,
            "extend --base " + q + base_dir + q + " --extension " + q +
                (dir / "ext.json").string() + q + " --seed 21 --out " + q +
                (dir / "tok").string() + q,
            "stats --base " + q + base_dir + q + " --corpus " + q + held.string() + q +
                " --extended " + q + (dir / "tok").string() + q + " --seed 21 --out " + q +
                (dir / "rep").string() + q,
            "bench --n-values 4 8 12 16 20 --runs 3 --warmup 0 --vocab-size 64 --hidden 8 "
            "--layers 1 --seed 21 --pairs 79:31 --out " +
                q + (dir / "bench.json").string() + q,
        };
        for (const std::string& step : steps) {
            if (run_cli(step + " > /dev/null 2>&1") != 0) {
                return {};
            }
        }
        return dir;
    };

    fs::path a = pipeline("a");
    fs::path b = pipeline("b");
    if (a.empty() || b.empty()) {
        why = "pipeline run failed";
        return false;
    }

    const std::vector<std::string> exact = {
        "ext.json",       "tok/vocab.json", "tok/merges.txt",
        "tok/added_tokens.json", "tok/manifest.json", "rep/report.json", "rep/report.csv",
    };
    for (const std::string& rel : exact) {
        if (slurp(a / rel) != slurp(b / rel)) {
            why = rel + " differs between runs";
            return false;
        }
        if (slurp(a / rel).empty()) {
            why = rel + " is empty";
            return false;
        }
    }

    // bench.json matches after dropping the volatile timing section.
    nlohmann::json ba = read_json_file(a / "bench.json");
    nlohmann::json bb = read_json_file(b / "bench.json");
    if (!ba.contains("volatile") || !bb.contains("volatile")) {
        why = "bench.json lacks a volatile section";
        return false;
    }
    ba.erase("volatile");
    bb.erase("volatile");
    if (canonical_dump(ba) != canonical_dump(bb)) {
        why = "bench.json non-volatile sections differ";
        return false;
    }
    return true;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "english baseline exactness", 1.0, criterion_english_baseline},
        {2, "roundtrip property", 10.0, criterion_roundtrip},
        {3, "trainer oracle equivalence", 30.0, criterion_oracle},
        {4, "monotone reduction", 120.0, criterion_reduction},
        {5, "budget sweep behavior", 300.0, criterion_budget_sweep},
        {6, "head-expansion preservation", 10.0, criterion_head_expansion},
        {7, "decoding-cost scaling", 180.0, criterion_decode_cost},
        {8, "prompt exactness", 1.0, criterion_prompts},
        {9, "pipeline determinism", 300.0, criterion_determinism},
    };

    int passed = 0;
    for (const Criterion& c : criteria) {
        std::string why;
        const auto start = Clock::now();
        bool ok = false;
        try {
            ok = c.run(why);
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - start).count();
        if (ok && elapsed > c.limit_seconds) {
            ok = false;
            why = "took " + std::to_string(elapsed) + " s, limit " +
                  std::to_string(c.limit_seconds) + " s";
        }
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        line << "criterion " << c.number << " (" << c.label << "): "
             << (ok ? "PASS" : "FAIL") << " [" << elapsed << " s]";
        if (!ok) {
            line << " " << why;
        }
        std::cout << line.str() << "\n";
        if (ok) {
            ++passed;
        }
    }
    std::cout << "acceptance: " << passed << "/" << criteria.size() << " passed\n";
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
