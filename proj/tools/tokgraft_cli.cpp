#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tokgraft/bpe.hpp"
#include "tokgraft/decoder.hpp"
#include "tokgraft/errors.hpp"
#include "tokgraft/extension.hpp"
#include "tokgraft/json_util.hpp"
#include "tokgraft/kernels.hpp"
#include "tokgraft/prompt.hpp"
#include "tokgraft/stats.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/trainer.hpp"
#include "tokgraft/unicode.hpp"
#include "tokgraft/version.hpp"

namespace fs = std::filesystem;
using namespace tokgraft;

namespace {

// Stable exit codes: 2 I/O, 3 invalid UTF-8 / undecodable ids, 4 fingerprint
// mismatch, 5 unknown language, 6 insufficient samples, 1 anything else.
int exit_code_for(Errc code) {
    switch (code) {
        case Errc::io_error: return 2;
        case Errc::invalid_utf8:
        case Errc::invalid_byte_sequence: return 3;
        case Errc::fingerprint_mismatch: return 4;
        case Errc::unknown_language: return 5;
        case Errc::insufficient_samples: return 6;
        default: return 1;
    }
}

struct BaseArgs {
    std::string dir;
    bool byte_base = false;
};

void add_base_options(CLI::App* cmd, BaseArgs& args) {
    cmd->add_option("--base", args.dir,
                    "Tokenizer directory (default: $TOKGRAFT_BASE_DIR)");
    cmd->add_flag("--byte-base", args.byte_base,
                  "Use the built-in byte-level vocabulary instead of --base");
}

TokenizerFiles load_base(const BaseArgs& args) {
    if (args.byte_base) {
        return TokenizerFiles{Vocabulary::byte_level_base(default_base_specials()),
                              MergeTable{}};
    }
    std::string dir = args.dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("TOKGRAFT_BASE_DIR")) {
            dir = env;
        }
    }
    if (dir.empty()) {
        raise(Errc::io_error,
              "no tokenizer directory given (use --base or set TOKGRAFT_BASE_DIR)");
    }
    if (!fs::exists(fs::path(dir) / "vocab.json")) {
        raise(Errc::io_error, "no vocab.json in " + dir);
    }
    return load_tokenizer_dir(dir);
}

LanguageFamilyMap load_families(const std::string& path) {
    if (path.empty()) {
        return LanguageFamilyMap::defaults();
    }
    return LanguageFamilyMap::from_json(read_json_file(path));
}

std::vector<TokenId> parse_ids(const std::string& text) {
    std::vector<TokenId> ids;
    std::string cleaned = text;
    for (char& c : cleaned) {
        if (c == ',') {
            c = ' ';
        }
    }
    std::istringstream in(cleaned);
    long long id = 0;
    while (in >> id) {
        ids.push_back(static_cast<TokenId>(id));
    }
    if (!in.eof()) {
        raise(Errc::invalid_argument, "token ids must be integers: " + text);
    }
    return ids;
}

struct TrainArgs {
    BaseArgs base;
    std::vector<std::string> corpora;
    std::vector<std::string> languages;
    std::int64_t budget_y = 0;
    std::int64_t min_pair_freq = 2;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_train_bpe(const TrainArgs& args) {
    if (args.corpora.size() != args.languages.size()) {
        raise(Errc::invalid_argument, "--corpus and --language counts must match");
    }
    const TokenizerFiles base = load_base(args.base);
    const Tokenizer tokenizer(base.vocab, base.merges);

    std::vector<LanguageCorpus> corpora;
    for (std::size_t i = 0; i < args.corpora.size(); ++i) {
        corpora.push_back(LanguageCorpus{args.languages[i], args.corpora[i], args.budget_y});
    }
    const std::vector<LearnedExtension> extensions =
        learn_all(corpora, tokenizer, args.min_pair_freq, args.jobs);

    const bool single_file = extensions.size() == 1 && args.out.ends_with(".json");
    for (const LearnedExtension& ext : extensions) {
        nlohmann::json j = extension_to_json(ext);
        j["version"] = kVersion;
        j["seed"] = args.seed;
        const fs::path out_path =
            single_file ? fs::path(args.out)
                        : fs::path(args.out) / ("extension_" + ext.language + ".json");
        write_json_file(out_path, j);
        std::cout << out_path.string() << "\n";
    }
    return 0;
}

struct ExtendArgs {
    BaseArgs base;
    std::vector<std::string> extension_paths;
    std::string families_path;
    bool family_prompts = true;
    std::string out;
    std::uint64_t seed = 0;
};

int cmd_extend(const ExtendArgs& args) {
    const TokenizerFiles base = load_base(args.base);
    std::vector<LearnedExtension> extensions;
    for (const std::string& path : args.extension_paths) {
        extensions.push_back(extension_from_json(read_json_file(path)));
    }
    std::vector<std::string> prompts;
    if (args.family_prompts) {
        prompts = load_families(args.families_path).prompt_token_names();
    }

    ExtendResult result =
        extend_vocabulary(base.vocab, base.merges, std::move(extensions), prompts);
    save_tokenizer_dir(args.out, result.vocab, result.merges);

    nlohmann::json manifest = manifest_to_json(result.manifest);
    manifest["version"] = kVersion;
    manifest["seed"] = args.seed;
    const fs::path manifest_path = fs::path(args.out) / "manifest.json";
    write_json_file(manifest_path, manifest);
    std::cout << manifest_path.string() << "\n";
    return 0;
}

struct EncodeArgs {
    BaseArgs base;
    std::string text;
    std::string input;
    bool parse_specials = false;
    bool raw = false;
};

int cmd_encode(const EncodeArgs& args) {
    const TokenizerFiles files = load_base(args.base);
    const Tokenizer tokenizer(files.vocab, files.merges);
    std::string text = args.text;
    if (!args.input.empty()) {
        text = read_text_file(args.input);
    }
    if (!uni::is_valid_utf8(text)) {
        raise(Errc::invalid_utf8, "input is not valid UTF-8");
    }
    if (!args.raw) {
        text = uni::to_nfc(text);
    }
    const auto ids = tokenizer.encode(
        text, args.parse_specials ? SpecialHandling::parse : SpecialHandling::ignore);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::cout << (i ? " " : "") << ids[i];
    }
    std::cout << "\n";
    return 0;
}

struct DecodeArgs {
    BaseArgs base;
    std::string ids;
    bool lossy = false;
};

int cmd_decode(const DecodeArgs& args) {
    const TokenizerFiles files = load_base(args.base);
    const Tokenizer tokenizer(files.vocab, files.merges);
    std::string ids_text = args.ids;
    if (ids_text.empty()) {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        ids_text = buffer.str();
    }
    const std::vector<TokenId> ids = parse_ids(ids_text);
    std::cout << tokenizer.decode(ids, args.lossy ? DecodeMode::lossy : DecodeMode::strict)
              << "\n";
    return 0;
}

struct StatsArgs {
    std::string corpus;
    BaseArgs base;
    std::string extended_dir;
    std::string out = ".";
    std::uint64_t seed = 0;
};

int cmd_stats(const StatsArgs& args) {
    const TokenizerFiles base = load_base(args.base);
    const TokenizerFiles ext = load_tokenizer_dir(args.extended_dir);
    const Tokenizer base_tok(base.vocab, base.merges);
    const Tokenizer ext_tok(ext.vocab, ext.merges);

    std::ifstream corpus(args.corpus, std::ios::binary);
    if (!corpus) {
        raise(Errc::io_error, "cannot open " + args.corpus);
    }
    const TokenStatsReport report = reduction_report(corpus, base_tok, ext_tok);

    nlohmann::json j = stats_to_json(report);
    j["version"] = kVersion;
    j["seed"] = args.seed;
    j["base_fingerprint"] = fingerprint(base.vocab, base.merges);
    j["extended_fingerprint"] = fingerprint(ext.vocab, ext.merges);
    const fs::path json_path = fs::path(args.out) / "report.json";
    write_json_file(json_path, j);
    write_text_file(fs::path(args.out) / "report.csv", stats_to_csv(report));
    std::cout << json_path.string() << "\n";
    return 0;
}

struct PromptArgs {
    BaseArgs base;
    std::string language;
    std::string task = "transcribe";
    std::string families_path;
    bool timestamps = false;
    bool family_prompt = true;
};

int cmd_build_prompt(const PromptArgs& args) {
    const TokenizerFiles files = load_base(args.base);
    const LanguageFamilyMap map = load_families(args.families_path);
    const PromptSequence prompt = build_prompt(args.language, args.task, args.timestamps,
                                               files.vocab, map, args.family_prompt);
    std::cout << render_prompt(prompt, files.vocab) << "\n";
    for (std::size_t i = 0; i < prompt.ids.size(); ++i) {
        std::cout << (i ? " " : "") << prompt.ids[i];
    }
    std::cout << "\n";
    return 0;
}

struct ExpandHeadArgs {
    std::string head_path;
    std::size_t vocab_size = 2048;
    std::size_t hidden_dim = 256;
    std::int64_t k = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_expand_head(const ExpandHeadArgs& args) {
    if (args.k < 0) {
        raise(Errc::invalid_argument, "-k must be >= 0");
    }
    TokenHead head;
    if (!args.head_path.empty()) {
        head = load_head(args.head_path);
    } else {
        head = random_head(args.vocab_size, args.hidden_dim, args.seed);
    }
    const TokenHead expanded = expand_head(head, static_cast<std::size_t>(args.k),
                                           args.seed + 0x9e3779b97f4a7c15ULL);
    save_head(args.out, expanded);
    std::cout << args.out << "\n";
    return 0;
}

struct BenchArgs {
    std::vector<std::int64_t> n_values = {32, 64, 128, 256, 512};
    std::vector<std::string> pairs = {"79:31"};
    int runs = 3;
    int warmup = 1;
    std::size_t hidden_dim = 256;
    std::size_t num_layers = 4;
    std::size_t vocab_size = 2048;
    std::uint64_t seed = 0;
    std::string out = "bench.json";
};

int cmd_bench(const BenchArgs& args) {
    std::vector<std::int64_t> distinct = args.n_values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 5) {
        raise(Errc::insufficient_samples, "need >= 5 distinct N values, got " +
                                              std::to_string(distinct.size()));
    }
    if (args.runs < 3) {
        raise(Errc::insufficient_samples,
              "need >= 3 runs per N, got " + std::to_string(args.runs));
    }
    for (std::int64_t n : args.n_values) {
        if (n < 1) {
            raise(Errc::invalid_argument, "N values must be >= 1");
        }
    }
    if (args.vocab_size < 4) {
        raise(Errc::invalid_argument, "--vocab-size must be >= 4");
    }

    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const std::string& spec : args.pairs) {
        const std::size_t colon = spec.find(':');
        if (colon == std::string::npos) {
            raise(Errc::invalid_argument, "--pairs entries look like 79:31, got " + spec);
        }
        pairs.emplace_back(std::stoll(spec.substr(0, colon)),
                           std::stoll(spec.substr(colon + 1)));
    }

    BenchConfig config;
    config.vocab_size = args.vocab_size;
    config.hidden_dim = args.hidden_dim;
    config.num_layers = args.num_layers;
    config.seed = args.seed;
    config.n_values = args.n_values;
    config.runs = args.runs;
    config.warmup = args.warmup;
    const std::vector<TokenId> prompt = {0, 1, 2, 3};
    const BenchRun run = run_benchmark(config, prompt);

    nlohmann::json samples = nlohmann::json::array();
    for (const BenchSample& s : run.samples) {
        samples.push_back({{"N", s.n}, {"runs_ms", s.runs_ms}, {"median_ms", s.median_ms}});
    }
    nlohmann::json speedups = nlohmann::json::array();
    for (const auto& [n_base, n_ext] : pairs) {
        speedups.push_back({{"n_base", n_base},
                            {"n_ext", n_ext},
                            {"ratio", predicted_speedup(run.fit, n_base, n_ext)}});
    }
    nlohmann::json pair_list = nlohmann::json::array();
    for (const auto& [n_base, n_ext] : pairs) {
        pair_list.push_back({n_base, n_ext});
    }

    const nlohmann::json report = {
        {"config",
         {
             {"version", kVersion},
             {"seed", args.seed},
             {"vocab_size", args.vocab_size},
             {"hidden_dim", args.hidden_dim},
             {"num_layers", args.num_layers},
             {"n_values", args.n_values},
             {"pairs", pair_list},
             {"runs", args.runs},
             {"warmup", args.warmup},
             {"backend", kern::backend_name(kern::active_backend())},
         }},
        // Wall-clock dependent parts live under "volatile" so seeded runs
        // stay byte-identical outside it.
        {"volatile",
         {
             {"samples", samples},
             {"fit",
              {{"a", run.fit.a}, {"b", run.fit.b}, {"r2", run.fit.r_squared}}},
             {"speedups", speedups},
         }},
    };
    write_json_file(args.out, report);
    std::cout << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byte-level BPE extension toolkit for multilingual ASR tokenizers"};
    app.require_subcommand(1);

    TrainArgs train;
    CLI::App* train_cmd =
        app.add_subcommand("train-bpe", "Learn BPE merges continuing from a frozen base");
    add_base_options(train_cmd, train.base);
    train_cmd->add_option("--corpus", train.corpora, "Corpus file, one sentence per line")
        ->required();
    train_cmd->add_option("--language", train.languages, "Language code per corpus")
        ->required();
    train_cmd->add_option("-y,--budget-y", train.budget_y, "New merges per language")
        ->required();
    train_cmd->add_option("--min-pair-freq", train.min_pair_freq,
                          "Ignore pairs seen fewer times (default 2)");
    train_cmd->add_option("--jobs", train.jobs, "Languages trained in parallel");
    train_cmd->add_option("--seed", train.seed, "Seed recorded in the report");
    train_cmd->add_option("--out", train.out,
                          "Output extension.json (or directory for several languages)")
        ->default_val(".");

    ExtendArgs extend;
    CLI::App* extend_cmd =
        app.add_subcommand("extend", "Graft learned extensions onto the base tokenizer");
    add_base_options(extend_cmd, extend.base);
    extend_cmd->add_option("--extension", extend.extension_paths, "extension.json files");
    extend_cmd->add_option("--families", extend.families_path, "families.json override");
    extend_cmd->add_flag("--family-prompts,!--no-family-prompts", extend.family_prompts,
                         "Append <family> prompt specials (default on)");
    extend_cmd->add_option("--out", extend.out, "Output tokenizer directory")->required();
    extend_cmd->add_option("--seed", extend.seed, "Seed recorded in the report");

    EncodeArgs encode;
    CLI::App* encode_cmd = app.add_subcommand("encode", "Encode text to token ids");
    add_base_options(encode_cmd, encode.base);
    encode_cmd->add_option("--text", encode.text, "Text to encode");
    encode_cmd->add_option("--input", encode.input, "File to encode instead of --text");
    encode_cmd->add_flag("--specials", encode.parse_specials,
                         "Match special tokens in the input");
    encode_cmd->add_flag("--raw", encode.raw, "Skip NFC normalization");

    DecodeArgs decode;
    CLI::App* decode_cmd = app.add_subcommand("decode", "Decode token ids to text");
    add_base_options(decode_cmd, decode.base);
    decode_cmd->add_option("--ids", decode.ids, "Ids (space or comma separated; stdin if omitted)");
    decode_cmd->add_flag("--lossy", decode.lossy, "Replace undecodable bytes with U+FFFD");

    StatsArgs stats;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "Token count reduction report, base vs extended");
    add_base_options(stats_cmd, stats.base);
    stats_cmd->add_option("--corpus", stats.corpus, "Corpus file")->required();
    stats_cmd->add_option("--extended", stats.extended_dir, "Extended tokenizer directory")
        ->required();
    stats_cmd->add_option("--out", stats.out, "Output directory for report.json/report.csv");
    stats_cmd->add_option("--seed", stats.seed, "Seed recorded in the report");

    PromptArgs prompt;
    CLI::App* prompt_cmd =
        app.add_subcommand("build-prompt", "Build the decoder special-token prefix");
    add_base_options(prompt_cmd, prompt.base);
    prompt_cmd->add_option("--language", prompt.language, "Language code")->required();
    prompt_cmd->add_option("--task", prompt.task, "Task (transcribe)");
    prompt_cmd->add_option("--families", prompt.families_path, "families.json override");
    prompt_cmd->add_flag("--timestamps", prompt.timestamps,
                         "Request timestamps (omits <|notimestamps|>)");
    prompt_cmd->add_flag("--family,!--no-family", prompt.family_prompt,
                         "Include <SOTP> + family prompt (default on)");

    ExpandHeadArgs expand_head_args;
    CLI::App* expand_cmd =
        app.add_subcommand("expand-head", "Append rows to a token head, old rows untouched");
    expand_cmd->add_option("--head", expand_head_args.head_path, "Input head file");
    expand_cmd->add_option("--vocab-size", expand_head_args.vocab_size,
                           "Rows when creating a fresh head (default 2048)");
    expand_cmd->add_option("--hidden", expand_head_args.hidden_dim,
                           "Hidden size for a fresh head (default 256)");
    expand_cmd->add_option("-k,--new-rows", expand_head_args.k, "Rows to append")->required();
    expand_cmd->add_option("--seed", expand_head_args.seed, "Seed for the new rows");
    expand_cmd->add_option("--out", expand_head_args.out, "Output head file")->required();

    BenchArgs bench;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Time toy-decoder runs and fit T(N) = aN + bN^2");
    bench_cmd->add_option("--n-values", bench.n_values, "Generated-token counts")
        ->delimiter(',');
    bench_cmd->add_option("--pairs", bench.pairs, "base:ext token-count pairs")
        ->delimiter(',');
    bench_cmd->add_option("--runs", bench.runs, "Timed runs per N (>= 3)");
    bench_cmd->add_option("--warmup", bench.warmup, "Discarded runs per N");
    bench_cmd->add_option("--hidden", bench.hidden_dim, "Decoder hidden size");
    bench_cmd->add_option("--layers", bench.num_layers, "Decoder layers");
    bench_cmd->add_option("--vocab-size", bench.vocab_size, "Head rows");
    bench_cmd->add_option("--seed", bench.seed, "Seed for head and decoder weights");
    bench_cmd->add_option("--out", bench.out, "Output bench.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (train_cmd->parsed()) return cmd_train_bpe(train);
        if (extend_cmd->parsed()) return cmd_extend(extend);
        if (encode_cmd->parsed()) return cmd_encode(encode);
        if (decode_cmd->parsed()) return cmd_decode(decode);
        if (stats_cmd->parsed()) return cmd_stats(stats);
        if (prompt_cmd->parsed()) return cmd_build_prompt(prompt);
        if (expand_cmd->parsed()) return cmd_expand_head(expand_head_args);
        if (bench_cmd->parsed()) return cmd_bench(bench);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
