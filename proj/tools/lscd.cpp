// lscd: detect lexical semantic change between two corpora.
//
// Pipeline: train one skip-gram space per corpus, map the spaces into a
// common space with a linear transformation (CCA composition, orthogonal
// Procrustes, or unsupervised self-learning), then classify and rank the
// target words by the cosine between their two vectors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lscd/align.hpp"
#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/errors.hpp"
#include "lscd/eval.hpp"
#include "lscd/io_util.hpp"
#include "lscd/lsc.hpp"
#include "lscd/pipeline.hpp"
#include "lscd/sgns.hpp"

namespace {

namespace fs = std::filesystem;

struct SgnsFlags {
    lscd::SgnsConfig config;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dim", config.dim, "Embedding dimensionality");
        cmd->add_option("--epochs", config.epochs, "Training epochs");
        cmd->add_option("--negatives", config.negatives, "Negative samples per positive");
        cmd->add_option("--window", config.window, "Maximum context window");
        cmd->add_option("--min-count", config.min_count, "Minimum word frequency");
        cmd->add_option("--lr", config.initial_lr, "Initial learning rate");
        cmd->add_option("--final-lr", config.final_lr, "Final learning rate");
        cmd->add_option("--subsample", config.subsample_t,
                        "Frequent-word subsampling threshold (0 disables)");
        cmd->add_option("--seed", config.seed, "Random seed");
        cmd->add_option("--workers", config.workers,
                        "Training threads (1 keeps runs bit-reproducible)");
        cmd->add_flag("--shuffle", config.shuffle_sentences,
                      "Shuffle sentence order per epoch");
    }
};

lscd::MapDirection parse_run_direction(const std::string& s) {
    if (s == "forward") return lscd::MapDirection::s_to_t;
    if (s == "reversed") return lscd::MapDirection::t_to_s;
    throw lscd::ConfigError("direction must be forward|reversed, got '" + s + "'");
}

void print_rule(const lscd::ThresholdRule& rule) {
    std::cerr << "threshold rule: " << lscd::to_string(rule.kind) << "/"
              << lscd::to_string(rule.statistic) << " value=" << lscd::format_double(rule.value)
              << "\n";
}

void write_report_files(const lscd::EvalReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream txt(dir / "report.txt", std::ios::binary);
    txt << lscd::format_report_table(report);
    std::ofstream js(dir / "report.json", std::ios::binary);
    js << lscd::report_to_json(report).dump(2) << '\n';
    if (!txt || !js) throw lscd::IoError("cannot write report files under " + dir.string());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lexical semantic change detection toolkit"};
    app.require_subcommand(1);

    // ------------------------------------------------------------------ train
    auto* train_cmd = app.add_subcommand("train", "Train one embedding space from a corpus");
    std::string train_corpus;
    std::string train_output;
    bool train_text = false;
    SgnsFlags train_sgns;
    train_cmd->add_option("--corpus", train_corpus, "Corpus file (plain or .gz)")->required();
    train_cmd->add_option("--output", train_output, "Where to write the space")->required();
    train_cmd->add_flag("--text", train_text, "Write the text format instead of binary");
    train_sgns.attach(train_cmd);

    // ------------------------------------------------------------------ align
    auto* align_cmd =
        app.add_subcommand("align", "Fit a linear map from a source space to a target space");
    std::string align_source;
    std::string align_target;
    std::string align_method = "cca";
    std::string align_output;
    std::string align_exclude;
    std::string align_dict_in;
    std::string align_dict_out;
    std::string align_apply_out;
    double align_cca_reg = 1e-8;
    align_cmd->add_option("--source", align_source, "Source space file")->required();
    align_cmd->add_option("--target", align_target, "Target space file")->required();
    align_cmd->add_option("--method", align_method, "cca|orthogonal|unsupervised");
    align_cmd->add_option("--output", align_output, "Where to write the map")->required();
    align_cmd->add_option("--exclude", align_exclude,
                          "Target file; these words are dropped from the seed dictionary");
    align_cmd->add_option("--dict-in", align_dict_in, "Use this seed dictionary (TSV)");
    align_cmd->add_option("--dict-out", align_dict_out, "Write the seed dictionary used");
    align_cmd->add_option("--apply-out", align_apply_out,
                          "Also write the mapped source space here");
    align_cmd->add_option("--cca-reg", align_cca_reg, "CCA covariance ridge term");

    // ------------------------------------------------------------------ score
    auto* score_cmd = app.add_subcommand(
        "score", "Score targets given two spaces and a fitted map");
    std::string score_earlier;
    std::string score_later;
    std::string score_map;
    std::string score_targets_path;
    std::string score_output;
    std::string score_language = "language";
    int score_nn_k = 0;
    score_cmd->add_option("--earlier", score_earlier, "Space of the earlier corpus")->required();
    score_cmd->add_option("--later", score_later, "Space of the later corpus")->required();
    score_cmd->add_option("--map", score_map, "Fitted linear map")->required();
    score_cmd->add_option("--targets", score_targets_path, "Target word file")->required();
    score_cmd->add_option("--output", score_output, "Output directory")->required();
    score_cmd->add_option("--language", score_language, "Language label for answer files");
    score_cmd->add_option("--nn-k", score_nn_k,
                          "Also record k-NN intersection sizes (0 skips)");

    // --------------------------------------------------------------- classify
    auto* classify_cmd = app.add_subcommand(
        "classify", "Turn score tables into binary verdicts (task1 answers)");
    std::vector<std::string> classify_scores;
    std::string classify_rule = "bin";
    std::string classify_statistic = "mean";
    std::string classify_pooling = "pooled";
    std::string classify_output;
    classify_cmd
        ->add_option("--scores", classify_scores,
                     "Per-language score tables as language=path (repeatable)")
        ->required();
    classify_cmd->add_option("--rule", classify_rule, "bin|gl|nn");
    classify_cmd->add_option("--statistic", classify_statistic, "mean|median");
    classify_cmd->add_option("--pooling", classify_pooling,
                             "gl aggregation: pooled|mean_of_statistics");
    classify_cmd->add_option("--output", classify_output, "Answer directory")->required();

    // --------------------------------------------------------------- evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score answers against gold data");
    std::string eval_answers;
    std::string eval_gold;
    std::string eval_out;
    eval_cmd->add_option("--answers", eval_answers, "Answer directory (task1/, task2/)")
        ->required();
    eval_cmd->add_option("--gold", eval_gold, "Gold directory (task1/, task2/)")->required();
    eval_cmd->add_option("--out", eval_out, "Also write report.txt/report.json here");

    // -------------------------------------------------------------------- run
    auto* run_cmd = app.add_subcommand("run", "Full pipeline for one language");
    run_cmd->set_config("--config", "",
                        "Flat key=value file; command-line flags take precedence");
    lscd::RunConfig run_config;
    SgnsFlags run_sgns;
    std::string run_corpus1;
    std::string run_corpus2;
    std::string run_targets;
    std::string run_output;
    std::string run_preset;
    std::string run_method = "cca";
    std::string run_direction = "forward";
    std::string run_threshold = "bin";
    std::string run_statistic = "mean";
    std::string run_pooling = "pooled";
    std::string run_manifest;
    bool run_exclude_targets = false;
    bool run_no_exclude_targets = false;
    run_cmd->add_option("--language", run_config.language, "Language label");
    run_cmd->add_option("--corpus1", run_corpus1, "Earlier corpus");
    run_cmd->add_option("--corpus2", run_corpus2, "Later corpus");
    run_cmd->add_option("--targets", run_targets, "Target word file");
    run_cmd->add_option("--output", run_output, "Output directory");
    run_cmd->add_option("--preset", run_preset,
                        "cca-nn|cca-nn-r|cca-bin|cca-bin-r|ort-bin|ort-gl|uns-bin|uns-gl");
    run_cmd->add_option("--method", run_method, "cca|orthogonal|unsupervised");
    run_cmd->add_option("--direction", run_direction, "forward|reversed");
    run_cmd->add_option("--threshold", run_threshold, "bin|gl|nn");
    run_cmd->add_option("--statistic", run_statistic, "mean|median");
    run_cmd->add_option("--pooling", run_pooling, "pooled|mean_of_statistics");
    run_cmd->add_option("--nn-k", run_config.nn_k, "Neighborhood size for the nn rule");
    run_cmd->add_option("--cca-reg", run_config.cca_reg, "CCA covariance ridge term");
    run_cmd->add_flag("--exclude-targets", run_exclude_targets,
                      "Drop targets from the seed dictionary (default for cca)");
    run_cmd->add_flag("--no-exclude-targets", run_no_exclude_targets,
                      "Keep targets in the seed dictionary");
    run_cmd->add_option("--missing-degree", run_config.missing.fixed_degree,
                        "Fixed degree for missing targets (default: max observed)");
    bool run_missing_fixed = false;
    run_cmd->add_flag("--missing-fixed", run_missing_fixed,
                      "Use --missing-degree instead of the max observed degree");
    run_cmd->add_flag("--save-text-spaces", run_config.save_text_spaces,
                      "Also write text-format spaces");
    run_cmd->add_flag("--force", run_config.force, "Replace an existing output directory");
    run_cmd->add_option("--from-manifest", run_manifest,
                        "Re-run from a previous run's manifest.json");
    run_sgns.attach(run_cmd);

    // ------------------------------------------------------------------ sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the pipeline across embedding sizes");
    std::vector<int> sweep_dims;
    std::string sweep_gold;
    lscd::RunConfig sweep_config;
    SgnsFlags sweep_sgns;
    std::string sweep_corpus1;
    std::string sweep_corpus2;
    std::string sweep_targets;
    std::string sweep_output;
    std::string sweep_method = "orthogonal";
    std::string sweep_direction = "forward";
    std::string sweep_statistic = "mean";
    sweep_cmd->add_option("--dims", sweep_dims, "Dimensions to sweep (default 25..300 by 25)")
        ->delimiter(',');
    sweep_cmd->add_option("--gold", sweep_gold, "Gold directory (task1/, task2/)")->required();
    sweep_cmd->add_option("--language", sweep_config.language, "Language label");
    sweep_cmd->add_option("--corpus1", sweep_corpus1, "Earlier corpus")->required();
    sweep_cmd->add_option("--corpus2", sweep_corpus2, "Later corpus")->required();
    sweep_cmd->add_option("--targets", sweep_targets, "Target word file")->required();
    sweep_cmd->add_option("--output", sweep_output, "Output directory")->required();
    sweep_cmd->add_option("--method", sweep_method, "cca|orthogonal|unsupervised");
    sweep_cmd->add_option("--direction", sweep_direction, "forward|reversed");
    sweep_cmd->add_option("--statistic", sweep_statistic, "mean|median");
    sweep_sgns.attach(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return static_cast<int>(lscd::ExitCode::usage);
    }

    try {
        if (train_cmd->parsed()) {
            const auto corpus = lscd::load_corpus(train_corpus);
            std::cerr << "corpus: " << corpus.sentences.size() << " sentences, "
                      << corpus.token_count << " tokens\n";
            const auto space = lscd::train(corpus, train_sgns.config);
            std::cerr << "vocabulary: " << space.vocab.size() << " words, dim "
                      << space.dim() << "\n";
            if (train_text)
                lscd::save_space_text(space, train_output);
            else
                lscd::save_space_binary(space, train_output);
        }

        if (align_cmd->parsed()) {
            const auto source = lscd::load_space(align_source);
            const auto target = lscd::load_space(align_target);
            const auto method = lscd::parse_method(align_method);
            lscd::TargetSet exclude;
            if (!align_exclude.empty()) exclude = lscd::load_targets(align_exclude);

            lscd::LinearMap map;
            if (method == lscd::MapMethod::unsupervised) {
                const auto result = lscd::fit_unsupervised(source, target);
                map = result.map;
                std::cerr << "self-learning converged after " << result.iterations
                          << " iterations, dictionary size " << result.dictionary.size()
                          << "\n";
                if (!align_dict_out.empty())
                    lscd::save_dictionary(result.dictionary, align_dict_out);
            } else {
                const auto dict =
                    align_dict_in.empty()
                        ? lscd::build_seed_dictionary(source, target, exclude)
                        : lscd::load_dictionary(align_dict_in, source, target);
                std::cerr << "seed dictionary: " << dict.size() << " pairs\n";
                if (!align_dict_out.empty()) lscd::save_dictionary(dict, align_dict_out);
                map = method == lscd::MapMethod::cca
                          ? lscd::fit_cca(source, target, dict, align_cca_reg).map
                          : lscd::fit_orthogonal(source, target, dict);
            }
            lscd::save_map(map, align_output);
            if (!align_apply_out.empty())
                lscd::save_space_binary(lscd::apply(map, source), align_apply_out);
        }

        if (score_cmd->parsed()) {
            const auto earlier = lscd::load_space(score_earlier);
            const auto later = lscd::load_space(score_later);
            const auto map = lscd::load_map(score_map);
            const auto targets = lscd::load_targets(score_targets_path);

            lscd::AlignedPair pair =
                map.direction == lscd::MapDirection::s_to_t
                    ? lscd::AlignedPair{lscd::apply(map, earlier), later, map}
                    : lscd::AlignedPair{earlier, lscd::apply(map, later), map};

            auto scores = lscd::score_targets(pair, targets);
            if (score_nn_k > 0) {
                const auto nn = lscd::threshold_nearest_neighbors(pair, targets, score_nn_k);
                lscd::attach_nn_sizes(scores, nn);
            }
            fs::create_directories(fs::path(score_output) / "task2");
            lscd::write_scores(scores, fs::path(score_output) / "scores.tsv");
            lscd::write_task2_answers(
                scores, fs::path(score_output) / "task2" / (score_language + ".txt"));
        }

        if (classify_cmd->parsed()) {
            std::map<std::string, std::vector<lscd::ChangeScore>> per_language;
            for (const auto& spec : classify_scores) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos)
                    throw lscd::UsageError("--scores expects language=path, got '" + spec + "'");
                per_language[spec.substr(0, eq)] = lscd::load_scores(spec.substr(eq + 1));
            }
            const auto rule_kind = lscd::parse_threshold_kind(classify_rule);
            const auto statistic = lscd::parse_statistic(classify_statistic);
            const auto pooling = classify_pooling == "pooled"
                                     ? lscd::GlobalPooling::pooled
                                     : lscd::GlobalPooling::mean_of_statistics;

            fs::create_directories(fs::path(classify_output) / "task1");
            if (rule_kind == lscd::ThresholdKind::global_threshold) {
                const auto result = lscd::threshold_global(per_language, statistic, pooling);
                print_rule(result.rule);
                for (const auto& [language, verdicts] : result.verdicts)
                    lscd::write_task1_answers(
                        verdicts, fs::path(classify_output) / "task1" / (language + ".txt"));
            } else {
                for (const auto& [language, scores] : per_language) {
                    if (rule_kind == lscd::ThresholdKind::binary_threshold) {
                        const auto result = lscd::threshold_binary(scores, statistic);
                        print_rule(result.rule);
                        lscd::write_task1_answers(
                            result.verdicts,
                            fs::path(classify_output) / "task1" / (language + ".txt"));
                    } else {
                        const auto result = lscd::threshold_nearest_neighbors_from_scores(scores);
                        print_rule(result.rule);
                        lscd::write_task1_answers(
                            result.verdicts,
                            fs::path(classify_output) / "task1" / (language + ".txt"));
                    }
                }
            }
        }

        if (eval_cmd->parsed()) {
            const auto report = lscd::evaluate_answers(eval_answers, eval_gold);
            std::cout << lscd::format_report_table(report);
            if (!eval_out.empty()) write_report_files(report, eval_out);
        }

        if (run_cmd->parsed()) {
            lscd::RunConfig config;
            if (!run_manifest.empty()) {
                config = lscd::load_manifest_config(run_manifest);
                if (!run_output.empty()) config.output = run_output;
                config.force = config.force || run_config.force;
            } else {
                config = run_config;
                config.sgns = run_sgns.config;
                if (!run_preset.empty()) lscd::apply_preset(config, run_preset);
                if (run_cmd->count("--method") > 0 || run_preset.empty())
                    config.method = lscd::parse_method(run_method);
                if (run_cmd->count("--direction") > 0 || run_preset.empty())
                    config.direction = parse_run_direction(run_direction);
                if (run_cmd->count("--threshold") > 0 || run_preset.empty())
                    config.threshold = lscd::parse_threshold_kind(run_threshold);
                if (run_cmd->count("--statistic") > 0 || run_preset.empty())
                    config.statistic = lscd::parse_statistic(run_statistic);
                config.pooling = run_pooling == "pooled"
                                     ? lscd::GlobalPooling::pooled
                                     : lscd::GlobalPooling::mean_of_statistics;
                config.corpus1 = run_corpus1;
                config.corpus2 = run_corpus2;
                config.targets = run_targets;
                config.output = run_output;
                config.missing.use_fixed_degree = run_missing_fixed;
                if (run_exclude_targets) config.exclude_targets = true;
                if (run_no_exclude_targets) config.exclude_targets = false;
                if (config.corpus1.empty() || config.corpus2.empty() ||
                    config.targets.empty() || config.output.empty())
                    throw lscd::UsageError(
                        "run needs --corpus1, --corpus2, --targets and --output");
            }
            const auto artifacts = lscd::run_pipeline(config);
            print_rule(artifacts.rule);
            std::cerr << "artifacts written to " << artifacts.output.string() << "\n";
        }

        if (sweep_cmd->parsed()) {
            sweep_config.sgns = sweep_sgns.config;
            sweep_config.method = lscd::parse_method(sweep_method);
            sweep_config.direction = parse_run_direction(sweep_direction);
            sweep_config.statistic = lscd::parse_statistic(sweep_statistic);
            sweep_config.threshold = lscd::ThresholdKind::binary_threshold;
            sweep_config.corpus1 = sweep_corpus1;
            sweep_config.corpus2 = sweep_corpus2;
            sweep_config.targets = sweep_targets;
            sweep_config.output = sweep_output;
            if (sweep_dims.empty())
                for (int d = 25; d <= 300; d += 25) sweep_dims.push_back(d);
            const auto rows = lscd::sweep_dimensions(sweep_config, sweep_dims, sweep_gold);
            for (const auto& row : rows) {
                std::cout << "dim " << row.dim << ": ";
                if (!row.error.empty())
                    std::cout << "failed (" << row.error << ")";
                else
                    std::cout << "accuracy "
                              << (row.accuracy ? lscd::format_fixed(*row.accuracy, 3) : "-")
                              << ", spearman "
                              << (row.spearman ? lscd::format_fixed(*row.spearman, 3) : "-");
                std::cout << "\n";
            }
        }
    } catch (const lscd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(lscd::ExitCode::data);
    }
    return 0;
}
