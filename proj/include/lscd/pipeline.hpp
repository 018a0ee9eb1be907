#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lscd/align.hpp"
#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/errors.hpp"
#include "lscd/eval.hpp"
#include "lscd/io_util.hpp"
#include "lscd/lsc.hpp"
#include "lscd/sgns.hpp"

namespace lscd {

// One end-to-end run: two corpora, one target list, one method/threshold
// combination, everything needed to reproduce the outputs byte-for-byte in
// deterministic (workers=1) mode.
struct RunConfig {
    std::string language = "language";
    std::filesystem::path corpus1; // earlier
    std::filesystem::path corpus2; // later
    std::filesystem::path targets;
    std::filesystem::path output;

    SgnsConfig sgns{};
    MapMethod method = MapMethod::cca;
    MapDirection direction = MapDirection::s_to_t; // forward
    ThresholdKind threshold = ThresholdKind::binary_threshold;
    Statistic statistic = Statistic::mean;
    GlobalPooling pooling = GlobalPooling::pooled;
    int nn_k = 100;
    double cca_reg = 1e-8;
    MissingPolicy missing{};
    // Drop targets from the seed dictionary; defaults to yes for cca and no
    // for the other methods (which use every shared word form).
    std::optional<bool> exclude_targets;
    bool save_text_spaces = false;
    bool force = false; // replace an existing output directory
    std::string preset; // informational

    bool exclude_targets_effective() const {
        return exclude_targets.value_or(method == MapMethod::cca);
    }
};

// The eight named submission presets.
inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"cca-nn",  "cca-nn-r", "cca-bin",
                                                   "cca-bin-r", "ort-bin",  "ort-gl",
                                                   "uns-bin", "uns-gl"};
    return names;
}

inline void apply_preset(RunConfig& config, const std::string& name) {
    config.preset = name;
    if (name == "cca-nn" || name == "cca-nn-r" || name == "cca-bin" || name == "cca-bin-r") {
        config.method = MapMethod::cca;
        config.statistic = Statistic::mean;
        config.direction = (name == "cca-nn-r" || name == "cca-bin-r") ? MapDirection::t_to_s
                                                                       : MapDirection::s_to_t;
        config.threshold = (name == "cca-nn" || name == "cca-nn-r")
                               ? ThresholdKind::nearest_neighbors
                               : ThresholdKind::binary_threshold;
        return;
    }
    if (name == "ort-bin" || name == "ort-gl" || name == "uns-bin" || name == "uns-gl") {
        config.method = (name[0] == 'o') ? MapMethod::orthogonal : MapMethod::unsupervised;
        config.direction = MapDirection::s_to_t;
        config.statistic = Statistic::median;
        config.threshold = (name == "ort-gl" || name == "uns-gl")
                               ? ThresholdKind::global_threshold
                               : ThresholdKind::binary_threshold;
        return;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config <-> JSON (manifest re-runs).

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["language"] = c.language;
    j["corpus1"] = c.corpus1.string();
    j["corpus2"] = c.corpus2.string();
    j["targets"] = c.targets.string();
    j["output"] = c.output.string();
    j["method"] = to_string(c.method);
    j["direction"] = c.direction == MapDirection::s_to_t ? "forward" : "reversed";
    j["threshold"] = to_string(c.threshold);
    j["statistic"] = to_string(c.statistic);
    j["pooling"] = c.pooling == GlobalPooling::pooled ? "pooled" : "mean_of_statistics";
    j["nn_k"] = c.nn_k;
    j["cca_reg"] = c.cca_reg;
    j["missing_fixed"] = c.missing.use_fixed_degree;
    j["missing_degree"] = c.missing.fixed_degree;
    if (c.exclude_targets) j["exclude_targets"] = *c.exclude_targets;
    j["save_text_spaces"] = c.save_text_spaces;
    j["preset"] = c.preset;
    j["dim"] = c.sgns.dim;
    j["epochs"] = c.sgns.epochs;
    j["negatives"] = c.sgns.negatives;
    j["window"] = c.sgns.window;
    j["min_count"] = c.sgns.min_count;
    j["initial_lr"] = c.sgns.initial_lr;
    j["final_lr"] = c.sgns.final_lr;
    j["subsample_t"] = c.sgns.subsample_t;
    j["seed"] = c.sgns.seed;
    j["workers"] = c.sgns.workers;
    j["shuffle_sentences"] = c.sgns.shuffle_sentences;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.language = j.at("language").get<std::string>();
    c.corpus1 = j.at("corpus1").get<std::string>();
    c.corpus2 = j.at("corpus2").get<std::string>();
    c.targets = j.at("targets").get<std::string>();
    c.output = j.at("output").get<std::string>();
    c.method = parse_method(j.at("method").get<std::string>());
    const auto dir = j.at("direction").get<std::string>();
    if (dir != "forward" && dir != "reversed")
        throw ConfigError("direction must be forward|reversed");
    c.direction = dir == "forward" ? MapDirection::s_to_t : MapDirection::t_to_s;
    c.threshold = parse_threshold_kind(j.at("threshold").get<std::string>());
    c.statistic = parse_statistic(j.at("statistic").get<std::string>());
    c.pooling = j.at("pooling").get<std::string>() == "pooled"
                    ? GlobalPooling::pooled
                    : GlobalPooling::mean_of_statistics;
    c.nn_k = j.at("nn_k").get<int>();
    c.cca_reg = j.at("cca_reg").get<double>();
    c.missing.use_fixed_degree = j.at("missing_fixed").get<bool>();
    c.missing.fixed_degree = j.at("missing_degree").get<double>();
    if (j.contains("exclude_targets")) c.exclude_targets = j.at("exclude_targets").get<bool>();
    c.save_text_spaces = j.at("save_text_spaces").get<bool>();
    c.preset = j.value("preset", "");
    c.sgns.dim = j.at("dim").get<int>();
    c.sgns.epochs = j.at("epochs").get<int>();
    c.sgns.negatives = j.at("negatives").get<int>();
    c.sgns.window = j.at("window").get<int>();
    c.sgns.min_count = j.at("min_count").get<int>();
    c.sgns.initial_lr = j.at("initial_lr").get<double>();
    c.sgns.final_lr = j.at("final_lr").get<double>();
    c.sgns.subsample_t = j.at("subsample_t").get<double>();
    c.sgns.seed = j.at("seed").get<uint64_t>();
    c.sgns.workers = j.at("workers").get<int>();
    c.sgns.shuffle_sentences = j.at("shuffle_sentences").get<bool>();
    return c;
}

// ---------------------------------------------------------------------------
// Report serialization (one object per language).

inline nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json langs = nlohmann::json::array();
    for (const auto& [language, ev] : report.per_language) {
        nlohmann::json j;
        j["language"] = language;
        j["accuracy"] = ev.accuracy ? nlohmann::json(*ev.accuracy) : nlohmann::json();
        j["spearman"] = ev.spearman ? nlohmann::json(*ev.spearman) : nlohmann::json();
        j["n"] = ev.n;
        j["threshold"] = ev.optimal ? nlohmann::json(ev.optimal->t) : nlohmann::json();
        langs.push_back(std::move(j));
    }
    nlohmann::json averages;
    averages["accuracy"] =
        report.average_accuracy ? nlohmann::json(*report.average_accuracy) : nlohmann::json();
    averages["spearman"] =
        report.average_spearman ? nlohmann::json(*report.average_spearman) : nlohmann::json();
    return nlohmann::json{{"per_language", std::move(langs)}, {"averages", std::move(averages)}};
}

// ---------------------------------------------------------------------------
// Pipeline.

namespace detail {

template <typename F>
auto run_stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.exit_code(), "stage " + name + ": " + e.what());
    }
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

} // namespace detail

struct RunArtifacts {
    std::filesystem::path output;
    std::vector<ChangeScore> scores;
    std::vector<BinaryVerdict> verdicts;
    ThresholdRule rule;
};

// Trains both spaces, aligns, scores, classifies and writes every artifact.
// Outputs land in a temporary sibling directory first and are promoted with a
// single rename, so an interrupted run never leaves a half-written output.
inline RunArtifacts run_pipeline(const RunConfig& config) {
    if (config.output.empty()) throw ConfigError("run: output directory is required");
    config.sgns.validate();

    namespace fs = std::filesystem;
    const fs::path output = config.output;
    if (fs::exists(output) && !config.force)
        throw DataError("output directory '" + output.string() +
                        "' already exists (use --force to replace)");

    const fs::path tmp = output.parent_path().empty()
                             ? fs::path(output.string() + ".tmp")
                             : output.parent_path() / (output.filename().string() + ".tmp");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp / "answer" / "task1");
    fs::create_directories(tmp / "answer" / "task2");

    try {
        const auto targets =
            detail::run_stage("corpus", [&] { return load_targets(config.targets); });
        const auto corpus1 = detail::run_stage("corpus", [&] {
            return load_corpus(config.corpus1, std::nullopt, "C1");
        });
        const auto corpus2 = detail::run_stage("corpus", [&] {
            return load_corpus(config.corpus2, std::nullopt, "C2");
        });

        SgnsConfig sgns1 = config.sgns;
        SgnsConfig sgns2 = config.sgns;
        sgns2.seed = config.sgns.seed + 1; // independent stream per corpus
        const auto space1 = detail::run_stage("sgns", [&] { return train(corpus1, sgns1); });
        const auto space2 = detail::run_stage("sgns", [&] { return train(corpus2, sgns2); });

        save_space_binary(space1, tmp / "space_c1.bin");
        save_space_binary(space2, tmp / "space_c2.bin");
        if (config.save_text_spaces) {
            save_space_text(space1, tmp / "space_c1.txt");
            save_space_text(space2, tmp / "space_c2.txt");
        }

        AlignOptions align_opts;
        align_opts.cca_reg = config.cca_reg;
        const TargetSet exclude =
            config.exclude_targets_effective() ? targets : TargetSet{};
        const auto pair = detail::run_stage("align", [&] {
            return align_pair(space1, space2, config.method, config.direction, exclude,
                              align_opts);
        });
        save_map(pair.map, tmp / "map.txt");
        if (config.method != MapMethod::unsupervised) {
            const auto& fit_source =
                config.direction == MapDirection::s_to_t ? space1 : space2;
            const auto& fit_target =
                config.direction == MapDirection::s_to_t ? space2 : space1;
            save_dictionary(build_seed_dictionary(fit_source, fit_target, exclude),
                            tmp / "seed_dictionary.tsv");
        }

        auto scores = detail::run_stage("score", [&] {
            return score_targets(pair, targets, config.missing);
        });

        RunArtifacts artifacts;
        detail::run_stage("classify", [&] {
            switch (config.threshold) {
                case ThresholdKind::binary_threshold: {
                    auto res = threshold_binary(scores, config.statistic);
                    artifacts.rule = res.rule;
                    artifacts.verdicts = std::move(res.verdicts);
                    break;
                }
                case ThresholdKind::global_threshold: {
                    std::map<std::string, std::vector<ChangeScore>> one;
                    one[config.language] = scores;
                    auto res = threshold_global(one, config.statistic, config.pooling);
                    artifacts.rule = res.rule;
                    artifacts.verdicts = std::move(res.verdicts.at(config.language));
                    break;
                }
                case ThresholdKind::nearest_neighbors: {
                    auto res = threshold_nearest_neighbors(pair, targets, config.nn_k);
                    attach_nn_sizes(scores, res);
                    artifacts.rule = res.rule;
                    artifacts.verdicts = std::move(res.verdicts);
                    break;
                }
            }
            return 0;
        });

        write_scores(scores, tmp / "scores.tsv");
        write_task1_answers(artifacts.verdicts, tmp / "answer" / "task1" / (config.language + ".txt"));
        write_task2_answers(scores, tmp / "answer" / "task2" / (config.language + ".txt"));

        nlohmann::json manifest;
        manifest["format"] = "lscd-manifest";
        manifest["version"] = 1;
        manifest["config"] = run_config_to_json(config);
        manifest["inputs"] = {
            {"corpus1", detail::hex64(fnv1a64_file(config.corpus1))},
            {"corpus2", detail::hex64(fnv1a64_file(config.corpus2))},
            {"targets", detail::hex64(fnv1a64_file(config.targets))},
        };
        manifest["corpus_stats"] = {
            {"corpus1_tokens", corpus1.token_count},
            {"corpus2_tokens", corpus2.token_count},
            {"vocab1", space1.vocab.size()},
            {"vocab2", space2.vocab.size()},
        };
        if (auto m = mean_target_context_size(corpus1, targets, config.sgns.window))
            manifest["corpus_stats"]["corpus1_mean_target_context"] = *m;
        if (auto m = mean_target_context_size(corpus2, targets, config.sgns.window))
            manifest["corpus_stats"]["corpus2_mean_target_context"] = *m;
        manifest["rule"] = {{"kind", to_string(artifacts.rule.kind)},
                            {"statistic", to_string(artifacts.rule.statistic)},
                            {"value", artifacts.rule.value}};
        manifest["deterministic"] = config.sgns.workers == 1;
        std::ofstream mf(tmp / "manifest.json", std::ios::binary);
        mf << manifest.dump(2) << '\n';
        if (!mf) throw IoError("cannot write manifest");

        if (fs::exists(output)) fs::remove_all(output);
        fs::rename(tmp, output);

        artifacts.output = output;
        artifacts.scores = std::move(scores);
        return artifacts;
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
}

inline RunConfig load_manifest_config(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest '" + manifest_path.string() + "'");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest '" + manifest_path.string() + "': " + e.what());
    }
    if (!manifest.contains("config"))
        throw FormatError("manifest '" + manifest_path.string() + "' has no config object");
    try {
        return run_config_from_json(manifest.at("config"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest '" + manifest_path.string() + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Evaluation over an answer directory tree against gold files with the same
// layout: <dir>/task1/<language>.txt and <dir>/task2/<language>.txt.

inline EvalReport evaluate_answers(const std::filesystem::path& answers_dir,
                                   const std::filesystem::path& gold_dir) {
    namespace fs = std::filesystem;
    const fs::path gold_task1 = gold_dir / "task1";
    if (!fs::is_directory(gold_task1))
        throw DataError("gold directory '" + gold_task1.string() + "' not found");

    std::map<std::string, LanguageEval> per_language;
    std::vector<fs::path> gold_files;
    for (const auto& entry : fs::directory_iterator(gold_task1))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            gold_files.push_back(entry.path());
    std::sort(gold_files.begin(), gold_files.end());
    if (gold_files.empty())
        throw DataError("no gold task1 files in '" + gold_task1.string() + "'");

    for (const auto& gold_file : gold_files) {
        const std::string language = gold_file.stem().string();
        const auto gold_binary = load_gold_binary(gold_file);

        const fs::path answer1 = answers_dir / "task1" / (language + ".txt");
        if (!fs::exists(answer1))
            throw CoverageError("no task1 answers for language '" + language + "' at " +
                                answer1.string());
        std::vector<BinaryVerdict> verdicts;
        for (const auto& [word, value] : load_tsv_pairs(answer1))
            verdicts.push_back(
                {word, parse_int(value, "label in " + answer1.string()) != 0});

        LanguageEval ev;
        ev.accuracy = accuracy(verdicts, gold_binary);
        ev.n = static_cast<long long>(gold_binary.size());

        const fs::path gold2 = gold_dir / "task2" / (language + ".txt");
        if (fs::exists(gold2)) {
            const auto gold_graded = load_gold_graded(gold2);
            const fs::path answer2 = answers_dir / "task2" / (language + ".txt");
            if (!fs::exists(answer2))
                throw CoverageError("no task2 answers for language '" + language + "' at " +
                                    answer2.string());
            ev.spearman = spearman(load_gold_graded(answer2), gold_graded);
            ev.optimal = optimal_threshold(gold_graded, gold_binary);
        }
        per_language[language] = ev;
    }
    return build_report(per_language);
}

// ---------------------------------------------------------------------------
// Embedding-size sweep: one pipeline run per dimension, evaluated against
// gold. Individual failures mark their row and the sweep continues.

struct SweepRow {
    int dim = 0;
    std::optional<double> accuracy;
    std::optional<double> spearman;
    std::string error;
};

inline std::vector<SweepRow> sweep_dimensions(const RunConfig& base,
                                              const std::vector<int>& dims,
                                              const std::filesystem::path& gold_dir) {
    if (dims.empty()) throw ConfigError("sweep: need at least one dimension");
    namespace fs = std::filesystem;
    fs::create_directories(base.output);

    std::vector<SweepRow> rows;
    for (const int dim : dims) {
        SweepRow row;
        row.dim = dim;
        try {
            RunConfig config = base;
            config.sgns.dim = dim;
            config.output = base.output / ("dim-" + std::to_string(dim));
            config.force = true;
            run_pipeline(config);
            const auto report = evaluate_answers(config.output / "answer", gold_dir);
            const auto it = report.per_language.find(config.language);
            if (it != report.per_language.end()) {
                row.accuracy = it->second.accuracy;
                row.spearman = it->second.spearman;
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    // Plottable series and a summary table.
    std::ofstream series(base.output / ("series_" + base.language + ".tsv"), std::ios::binary);
    series << "dim\tspearman\n";
    std::ofstream table(base.output / "sweep_table.txt", std::ios::binary);
    table << "dim    accuracy  spearman\n";
    std::optional<int> best_dim;
    double best_rho = -2.0;
    for (const auto& row : rows) {
        if (row.spearman) series << row.dim << '\t' << format_fixed(*row.spearman, 6) << '\n';
        std::string line = std::to_string(row.dim);
        line.resize(std::max<std::size_t>(line.size() + 1, 7), ' ');
        if (!row.error.empty()) {
            line += "failed: " + row.error;
        } else {
            line += row.accuracy ? format_fixed(*row.accuracy, 3) : "-";
            line.resize(std::max<std::size_t>(line.size() + 1, 17), ' ');
            line += row.spearman ? format_fixed(*row.spearman, 3) : "-";
        }
        table << line << '\n';
        if (row.spearman && *row.spearman > best_rho) {
            best_rho = *row.spearman;
            best_dim = row.dim;
        }
    }
    if (best_dim)
        table << "best dimension by spearman: " << *best_dim << " (" << format_fixed(best_rho, 3)
              << ")\n";
    return rows;
}

} // namespace lscd
