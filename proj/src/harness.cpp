#include "cartograf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cartograf/config.hpp"
#include "cartograf/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cartograf::harness {

GridRunSpec parse_grid_run(const std::string& s) {
    GridRunSpec spec;
    spec.name = s;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, '+')) {
        size_t colon = part.find(':');
        if (colon == std::string::npos)
            throw DataError("grid run `" + s + "`: expected region:fraction");
        dynamics::SelectionSpec sel;
        sel.region = dynamics::region_from_string(part.substr(0, colon));
        try {
            sel.fraction = std::stod(part.substr(colon + 1));
        } catch (const std::exception&) {
            throw DataError("grid run `" + s + "`: bad fraction");
        }
        if (sel.fraction < 0.0 || sel.fraction > 1.0)
            throw DataError("grid run `" + s + "`: fraction out of [0,1]");
        spec.selection.push_back(sel);
    }
    if (spec.selection.empty()) throw DataError("grid run `" + s + "`: empty");
    return spec;
}

std::vector<GridRunSpec> default_grid() {
    const char* runs[] = {
        "easy:0.50",           "ambiguous:0.15+easy:0.15",
        "ambiguous:0.15",      "ambiguous:0.25",
        "ambiguous:0.45",      "ambiguous:0.75",
        "ambiguous:0.45+easy:0.25", "hard:0.50",
    };
    std::vector<GridRunSpec> grid;
    for (const char* r : runs) grid.push_back(parse_grid_run(r));
    return grid;
}

void ExperimentConfig::validate() const {
    std::set<std::string> names;
    for (const auto& run : grid) {
        if (!names.insert(run.name).second)
            throw DataError("duplicate grid run name: " + run.name);
        for (const auto& sel : run.selection)
            if (sel.fraction < 0.0 || sel.fraction > 1.0)
                throw DataError("grid run " + run.name + ": fraction out of [0,1]");
    }
    if (n_seeds < 1) throw DataError("n_seeds must be >= 1");
    if (convergence_threshold < 0.0 || convergence_threshold > 1.0)
        throw DataError("convergence_threshold must be in [0,1]");
    if (!use_synth && (train_path.empty() || test_path.empty()))
        throw DataError("file mode needs both data.train and data.test paths");
    model.validate();
    train.validate();
}

namespace {

std::string resolve_against(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return p;
    return (base / path).lexically_normal().string();
}

std::set<std::string> load_pronouns_or_builtin(const std::string& path) {
    if (path.empty()) return features::builtin_pronouns();
    return features::load_token_set(path);
}

} // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    auto kv = config::KeyValues::parse_file(path);
    const fs::path base = fs::path(path).parent_path();

    ExperimentConfig c;
    c.name = kv.get_string("name", c.name);
    c.out_dir = resolve_against(base, kv.get_string("out_dir", c.out_dir));
    c.n_seeds = static_cast<int>(kv.get_int("n_seeds", c.n_seeds));
    c.convergence_threshold = kv.get_double("convergence_threshold", c.convergence_threshold);
    c.pronouns_path = resolve_against(base, kv.get_string("pronouns", ""));

    c.train_path = resolve_against(base, kv.get_string("data.train", ""));
    c.test_path = resolve_against(base, kv.get_string("data.test", ""));
    c.use_synth = c.train_path.empty();

    c.synth.seed = kv.get_u64("synth.seed", 11);
    c.synth.n_per_class_per_domain =
        static_cast<int>(kv.get_int("synth.n_per_class_per_domain", 50));
    c.synth.train_domains =
        kv.get_string_list("synth.train_domains", {"tweets", "reviews", "news"});
    c.synth.test_domains = kv.get_string_list("synth.test_domains", {"forums", "essays"});
    c.synth.sentiment_skew = kv.get_double("synth.sentiment_skew", 0.3);

    c.features.max_len = static_cast<int>(kv.get_int("features.max_len", c.features.max_len));
    c.features.dim = static_cast<int>(kv.get_int("features.dim", c.features.dim));
    c.features.lexicon_path = resolve_against(base, kv.get_string("features.lexicon", ""));
    c.features.dictionary_path = resolve_against(base, kv.get_string("features.dictionary", ""));
    c.features.stoplist_path = resolve_against(base, kv.get_string("features.stoplist", ""));
    c.features.frequency_path = resolve_against(base, kv.get_string("features.frequencies", ""));
    c.features.embeddings_path = resolve_against(base, kv.get_string("features.embeddings", ""));

    c.model.conv_channels = kv.get_int_list("model.conv_channels", c.model.conv_channels);
    c.model.kernel_size = static_cast<int>(kv.get_int("model.kernel_size", c.model.kernel_size));
    c.model.fc_dims = kv.get_int_list("model.fc_dims", c.model.fc_dims);
    c.model.dropout_rate = kv.get_double("model.dropout", c.model.dropout_rate);
    c.model.input_dim = c.features.dim;
    c.model.max_len = c.features.max_len;
    c.model.scalar_dim = features::kScalarDim;

    c.train.epochs = static_cast<int>(kv.get_int("train.epochs", c.train.epochs));
    c.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", c.train.batch_size));
    c.train.learning_rate = kv.get_double("train.learning_rate", c.train.learning_rate);
    std::string opt = kv.get_string("train.optimizer", "adam");
    if (opt == "adam") c.train.optimizer = model::Optimizer::adam;
    else if (opt == "sgd") c.train.optimizer = model::Optimizer::sgd;
    else throw DataError(path + ": train.optimizer must be adam|sgd");
    c.train.shuffle = kv.get_bool("train.shuffle", true);
    c.train.seed = kv.get_u64("seed", 7);
    if (const char* env = std::getenv("CARTOGRAF_SEED"); env != nullptr && *env != '\0') {
        try {
            c.train.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw DataError("CARTOGRAF_SEED is not an unsigned integer");
        }
    }

    auto runs = kv.get_string_list("grid.runs", {});
    if (!runs.empty()) {
        c.grid.clear();
        for (const auto& r : runs) c.grid.push_back(parse_grid_run(r));
    }

    auto unread = kv.unread_keys();
    if (!unread.empty()) {
        std::string msg = path + ": unknown keys:";
        for (const auto& k : unread) msg += " " + k;
        throw DataError(msg);
    }
    c.validate();
    return c;
}

Pipeline prepare_pipeline(const ExperimentConfig& config) {
    Pipeline p;
    if (config.use_synth) {
        auto [train_split, test_split] = corpus::generate_synthetic_corpus(config.synth);
        p.train_split = std::move(train_split);
        p.test_split = std::move(test_split);
    } else {
        p.train_split = corpus::load_dataset(config.train_path, corpus::SplitName::train);
        p.test_split = corpus::load_dataset(config.test_path, corpus::SplitName::test);
    }

    auto resources = features::load_resources(config.features);
    p.train_features = features::featurize_split(p.train_split, config.features, resources);
    p.test_features = features::featurize_split(p.test_split, config.features, resources);
    p.stats = corpus::corpus_stats(p.train_split, load_pronouns_or_builtin(config.pronouns_path),
                                   resources.lexicon, 25);
    return p;
}

namespace {

void finish_run(RunResult& r, const ExperimentConfig& config, const Pipeline& pipeline,
                const model::TrainResult& trained,
                const std::vector<features::FeaturizedExample>& train_subset) {
    r.epoch_losses = trained.epoch_losses;
    r.final_train_accuracy = model::evaluate(trained.params, train_subset).accuracy;
    r.converged = r.final_train_accuracy >= config.convergence_threshold;
    auto metrics = model::evaluate(trained.params, pipeline.test_features);
    r.macro_f1 = metrics.macro_f1;
    r.accuracy = metrics.accuracy;
}

} // namespace

RunResult run_baseline(const ExperimentConfig& config, const Pipeline& pipeline, uint64_t seed,
                       dynamics::DynamicsLog& log_out) {
    RunResult r;
    r.name = "baseline";
    r.seed = seed;
    r.subset_size = static_cast<long long>(pipeline.train_features.size());
    r.subset_pct_of_train = 1.0;

    model::TrainConfig tc = config.train;
    tc.seed = seed;
    auto initial = model::init_model(config.model, seed);
    auto recorder = [&](const model::ParameterSet& params, int epoch) {
        dynamics::record_epoch(params, pipeline.train_features, epoch, log_out);
    };
    auto trained = model::train(std::move(initial), pipeline.train_features, tc, recorder);
    finish_run(r, config, pipeline, trained, pipeline.train_features);
    return r;
}

RunResult run_one(const ExperimentConfig& config, const Pipeline& pipeline, uint64_t seed,
                  const GridRunSpec& spec,
                  const std::vector<dynamics::DynamicsSummary>& summaries) {
    RunResult r;
    r.name = spec.name;
    r.seed = seed;

    std::vector<std::string> ids;
    for (size_t i = 0; i < spec.selection.size(); ++i) {
        auto part = dynamics::select_subset(summaries, spec.selection[i]);
        ids = i == 0 ? std::move(part) : dynamics::mix_subsets(ids, part);
    }
    r.subset_size = static_cast<long long>(ids.size());
    const double n_train = static_cast<double>(pipeline.train_features.size());
    r.subset_pct_of_train = static_cast<double>(ids.size()) / n_train;

    if (ids.empty()) {
        r.failed = true;
        r.failure_reason = "empty subset";
        return r;
    }

    std::map<std::string, const features::FeaturizedExample*> by_id;
    for (const auto& ex : pipeline.train_features) by_id[ex.id] = &ex;
    std::vector<features::FeaturizedExample> subset;
    subset.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("subset id not in train set: " + id);
        subset.push_back(*it->second);
    }

    model::TrainConfig tc = config.train;
    tc.seed = seed;
    auto initial = model::init_model(config.model, seed); // same init as the baseline
    auto trained = model::train(std::move(initial), subset, tc, nullptr);
    finish_run(r, config, pipeline, trained, subset);
    return r;
}

std::vector<RunResult> run_grid(const ExperimentConfig& config, const Pipeline& pipeline,
                                uint64_t seed,
                                const std::vector<dynamics::DynamicsSummary>& summaries) {
    std::vector<RunResult> out;
    out.reserve(config.grid.size());
    for (const auto& spec : config.grid)
        out.push_back(run_one(config, pipeline, seed, spec, summaries));
    return out;
}

// --- results.json / report.md ---------------------------------------------

namespace {

json run_to_json(const RunResult& r) {
    json j;
    j["name"] = r.name;
    j["seed"] = r.seed;
    j["subset_size"] = r.subset_size;
    j["subset_pct_of_train"] = r.subset_pct_of_train;
    j["macro_f1"] = r.macro_f1;
    j["accuracy"] = r.accuracy;
    j["final_train_accuracy"] = r.final_train_accuracy;
    j["converged"] = r.converged;
    j["epoch_losses"] = r.epoch_losses;
    j["failed"] = r.failed;
    j["failure_reason"] = r.failure_reason;
    return j;
}

json stats_to_json(const corpus::CorpusStats& stats) {
    json j;
    for (const auto& [label, n] : stats.pronoun_count)
        j["pronoun_count"][corpus::to_string(label)] = n;
    for (const auto& [label, v] : stats.mean_pos) j["mean_pos"][corpus::to_string(label)] = v;
    for (const auto& [label, v] : stats.mean_neg) j["mean_neg"][corpus::to_string(label)] = v;
    for (const auto& [label, bins] : stats.length_histogram) {
        json rows = json::array();
        for (const auto& b : bins) rows.push_back({b.start, b.count});
        j["length_histogram"][corpus::to_string(label)] = rows;
    }
    return j;
}

std::string optimizer_name(model::Optimizer o) {
    return o == model::Optimizer::adam ? "adam" : "sgd";
}

} // namespace

std::string results_json(const ExperimentConfig& config, const std::vector<RunResult>& baselines,
                         const std::vector<RunResult>& grid_results,
                         const corpus::CorpusStats& stats,
                         const std::vector<std::string>& artifact_files) {
    json j;
    j["experiment"] = config.name;

    json cfg;
    cfg["n_seeds"] = config.n_seeds;
    cfg["convergence_threshold"] = config.convergence_threshold;
    if (config.use_synth) {
        cfg["synth"]["seed"] = config.synth.seed;
        cfg["synth"]["n_per_class_per_domain"] = config.synth.n_per_class_per_domain;
        cfg["synth"]["train_domains"] = config.synth.train_domains;
        cfg["synth"]["test_domains"] = config.synth.test_domains;
        cfg["synth"]["sentiment_skew"] = config.synth.sentiment_skew;
    } else {
        cfg["data"]["train"] = fs::path(config.train_path).filename().string();
        cfg["data"]["test"] = fs::path(config.test_path).filename().string();
    }
    cfg["features"]["max_len"] = config.features.max_len;
    cfg["features"]["dim"] = config.features.dim;
    cfg["model"]["conv_channels"] = config.model.conv_channels;
    cfg["model"]["kernel_size"] = config.model.kernel_size;
    cfg["model"]["fc_dims"] = config.model.fc_dims;
    cfg["model"]["dropout"] = config.model.dropout_rate;
    cfg["train"]["epochs"] = config.train.epochs;
    cfg["train"]["batch_size"] = config.train.batch_size;
    cfg["train"]["learning_rate"] = config.train.learning_rate;
    cfg["train"]["optimizer"] = optimizer_name(config.train.optimizer);
    cfg["train"]["shuffle"] = config.train.shuffle;
    cfg["train"]["base_seed"] = config.train.seed;
    json grid_names = json::array();
    for (const auto& g : config.grid) grid_names.push_back(g.name);
    cfg["grid"] = grid_names;
    j["config"] = cfg;

    json seeds = json::array();
    for (int i = 0; i < config.n_seeds; ++i) seeds.push_back(config.train.seed + static_cast<uint64_t>(i));
    j["seeds"] = seeds;

    json base = json::array();
    for (const auto& r : baselines) base.push_back(run_to_json(r));
    j["baseline"] = base;

    json grid = json::array();
    for (const auto& r : grid_results) grid.push_back(run_to_json(r));
    j["grid"] = grid;

    j["corpus_stats"] = stats_to_json(stats);
    j["artifacts"] = artifact_files;

    return j.dump(2) + "\n";
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

std::string num(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string run_row(const json& r) {
    std::string row = "| " + r.at("name").get<std::string>() + " | " +
                      std::to_string(r.at("seed").get<uint64_t>()) + " | " +
                      std::to_string(r.at("subset_size").get<long long>()) + " | " +
                      pct(r.at("subset_pct_of_train").get<double>()) + " | ";
    if (r.at("failed").get<bool>()) {
        row += "- | - | failed: " + r.at("failure_reason").get<std::string>() + " |";
    } else {
        row += num(r.at("macro_f1").get<double>()) + " | " + num(r.at("accuracy").get<double>()) +
               " | " + (r.at("converged").get<bool>() ? "yes" : "no") + " |";
    }
    return row;
}

// the two dominant well-separated peaks of a length histogram
std::string peaks_of(const json& bins) {
    long best_start = 0, second_start = -1;
    long long best = -1, second = -1;
    for (const auto& b : bins) {
        long start = b[0].get<long>();
        long long count = b[1].get<long long>();
        if (count > best) {
            best = count;
            best_start = start;
        }
    }
    for (const auto& b : bins) {
        long start = b[0].get<long>();
        long long count = b[1].get<long long>();
        if (std::labs(start - best_start) > 150 && count > second) {
            second = count;
            second_start = start;
        }
    }
    std::string s = "near " + std::to_string(best_start) + " chars";
    if (second_start >= 0) s += " and " + std::to_string(second_start) + " chars";
    return s;
}

} // namespace

std::string report_markdown(const std::string& results_json_text) {
    json j;
    try {
        j = json::parse(results_json_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("results.json: ") + e.what());
    }

    std::string md = "# " + j.at("experiment").get<std::string>() + "\n\n";

    md += "## Runs\n\n";
    md += "| run | seed | subset size | % of train | macro F1 | accuracy | converged |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& r : j.at("baseline")) md += run_row(r) + "\n";
    for (const auto& r : j.at("grid")) md += run_row(r) + "\n";
    md += "\n";

    const auto& stats = j.at("corpus_stats");
    md += "## Train corpus statistics\n\n";
    md += "| statistic | generated | human |\n|---|---|---|\n";
    md += "| pronoun count | " +
          std::to_string(stats.at("pronoun_count").at("generated").get<long long>()) + " | " +
          std::to_string(stats.at("pronoun_count").at("human").get<long long>()) + " |\n";
    md += "| mean positive score | " + num(stats.at("mean_pos").at("generated").get<double>()) +
          " | " + num(stats.at("mean_pos").at("human").get<double>()) + " |\n";
    md += "| mean negative score | " + num(stats.at("mean_neg").at("generated").get<double>()) +
          " | " + num(stats.at("mean_neg").at("human").get<double>()) + " |\n\n";
    md += "Text length peaks: generated " +
          peaks_of(stats.at("length_histogram").at("generated")) + "; human " +
          peaks_of(stats.at("length_histogram").at("human")) + ".\n\n";

    const auto& artifacts = j.at("artifacts");
    if (!artifacts.empty()) {
        md += "## Artifacts\n\n";
        for (const auto& a : artifacts) {
            const std::string name = a.get<std::string>();
            if (name.size() > 4 && name.substr(name.size() - 4) == ".svg")
                md += "![" + name + "](" + name + ")\n\n";
            else
                md += "- `" + name + "`\n";
        }
    }
    return md;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

} // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);
    const fs::path out(config.out_dir);

    Pipeline pipeline = prepare_pipeline(config);
    std::vector<std::string> artifacts;
    if (config.use_synth) {
        corpus::save_dataset(pipeline.train_split, (out / "train.tsv").string());
        corpus::save_dataset(pipeline.test_split, (out / "test.tsv").string());
        artifacts.push_back("train.tsv");
        artifacts.push_back("test.tsv");
    }

    ExperimentArtifacts result;
    for (int s = 0; s < config.n_seeds; ++s) {
        const uint64_t seed = config.train.seed + static_cast<uint64_t>(s);
        const std::string suffix = config.n_seeds == 1 ? "" : "-s" + std::to_string(seed);

        dynamics::DynamicsLog log;
        result.baselines.push_back(run_baseline(config, pipeline, seed, log));
        log.write_jsonl((out / ("dynamics" + suffix + ".jsonl")).string());
        artifacts.push_back("dynamics" + suffix + ".jsonl");

        auto summaries = dynamics::summarize(log);
        dynamics::write_summaries_csv((out / ("summaries" + suffix + ".csv")).string(), summaries);
        artifacts.push_back("summaries" + suffix + ".csv");

        if (s == 0) {
            cartoplot::PlotConfig plot_config;
            write_file((out / "map.svg").string(), cartoplot::render_map(summaries, plot_config));
            artifacts.push_back("map.svg");
            for (auto dim : {dynamics::Dimension::confidence, dynamics::Dimension::variability,
                             dynamics::Dimension::correctness}) {
                auto hist = dynamics::density_histogram(summaries, dim, 10);
                const std::string name = std::string("density_") + dynamics::to_string(dim) + ".svg";
                write_file((out / name).string(),
                           cartoplot::render_density(hist, dynamics::to_string(dim), plot_config));
                artifacts.push_back(name);
            }
            write_file((out / "plot_table.csv").string(), cartoplot::export_plot_table(summaries));
            artifacts.push_back("plot_table.csv");
        }

        auto grid = run_grid(config, pipeline, seed, summaries);
        for (auto& r : grid) result.grid_results.push_back(std::move(r));
    }

    const std::string results =
        results_json(config, result.baselines, result.grid_results, pipeline.stats, artifacts);
    result.results_json_path = (out / "results.json").string();
    write_file(result.results_json_path, results);

    result.report_md_path = (out / "report.md").string();
    write_file(result.report_md_path, report_markdown(results));
    return result;
}

} // namespace cartograf::harness
