#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cartograf/errors.hpp"
#include "cartograf/harness.hpp"

namespace fs = std::filesystem;

namespace cartograf::harness {

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

std::vector<std::string> load_id_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open id file: " + path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig config_or_defaults(const std::string& path) {
    if (path.empty()) {
        ExperimentConfig c;
        c.model.input_dim = c.features.dim;
        c.model.max_len = c.features.max_len;
        return c;
    }
    return load_experiment_config(path);
}

std::string run_result_json(const RunResult& r) {
    nlohmann::json j;
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
    return j.dump(2) + "\n";
}

} // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"cartograf: dataset cartography for a text classifier"};
    app.require_subcommand(1);
    std::function<void()> action;

    // --- synth -------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    struct {
        uint64_t seed = 11;
        std::string out_dir = "out";
        int n = 50;
        std::string train_domains = "tweets,reviews,news";
        std::string test_domains = "forums,essays";
        double skew = 0.3;
    } synth_args;
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--n", synth_args.n, "examples per class per domain");
    synth->add_option("--train-domains", synth_args.train_domains, "comma-separated list");
    synth->add_option("--test-domains", synth_args.test_domains, "comma-separated list");
    synth->add_option("--skew", synth_args.skew, "sentiment skew of the generated class");
    synth->callback([&] {
        action = [&] {
            corpus::SynthConfig sc;
            sc.seed = synth_args.seed;
            sc.n_per_class_per_domain = synth_args.n;
            sc.train_domains = split_commas(synth_args.train_domains);
            sc.test_domains = split_commas(synth_args.test_domains);
            sc.sentiment_skew = synth_args.skew;
            auto [train, test] = corpus::generate_synthetic_corpus(sc);
            fs::create_directories(synth_args.out_dir);
            corpus::save_dataset(train, (fs::path(synth_args.out_dir) / "train.tsv").string());
            corpus::save_dataset(test, (fs::path(synth_args.out_dir) / "test.tsv").string());
            std::cout << "wrote " << train.examples.size() << " train / " << test.examples.size()
                      << " test examples to " << synth_args.out_dir << "\n";
        };
    });

    // --- ingest ------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "validate a dataset file and print a summary");
    struct {
        std::string in;
        std::string split = "train";
    } ingest_args;
    ingest->add_option("--in", ingest_args.in, "dataset TSV")->required();
    ingest->add_option("--split", ingest_args.split, "train|test")
        ->check(CLI::IsMember({"train", "test"}));
    ingest->callback([&] {
        action = [&] {
            auto split = corpus::load_dataset(ingest_args.in,
                                              ingest_args.split == "train"
                                                  ? corpus::SplitName::train
                                                  : corpus::SplitName::test);
            size_t human = 0;
            for (const auto& ex : split.examples)
                if (ex.label == corpus::Label::human) ++human;
            std::cout << ingest_args.split << ": " << split.examples.size() << " examples ("
                      << human << " human, " << split.examples.size() - human << " generated), "
                      << split.domains.size() << " domains:";
            for (const auto& d : split.domains) std::cout << " " << d;
            std::cout << "\n";
        };
    });

    // --- featurize ----------------------------------------------------------
    auto* featurize = app.add_subcommand("featurize", "convert a dataset to model inputs");
    struct {
        std::string config, in, out;
    } feat_args;
    featurize->add_option("--config", feat_args.config, "experiment config");
    featurize->add_option("--in", feat_args.in, "dataset TSV")->required();
    featurize->add_option("--out", feat_args.out, "features.bin path")->required();
    featurize->callback([&] {
        action = [&] {
            auto cfg = config_or_defaults(feat_args.config);
            auto split = corpus::load_dataset(feat_args.in, corpus::SplitName::train);
            auto resources = features::load_resources(cfg.features);
            auto feats = features::featurize_split(split, cfg.features, resources);
            features::write_features(feat_args.out, feats, cfg.features.max_len,
                                     cfg.features.dim);
            std::cout << "wrote " << feats.size() << " featurized examples to " << feat_args.out
                      << "\n";
        };
    });

    // --- train ---------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the classifier on a features file");
    struct {
        std::string config, features_path, out, dynamics_log;
    } train_args;
    train_cmd->add_option("--config", train_args.config, "experiment config");
    train_cmd->add_option("--features", train_args.features_path, "features.bin")->required();
    train_cmd->add_option("--out", train_args.out, "checkpoint path")->required();
    train_cmd->add_option("--dynamics-log", train_args.dynamics_log, "epoch logit JSONL path");
    train_cmd->callback([&] {
        action = [&] {
            auto cfg = config_or_defaults(train_args.config);
            auto file = features::read_features(train_args.features_path);
            cfg.model.max_len = file.max_len;
            cfg.model.input_dim = file.dim;
            dynamics::DynamicsLog log;
            model::EpochRecorder recorder = nullptr;
            if (!train_args.dynamics_log.empty())
                recorder = [&](const model::ParameterSet& params, int epoch) {
                    dynamics::record_epoch(params, file.examples, epoch, log);
                };
            auto initial = model::init_model(cfg.model, cfg.train.seed);
            auto trained = model::train(std::move(initial), file.examples, cfg.train, recorder);
            model::save_checkpoint(train_args.out, trained.params, cfg.train.seed);
            if (!train_args.dynamics_log.empty()) log.write_jsonl(train_args.dynamics_log);
            std::cout << "trained " << cfg.train.epochs << " epochs over "
                      << file.examples.size() << " examples; final epoch loss "
                      << trained.epoch_losses.back() << "\n";
        };
    });

    // --- map -----------------------------------------------------------------
    auto* map_cmd = app.add_subcommand("map", "summarize a dynamics log into map coordinates");
    struct {
        std::string log, out;
    } map_args;
    map_cmd->add_option("--log", map_args.log, "dynamics.jsonl")->required();
    map_cmd->add_option("--out", map_args.out, "summaries.csv path")->required();
    map_cmd->callback([&] {
        action = [&] {
            auto log = dynamics::DynamicsLog::load_jsonl(map_args.log);
            auto summaries = dynamics::summarize(log);
            dynamics::write_summaries_csv(map_args.out, summaries);
            std::cout << "wrote " << summaries.size() << " summaries to " << map_args.out << "\n";
        };
    });

    // --- select ----------------------------------------------------------------
    auto* select = app.add_subcommand("select", "rank-and-take a region subset");
    struct {
        std::string summaries, region = "ambiguous", out;
        double fraction = 0.0;
    } select_args;
    select->add_option("--summaries", select_args.summaries, "summaries.csv")->required();
    select->add_option("--region", select_args.region, "easy|ambiguous|hard");
    select->add_option("--fraction", select_args.fraction, "fraction in [0,1]")->required();
    select->add_option("--out", select_args.out, "subset id file")->required();
    select->callback([&] {
        action = [&] {
            auto summaries = dynamics::load_summaries_csv(select_args.summaries);
            dynamics::SelectionSpec spec{dynamics::region_from_string(select_args.region),
                                         select_args.fraction};
            auto ids = dynamics::select_subset(summaries, spec);
            std::string body;
            for (const auto& id : ids) {
                body += id;
                body.push_back('\n');
            }
            write_text(select_args.out, body);
            std::cout << "selected " << ids.size() << " of " << summaries.size() << " ids\n";
        };
    });

    // --- plot --------------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "render the data map as SVG");
    struct {
        std::string summaries, out;
    } plot_args;
    plot->add_option("--summaries", plot_args.summaries, "summaries.csv")->required();
    plot->add_option("--out", plot_args.out, "map.svg path")->required();
    plot->callback([&] {
        action = [&] {
            auto summaries = dynamics::load_summaries_csv(plot_args.summaries);
            write_text(plot_args.out, cartoplot::render_map(summaries, cartoplot::PlotConfig{}));
            std::cout << "wrote " << plot_args.out << "\n";
        };
    });

    // --- plot-density ---------------------------------------------------------------
    auto* density = app.add_subcommand("plot-density", "render a density bar chart as SVG");
    struct {
        std::string summaries, dimension = "confidence", out;
        int bins = 10;
    } density_args;
    density->add_option("--summaries", density_args.summaries, "summaries.csv")->required();
    density->add_option("--dimension", density_args.dimension, "confidence|variability|correctness");
    density->add_option("--bins", density_args.bins, "bin count");
    density->add_option("--out", density_args.out, "svg path")->required();
    density->callback([&] {
        action = [&] {
            auto summaries = dynamics::load_summaries_csv(density_args.summaries);
            auto dim = dynamics::dimension_from_string(density_args.dimension);
            auto hist = dynamics::density_histogram(summaries, dim, density_args.bins);
            write_text(density_args.out,
                       cartoplot::render_density(hist, density_args.dimension,
                                                 cartoplot::PlotConfig{}));
            std::cout << "wrote " << density_args.out << "\n";
        };
    });

    // --- retrain -----------------------------------------------------------------
    auto* retrain = app.add_subcommand("retrain", "train a fresh model on a saved id subset");
    struct {
        std::string config, subset, name = "retrain", out;
    } retrain_args;
    retrain->add_option("--config", retrain_args.config, "experiment config")->required();
    retrain->add_option("--subset", retrain_args.subset, "id file from `select`")->required();
    retrain->add_option("--name", retrain_args.name, "run name for the result record");
    retrain->add_option("--out", retrain_args.out, "write the run result JSON here");
    retrain->callback([&] {
        action = [&] {
            auto cfg = load_experiment_config(retrain_args.config);
            auto pipeline = prepare_pipeline(cfg);
            auto ids = load_id_file(retrain_args.subset);

            RunResult r;
            r.name = retrain_args.name;
            r.seed = cfg.train.seed;
            r.subset_size = static_cast<long long>(ids.size());
            r.subset_pct_of_train =
                static_cast<double>(ids.size()) /
                static_cast<double>(pipeline.train_features.size());
            if (ids.empty()) throw DataError("subset file is empty: " + retrain_args.subset);

            std::map<std::string, const features::FeaturizedExample*> by_id;
            for (const auto& ex : pipeline.train_features) by_id[ex.id] = &ex;
            std::vector<features::FeaturizedExample> subset;
            for (const auto& id : ids) {
                auto it = by_id.find(id);
                if (it == by_id.end()) throw DataError("subset id not in train set: " + id);
                subset.push_back(*it->second);
            }
            auto initial = model::init_model(cfg.model, cfg.train.seed);
            auto trained = model::train(std::move(initial), subset, cfg.train, nullptr);
            r.epoch_losses = trained.epoch_losses;
            r.final_train_accuracy = model::evaluate(trained.params, subset).accuracy;
            r.converged = r.final_train_accuracy >= cfg.convergence_threshold;
            auto metrics = model::evaluate(trained.params, pipeline.test_features);
            r.macro_f1 = metrics.macro_f1;
            r.accuracy = metrics.accuracy;

            const std::string body = run_result_json(r);
            if (!retrain_args.out.empty()) write_text(retrain_args.out, body);
            std::cout << body;
        };
    });

    // --- experiment -----------------------------------------------------------------
    auto* experiment = app.add_subcommand("experiment", "run the whole pipeline from a config");
    struct {
        std::string config, out_dir;
        uint64_t seed = 0;
        bool seed_set = false;
    } exp_args;
    experiment->add_option("--config", exp_args.config, "experiment config")->required();
    experiment->add_option("--out-dir", exp_args.out_dir, "override the config out_dir");
    experiment->add_option("--seed", exp_args.seed, "override the training seed")
        ->each([&](const std::string&) { exp_args.seed_set = true; });
    experiment->callback([&] {
        action = [&] {
            auto cfg = load_experiment_config(exp_args.config);
            if (!exp_args.out_dir.empty()) cfg.out_dir = exp_args.out_dir;
            if (exp_args.seed_set) cfg.train.seed = exp_args.seed;
            auto artifacts = run_experiment(cfg);
            std::cout << "experiment `" << cfg.name << "` finished: "
                      << artifacts.baselines.size() << " baseline run(s), "
                      << artifacts.grid_results.size() << " grid run(s)\n"
                      << "results: " << artifacts.results_json_path << "\n"
                      << "report:  " << artifacts.report_md_path << "\n";
        };
    });

    // --- report -----------------------------------------------------------------------
    auto* report = app.add_subcommand("report", "re-render report.md from results.json");
    struct {
        std::string results, out;
    } report_args;
    report->add_option("--results", report_args.results, "results.json")->required();
    report->add_option("--out", report_args.out, "report.md path")->required();
    report->callback([&] {
        action = [&] {
            write_text(report_args.out, report_markdown(read_text(report_args.results)));
            std::cout << "wrote " << report_args.out << "\n";
        };
    });

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (action) action();
        return 0;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace cartograf::harness
