#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cartograf/cartoplot.hpp"
#include "cartograf/corpus.hpp"
#include "cartograf/dynamics.hpp"
#include "cartograf/features.hpp"
#include "cartograf/model.hpp"

namespace cartograf::harness {

struct GridRunSpec {
    std::string name;                               // unique within the grid
    std::vector<dynamics::SelectionSpec> selection; // mixed by set union
};

/// Parse "ambiguous:0.45" or "ambiguous:0.45+easy:0.25" into a run spec
/// named after the string itself.
GridRunSpec parse_grid_run(const std::string& s);

/// The eight subset mixes of the reference experiment grid.
std::vector<GridRunSpec> default_grid();

struct ExperimentConfig {
    std::string name = "experiment";
    std::string out_dir = "out";
    int n_seeds = 3; // training seeds seed, seed+1, ...
    double convergence_threshold = 0.55;

    bool use_synth = true;           // false: load train_path/test_path
    std::string train_path, test_path;
    std::string pronouns_path;       // empty -> compiled-in list
    corpus::SynthConfig synth;

    features::FeatureConfig features;
    model::ModelConfig model;   // input_dim/max_len mirrored from features
    model::TrainConfig train;   // train.seed is the base seed
    std::vector<GridRunSpec> grid = default_grid();

    void validate() const; // unique run names, fractions in [0,1]
};

/// Load a config file (see README for the key list). Relative paths inside
/// the file resolve against the file's directory. The CARTOGRAF_SEED
/// environment variable, when set, overrides the training seed.
ExperimentConfig load_experiment_config(const std::string& path);

struct RunResult {
    std::string name;
    uint64_t seed = 0;
    long long subset_size = 0;
    double subset_pct_of_train = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    double final_train_accuracy = 0.0;
    bool converged = false;
    std::vector<double> epoch_losses;
    bool failed = false;
    std::string failure_reason;
};

/// Corpus loaded/generated, featurized, and summarized once per experiment;
/// every run shares it. The test split is only ever touched by final
/// evaluation.
struct Pipeline {
    corpus::DatasetSplit train_split, test_split;
    std::vector<features::FeaturizedExample> train_features, test_features;
    corpus::CorpusStats stats;
};

Pipeline prepare_pipeline(const ExperimentConfig& config);

/// Train on the full train split with dynamics recording; evaluate on the
/// out-of-distribution test split.
RunResult run_baseline(const ExperimentConfig& config, const Pipeline& pipeline, uint64_t seed,
                       dynamics::DynamicsLog& log_out);

/// Materialize the run's id subset, retrain a freshly initialized model
/// (same init seed as the baseline), evaluate on the untouched test split.
RunResult run_one(const ExperimentConfig& config, const Pipeline& pipeline, uint64_t seed,
                  const GridRunSpec& spec, const std::vector<dynamics::DynamicsSummary>& summaries);

std::vector<RunResult> run_grid(const ExperimentConfig& config, const Pipeline& pipeline,
                                uint64_t seed,
                                const std::vector<dynamics::DynamicsSummary>& summaries);

/// Machine-readable record of an experiment: config echo, seeds, metrics,
/// subset sizes. Canonical key ordering; parse -> reserialize is
/// byte-stable.
std::string results_json(const ExperimentConfig& config, const std::vector<RunResult>& baselines,
                         const std::vector<RunResult>& grid_results,
                         const corpus::CorpusStats& stats,
                         const std::vector<std::string>& artifact_files);

/// Render report.md from results.json content (grid table, corpus stats,
/// image references for whichever plots exist).
std::string report_markdown(const std::string& results_json_text);

struct ExperimentArtifacts {
    std::string results_json_path;
    std::string report_md_path;
    std::vector<RunResult> baselines;
    std::vector<RunResult> grid_results;
};

/// The whole pipeline: corpus -> features -> baseline(s) with dynamics ->
/// summaries -> plots -> subset grid -> results.json + report.md, all under
/// config.out_dir.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);

/// Entry point behind the cartograf binary; returns the process exit code
/// (0 ok, 1 usage, 2 data error, 3 divergence).
int cli_dispatch(int argc, const char* const* argv);

} // namespace cartograf::harness
