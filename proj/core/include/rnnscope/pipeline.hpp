#pragma once

#include "rnnscope/artifacts.hpp"
#include "rnnscope/bow.hpp"
#include "rnnscope/checkpoint.hpp"
#include "rnnscope/config.hpp"

#include <string>

namespace rnnscope {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

/// Map a thrown error onto the command exit codes.
int exit_code_for(const std::exception& e);

/// Dataset per the config: generated synthetic splits or tokenized files
/// (vocabulary built on the train split).
Dataset load_dataset(const PipelineConfig& config);

/// Same, but tokenizing file data with an existing vocabulary (the one
/// stored next to a checkpoint) so analysis indexes match the model.
Dataset load_dataset(const PipelineConfig& config, const Vocabulary& vocab);

/// The untrained model implied by (config, seed): exactly the initialization
/// cmd_train starts from.
ClassifierModel make_initial_model(const PipelineConfig& config, Eigen::Index vocab_size);

struct TrainOutputs {
    std::string checkpoint_path;
    std::string metrics_path;
    TrainResult train;
    double test_accuracy = 0.0;
    BowResult bow;
};

/// Train per config, select the best-validation epoch, write the checkpoint
/// (plus vocabulary companion) and the metrics table with the test row and
/// the bag-of-words reference row.
TrainOutputs cmd_train(const PipelineConfig& config, const std::string& out_dir);

/// Write synthetic train/dev/test splits in the dataset file format.
void cmd_synth(const PipelineConfig& config, const std::string& out_dir);

/// Bag-of-words baseline: lexicon table plus accuracy metrics.
BowResult cmd_baseline(const PipelineConfig& config, const std::string& out_dir);

struct AnalyzeOutputs {
    std::size_t fixed_points_accepted = 0;
    std::size_t fixed_points_rejected = 0;
    std::vector<ManifestEntry> manifest;
};

/// Full dynamical-systems analysis of a checkpoint; writes one table per
/// figure, the pass/fail manifest, the table index, and the config echo
/// into out_dir. Throws DegenerateAnalysisError (exit 4) when no fixed
/// point passes the threshold; partial artifacts are preserved.
AnalyzeOutputs cmd_analyze(const PipelineConfig& config, const std::string& checkpoint_path,
                           const std::string& out_dir);

/// Cross-reference an artifact directory into one summary document.
/// Missing tables raise DataError listing them; row-count mismatches
/// against the table index become integrity warnings inside the summary.
void cmd_report(const std::string& artifact_dir, const std::string& out_path);

}  // namespace rnnscope
