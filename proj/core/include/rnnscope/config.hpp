#pragma once

#include "rnnscope/dataset.hpp"

#include <cstdint>
#include <string>

namespace rnnscope {

/// Every knob of the pipeline. Flat key-value text with [sections]; the
/// grammar, the full key list, and all defaults are documented in
/// docs/config.md. Missing keys take defaults, unknown keys are errors, and
/// serialize_config(parse_config_text(s)) is canonical and lossless.
struct PipelineConfig {
    std::uint64_t seed = 42;

    // [data]
    std::string data_source = "synthetic";  // synthetic | file
    std::string data_train;
    std::string data_dev;
    std::string data_test;
    std::size_t vocab_max = 16000;
    std::size_t max_length = 400;

    // [synthetic]
    SyntheticSpec synthetic;

    // [model]
    std::string architecture = "gru";
    Eigen::Index hidden_size = 64;
    Eigen::Index embedding_dim = 32;

    // [train]
    int epochs = 5;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double grad_clip = 5.0;

    // [baseline]
    double bow_l2 = 1e-3;
    std::size_t bow_max_iterations = 2000;

    // [fixed_points]
    std::size_t fp_count = 512;
    double fp_threshold = 1e-8;
    double fp_learning_rate = 1e-2;
    double fp_lr_decay = 0.5;
    int fp_decay_every = 1000;
    int fp_max_iterations = 10000;
    unsigned fp_threads = 0;  // 0 = hardware concurrency

    // [analysis]
    std::size_t valence_set_size = 100;
    std::size_t null_samples = 10000;
    int k_neighbors = 10;
    double lle_ridge = 1e-3;
    int n_modes = 3;
    std::size_t autonomous_starts = 100;
    int autonomous_steps = 50;
    std::size_t example_fixed_points = 3;
    std::size_t projection_docs = 50;
    std::size_t max_analysis_docs = 1000;
    bool check_jacobians = false;

    // [output]
    std::string out_dir = "out";
    bool svg = false;
};

PipelineConfig parse_config_text(const std::string& text);
PipelineConfig parse_config_file(const std::string& path);

/// Canonical form: every key explicit, sections in fixed order, doubles
/// round-trip exactly.
std::string serialize_config(const PipelineConfig& config);

/// Basic validation shared by the commands (ranges, enum values).
void validate_config(const PipelineConfig& config);

}  // namespace rnnscope
