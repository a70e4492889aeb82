// rnnscope command line: train small recurrent sentiment classifiers and
// reverse-engineer them (fixed points, linearization, eigenmodes, manifold
// geometry). Subcommands: synth, train, baseline, analyze, report.

#include "rnnscope/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

rnnscope::PipelineConfig load(const CommonOptions& opt) {
    rnnscope::PipelineConfig config;
    if (!opt.config_path.empty()) config = rnnscope::parse_config_file(opt.config_path);
    if (opt.seed) config.seed = *opt.seed;  // --seed overrides the config
    return config;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "pipeline config file");
    cmd->add_option("--seed", opt.seed, "seed override");
    cmd->add_option("--out", opt.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"train and reverse-engineer recurrent sentiment classifiers"};
    app.require_subcommand(1);

    CommonOptions synth_opt, train_opt, baseline_opt, analyze_opt;
    std::string checkpoint_path, artifacts_dir, report_out = "summary.md";
    bool svg_flag = false;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic valence dataset");
    add_common(synth, synth_opt);

    CLI::App* train = app.add_subcommand("train", "train a classifier and write a checkpoint");
    add_common(train, train_opt);

    CLI::App* baseline = app.add_subcommand("baseline", "bag-of-words logistic regression");
    add_common(baseline, baseline_opt);

    CLI::App* analyze = app.add_subcommand("analyze", "dynamical-systems analysis of a checkpoint");
    add_common(analyze, analyze_opt);
    analyze->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    analyze->add_flag("--svg", svg_flag, "also render SVG figures");

    CLI::App* report = app.add_subcommand("report", "summarize an analysis directory");
    report->add_option("artifacts", artifacts_dir, "analysis artifact directory")->required();
    report->add_option("--out", report_out, "summary output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            rnnscope::cmd_synth(load(synth_opt), synth_opt.out_dir);
            std::printf("synthetic dataset written to %s\n", synth_opt.out_dir.c_str());
        } else if (train->parsed()) {
            const auto out = rnnscope::cmd_train(load(train_opt), train_opt.out_dir);
            std::printf("checkpoint: %s\n", out.checkpoint_path.c_str());
            std::printf("best epoch: %d (validation accuracy %.4f)\n", out.train.best_epoch,
                        out.train.best_validation_accuracy);
            std::printf("test accuracy: %.4f (bag-of-words reference %.4f)\n", out.test_accuracy,
                        out.bow.test_accuracy);
        } else if (baseline->parsed()) {
            const auto bow = rnnscope::cmd_baseline(load(baseline_opt), baseline_opt.out_dir);
            std::printf("bag-of-words test accuracy: %.4f (%d iterations, converged=%d)\n",
                        bow.test_accuracy, bow.iterations, bow.converged ? 1 : 0);
        } else if (analyze->parsed()) {
            auto config = load(analyze_opt);
            if (svg_flag) config.svg = true;
            const auto out = rnnscope::cmd_analyze(config, checkpoint_path, analyze_opt.out_dir);
            std::size_t gates = 0, passed = 0;
            for (const auto& e : out.manifest)
                if (e.kind == "gate") {
                    ++gates;
                    passed += e.pass == 1;
                }
            std::printf("fixed points: %zu accepted, %zu rejected\n", out.fixed_points_accepted,
                        out.fixed_points_rejected);
            std::printf("manifest: %zu of %zu gates passed (%s/manifest.tsv)\n", passed, gates,
                        analyze_opt.out_dir.c_str());
        } else if (report->parsed()) {
            rnnscope::cmd_report(artifacts_dir, report_out);
            std::printf("summary written to %s\n", report_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return rnnscope::exit_code_for(e);
    }
    return 0;
}
