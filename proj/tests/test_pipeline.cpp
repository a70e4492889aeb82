#include "rnnscope/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace rnnscope;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "rnnscope_pipeline_tests";

PipelineConfig tiny_config() {
    PipelineConfig c;
    c.seed = 7;
    c.synthetic.content_tokens = 20;
    c.synthetic.positive_tokens = 3;
    c.synthetic.negative_tokens = 3;
    c.synthetic.valence_weight = 1.0;  // weak per-token evidence -> graded integration
    c.synthetic.doc_length_min = 20;
    c.synthetic.doc_length_max = 40;
    c.synthetic.train_docs = 600;
    c.synthetic.dev_docs = 100;
    c.synthetic.test_docs = 150;
    c.architecture = "gru";
    c.hidden_size = 16;
    c.embedding_dim = 8;
    c.epochs = 4;
    c.fp_count = 96;
    c.fp_max_iterations = 4000;
    c.valence_set_size = 3;
    c.null_samples = 2000;
    c.k_neighbors = 8;
    c.autonomous_starts = 20;
    c.max_analysis_docs = 120;
    c.projection_docs = 10;
    c.example_fixed_points = 2;
    return c;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    return files;
}

// Linear cell with an exact line attractor: the first state coordinate
// accumulates the token valence and is marginal (eigenvalue one), every
// other coordinate decays. Gives the analysis a guaranteed continuum of
// fixed points, which tiny trained models cannot provide reliably.
PipelineConfig line_model_config(std::uint64_t seed = 7) {
    PipelineConfig c = tiny_config();
    c.seed = seed;
    c.architecture = "linear";
    c.hidden_size = 128;
    c.embedding_dim = 8;
    return c;
}

std::string write_line_model_checkpoint(const fs::path& path, std::uint64_t seed = 7) {
    const PipelineConfig c = line_model_config(seed);
    const Dataset ds = generate_synthetic(c.synthetic, c.seed);
    const auto valences = synthetic_valences(c.synthetic);
    const Eigen::Index n = c.hidden_size, emb = c.embedding_dim;

    ClassifierModel m;
    m.cell = zero_cell(Architecture::Linear, n, emb);
    m.cell.kernels[0](0, 0) = 1.0;  // marginal accumulator coordinate
    for (Eigen::Index i = 1; i < n; ++i) m.cell.kernels[0](i, i) = 0.5;
    Rng rng(derive_seed(seed, "line-model"));
    m.cell.kernels[0](0, n) = 1.0;  // x[0] feeds the accumulator
    for (Eigen::Index i = 1; i < n; ++i)
        for (Eigen::Index j = 1; j < emb; ++j)
            m.cell.kernels[0](i, n + j) = 0.3 * rng.uniform(-1.0, 1.0);
    m.embedding = Matrix::Zero(ds.vocabulary.size(), emb);
    for (std::int32_t t = 0; t < ds.vocabulary.size(); ++t) {
        m.embedding(t, 0) = valences[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 1; j < emb; ++j) m.embedding(t, j) = rng.uniform(-0.2, 0.2);
    }
    m.readout_weights = Vector::Zero(n);
    m.readout_weights[0] = 1.0;

    fs::create_directories(path.parent_path());
    save_checkpoint(path.string(), m, ds.vocabulary);
    return path.string();
}

struct SharedArtifacts {
    std::string checkpoint;
    std::string analysis_dir;
};

// one analyzed line-attractor model shared by the later test cases
const SharedArtifacts& shared_artifacts() {
    static const SharedArtifacts shared = [] {
        fs::remove_all(kRoot / "shared");
        const std::string ckpt = write_line_model_checkpoint(kRoot / "shared" / "model.ckpt");
        PipelineConfig ac = line_model_config();
        ac.svg = true;
        cmd_analyze(ac, ckpt, (kRoot / "shared" / "analysis").string());
        return SharedArtifacts{ckpt, (kRoot / "shared" / "analysis").string()};
    }();
    return shared;
}

}  // namespace

TEST_CASE("cmd_synth: files load back and labels follow the valence sum") {
    const fs::path dir = kRoot / "synth";
    fs::remove_all(dir);
    PipelineConfig c = tiny_config();
    cmd_synth(c, dir.string());
    CHECK(fs::exists(dir / "train.tsv"));
    CHECK(fs::exists(dir / "dev.tsv"));
    CHECK(fs::exists(dir / "test.tsv"));

    PipelineConfig file_cfg = c;
    file_cfg.data_source = "file";
    file_cfg.data_train = (dir / "train.tsv").string();
    file_cfg.data_dev = (dir / "dev.tsv").string();
    file_cfg.data_test = (dir / "test.tsv").string();
    const Dataset ds = load_dataset(file_cfg);
    CHECK(ds.train.size() == c.synthetic.train_docs);
    const Dataset direct = generate_synthetic(c.synthetic, c.seed);
    REQUIRE(ds.train.size() == direct.train.size());
    for (std::size_t i = 0; i < 40; ++i) CHECK(ds.train[i].label == direct.train[i].label);
}

TEST_CASE("cmd_train: metrics file layout and checkpoint determinism") {
    const fs::path dir_a = kRoot / "train_a";
    const fs::path dir_b = kRoot / "train_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    PipelineConfig c = tiny_config();
    c.epochs = 2;
    const auto out_a = cmd_train(c, dir_a.string());
    const auto out_b = cmd_train(c, dir_b.string());

    CHECK(slurp(out_a.checkpoint_path) == slurp(out_b.checkpoint_path));
    CHECK(slurp(out_a.metrics_path) == slurp(out_b.metrics_path));

    const Table metrics = read_table(out_a.metrics_path);
    REQUIRE(metrics.rows.size() == 4);  // 2 epochs + test + bow_reference
    CHECK(metrics.rows[0][0] == "epoch");
    CHECK(metrics.rows[2][0] == "test");
    CHECK(metrics.rows[3][0] == "bow_reference");
    const double bow_acc = std::stod(metrics.rows[3][5]);
    CHECK(bow_acc > 0.9);  // synthetic task is linearly solvable
}

TEST_CASE("cmd_train: zero epochs stores the initialized weights") {
    const fs::path dir = kRoot / "train_zero";
    fs::remove_all(dir);
    PipelineConfig c = tiny_config();
    c.epochs = 0;
    const auto out = cmd_train(c, dir.string());
    const auto loaded = load_checkpoint(out.checkpoint_path);
    const Dataset ds = load_dataset(c);
    const ClassifierModel fresh = make_initial_model(c, ds.vocabulary.size());
    CHECK((loaded.model.embedding - fresh.embedding).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((loaded.model.readout_weights - fresh.readout_weights).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("cmd_baseline: writes lexicon and metrics") {
    const fs::path dir = kRoot / "baseline";
    fs::remove_all(dir);
    const auto bow = cmd_baseline(tiny_config(), dir.string());
    CHECK(bow.test_accuracy > 0.9);
    const Table lex = read_table((dir / "lexicon.tsv").string());
    CHECK(lex.rows.size() == 22);  // 20 content tokens + oov + pad
    std::size_t positives = 0;
    for (const auto& r : lex.rows) positives += r[3] == "positive";
    CHECK(positives == 3);
    const Table m = read_table((dir / "baseline_metrics.tsv").string());
    CHECK(m.rows.size() == 7);
}

TEST_CASE("cmd_analyze: produces every figure table plus manifest and index") {
    const auto& shared = shared_artifacts();
    for (const auto& schema : figure_schemas())
        CHECK(fs::exists(fs::path(shared.analysis_dir) / (schema.name + ".tsv")));
    CHECK(fs::exists(fs::path(shared.analysis_dir) / "manifest.tsv"));
    CHECK(fs::exists(fs::path(shared.analysis_dir) / "table_index.tsv"));
    CHECK(fs::exists(fs::path(shared.analysis_dir) / "velocity_trace.tsv"));
    CHECK(fs::exists(fs::path(shared.analysis_dir) / "config.echo.cfg"));
    CHECK(fs::exists(fs::path(shared.analysis_dir) / "svg" / "pca_variance.svg"));

    const auto index = read_table_index((fs::path(shared.analysis_dir) / "table_index.tsv").string());
    for (const auto& schema : figure_schemas()) {
        const Table t = read_table((fs::path(shared.analysis_dir) / (schema.name + ".tsv")).string());
        CHECK(index.at(schema.name) == t.rows.size());
    }
    const auto manifest = read_manifest((fs::path(shared.analysis_dir) / "manifest.tsv").string());
    std::set<std::string> checks;
    for (const auto& e : manifest) checks.insert(e.check);
    for (const char* required :
         {"fp_pass_fraction", "fp_pca_top1_ratio", "fp_variance_in_state_pca",
          "lambda1_band_fraction", "median_abs_overlap", "null_p99",
          "input_projection_separation", "autonomous_converged_fraction",
          "single_step_error_median", "multistep_final_error_median", "linearized_accuracy",
          "theta_m_concordance", "embedding_center_norm"})
        CHECK(checks.count(required) == 1);
}

TEST_CASE("cmd_analyze: byte-identical artifacts on a re-run") {
    const auto& shared = shared_artifacts();
    PipelineConfig c = line_model_config();
    c.svg = true;
    const fs::path rerun = kRoot / "analysis_rerun";
    fs::remove_all(rerun);
    cmd_analyze(c, shared.checkpoint, rerun.string());
    CHECK(dir_contents(shared.analysis_dir) == dir_contents(rerun));
}

TEST_CASE("cmd_analyze: threshold zero is analysis-degenerate with partial artifacts") {
    const auto& shared = shared_artifacts();
    PipelineConfig c = line_model_config();
    c.fp_threshold = 0.0;
    c.fp_max_iterations = 100;
    const fs::path dir = kRoot / "degenerate";
    fs::remove_all(dir);
    try {
        cmd_analyze(c, shared.checkpoint, dir.string());
        FAIL("expected DegenerateAnalysisError");
    } catch (const DegenerateAnalysisError& e) {
        CHECK(exit_code_for(e) == kExitDegenerate);
    }
    CHECK(fs::exists(dir / "pca_variance.tsv"));
    CHECK(fs::exists(dir / "fixed_point_rejects.tsv"));
    CHECK(fs::exists(dir / "manifest.tsv"));
    CHECK_FALSE(fs::exists(dir / "overlaps.tsv"));
}

TEST_CASE("cmd_analyze: checkpoint/config mismatches are data errors") {
    const auto& shared = shared_artifacts();
    PipelineConfig c = line_model_config();
    c.architecture = "lstm";
    CHECK_THROWS_AS(cmd_analyze(c, shared.checkpoint, (kRoot / "mismatch").string()), DataError);
    c = line_model_config();
    c.hidden_size = 13;
    CHECK_THROWS_AS(cmd_analyze(c, shared.checkpoint, (kRoot / "mismatch").string()), DataError);
}

TEST_CASE("cmd_analyze: stable linear cell has one fixed-point location and a constant spectrum") {
    const fs::path dir = kRoot / "linear";
    fs::remove_all(dir);
    PipelineConfig c = tiny_config();
    c.architecture = "linear";
    c.epochs = 0;  // the initialized cell is a contraction with one attractor
    c.fp_count = 24;
    c.k_neighbors = 4;
    const auto train_out = cmd_train(c, (dir / "train").string());
    cmd_analyze(c, train_out.checkpoint_path, (dir / "analysis").string());

    const Table fps = read_table((dir / "analysis" / "fixed_points.tsv").string());
    REQUIRE(fps.rows.size() >= 2);
    double min_pc1 = 1e300, max_pc1 = -1e300, min_pc2 = 1e300, max_pc2 = -1e300;
    for (const auto& r : fps.rows) {
        min_pc1 = std::min(min_pc1, std::stod(r[5]));
        max_pc1 = std::max(max_pc1, std::stod(r[5]));
        min_pc2 = std::min(min_pc2, std::stod(r[6]));
        max_pc2 = std::max(max_pc2, std::stod(r[6]));
    }
    CHECK(max_pc1 - min_pc1 <= 1e-3);
    CHECK(max_pc2 - min_pc2 <= 1e-3);

    const Table spectra = read_table((dir / "analysis" / "eigen_spectra.tsv").string());
    std::map<std::string, std::pair<double, double>> top_by_fp;
    for (const auto& r : spectra.rows)
        if (r[1] == "1") top_by_fp[r[0]] = {std::stod(r[2]), std::stod(r[3])};
    REQUIRE(top_by_fp.size() >= 2);
    const auto first = top_by_fp.begin()->second;
    for (const auto& [fp, lam] : top_by_fp) {
        CHECK(lam.first == doctest::Approx(first.first).epsilon(1e-6));
        CHECK(lam.second == doctest::Approx(first.second).epsilon(1e-6));
    }
}

TEST_CASE("cmd_report: summary enumerates figures; tampering is warned; missing is fatal") {
    const auto& shared = shared_artifacts();
    const fs::path copy = kRoot / "report_copy";
    fs::remove_all(copy);
    fs::create_directories(copy);
    for (const auto& entry : fs::directory_iterator(shared.analysis_dir))
        if (entry.is_regular_file()) fs::copy(entry.path(), copy / entry.path().filename());

    const std::string summary_path = (copy / "summary.md").string();
    cmd_report(copy.string(), summary_path);
    const std::string summary = slurp(summary_path);
    for (const auto& schema : figure_schemas())
        CHECK(summary.find("`" + schema.name + ".tsv`") != std::string::npos);
    CHECK(summary.find("## Checks") != std::string::npos);
    CHECK(summary.find("All tables match the table index.") != std::string::npos);

    // delete one data row from fixed_points.tsv -> integrity warning naming it
    {
        const std::string p = (copy / "fixed_points.tsv").string();
        std::ifstream in(p);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        in.close();
        REQUIRE(lines.size() > 2);
        std::ofstream out(p, std::ios::trunc);
        for (std::size_t i = 0; i + 1 < lines.size(); ++i) out << lines[i] << '\n';
    }
    cmd_report(copy.string(), summary_path);
    const std::string tampered = slurp(summary_path);
    CHECK(tampered.find("WARNING: table fixed_points") != std::string::npos);

    // remove a table entirely -> DataError listing it
    fs::remove(copy / "overlaps.tsv");
    try {
        cmd_report(copy.string(), summary_path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("overlaps") != std::string::npos);
        CHECK(exit_code_for(e) == kExitData);
    }
}

TEST_CASE("cmd_report: sweep summaries share one schema") {
    std::vector<std::string> skeletons;
    for (const std::uint64_t seed : {101ull, 202ull, 303ull, 404ull}) {
        const fs::path dir = kRoot / ("sweep_" + std::to_string(seed));
        fs::remove_all(dir);
        const std::string ckpt = write_line_model_checkpoint(dir / "model.ckpt", seed);
        PipelineConfig c = line_model_config(seed);
        c.fp_count = 128;
        c.k_neighbors = 16;
        try {
            cmd_analyze(c, ckpt, (dir / "analysis").string());
        } catch (const DegenerateAnalysisError&) {
            continue;  // sparse sampling can split the 1-D cloud; a valid outcome
        }
        const std::string summary_path = (dir / "summary.md").string();
        cmd_report((dir / "analysis").string(), summary_path);
        std::string skeleton;
        std::istringstream in(slurp(summary_path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("#", 0) == 0)
                skeleton += line + "\n";
            else if (line.rfind("- `", 0) == 0)
                skeleton += line.substr(0, line.find(':')) + "\n";  // table name, not row counts
        }
        skeletons.push_back(skeleton);
    }
    REQUIRE(skeletons.size() >= 3);
    for (std::size_t i = 1; i < skeletons.size(); ++i) CHECK(skeletons[i] == skeletons[0]);
}

TEST_CASE("exit codes map typed errors") {
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(DataError("x")) == kExitData);
    CHECK(exit_code_for(InsufficientDataError("x")) == kExitData);
    CHECK(exit_code_for(DegenerateAnalysisError("x")) == kExitDegenerate);
    CHECK(exit_code_for(NumericsError("x")) == 1);
}
