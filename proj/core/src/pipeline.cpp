#include "rnnscope/pipeline.hpp"

#include "rnnscope/linearize.hpp"
#include "rnnscope/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace rnnscope {

namespace {

constexpr double kVelocityConverged = 1e-3;
constexpr double kUnstableMagnitude = 1.05;
constexpr double kKStepTolerance = 1e-6;
constexpr int kKStepProbe = 50;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory: " + dir + " (" + ec.message() + ")");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out << text;
    if (!out) throw DataError("failed writing file: " + path);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DegenerateAnalysisError*>(&e)) return kExitDegenerate;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    return 1;
}

Dataset load_dataset(const PipelineConfig& config) {
    validate_config(config);
    if (config.data_source == "synthetic") return generate_synthetic(config.synthetic, config.seed);
    return make_dataset(read_raw_documents(config.data_train), read_raw_documents(config.data_dev),
                        read_raw_documents(config.data_test), config.vocab_max, config.max_length);
}

Dataset load_dataset(const PipelineConfig& config, const Vocabulary& vocab) {
    validate_config(config);
    if (config.data_source == "synthetic") {
        Dataset ds = generate_synthetic(config.synthetic, config.seed);
        if (ds.vocabulary.tokens() != vocab.tokens())
            throw DataError("synthetic vocabulary does not match the checkpoint vocabulary; "
                            "config and checkpoint disagree");
        return ds;
    }
    Dataset ds;
    ds.vocabulary = vocab;
    auto tokenize_with = [&](const std::string& path) {
        std::vector<Document> docs;
        for (const auto& rd : read_raw_documents(path)) {
            Document d;
            d.label = rd.label;
            for (const auto& tok : tokenize(rd.text)) {
                if (d.tokens.size() >= config.max_length) break;
                d.tokens.push_back(vocab.lookup(tok));
            }
            if (!d.tokens.empty()) docs.push_back(std::move(d));
        }
        if (docs.empty()) throw DataError("no usable documents in " + path);
        return docs;
    };
    ds.train = tokenize_with(config.data_train);
    ds.validation = tokenize_with(config.data_dev);
    ds.test = tokenize_with(config.data_test);
    return ds;
}

ClassifierModel make_initial_model(const PipelineConfig& config, Eigen::Index vocab_size) {
    Rng rng(derive_seed(config.seed, "model/init"));
    return init_model(architecture_from_name(config.architecture), vocab_size, config.hidden_size,
                      config.embedding_dim, rng);
}

void cmd_synth(const PipelineConfig& config, const std::string& out_dir) {
    validate_config(config);
    const Dataset ds = generate_synthetic(config.synthetic, config.seed);
    ensure_dir(out_dir);
    write_documents(join_path(out_dir, "train.tsv"), ds.train, ds.vocabulary);
    write_documents(join_path(out_dir, "dev.tsv"), ds.validation, ds.vocabulary);
    write_documents(join_path(out_dir, "test.tsv"), ds.test, ds.vocabulary);
    write_text_file(join_path(out_dir, "config.echo.cfg"), serialize_config(config));
}

TrainOutputs cmd_train(const PipelineConfig& config, const std::string& out_dir) {
    validate_config(config);
    const Dataset ds = load_dataset(config);
    ensure_dir(out_dir);

    TrainHyperparams hp;
    hp.epochs = config.epochs;
    hp.learning_rate = config.learning_rate;
    hp.adam_beta1 = config.adam_beta1;
    hp.adam_beta2 = config.adam_beta2;
    hp.grad_clip = config.grad_clip;

    TrainOutputs out;
    out.train = train_classifier(ds, architecture_from_name(config.architecture),
                                 config.hidden_size, config.embedding_dim, hp, config.seed);
    out.test_accuracy = evaluate_accuracy(out.train.model, ds.test);
    out.bow = train_bow_baseline(ds, config.bow_l2, config.valence_set_size,
                                 config.bow_max_iterations);

    out.checkpoint_path = join_path(out_dir, "model.ckpt");
    save_checkpoint(out.checkpoint_path, out.train.model, ds.vocabulary);

    out.metrics_path = join_path(out_dir, "metrics.tsv");
    TableWriter metrics(out.metrics_path, *schema_for("metrics"));
    const std::string nan = format_value(std::numeric_limits<double>::quiet_NaN());
    for (const auto& e : out.train.log)
        metrics.row({"epoch", format_value(e.epoch), format_value(e.train_loss),
                     format_value(e.train_accuracy), format_value(e.validation_accuracy), nan,
                     format_value(e.selected)});
    metrics.row({"test", format_value(out.train.best_epoch), nan, nan,
                 format_value(out.train.best_validation_accuracy),
                 format_value(out.test_accuracy), "1"});
    metrics.row({"bow_reference", "0", nan, format_value(out.bow.train_accuracy),
                 format_value(out.bow.validation_accuracy), format_value(out.bow.test_accuracy),
                 "0"});
    metrics.close();

    write_text_file(join_path(out_dir, "config.echo.cfg"), serialize_config(config));
    return out;
}

BowResult cmd_baseline(const PipelineConfig& config, const std::string& out_dir) {
    validate_config(config);
    const Dataset ds = load_dataset(config);
    BowResult bow =
        train_bow_baseline(ds, config.bow_l2, config.valence_set_size, config.bow_max_iterations);
    ensure_dir(out_dir);

    std::vector<std::string> cls(ds.vocabulary.size(), "none");
    for (auto id : bow.lexicon.positive_words) cls[id] = "positive";
    for (auto id : bow.lexicon.negative_words) cls[id] = "negative";
    for (auto id : bow.lexicon.neutral_words) cls[id] = "neutral";

    TableWriter lex(join_path(out_dir, "lexicon.tsv"), *schema_for("lexicon"));
    for (std::int32_t i = 0; i < ds.vocabulary.size(); ++i)
        lex.row({format_value(static_cast<std::size_t>(i)), ds.vocabulary.token(i),
                 format_value(bow.lexicon.coefficients[i]), cls[i]});
    lex.close();

    TableWriter m(join_path(out_dir, "baseline_metrics.tsv"), *schema_for("baseline_metrics"));
    m.row({"train_accuracy", format_value(bow.train_accuracy)});
    m.row({"validation_accuracy", format_value(bow.validation_accuracy)});
    m.row({"test_accuracy", format_value(bow.test_accuracy)});
    m.row({"iterations", format_value(static_cast<std::size_t>(bow.iterations))});
    m.row({"final_gradient_norm", format_value(bow.final_gradient_norm)});
    m.row({"converged", format_value(bow.converged)});
    m.row({"l2", format_value(config.bow_l2)});
    m.close();

    write_text_file(join_path(out_dir, "config.echo.cfg"), serialize_config(config));
    return bow;
}

namespace {

struct AnalyzeContext {
    std::vector<std::pair<std::string, std::size_t>> table_index;
    std::string out_dir;

    std::string path(const std::string& table) const { return join_path(out_dir, table + ".tsv"); }
    void record(const TableWriter& w) { table_index.emplace_back(w.name(), w.rows()); }
};

void finish_artifacts(AnalyzeContext& ctx, const std::vector<ManifestEntry>& manifest) {
    write_manifest(join_path(ctx.out_dir, "manifest.tsv"), manifest);
    ctx.table_index.emplace_back("manifest", manifest.size());
    write_table_index(join_path(ctx.out_dir, "table_index.tsv"), ctx.table_index);
}

ManifestEntry gate(const std::string& check, double value, double threshold,
                   const std::string& cmp) {
    ManifestEntry e;
    e.check = check;
    e.kind = "gate";
    e.value = value;
    e.threshold = threshold;
    e.comparator = cmp;
    bool ok = false;
    if (cmp == ">=") ok = value >= threshold;
    else if (cmp == ">") ok = value > threshold;
    else if (cmp == "<") ok = value < threshold;
    else if (cmp == "<=") ok = value <= threshold;
    else if (cmp == "=") ok = value == threshold;
    e.pass = ok ? 1 : 0;
    return e;
}

ManifestEntry info(const std::string& check, double value) {
    ManifestEntry e;
    e.check = check;
    e.kind = "info";
    e.value = value;
    e.comparator = "none";
    e.pass = -1;
    return e;
}

}  // namespace

AnalyzeOutputs cmd_analyze(const PipelineConfig& config, const std::string& checkpoint_path,
                           const std::string& out_dir) {
    validate_config(config);
    const Architecture arch = architecture_from_name(config.architecture);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path, arch);
    const ClassifierModel& model = loaded.model;
    if (model.cell.hidden_size != config.hidden_size ||
        model.cell.input_size != config.embedding_dim)
        throw DataError("checkpoint dimensions do not match the config");

    const Dataset ds = load_dataset(config, loaded.vocabulary);
    ensure_dir(out_dir);
    AnalyzeContext ctx;
    ctx.out_dir = out_dir;
    write_text_file(join_path(out_dir, "config.echo.cfg"), serialize_config(config));

    // analysis documents: leading slice of the test split
    std::vector<Document> docs(
        ds.test.begin(),
        ds.test.begin() + std::min<std::size_t>(ds.test.size(), config.max_analysis_docs));

    // hidden-state geometry, trained vs untrained
    const std::vector<Vector> states = collect_hidden_states(model, docs);
    const Matrix state_matrix = stack_states(states);
    const Eigen::Index max_pc =
        std::min<Eigen::Index>(state_matrix.cols(), state_matrix.rows() - 1);
    const PcaFit state_pca = pca_fit(state_matrix, max_pc);
    const ClassifierModel untrained = make_initial_model(config, loaded.vocabulary.size());
    const VarianceComparison curves = dimensionality_comparison(model, untrained, docs);

    {
        TableWriter w(ctx.path("pca_variance"), *schema_for("pca_variance"));
        const Eigen::Index k = std::min(curves.trained_ratios.size(), curves.untrained_ratios.size());
        double cum_t = 0.0, cum_u = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            cum_t += curves.trained_ratios[i];
            cum_u += curves.untrained_ratios[i];
            w.row({format_value(static_cast<std::size_t>(i + 1)),
                   format_value(curves.trained_ratios[i]), format_value(cum_t),
                   format_value(curves.untrained_ratios[i]), format_value(cum_u)});
        }
        w.close();
        ctx.record(w);
    }

    {
        TableWriter w(ctx.path("state_projections"), *schema_for("state_projections"));
        const std::string nan = format_value(std::numeric_limits<double>::quiet_NaN());
        const std::size_t n_docs = std::min<std::size_t>(docs.size(), config.projection_docs);
        for (std::size_t d = 0; d < n_docs; ++d) {
            Vector h = model.initial_state();
            for (std::size_t t = 0; t < docs[d].tokens.size(); ++t) {
                h = cell_step(model.cell, h, model.embed(docs[d].tokens[t]));
                const Matrix proj = pca_project(state_pca, Matrix(h.transpose()));
                w.row({"state", format_value(d), format_value(t),
                       format_value(docs[d].label), format_value(proj(0, 0)),
                       format_value(state_pca.n_components() > 1 ? proj(0, 1) : 0.0),
                       format_value(readout_logit(model, h))});
            }
        }
        const Vector ro = pca_project_direction(state_pca, model.readout_weights);
        w.row({"readout", "0", "0", "0", format_value(ro[0]),
               format_value(ro.size() > 1 ? ro[1] : 0.0), nan});
        const Matrix init_proj = pca_project(state_pca, Matrix(model.initial_state().transpose()));
        w.row({"initial", "0", "0", "0", format_value(init_proj(0, 0)),
               format_value(init_proj.cols() > 1 ? init_proj(0, 1) : 0.0),
               format_value(readout_logit(model, model.initial_state()))});
        w.close();
        ctx.record(w);
    }

    // fixed points
    const std::vector<Vector> inits =
        sample_hidden_states(model, docs, std::min<std::size_t>(config.fp_count, states.size()),
                             config.seed);
    FixedPointSearchConfig fp_cfg;
    fp_cfg.threshold = config.fp_threshold;
    fp_cfg.learning_rate = config.fp_learning_rate;
    fp_cfg.lr_decay = config.fp_lr_decay;
    fp_cfg.decay_every = config.fp_decay_every;
    fp_cfg.max_iterations = config.fp_max_iterations;
    fp_cfg.n_threads =
        config.fp_threads ? config.fp_threads : std::max(1u, std::thread::hardware_concurrency());
    FixedPointSearchResult search = find_fixed_points(model, inits, fp_cfg);

    {
        TableWriter w(ctx.path("fixed_point_rejects"), *schema_for("fixed_point_rejects"));
        for (const auto& r : search.rejected)
            w.row({format_value(r.initial_state_id), format_value(r.q_value),
                   format_value(r.n_iterations), r.reason});
        w.close();
        ctx.record(w);
    }

    AnalyzeOutputs outputs;
    outputs.fixed_points_accepted = search.accepted.size();
    outputs.fixed_points_rejected = search.rejected.size();

    const double pass_fraction =
        inits.empty() ? 0.0
                      : static_cast<double>(search.accepted.size()) / static_cast<double>(inits.size());

    if (search.accepted.empty() ||
        static_cast<int>(search.accepted.size()) < config.k_neighbors + 2) {
        std::vector<ManifestEntry> manifest;
        manifest.push_back(info("fp_candidates", static_cast<double>(inits.size())));
        manifest.push_back(info("fp_accepted", static_cast<double>(search.accepted.size())));
        manifest.push_back(gate("fp_pass_fraction", pass_fraction, 0.5, ">="));
        finish_artifacts(ctx, manifest);
        outputs.manifest = manifest;
        throw DegenerateAnalysisError(
            search.accepted.empty()
                ? "no fixed-point candidate passed the q threshold; partial artifacts kept"
                : "too few fixed points for the manifold fit; partial artifacts kept");
    }

    std::vector<FixedPoint>& fps = search.accepted;
    std::vector<LinearizedSystem> systems = linearize_all(model, fps);

    // k-step eigendecomposition route must agree with direct powers
    std::size_t kstep_failures = 0;
    {
        Rng probe_rng(derive_seed(config.seed, "analysis/kstep-probe"));
        Vector probe(model.cell.input_size);
        for (Eigen::Index i = 0; i < probe.size(); ++i) probe[i] = probe_rng.normal();
        probe.normalize();
        for (auto& ls : systems) {
            if (ls.defective) continue;
            const Vector via_eig = k_step_effect(ls, probe, kKStepProbe);
            const Vector direct = k_step_effect_direct(ls, probe, kKStepProbe);
            const double denom = std::max(direct.norm(), 1e-300);
            if ((via_eig - direct).norm() / denom > kKStepTolerance) {
                ls.defective = true;
                ls.defect_reason = "k-step eigendecomposition route disagrees with direct powers";
                ++kstep_failures;
            }
        }
    }

    ManifoldFit mf;
    try {
        mf = fit_manifold(fps, config.k_neighbors, config.lle_ridge, model.readout_weights);
    } catch (const DataError& e) {
        // disconnected fixed-point set: report what was found and stop
        std::vector<ManifestEntry> manifest;
        manifest.push_back(info("fp_candidates", static_cast<double>(inits.size())));
        manifest.push_back(info("fp_accepted", static_cast<double>(fps.size())));
        manifest.push_back(gate("fp_pass_fraction", pass_fraction, 0.5, ">="));
        finish_artifacts(ctx, manifest);
        outputs.manifest = manifest;
        throw DegenerateAnalysisError(std::string("manifold fit failed (") + e.what() +
                                      "); partial artifacts kept");
    }
    for (std::size_t i = 0; i < fps.size(); ++i) fps[i].theta = mf.theta[i];

    const Matrix fp_matrix = stack_states([&] {
        std::vector<Vector> pts;
        pts.reserve(fps.size());
        for (const auto& fp : fps) pts.push_back(fp.h_star);
        return pts;
    }());

    {
        TableWriter w(ctx.path("fixed_points"), *schema_for("fixed_points"));
        const Matrix proj = pca_project(state_pca, fp_matrix);
        for (std::size_t i = 0; i < fps.size(); ++i) {
            const Eigen::Index r = static_cast<Eigen::Index>(i);
            w.row({format_value(i), format_value(fps[i].initial_state_id),
                   format_value(fps[i].q_value), format_value(fps[i].n_iterations),
                   format_value(fps[i].theta), format_value(proj(r, 0)),
                   format_value(proj.cols() > 1 ? proj(r, 1) : 0.0),
                   format_value(proj.cols() > 2 ? proj(r, 2) : 0.0),
                   format_value(readout_logit(model, fps[i].h_star)),
                   format_value(systems[i].defective)});
        }
        w.close();
        ctx.record(w);
    }

    std::size_t complex_pairs = 0, defective_count = 0, unstable_fps = 0, lambda_in_band = 0;
    std::size_t non_defective = 0;
    {
        TableWriter spectra(ctx.path("eigen_spectra"), *schema_for("eigen_spectra"));
        TableWriter taus(ctx.path("time_constants"), *schema_for("time_constants"));
        for (std::size_t i = 0; i < systems.size(); ++i) {
            const auto& ls = systems[i];
            if (ls.defective) {
                ++defective_count;
                continue;
            }
            ++non_defective;
            complex_pairs += ls.complex_leading_pair;
            const double top_mag = std::abs(ls.eig.eigenvalues[0]);
            lambda_in_band += top_mag >= 0.95 && top_mag <= 1.005;
            bool unstable = false;
            for (Eigen::Index a = 0; a < ls.eig.size(); ++a) {
                const double mag = std::abs(ls.eig.eigenvalues[a]);
                unstable = unstable || mag > kUnstableMagnitude;
                spectra.row({format_value(i), format_value(static_cast<std::size_t>(a + 1)),
                             format_value(ls.eig.eigenvalues[a].real()),
                             format_value(ls.eig.eigenvalues[a].imag()), format_value(mag)});
            }
            unstable_fps += unstable;
            const int n_modes = std::min<int>(config.n_modes, static_cast<int>(ls.eig.size()));
            for (int a = 0; a < n_modes; ++a)
                taus.row({format_value(i), format_value(fps[i].theta),
                          format_value(static_cast<std::size_t>(a + 1)),
                          format_value(ls.time_constants[a])});
        }
        spectra.close();
        taus.close();
        ctx.record(spectra);
        ctx.record(taus);
    }

    // valence lexicon from the bag-of-words baseline on the same data
    const BowResult bow =
        train_bow_baseline(ds, config.bow_l2, config.valence_set_size, config.bow_max_iterations);

    std::size_t projection_separated = 0;
    {
        TableWriter w(ctx.path("input_projections"), *schema_for("input_projections"));
        for (const auto& ls : systems) {
            if (ls.defective) continue;
            const auto s = summarize_input_projections(ls, model, bow.lexicon);
            const bool separated = s.mean_positive > 0.0 && 0.0 > s.mean_negative &&
                                   std::abs(s.mean_neutral) <
                                       std::min(std::abs(s.mean_positive), std::abs(s.mean_negative));
            projection_separated += separated;
            w.row({format_value(ls.fixed_point_index), format_value(fps[ls.fixed_point_index].theta),
                   format_value(s.mean_positive), format_value(s.mean_negative),
                   format_value(s.mean_neutral), format_value(s.complex_pair)});
        }
        w.close();
        ctx.record(w);
    }

    {
        // example fixed points at evenly spaced theta quantiles
        std::vector<std::size_t> by_theta;
        for (std::size_t i = 0; i < systems.size(); ++i)
            if (!systems[i].defective) by_theta.push_back(i);
        std::stable_sort(by_theta.begin(), by_theta.end(),
                         [&](std::size_t a, std::size_t b) { return fps[a].theta < fps[b].theta; });
        std::vector<std::size_t> examples;
        const std::size_t n_ex = std::min(config.example_fixed_points, by_theta.size());
        for (std::size_t e = 0; e < n_ex; ++e) {
            const std::size_t pos =
                n_ex == 1 ? 0 : (e * (by_theta.size() - 1)) / (n_ex - 1);
            examples.push_back(by_theta[pos]);
        }
        TableWriter w(ctx.path("input_effects"), *schema_for("input_effects"));
        auto emit = [&](std::size_t fp_idx, const std::vector<std::int32_t>& words,
                        const char* cls) {
            for (auto word : words) {
                const Vector effect = input_effect(systems[fp_idx], model.embed(word));
                const Vector proj = pca_project_direction(state_pca, effect);
                w.row({format_value(fp_idx), ds.vocabulary.token(word), cls,
                       format_value(proj[0]), format_value(proj.size() > 1 ? proj[1] : 0.0),
                       format_value(input_projection(systems[fp_idx], model.embed(word)).value)});
            }
        };
        for (auto fp_idx : examples) {
            emit(fp_idx, bow.lexicon.positive_words, "positive");
            emit(fp_idx, bow.lexicon.negative_words, "negative");
            emit(fp_idx, bow.lexicon.neutral_words, "neutral");
        }
        w.close();
        ctx.record(w);
    }

    const OverlapReport overlaps = overlap_report(systems, mf, config.null_samples, config.seed);
    {
        TableWriter w(ctx.path("overlaps"), *schema_for("overlaps"));
        for (std::size_t i = 0; i < overlaps.overlaps.size(); ++i)
            w.row({"fixed_point", format_value(overlaps.fixed_point_index[i]),
                   format_value(overlaps.overlaps[i]),
                   format_value(static_cast<bool>(overlaps.complex_pair[i]))});
        for (std::size_t i = 0; i < overlaps.null_overlaps.size(); ++i)
            w.row({"null", format_value(i), format_value(overlaps.null_overlaps[i]), "0"});
        w.close();
        ctx.record(w);
    }

    // autonomous convergence from freshly sampled starts
    std::size_t converged_starts = 0;
    std::size_t n_starts = 0;
    {
        const std::vector<Vector> starts = sample_hidden_states(
            model, docs, std::min<std::size_t>(config.autonomous_starts, states.size()),
            derive_seed(config.seed, "autonomous"));
        n_starts = starts.size();
        TableWriter w(ctx.path("velocity_trace"), *schema_for("velocity_trace"));
        for (std::size_t s = 0; s < starts.size(); ++s) {
            const auto trace = simulate_autonomous(model, starts[s], config.autonomous_steps);
            bool reached = false;
            for (std::size_t t = 0; t < trace.size(); ++t) {
                reached = reached || trace[t] < kVelocityConverged;
                w.row({format_value(s), format_value(t + 1), format_value(trace[t])});
            }
            converged_starts += reached;
        }
        w.close();
        ctx.record(w);
    }

    // linearization error and linearized classification
    std::vector<LinearizedSystem> usable;
    for (const auto& ls : systems)
        if (!ls.defective) usable.push_back(ls);
    if (usable.empty()) {
        std::vector<ManifestEntry> manifest;
        manifest.push_back(info("fp_candidates", static_cast<double>(inits.size())));
        manifest.push_back(info("fp_accepted", static_cast<double>(fps.size())));
        manifest.push_back(info("defective_count", static_cast<double>(defective_count)));
        finish_artifacts(ctx, manifest);
        outputs.manifest = manifest;
        throw DegenerateAnalysisError("every linearization is defective; partial artifacts kept");
    }
    const LinearizationErrorStudy err_study = linearization_error_study(model, usable, docs);
    {
        TableWriter w(ctx.path("linearization_error"), *schema_for("linearization_error"));
        std::size_t step = 0;
        for (const auto& e : err_study.single_step_errors)
            w.row({"single", "0", format_value(step++), format_value(e)});
        for (std::size_t d = 0; d < err_study.final_errors.size(); ++d)
            w.row({"final", format_value(d), "0", format_value(err_study.final_errors[d])});
        w.close();
        ctx.record(w);
    }

    const double nonlinear_accuracy = evaluate_accuracy(model, docs);
    const double linearized_accuracy = linearized_trajectory_accuracy(model, usable, docs);

    // optional runtime cross-check of the analytic Jacobians
    double jacobian_fd_error = std::numeric_limits<double>::quiet_NaN();
    if (config.check_jacobians) {
        const Vector zero_input = Vector::Zero(model.cell.input_size);
        const CellJacobians analytic = cell_jacobians(model.cell, fps[0].h_star, zero_input);
        const CellJacobians fd = fd_jacobian(model.cell, fps[0].h_star, zero_input, 1e-5);
        const double scale = std::max(1.0, analytic.j_rec.cwiseAbs().maxCoeff());
        jacobian_fd_error = (analytic.j_rec - fd.j_rec).cwiseAbs().maxCoeff() / scale;
    }

    std::vector<ManifestEntry> manifest;
    manifest.push_back(info("fp_candidates", static_cast<double>(inits.size())));
    manifest.push_back(info("fp_accepted", static_cast<double>(fps.size())));
    manifest.push_back(info("defective_count", static_cast<double>(defective_count)));
    manifest.push_back(info("complex_leading_pairs", static_cast<double>(complex_pairs)));
    manifest.push_back(gate("fp_pass_fraction", pass_fraction, 0.5, ">="));
    manifest.push_back(gate("fp_pca_top1_ratio", mf.pca.explained_variance_ratio[0], 0.70, ">="));
    manifest.push_back(
        gate("fp_variance_in_state_pca",
             variance_captured(PcaFit{state_pca.mean,
                                      state_pca.components.topRows(
                                          std::min<Eigen::Index>(3, state_pca.n_components())),
                                      state_pca.explained_variance_ratio.head(
                                          std::min<Eigen::Index>(3, state_pca.n_components()))},
                               fp_matrix),
             0.90, ">="));
    manifest.push_back(gate("lambda1_band_fraction",
                            non_defective == 0 ? 0.0
                                               : static_cast<double>(lambda_in_band) /
                                                     static_cast<double>(non_defective),
                            0.90, ">="));
    manifest.push_back(gate("median_abs_overlap", overlaps.median_abs_overlap, 0.8, ">="));
    manifest.push_back(gate("null_p99", overlaps.null_p99, 0.3, "<"));
    manifest.push_back(gate("input_projection_separation",
                            non_defective == 0 ? 0.0
                                               : static_cast<double>(projection_separated) /
                                                     static_cast<double>(non_defective),
                            0.90, ">="));
    manifest.push_back(gate("autonomous_converged_fraction",
                            n_starts == 0 ? 0.0
                                          : static_cast<double>(converged_starts) /
                                                static_cast<double>(n_starts),
                            0.90, ">="));
    manifest.push_back(gate("single_step_error_median", err_study.median_single_step, 0.20, "<"));
    manifest.push_back(
        gate("multistep_final_error_median", err_study.median_final, err_study.median_single_step,
             ">"));
    manifest.push_back(gate("linearized_accuracy", linearized_accuracy, nonlinear_accuracy, "<"));
    manifest.push_back(gate("theta_m_concordance", mf.theta_m_concordance, 0.95, ">="));
    {
        ManifestEntry stability =
            gate("fps_with_unstable_modes", static_cast<double>(unstable_fps), 0.0, "<=");
        // instability is a reported finding, not a failure, for the vanilla cell
        if (arch == Architecture::Vanilla) {
            stability.kind = "info";
            stability.pass = -1;
        }
        manifest.push_back(stability);
    }
    manifest.push_back(gate("kstep_equivalence_failures", static_cast<double>(kstep_failures), 0.0, "<="));
    manifest.push_back(info("embedding_center_norm", embedding_center_diagnostic(model)));
    manifest.push_back(info("null_mean_abs_overlap", overlaps.null_mean));
    manifest.push_back(info("nonlinear_accuracy", nonlinear_accuracy));
    manifest.push_back(info("linearized_accuracy_value", linearized_accuracy));
    manifest.push_back(info("bow_test_accuracy", bow.test_accuracy));
    manifest.push_back(info("trained_top3_cumulative",
                            curves.trained_ratios.head(std::min<Eigen::Index>(3, curves.trained_ratios.size()))
                                .sum()));
    if (config.check_jacobians) manifest.push_back(info("jacobian_fd_max_error", jacobian_fd_error));

    finish_artifacts(ctx, manifest);
    outputs.manifest = manifest;

    if (config.svg) {
        const std::string svg_dir = join_path(out_dir, "svg");
        ensure_dir(svg_dir);
        // cumulative variance curves
        {
            SvgSeries trained, untrained;
            trained.color = "#000000";
            trained.connect = true;
            untrained.color = "#999999";
            untrained.connect = true;
            double ct = 0.0, cu = 0.0;
            for (Eigen::Index i = 0;
                 i < std::min(curves.trained_ratios.size(), curves.untrained_ratios.size()); ++i) {
                ct += curves.trained_ratios[i];
                cu += curves.untrained_ratios[i];
                trained.points.push_back({static_cast<double>(i + 1), ct});
                untrained.points.push_back({static_cast<double>(i + 1), cu});
            }
            write_svg_scatter(join_path(svg_dir, "pca_variance.svg"),
                              "cumulative explained variance", "components", "fraction",
                              {trained, untrained});
        }
        {
            SvgSeries fp_series;
            fp_series.color = "#1f77b4";
            const Matrix proj = pca_project(state_pca, fp_matrix);
            for (Eigen::Index i = 0; i < proj.rows(); ++i)
                fp_series.points.push_back({proj(i, 0), proj.cols() > 1 ? proj(i, 1) : 0.0});
            write_svg_scatter(join_path(svg_dir, "fixed_points.svg"), "fixed points in PC space",
                              "pc1", "pc2", {fp_series});
        }
        {
            SvgSeries fp_over, null_over;
            fp_over.color = "#1f77b4";
            null_over.color = "#999999";
            null_over.radius = 1.0;
            for (auto v : overlaps.overlaps) fp_over.points.push_back({v, 1.0});
            for (std::size_t i = 0; i < overlaps.null_overlaps.size(); i += 10)
                null_over.points.push_back({overlaps.null_overlaps[i], 0.0});
            write_svg_scatter(join_path(svg_dir, "overlaps.svg"),
                              "eigenvector-manifold overlap (top) vs null (bottom)", "overlap", "",
                              {fp_over, null_over});
        }
    }
    return outputs;
}

void cmd_report(const std::string& artifact_dir, const std::string& out_path) {
    struct FigureGroup {
        std::string title;
        std::vector<std::string> tables;
    };
    const std::vector<FigureGroup> figures = {
        {"Hidden-state PCA variance, trained vs untrained", {"pca_variance"}},
        {"State-space projection", {"state_projections"}},
        {"Fixed points along the manifold", {"fixed_points"}},
        {"Eigenvalue spectra and time constants", {"eigen_spectra", "time_constants"}},
        {"Instantaneous input effects", {"input_effects"}},
        {"Input projections by word valence", {"input_projections"}},
        {"Eigenvector-manifold overlap vs null", {"overlaps"}},
        {"Linearization error", {"linearization_error"}},
    };

    std::vector<std::string> missing;
    for (const auto& s : figure_schemas())
        if (!fs::exists(join_path(artifact_dir, s.name + ".tsv"))) missing.push_back(s.name);
    if (!fs::exists(join_path(artifact_dir, "manifest.tsv"))) missing.push_back("manifest");
    if (!fs::exists(join_path(artifact_dir, "table_index.tsv"))) missing.push_back("table_index");
    if (!missing.empty()) {
        std::string msg = "report: missing tables in " + artifact_dir + ":";
        for (const auto& name : missing) msg += " " + name;
        throw DataError(msg);
    }

    const auto index = read_table_index(join_path(artifact_dir, "table_index.tsv"));
    const auto manifest = read_manifest(join_path(artifact_dir, "manifest.tsv"));

    std::map<std::string, Table> tables;
    std::vector<std::string> warnings;
    for (const auto& s : figure_schemas()) {
        Table t = read_table(join_path(artifact_dir, s.name + ".tsv"));
        const auto it = index.find(s.name);
        if (it == index.end())
            warnings.push_back("table " + s.name + " is not listed in the table index");
        else if (it->second != t.rows.size())
            warnings.push_back("table " + s.name + ": expected " + std::to_string(it->second) +
                               " rows, found " + std::to_string(t.rows.size()));
        tables.emplace(s.name, std::move(t));
    }

    auto column = [&](const Table& t, const std::string& name) {
        for (std::size_t i = 0; i < t.schema.columns.size(); ++i)
            if (t.schema.columns[i] == name) return i;
        throw DataError("report: table " + t.schema.name + " lacks column " + name);
    };
    auto numbers = [&](const Table& t, const std::string& col,
                       const std::string& kind_filter = "") {
        std::vector<double> vals;
        const std::size_t ci = column(t, col);
        std::size_t ki = kind_filter.empty() ? 0 : column(t, "kind");
        for (const auto& r : t.rows) {
            if (!kind_filter.empty() && r[ki] != kind_filter) continue;
            vals.push_back(std::stod(r[ci]));
        }
        return vals;
    };

    std::ostringstream md;
    md << "# Analysis summary\n\n";
    md << "Artifact directory: " << artifact_dir << "\n\n";

    md << "## Figures\n\n";
    std::size_t fig_no = 0;
    for (const auto& fig : figures) {
        md << "### " << ++fig_no << ". " << fig.title << "\n\n";
        for (const auto& name : fig.tables) {
            const Table& t = tables.at(name);
            md << "- `" << name << ".tsv`: " << t.rows.size() << " rows, "
               << t.schema.columns.size() << " columns\n";
        }
        if (fig.tables[0] == "pca_variance") {
            const Table& t = tables.at("pca_variance");
            const auto tr = numbers(t, "trained_cumulative");
            const auto un = numbers(t, "untrained_cumulative");
            if (tr.size() >= 3)
                md << "- trained cumulative variance at 3 components: " << format_value(tr[2])
                   << "; untrained: " << format_value(un[2]) << "\n";
        } else if (fig.tables[0] == "fixed_points") {
            const Table& t = tables.at("fixed_points");
            const auto qs = numbers(t, "q");
            const auto thetas = numbers(t, "theta");
            if (!qs.empty()) {
                md << "- fixed points: " << qs.size()
                   << ", max q: " << format_value(*std::max_element(qs.begin(), qs.end()))
                   << ", theta span: [" << format_value(*std::min_element(thetas.begin(), thetas.end()))
                   << ", " << format_value(*std::max_element(thetas.begin(), thetas.end())) << "]\n";
            }
        } else if (fig.tables[0] == "eigen_spectra") {
            const Table& t = tables.at("time_constants");
            auto taus = numbers(t, "tau");
            std::vector<double> finite;
            for (auto v : taus)
                if (std::isfinite(v)) finite.push_back(v);
            if (!finite.empty())
                md << "- largest finite time constant: "
                   << format_value(*std::max_element(finite.begin(), finite.end())) << " tokens\n";
        } else if (fig.tables[0] == "overlaps") {
            const Table& t = tables.at("overlaps");
            auto fp_vals = numbers(t, "value", "fixed_point");
            auto null_vals = numbers(t, "value", "null");
            for (auto& v : fp_vals) v = std::abs(v);
            if (!fp_vals.empty() && !null_vals.empty())
                md << "- median |overlap|: " << format_value(median_of(fp_vals))
                   << "; max null: "
                   << format_value(*std::max_element(null_vals.begin(), null_vals.end())) << "\n";
        } else if (fig.tables[0] == "linearization_error") {
            const Table& t = tables.at("linearization_error");
            md << "- median single-step error: "
               << format_value(median_of(numbers(t, "value", "single")))
               << "; median end-of-document error: "
               << format_value(median_of(numbers(t, "value", "final"))) << "\n";
        }
        md << "\n";
    }

    md << "## Checks\n\n";
    md << "| check | kind | value | threshold | comparator | pass |\n";
    md << "|---|---|---|---|---|---|\n";
    std::size_t gates = 0, passed = 0;
    for (const auto& e : manifest) {
        md << "| " << e.check << " | " << e.kind << " | " << format_value(e.value) << " | "
           << (e.kind == "gate" ? format_value(e.threshold) : std::string("-")) << " | "
           << e.comparator << " | " << (e.pass < 0 ? "-" : e.pass ? "pass" : "FAIL") << " |\n";
        if (e.kind == "gate") {
            ++gates;
            passed += e.pass == 1;
        }
    }
    md << "\n" << passed << " of " << gates << " gates passed.\n\n";

    md << "## Integrity\n\n";
    if (warnings.empty()) {
        md << "All tables match the table index.\n";
    } else {
        for (const auto& w : warnings) md << "- WARNING: " << w << "\n";
    }
    md << "\n";

    write_text_file(out_path, md.str());
}

}  // namespace rnnscope
