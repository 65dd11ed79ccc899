#pragma once

// Command implementations behind the `awmvc` executable: gen, run, eval, bench.

#include "awmvc/dataset.hpp"
#include "awmvc/kmeans.hpp"
#include "awmvc/metrics.hpp"
#include "awmvc/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace awmvc::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchema = 1;

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kValidation = 3,
    kNumeric = 4,
    kIo = 5,
};

using nlohmann::json;

inline double percent(double x) { return std::round(x * 10000.0) / 100.0; }

inline json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json metrics_json(const MetricSet& m)
{
    return {{"acc", percent(m.acc)}, {"nmi", percent(m.nmi)}, {"purity", percent(m.purity)}, {"fscore", percent(m.fscore)}};
}

template <class T>
std::vector<T> parse_csv_list(const std::string& text, const char* what)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw ValidationError(std::string("malformed ") + what + " entry '" + tok + "'");
        out.push_back(static_cast<T>(v));
    }
    return out;
}

inline std::vector<Index> default_view_dims(std::size_t views)
{
    std::vector<Index> dims;
    for (std::size_t v = 0; v < views; ++v) dims.push_back(std::max<Index>(10, 50 - 10 * Index(v)));
    return dims;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------

struct GenOptions {
    SyntheticSpec spec;
    std::string view_dims;
    std::string format = "bin";
    std::string out;
};

inline int cmd_gen(GenOptions opt, std::ostream& out)
{
    if (opt.spec.views < 1) throw ValidationError("--views must be positive");
    opt.spec.view_dims = opt.view_dims.empty() ? default_view_dims(opt.spec.views)
                                               : parse_csv_list<Index>(opt.view_dims, "--view-dims");
    const auto ds = generate_synthetic(opt.spec);
    save_dataset(ds, opt.out, opt.format == "csv" ? PayloadFormat::Csv : PayloadFormat::Binary);
    out << "wrote " << ds.num_views() << " views, n = " << ds.n() << ", k = " << ds.num_classes() << " to "
        << opt.out << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunOptions {
    std::string data;
    int clusters = 0;  ///< 0 means take k from the labels
    int m = 3;
    std::string dims;
    int max_iter = 50;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::string variant = "full";
    std::string alpha_rule = "paper";
    std::string init = "spectral";
    int kmeans_restarts = 50;
    bool trace_evolution = false;
    std::string normalize = "none";
    std::string output;
    std::string trace;
    std::string pred_out;
};

inline Variant parse_variant(const std::string& s)
{
    if (s == "full") return Variant::Full;
    if (s == "fixed-dim") return Variant::FixedDim;
    if (s == "equal-alpha") return Variant::EqualAlpha;
    throw ValidationError("unknown variant '" + s + "'");
}

/// Builds the run report. Everything outside the "timing" object is a pure
/// function of the inputs and the seed.
inline json run_report(const RunOptions& opt, std::string* trace_csv = nullptr, Labels* predicted = nullptr)
{
    using clock = std::chrono::steady_clock;
    const auto t_total = clock::now();

    MultiViewDataset ds = load_dataset(opt.data);
    if (opt.normalize == "per-sample-l2")
        ds = normalize_per_sample_l2(std::move(ds));
    else if (opt.normalize != "none")
        throw ValidationError("unknown normalization '" + opt.normalize + "'");

    SolverConfig cfg;
    cfg.k = opt.clusters > 0 ? opt.clusters : ds.num_classes();
    if (cfg.k < 1) throw ValidationError("--clusters is required when the dataset has no labels");
    cfg.m = opt.m;
    if (!opt.dims.empty()) cfg.dims = parse_csv_list<Index>(opt.dims, "--dims");
    cfg.max_iter = opt.max_iter;
    cfg.tol = opt.tol;
    cfg.seed = opt.seed;
    cfg.variant = parse_variant(opt.variant);
    cfg.alpha_rule = opt.alpha_rule == "kkt" ? AlphaRule::Kkt : AlphaRule::Paper;
    if (opt.alpha_rule != "kkt" && opt.alpha_rule != "paper")
        throw ValidationError("unknown alpha rule '" + opt.alpha_rule + "'");
    if (opt.init != "spectral" && opt.init != "random") throw ValidationError("unknown init '" + opt.init + "'");
    cfg.init = opt.init == "random" ? Init::Random : Init::Spectral;

    KMeansConfig kc;
    kc.k = cfg.k;
    kc.restarts = opt.kmeans_restarts;
    kc.seed = opt.seed;

    std::vector<double> evolution;
    FitCallbacks callbacks;
    if (opt.trace_evolution && ds.labels) {
        callbacks.on_iteration = [&](int, const SolverState& s, double) {
            evolution.push_back(acc(kmeans(s.M, kc).labels, *ds.labels));
        };
    }

    const auto fit_result = fit(cfg, ds, callbacks);
    const FitReport& rep = fit_result.report;
    const SolverConfig& used = rep.config;

    const auto t_km = clock::now();
    const Assignment assignment = kmeans(rep.M, kc);
    const double kmeans_seconds = std::chrono::duration<double>(clock::now() - t_km).count();

    json report;
    report["schema"] = kSchema;
    report["tool"] = {{"name", "awmvc"}, {"version", kVersion}};
    report["seed"] = opt.seed;

    std::vector<long long> dims(used.dims.begin(), used.dims.end());
    report["config"] = {{"k", used.k},
                        {"m", used.m},
                        {"dims", dims},
                        {"max_iter", used.max_iter},
                        {"tol", used.tol},
                        {"variant", to_string(used.variant)},
                        {"alpha_rule", to_string(used.alpha_rule)},
                        {"init", to_string(used.init)},
                        {"kmeans_restarts", kc.restarts},
                        {"kmeans_max_lloyd_iters", kc.max_lloyd_iters},
                        {"normalize", opt.normalize},
                        {"nmi_variant", kNmiVariant},
                        {"fscore_variant", kFscoreVariant}};

    std::vector<long long> view_dims;
    for (const auto& v : ds.views) view_dims.push_back(v.dim());
    report["dataset"] = {{"name", ds.name},
                         {"n", ds.n()},
                         {"views", ds.num_views()},
                         {"dims", view_dims},
                         {"k_true", ds.labels ? json(ds.num_classes()) : json(nullptr)}};

    json alpha_trace = json::array(), beta_trace = json::array();
    for (std::size_t i = 0; i < rep.alpha_trace.size(); ++i) {
        alpha_trace.push_back(to_json(rep.alpha_trace[i]));
        beta_trace.push_back(to_json(rep.beta_trace[i]));
    }
    report["fit"] = {{"iterations", rep.iterations},
                     {"converged", rep.converged},
                     {"objective_trace", rep.objective_trace},
                     {"lower_bound", rep.lower_bound},
                     {"alpha_final", to_json(rep.alpha_final)},
                     {"alpha_squared_final", to_json(rep.alpha_final.cwiseAbs2())},
                     {"beta_final", to_json(rep.beta_final)},
                     {"alpha_trace", alpha_trace},
                     {"beta_trace", beta_trace},
                     {"degenerate_m_steps", rep.degenerate_m_steps},
                     {"monotonicity_violations", rep.monotonicity_violations}};
    report["kmeans"] = {{"best_sse", assignment.sse},
                        {"restarts", assignment.restarts_run},
                        {"best_restart", assignment.best_restart}};
    report["metrics"] = ds.labels ? metrics_json(evaluate(assignment.labels, *ds.labels)) : json(nullptr);
    report["timing"] = {{"per_step_seconds", rep.per_step_seconds},
                        {"fit_seconds", rep.total_seconds},
                        {"kmeans_seconds", kmeans_seconds},
                        {"total_seconds", std::chrono::duration<double>(clock::now() - t_total).count()}};

    if (trace_csv) {
        std::ostringstream csv;
        csv << std::setprecision(17) << "iter,objective";
        for (int p = 1; p <= used.m; ++p) csv << ",alpha_" << p;
        for (int p = 1; p <= used.m; ++p) csv << ",beta_" << p;
        csv << ",acc_of_M\n";
        for (std::size_t i = 0; i < rep.objective_trace.size(); ++i) {
            csv << (i + 1) << ',' << rep.objective_trace[i];
            for (Index p = 0; p < rep.alpha_trace[i].size(); ++p) csv << ',' << rep.alpha_trace[i](p);
            for (Index p = 0; p < rep.beta_trace[i].size(); ++p) csv << ',' << rep.beta_trace[i](p);
            csv << ',';
            if (i < evolution.size()) csv << evolution[i];
            csv << '\n';
        }
        *trace_csv = csv.str();
    }
    if (predicted) *predicted = assignment.labels;
    return report;
}

inline int cmd_run(const RunOptions& opt, std::ostream& out)
{
    std::string trace;
    Labels predicted;
    const json report = run_report(opt, opt.trace.empty() ? nullptr : &trace, &predicted);
    const std::string text = report.dump(2) + "\n";
    out << text;
    if (!opt.output.empty()) write_text(opt.output, text);
    if (!opt.trace.empty()) write_text(opt.trace, trace);
    if (!opt.pred_out.empty()) write_labels_csv(predicted, opt.pred_out);
    return kOk;
}

// ---------------------------------------------------------------------------

inline int cmd_eval(const std::string& pred_path, const std::string& truth_path, std::ostream& out)
{
    const Labels pred = read_labels_csv(pred_path);
    const Labels truth = read_labels_csv(truth_path);
    json j = metrics_json(evaluate(pred, truth));
    j["nmi_variant"] = kNmiVariant;
    j["fscore_variant"] = kFscoreVariant;
    out << j.dump(2) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
    std::string n_values;
    SyntheticSpec spec;
    std::string view_dims;
    int m = 3;
    int iters = 10;
    int kmeans_restarts = 10;
    std::string output;
};

/// Times fit() and the k-means pass separately for each n, in the order given.
inline std::string bench_csv(BenchOptions opt)
{
    const auto ns = parse_csv_list<Index>(opt.n_values, "--n-values");
    if (ns.empty()) throw ValidationError("--n-values is empty");
    if (opt.spec.views < 1) throw ValidationError("--views must be positive");
    opt.spec.view_dims = opt.view_dims.empty() ? default_view_dims(opt.spec.views)
                                               : parse_csv_list<Index>(opt.view_dims, "--view-dims");
    std::ostringstream csv;
    csv << std::setprecision(9) << "n,fit_seconds,kmeans_seconds\n";
    for (Index n : ns) {
        SyntheticSpec spec = opt.spec;
        spec.n = n;
        const auto ds = generate_synthetic(spec);
        SolverConfig cfg;
        cfg.k = spec.clusters;
        cfg.m = opt.m;
        cfg.max_iter = opt.iters;
        cfg.tol = std::numeric_limits<double>::min();
        cfg.seed = spec.seed;
        const auto res = fit(cfg, ds);
        KMeansConfig kc{spec.clusters, opt.kmeans_restarts, 100, spec.seed};
        const auto t0 = std::chrono::steady_clock::now();
        (void)kmeans(res.report.M, kc);
        const double km = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << n << ',' << res.report.total_seconds << ',' << km << '\n';
    }
    return csv.str();
}

inline int cmd_bench(const BenchOptions& opt, std::ostream& out)
{
    const std::string csv = bench_csv(opt);
    out << csv;
    if (!opt.output.empty()) write_text(opt.output, csv);
    return kOk;
}

// ---------------------------------------------------------------------------

/// Parses argv (without the program name) and dispatches. Returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"AWMVC auto-weighted multi-view clustering", "awmvc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic multi-view dataset");
    gen_cmd->add_option("--n", gen.spec.n, "Sample count")->required();
    gen_cmd->add_option("--views", gen.spec.views, "View count")->required();
    gen_cmd->add_option("--clusters", gen.spec.clusters, "Cluster count")->required();
    gen_cmd->add_option("--latent-dim", gen.spec.latent_dim, "Latent dimension")->capture_default_str();
    gen_cmd->add_option("--view-dims", gen.view_dims, "Comma-separated feature counts per view");
    gen_cmd->add_option("--noise", gen.spec.noise_sigma, "Noise standard deviation")->capture_default_str();
    gen_cmd->add_option("--spread", gen.spec.center_spread, "Cluster center spread")->capture_default_str();
    gen_cmd->add_option("--seed", gen.spec.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--format", gen.format, "Payload format")->check(CLI::IsMember({"bin", "csv"}))->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();

    RunOptions ro;
    auto* run_cmd = app.add_subcommand("run", "Fit AWMVC, cluster the consensus matrix, report");
    run_cmd->add_option("--data", ro.data, "Dataset directory")->required();
    run_cmd->add_option("--clusters", ro.clusters, "Cluster count (default: from labels)");
    run_cmd->add_option("--m", ro.m, "Embedding count")->capture_default_str();
    run_cmd->add_option("--dims", ro.dims, "Comma-separated embedding dimensions");
    run_cmd->add_option("--max-iter", ro.max_iter, "Iteration cap")->capture_default_str();
    run_cmd->add_option("--tol", ro.tol, "Relative objective tolerance")->capture_default_str();
    run_cmd->add_option("--seed", ro.seed, "Random seed")->capture_default_str();
    run_cmd->add_option("--variant", ro.variant, "full|fixed-dim|equal-alpha")
        ->check(CLI::IsMember({"full", "fixed-dim", "equal-alpha"}))
        ->capture_default_str();
    run_cmd->add_option("--alpha-rule", ro.alpha_rule, "paper|kkt")
        ->check(CLI::IsMember({"paper", "kkt"}))
        ->capture_default_str();
    run_cmd->add_option("--init", ro.init, "spectral|random")
        ->check(CLI::IsMember({"spectral", "random"}))
        ->capture_default_str();
    run_cmd->add_option("--kmeans-restarts", ro.kmeans_restarts, "k-means restarts")->capture_default_str();
    run_cmd->add_flag("--trace-evolution", ro.trace_evolution, "Re-cluster M every iteration for the trace");
    run_cmd->add_option("--normalize", ro.normalize, "none|per-sample-l2")
        ->check(CLI::IsMember({"none", "per-sample-l2"}))
        ->capture_default_str();
    run_cmd->add_option("--output", ro.output, "Write the JSON report here as well");
    run_cmd->add_option("--trace", ro.trace, "Per-iteration CSV trace path");
    run_cmd->add_option("--pred-out", ro.pred_out, "Write predicted labels (one per line)");

    std::string pred_path, truth_path;
    auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels against ground truth");
    eval_cmd->add_option("pred", pred_path, "Predicted labels CSV")->required();
    eval_cmd->add_option("truth", truth_path, "Ground-truth labels CSV")->required();

    BenchOptions bo;
    auto* bench_cmd = app.add_subcommand("bench", "Time fit and k-means across sample counts");
    bench_cmd->add_option("--n-values", bo.n_values, "Comma-separated sample counts")->required();
    bench_cmd->add_option("--views", bo.spec.views, "View count")->capture_default_str();
    bench_cmd->add_option("--clusters", bo.spec.clusters, "Cluster count")->capture_default_str();
    bench_cmd->add_option("--m", bo.m, "Embedding count")->capture_default_str();
    bench_cmd->add_option("--latent-dim", bo.spec.latent_dim, "Latent dimension")->capture_default_str();
    bench_cmd->add_option("--view-dims", bo.view_dims, "Comma-separated feature counts per view");
    bench_cmd->add_option("--iters", bo.iters, "Fixed iteration count per fit")->capture_default_str();
    bench_cmd->add_option("--kmeans-restarts", bo.kmeans_restarts, "k-means restarts")->capture_default_str();
    bench_cmd->add_option("--seed", bo.spec.seed, "Random seed")->capture_default_str();
    bench_cmd->add_option("--output", bo.output, "Also write the CSV here");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, out);
        if (*run_cmd) return cmd_run(ro, out);
        if (*eval_cmd) return cmd_eval(pred_path, truth_path, out);
        if (*bench_cmd) return cmd_bench(bo, out);
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::bad_alloc&) {
        err << "out of memory\n";
        return kInternal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

} // namespace awmvc::cli
