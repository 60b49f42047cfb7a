// Command-line surface: estimation from files, sample planning, MCF training,
// and the synthetic validation harness. All reports are JSON on stdout (or
// --out); sweep tables are plot-ready CSV.

#include "cvest/dataset.hpp"
#include "cvest/errors.hpp"
#include "cvest/estimator.hpp"
#include "cvest/json_writer.hpp"
#include "cvest/mcf.hpp"
#include "cvest/rng.hpp"
#include "cvest/synthetic.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace cvest;

constexpr std::uint64_t kCliSplitSalt = 0x636c6973ULL;
constexpr std::uint64_t kCliTrainSalt = 0x636c6974ULL;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + out_path);
    out << text << '\n';
}

struct SchemaFlags {
    ColumnSchema schema;

    void attach(CLI::App* cmd) {
        cmd->add_option("--col-scenario-id", schema.scenario_id, "scenario id column name");
        cmd->add_option("--col-f", schema.f, "target metric column name");
        cmd->add_option("--col-g-prefix", schema.g_prefix, "surrogate column prefix");
        cmd->add_option("--col-phi-prefix", schema.phi_prefix, "feature column prefix");
    }
};

struct McfFlags {
    std::string model;        // "", "ols", "mlp"
    std::string model_file;   // pretrained
    std::size_t n_fit = 0;
    std::string split = "shuffled";
    std::string extra_fit;
    std::vector<std::size_t> hidden = {32, 32};
    double learning_rate = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t patience = 50;
    double val_fraction = 0.2;

    void attach(CLI::App* cmd, bool with_model_file) {
        auto* mcf_opt = cmd->add_option("--mcf", model, "train a metric correlator (ols|mlp)")
                            ->check(CLI::IsMember({"ols", "mlp"}));
        if (with_model_file)
            cmd->add_option("--mcf-model", model_file,
                            "use a pretrained correlator model file (all n pairs estimate)")
                ->excludes(mcf_opt);
        cmd->add_option("--n-fit", n_fit, "paired samples spent on correlator training");
        cmd->add_option("--split", split, "fit/est split strategy")
            ->check(CLI::IsMember({"shuffled", "prefix"}));
        cmd->add_option("--extra-fit", extra_fit,
                        "out-of-domain paired file used for training only");
        cmd->add_option("--hidden", hidden, "mlp hidden layer widths")->delimiter(',');
        cmd->add_option("--lr", learning_rate, "mlp learning rate");
        cmd->add_option("--epochs", max_epochs, "mlp max epochs");
        cmd->add_option("--patience", patience, "mlp early-stop patience");
        cmd->add_option("--val-frac", val_fraction, "mlp validation fraction");
    }

    SplitStrategy strategy() const {
        return split == "prefix" ? SplitStrategy::prefix : SplitStrategy::shuffled;
    }

    McfConfig config(MetricKind metric, std::uint64_t seed) const {
        McfConfig cfg = McfConfig::for_metric(metric);
        cfg.model = model == "ols" ? McfKind::ols : McfKind::mlp;
        cfg.hidden_layers = hidden;
        cfg.learning_rate = learning_rate;
        cfg.max_epochs = max_epochs;
        cfg.early_stop_patience = patience;
        cfg.validation_fraction = val_fraction;
        cfg.seed = seed;
        return cfg;
    }
};

MetricKind parse_metric(const std::string& name) {
    if (name == "binary") return MetricKind::binary;
    return MetricKind::continuous;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> methods;
    for (const auto& name : names) {
        if (name == "mc")
            methods.push_back(Method::mc);
        else if (name == "cv")
            methods.push_back(Method::cv);
        else if (name == "cv_mcf" || name == "cv-mcf")
            methods.push_back(Method::cv_mcf);
        else
            throw Error(ErrorKind::invalid_argument, "unknown method " + name);
    }
    return methods;
}

// population flags shared by simulate / sweep commands
struct PopulationFlags {
    std::string kind = "gaussian";
    double rho = 0.9;
    double mu_f = 0.0;
    double var_f = 1.0;
    std::size_t d = 1;
    std::size_t m = 1;
    double noise_g = 0.1;
    double noise_f = 0.3;

    void attach(CLI::App* cmd, const std::string& default_kind) {
        kind = default_kind;
        cmd->add_option("--population", kind, "population family")
            ->check(CLI::IsMember({"gaussian", "nonlinear"}));
        cmd->add_option("--rho", rho, "target correlation (gaussian)");
        cmd->add_option("--mu-f", mu_f, "target metric mean (gaussian)");
        cmd->add_option("--var-f", var_f, "target metric variance (gaussian)");
        cmd->add_option("--d", d, "surrogate dimension (gaussian)");
        cmd->add_option("--m", m, "feature dimension (nonlinear)");
        cmd->add_option("--noise-g", noise_g, "surrogate noise scale (nonlinear)");
        cmd->add_option("--noise-f", noise_f, "target noise scale (nonlinear)");
    }

    std::unique_ptr<Population> build(std::uint64_t seed) const {
        if (kind == "nonlinear")
            return std::make_unique<NonlinearPopulation>(m, noise_g, noise_f, seed);
        return std::make_unique<GaussianPopulation>(mu_f, var_f, d, rho, seed);
    }
};

int check_tolerance(const std::vector<TrialReport>& reports, double tolerance) {
    if (tolerance <= 0.0) return 0;
    for (const auto& report : reports)
        for (const auto& s : report.methods)
            if (!std::isfinite(s.rel_err) || s.rel_err > tolerance) {
                std::cerr << "{\"error\":\"ToleranceViolated\",\"message\":\"" << method_name(s.method)
                          << " rel_err " << format_double(s.rel_err) << " exceeds "
                          << format_double(tolerance) << "\"}\n";
                return 1;
            }
    return 0;
}

void write_csv_file(const std::vector<TrialReport>& reports, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path);
    write_trial_csv(out, reports);
}

// ---- estimate ---------------------------------------------------------------

int cmd_estimate(const std::string& paired_path, const std::string& surrogate_path,
                 const SchemaFlags& schema, const McfFlags& mcf, double delta, double alpha,
                 bool alpha_set, const std::string& metric_name, std::uint64_t seed,
                 const std::string& out_path) {
    const MetricKind metric = parse_metric(metric_name);
    const PairedDataset paired = load_paired(paired_path, schema.schema);
    if (metric == MetricKind::binary) check_binary_metric(paired);

    SurrogateDataset surrogate;
    const bool have_surrogate = !surrogate_path.empty();
    if (have_surrogate) {
        surrogate = load_surrogate(surrogate_path, schema.schema);
        check_compatibility(paired, surrogate);
    }

    const CiSpec ci = alpha_set ? CiSpec::from_alpha(alpha) : CiSpec::from_delta(delta);

    std::vector<EstimateReport> reports;
    EstimateReport mc = mc_estimate(paired.f_values());
    mc.ci = make_interval(mc.mu_hat, mc.var_hat, ci);
    reports.push_back(mc);

    if (have_surrogate) reports.push_back(run_cv_pipeline(paired, surrogate, ci));

    const bool run_mcf = !mcf.model.empty() || !mcf.model_file.empty();
    if (run_mcf) {
        EstimateReport r;
        if (!mcf.model_file.empty()) {
            const McfModel model = load_model(mcf.model_file);
            r = apply_mcf_pipeline(paired, surrogate, model, ci);
        } else {
            std::optional<PairedDataset> extra;
            if (!mcf.extra_fit.empty()) extra = load_paired(mcf.extra_fit, schema.schema);
            const SplitSpec split{mcf.n_fit, mix_seed(seed, kCliSplitSalt), mcf.strategy()};
            const McfConfig config = mcf.config(metric, mix_seed(seed, kCliTrainSalt));
            r = run_cv_mcf_pipeline(paired, surrogate, split, config, ci,
                                    extra ? &*extra : nullptr);
        }
        reports.push_back(r);
    }

    std::string doc = "{\"reports\":[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i) doc += ',';
        doc += report_to_json(reports[i]);
    }
    doc += ']';
    if (run_mcf && reports.back().method == Method::cv_mcf) {
        const EstimateReport& mcf_report = reports.back();
        const double rho_sq_mcf = *mcf_report.rho_sq;
        const double rho_sq_raw = *mcf_report.raw_rho_sq;
        const bool verdict = mcf_worthwhile(rho_sq_mcf, rho_sq_raw, mcf_report.n_used,
                                            paired.n(), surrogate.k());
        JsonWriter v;
        v.begin_object();
        v.key_value("worthwhile", verdict);
        v.key_value("rho_sq_mcf", rho_sq_mcf);
        v.key_value("rho_sq_raw", rho_sq_raw);
        v.key_value_uint("n", paired.n());
        v.key_value_uint("n_est", mcf_report.n_used);
        v.key_value_uint("k", surrogate.k());
        v.end_object();
        doc += ",\"mcf_verdict\":" + v.str();
    }
    doc += '}';
    emit(doc, out_path);
    return 0;
}

// ---- plan -------------------------------------------------------------------

int cmd_plan(std::size_t n_real, std::size_t k, double rho, bool rho_set, double rho_sq,
             bool rho_sq_set, const std::string& out_path) {
    if (rho_set == rho_sq_set)
        throw Error(ErrorKind::invalid_argument, "pass exactly one of --rho / --rho-sq");
    const double r2 = rho_set ? rho * rho : rho_sq;
    const double n_min = min_paired_samples(n_real, k, r2);
    JsonWriter w;
    w.begin_object();
    w.key_value_uint("n_real", n_real);
    w.key_value_uint("k", k);
    w.key_value("rho_sq", r2);
    w.key_value("n_min", n_min);
    w.key_value_uint("n_min_ceil", static_cast<std::uint64_t>(std::ceil(n_min)));
    w.key_value("reduction_percent",
                100.0 * (1.0 - n_min / static_cast<double>(n_real)));
    w.end_object();
    emit(w.str(), out_path);
    return 0;
}

// ---- simulate / sweeps --------------------------------------------------------

int cmd_simulate(const PopulationFlags& pop_flags, std::size_t n, std::size_t k,
                 std::size_t trials, std::uint64_t seed, double delta,
                 const std::vector<std::string>& method_names, const McfFlags& mcf,
                 const std::string& csv_path, double check_rel_err, unsigned threads) {
    const auto pop = pop_flags.build(seed);
    const auto methods = parse_methods(method_names);
    std::optional<TrialMcfOptions> options;
    if (std::find(methods.begin(), methods.end(), Method::cv_mcf) != methods.end())
        options = TrialMcfOptions{mcf.n_fit, mcf.config(MetricKind::continuous, 0)};
    std::vector<TrialReport> reports{
        run_trials(*pop, n, k, trials, methods, options, delta, threads)};
    write_csv_file(reports, csv_path);
    emit(trial_reports_to_json(reports), "");
    return check_tolerance(reports, check_rel_err);
}

int cmd_sweep_k(const PopulationFlags& pop_flags, std::size_t n,
                const std::vector<std::size_t>& grid, std::size_t trials, std::uint64_t seed,
                double delta, const std::vector<std::string>& method_names, const McfFlags& mcf,
                const std::string& csv_path, double check_rel_err, unsigned threads) {
    const auto pop = pop_flags.build(seed);
    const auto methods = parse_methods(method_names);
    std::optional<TrialMcfOptions> options;
    if (std::find(methods.begin(), methods.end(), Method::cv_mcf) != methods.end())
        options = TrialMcfOptions{mcf.n_fit, mcf.config(MetricKind::continuous, 0)};
    const auto reports = sweep_k(*pop, n, grid, trials, methods, options, delta, threads);
    write_csv_file(reports, csv_path);
    emit(trial_reports_to_json(reports), "");
    return check_tolerance(reports, check_rel_err);
}

int cmd_sweep_fit(const PopulationFlags& pop_flags, std::size_t n, std::size_t k,
                  const std::vector<double>& fractions, std::size_t trials, std::uint64_t seed,
                  double delta, const McfFlags& mcf, const std::string& csv_path,
                  double check_rel_err, unsigned threads) {
    const auto pop = pop_flags.build(seed);
    const McfConfig config = mcf.config(MetricKind::continuous, 0);
    const auto reports =
        sweep_fit_fraction(*pop, n, k, fractions, trials, config, delta, threads);
    write_csv_file(reports, csv_path);
    emit(trial_reports_to_json(reports), "");
    return check_tolerance(reports, check_rel_err);
}

// ---- train-mcf ----------------------------------------------------------------

int cmd_train_mcf(const std::string& paired_path, const SchemaFlags& schema,
                  const McfFlags& mcf, const std::string& metric_name, std::uint64_t seed,
                  const std::string& model_out) {
    if (model_out.empty())
        throw Error(ErrorKind::invalid_argument, "--out is required for train-mcf");
    const MetricKind metric = parse_metric(metric_name);
    const PairedDataset paired = load_paired(paired_path, schema.schema);
    if (metric == MetricKind::binary) check_binary_metric(paired);

    const SplitSpec split{mcf.n_fit, mix_seed(seed, kCliSplitSalt), mcf.strategy()};
    auto [fit, est] = split_paired(paired, split);

    PairedDataset train = fit;
    if (!mcf.extra_fit.empty()) {
        const PairedDataset extra = load_paired(mcf.extra_fit, schema.schema);
        if (extra.d != paired.d || extra.m != paired.m)
            throw Error(ErrorKind::dimension_mismatch,
                        "extra-fit dimensions differ from the paired dataset");
        train.samples.insert(train.samples.end(), extra.samples.begin(), extra.samples.end());
    }
    if (train.n() == 0)
        throw Error(ErrorKind::insufficient_data, "no training rows (n_fit = 0, no extra-fit)");

    const McfConfig config = mcf.config(metric, mix_seed(seed, kCliTrainSalt));
    TrainingLog log;
    McfModel model;
    if (config.model == McfKind::ols)
        model = fit_ols(train);
    else
        model = fit_mlp(train, config, &log);
    save_model(model, model_out);

    // in-sample loss plus correlation on the held-out est partition
    auto mse_on = [&](const PairedDataset& ds) {
        double total = 0.0;
        for (const auto& s : ds.samples) {
            const double r = predict(model, s.g, s.phi) - s.f;
            total += r * r;
        }
        return total / static_cast<double>(ds.n());
    };

    JsonWriter w;
    w.begin_object();
    w.key_value("model_file", model_out);
    w.key_value("kind", config.model == McfKind::ols ? "ols" : "mlp");
    w.key_value_uint("n_train", train.n());
    w.key_value_uint("n_est_holdout", est.n());
    w.key_value("train_mse", mse_on(train));
    if (config.model == McfKind::mlp) {
        w.key_value_uint("epochs_run", log.train_loss.size());
        w.key_value_uint("best_epoch", log.best_epoch);
        w.key_value("best_val_loss", log.best_val_loss);
        w.key("final_train_loss");
        if (log.train_loss.empty())
            w.null();
        else
            w.value(log.train_loss.back());
    }
    w.key("holdout_pearson");
    if (est.n() >= 2) {
        double mean_p = 0.0, mean_f = 0.0;
        std::vector<double> preds;
        preds.reserve(est.n());
        for (const auto& s : est.samples) {
            preds.push_back(predict(model, s.g, s.phi));
            mean_p += preds.back();
            mean_f += s.f;
        }
        mean_p /= static_cast<double>(est.n());
        mean_f /= static_cast<double>(est.n());
        double spp = 0.0, sff = 0.0, spf = 0.0;
        for (std::size_t i = 0; i < est.n(); ++i) {
            const double cp = preds[i] - mean_p;
            const double cf = est.samples[i].f - mean_f;
            spp += cp * cp;
            sff += cf * cf;
            spf += cp * cf;
        }
        const double denom = std::sqrt(spp * sff);
        if (denom > 0.0)
            w.value(spf / denom);
        else
            w.null();
    } else {
        w.null();
    }
    w.end_object();
    emit(w.str(), "");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-variates estimation of expensive metrics from paired and "
                 "surrogate-only measurements"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate E[F] from data files");
    std::string paired_path, surrogate_path, out_path, metric_name = "continuous";
    double delta = 0.1, alpha = 0.0;
    std::uint64_t seed = 0;
    SchemaFlags est_schema;
    McfFlags est_mcf;
    est->add_option("--paired", paired_path, "paired dataset (.csv or .jsonl)")->required();
    est->add_option("--surrogate", surrogate_path, "surrogate-only dataset");
    auto* delta_opt = est->add_option("--delta", delta, "CI failure probability (default 0.1)");
    auto* alpha_opt = est->add_option("--alpha", alpha, "fixed CI half-width");
    alpha_opt->excludes(delta_opt);
    est->add_option("--metric", metric_name, "metric kind")
        ->check(CLI::IsMember({"continuous", "binary"}));
    est->add_option("--seed", seed, "master seed");
    est->add_option("--out", out_path, "write the JSON report here instead of stdout");
    est_schema.attach(est);
    est_mcf.attach(est, /*with_model_file=*/true);

    // plan
    auto* plan = app.add_subcommand("plan", "minimum paired samples for a matching CI");
    std::size_t plan_n_real = 0, plan_k = 0;
    double plan_rho = 0.0, plan_rho_sq = 0.0;
    std::string plan_out;
    plan->add_option("--n-real", plan_n_real, "real-only sample count to match")->required();
    plan->add_option("--k", plan_k, "surrogate-only sample count")->required();
    auto* rho_opt = plan->add_option("--rho", plan_rho, "correlation coefficient");
    auto* rho_sq_opt = plan->add_option("--rho-sq", plan_rho_sq, "squared correlation");
    rho_sq_opt->excludes(rho_opt);
    plan->add_option("--out", plan_out, "write the JSON report here instead of stdout");

    // simulate & sweeps
    auto* sim = app.add_subcommand("simulate", "empirical variance of the estimators on a synthetic population");
    PopulationFlags sim_pop;
    std::size_t sim_n = 100, sim_k = 1000, sim_trials = 10000;
    std::uint64_t sim_seed = 0;
    double sim_delta = 0.1, sim_check = 0.0;
    unsigned sim_threads = 0;
    std::vector<std::string> sim_methods{"mc", "cv"};
    std::string sim_out;
    McfFlags sim_mcf;
    sim_pop.attach(sim, "gaussian");
    sim->add_option("--n", sim_n, "paired samples per trial");
    sim->add_option("--k", sim_k, "surrogate-only samples per trial");
    sim->add_option("--trials", sim_trials, "number of trials");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--delta", sim_delta, "CI failure probability");
    sim->add_option("--methods", sim_methods, "estimators to run (mc,cv,cv_mcf)")->delimiter(',');
    sim->add_option("--out", sim_out, "CSV output path");
    sim->add_option("--check-rel-err", sim_check,
                    "exit nonzero when any relative error exceeds this");
    sim->add_option("--threads", sim_threads, "worker threads (0 = auto)");
    sim_mcf.attach(sim, /*with_model_file=*/false);

    auto* swk = app.add_subcommand("sweep-k", "variance as a function of the surrogate pool size");
    PopulationFlags swk_pop;
    std::size_t swk_n = 100, swk_trials = 10000;
    std::uint64_t swk_seed = 0;
    double swk_delta = 0.1, swk_check = 0.0;
    unsigned swk_threads = 0;
    std::vector<std::size_t> swk_grid;
    std::vector<std::string> swk_methods{"mc", "cv"};
    std::string swk_out;
    McfFlags swk_mcf;
    swk_pop.attach(swk, "gaussian");
    swk->add_option("--n", swk_n, "paired samples per trial");
    swk->add_option("--grid", swk_grid, "comma list of k values")->required()->delimiter(',');
    swk->add_option("--trials", swk_trials, "number of trials");
    swk->add_option("--seed", swk_seed, "master seed");
    swk->add_option("--delta", swk_delta, "CI failure probability");
    swk->add_option("--methods", swk_methods, "estimators to run")->delimiter(',');
    swk->add_option("--out", swk_out, "CSV output path");
    swk->add_option("--check-rel-err", swk_check,
                    "exit nonzero when any relative error exceeds this");
    swk->add_option("--threads", swk_threads, "worker threads (0 = auto)");
    swk_mcf.attach(swk, /*with_model_file=*/false);

    auto* swf = app.add_subcommand("sweep-fit",
                                   "variance as a function of the fraction of pairs spent on MCF training");
    PopulationFlags swf_pop;
    std::size_t swf_n = 200, swf_k = 400, swf_trials = 2000;
    std::uint64_t swf_seed = 0;
    double swf_delta = 0.1, swf_check = 0.0;
    unsigned swf_threads = 0;
    std::vector<double> swf_fractions;
    std::string swf_out;
    McfFlags swf_mcf;
    swf_pop.attach(swf, "nonlinear");
    swf->add_option("--n", swf_n, "paired samples per trial");
    swf->add_option("--k", swf_k, "surrogate-only samples per trial");
    swf->add_option("--fractions", swf_fractions, "comma list of fit fractions")
        ->required()
        ->delimiter(',');
    swf->add_option("--trials", swf_trials, "number of trials");
    swf->add_option("--seed", swf_seed, "master seed");
    swf->add_option("--delta", swf_delta, "CI failure probability");
    swf->add_option("--out", swf_out, "CSV output path");
    swf->add_option("--check-rel-err", swf_check,
                    "exit nonzero when any relative error exceeds this");
    swf->add_option("--threads", swf_threads, "worker threads (0 = auto)");
    swf_mcf.attach(swf, /*with_model_file=*/false);

    // train-mcf
    auto* train = app.add_subcommand("train-mcf", "train and serialize a metric correlator");
    std::string train_paired, train_out, train_metric = "continuous";
    std::uint64_t train_seed = 0;
    SchemaFlags train_schema;
    McfFlags train_mcf;
    train->add_option("--paired", train_paired, "paired dataset")->required();
    train->add_option("--model", train_mcf.model, "model family")
        ->required()
        ->check(CLI::IsMember({"ols", "mlp"}));
    train->add_option("--out", train_out, "model file to write")->required();
    train->add_option("--metric", train_metric, "metric kind")
        ->check(CLI::IsMember({"continuous", "binary"}));
    train->add_option("--seed", train_seed, "master seed");
    train_schema.attach(train);
    train->add_option("--n-fit", train_mcf.n_fit, "paired samples used for training");
    train->add_option("--split", train_mcf.split, "fit/est split strategy")
        ->check(CLI::IsMember({"shuffled", "prefix"}));
    train->add_option("--extra-fit", train_mcf.extra_fit, "out-of-domain paired file");
    train->add_option("--hidden", train_mcf.hidden, "mlp hidden widths")->delimiter(',');
    train->add_option("--lr", train_mcf.learning_rate, "mlp learning rate");
    train->add_option("--epochs", train_mcf.max_epochs, "mlp max epochs");
    train->add_option("--patience", train_mcf.patience, "mlp early-stop patience");
    train->add_option("--val-frac", train_mcf.val_fraction, "mlp validation fraction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed())
            return cmd_estimate(paired_path, surrogate_path, est_schema, est_mcf, delta, alpha,
                                alpha_opt->count() > 0, metric_name, seed, out_path);
        if (plan->parsed())
            return cmd_plan(plan_n_real, plan_k, plan_rho, rho_opt->count() > 0, plan_rho_sq,
                            rho_sq_opt->count() > 0, plan_out);
        if (sim->parsed())
            return cmd_simulate(sim_pop, sim_n, sim_k, sim_trials, sim_seed, sim_delta,
                                sim_methods, sim_mcf, sim_out, sim_check, sim_threads);
        if (swk->parsed())
            return cmd_sweep_k(swk_pop, swk_n, swk_grid, swk_trials, swk_seed, swk_delta,
                               swk_methods, swk_mcf, swk_out, swk_check, swk_threads);
        if (swf->parsed())
            return cmd_sweep_fit(swf_pop, swf_n, swf_k, swf_fractions, swf_trials, swf_seed,
                                 swf_delta, swf_mcf, swf_out, swf_check, swf_threads);
        if (train->parsed())
            return cmd_train_mcf(train_paired, train_schema, train_mcf, train_metric,
                                 train_seed, train_out);
    } catch (const Error& e) {
        std::cerr << "{\"error\":\"" << to_string(e.kind()) << "\",\"message\":\""
                  << e.what() << "\"}\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"Internal\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    }
    return 0;
}
