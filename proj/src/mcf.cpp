#include "cvest/mcf.hpp"

#include "cvest/errors.hpp"
#include "cvest/json_writer.hpp"
#include "cvest/linalg.hpp"
#include "cvest/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace cvest {

namespace {

constexpr std::uint64_t kValSplitSalt = 0x76616c73ULL;  // validation holdout stream
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;      // weight init stream

std::vector<double> concat_input(const std::vector<double>& g, const std::vector<double>& phi) {
    std::vector<double> x;
    x.reserve(g.size() + phi.size());
    x.insert(x.end(), g.begin(), g.end());
    x.insert(x.end(), phi.begin(), phi.end());
    return x;
}

struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;
};

Standardization column_standardization(const std::vector<std::vector<double>>& rows) {
    const std::size_t dim = rows.front().size();
    const double n = static_cast<double>(rows.size());
    Standardization s;
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < dim; ++j) s.mean[j] += row[j];
    for (double& v : s.mean) v /= n;
    if (rows.size() > 1) {
        std::vector<double> ss(dim, 0.0);
        for (const auto& row : rows)
            for (std::size_t j = 0; j < dim; ++j) {
                const double c = row[j] - s.mean[j];
                ss[j] += c * c;
            }
        for (std::size_t j = 0; j < dim; ++j) {
            const double sd = std::sqrt(ss[j] / (n - 1.0));
            s.scale[j] = sd > 1e-12 ? sd : 1.0;
        }
    }
    return s;
}

void standardize_rows(std::vector<std::vector<double>>& rows, const Standardization& s) {
    for (auto& row : rows)
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = (row[j] - s.mean[j]) / s.scale[j];
}

std::vector<std::vector<double>> model_inputs(const PairedDataset& ds) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ds.n());
    for (const auto& s : ds.samples) rows.push_back(concat_input(s.g, s.phi));
    return rows;
}

const char* kind_name(McfKind kind) { return kind == McfKind::ols ? "ols" : "mlp"; }

} // namespace

void McfConfig::validate() const {
    const bool logistic = output_activation == OutputActivation::logistic;
    const bool bce = loss == LossKind::bce;
    if (logistic != bce)
        throw Error(ErrorKind::invalid_argument,
                    "bce loss and logistic output must be used together");
    if (bce && model == McfKind::ols)
        throw Error(ErrorKind::invalid_argument, "ols supports the mse loss only");
    if (validation_fraction < 0.0 || validation_fraction > 0.5)
        throw Error(ErrorKind::invalid_argument, "validation_fraction must be in [0, 0.5]");
    if (!(learning_rate > 0.0))
        throw Error(ErrorKind::invalid_argument, "learning_rate must be > 0");
    if (model == McfKind::mlp && hidden_layers.empty())
        throw Error(ErrorKind::invalid_argument, "mlp needs at least one hidden layer");
    for (std::size_t width : hidden_layers)
        if (width == 0) throw Error(ErrorKind::invalid_argument, "hidden layer width 0");
}

McfConfig McfConfig::for_metric(MetricKind kind) {
    McfConfig config;
    if (kind == MetricKind::binary) {
        config.output_activation = OutputActivation::logistic;
        config.loss = LossKind::bce;
    }
    return config;
}

std::pair<PairedDataset, PairedDataset> split_paired(const PairedDataset& paired,
                                                     const SplitSpec& spec) {
    const std::size_t n = paired.n();
    if (spec.n_fit > n)
        throw Error(ErrorKind::invalid_split,
                    "n_fit=" + std::to_string(spec.n_fit) + " exceeds n=" + std::to_string(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (spec.strategy == SplitStrategy::shuffled) {
        Rng rng(spec.seed);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }
    }

    std::vector<bool> in_fit(n, false);
    for (std::size_t i = 0; i < spec.n_fit; ++i) in_fit[order[i]] = true;

    PairedDataset fit, est;
    fit.d = est.d = paired.d;
    fit.m = est.m = paired.m;
    fit.samples.reserve(spec.n_fit);
    est.samples.reserve(n - spec.n_fit);
    for (std::size_t i = 0; i < n; ++i)
        (in_fit[i] ? fit : est).samples.push_back(paired.samples[i]);
    return {std::move(fit), std::move(est)};
}

McfModel fit_ols(const PairedDataset& fit) {
    const std::size_t n = fit.n();
    const std::size_t dim = fit.d + fit.m;
    if (dim == 0) throw Error(ErrorKind::insufficient_data, "no regressors");
    if (n < dim + 1)
        throw Error(ErrorKind::insufficient_data,
                    "ols needs at least " + std::to_string(dim + 1) + " rows, got " +
                        std::to_string(n));

    auto rows = model_inputs(fit);
    const Standardization st = column_standardization(rows);
    standardize_rows(rows, st);

    double mean_f = 0.0;
    for (const auto& s : fit.samples) mean_f += s.f;
    mean_f /= static_cast<double>(n);

    // normal equations on centered, standardized data; the intercept is then
    // the target mean in standardized coordinates
    Matrix xtx(dim, dim);
    std::vector<double> xty(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double yc = fit.samples[i].f - mean_f;
        for (std::size_t a = 0; a < dim; ++a) {
            xty[a] += rows[i][a] * yc;
            for (std::size_t b = 0; b <= a; ++b) xtx(a, b) += rows[i][a] * rows[i][b];
        }
    }
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx(b, a) = xtx(a, b);

    const std::vector<double> w_std = solve_spd_ridge(xtx, xty);

    // fold the standardization back into raw-space coefficients
    McfModel model;
    model.kind = McfKind::ols;
    model.input_dim = dim;
    model.standardize_mean.assign(dim, 0.0);
    model.standardize_scale.assign(dim, 1.0);
    model.params.assign(dim + 1, 0.0);
    double intercept = mean_f;
    for (std::size_t j = 0; j < dim; ++j) {
        model.params[j] = w_std[j] / st.scale[j];
        intercept -= model.params[j] * st.mean[j];
    }
    model.params[dim] = intercept;
    return model;
}

McfModel fit_mlp(const PairedDataset& fit, const McfConfig& config, TrainingLog* log) {
    config.validate();
    const std::size_t n = fit.n();
    if (n < 2)
        throw Error(ErrorKind::insufficient_data,
                    "mlp training needs at least 2 rows, got " + std::to_string(n));
    if (fit.d + fit.m == 0) throw Error(ErrorKind::insufficient_data, "no regressors");
    if (config.loss == LossKind::bce) check_binary_metric(fit);

    auto rows = model_inputs(fit);
    const Standardization st = column_standardization(rows);
    standardize_rows(rows, st);
    std::vector<double> targets = fit.f_values();

    // validation holdout, seeded independently of the weight init
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t n_val =
        static_cast<std::size_t>(config.validation_fraction * static_cast<double>(n));
    if (n_val > 0) {
        Rng rng(mix_seed(config.seed, kValSplitSalt));
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }
    }
    std::vector<std::vector<double>> train_x, val_x;
    std::vector<double> train_y, val_y;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = order[i];
        if (i < n - n_val) {
            train_x.push_back(rows[idx]);
            train_y.push_back(targets[idx]);
        } else {
            val_x.push_back(rows[idx]);
            val_y.push_back(targets[idx]);
        }
    }

    MlpShape shape{fit.d + fit.m, config.hidden_layers, config.output_activation};
    std::vector<double> params = mlp_init_params(shape, mix_seed(config.seed, kInitSalt));

    const bool has_val = !val_x.empty();
    auto eval_val = [&](const std::vector<double>& p) {
        return has_val ? mlp_batch_loss(shape, p, val_x, val_y, config.loss)
                       : mlp_batch_loss(shape, p, train_x, train_y, config.loss);
    };

    std::vector<double> best_params = params;
    double best_val = eval_val(params);
    std::size_t best_epoch = 0;

    TrainingLog local_log;
    TrainingLog& tl = log ? *log : local_log;
    tl = TrainingLog{};
    tl.n_train = train_x.size();
    tl.n_val = val_x.size();
    tl.initial_val_loss = best_val;

    std::vector<double> grad;
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double train_loss =
            mlp_batch_loss_grad(shape, params, train_x, train_y, config.loss, grad);
        for (std::size_t j = 0; j < params.size(); ++j)
            params[j] -= config.learning_rate * grad[j];

        const double val = eval_val(params);
        tl.train_loss.push_back(train_loss);
        tl.val_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            best_params = params;
            best_epoch = epoch;
            stale = 0;
        } else if (++stale >= config.early_stop_patience) {
            break;
        }
    }
    tl.best_epoch = best_epoch;
    tl.best_val_loss = best_val;

    McfModel model;
    model.kind = McfKind::mlp;
    model.input_dim = shape.input_dim;
    model.hidden = config.hidden_layers;
    model.output_activation = config.output_activation;
    model.standardize_mean = st.mean;
    model.standardize_scale = st.scale;
    model.params = std::move(best_params);
    return model;
}

double predict(const McfModel& model, const std::vector<double>& g,
               const std::vector<double>& phi) {
    if (g.size() + phi.size() != model.input_dim)
        throw Error(ErrorKind::dimension_mismatch,
                    "model expects " + std::to_string(model.input_dim) + " inputs, got " +
                        std::to_string(g.size() + phi.size()));
    std::vector<double> x = concat_input(g, phi);
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = (x[j] - model.standardize_mean[j]) / model.standardize_scale[j];

    if (model.kind == McfKind::ols) {
        double out = model.params[model.input_dim];
        for (std::size_t j = 0; j < model.input_dim; ++j) out += model.params[j] * x[j];
        return out;
    }
    MlpShape shape{model.input_dim, model.hidden, model.output_activation};
    return mlp_forward(shape, model.params, x);
}

bool mcf_worthwhile(double rho_sq_mcf, double rho_sq_raw, std::size_t n_est, std::size_t n,
                    std::size_t k) {
    if (k == 0 || n_est == 0) return false;
    // net variance reduction, with unit Var(F) cancelling on both sides;
    // strict inequality so a tie keeps the direct estimator
    const double var_mcf = cv_variance_theoretical(1.0, rho_sq_mcf, n_est, k);
    const double var_cv = cv_variance_theoretical(1.0, rho_sq_raw, n, k);
    return var_mcf < var_cv;
}

PairedDataset transform_paired(const McfModel& model, const PairedDataset& ds) {
    if (ds.d + ds.m != model.input_dim)
        throw Error(ErrorKind::dimension_mismatch,
                    "paired dataset has d+m=" + std::to_string(ds.d + ds.m) +
                        ", model expects " + std::to_string(model.input_dim));
    PairedDataset out;
    out.d = 1;
    out.m = 0;
    out.samples.reserve(ds.n());
    for (const auto& s : ds.samples)
        out.samples.push_back(PairedSample{s.scenario_id, s.f, {predict(model, s.g, s.phi)}, {}});
    return out;
}

SurrogateDataset transform_surrogate(const McfModel& model, const SurrogateDataset& ds) {
    SurrogateDataset out;
    out.d = 1;
    out.m = 0;
    if (ds.k() == 0) return out;
    if (ds.d + ds.m != model.input_dim)
        throw Error(ErrorKind::dimension_mismatch,
                    "surrogate dataset has d+m=" + std::to_string(ds.d + ds.m) +
                        ", model expects " + std::to_string(model.input_dim));
    out.samples.reserve(ds.k());
    for (const auto& s : ds.samples)
        out.samples.push_back(SurrogateSample{s.scenario_id, {predict(model, s.g, s.phi)}, {}});
    return out;
}

namespace {

EstimateReport finish_mcf_report(const PairedDataset& full_paired, const PairedDataset& est,
                                 const SurrogateDataset& surrogate, const McfModel& model,
                                 const CiSpec& ci) {
    const PairedDataset est_t = transform_paired(model, est);
    const SurrogateDataset surr_t = transform_surrogate(model, surrogate);

    EstimateReport report;
    try {
        report = run_cv_pipeline(est_t, surr_t, ci);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::singular_covariance) throw;
        // a constant correlator output makes the transformed surrogate carry
        // no signal at all; the estimator degrades to plain MC on est
        report = mc_estimate(est_t.f_values());
        report.beta = Beta::zeros(1);
        report.rho_sq = 0.0;
        report.k_used = surr_t.k();
        report.ci = make_interval(report.mu_hat, report.var_hat, ci);
    }
    report.method = Method::cv_mcf;
    report.raw_rho_sq = rho_squared(compute_moments(full_paired));
    return report;
}

} // namespace

EstimateReport run_cv_mcf_pipeline(const PairedDataset& paired,
                                   const SurrogateDataset& surrogate, const SplitSpec& split,
                                   const McfConfig& config, const CiSpec& ci,
                                   const PairedDataset* extra_fit, McfModel* trained) {
    // the model consumes phi whenever the paired data carries features
    check_compatibility(paired, surrogate, /*features_required=*/paired.m > 0);

    auto [fit, est] = split_paired(paired, split);
    if (est.n() < 2)
        throw Error(ErrorKind::invalid_split,
                    "estimation partition has " + std::to_string(est.n()) +
                        " samples; need at least 2");

    PairedDataset train = fit;
    if (extra_fit != nullptr && extra_fit->n() > 0) {
        if (extra_fit->d != paired.d || extra_fit->m != paired.m)
            throw Error(ErrorKind::dimension_mismatch,
                        "extra_fit dimensions differ from the paired dataset");
        train.samples.insert(train.samples.end(), extra_fit->samples.begin(),
                             extra_fit->samples.end());
    }
    if (train.n() == 0)
        throw Error(ErrorKind::insufficient_data,
                    "no training rows: n_fit = 0 and no extra_fit data");

    const McfModel model =
        config.model == McfKind::ols ? fit_ols(train) : fit_mlp(train, config);
    if (trained) *trained = model;
    return finish_mcf_report(paired, est, surrogate, model, ci);
}

EstimateReport apply_mcf_pipeline(const PairedDataset& paired,
                                  const SurrogateDataset& surrogate, const McfModel& model,
                                  const CiSpec& ci) {
    check_compatibility(paired, surrogate, /*features_required=*/paired.m > 0);
    return finish_mcf_report(paired, paired, surrogate, model, ci);
}

std::string model_to_json(const McfModel& model) {
    JsonWriter w;
    w.begin_object();
    w.key_value("kind", kind_name(model.kind));
    w.key_value_uint("input_dim", model.input_dim);
    w.key("hidden_layers");
    w.begin_array();
    for (std::size_t h : model.hidden) w.value_uint(h);
    w.end_array();
    w.key_value("output_activation",
                model.output_activation == OutputActivation::logistic ? "logistic" : "identity");
    w.key("standardization");
    w.begin_object();
    w.key("mean");
    w.value_array(model.standardize_mean);
    w.key("scale");
    w.value_array(model.standardize_scale);
    w.end_object();
    w.key("params");
    w.value_array(model.params);
    w.end_object();
    return w.str();
}

void save_model(const McfModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path);
    out << model_to_json(model) << '\n';
}

McfModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::parse_error, "cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorKind::parse_error, path + ": not a JSON object");

    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!doc.contains(key))
            throw Error(ErrorKind::schema_error, path + ": missing key " + key);
        return doc[key];
    };

    McfModel model;
    const std::string kind = require("kind").get<std::string>();
    if (kind == "ols")
        model.kind = McfKind::ols;
    else if (kind == "mlp")
        model.kind = McfKind::mlp;
    else
        throw Error(ErrorKind::parse_error, path + ": unknown model kind " + kind);

    model.input_dim = require("input_dim").get<std::size_t>();
    model.hidden = require("hidden_layers").get<std::vector<std::size_t>>();
    const std::string activation = require("output_activation").get<std::string>();
    if (activation == "logistic")
        model.output_activation = OutputActivation::logistic;
    else if (activation == "identity")
        model.output_activation = OutputActivation::identity;
    else
        throw Error(ErrorKind::parse_error, path + ": unknown output activation " + activation);

    const auto& st = require("standardization");
    if (!st.is_object() || !st.contains("mean") || !st.contains("scale"))
        throw Error(ErrorKind::schema_error, path + ": malformed standardization block");
    model.standardize_mean = st["mean"].get<std::vector<double>>();
    model.standardize_scale = st["scale"].get<std::vector<double>>();
    model.params = require("params").get<std::vector<double>>();

    if (model.standardize_mean.size() != model.input_dim ||
        model.standardize_scale.size() != model.input_dim)
        throw Error(ErrorKind::schema_error, path + ": standardization size mismatch");
    const std::size_t expected =
        model.kind == McfKind::ols
            ? model.input_dim + 1
            : MlpShape{model.input_dim, model.hidden, model.output_activation}.param_count();
    if (model.params.size() != expected)
        throw Error(ErrorKind::schema_error, path + ": parameter vector size mismatch");
    return model;
}

} // namespace cvest
