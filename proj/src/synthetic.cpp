#include "cvest/synthetic.hpp"

#include "cvest/errors.hpp"
#include "cvest/json_writer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace cvest {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kProbeSalt = 0x70726f6265ULL;
constexpr std::uint64_t kSplitSalt = 0x73706c6974ULL;
constexpr std::uint64_t kTrainSalt = 0x747261696eULL;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace

// ---- GaussianPopulation -----------------------------------------------------

GaussianPopulation::GaussianPopulation(double mu_f, double var_f, std::size_t d, double rho,
                                       std::uint64_t seed)
    : seed_(seed), d_(d), mu_f_(mu_f), var_f_(var_f), rho_(rho) {
    if (d_ == 0) throw Error(ErrorKind::invalid_argument, "surrogate dimension must be >= 1");
    if (!(var_f_ > 0.0)) throw Error(ErrorKind::invalid_argument, "var_f must be > 0");
    if (rho < -1.0 || rho > 1.0)
        throw Error(ErrorKind::invalid_argument, "rho must lie in [-1, 1]");
    rho_sq_ = rho * rho;
    scalar_mode_ = true;
}

GaussianPopulation::GaussianPopulation(std::vector<double> mean, Matrix joint_cov,
                                       std::uint64_t seed)
    : seed_(seed), mean_(std::move(mean)) {
    const std::size_t dim = mean_.size();
    if (dim < 2 || joint_cov.rows() != dim || joint_cov.cols() != dim)
        throw Error(ErrorKind::invalid_argument, "joint covariance/mean shape mismatch");
    d_ = dim - 1;
    mu_f_ = mean_[0];
    var_f_ = joint_cov(0, 0);
    if (!(var_f_ > 0.0)) throw Error(ErrorKind::invalid_argument, "Var(F) must be > 0");

    if (!cholesky_factor(joint_cov, chol_))
        throw Error(ErrorKind::invalid_argument, "joint covariance is not positive definite");

    // implied squared correlation: cov^T Var(G)^{-1} cov / Var(F)
    Matrix var_g(d_, d_);
    std::vector<double> cov_gf(d_);
    for (std::size_t i = 0; i < d_; ++i) {
        cov_gf[i] = joint_cov(i + 1, 0);
        for (std::size_t j = 0; j < d_; ++j) var_g(i, j) = joint_cov(i + 1, j + 1);
    }
    Matrix l;
    if (!cholesky_factor(var_g, l))
        throw Error(ErrorKind::invalid_argument, "Var(G) block is not positive definite");
    rho_sq_ = std::clamp(dot(cov_gf, cholesky_solve(l, cov_gf)) / var_f_, 0.0, 1.0);
    scalar_mode_ = false;
}

PairedSample GaussianPopulation::draw_paired(Rng& rng) const {
    PairedSample s;
    s.g.resize(d_);
    if (scalar_mode_) {
        double g_sum = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            s.g[j] = rng.normal();
            g_sum += s.g[j];
        }
        const double shared = g_sum / std::sqrt(static_cast<double>(d_));
        const double indep = rng.normal();
        s.f = mu_f_ + std::sqrt(var_f_) *
                          (rho_ * shared + std::sqrt(1.0 - rho_ * rho_) * indep);
    } else {
        const std::size_t dim = d_ + 1;
        std::vector<double> z(dim);
        for (double& v : z) v = rng.normal();
        for (std::size_t i = 0; i < dim; ++i) {
            double x = mean_[i];
            for (std::size_t j = 0; j <= i; ++j) x += chol_(i, j) * z[j];
            if (i == 0)
                s.f = x;
            else
                s.g[i - 1] = x;
        }
    }
    return s;
}

SurrogateSample GaussianPopulation::draw_surrogate(Rng& rng) const {
    SurrogateSample s;
    s.g.resize(d_);
    if (scalar_mode_) {
        for (std::size_t j = 0; j < d_; ++j) s.g[j] = rng.normal();
    } else {
        // marginal of G: draw the joint and discard F
        const std::size_t dim = d_ + 1;
        std::vector<double> z(dim);
        for (double& v : z) v = rng.normal();
        for (std::size_t i = 1; i < dim; ++i) {
            double x = mean_[i];
            for (std::size_t j = 0; j <= i; ++j) x += chol_(i, j) * z[j];
            s.g[i - 1] = x;
        }
    }
    return s;
}

// ---- NonlinearPopulation ----------------------------------------------------

namespace {
constexpr double kHBase = 1.0;
constexpr double kHAmp = 0.3;
} // namespace

NonlinearPopulation::NonlinearPopulation(std::size_t m, double noise_g, double noise_f,
                                         std::uint64_t seed)
    : seed_(seed), m_(m), noise_g_(noise_g), noise_f_(noise_f) {
    if (m_ == 0) throw Error(ErrorKind::invalid_argument, "feature dimension must be >= 1");
    if (noise_g_ < 0.0 || noise_f_ < 0.0)
        throw Error(ErrorKind::invalid_argument, "noise scales must be >= 0");

    // construction-time check that the regime switching really kills the raw
    // correlation
    Rng rng(mix_seed(seed_, kProbeSalt));
    const std::size_t probes = 100000;
    double sum_g = 0.0, sum_f = 0.0;
    std::vector<double> gs(probes), fs(probes);
    for (std::size_t i = 0; i < probes; ++i) {
        const PairedSample s = draw_paired(rng);
        gs[i] = s.g[0];
        fs[i] = s.f;
        sum_g += s.g[0];
        sum_f += s.f;
    }
    const double mg = sum_g / probes, mf = sum_f / probes;
    double sgg = 0.0, sff = 0.0, sgf = 0.0;
    for (std::size_t i = 0; i < probes; ++i) {
        sgg += (gs[i] - mg) * (gs[i] - mg);
        sff += (fs[i] - mf) * (fs[i] - mf);
        sgf += (gs[i] - mg) * (fs[i] - mf);
    }
    probe_corr_ = sgf / std::sqrt(sgg * sff);
    if (std::abs(probe_corr_) >= 0.2)
        throw std::logic_error("NonlinearPopulation: raw correlation " +
                               std::to_string(probe_corr_) + " not below 0.2");
}

double NonlinearPopulation::var_f() const {
    // Var(s*G) + noise_f^2 with E[sG] = 0 and E[G^2] = h_base^2 + h_amp^2/2 + noise_g^2
    return kHBase * kHBase + kHAmp * kHAmp / 2.0 + noise_g_ * noise_g_ + noise_f_ * noise_f_;
}

PairedSample NonlinearPopulation::draw_paired(Rng& rng) const {
    PairedSample s;
    s.phi.resize(m_);
    for (double& x : s.phi) x = rng.uniform(-1.0, 1.0);
    const double h = kHBase + kHAmp * std::cos(kPi * s.phi[0]);
    const double g = h + noise_g_ * rng.normal();
    const double sign = s.phi[0] >= 0.0 ? 1.0 : -1.0;
    s.g.assign(1, g);
    s.f = sign * g + noise_f_ * rng.normal();
    return s;
}

SurrogateSample NonlinearPopulation::draw_surrogate(Rng& rng) const {
    SurrogateSample s;
    s.phi.resize(m_);
    for (double& x : s.phi) x = rng.uniform(-1.0, 1.0);
    const double h = kHBase + kHAmp * std::cos(kPi * s.phi[0]);
    s.g.assign(1, h + noise_g_ * rng.normal());
    return s;
}

// ---- sampling & trials ------------------------------------------------------

std::pair<PairedDataset, SurrogateDataset> sample_population(const Population& pop,
                                                             std::size_t n, std::size_t k,
                                                             std::uint64_t stream) {
    Rng rng(mix_seed(pop.seed(), stream));
    PairedDataset paired;
    paired.d = pop.surrogate_dim();
    paired.m = pop.feature_dim();
    paired.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PairedSample s = pop.draw_paired(rng);
        s.scenario_id = "p" + std::to_string(i);
        paired.samples.push_back(std::move(s));
    }
    SurrogateDataset surrogate;
    surrogate.d = pop.surrogate_dim();
    surrogate.m = pop.feature_dim();
    surrogate.samples.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        SurrogateSample s = pop.draw_surrogate(rng);
        s.scenario_id = "s" + std::to_string(j);
        surrogate.samples.push_back(std::move(s));
    }
    return {std::move(paired), std::move(surrogate)};
}

namespace {

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::max(1u, std::min({threads, 64u, static_cast<unsigned>(count == 0 ? 1 : count)}));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < count; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct TrialSlot {
    double estimate = 0.0;
    double var_hat = 0.0;
    double rho_sq = 0.0;
    bool covered = false;
};

double mean_of(const std::vector<TrialSlot>& slots, double TrialSlot::*field) {
    double sum = 0.0;
    for (const auto& s : slots) sum += s.*field;
    return sum / static_cast<double>(slots.size());
}

double relative_error(double emp, double theory) {
    if (theory > 0.0) return std::abs(emp - theory) / theory;
    return emp == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

} // namespace

const MethodTrialStats& TrialReport::stats(Method m) const {
    for (const auto& s : methods)
        if (s.method == m) return s;
    throw Error(ErrorKind::invalid_argument,
                std::string("no stats recorded for method ") + method_name(m));
}

TrialReport run_trials(const Population& pop, std::size_t n, std::size_t k, std::size_t trials,
                       const std::vector<Method>& methods,
                       const std::optional<TrialMcfOptions>& mcf, double delta,
                       unsigned threads) {
    if (trials < 2) throw Error(ErrorKind::invalid_argument, "need at least 2 trials");
    if (n < 2) throw Error(ErrorKind::invalid_argument, "need n >= 2");
    const bool wants_mcf =
        std::find(methods.begin(), methods.end(), Method::cv_mcf) != methods.end();
    if (wants_mcf && !mcf)
        throw Error(ErrorKind::invalid_argument, "cv_mcf requested without MCF options");
    if (wants_mcf && mcf->n_fit + 2 > n)
        throw Error(ErrorKind::invalid_split, "n_fit leaves fewer than 2 estimation samples");
    if (wants_mcf && mcf->n_fit == 0)
        throw Error(ErrorKind::insufficient_data, "cv_mcf trials need n_fit >= 1");

    const double truth = pop.true_mean();
    std::vector<std::vector<TrialSlot>> slots(methods.size(),
                                              std::vector<TrialSlot>(trials));

    parallel_for(trials, threads, [&](std::size_t trial) {
        Rng rng(mix_seed(pop.seed(), trial + 1));
        PairedDataset paired;
        paired.d = pop.surrogate_dim();
        paired.m = pop.feature_dim();
        paired.samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) paired.samples.push_back(pop.draw_paired(rng));
        SurrogateDataset surrogate;
        surrogate.d = pop.surrogate_dim();
        surrogate.m = pop.feature_dim();
        surrogate.samples.reserve(k);
        for (std::size_t j = 0; j < k; ++j)
            surrogate.samples.push_back(pop.draw_surrogate(rng));

        const CiSpec ci = CiSpec::from_delta(delta);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            TrialSlot& slot = slots[mi][trial];
            switch (methods[mi]) {
                case Method::mc: {
                    EstimateReport r = mc_estimate(paired.f_values());
                    slot.estimate = r.mu_hat;
                    slot.var_hat = r.var_hat;
                    slot.rho_sq = 0.0;
                    break;
                }
                case Method::cv: {
                    EstimateReport r = run_cv_pipeline(paired, surrogate, ci);
                    slot.estimate = r.mu_hat;
                    slot.var_hat = r.var_hat;
                    slot.rho_sq = *r.rho_sq;
                    break;
                }
                case Method::cv_mcf: {
                    SplitSpec split{mcf->n_fit, mix_seed(mix_seed(pop.seed(), trial + 1), kSplitSalt),
                                    SplitStrategy::shuffled};
                    McfConfig config = mcf->config;
                    config.seed = mix_seed(mix_seed(pop.seed(), trial + 1), kTrainSalt);
                    EstimateReport r =
                        run_cv_mcf_pipeline(paired, surrogate, split, config, ci);
                    slot.estimate = r.mu_hat;
                    slot.var_hat = r.var_hat;
                    slot.rho_sq = *r.rho_sq;
                    break;
                }
            }
            const double radius = std::sqrt(slot.var_hat / delta);
            slot.covered = std::abs(slot.estimate - truth) <= radius;
        }
    });

    TrialReport report;
    report.grid_value = static_cast<double>(k);
    report.trials = trials;
    report.true_mean = truth;
    report.delta = delta;

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const auto& our = slots[mi];
        MethodTrialStats stats;
        stats.method = methods[mi];
        stats.emp_mean = mean_of(our, &TrialSlot::estimate);
        double ss = 0.0;
        for (const auto& s : our) {
            const double c = s.estimate - stats.emp_mean;
            ss += c * c;
        }
        stats.emp_var = ss / static_cast<double>(trials - 1);
        stats.mean_rho_sq = mean_of(our, &TrialSlot::rho_sq);
        std::size_t covered = 0;
        for (const auto& s : our) covered += s.covered ? 1 : 0;
        stats.ci_coverage = static_cast<double>(covered) / static_cast<double>(trials);

        switch (methods[mi]) {
            case Method::mc:
                stats.theory_var = pop.var_f() / static_cast<double>(n);
                break;
            case Method::cv:
                stats.theory_var = cv_variance_theoretical(pop.var_f(), pop.rho_sq(), n, k);
                break;
            case Method::cv_mcf:
                // no closed form for the post-MCF population correlation; use
                // the across-trial mean of the plug-in value as the reference
                stats.theory_var = cv_variance_theoretical(
                    pop.var_f(), std::clamp(stats.mean_rho_sq, 0.0, 1.0), n - mcf->n_fit, k);
                break;
        }
        stats.rel_err = relative_error(stats.emp_var, stats.theory_var);
        report.methods.push_back(stats);
    }
    return report;
}

std::vector<TrialReport> sweep_k(const Population& pop, std::size_t n,
                                 const std::vector<std::size_t>& k_grid, std::size_t trials,
                                 const std::vector<Method>& methods,
                                 const std::optional<TrialMcfOptions>& mcf, double delta,
                                 unsigned threads) {
    if (k_grid.empty()) throw Error(ErrorKind::invalid_argument, "empty k grid");
    std::vector<TrialReport> reports;
    reports.reserve(k_grid.size());
    for (std::size_t k : k_grid) {
        TrialReport r = run_trials(pop, n, k, trials, methods, mcf, delta, threads);
        r.grid_value = static_cast<double>(k);
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<TrialReport> sweep_fit_fraction(const Population& pop, std::size_t n,
                                            std::size_t k,
                                            const std::vector<double>& fractions,
                                            std::size_t trials, const McfConfig& config,
                                            double delta, unsigned threads) {
    if (fractions.empty()) throw Error(ErrorKind::invalid_argument, "empty fraction grid");
    std::vector<TrialReport> reports;
    reports.reserve(fractions.size());
    for (double fraction : fractions) {
        if (fraction < 0.0 || fraction >= 1.0)
            throw Error(ErrorKind::invalid_argument, "fit fractions must lie in [0, 1)");
        const auto n_fit = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        std::vector<Method> methods{Method::mc, Method::cv};
        std::optional<TrialMcfOptions> mcf;
        if (n_fit >= 1) {
            methods.push_back(Method::cv_mcf);
            mcf = TrialMcfOptions{n_fit, config};
        }
        TrialReport r = run_trials(pop, n, k, trials, methods, mcf, delta, threads);
        r.grid_value = fraction;
        reports.push_back(std::move(r));
    }
    return reports;
}

void write_trial_csv(std::ostream& out, const std::vector<TrialReport>& reports) {
    out << "grid_value,method,emp_var,theory_var,rel_err,M\n";
    for (const auto& report : reports)
        for (const auto& s : report.methods)
            out << format_double(report.grid_value) << ',' << method_name(s.method) << ','
                << format_double(s.emp_var) << ',' << format_double(s.theory_var) << ','
                << (std::isfinite(s.rel_err) ? format_double(s.rel_err) : "inf") << ','
                << report.trials << '\n';
}

std::string trial_reports_to_json(const std::vector<TrialReport>& reports) {
    JsonWriter w;
    w.begin_object();
    w.key("reports");
    w.begin_array();
    for (const auto& report : reports) {
        w.begin_object();
        w.key_value("grid_value", report.grid_value);
        w.key_value_uint("trials", report.trials);
        w.key_value("true_mean", report.true_mean);
        w.key_value("delta", report.delta);
        w.key("methods");
        w.begin_array();
        for (const auto& s : report.methods) {
            w.begin_object();
            w.key_value("method", method_name(s.method));
            w.key_value("emp_mean", s.emp_mean);
            w.key_value("emp_var", s.emp_var);
            w.key_value("theory_var", s.theory_var);
            w.key("rel_err");
            if (std::isfinite(s.rel_err))
                w.value(s.rel_err);
            else
                w.null();
            w.key_value("coverage", s.ci_coverage);
            w.key_value("mean_rho_sq", s.mean_rho_sq);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

} // namespace cvest
