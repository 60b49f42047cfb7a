#pragma once

#include "cvest/dataset.hpp"
#include "cvest/estimator.hpp"
#include "cvest/linalg.hpp"
#include "cvest/mcf.hpp"
#include "cvest/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cvest {

// A stochastic population with known ground truth, used to validate the
// estimators empirically.
class Population {
public:
    virtual ~Population() = default;

    virtual std::uint64_t seed() const = 0;
    virtual std::size_t surrogate_dim() const = 0;
    virtual std::size_t feature_dim() const = 0;
    virtual double true_mean() const = 0;
    virtual double var_f() const = 0;
    // population squared correlation between G and F (raw, before any MCF)
    virtual double rho_sq() const = 0;

    virtual PairedSample draw_paired(Rng& rng) const = 0;
    virtual SurrogateSample draw_surrogate(Rng& rng) const = 0;
};

// Jointly Gaussian (F, G) with exact control over the population correlation.
// The scalar-rho form distributes the correlation evenly across the d
// surrogate coordinates (unit marginals) and supports |rho| = 1; the full
// form takes an explicit (d+1)x(d+1) covariance, which must be positive
// definite.
class GaussianPopulation : public Population {
public:
    GaussianPopulation(double mu_f, double var_f, std::size_t d, double rho,
                       std::uint64_t seed);
    GaussianPopulation(std::vector<double> mean, Matrix joint_cov, std::uint64_t seed);

    std::uint64_t seed() const override { return seed_; }
    std::size_t surrogate_dim() const override { return d_; }
    std::size_t feature_dim() const override { return 0; }
    double true_mean() const override { return mu_f_; }
    double var_f() const override { return var_f_; }
    double rho_sq() const override { return rho_sq_; }

    PairedSample draw_paired(Rng& rng) const override;
    SurrogateSample draw_surrogate(Rng& rng) const override;

private:
    std::uint64_t seed_;
    std::size_t d_;
    double mu_f_;
    double var_f_;
    double rho_sq_;
    // scalar-rho mode
    bool scalar_mode_ = true;
    double rho_ = 0.0;
    // full-covariance mode
    std::vector<double> mean_;
    Matrix chol_;
};

// Regime-switching construction: X uniform on [-1,1]^m, G = h(X) + noise,
// F = s(X) * G + noise with s flipping sign across regions of X. The raw
// correlation between G and F is zero by symmetry, yet F is predictable from
// (G, X); this is the setting where a learned correlator pays off.
class NonlinearPopulation : public Population {
public:
    explicit NonlinearPopulation(std::size_t m = 1, double noise_g = 0.1,
                                 double noise_f = 0.3, std::uint64_t seed = 0);

    std::uint64_t seed() const override { return seed_; }
    std::size_t surrogate_dim() const override { return 1; }
    std::size_t feature_dim() const override { return m_; }
    double true_mean() const override { return 0.0; }
    double var_f() const override;
    double rho_sq() const override { return 0.0; }

    PairedSample draw_paired(Rng& rng) const override;
    SurrogateSample draw_surrogate(Rng& rng) const override;

    // sample Pearson correlation measured on the construction-time probe
    double probe_correlation() const { return probe_corr_; }

private:
    std::uint64_t seed_;
    std::size_t m_;
    double noise_g_;
    double noise_f_;
    double probe_corr_ = 0.0;
};

// n paired plus k surrogate-only i.i.d. draws; deterministic in the
// population seed and the stream index.
std::pair<PairedDataset, SurrogateDataset> sample_population(const Population& pop,
                                                             std::size_t n, std::size_t k,
                                                             std::uint64_t stream = 0);

struct TrialMcfOptions {
    std::size_t n_fit = 0;
    McfConfig config;
};

struct MethodTrialStats {
    Method method = Method::mc;
    double emp_mean = 0.0;   // mean of the estimates across trials
    double emp_var = 0.0;    // variance of the estimates across trials
    double theory_var = 0.0; // closed-form prediction from population moments
    double rel_err = 0.0;    // |emp_var - theory_var| / theory_var
    double ci_coverage = 0.0; // fraction of trials whose interval covers the truth
    double mean_rho_sq = 0.0; // mean plug-in rho^2 (post-MCF for CV_MCF)
};

struct TrialReport {
    double grid_value = 0.0;
    std::size_t trials = 0;
    double true_mean = 0.0;
    double delta = 0.1;
    std::vector<MethodTrialStats> methods;

    const MethodTrialStats& stats(Method m) const;
};

// Repeats the full estimation pipeline on M independent draws from the
// population. Trials are parallelized; each owns an RNG derived from
// (population seed, trial index), and aggregation runs in trial order, so
// results do not depend on the thread count.
TrialReport run_trials(const Population& pop, std::size_t n, std::size_t k, std::size_t trials,
                       const std::vector<Method>& methods,
                       const std::optional<TrialMcfOptions>& mcf = std::nullopt,
                       double delta = 0.1, unsigned threads = 0);

std::vector<TrialReport> sweep_k(const Population& pop, std::size_t n,
                                 const std::vector<std::size_t>& k_grid, std::size_t trials,
                                 const std::vector<Method>& methods,
                                 const std::optional<TrialMcfOptions>& mcf = std::nullopt,
                                 double delta = 0.1, unsigned threads = 0);

// One grid point per fraction of paired samples spent on MCF training.
// Points with n_fit = 0 report MC/CV only (there is nothing to train on).
std::vector<TrialReport> sweep_fit_fraction(const Population& pop, std::size_t n,
                                            std::size_t k,
                                            const std::vector<double>& fractions,
                                            std::size_t trials, const McfConfig& config,
                                            double delta = 0.1, unsigned threads = 0);

// Plot-ready table: grid_value,method,emp_var,theory_var,rel_err,M
void write_trial_csv(std::ostream& out, const std::vector<TrialReport>& reports);
std::string trial_reports_to_json(const std::vector<TrialReport>& reports);

} // namespace cvest
