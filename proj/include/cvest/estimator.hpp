#pragma once

#include "cvest/dataset.hpp"
#include "cvest/linalg.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cvest {

// First and second sample moments of a paired dataset, unbiased (n-1) divisor
// throughout.
struct MomentSummary {
    double mean_f = 0.0;
    double var_f = 0.0;
    std::vector<double> mean_g; // length d
    Matrix var_g;               // d x d, symmetric
    std::vector<double> cov_gf; // length d
    std::size_t n = 0;
};

// Control-variate coefficient vector.
struct Beta {
    std::vector<double> coeffs;

    bool is_zero() const {
        for (double c : coeffs)
            if (c != 0.0) return false;
        return true;
    }
    static Beta zeros(std::size_t d) { return Beta{std::vector<double>(d, 0.0)}; }
};

// Distribution-free interval [center - radius, center + radius] holding with
// probability at least 1 - failure_prob.
struct ConfidenceInterval {
    double center = 0.0;
    double radius = 0.0;
    double failure_prob = 0.0;
};

// Interval request: either a failure probability delta (radius derived) or a
// fixed half-width alpha (failure probability derived).
struct CiSpec {
    enum class Kind { delta, alpha };
    Kind kind = Kind::delta;
    double value = 0.1;

    static CiSpec from_delta(double delta) { return {Kind::delta, delta}; }
    static CiSpec from_alpha(double alpha) { return {Kind::alpha, alpha}; }
};

enum class Method { mc, cv, cv_mcf };

const char* method_name(Method m);

struct EstimateReport {
    Method method = Method::mc;
    double mu_hat = 0.0;
    double var_hat = 0.0;            // variance of the mean estimate
    std::optional<Beta> beta;        // absent for MC
    std::optional<double> rho_sq;    // absent for MC; post-MCF value for CV_MCF
    std::optional<double> raw_rho_sq; // CV_MCF only: correlation before the MCF
    std::size_t n_used = 0;
    std::size_t k_used = 0;
    std::optional<ConfidenceInterval> ci;
};

// ---- closed-form operations -------------------------------------------------

// Plain Monte Carlo: empirical mean, with var_hat = unbiased sample variance / n.
EstimateReport mc_estimate(const std::vector<double>& f_values);

// Sample means, variances and cross-covariance of a paired dataset.
MomentSummary compute_moments(const PairedDataset& paired);

// Optimal coefficient: (k/(k+n)) Var(G)^{-1} Cov(G,F), ridge-stabilized.
// k = 0 yields the zero vector.
Beta beta_opt(const MomentSummary& moments, std::size_t k);

// (1/n) sum(F_i - beta^T G_i) + (1/k) sum(beta^T G'_j).
// With beta = 0 the surrogate term is identically zero, so the result equals
// mc_estimate on F to the last digit.
double cv_estimate(const PairedDataset& paired, const SurrogateDataset& surrogate,
                   const Beta& beta);

// Squared correlation between the surrogate vector and the target,
// cov^T Var(G)^{-1} cov / Var(F), clamped to [0,1]. Equals the squared Pearson
// coefficient when d = 1.
double rho_squared(const MomentSummary& moments);

// (1/n) (1 - (k/(k+n)) rho^2) var_f.
double cv_variance_theoretical(double var_f, double rho_sq, std::size_t n, std::size_t k);

// Plug-in variance of the estimate: centered-residual term over the paired
// set plus the surrogate-pool term.
double cv_variance_plugin(const PairedDataset& paired, const SurrogateDataset& surrogate,
                          const Beta& beta);

// Variance of the estimator at an arbitrary coefficient (the convex quadratic
// minimized by beta_opt): var_f/n - (2/n) beta.cov + ((n+k)/(nk)) beta.Var(G).beta.
double cv_variance_at_beta(const MomentSummary& moments, const Beta& beta, std::size_t k);

ConfidenceInterval chebyshev_interval(double mu_hat, double var_hat, double delta);

// P(|mu_hat - mu| >= alpha) bound: min(1, var_hat / alpha^2).
double chebyshev_tail(double var_hat, double alpha);

// Minimum number of paired samples for the control-variates interval to match
// a plain Monte Carlo interval built from n_r samples, given k surrogate-only
// samples and squared correlation rho_sq. Real-valued; planners take the
// ceiling.
double min_paired_samples(std::size_t n_r, std::size_t k, double rho_sq);

// Full pipeline: plug-in beta, estimate, plug-in variance, Chebyshev interval.
EstimateReport run_cv_pipeline(const PairedDataset& paired, const SurrogateDataset& surrogate,
                               const CiSpec& ci);

ConfidenceInterval make_interval(double mu_hat, double var_hat, const CiSpec& spec);

// ---- report serialization ---------------------------------------------------

// Fixed-key JSON object (method, mu_hat, var_hat, beta, rho_sq, n, k, ci);
// CV_MCF reports additionally carry raw_rho_sq. Floats at 17 significant
// digits.
std::string report_to_json(const EstimateReport& report);

} // namespace cvest
