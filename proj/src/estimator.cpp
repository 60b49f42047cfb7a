#include "cvest/estimator.hpp"

#include "cvest/errors.hpp"
#include "cvest/json_writer.hpp"

#include <algorithm>
#include <cmath>

namespace cvest {

const char* method_name(Method m) {
    switch (m) {
        case Method::mc: return "MC";
        case Method::cv: return "CV";
        case Method::cv_mcf: return "CV_MCF";
    }
    return "?";
}

EstimateReport mc_estimate(const std::vector<double>& f_values) {
    const std::size_t n = f_values.size();
    if (n < 2)
        throw Error(ErrorKind::empty_dataset,
                    "mc_estimate needs at least 2 samples, got " + std::to_string(n));

    double sum = 0.0;
    for (double f : f_values) sum += f;
    const double mean = sum / static_cast<double>(n);

    double ss = 0.0;
    for (double f : f_values) {
        const double c = f - mean;
        ss += c * c;
    }
    const double sample_var = ss / static_cast<double>(n - 1);

    EstimateReport report;
    report.method = Method::mc;
    report.mu_hat = mean;
    report.var_hat = sample_var / static_cast<double>(n);
    report.n_used = n;
    report.k_used = 0;
    return report;
}

MomentSummary compute_moments(const PairedDataset& paired) {
    const std::size_t n = paired.n();
    const std::size_t d = paired.d;
    if (n < 2)
        throw Error(ErrorKind::empty_dataset,
                    "moment computation needs at least 2 samples, got " + std::to_string(n));

    MomentSummary mom;
    mom.n = n;
    mom.mean_g.assign(d, 0.0);
    double sum_f = 0.0;
    for (const auto& s : paired.samples) {
        sum_f += s.f;
        for (std::size_t j = 0; j < d; ++j) mom.mean_g[j] += s.g[j];
    }
    mom.mean_f = sum_f / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) mom.mean_g[j] /= static_cast<double>(n);

    const double divisor = static_cast<double>(n - 1);
    mom.var_g = Matrix(d, d);
    mom.cov_gf.assign(d, 0.0);
    double ss_f = 0.0;
    for (const auto& s : paired.samples) {
        const double cf = s.f - mom.mean_f;
        ss_f += cf * cf;
        for (std::size_t j = 0; j < d; ++j) {
            const double cj = s.g[j] - mom.mean_g[j];
            mom.cov_gf[j] += cj * cf;
            for (std::size_t l = 0; l <= j; ++l)
                mom.var_g(j, l) += cj * (s.g[l] - mom.mean_g[l]);
        }
    }
    mom.var_f = ss_f / divisor;
    for (std::size_t j = 0; j < d; ++j) {
        mom.cov_gf[j] /= divisor;
        for (std::size_t l = 0; l <= j; ++l) {
            mom.var_g(j, l) /= divisor;
            mom.var_g(l, j) = mom.var_g(j, l);
        }
    }
    return mom;
}

Beta beta_opt(const MomentSummary& moments, std::size_t k) {
    const std::size_t d = moments.mean_g.size();
    if (k == 0) return Beta::zeros(d);

    std::vector<double> solved = solve_spd_ridge(moments.var_g, moments.cov_gf);
    const double prefactor =
        static_cast<double>(k) / static_cast<double>(k + moments.n);
    for (double& c : solved) {
        c *= prefactor;
        if (!std::isfinite(c))
            throw Error(ErrorKind::singular_covariance, "non-finite coefficient");
    }
    return Beta{std::move(solved)};
}

double cv_estimate(const PairedDataset& paired, const SurrogateDataset& surrogate,
                   const Beta& beta) {
    const std::size_t n = paired.n();
    const std::size_t k = surrogate.k();
    if (n < 1) throw Error(ErrorKind::empty_dataset, "no paired samples");
    if (beta.coeffs.size() != paired.d)
        throw Error(ErrorKind::dimension_mismatch,
                    "beta has " + std::to_string(beta.coeffs.size()) + " entries, paired d=" +
                        std::to_string(paired.d));
    const bool beta_zero = beta.is_zero();
    if (!beta_zero) {
        check_compatibility(paired, surrogate);
        if (k == 0)
            throw Error(ErrorKind::empty_surrogate,
                        "surrogate pool is empty but beta is nonzero");
    }

    double paired_sum = 0.0;
    for (const auto& s : paired.samples) paired_sum += s.f - dot(beta.coeffs, s.g);
    double estimate = paired_sum / static_cast<double>(n);

    if (!beta_zero) {
        double pool_sum = 0.0;
        for (const auto& s : surrogate.samples) pool_sum += dot(beta.coeffs, s.g);
        estimate += pool_sum / static_cast<double>(k);
    }
    return estimate;
}

double rho_squared(const MomentSummary& moments) {
    if (!(moments.var_f > 0.0))
        throw Error(ErrorKind::degenerate_target, "Var(F) = 0, correlation undefined");
    const std::vector<double> solved = solve_spd_ridge(moments.var_g, moments.cov_gf);
    const double quad = dot(moments.cov_gf, solved);
    return std::clamp(quad / moments.var_f, 0.0, 1.0);
}

double cv_variance_theoretical(double var_f, double rho_sq, std::size_t n, std::size_t k) {
    if (var_f < 0.0) throw Error(ErrorKind::invalid_argument, "var_f must be >= 0");
    if (rho_sq < 0.0 || rho_sq > 1.0)
        throw Error(ErrorKind::invalid_argument, "rho_sq must be in [0,1]");
    if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be >= 1");
    const double fraction =
        k == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(k + n);
    return (1.0 - fraction * rho_sq) * var_f / static_cast<double>(n);
}

double cv_variance_plugin(const PairedDataset& paired, const SurrogateDataset& surrogate,
                          const Beta& beta) {
    const std::size_t n = paired.n();
    const std::size_t k = surrogate.k();
    if (n < 2)
        throw Error(ErrorKind::empty_dataset,
                    "plug-in variance needs at least 2 paired samples");
    if (beta.coeffs.size() != paired.d)
        throw Error(ErrorKind::dimension_mismatch, "beta/paired dimension mismatch");
    const bool beta_zero = beta.is_zero();
    if (!beta_zero) {
        check_compatibility(paired, surrogate);
        if (k < 2)
            throw Error(ErrorKind::empty_surrogate,
                        "plug-in variance needs at least 2 surrogate samples when beta != 0");
    }

    double mean_f = 0.0;
    std::vector<double> mean_g(paired.d, 0.0);
    for (const auto& s : paired.samples) {
        mean_f += s.f;
        for (std::size_t j = 0; j < paired.d; ++j) mean_g[j] += s.g[j];
    }
    mean_f /= static_cast<double>(n);
    for (double& v : mean_g) v /= static_cast<double>(n);

    const double centered_offset = mean_f - dot(beta.coeffs, mean_g);
    double ss = 0.0;
    for (const auto& s : paired.samples) {
        const double r = s.f - dot(beta.coeffs, s.g) - centered_offset;
        ss += r * r;
    }
    // same operation order as mc_estimate so that beta = 0 reproduces the MC
    // variance bit for bit
    double variance = ss / static_cast<double>(n - 1) / static_cast<double>(n);

    if (!beta_zero) {
        std::vector<double> pool_mean(surrogate.d, 0.0);
        for (const auto& s : surrogate.samples)
            for (std::size_t j = 0; j < surrogate.d; ++j) pool_mean[j] += s.g[j];
        for (double& v : pool_mean) v /= static_cast<double>(k);
        const double beta_pool_mean = dot(beta.coeffs, pool_mean);
        double ss_pool = 0.0;
        for (const auto& s : surrogate.samples) {
            const double r = dot(beta.coeffs, s.g) - beta_pool_mean;
            ss_pool += r * r;
        }
        variance += ss_pool / (static_cast<double>(k) * static_cast<double>(k - 1));
    }
    return variance;
}

double cv_variance_at_beta(const MomentSummary& moments, const Beta& beta, std::size_t k) {
    const std::size_t d = moments.mean_g.size();
    if (beta.coeffs.size() != d)
        throw Error(ErrorKind::dimension_mismatch, "beta/moments dimension mismatch");
    const double n = static_cast<double>(moments.n);
    if (k == 0) {
        if (!beta.is_zero())
            throw Error(ErrorKind::empty_surrogate,
                        "variance at nonzero beta undefined without surrogate samples");
        return moments.var_f / n;
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            quad += beta.coeffs[i] * moments.var_g(i, j) * beta.coeffs[j];
    const double kk = static_cast<double>(k);
    return moments.var_f / n - 2.0 / n * dot(beta.coeffs, moments.cov_gf) +
           (n + kk) / (n * kk) * quad;
}

ConfidenceInterval chebyshev_interval(double mu_hat, double var_hat, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::invalid_delta, "delta must lie in (0,1)");
    if (var_hat < 0.0) throw Error(ErrorKind::invalid_argument, "var_hat must be >= 0");
    return ConfidenceInterval{mu_hat, std::sqrt(var_hat / delta), delta};
}

double chebyshev_tail(double var_hat, double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_alpha, "alpha must be > 0");
    if (var_hat < 0.0) throw Error(ErrorKind::invalid_argument, "var_hat must be >= 0");
    return std::min(1.0, var_hat / (alpha * alpha));
}

double min_paired_samples(std::size_t n_r, std::size_t k, double rho_sq) {
    if (n_r < 1) throw Error(ErrorKind::invalid_argument, "n_r must be >= 1");
    if (rho_sq < 0.0 || rho_sq > 1.0)
        throw Error(ErrorKind::invalid_argument, "rho_sq must be in [0,1]");
    const double nr = static_cast<double>(n_r);
    const double kk = static_cast<double>(k);
    const double gap = kk - nr;
    return (-gap + std::sqrt(gap * gap + 4.0 * nr * kk * (1.0 - rho_sq))) / 2.0;
}

ConfidenceInterval make_interval(double mu_hat, double var_hat, const CiSpec& spec) {
    if (spec.kind == CiSpec::Kind::delta) return chebyshev_interval(mu_hat, var_hat, spec.value);
    const double alpha = spec.value;
    return ConfidenceInterval{mu_hat, alpha, chebyshev_tail(var_hat, alpha)};
}

EstimateReport run_cv_pipeline(const PairedDataset& paired, const SurrogateDataset& surrogate,
                               const CiSpec& ci) {
    check_compatibility(paired, surrogate);
    const MomentSummary moments = compute_moments(paired);
    const Beta beta = beta_opt(moments, surrogate.k());

    EstimateReport report;
    report.method = Method::cv;
    report.mu_hat = cv_estimate(paired, surrogate, beta);
    report.var_hat = cv_variance_plugin(paired, surrogate, beta);
    if (beta.is_zero()) {
        // the estimate has already collapsed to plain MC; a degenerate
        // correlation (constant F or constant G) must not fail the pipeline
        try {
            report.rho_sq = rho_squared(moments);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate_target &&
                e.kind() != ErrorKind::singular_covariance)
                throw;
            report.rho_sq = 0.0;
        }
    } else {
        report.rho_sq = rho_squared(moments);
    }
    report.beta = beta;
    report.n_used = paired.n();
    report.k_used = surrogate.k();
    report.ci = make_interval(report.mu_hat, report.var_hat, ci);
    return report;
}

std::string report_to_json(const EstimateReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key_value("method", method_name(report.method));
    w.key_value("mu_hat", report.mu_hat);
    w.key_value("var_hat", report.var_hat);
    if (report.beta) {
        w.key("beta");
        w.value_array(report.beta->coeffs);
    }
    if (report.rho_sq) w.key_value("rho_sq", *report.rho_sq);
    if (report.raw_rho_sq) w.key_value("raw_rho_sq", *report.raw_rho_sq);
    w.key_value_uint("n", report.n_used);
    w.key_value_uint("k", report.k_used);
    if (report.ci) {
        w.key("ci");
        w.begin_object();
        w.key_value("center", report.ci->center);
        w.key_value("radius", report.ci->radius);
        w.key_value("delta", report.ci->failure_prob);
        w.end_object();
    }
    w.end_object();
    return w.str();
}

} // namespace cvest
