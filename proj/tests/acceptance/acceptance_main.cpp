// Acceptance suite: every check below pins a tolerance in code and prints one
// PASS/FAIL line. The process exits nonzero if any check fails.

#include "cvest/dataset.hpp"
#include "cvest/estimator.hpp"
#include "cvest/linalg.hpp"
#include "cvest/mcf.hpp"
#include "cvest/mlp.hpp"
#include "cvest/rng.hpp"
#include "cvest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace cvest;

namespace {

struct CheckFailure {
    std::string message;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure{message};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. closed-form planner: published sample-efficiency numbers
// ---------------------------------------------------------------------------
std::string criterion_1() {
    const double a = min_paired_samples(715, 1669, 0.79 * 0.79);
    require(a >= 340.0 && a <= 360.0, "n_min(715,1669,0.79^2) = " + fmt(a) + " not in [340,360]");
    const double b = min_paired_samples(715, 1669, 0.83 * 0.83);
    require(b >= 295.0 && b <= 310.0, "n_min(715,1669,0.83^2) = " + fmt(b) + " not in [295,310]");
    const double c = min_paired_samples(200, 400, 0.0728 * 0.0728);
    require(std::ceil(c) == 200.0, "n_min(200,400,0.0728^2) = " + fmt(c) + " does not round to 200");
    const double d = min_paired_samples(200, 400, 0.6158 * 0.6158);
    require(d >= 143.0 && d <= 147.0, "n_min(200,400,0.6158^2) = " + fmt(d) + " not in [143,147]");
    return "n_min = " + fmt(a) + ", " + fmt(b) + ", " + fmt(c) + ", " + fmt(d);
}

// ---------------------------------------------------------------------------
// 2-4. empirical validation grid: variance law, unbiasedness, coverage
// ---------------------------------------------------------------------------
struct GridCell {
    double rho;
    std::size_t k;
    TrialReport report;
};

std::vector<GridCell> run_validation_grid() {
    static std::vector<GridCell> cache;
    if (!cache.empty()) return cache;
    const std::size_t n = 100;
    const std::size_t trials = 20000;
    const double mu_f = 0.5, var_f = 1.0;
    std::size_t cell = 0;
    for (const double rho : {0.0, 0.3, 0.6, 0.9}) {
        for (const std::size_t ratio : {std::size_t{0}, std::size_t{1}, std::size_t{9}}) {
            const std::size_t k = ratio * n;
            GaussianPopulation pop(mu_f, var_f, 1, rho, 0xACCE9700ULL + cell);
            GridCell gc{rho, k,
                        run_trials(pop, n, k, trials, {Method::mc, Method::cv}, std::nullopt,
                                   0.1)};
            cache.push_back(std::move(gc));
            ++cell;
        }
    }
    return cache;
}

std::string criterion_2() {
    double worst_cv = 0.0, worst_mc = 0.0;
    for (const auto& cell : run_validation_grid()) {
        const auto& cv = cell.report.stats(Method::cv);
        const auto& mc = cell.report.stats(Method::mc);
        worst_cv = std::max(worst_cv, cv.rel_err);
        worst_mc = std::max(worst_mc, mc.rel_err);
        require(cv.rel_err <= 0.05, "CV rel err " + fmt(cv.rel_err) + " > 5% at rho=" +
                                        fmt(cell.rho) + ", k=" + std::to_string(cell.k));
        require(mc.rel_err <= 0.05, "MC rel err " + fmt(mc.rel_err) + " > 5% at rho=" +
                                        fmt(cell.rho) + ", k=" + std::to_string(cell.k));
    }
    return "12 cells, worst rel err: CV " + fmt(worst_cv) + ", MC " + fmt(worst_mc);
}

std::string criterion_3() {
    double worst = 0.0;
    for (const auto& cell : run_validation_grid()) {
        const auto& cv = cell.report.stats(Method::cv);
        const double se = std::sqrt(cv.emp_var / static_cast<double>(cell.report.trials));
        const double bias = std::abs(cv.emp_mean - cell.report.true_mean);
        worst = std::max(worst, bias / se);
        require(bias <= 4.0 * se, "bias " + fmt(bias) + " > 4 SE (" + fmt(4.0 * se) +
                                      ") at rho=" + fmt(cell.rho) + ", k=" +
                                      std::to_string(cell.k));
    }
    return "worst |bias|/SE = " + fmt(worst) + " (limit 4)";
}

std::string criterion_4() {
    double lowest = 1.0;
    for (const auto& cell : run_validation_grid()) {
        const double mc_cov = cell.report.stats(Method::mc).ci_coverage;
        const double cv_cov = cell.report.stats(Method::cv).ci_coverage;
        lowest = std::min({lowest, mc_cov, cv_cov});
        require(mc_cov >= 0.90, "MC coverage " + fmt(mc_cov) + " < 90% at rho=" + fmt(cell.rho));
        require(cv_cov >= 0.90, "CV coverage " + fmt(cv_cov) + " < 90% at rho=" + fmt(cell.rho));
    }
    return "lowest coverage " + fmt(lowest) + " (delta = 0.1)";
}

// ---------------------------------------------------------------------------
// 5. collapse identity on randomized fixtures
// ---------------------------------------------------------------------------
std::string criterion_5() {
    Rng rng(0xC0117A93ULL);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t d = 1 + rng.next_below(4);
        const std::size_t n = 2 + rng.next_below(60);
        PairedDataset paired;
        paired.d = d;
        for (std::size_t i = 0; i < n; ++i) {
            PairedSample s;
            s.f = rng.normal() * std::pow(10.0, rng.uniform(-3.0, 3.0));
            s.g.resize(d);
            for (auto& v : s.g) v = rng.normal();
            paired.samples.push_back(std::move(s));
        }
        SurrogateDataset pool;
        pool.d = d;
        const std::size_t k = rng.next_below(20);
        for (std::size_t j = 0; j < k; ++j) {
            SurrogateSample s;
            s.g.resize(d);
            for (auto& v : s.g) v = rng.normal();
            pool.samples.push_back(std::move(s));
        }
        const double cv = cv_estimate(paired, pool, Beta::zeros(d));
        const double mc = mc_estimate(paired.f_values()).mu_hat;
        require(cv == mc, "collapse mismatch at rep " + std::to_string(rep));
    }
    return "1000 fixtures, exact equality";
}

// ---------------------------------------------------------------------------
// 6. affine invariance of the plug-in estimate
// ---------------------------------------------------------------------------
std::string criterion_6() {
    Rng rng(0xAFF19E00ULL);
    double worst = 0.0;
    int reps_done = 0;
    for (const std::size_t d : {std::size_t{1}, std::size_t{2}, std::size_t{5}}) {
        for (int rep = 0; rep < 34 && reps_done < 100; ++rep, ++reps_done) {
            const std::size_t n = 30 + rng.next_below(50);
            const std::size_t k = 50 + rng.next_below(300);
            PairedDataset paired;
            paired.d = d;
            for (std::size_t i = 0; i < n; ++i) {
                PairedSample s;
                s.g.resize(d);
                for (auto& v : s.g) v = rng.normal();
                s.f = s.g[0] + 0.5 * rng.normal();
                paired.samples.push_back(std::move(s));
            }
            SurrogateDataset pool;
            pool.d = d;
            for (std::size_t j = 0; j < k; ++j) {
                SurrogateSample s;
                s.g.resize(d);
                for (auto& v : s.g) v = rng.normal();
                pool.samples.push_back(std::move(s));
            }

            Matrix a(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    a(i, j) = (i == j ? 2.0 : 0.0) + rng.uniform(-0.5, 0.5);
            std::vector<double> shift(d);
            for (auto& v : shift) v = rng.uniform(-5.0, 5.0);
            auto transform = [&](const std::vector<double>& g) {
                std::vector<double> out(d, 0.0);
                for (std::size_t i = 0; i < d; ++i) {
                    out[i] = shift[i];
                    for (std::size_t j = 0; j < d; ++j) out[i] += a(i, j) * g[j];
                }
                return out;
            };
            PairedDataset paired_t = paired;
            for (auto& s : paired_t.samples) s.g = transform(s.g);
            SurrogateDataset pool_t = pool;
            for (auto& s : pool_t.samples) s.g = transform(s.g);

            const double est = cv_estimate(paired, pool, beta_opt(compute_moments(paired), k));
            const double est_t =
                cv_estimate(paired_t, pool_t, beta_opt(compute_moments(paired_t), k));
            const double rel = std::abs(est - est_t) / std::max(1e-30, std::abs(est));
            worst = std::max(worst, rel);
            require(rel < 1e-8, "relative change " + fmt(rel) + " >= 1e-8 at d=" +
                                    std::to_string(d) + ", rep " + std::to_string(rep));
        }
    }
    return "100 fixtures (d in {1,2,5}), worst relative change " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 7. beta_opt minimizes the variance quadratic
// ---------------------------------------------------------------------------
std::string criterion_7() {
    Rng rng(0xBE7A0107ULL);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = 1 + rng.next_below(5);
        Matrix root(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) root(i, j) = rng.normal();
        MomentSummary mom;
        mom.n = 2 + rng.next_below(300);
        mom.mean_g.assign(d, 0.0);
        mom.var_g = Matrix(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double s = i == j ? 0.05 : 0.0;
                for (std::size_t t = 0; t < d; ++t) s += root(i, t) * root(j, t);
                mom.var_g(i, j) = s;
            }
        mom.cov_gf.assign(d, 0.0);
        for (auto& v : mom.cov_gf) v = rng.normal() * 0.4;
        const double quad = dot(mom.cov_gf, solve_spd_ridge(mom.var_g, mom.cov_gf));
        mom.var_f = quad * rng.uniform(1.02, 4.0) + 1e-3;

        const std::size_t k = 1 + rng.next_below(1000);
        const Beta best = beta_opt(mom, k);
        const double at_best = cv_variance_at_beta(mom, best, k);
        for (int p = 0; p < 100; ++p) {
            Beta perturbed = best;
            for (auto& c : perturbed.coeffs) c += rng.normal() * rng.uniform(0.001, 0.2);
            const double v = cv_variance_at_beta(mom, perturbed, k);
            require(v >= at_best - 1e-12, "perturbation undercut the optimum by " +
                                              fmt(at_best - v) + " at rep " +
                                              std::to_string(rep));
        }
    }
    return "50 moment sets x 100 perturbations";
}

// ---------------------------------------------------------------------------
// 8. learned-correlator regime on the weak-correlation population
// ---------------------------------------------------------------------------
std::string criterion_8() {
    NonlinearPopulation pop(1, 0.1, 0.3, 0x8CF0ULL);
    require(std::abs(pop.probe_correlation()) < 0.2,
            "raw probe correlation " + fmt(pop.probe_correlation()) + " not below 0.2");

    McfConfig config;
    config.hidden_layers = {8, 8};
    config.learning_rate = 0.05;
    config.max_epochs = 400;
    config.early_stop_patience = 60;
    config.validation_fraction = 0.2;

    // (a) a single trained correlator reaches rho > 0.6 on held-out pairs
    const std::size_t n = 200, k = 400;
    auto [paired, pool] = sample_population(pop, n, k, 1);
    McfConfig one_shot = config;
    one_shot.max_epochs = 2000;
    one_shot.seed = 0x15EEDULL;
    auto [fit, est] = split_paired(paired, SplitSpec{50, 0xF17ULL});
    const McfModel model = fit_mlp(fit, one_shot);
    double mp = 0.0, mf = 0.0;
    std::vector<double> preds;
    for (const auto& s : est.samples) {
        preds.push_back(predict(model, s.g, s.phi));
        mp += preds.back();
        mf += s.f;
    }
    mp /= static_cast<double>(est.n());
    mf /= static_cast<double>(est.n());
    double spp = 0, sff = 0, spf = 0;
    for (std::size_t i = 0; i < est.n(); ++i) {
        spp += (preds[i] - mp) * (preds[i] - mp);
        sff += (est.samples[i].f - mf) * (est.samples[i].f - mf);
        spf += (preds[i] - mp) * (est.samples[i].f - mf);
    }
    const double holdout_rho = spf / std::sqrt(spp * sff);
    require(holdout_rho > 0.6, "holdout correlation " + fmt(holdout_rho) + " <= 0.6");

    // (b) sweep n_fit: the worthwhileness test fires somewhere
    bool any_worthwhile = false;
    std::size_t chosen_n_fit = 0;
    for (const std::size_t n_fit : {std::size_t{20}, std::size_t{50}, std::size_t{100}}) {
        const auto probe = run_trials(pop, n, k, 500, {Method::cv, Method::cv_mcf},
                                      TrialMcfOptions{n_fit, config}, 0.1);
        const double rho_sq_mcf = probe.stats(Method::cv_mcf).mean_rho_sq;
        const double rho_sq_raw = probe.stats(Method::cv).mean_rho_sq;
        if (mcf_worthwhile(rho_sq_mcf, rho_sq_raw, n - n_fit, n, k) && chosen_n_fit == 0) {
            any_worthwhile = true;
            chosen_n_fit = n_fit;
        }
    }
    require(any_worthwhile, "no n_fit in {20,50,100} was worthwhile");

    // (c) at that n_fit the end-to-end variance drops, outside a 5% band
    const auto main_run = run_trials(pop, n, k, 5000, {Method::cv, Method::cv_mcf},
                                     TrialMcfOptions{chosen_n_fit, config}, 0.1);
    const double var_cv = main_run.stats(Method::cv).emp_var;
    const double var_mcf = main_run.stats(Method::cv_mcf).emp_var;
    require(var_mcf < 0.95 * var_cv, "Var(CV_MCF) " + fmt(var_mcf) +
                                         " not below 0.95 * Var(CV) " + fmt(var_cv));
    return "holdout rho " + fmt(holdout_rho) + ", n_fit " + std::to_string(chosen_n_fit) +
           ", Var ratio " + fmt(var_mcf / var_cv);
}

// ---------------------------------------------------------------------------
// 9. analytic gradients vs central differences
// ---------------------------------------------------------------------------
std::string criterion_9() {
    Rng rng(0x96AD0000ULL);
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        const std::size_t input_dim = 1 + rng.next_below(4);
        const bool binary = draw % 2 == 1;
        MlpShape shape{input_dim,
                       {2 + rng.next_below(5), 2 + rng.next_below(5)},
                       binary ? OutputActivation::logistic : OutputActivation::identity};
        const LossKind loss = binary ? LossKind::bce : LossKind::mse;
        std::vector<double> params = mlp_init_params(shape, rng.next_u64());
        for (auto& p : params) p += 0.2 * rng.normal();

        std::vector<std::vector<double>> inputs;
        std::vector<double> targets;
        for (int i = 0; i < 6; ++i) {
            std::vector<double> x(input_dim);
            for (auto& v : x) v = rng.normal();
            inputs.push_back(x);
            targets.push_back(binary ? static_cast<double>(rng.next_below(2)) : rng.normal());
        }
        std::vector<double> grad;
        mlp_batch_loss_grad(shape, params, inputs, targets, loss, grad);
        const double h = 1e-5;
        for (std::size_t j = 0; j < params.size(); ++j) {
            auto plus = params, minus = params;
            plus[j] += h;
            minus[j] -= h;
            const double fd = (mlp_batch_loss(shape, plus, inputs, targets, loss) -
                               mlp_batch_loss(shape, minus, inputs, targets, loss)) /
                              (2.0 * h);
            const double rel =
                std::abs(fd - grad[j]) / std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
            worst = std::max(worst, rel);
            require(rel < 1e-4, "gradient mismatch " + fmt(rel) + " at draw " +
                                    std::to_string(draw) + ", param " + std::to_string(j));
        }
    }
    return "50 draws, worst relative error " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 10. plug-in variance consistency at scale
// ---------------------------------------------------------------------------
std::string criterion_10() {
    GaussianPopulation pop(0.0, 1.0, 1, 0.9, 0xC0517ULL);
    auto [paired, pool] = sample_population(pop, 10000, 100000, 0);
    const auto report = run_cv_pipeline(paired, pool, CiSpec::from_delta(0.1));
    const double theory = cv_variance_theoretical(1.0, 0.81, 10000, 100000);
    const double rel = std::abs(report.var_hat - theory) / theory;
    require(rel < 0.05, "plug-in vs closed form rel err " + fmt(rel) + " >= 5%");
    return "n=1e4, k=1e5, rel err " + fmt(rel);
}

// ---------------------------------------------------------------------------
// 11. README documents what is deliberately not reproduced
// ---------------------------------------------------------------------------
std::string criterion_11() {
#ifdef CVEST_README_PATH
    std::ifstream in(CVEST_README_PATH);
    require(in.good(), "README not found at " CVEST_README_PATH);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    require(text.find("proprietary") != std::string::npos &&
                text.find("checks 2 and 8") != std::string::npos,
            "README lacks the out-of-scope note pointing at checks 2 and 8");
    return "README documents the out-of-scope experiment tables";
#else
    require(false, "README path not configured");
    return "";
#endif
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<std::string()> body;
    };
    const std::vector<Criterion> criteria{
        {1, "planner worked numbers", criterion_1},
        {2, "variance law on the Gaussian grid", criterion_2},
        {3, "unbiasedness on the Gaussian grid", criterion_3},
        {4, "chebyshev coverage", criterion_4},
        {5, "collapse identity", criterion_5},
        {6, "affine invariance", criterion_6},
        {7, "coefficient optimality", criterion_7},
        {8, "learned-correlator regime", criterion_8},
        {9, "mlp gradient check", criterion_9},
        {10, "plug-in variance consistency", criterion_10},
        {11, "documented out-of-scope tables", criterion_11},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = true;
        try {
            detail = c.body();
        } catch (const CheckFailure& f) {
            ok = false;
            detail = f.message;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s  criterion %2d  %-40s  %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
