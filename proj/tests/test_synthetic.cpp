#include "cvest/synthetic.hpp"

#include "cvest/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cvest;
using cvest::test::pearson;

namespace {

double sample_pearson_fg(const PairedDataset& ds) {
    std::vector<double> f, g;
    for (const auto& s : ds.samples) {
        f.push_back(s.f);
        g.push_back(s.g[0]);
    }
    return pearson(g, f);
}

} // namespace

TEST_CASE("perfectly correlated Gaussian population") {
    GaussianPopulation pop(0.0, 1.0, 1, 1.0, 99);
    auto [paired, pool] = sample_population(pop, 10000, 0);
    CHECK(sample_pearson_fg(paired) > 0.999);
}

TEST_CASE("independent Gaussian population") {
    GaussianPopulation pop(2.0, 1.0, 1, 0.0, 99);
    auto [paired, pool] = sample_population(pop, 10000, 0);
    CHECK(std::abs(sample_pearson_fg(paired)) < 0.05);
}

TEST_CASE("intermediate correlation lands near the target") {
    GaussianPopulation pop(0.0, 4.0, 1, 0.6, 1234);
    auto [paired, pool] = sample_population(pop, 20000, 0);
    CHECK(sample_pearson_fg(paired) == doctest::Approx(0.6).epsilon(0.03));
    // marginal variance of F is controlled too
    double mean = 0.0, ss = 0.0;
    for (const auto& s : paired.samples) mean += s.f;
    mean /= static_cast<double>(paired.n());
    for (const auto& s : paired.samples) ss += (s.f - mean) * (s.f - mean);
    CHECK(ss / static_cast<double>(paired.n() - 1) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("fixed seed reproduces the datasets exactly") {
    GaussianPopulation pop(0.0, 1.0, 2, 0.5, 7);
    auto [p1, s1] = sample_population(pop, 50, 30);
    auto [p2, s2] = sample_population(pop, 50, 30);
    REQUIRE(p1.n() == p2.n());
    for (std::size_t i = 0; i < p1.n(); ++i) {
        CHECK(p1.samples[i].f == p2.samples[i].f);
        CHECK(p1.samples[i].g == p2.samples[i].g);
    }
    for (std::size_t j = 0; j < s1.k(); ++j) CHECK(s1.samples[j].g == s2.samples[j].g);
}

TEST_CASE("multivariate scalar-rho mode spreads correlation across coordinates") {
    GaussianPopulation pop(1.0, 2.0, 3, 0.9, 21);
    CHECK(pop.rho_sq() == doctest::Approx(0.81));
    auto [paired, pool] = sample_population(pop, 30000, 0);
    const auto mom = compute_moments(paired);
    CHECK(rho_squared(mom) == doctest::Approx(0.81).epsilon(0.03));
}

TEST_CASE("full covariance constructor") {
    // F = G_1 with extra noise: Var(F)=2, Var(G)=1, cov=1 -> rho^2 = 0.5
    Matrix cov(2, 2);
    cov(0, 0) = 2.0;
    cov(0, 1) = cov(1, 0) = 1.0;
    cov(1, 1) = 1.0;
    GaussianPopulation pop({5.0, 0.0}, cov, 3);
    CHECK(pop.rho_sq() == doctest::Approx(0.5));
    CHECK(pop.true_mean() == 5.0);
    auto [paired, pool] = sample_population(pop, 20000, 10);
    const auto mom = compute_moments(paired);
    CHECK(mom.mean_f == doctest::Approx(5.0).epsilon(0.01));
    CHECK(mom.var_f == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rho_squared(mom) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("full covariance must be positive definite") {
    Matrix cov(2, 2);
    cov(0, 0) = 1.0;
    cov(0, 1) = cov(1, 0) = 1.0;
    cov(1, 1) = 1.0; // singular
    cvest::test::expect_error(ErrorKind::invalid_argument,
                              [&] { GaussianPopulation({0.0, 0.0}, cov, 3); });
}

TEST_CASE("nonlinear population: weak raw correlation, known moments") {
    NonlinearPopulation pop(1, 0.1, 0.3, 17);
    CHECK(std::abs(pop.probe_correlation()) < 0.2);
    CHECK(pop.true_mean() == 0.0);

    auto [paired, pool] = sample_population(pop, 50000, 0);
    CHECK(std::abs(sample_pearson_fg(paired)) < 0.05);
    double mean = 0.0, ss = 0.0;
    for (const auto& s : paired.samples) mean += s.f;
    mean /= static_cast<double>(paired.n());
    CHECK(std::abs(mean) < 0.02);
    for (const auto& s : paired.samples) ss += (s.f - mean) * (s.f - mean);
    const double var = ss / static_cast<double>(paired.n() - 1);
    CHECK(var == doctest::Approx(pop.var_f()).epsilon(0.03));
}

TEST_CASE("run_trials: MC empirical variance matches var_f/n") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.0, 5);
    const auto report = run_trials(pop, 100, 0, 4000, {Method::mc});
    const auto& mc = report.stats(Method::mc);
    CHECK(mc.theory_var == doctest::Approx(0.01));
    CHECK(mc.emp_var == doctest::Approx(0.01).epsilon(0.08));
    CHECK(std::abs(mc.emp_mean) < 0.01);
}

TEST_CASE("run_trials: CV empirical variance matches the closed form") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.9, 6);
    const auto report = run_trials(pop, 100, 900, 4000, {Method::mc, Method::cv});
    const auto& cv = report.stats(Method::cv);
    const double expected = cv_variance_theoretical(1.0, 0.81, 100, 900);
    CHECK(cv.theory_var == doctest::Approx(expected));
    CHECK(cv.emp_var == doctest::Approx(expected).epsilon(0.08));
    // and CV clearly beats MC here
    CHECK(cv.emp_var < report.stats(Method::mc).emp_var);
}

TEST_CASE("run_trials: k = 0 makes CV and MC identical trial by trial") {
    GaussianPopulation pop(1.0, 1.0, 1, 0.7, 42);
    const auto report = run_trials(pop, 50, 0, 500, {Method::mc, Method::cv});
    CHECK(report.stats(Method::cv).emp_var == report.stats(Method::mc).emp_var);
    CHECK(report.stats(Method::cv).emp_mean == report.stats(Method::mc).emp_mean);
}

TEST_CASE("run_trials is deterministic across thread counts") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.6, 10);
    const auto a = run_trials(pop, 40, 80, 300, {Method::mc, Method::cv}, std::nullopt, 0.1, 1);
    const auto b = run_trials(pop, 40, 80, 300, {Method::mc, Method::cv}, std::nullopt, 0.1, 4);
    CHECK(a.stats(Method::cv).emp_mean == b.stats(Method::cv).emp_mean);
    CHECK(a.stats(Method::cv).emp_var == b.stats(Method::cv).emp_var);
    CHECK(a.stats(Method::mc).emp_var == b.stats(Method::mc).emp_var);
}

TEST_CASE("chebyshev coverage is conservative") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.6, 11);
    const auto report = run_trials(pop, 100, 400, 2000, {Method::mc, Method::cv});
    CHECK(report.stats(Method::mc).ci_coverage >= 0.9);
    CHECK(report.stats(Method::cv).ci_coverage >= 0.9);
}

TEST_CASE("sweep_k: theoretical variance strictly decreasing on a correlated population") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.9, 12);
    const auto reports = sweep_k(pop, 100, {0, 100, 1000}, 200, {Method::cv});
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].stats(Method::cv).theory_var > reports[1].stats(Method::cv).theory_var);
    CHECK(reports[1].stats(Method::cv).theory_var > reports[2].stats(Method::cv).theory_var);
    CHECK(reports[0].grid_value == 0.0);
    CHECK(reports[2].grid_value == 1000.0);
}

TEST_CASE("single-point sweep yields a singleton") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.5, 13);
    const auto reports = sweep_k(pop, 20, {40}, 100, {Method::mc});
    CHECK(reports.size() == 1);
}

TEST_CASE("trial CSV has the documented columns") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.5, 14);
    const auto reports = sweep_k(pop, 20, {0, 40}, 100, {Method::mc, Method::cv});
    std::ostringstream out;
    write_trial_csv(out, reports);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "grid_value,method,emp_var,theory_var,rel_err,M");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4); // 2 grid points x 2 methods
}

TEST_CASE("matched-interval planning holds empirically") {
    // running CV with ceil(n_min) paired samples reproduces the MC variance at n_r
    const std::size_t n_r = 200, k = 400;
    const double rho = 0.8;
    GaussianPopulation pop(0.0, 1.0, 1, rho, 15);
    const auto n_min = static_cast<std::size_t>(
        std::ceil(min_paired_samples(n_r, k, rho * rho)));
    REQUIRE(n_min < n_r);

    const auto cv_run = run_trials(pop, n_min, k, 6000, {Method::cv});
    const auto mc_run = run_trials(pop, n_r, 0, 6000, {Method::mc});
    const double ratio =
        cv_run.stats(Method::cv).emp_var / mc_run.stats(Method::mc).emp_var;
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("conclusions are stable across master seeds") {
    for (const std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        for (const double rho : {0.0, 0.9}) {
            GaussianPopulation pop(0.0, 1.0, 1, rho, seed);
            for (const std::size_t k : {std::size_t{0}, std::size_t{900}}) {
                const auto report = run_trials(pop, 100, k, 10000, {Method::cv});
                const auto& cv = report.stats(Method::cv);
                CHECK(cv.rel_err < 0.06);
                CHECK(cv.ci_coverage >= 0.9);
            }
        }
    }
}

TEST_CASE("single draw at n=100, k=1000 lands within 20% of the closed form") {
    GaussianPopulation pop(0.0, 1.0, 1, 0.9, 314159);
    auto [paired, pool] = sample_population(pop, 100, 1000, 2);
    const auto report = run_cv_pipeline(paired, pool, CiSpec::from_delta(0.1));
    const double theory = cv_variance_theoretical(1.0, 0.81, 100, 1000);
    CHECK(report.var_hat == doctest::Approx(theory).epsilon(0.20));
}

TEST_CASE("fit-fraction sweep: some interior point beats direct CV") {
    NonlinearPopulation pop(1, 0.1, 0.3, 29);
    McfConfig config;
    config.hidden_layers = {8, 8};
    config.max_epochs = 250;
    config.learning_rate = 0.05;
    const auto reports =
        sweep_fit_fraction(pop, 120, 360, {0.0, 0.25, 0.5}, 300, config);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].methods.size() == 2); // nothing to train on at fraction 0
    bool interior_win = false;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double cv = reports[i].stats(Method::cv).emp_var;
        const double mcf = reports[i].stats(Method::cv_mcf).emp_var;
        if (mcf < cv) interior_win = true;
    }
    CHECK(interior_win);
}

TEST_CASE("cv_mcf trials recover the nonlinear signal") {
    NonlinearPopulation pop(1, 0.1, 0.3, 23);
    McfConfig config;
    config.hidden_layers = {8, 8};
    config.max_epochs = 250;
    config.learning_rate = 0.05;
    config.early_stop_patience = 50;
    const auto report = run_trials(pop, 120, 360, 200, {Method::cv, Method::cv_mcf},
                                   TrialMcfOptions{40, config});
    const auto& cv = report.stats(Method::cv);
    const auto& mcf = report.stats(Method::cv_mcf);
    CHECK(mcf.mean_rho_sq > 0.5);          // learned correlation
    CHECK(cv.mean_rho_sq < 0.1);           // raw correlation is tiny
    CHECK(mcf.emp_var < cv.emp_var);       // net variance reduction
}
