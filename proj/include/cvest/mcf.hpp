#pragma once

#include "cvest/dataset.hpp"
#include "cvest/estimator.hpp"
#include "cvest/mlp.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cvest {

enum class McfKind { ols, mlp };

enum class SplitStrategy { shuffled, prefix };

struct SplitSpec {
    std::size_t n_fit = 0;
    std::uint64_t seed = 0;
    SplitStrategy strategy = SplitStrategy::shuffled;
};

struct McfConfig {
    McfKind model = McfKind::mlp;
    std::vector<std::size_t> hidden_layers = {32, 32};
    OutputActivation output_activation = OutputActivation::identity;
    LossKind loss = LossKind::mse;
    double learning_rate = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t early_stop_patience = 50;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
    // bce + logistic output for binary metrics, mse + identity otherwise
    static McfConfig for_metric(MetricKind kind);
};

// Trained metric correlator: maps (g, phi) to a prediction of f. Predictions
// are deterministic in (parameters, input).
struct McfModel {
    McfKind kind = McfKind::ols;
    std::size_t input_dim = 0; // d + m
    std::vector<std::size_t> hidden;
    OutputActivation output_activation = OutputActivation::identity;
    std::vector<double> standardize_mean;
    std::vector<double> standardize_scale;
    std::vector<double> params; // ols: [w_1..w_D, intercept]; mlp: layer weights+biases
};

struct TrainingLog {
    std::vector<double> train_loss; // one entry per epoch (post-update)
    std::vector<double> val_loss;   // validation loss; equals train loss when no holdout
    double initial_val_loss = 0.0;  // before the first update
    std::size_t best_epoch = 0;     // 0 = initial parameters
    double best_val_loss = 0.0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
};

// Deterministic disjoint split covering the input: |fit| = n_fit.
// Both partitions preserve the input row order.
std::pair<PairedDataset, PairedDataset> split_paired(const PairedDataset& paired,
                                                     const SplitSpec& spec);

// Least-squares fit of f on [g, phi, 1]. Needs n >= d + m + 1 rows.
McfModel fit_ols(const PairedDataset& fit);

// Full-batch gradient descent with early stopping on a held-out validation
// fraction; returns the best checkpoint seen. Never fails on non-convergence.
McfModel fit_mlp(const PairedDataset& fit, const McfConfig& config,
                 TrainingLog* log = nullptr);

double predict(const McfModel& model, const std::vector<double>& g,
               const std::vector<double>& phi);

// Net-variance-reduction test for spending paired samples on MCF training:
// rho_sq_mcf / (1 + n_est/k) > rho_sq_raw / (1 + n/k). False when k = 0.
bool mcf_worthwhile(double rho_sq_mcf, double rho_sq_raw, std::size_t n_est, std::size_t n,
                    std::size_t k);

// Replace the surrogate vector by the scalar model prediction (d -> 1,
// features consumed).
PairedDataset transform_paired(const McfModel& model, const PairedDataset& ds);
SurrogateDataset transform_surrogate(const McfModel& model, const SurrogateDataset& ds);

// Split, train on fit (plus optional out-of-domain pairs), map everything
// through the model, then run the control-variates pipeline on the est
// partition. extra_fit rows never reduce n_est.
EstimateReport run_cv_mcf_pipeline(const PairedDataset& paired,
                                   const SurrogateDataset& surrogate, const SplitSpec& split,
                                   const McfConfig& config, const CiSpec& ci,
                                   const PairedDataset* extra_fit = nullptr,
                                   McfModel* trained = nullptr);

// Same but with a model trained elsewhere (e.g. purely out-of-domain); all n
// pairs are used for estimation.
EstimateReport apply_mcf_pipeline(const PairedDataset& paired,
                                  const SurrogateDataset& surrogate, const McfModel& model,
                                  const CiSpec& ci);

std::string model_to_json(const McfModel& model);
void save_model(const McfModel& model, const std::string& path);
McfModel load_model(const std::string& path);

} // namespace cvest
