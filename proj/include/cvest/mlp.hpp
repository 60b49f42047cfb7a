#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cvest {

enum class OutputActivation { identity, logistic };
enum class LossKind { mse, bce };

// Fully-connected scalar-output network: rectifier hidden layers, identity or
// logistic output. Parameters live in one flat vector, per layer weights
// (row-major, out x in) followed by biases.
struct MlpShape {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    OutputActivation output = OutputActivation::identity;

    std::vector<std::size_t> layer_sizes() const;
    std::size_t param_count() const;
};

// Glorot-uniform weights, zero biases; deterministic in the seed.
std::vector<double> mlp_init_params(const MlpShape& shape, std::uint64_t seed);

double mlp_forward(const MlpShape& shape, const std::vector<double>& params,
                   const std::vector<double>& input);

// Mean loss over the batch. bce requires the logistic output and is evaluated
// through the stable softplus form.
double mlp_batch_loss(const MlpShape& shape, const std::vector<double>& params,
                      const std::vector<std::vector<double>>& inputs,
                      const std::vector<double>& targets, LossKind loss);

// Same value as mlp_batch_loss, plus the analytic gradient with respect to
// every parameter (accumulated over the batch).
double mlp_batch_loss_grad(const MlpShape& shape, const std::vector<double>& params,
                           const std::vector<std::vector<double>>& inputs,
                           const std::vector<double>& targets, LossKind loss,
                           std::vector<double>& grad);

} // namespace cvest
