#include "cvest/mlp.hpp"

#include "cvest/errors.hpp"
#include "cvest/rng.hpp"

#include <cmath>

namespace cvest {

namespace {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// -(y log p + (1-y) log(1-p)) with p = logistic(z), evaluated from the logit
double bce_from_logit(double z, double y) {
    const double softplus_neg = z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    return softplus_neg + (1.0 - y) * z;
}

void check_loss_output(const MlpShape& shape, LossKind loss) {
    if (loss == LossKind::bce && shape.output != OutputActivation::logistic)
        throw Error(ErrorKind::invalid_argument, "bce loss requires the logistic output");
}

// Scratch buffers for one forward/backward pass.
struct Workspace {
    std::vector<std::vector<double>> activations; // a[0] = input, a[L] = output (pre-output-activation for the last)
    std::vector<std::vector<double>> deltas;
};

} // namespace

std::vector<std::size_t> MlpShape::layer_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.push_back(input_dim);
    for (std::size_t h : hidden) sizes.push_back(h);
    sizes.push_back(1);
    return sizes;
}

std::size_t MlpShape::param_count() const {
    const auto sizes = layer_sizes();
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        count += sizes[l + 1] * sizes[l] + sizes[l + 1];
    return count;
}

std::vector<double> mlp_init_params(const MlpShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    const auto sizes = shape.layer_sizes();
    std::vector<double> params;
    params.reserve(shape.param_count());
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        for (std::size_t i = 0; i < sizes[l + 1] * sizes[l]; ++i)
            params.push_back(rng.uniform(-limit, limit));
        for (std::size_t i = 0; i < sizes[l + 1]; ++i) params.push_back(0.0);
    }
    return params;
}

namespace {

// Runs the net on one input, filling per-layer activations. Returns the
// pre-activation of the output unit.
double forward_pass(const MlpShape& shape, const std::vector<double>& params,
                    const std::vector<double>& input, Workspace& ws) {
    const auto sizes = shape.layer_sizes();
    ws.activations.resize(sizes.size());
    ws.activations[0] = input;

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double* weights = params.data() + offset;
        const double* bias = weights + out * in;
        auto& next = ws.activations[l + 1];
        next.assign(out, 0.0);
        const auto& prev = ws.activations[l];
        for (std::size_t i = 0; i < out; ++i) {
            double z = bias[i];
            const double* row = weights + i * in;
            for (std::size_t j = 0; j < in; ++j) z += row[j] * prev[j];
            const bool is_output_layer = (l + 2 == sizes.size());
            next[i] = is_output_layer ? z : (z > 0.0 ? z : 0.0);
        }
        offset += out * in + out;
    }
    return ws.activations.back()[0];
}

} // namespace

double mlp_forward(const MlpShape& shape, const std::vector<double>& params,
                   const std::vector<double>& input) {
    if (input.size() != shape.input_dim)
        throw Error(ErrorKind::dimension_mismatch,
                    "mlp input has " + std::to_string(input.size()) + " entries, expected " +
                        std::to_string(shape.input_dim));
    if (params.size() != shape.param_count())
        throw Error(ErrorKind::dimension_mismatch, "parameter vector size mismatch");
    Workspace ws;
    const double z = forward_pass(shape, params, input, ws);
    return shape.output == OutputActivation::logistic ? logistic(z) : z;
}

double mlp_batch_loss(const MlpShape& shape, const std::vector<double>& params,
                      const std::vector<std::vector<double>>& inputs,
                      const std::vector<double>& targets, LossKind loss) {
    check_loss_output(shape, loss);
    if (inputs.size() != targets.size() || inputs.empty())
        throw Error(ErrorKind::invalid_argument, "batch inputs/targets mismatch or empty");
    Workspace ws;
    double total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double z = forward_pass(shape, params, inputs[i], ws);
        if (loss == LossKind::mse) {
            const double p = shape.output == OutputActivation::logistic ? logistic(z) : z;
            const double r = p - targets[i];
            total += r * r;
        } else {
            total += bce_from_logit(z, targets[i]);
        }
    }
    return total / static_cast<double>(inputs.size());
}

double mlp_batch_loss_grad(const MlpShape& shape, const std::vector<double>& params,
                           const std::vector<std::vector<double>>& inputs,
                           const std::vector<double>& targets, LossKind loss,
                           std::vector<double>& grad) {
    check_loss_output(shape, loss);
    if (inputs.size() != targets.size() || inputs.empty())
        throw Error(ErrorKind::invalid_argument, "batch inputs/targets mismatch or empty");
    if (params.size() != shape.param_count())
        throw Error(ErrorKind::dimension_mismatch, "parameter vector size mismatch");

    const auto sizes = shape.layer_sizes();
    grad.assign(params.size(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(inputs.size());

    Workspace ws;
    ws.deltas.resize(sizes.size());
    double total = 0.0;

    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const double z = forward_pass(shape, params, inputs[s], ws);
        const double y = targets[s];

        // dLoss/dz at the output unit
        double dz;
        if (loss == LossKind::mse) {
            const double p = shape.output == OutputActivation::logistic ? logistic(z) : z;
            total += (p - y) * (p - y);
            dz = 2.0 * (p - y) * inv_batch;
            if (shape.output == OutputActivation::logistic) dz *= p * (1.0 - p);
        } else {
            total += bce_from_logit(z, y);
            dz = (logistic(z) - y) * inv_batch;
        }

        ws.deltas.back().assign(1, dz);

        // walk layers backwards; offsets recomputed from the top each time
        std::size_t offsets_end = params.size();
        for (std::size_t l = sizes.size() - 1; l-- > 0;) {
            const std::size_t in = sizes[l];
            const std::size_t out = sizes[l + 1];
            const std::size_t offset = offsets_end - (out * in + out);
            const double* weights = params.data() + offset;
            double* gw = grad.data() + offset;
            double* gb = gw + out * in;
            const auto& delta = ws.deltas[l + 1];
            const auto& prev = ws.activations[l];

            for (std::size_t i = 0; i < out; ++i) {
                const double d = delta[i];
                double* grow = gw + i * in;
                for (std::size_t j = 0; j < in; ++j) grow[j] += d * prev[j];
                gb[i] += d;
            }
            if (l > 0) {
                auto& delta_prev = ws.deltas[l];
                delta_prev.assign(in, 0.0);
                for (std::size_t i = 0; i < out; ++i) {
                    const double d = delta[i];
                    const double* row = weights + i * in;
                    for (std::size_t j = 0; j < in; ++j) delta_prev[j] += d * row[j];
                }
                // rectifier derivative of the current layer's activations
                for (std::size_t j = 0; j < in; ++j)
                    if (ws.activations[l][j] <= 0.0) delta_prev[j] = 0.0;
            }
            offsets_end = offset;
        }
    }
    return total * inv_batch;
}

} // namespace cvest
