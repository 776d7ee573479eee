#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bsac/matrix.hpp"
#include "bsac/rng.hpp"

namespace bsac {

enum class Activation { Linear, Relu, Sigmoid };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double apply_activation(Activation act, double z) {
    switch (act) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid: return sigmoid(z);
        case Activation::Linear: return z;
    }
    return z;
}

/// Derivative of the activation w.r.t. its pre-activation, given both values.
inline double activation_derivative(Activation act, double z, double a) {
    switch (act) {
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

/// Fully connected layer: output = activation(input * weights + bias).
struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    Vector bias;     // fan_out
    Activation activation = Activation::Linear;

    std::size_t fan_in() const { return weights.rows(); }
    std::size_t fan_out() const { return weights.cols(); }
};

inline DenseLayer make_layer(std::size_t fan_in, std::size_t fan_out, Activation act) {
    return DenseLayer{Matrix(fan_in, fan_out), Vector(fan_out, 0.0), act};
}

/// Glorot-uniform weight matrix: entries ~ U[-L, L], L = sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) {
        throw std::invalid_argument("glorot_init: fan_in and fan_out must be >= 1");
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& v : m.values()) {
        v = rng.uniform(-limit, limit);
    }
    return m;
}

inline void init_layer(DenseLayer& layer, Rng& rng) {
    layer.weights = glorot_init(layer.fan_in(), layer.fan_out(), rng);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

inline Matrix linear_output(const DenseLayer& layer, const Matrix& input) {
    if (input.cols() != layer.fan_in()) {
        throw std::invalid_argument("dense_forward: input has " + std::to_string(input.cols()) +
                                    " columns, layer expects " + std::to_string(layer.fan_in()));
    }
    Matrix z = matmul(input, layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double* row = z.data() + r * z.cols();
        for (std::size_t c = 0; c < z.cols(); ++c) {
            row[c] += layer.bias[c];
        }
    }
    return z;
}

inline Matrix activate(Activation act, const Matrix& z) {
    Matrix a = z;
    for (double& v : a.values()) {
        v = apply_activation(act, v);
    }
    return a;
}

/// Inference-only forward through one layer; does not cache, safe on shared models.
inline Matrix dense_forward(const DenseLayer& layer, const Matrix& input) {
    return activate(layer.activation, linear_output(layer, input));
}

using Network = std::vector<DenseLayer>;

/// Per-layer intermediates cached by a training forward pass; required by backward().
struct ForwardTrace {
    std::vector<Matrix> inputs;       // input to layer i
    std::vector<Matrix> preacts;      // z of layer i
    std::vector<Matrix> activations;  // a of layer i

    const Matrix& output() const { return activations.back(); }
    bool matches(const Network& net) const { return inputs.size() == net.size() && !net.empty(); }
};

inline ForwardTrace forward(const Network& net, const Matrix& input) {
    ForwardTrace trace;
    trace.inputs.reserve(net.size());
    trace.preacts.reserve(net.size());
    trace.activations.reserve(net.size());
    const Matrix* current = &input;
    for (const DenseLayer& layer : net) {
        trace.inputs.push_back(*current);
        trace.preacts.push_back(linear_output(layer, *current));
        trace.activations.push_back(activate(layer.activation, trace.preacts.back()));
        current = &trace.activations.back();
    }
    return trace;
}

inline Matrix predict(const Network& net, const Matrix& input) {
    Matrix out = input;
    for (const DenseLayer& layer : net) {
        out = dense_forward(layer, out);
    }
    return out;
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Whether a gradient seed is w.r.t. the last layer's activations or its
/// pre-activations (the latter is used for the fused sigmoid + cross-entropy path).
enum class GradSeed { Activation, Preactivation };

struct BackwardResult {
    Gradients grads;
    Matrix input_gradient;  // dLoss/d(input of first layer)
};

/// Backpropagates `output_gradient` through the stack; returns parameter
/// gradients and the gradient at the network input. Does not mutate parameters.
inline BackwardResult backward(const Network& net, const ForwardTrace& trace,
                               const Matrix& output_gradient,
                               GradSeed seed = GradSeed::Activation) {
    if (!trace.matches(net)) {
        throw std::logic_error("backward: no cached forward state for this network");
    }
    BackwardResult result;
    result.grads.weights.resize(net.size());
    result.grads.biases.resize(net.size());

    Matrix delta;  // dLoss/dz of current layer
    for (std::size_t li = net.size(); li-- > 0;) {
        const DenseLayer& layer = net[li];
        const Matrix& z = trace.preacts[li];
        const Matrix& a = trace.activations[li];

        if (li == net.size() - 1) {
            require_same_shape(output_gradient, a, "backward");
            delta = output_gradient;
            if (seed == GradSeed::Activation) {
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    delta.values()[i] *=
                        activation_derivative(layer.activation, z.values()[i], a.values()[i]);
                }
            }
        } else {
            // delta currently holds dLoss/da of this layer (propagated below)
            for (std::size_t i = 0; i < delta.size(); ++i) {
                delta.values()[i] *=
                    activation_derivative(layer.activation, z.values()[i], a.values()[i]);
            }
        }

        result.grads.weights[li] = matmul(transpose(trace.inputs[li]), delta);
        Vector& db = result.grads.biases[li];
        db.assign(layer.fan_out(), 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            for (std::size_t c = 0; c < delta.cols(); ++c) {
                db[c] += delta(r, c);
            }
        }
        delta = matmul(delta, transpose(layer.weights));  // dLoss/da of previous layer
    }
    result.input_gradient = std::move(delta);
    return result;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean of squared differences over all elements.
inline double mse_loss(const Matrix& reconstruction, const Matrix& target) {
    require_same_shape(reconstruction, target, "mse_loss");
    if (reconstruction.size() == 0) {
        throw std::invalid_argument("mse_loss: empty input");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < reconstruction.size(); ++i) {
        const double d = reconstruction.values()[i] - target.values()[i];
        sum += d * d;
    }
    return sum / static_cast<double>(reconstruction.size());
}

/// d(mse_loss)/d(reconstruction), activation space.
inline Matrix mse_gradient(const Matrix& reconstruction, const Matrix& target) {
    require_same_shape(reconstruction, target, "mse_gradient");
    Matrix g = reconstruction;
    const double scale = 2.0 / static_cast<double>(reconstruction.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.values()[i] = scale * (reconstruction.values()[i] - target.values()[i]);
    }
    return g;
}

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before the logs so
// the loss stays finite for saturated outputs.
inline constexpr double kProbClamp = 1e-7;

inline double clamp_probability(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

inline void require_binary_labels(const Vector& labels, const char* what) {
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) {
            throw std::invalid_argument(std::string(what) + ": label outside {0,1}");
        }
    }
}

/// Binary cross entropy, mean over samples.
inline double bce_loss(const Vector& probabilities, const Vector& labels) {
    if (probabilities.size() != labels.size()) {
        throw std::invalid_argument("bce_loss: length mismatch");
    }
    if (probabilities.empty()) {
        throw std::invalid_argument("bce_loss: empty input");
    }
    require_binary_labels(labels, "bce_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = clamp_probability(probabilities[i]);
        sum += labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(probabilities.size());
}

/// d(bce_loss)/dz for a sigmoid output layer: (p - y) / N, numerically exact
/// and stable. Seed this with GradSeed::Preactivation.
inline Matrix bce_preactivation_gradient(const Vector& probabilities, const Vector& labels) {
    Matrix g(probabilities.size(), 1);
    const double scale = 1.0 / static_cast<double>(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        g(i, 0) = scale * (probabilities[i] - labels[i]);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter first/second moment estimates for one layer stack.
struct OptimizerState {
    AdamConfig config;
    std::vector<Matrix> weight_m, weight_v;
    std::vector<Vector> bias_m, bias_v;
    long step_count = 0;

    static OptimizerState for_network(const Network& net, AdamConfig cfg = {}) {
        OptimizerState state;
        state.config = cfg;
        for (const DenseLayer& layer : net) {
            state.weight_m.emplace_back(layer.fan_in(), layer.fan_out());
            state.weight_v.emplace_back(layer.fan_in(), layer.fan_out());
            state.bias_m.emplace_back(layer.fan_out(), 0.0);
            state.bias_v.emplace_back(layer.fan_out(), 0.0);
        }
        return state;
    }
};

namespace detail {

inline void adam_update(std::span<double> params, std::span<const double> grads,
                        std::span<double> m, std::span<double> v, const AdamConfig& cfg,
                        double bias1, double bias2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace detail

/// One Adam step with bias correction over every parameter of the stack.
inline void adam_step(Network& net, const Gradients& grads, OptimizerState& state) {
    if (grads.weights.size() != net.size() || state.weight_m.size() != net.size()) {
        throw std::invalid_argument("adam_step: gradient/state layer count mismatch");
    }
    ++state.step_count;
    const double bias1 = 1.0 - std::pow(state.config.beta1, state.step_count);
    const double bias2 = 1.0 - std::pow(state.config.beta2, state.step_count);
    for (std::size_t li = 0; li < net.size(); ++li) {
        if (!net[li].weights.same_shape(grads.weights[li])) {
            throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                        std::to_string(li));
        }
        detail::adam_update(net[li].weights.values(), grads.weights[li].values(),
                            state.weight_m[li].values(), state.weight_v[li].values(),
                            state.config, bias1, bias2);
        detail::adam_update(net[li].bias, grads.biases[li], state.bias_m[li], state.bias_v[li],
                            state.config, bias1, bias2);
    }
}

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle
// ---------------------------------------------------------------------------

struct LossSpec {
    enum class Kind { MeanSquaredError, BinaryCrossEntropy } kind;
    Matrix target;  // MeanSquaredError: same shape as network output
    Vector labels;  // BinaryCrossEntropy: network output must be [n x 1]
};

inline double network_loss(const Network& net, const Matrix& input, const LossSpec& spec) {
    const Matrix out = predict(net, input);
    if (spec.kind == LossSpec::Kind::MeanSquaredError) {
        return mse_loss(out, spec.target);
    }
    if (out.cols() != 1) {
        throw std::invalid_argument("network_loss: cross-entropy needs a single output column");
    }
    return bce_loss(out.values(), spec.labels);
}

/// Analytic gradients along the same path the trainers use (fused seed for a
/// sigmoid output under cross entropy).
inline Gradients network_gradients(const Network& net, const Matrix& input, const LossSpec& spec) {
    const ForwardTrace trace = forward(net, input);
    if (spec.kind == LossSpec::Kind::MeanSquaredError) {
        return backward(net, trace, mse_gradient(trace.output(), spec.target)).grads;
    }
    const Matrix& out = trace.output();
    if (out.cols() != 1) {
        throw std::invalid_argument("network_gradients: cross-entropy needs a single output column");
    }
    if (net.back().activation == Activation::Sigmoid) {
        return backward(net, trace, bce_preactivation_gradient(out.values(), spec.labels),
                        GradSeed::Preactivation)
            .grads;
    }
    // Generic activation-space fallback: derivative of the clamped loss, which
    // is flat wherever the raw output sits outside the clamp interval.
    Matrix g(out.rows(), 1);
    const double n = static_cast<double>(out.rows());
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const double p = out(i, 0);
        if (p <= kProbClamp || p >= 1.0 - kProbClamp) {
            g(i, 0) = 0.0;
        } else {
            g(i, 0) = (p - spec.labels[i]) / (p * (1.0 - p) * n);
        }
    }
    return backward(net, trace, g).grads;
}

inline double relative_gradient_error(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

namespace detail {

template <class LossFn>
double max_central_difference_error(std::vector<double*> params, const std::vector<double>& grads,
                                    double h, LossFn&& loss) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& p = *params[i];
        const double saved = p;
        p = saved + h;
        const double up = loss();
        p = saved - h;
        const double down = loss();
        p = saved;
        const double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, relative_gradient_error(grads[i], numeric));
    }
    return worst;
}

}  // namespace detail

/// Perturbs every parameter by +/-h and compares the central difference of the
/// loss to the analytic gradient. Returns the worst relative error.
inline double finite_diff_gradcheck(Network& net, const Matrix& batch, const LossSpec& spec,
                                    double h) {
    if (h <= 0.0) {
        throw std::invalid_argument("finite_diff_gradcheck: h must be positive");
    }
    if (batch.rows() == 0) {
        throw std::invalid_argument("finite_diff_gradcheck: empty batch");
    }
    const Gradients analytic = network_gradients(net, batch, spec);

    std::vector<double*> params;
    std::vector<double> grads;
    for (std::size_t li = 0; li < net.size(); ++li) {
        for (double& w : net[li].weights.values()) params.push_back(&w);
        grads.insert(grads.end(), analytic.weights[li].values().begin(),
                     analytic.weights[li].values().end());
        for (double& b : net[li].bias) params.push_back(&b);
        grads.insert(grads.end(), analytic.biases[li].begin(), analytic.biases[li].end());
    }
    return detail::max_central_difference_error(std::move(params), grads, h,
                                                [&] { return network_loss(net, batch, spec); });
}

}  // namespace bsac
