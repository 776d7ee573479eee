#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsac/matrix.hpp"
#include "bsac/nn.hpp"
#include "bsac/rng.hpp"

namespace bsac {

/// Training recipe for one supervised autoencoder. `layer_sizes` is the full
/// symmetric stack, e.g. {32, 16, 8, 5, 8, 16, 32}: first entry is the input
/// width, the middle entry the bottleneck.
struct SAConfig {
    std::vector<std::size_t> layer_sizes;
    double gamma = 0.5;
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    std::size_t input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
    std::size_t bottleneck_dim() const {
        return layer_sizes.empty() ? 0 : layer_sizes[layer_sizes.size() / 2];
    }

    void validate() const {
        if (layer_sizes.size() < 3 || layer_sizes.size() % 2 == 0) {
            throw std::invalid_argument("SAConfig: layer_sizes must have odd length >= 3");
        }
        for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
            if (layer_sizes[i] == 0) {
                throw std::invalid_argument("SAConfig: zero-width layer");
            }
            if (layer_sizes[i] != layer_sizes[layer_sizes.size() - 1 - i]) {
                throw std::invalid_argument("SAConfig: layer_sizes must be palindromic");
            }
        }
        if (gamma < 0.0 || gamma > 1.0) {
            throw std::invalid_argument("SAConfig: gamma must be in [0,1]");
        }
        if (epochs < 1) {
            throw std::invalid_argument("SAConfig: epochs must be >= 1");
        }
        if (batch_size < 1) {
            throw std::invalid_argument("SAConfig: batch_size must be >= 1");
        }
        if (learning_rate <= 0.0) {
            throw std::invalid_argument("SAConfig: learning_rate must be positive");
        }
    }
};

struct EpochLosses {
    double total = 0.0;
    double reconstruction = 0.0;
    double prediction = 0.0;
};

/// Trained supervised autoencoder: encoder to the bottleneck, mirrored decoder,
/// and a single sigmoid classification unit on the bottleneck.
struct SAModel {
    Network encoder;
    Network decoder;
    Network classifier_head;  // one layer, bottleneck -> 1, sigmoid
    double gamma = 0.5;
    std::vector<EpochLosses> training_history;
    std::vector<std::string> warnings;

    std::size_t input_dim() const { return encoder.empty() ? 0 : encoder.front().fan_in(); }
    std::size_t bottleneck_dim() const { return encoder.empty() ? 0 : encoder.back().fan_out(); }
};

// Stream tags for the two independent generator streams a training run uses.
// Kept public so a reference training loop can reproduce the exact batch order.
inline constexpr std::uint64_t kSaInitStream = 0x5A01;
inline constexpr std::uint64_t kSaShuffleStream = 0x5A02;

inline Rng sa_init_rng(std::uint64_t seed) { return Rng(derive_stream(seed, kSaInitStream)); }
inline Rng sa_shuffle_rng(std::uint64_t seed) { return Rng(derive_stream(seed, kSaShuffleStream)); }

/// Builds the untrained model: relu hidden layers, sigmoid decoder output
/// (features live in [0,1]), sigmoid head. Weight init order is encoder,
/// decoder, head, using the init stream of `config.seed`.
inline SAModel sa_init(const SAConfig& config) {
    config.validate();
    SAModel model;
    model.gamma = config.gamma;

    const std::size_t half = config.layer_sizes.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
        model.encoder.push_back(
            make_layer(config.layer_sizes[i], config.layer_sizes[i + 1], Activation::Relu));
    }
    for (std::size_t i = half; i + 1 < config.layer_sizes.size(); ++i) {
        const bool last = i + 2 == config.layer_sizes.size();
        model.decoder.push_back(make_layer(config.layer_sizes[i], config.layer_sizes[i + 1],
                                           last ? Activation::Sigmoid : Activation::Relu));
    }
    model.classifier_head.push_back(make_layer(config.bottleneck_dim(), 1, Activation::Sigmoid));

    Rng rng = sa_init_rng(config.seed);
    for (DenseLayer& layer : model.encoder) init_layer(layer, rng);
    for (DenseLayer& layer : model.decoder) init_layer(layer, rng);
    init_layer(model.classifier_head.front(), rng);
    return model;
}

struct SAForward {
    Matrix reconstruction;
    Vector probabilities;
};

/// Reconstruction and class probabilities from the shared bottleneck.
inline SAForward sa_forward(const SAModel& model, const Matrix& batch) {
    const Matrix bottleneck = predict(model.encoder, batch);
    SAForward out;
    out.reconstruction = predict(model.decoder, bottleneck);
    out.probabilities = predict(model.classifier_head, bottleneck).values();
    return out;
}

struct SALoss {
    double total = 0.0;
    double reconstruction = 0.0;
    double prediction = 0.0;
};

/// Composite loss: total = gamma * L_r + (1 - gamma) * L_p.
inline SALoss sa_loss(const Matrix& reconstruction, const Matrix& input,
                      const Vector& probabilities, const Vector& labels, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("sa_loss: gamma must be in [0,1]");
    }
    SALoss loss;
    loss.reconstruction = mse_loss(reconstruction, input);
    loss.prediction = bce_loss(probabilities, labels);
    loss.total = gamma * loss.reconstruction + (1.0 - gamma) * loss.prediction;
    return loss;
}

namespace detail {

struct SABatchGrads {
    Gradients encoder, decoder, head;
};

/// Forward + composite backward on one batch. Returns the batch losses.
inline SALoss sa_batch_gradients(const SAModel& model, const Matrix& x, const Vector& y,
                                 double gamma, SABatchGrads& grads) {
    const ForwardTrace enc_trace = forward(model.encoder, x);
    const Matrix& bottleneck = enc_trace.output();
    const ForwardTrace dec_trace = forward(model.decoder, bottleneck);
    const ForwardTrace head_trace = forward(model.classifier_head, bottleneck);
    const Vector& probs = head_trace.output().values();

    SALoss loss = sa_loss(dec_trace.output(), x, probs, y, gamma);

    Matrix recon_seed = mse_gradient(dec_trace.output(), x);
    for (double& v : recon_seed.values()) v *= gamma;
    BackwardResult dec = backward(model.decoder, dec_trace, recon_seed);

    Matrix head_seed = bce_preactivation_gradient(probs, y);
    for (double& v : head_seed.values()) v *= 1.0 - gamma;
    BackwardResult head = backward(model.classifier_head, head_trace, head_seed,
                                   GradSeed::Preactivation);

    // Bottleneck gradient is the sum of both task paths.
    Matrix bottleneck_grad = dec.input_gradient;
    for (std::size_t i = 0; i < bottleneck_grad.size(); ++i) {
        bottleneck_grad.values()[i] += head.input_gradient.values()[i];
    }
    BackwardResult enc = backward(model.encoder, enc_trace, bottleneck_grad);

    grads.encoder = std::move(enc.grads);
    grads.decoder = std::move(dec.grads);
    grads.head = std::move(head.grads);
    return loss;
}

}  // namespace detail

/// Trains for exactly config.epochs epochs on the gamma-weighted composite
/// loss, both heads updated simultaneously. Deterministic for a fixed seed.
inline SAModel sa_train(const SAConfig& config, const Matrix& features, const Vector& labels) {
    config.validate();
    if (features.rows() == 0) {
        throw std::invalid_argument("sa_train: empty dataset");
    }
    if (features.cols() != config.input_dim()) {
        throw std::invalid_argument("sa_train: feature width " + std::to_string(features.cols()) +
                                    " does not match layer_sizes front " +
                                    std::to_string(config.input_dim()));
    }
    if (labels.size() != features.rows()) {
        throw std::invalid_argument("sa_train: label count mismatch");
    }
    require_binary_labels(labels, "sa_train");

    SAModel model = sa_init(config);

    bool has_pos = false, has_neg = false;
    for (double y : labels) (y == 1.0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        model.warnings.push_back(
            "training labels contain a single class; classifier head is degenerate");
    }

    const AdamConfig adam{config.learning_rate};
    OptimizerState enc_state = OptimizerState::for_network(model.encoder, adam);
    OptimizerState dec_state = OptimizerState::for_network(model.decoder, adam);
    OptimizerState head_state = OptimizerState::for_network(model.classifier_head, adam);

    Rng shuffle_rng = sa_shuffle_rng(config.seed);
    const std::size_t n = features.rows();
    const std::size_t batch = std::min(config.batch_size, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    detail::SABatchGrads grads;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        EpochLosses epoch_losses;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            const std::span<const std::size_t> chunk(order.data() + start, count);
            const Matrix x = gather_rows(features, chunk);
            const Vector y = gather(labels, chunk);

            const SALoss loss = detail::sa_batch_gradients(model, x, y, config.gamma, grads);
            if (!std::isfinite(loss.total)) {
                throw std::runtime_error("sa_train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1));
            }
            adam_step(model.encoder, grads.encoder, enc_state);
            adam_step(model.decoder, grads.decoder, dec_state);
            adam_step(model.classifier_head, grads.head, head_state);

            const double w = static_cast<double>(count) / static_cast<double>(n);
            epoch_losses.total += w * loss.total;
            epoch_losses.reconstruction += w * loss.reconstruction;
            epoch_losses.prediction += w * loss.prediction;
        }
        model.training_history.push_back(epoch_losses);
    }
    return model;
}

struct SAPrediction {
    Vector probabilities;
    Vector labels;  // 1 where probability >= 0.5
};

inline SAPrediction sa_predict(const SAModel& model, const Matrix& features) {
    SAPrediction pred;
    pred.probabilities = predict(model.classifier_head, predict(model.encoder, features)).values();
    pred.labels.resize(pred.probabilities.size());
    for (std::size_t i = 0; i < pred.probabilities.size(); ++i) {
        pred.labels[i] = pred.probabilities[i] >= 0.5 ? 1.0 : 0.0;
    }
    return pred;
}

/// Bottleneck representation of `features`.
inline Matrix encode(const SAModel& model, const Matrix& features) {
    return predict(model.encoder, features);
}

/// Finite-difference check of the composite-loss gradients across all three
/// stacks. Returns the worst relative error.
inline double sa_gradcheck(SAModel& model, const Matrix& x, const Vector& y, double gamma,
                           double h) {
    detail::SABatchGrads analytic;
    detail::sa_batch_gradients(model, x, y, gamma, analytic);

    std::vector<double*> params;
    std::vector<double> grads;
    auto collect = [&](Network& net, const Gradients& g) {
        for (std::size_t li = 0; li < net.size(); ++li) {
            for (double& w : net[li].weights.values()) params.push_back(&w);
            grads.insert(grads.end(), g.weights[li].values().begin(),
                         g.weights[li].values().end());
            for (double& b : net[li].bias) params.push_back(&b);
            grads.insert(grads.end(), g.biases[li].begin(), g.biases[li].end());
        }
    };
    collect(model.encoder, analytic.encoder);
    collect(model.decoder, analytic.decoder);
    collect(model.classifier_head, analytic.head);

    return detail::max_central_difference_error(std::move(params), grads, h, [&] {
        const SAForward out = sa_forward(model, x);
        return sa_loss(out.reconstruction, x, out.probabilities, y, gamma).total;
    });
}

}  // namespace bsac
