#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cartograf/features.hpp"
#include "cartograf/rng.hpp"

namespace cartograf::model {

/// Architecture of the classifier: five 1-D conv layers (same padding,
/// stride 1), each followed by batch normalization and ReLU, one dropout
/// after the stack, global max pooling, then three fully connected layers
/// ending in two logits. The six scalar features join the pooled vector
/// ahead of the first fully connected layer.
struct ModelConfig {
    std::vector<int> conv_channels = {32, 32, 64, 64, 64}; // exactly 5
    int kernel_size = 3;
    std::vector<int> fc_dims = {128, 64, 2}; // exactly 3, last must be 2
    double dropout_rate = 0.3;               // in [0,1)
    int input_dim = 16;                      // embedding dim
    int max_len = 64;
    int scalar_dim = features::kScalarDim;

    void validate() const; // throws std::invalid_argument
};

struct ConvLayer {
    int in_ch = 0, out_ch = 0, k = 0;
    std::vector<double> kernel; // out_ch x in_ch x k
    std::vector<double> bias;   // out_ch
    std::vector<double> bn_gain, bn_shift;     // learnable, out_ch
    std::vector<double> bn_mean, bn_var;       // running statistics, out_ch
};

struct FcLayer {
    int in = 0, out = 0;
    std::vector<double> w; // out x in
    std::vector<double> b; // out
};

/// Every learnable weight plus batch-norm running statistics.
struct ParameterSet {
    ModelConfig config;
    std::vector<ConvLayer> conv;
    std::vector<FcLayer> fc;
};

/// Gradients for the learnable subset of ParameterSet (running statistics
/// are not learned).
struct GradientSet {
    struct ConvGrad {
        std::vector<double> kernel, bias, bn_gain, bn_shift;
    };
    struct FcGrad {
        std::vector<double> w, b;
    };
    std::vector<ConvGrad> conv;
    std::vector<FcGrad> fc;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
    int epochs = 5;
    int batch_size = 32;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    uint64_t seed = 0;
    bool shuffle = true;

    void validate() const; // epochs >= 1, learning_rate > 0, batch_size >= 1
};

enum class Mode { train, eval };

/// Intermediates saved by a train-mode forward pass for the backward pass.
/// Also carries momentum-updated running statistics which train() commits
/// after the optimizer step (forward never mutates the ParameterSet).
struct ForwardTrace {
    int batch = 0;
    Mode mode = Mode::eval;
    std::vector<std::vector<double>> x;     // per layer: input, B*C_in*L
    std::vector<std::vector<double>> z;     // per layer: conv output pre-BN
    std::vector<std::vector<double>> xhat;  // per layer: normalized
    std::vector<std::vector<double>> mean, var, inv_std; // per layer, per channel
    std::vector<std::vector<double>> new_bn_mean, new_bn_var;
    std::vector<double> stack_out;   // post-ReLU output of conv 5, B*C5*L
    std::vector<double> dropout_mask; // B*C5*L, values 0 or 1/(1-p)
    std::vector<double> pooled;      // B*C5
    std::vector<int> pool_argmax;    // B*C5
    std::vector<double> fc_in;       // B*(C5+scalar_dim)
    std::vector<std::vector<double>> fc_pre;  // per fc layer: pre-activation
    std::vector<std::vector<double>> fc_post; // per fc layer: post-ReLU (last = logits)
    std::vector<double> logits;      // B*2
};

struct Metrics {
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::array<double, 2> precision{}, recall{}, f1{};
    std::array<std::array<long long, 2>, 2> confusion{}; // [gold][pred]
};

/// He-scaled kernels and weights, zero biases, batch-norm gain 1 / shift 0,
/// running mean 0 / variance 1. Deterministic per seed.
ParameterSet init_model(const ModelConfig& config, uint64_t seed);

/// Run the network over a batch. Train mode uses batch statistics for
/// batch norm and applies the dropout mask drawn from dropout_rng; eval
/// mode uses running statistics and no dropout. Logits land in
/// trace.logits (B x 2, row-major). Throws DivergenceError when a logit
/// comes out non-finite.
void forward(const ParameterSet& params,
             const std::vector<const features::FeaturizedExample*>& batch, Mode mode,
             Rng* dropout_rng, ForwardTrace& trace);

std::array<double, 2> softmax2(double l0, double l1);

/// -ln(probs[gold]) with the probability floored at 1e-12.
double cross_entropy(const std::array<double, 2>& probs, int gold);

/// Exact gradients of the mean batch cross-entropy loss with respect to
/// every learnable parameter. Reuses the dropout mask and batch statistics
/// stored in the trace.
GradientSet backward(const ParameterSet& params, const ForwardTrace& trace,
                     const std::vector<int>& gold);

struct OptimizerState {
    long long step = 0;
    GradientSet m, v; // first/second moments (adam); unused by sgd
};

OptimizerState make_optimizer_state(const ParameterSet& params);

void optimizer_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state,
                    const TrainConfig& config);

/// Called once at the end of each epoch with the current parameters.
using EpochRecorder = std::function<void(const ParameterSet&, int epoch)>;

struct TrainResult {
    ParameterSet params;
    std::vector<double> epoch_losses; // mean loss per epoch
};

/// Seeded-shuffle minibatch training. Deterministic end to end for a fixed
/// seed: fixed iteration and summation order, no parallel reductions.
/// Throws DivergenceError ("diverged at epoch E, batch B") on non-finite
/// loss.
TrainResult train(ParameterSet initial, const std::vector<features::FeaturizedExample>& trainset,
                  const TrainConfig& config, const EpochRecorder& recorder = nullptr);

/// Argmax predictions, eval mode; logit ties resolve to class 0.
std::vector<int> predict(const ParameterSet& params,
                         const std::vector<features::FeaturizedExample>& split);

/// Macro F1 with the zero convention: a class with zero precision+recall
/// contributes F1 0.
Metrics metrics_from_predictions(const std::vector<int>& predictions,
                                 const std::vector<int>& gold);

Metrics evaluate(const ParameterSet& params,
                 const std::vector<features::FeaturizedExample>& split);

// --- checkpoint io -------------------------------------------------------
// Little-endian binary: magic "CGCK", u32 version, config echo, u64 seed,
// then parameters in fixed order. Load/save round-trips bitwise.

void save_checkpoint(const std::string& path, const ParameterSet& params, uint64_t seed);
std::pair<ParameterSet, uint64_t> load_checkpoint(const std::string& path);

} // namespace cartograf::model
