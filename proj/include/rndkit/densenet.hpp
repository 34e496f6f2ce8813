#pragma once

#include <cstdint>
#include <vector>

#include "rndkit/matrix.hpp"
#include "rndkit/rng.hpp"

namespace rndkit {

enum class HiddenAct : uint8_t { ReLU = 0, LeakyReLU = 1 };
enum class OutputAct : uint8_t { Identity = 0, Sigmoid = 1 };
enum class InitScheme : uint8_t { ScaledUniform = 0, Orthogonal = 1 };

constexpr double kLeakySlope = 0.01;

/// Fully connected feed-forward network with explicit parameters.
/// Weight matrix of layer l has shape (layer_sizes[l+1], layer_sizes[l]);
/// activations between layers use hidden_act, the last layer uses output_act.
/// A net constructed with trainable=false is frozen: optimizer steps on it
/// are rejected and its serialization never changes.
struct DenseNet {
    std::vector<int> layer_sizes;
    HiddenAct hidden_act = HiddenAct::ReLU;
    OutputAct output_act = OutputAct::Identity;
    bool trainable = true;

    std::vector<Mat> weights;  // one per layer transition
    std::vector<Vec> biases;

    InitScheme init_scheme = InitScheme::ScaledUniform;
    uint64_t init_seed = 0;

    // Bumped on every parameter mutation; lets backward detect stale caches.
    uint64_t version = 0;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    size_t num_params() const;
};

DenseNet init_dense_net(const std::vector<int>& layer_sizes, InitScheme scheme, uint64_t seed,
                        HiddenAct hidden_act = HiddenAct::ReLU,
                        OutputAct output_act = OutputAct::Identity, bool trainable = true);

struct ForwardCache {
    const DenseNet* net = nullptr;
    uint64_t version = 0;
    std::vector<Mat> pre;   // pre-activations z_l, one per layer
    std::vector<Mat> post;  // post-activations; post[0] is the input batch
};

/// Batch forward pass; rows of X are input vectors. Pure: no state mutation.
Mat forward(const DenseNet& net, const Mat& X, ForwardCache* cache = nullptr);

struct Gradients {
    std::vector<Mat> dW;
    std::vector<Vec> db;
    Mat dX;
};

/// Exact gradients of a scalar loss wrt all parameters and the input batch,
/// given dY = dLoss/dY from the matching forward call.
Gradients backward(const DenseNet& net, const ForwardCache& cache, const Mat& dY);

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::vector<Mat> m_w, v_w;
    std::vector<Vec> m_b, v_b;
};

AdamState init_adam(const DenseNet& net, double learning_rate, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

/// One bias-corrected Adam update. Rejects frozen nets.
void adam_step(AdamState& state, DenseNet& net, const Gradients& grads);

std::vector<uint8_t> serialize_densenet(const DenseNet& net);
DenseNet deserialize_densenet(const std::vector<uint8_t>& data);

class BinWriter;
class BinReader;
void write_densenet(BinWriter& w, const DenseNet& net);
DenseNet read_densenet(BinReader& r);
void write_adam(BinWriter& w, const AdamState& s);
AdamState read_adam(BinReader& r);

}  // namespace rndkit
