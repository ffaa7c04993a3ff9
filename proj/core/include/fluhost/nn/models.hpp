#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluhost/matrix.hpp"
#include "fluhost/nn/ops.hpp"

namespace fluhost::nn {

enum class ModelKind { Mlp, Cnn, Transformer };
enum class InputKind { Features, Tokens };

std::string_view to_string(ModelKind k) noexcept;
ModelKind parse_model_kind(std::string_view s);

struct ModelSpec {
    ModelKind kind = ModelKind::Mlp;
    InputKind input = InputKind::Features;
    std::size_t num_classes = 0;

    // Features input.
    std::size_t input_dim = 0;
    // Tokens input.
    std::size_t vocab_size = 0;
    std::size_t max_len = 0;

    // MLP hidden widths, or the CNN dense head before the output layer.
    std::vector<std::size_t> hidden;
    // CNN convolution filter counts.
    std::vector<std::size_t> filters = {64, 32, 16};
    std::size_t kernel_size = 3;
    std::size_t pool_width = 2;

    // Embedding width (CNN over tokens, Transformer).
    std::size_t embed_dim = 32;
    std::size_t num_heads = 1;
    // Position-wise feed-forward width; 0 means 2 * embed_dim.
    std::size_t ff_dim = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    int epochs = 10;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // L2 penalty on weight matrices (the MLP `alpha`).
    double l2 = 0.0;

    void validate() const;
};

// A batch of model inputs: dense feature rows or left-padded token ids.
struct Inputs {
    InputKind kind = InputKind::Features;
    Matrix features;
    std::vector<int> ids;  // rows x seq_len
    std::size_t seq_len = 0;

    static Inputs from_features(Matrix m);
    static Inputs from_tokens(std::vector<int> ids, std::size_t seq_len);

    std::size_t rows() const noexcept;
    Inputs select(std::span<const std::size_t> idx) const;
};

struct NamedParam {
    std::string name;
    Var var;
    bool decay;  // subject to the L2 penalty
};

// Parameters plus forward pass for one ModelSpec.
class Network {
public:
    Network() = default;
    // Glorot-uniform weights, zero biases, N(0, 0.05) embeddings.
    Network(ModelSpec spec, std::uint64_t seed);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::vector<NamedParam>& params() noexcept { return params_; }
    const std::vector<NamedParam>& params() const noexcept { return params_; }

    // (rows, num_classes) logits.
    Var logits(const Inputs& in) const;

    // Row-stochastic class probabilities, computed in chunks without gradients.
    Matrix predict_proba(const Inputs& in) const;

private:
    const Var& param(std::size_t i) const { return params_[i].var; }
    Var add_param(std::string name, Tensor init, bool decay);
    Var mlp_logits(const Inputs& in) const;
    Var cnn_logits(const Inputs& in) const;
    Var transformer_logits(const Inputs& in) const;

    ModelSpec spec_;
    std::vector<NamedParam> params_;
};

struct FittedModel {
    Network network;
    std::vector<double> history;  // mean training loss per epoch

    const ModelSpec& spec() const noexcept { return network.spec(); }
};

// Mini-batch training with deterministic shuffling. Throws DivergedTraining
// naming the epoch if the loss becomes non-finite.
FittedModel train(const ModelSpec& spec, const Inputs& data, std::span<const int> labels, const TrainConfig& cfg);

Matrix predict_proba(const FittedModel& model, const Inputs& data);

// Token embedding + positional embedding -> encoder block -> mean pool ->
// dense -> softmax. The network must be a Transformer.
Matrix transformer_encoder_forward(const Network& net, const Inputs& tokens);

std::string history_csv(std::span<const double> history);

}  // namespace fluhost::nn
