#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "fluhost/nn/models.hpp"

namespace fluhost::nn {

namespace {

class OptimizerState {
public:
    OptimizerState(const TrainConfig& cfg, const std::vector<NamedParam>& params) : cfg_(cfg) {
        if (cfg.optimizer == Optimizer::Adam)
            for (const auto& p : params) {
                m_.emplace_back(p.var.value().size(), 0.0);
                v_.emplace_back(p.var.value().size(), 0.0);
            }
    }

    void step(std::vector<NamedParam>& params) {
        ++t_;
        const double lr = cfg_.learning_rate;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i];
            const Tensor& g = p.var.grad();
            if (!g.size()) continue;
            auto w = p.var.mutable_value().values();
            const double decay = p.decay ? cfg_.l2 : 0.0;
            if (cfg_.optimizer == Optimizer::Sgd) {
                for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * (g[j] + decay * w[j]);
                continue;
            }
            auto& m = m_[i];
            auto& v = v_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double gj = g[j] + decay * w[j];
                m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
                v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
                w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.epsilon);
            }
        }
    }

private:
    const TrainConfig& cfg_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

}  // namespace

FittedModel train(const ModelSpec& spec, const Inputs& data, std::span<const int> labels, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t N = data.rows();
    if (N == 0) throw DataError("cannot train on an empty data set");
    if (labels.size() != N)
        throw ShapeError(std::to_string(labels.size()) + " labels for " + std::to_string(N) + " rows");

    std::mt19937_64 rng(cfg.seed);
    FittedModel model{Network(spec, rng()), {}};
    OptimizerState opt(cfg, model.network.params());

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<int> batch_labels;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = N - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(order[i], order[pick(rng)]);
        }
        double total = 0.0;
        for (std::size_t start = 0; start < N; start += cfg.batch_size) {
            const std::size_t end = std::min(N, start + cfg.batch_size);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            batch_labels.clear();
            for (auto i : idx) batch_labels.push_back(labels[i]);

            for (auto& p : model.network.params()) p.var.zero_grad();
            Var loss = softmax_cross_entropy(model.network.logits(data.select(idx)), batch_labels);
            const double l = loss.value()[0];
            if (!std::isfinite(l))
                throw DivergedTraining("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)",
                                       epoch);
            loss.backward();
            opt.step(model.network.params());
            total += l * static_cast<double>(idx.size());
        }
        model.history.push_back(total / static_cast<double>(N));
    }
    return model;
}

Matrix predict_proba(const FittedModel& model, const Inputs& data) { return model.network.predict_proba(data); }

Matrix transformer_encoder_forward(const Network& net, const Inputs& tokens) {
    if (net.spec().kind != ModelKind::Transformer) throw ConfigError("network is not a Transformer");
    return net.predict_proba(tokens);
}

std::string history_csv(std::span<const double> history) {
    std::string out = "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < history.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, history[i]);
        out += buf;
    }
    return out;
}

}  // namespace fluhost::nn
