#include "fluhost/nn/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fluhost::nn {

std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Cnn: return "cnn";
        case ModelKind::Transformer: return "transformer";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "mlp") return ModelKind::Mlp;
    if (s == "cnn") return ModelKind::Cnn;
    if (s == "transformer") return ModelKind::Transformer;
    throw ConfigError("unknown network kind '" + std::string(s) + "'");
}

namespace {

std::size_t ff_width(const ModelSpec& s) { return s.ff_dim ? s.ff_dim : 2 * s.embed_dim; }

std::size_t sequence_length(const ModelSpec& s) {
    return s.input == InputKind::Tokens ? s.max_len : s.input_dim;
}

// Length after each conv + pool stage; throws when a stage runs out of positions.
std::size_t cnn_output_length(const ModelSpec& s) {
    std::size_t T = sequence_length(s);
    for (std::size_t l = 0; l < s.filters.size(); ++l) {
        if (T < s.kernel_size)
            throw ConfigError("CNN input of length " + std::to_string(sequence_length(s)) +
                              " is too short for " + std::to_string(s.filters.size()) + " conv/pool stages");
        T = T - s.kernel_size + 1;
        if (T < s.pool_width)
            throw ConfigError("CNN input of length " + std::to_string(sequence_length(s)) +
                              " is too short for " + std::to_string(s.filters.size()) + " conv/pool stages");
        T /= s.pool_width;
    }
    return T;
}

}  // namespace

void ModelSpec::validate() const {
    if (num_classes < 2) throw ConfigError("a classifier needs at least 2 classes");
    if (input == InputKind::Features && input_dim == 0) throw ConfigError("input_dim must be positive");
    if (input == InputKind::Tokens && (vocab_size < 3 || max_len == 0))
        throw ConfigError("token input needs vocab_size >= 3 and max_len >= 1");
    for (auto h : hidden)
        if (h == 0) throw ConfigError("hidden layer widths must be positive");
    switch (kind) {
        case ModelKind::Mlp:
            if (input != InputKind::Features) throw ConfigError("the MLP takes feature vectors");
            break;
        case ModelKind::Cnn:
            if (filters.empty()) throw ConfigError("the CNN needs at least one conv layer");
            for (auto f : filters)
                if (f == 0) throw ConfigError("filter counts must be positive");
            if (kernel_size == 0 || pool_width == 0) throw ConfigError("kernel and pool sizes must be positive");
            if (input == InputKind::Tokens && embed_dim == 0) throw ConfigError("embed_dim must be positive");
            cnn_output_length(*this);
            break;
        case ModelKind::Transformer:
            if (input != InputKind::Tokens) throw ConfigError("the Transformer takes token sequences");
            if (embed_dim == 0 || num_heads == 0) throw ConfigError("embed_dim and num_heads must be positive");
            if (embed_dim % num_heads != 0)
                throw ConfigError("embed_dim " + std::to_string(embed_dim) + " is not divisible by num_heads " +
                                  std::to_string(num_heads));
            break;
    }
}

nlohmann::json ModelSpec::to_json() const {
    return {{"kind", to_string(kind)},
            {"input", input == InputKind::Tokens ? "tokens" : "features"},
            {"num_classes", num_classes},
            {"input_dim", input_dim},
            {"vocab_size", vocab_size},
            {"max_len", max_len},
            {"hidden", hidden},
            {"filters", filters},
            {"kernel_size", kernel_size},
            {"pool_width", pool_width},
            {"embed_dim", embed_dim},
            {"num_heads", num_heads},
            {"ff_dim", ff_dim}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    ModelSpec s;
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    s.input = j.at("input").get<std::string>() == "tokens" ? InputKind::Tokens : InputKind::Features;
    s.num_classes = j.at("num_classes").get<std::size_t>();
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.vocab_size = j.at("vocab_size").get<std::size_t>();
    s.max_len = j.at("max_len").get<std::size_t>();
    s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.filters = j.at("filters").get<std::vector<std::size_t>>();
    s.kernel_size = j.at("kernel_size").get<std::size_t>();
    s.pool_width = j.at("pool_width").get<std::size_t>();
    s.embed_dim = j.at("embed_dim").get<std::size_t>();
    s.num_heads = j.at("num_heads").get<std::size_t>();
    s.ff_dim = j.at("ff_dim").get<std::size_t>();
    s.validate();
    return s;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (l2 < 0.0) throw ConfigError("l2 penalty must be non-negative");
}

Inputs Inputs::from_features(Matrix m) {
    Inputs in;
    in.kind = InputKind::Features;
    in.features = std::move(m);
    return in;
}

Inputs Inputs::from_tokens(std::vector<int> ids, std::size_t seq_len) {
    if (seq_len == 0 || ids.size() % seq_len != 0) throw ShapeError("token ids are not a whole number of rows");
    Inputs in;
    in.kind = InputKind::Tokens;
    in.ids = std::move(ids);
    in.seq_len = seq_len;
    return in;
}

std::size_t Inputs::rows() const noexcept {
    return kind == InputKind::Features ? features.rows() : (seq_len ? ids.size() / seq_len : 0);
}

Inputs Inputs::select(std::span<const std::size_t> idx) const {
    if (kind == InputKind::Features) return from_features(features.select_rows(idx));
    std::vector<int> out;
    out.reserve(idx.size() * seq_len);
    for (auto i : idx) out.insert(out.end(), ids.begin() + static_cast<std::ptrdiff_t>(i * seq_len),
                                  ids.begin() + static_cast<std::ptrdiff_t>((i + 1) * seq_len));
    Inputs in;
    in.kind = InputKind::Tokens;
    in.ids = std::move(out);
    in.seq_len = seq_len;
    return in;
}

Var Network::add_param(std::string name, Tensor init, bool decay) {
    params_.push_back({std::move(name), Var::parameter(std::move(init)), decay});
    return params_.back().var;
}

Network::Network(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    spec_.validate();
    std::mt19937_64 rng(seed);
    auto glorot = [&](Shape shape, std::size_t fan_in, std::size_t fan_out) {
        Tensor t(std::move(shape));
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (auto& v : t.values()) v = u(rng);
        return t;
    };
    auto normal = [&](Shape shape) {
        Tensor t(std::move(shape));
        std::normal_distribution<double> n(0.0, 0.05);
        for (auto& v : t.values()) v = n(rng);
        return t;
    };
    auto dense_layer = [&](const std::string& name, std::size_t in, std::size_t out) {
        add_param(name + ".w", glorot({in, out}, in, out), true);
        add_param(name + ".b", Tensor({out}), false);
    };
    const std::size_t C = spec_.num_classes;
    const std::size_t E = spec_.embed_dim;

    switch (spec_.kind) {
        case ModelKind::Mlp: {
            std::size_t in = spec_.input_dim;
            for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
                dense_layer("hidden" + std::to_string(l), in, spec_.hidden[l]);
                in = spec_.hidden[l];
            }
            dense_layer("output", in, C);
            break;
        }
        case ModelKind::Cnn: {
            std::size_t channels = 1;
            if (spec_.input == InputKind::Tokens) {
                add_param("embedding", normal({spec_.vocab_size, E}), false);
                channels = E;
            }
            const std::size_t K = spec_.kernel_size;
            for (std::size_t l = 0; l < spec_.filters.size(); ++l) {
                const std::size_t f = spec_.filters[l];
                add_param("conv" + std::to_string(l) + ".w", glorot({K, channels, f}, K * channels, K * f), true);
                add_param("conv" + std::to_string(l) + ".b", Tensor({f}), false);
                channels = f;
            }
            std::size_t in = cnn_output_length(spec_) * channels;
            for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
                dense_layer("dense" + std::to_string(l), in, spec_.hidden[l]);
                in = spec_.hidden[l];
            }
            dense_layer("output", in, C);
            break;
        }
        case ModelKind::Transformer: {
            const std::size_t F = ff_width(spec_);
            add_param("token_embedding", normal({spec_.vocab_size, E}), false);
            add_param("position_embedding", normal({spec_.max_len, E}), false);
            for (const char* p : {"attn.q", "attn.k", "attn.v", "attn.out"}) dense_layer(p, E, E);
            add_param("norm1.gamma", Tensor({E}, 1.0), false);
            add_param("norm1.beta", Tensor({E}), false);
            dense_layer("ffn1", E, F);
            dense_layer("ffn2", F, E);
            add_param("norm2.gamma", Tensor({E}, 1.0), false);
            add_param("norm2.beta", Tensor({E}), false);
            dense_layer("output", E, C);
            break;
        }
    }
}

Var Network::logits(const Inputs& in) const {
    if (spec_.input != in.kind)
        throw ShapeError(std::string("model expects ") + (spec_.input == InputKind::Tokens ? "token" : "feature") +
                         " inputs");
    if (in.kind == InputKind::Features && in.features.cols() != spec_.input_dim)
        throw ShapeError("model expects " + std::to_string(spec_.input_dim) + " features, got " +
                         std::to_string(in.features.cols()));
    if (in.kind == InputKind::Tokens && in.seq_len != spec_.max_len)
        throw ShapeError("model expects token rows of length " + std::to_string(spec_.max_len) + ", got " +
                         std::to_string(in.seq_len));
    switch (spec_.kind) {
        case ModelKind::Mlp: return mlp_logits(in);
        case ModelKind::Cnn: return cnn_logits(in);
        case ModelKind::Transformer: return transformer_logits(in);
    }
    throw ConfigError("unknown model kind");
}

Var Network::mlp_logits(const Inputs& in) const {
    Var x = Var::constant(Tensor({in.features.rows(), in.features.cols()}, in.features.data()));
    std::size_t k = 0;
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l, k += 2) x = relu(dense(x, param(k), param(k + 1)));
    return dense(x, param(k), param(k + 1));
}

Var Network::cnn_logits(const Inputs& in) const {
    const std::size_t B = in.rows();
    std::size_t k = 0;
    Var x;
    if (in.kind == InputKind::Tokens) {
        x = embedding(in.ids, B, in.seq_len, param(k++));
    } else {
        x = Var::constant(Tensor({B, in.features.cols(), 1}, in.features.data()));
    }
    for (std::size_t l = 0; l < spec_.filters.size(); ++l, k += 2)
        x = maxpool1d(relu(conv1d(x, param(k), param(k + 1))), spec_.pool_width);
    x = reshape(x, {B, x.value().size() / B});
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l, k += 2) x = relu(dense(x, param(k), param(k + 1)));
    return dense(x, param(k), param(k + 1));
}

Var Network::transformer_logits(const Inputs& in) const {
    const std::size_t B = in.rows(), T = in.seq_len;
    std::vector<int> positions(B * T);
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i % T);
    Var x = add(embedding(in.ids, B, T, param(0)), embedding(positions, B, T, param(1)));
    AttentionParams attn{param(2), param(3), param(4), param(5), param(6), param(7), param(8), param(9)};
    Var h = layer_norm(add(x, multi_head_attention(x, attn, spec_.num_heads)), param(10), param(11));
    Var ff = dense(relu(dense(h, param(12), param(13))), param(14), param(15));
    h = layer_norm(add(h, ff), param(16), param(17));
    return dense(mean_pool(h), param(18), param(19));
}

Matrix Network::predict_proba(const Inputs& in) const {
    constexpr std::size_t kChunk = 256;
    const std::size_t N = in.rows();
    const std::size_t C = spec_.num_classes;
    Matrix out(N, C);
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < N; start += kChunk) {
        idx.clear();
        for (std::size_t i = start; i < std::min(N, start + kChunk); ++i) idx.push_back(i);
        Var p = softmax(logits(in.select(idx)));
        std::copy(p.value().data(), p.value().data() + idx.size() * C, out.data().begin() + static_cast<std::ptrdiff_t>(start * C));
    }
    return out;
}

}  // namespace fluhost::nn
