#include "fluhost/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fluhost/checkpoint.hpp"
#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::pipeline {

namespace {

const std::map<ModelFamily, std::set<std::string>>& allowed_keys() {
    static const std::map<ModelFamily, std::set<std::string>> keys = {
        {ModelFamily::Mlp, {"hidden", "alpha", "learning_rate", "epochs", "batch_size"}},
        {ModelFamily::Cnn, {"num_filters", "learning_rate", "epochs", "batch_size", "kernel_size", "embed_dim"}},
        {ModelFamily::Transformer, {"embed_dim", "num_heads", "learning_rate", "epochs", "batch_size"}},
        {ModelFamily::RandomForest, {"n_estimators", "max_depth"}},
        {ModelFamily::RusBoost, {"n_estimators", "learning_rate", "max_depth"}},
    };
    return keys;
}

double hp_value(const HyperParams& hp, const std::string& key) {
    auto it = hp.find(key);
    if (it == hp.end()) throw ConfigError("missing hyperparameter '" + key + "'");
    if (!std::isfinite(it->second)) throw ConfigError("hyperparameter '" + key + "' is not finite");
    return it->second;
}

std::size_t hp_count(const HyperParams& hp, const std::string& key, double min = 1.0) {
    const double v = hp_value(hp, key);
    if (v != std::floor(v) || v < min)
        throw ConfigError("hyperparameter '" + key + "' must be a whole number >= " + std::to_string(int(min)) +
                          ", got " + std::to_string(v));
    return static_cast<std::size_t>(v);
}

bool uses_tokens(ModelFamily f) { return f == ModelFamily::Transformer; }
bool needs_features(ModelFamily f) {
    return f == ModelFamily::Mlp || f == ModelFamily::RandomForest || f == ModelFamily::RusBoost;
}
bool is_network(ModelFamily f) {
    return f == ModelFamily::Mlp || f == ModelFamily::Cnn || f == ModelFamily::Transformer;
}

void check_compatible(const Representation& rep, ModelFamily f) {
    if (rep.ngrams && needs_features(f))
        throw ConfigError("model '" + std::string(to_string(f)) + "' needs PSSM features (--scheme), not n-grams");
    if (!rep.ngrams && uses_tokens(f))
        throw ConfigError("model '" + std::string(to_string(f)) + "' needs n-gram tokens (--ngrams)");
}

nn::ModelSpec network_spec(ModelFamily f, const HyperParams& hp, std::size_t num_classes, bool tokens,
                           std::size_t input_dim, std::size_t vocab_size, std::size_t max_len) {
    nn::ModelSpec s;
    s.num_classes = num_classes;
    s.input = tokens ? nn::InputKind::Tokens : nn::InputKind::Features;
    s.input_dim = tokens ? 0 : input_dim;
    s.vocab_size = tokens ? vocab_size : 0;
    s.max_len = tokens ? max_len : 0;
    switch (f) {
        case ModelFamily::Mlp: {
            s.kind = nn::ModelKind::Mlp;
            const auto h = hp_count(hp, "hidden", 0.0);
            if (h > 0) s.hidden = {h};
            break;
        }
        case ModelFamily::Cnn: {
            s.kind = nn::ModelKind::Cnn;
            const auto nf = hp_count(hp, "num_filters");
            s.filters = {nf, std::max<std::size_t>(1, nf / 2), std::max<std::size_t>(1, nf / 4)};
            s.kernel_size = hp_count(hp, "kernel_size");
            s.embed_dim = hp_count(hp, "embed_dim");
            s.hidden = {64, 32, 16};
            break;
        }
        case ModelFamily::Transformer:
            s.kind = nn::ModelKind::Transformer;
            s.embed_dim = hp_count(hp, "embed_dim");
            s.num_heads = hp_count(hp, "num_heads");
            break;
        default: throw ConfigError("not a network model");
    }
    s.validate();
    return s;
}

nn::TrainConfig train_config(ModelFamily f, const HyperParams& hp, std::uint64_t seed) {
    nn::TrainConfig c;
    c.learning_rate = hp_value(hp, "learning_rate");
    c.epochs = static_cast<int>(hp_count(hp, "epochs"));
    c.batch_size = hp_count(hp, "batch_size");
    c.seed = seed;
    if (f == ModelFamily::Mlp) c.l2 = hp_value(hp, "alpha");
    c.validate();
    return c;
}

std::vector<int> labels_at(std::span<const int> labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
}

Matrix predict_encoded(const TrainedModel& m, const nn::Inputs& in) {
    if (auto* net = std::get_if<nn::Network>(&m.model)) return net->predict_proba(in);
    if (in.kind != nn::InputKind::Features) throw ConfigError("tree models take feature vectors");
    if (auto* rf = std::get_if<ensemble::RandomForest>(&m.model)) return rf->predict_proba(in.features);
    return std::get<ensemble::RusBoost>(m.model).predict_proba(in.features);
}

nn::Inputs encode_tokens(std::span<const seqio::ProteinRecord> records, const ngram::Vocabulary& vocab,
                         std::size_t max_len) {
    std::vector<int> ids;
    ids.reserve(records.size() * max_len);
    for (const auto& r : records) {
        try {
            auto seq = ngram::encode_pad(ngram::tokenize(r.residues, vocab.n()), vocab, max_len);
            ids.insert(ids.end(), seq.ids.begin(), seq.ids.end());
        } catch (const DataError& e) {
            throw DataError("record " + r.id + ": " + e.what());
        }
    }
    return nn::Inputs::from_tokens(std::move(ids), max_len);
}

}  // namespace

std::string_view to_string(ModelFamily f) noexcept {
    switch (f) {
        case ModelFamily::Mlp: return "mlp";
        case ModelFamily::Cnn: return "cnn";
        case ModelFamily::Transformer: return "transformer";
        case ModelFamily::RandomForest: return "rf";
        case ModelFamily::RusBoost: return "rusboost";
    }
    return "?";
}

ModelFamily parse_model_family(std::string_view s) {
    for (auto f : {ModelFamily::Mlp, ModelFamily::Cnn, ModelFamily::Transformer, ModelFamily::RandomForest,
                   ModelFamily::RusBoost})
        if (s == to_string(f)) return f;
    throw ConfigError("unknown model '" + std::string(s) + "' (expected mlp, cnn, transformer, rf or rusboost)");
}

std::string Representation::describe() const {
    return ngrams ? std::to_string(n) + "-grams" : std::string(pssm::to_string(scheme)) + "-pssm";
}

nlohmann::json Representation::to_json() const {
    if (ngrams) return {{"ngrams", n}};
    return {{"scheme", pssm::to_string(scheme)}};
}

Representation Representation::from_json(const nlohmann::json& j) {
    Representation r;
    if (!j.is_object() || j.size() != 1 || !(j.contains("ngrams") || j.contains("scheme")))
        throw ConfigError("representation must be {\"scheme\": ...} or {\"ngrams\": N}");
    if (j.contains("ngrams")) {
        r.ngrams = true;
        r.n = j.at("ngrams").get<std::size_t>();
        if (r.n < ngram::kMinN || r.n > ngram::kMaxN)
            throw ConfigError("n-gram size must be in [1, 8], got " + std::to_string(r.n));
    } else {
        r.scheme = pssm::parse_scheme(j.at("scheme").get<std::string>());
    }
    return r;
}

pssm::RawPssm PssmSource::load(const seqio::ProteinRecord& r) const {
    if (dir.empty()) return pssm::synth_pssm(r.residues, synth_seed);
    const auto path = dir / (r.id + ".pssm");
    if (!std::filesystem::exists(path)) throw DataError("no PSSM file for record " + r.id + " at " + path.string());
    auto m = pssm::parse_psiblast_pssm(read_file(path));
    if (m.residues != r.residues) throw DataError("PSSM file " + path.string() + " does not match the record's residues");
    return m;
}

pssm::FeatureTable pssm_features(std::span<const seqio::ProteinRecord> records, pssm::Scheme scheme,
                                 const PssmSource& source, std::size_t workers) {
    pssm::FeatureTable t;
    t.scheme = scheme;
    const std::size_t d = pssm::feature_dim(scheme);
    t.values = Matrix(records.size(), d);
    for (const auto& r : records) {
        t.ids.push_back(r.id);
        t.labels.emplace_back();
    }
    parallel_for(records.size(), workers, [&](std::size_t i) {
        try {
            auto fv = pssm::featurize(source.load(records[i]), scheme);
            std::copy(fv.values.begin(), fv.values.end(), t.values.row(i).begin());
        } catch (const DataError& e) {
            throw DataError("record " + records[i].id + ": " + e.what());
        }
    });
    return t;
}

Grid default_grid(ModelFamily f, std::string_view profile) {
    if (profile == "desk") {
        switch (f) {
            case ModelFamily::Mlp:
                return {{"hidden", {64}}, {"alpha", {0.001}}, {"learning_rate", {0.01}}, {"epochs", {50}},
                        {"batch_size", {32}}};
            case ModelFamily::Cnn:
                return {{"num_filters", {32}}, {"learning_rate", {0.005}}, {"epochs", {20}}, {"batch_size", {32}},
                        {"kernel_size", {3}},  {"embed_dim", {16}}};
            case ModelFamily::Transformer:
                return {{"embed_dim", {32}}, {"num_heads", {1}}, {"learning_rate", {0.005}}, {"epochs", {30}},
                        {"batch_size", {32}}};
            case ModelFamily::RandomForest: return {{"n_estimators", {50}}, {"max_depth", {10}}};
            case ModelFamily::RusBoost: return {{"n_estimators", {50}}, {"learning_rate", {0.1}}, {"max_depth", {2}}};
        }
    }
    if (profile == "full") {
        switch (f) {
            case ModelFamily::Mlp:
                return {{"hidden", {100}},
                        {"alpha", {0.001, 0.01, 0.05}},
                        {"learning_rate", {0.001, 0.01, 0.05}},
                        {"epochs", {500}},
                        {"batch_size", {200}}};
            case ModelFamily::Cnn:
                return {{"num_filters", {64, 128, 256}},
                        {"learning_rate", {0.01, 0.05, 0.001, 0.0001}},
                        {"epochs", {300}},
                        {"batch_size", {128}},
                        {"kernel_size", {3}},
                        {"embed_dim", {100}}};
            case ModelFamily::Transformer:
                return {{"embed_dim", {32, 64, 128}},
                        {"num_heads", {1, 2, 3, 4, 5}},
                        {"learning_rate", {0.001}},
                        {"epochs", {300}},
                        {"batch_size", {128}}};
            case ModelFamily::RandomForest:
                return {{"n_estimators", {100, 200, 500, 1000, 1500, 2000}}, {"max_depth", {5, 10, 15, 20}}};
            case ModelFamily::RusBoost:
                return {{"n_estimators", {50, 100, 200, 500, 1000, 1500, 2000}},
                        {"learning_rate", {0.001, 0.01, 0.1}},
                        {"max_depth", {2}}};
        }
    }
    throw ConfigError("unknown profile '" + std::string(profile) + "' (expected desk or full)");
}

std::vector<HyperParams> expand(const Grid& g, ModelFamily f) {
    const auto& allowed = allowed_keys().at(f);
    for (const auto& [k, vals] : g) {
        if (!allowed.count(k))
            throw ConfigError("hyperparameter '" + k + "' does not apply to model '" + std::string(to_string(f)) + "'");
        if (vals.empty()) throw ConfigError("hyperparameter '" + k + "' has no values");
    }
    std::vector<HyperParams> out{HyperParams{}};
    for (const auto& [k, vals] : g) {
        std::vector<HyperParams> next;
        for (const auto& base : out)
            for (double v : vals) {
                auto hp = base;
                hp[k] = v;
                next.push_back(std::move(hp));
            }
        out = std::move(next);
    }
    if (f == ModelFamily::Transformer) {
        std::erase_if(out, [](const HyperParams& hp) {
            auto e = hp.find("embed_dim"), h = hp.find("num_heads");
            return e != hp.end() && h != hp.end() && h->second > 0 &&
                   std::fmod(e->second, h->second) != 0.0;
        });
        if (out.empty()) throw ConfigError("no grid point has embed_dim divisible by num_heads");
    }
    return out;
}

Matrix TrainedModel::predict_proba(std::span<const seqio::ProteinRecord> records, const PssmSource& source) const {
    if (rep.ngrams) {
        if (!vocab) throw DataError("model has no vocabulary");
        return predict_encoded(*this, encode_tokens(records, *vocab, max_len));
    }
    PssmSource s{source.dir, pssm_seed};
    return predict_encoded(*this, nn::Inputs::from_features(pssm_features(records, rep.scheme, s).values));
}

std::string TrainedModel::save() const {
    checkpoint::Container c;
    nlohmann::json model_json;
    if (auto* net = std::get_if<nn::Network>(&model))
        model_json = checkpoint::save_network(*net, c.values);
    else if (auto* rf = std::get_if<ensemble::RandomForest>(&model))
        model_json = rf->to_json();
    else
        model_json = std::get<ensemble::RusBoost>(model).to_json();
    c.header = {{"family", to_string(family)},
                {"representation", rep.to_json()},
                {"pssm_seed", pssm_seed},
                {"class_names", class_names},
                {"hyperparams", eval::to_json(hyperparams)},
                {"history", history},
                {"vocab", vocab ? vocab->to_json(max_len) : nlohmann::json()},
                {"max_len", max_len},
                {"model", model_json}};
    return checkpoint::pack(c);
}

TrainedModel TrainedModel::load(std::string_view bytes) {
    auto c = checkpoint::unpack(bytes);
    const auto& h = c.header;
    TrainedModel m;
    try {
        m.family = parse_model_family(h.at("family").get<std::string>());
        m.rep = Representation::from_json(h.at("representation"));
        m.pssm_seed = h.at("pssm_seed").get<std::uint64_t>();
        m.class_names = h.at("class_names").get<std::vector<std::string>>();
        m.hyperparams = h.at("hyperparams").get<HyperParams>();
        m.history = h.at("history").get<std::vector<double>>();
        m.max_len = h.at("max_len").get<std::size_t>();
        if (!h.at("vocab").is_null()) m.vocab = ngram::Vocabulary::from_json(h.at("vocab"));
        if (is_network(m.family)) {
            std::size_t offset = 0;
            m.model = checkpoint::load_network(h.at("model"), c.values, offset);
            if (offset != c.values.size()) throw DataError("model file holds unused parameter values");
        } else if (m.family == ModelFamily::RandomForest) {
            m.model = ensemble::RandomForest::from_json(h.at("model"));
        } else {
            m.model = ensemble::RusBoost::from_json(h.at("model"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
    return m;
}

Experiment::Experiment(const seqio::LabeledDataset& ds, Representation rep, ModelFamily family, PssmSource source,
                       std::size_t workers)
    : ds_(ds), rep_(rep), family_(family), source_(std::move(source)) {
    check_compatible(rep_, family_);
    if (ds_.empty()) throw DataError("dataset is empty");
    if (rep_.ngrams) {
        for (const auto& r : ds_.records()) {
            auto t = ngram::tokenize(r.residues, rep_.n);
            if (t.empty())
                throw DataError("record " + r.id + " has fewer than " + std::to_string(rep_.n) + " residues");
            max_len_ = std::max(max_len_, t.size());
            tokens_.push_back(std::move(t));
        }
    } else {
        features_ = pssm_features(ds_.records(), rep_.scheme, source_, workers).values;
    }
}

nn::Inputs Experiment::token_inputs(std::span<const std::size_t> rows, const ngram::Vocabulary& v) const {
    std::vector<int> ids;
    ids.reserve(rows.size() * max_len_);
    for (auto r : rows) {
        auto seq = ngram::encode_pad(tokens_[r], v, max_len_);
        ids.insert(ids.end(), seq.ids.begin(), seq.ids.end());
    }
    return nn::Inputs::from_tokens(std::move(ids), max_len_);
}

TrainedModel Experiment::fit(std::span<const std::size_t> rows, const HyperParams& hp, std::uint64_t seed) const {
    if (rows.empty()) throw DataError("no training rows");
    TrainedModel m;
    m.family = family_;
    m.rep = rep_;
    m.pssm_seed = source_.synth_seed;
    m.class_names = ds_.class_names();
    m.hyperparams = hp;
    const std::size_t C = m.class_names.size();
    const auto y = labels_at(ds_.labels(), rows);
    for (const auto& [k, v] : hp)
        if (!allowed_keys().at(family_).count(k))
            throw ConfigError("hyperparameter '" + k + "' does not apply to model '" +
                              std::string(to_string(family_)) + "'");

    switch (family_) {
        case ModelFamily::RandomForest: {
            ensemble::ForestConfig fc;
            fc.n_estimators = hp_count(hp, "n_estimators");
            fc.max_depth = hp_count(hp, "max_depth");
            fc.seed = seed;
            m.model = ensemble::fit_forest(features_.select_rows(rows), y, C, fc);
            return m;
        }
        case ModelFamily::RusBoost: {
            ensemble::RusBoostConfig rc;
            rc.n_estimators = hp_count(hp, "n_estimators");
            rc.learning_rate = hp_value(hp, "learning_rate");
            rc.max_depth = hp_count(hp, "max_depth");
            rc.seed = seed;
            m.model = ensemble::fit_rusboost(features_.select_rows(rows), y, C, rc);
            return m;
        }
        default: break;
    }

    nn::Inputs in;
    nn::ModelSpec spec;
    if (rep_.ngrams) {
        std::vector<std::vector<std::string>> corpus;
        corpus.reserve(rows.size());
        for (auto r : rows) corpus.push_back(tokens_[r]);
        m.vocab = ngram::Vocabulary::build(corpus, rep_.n);
        m.max_len = max_len_;
        in = token_inputs(rows, *m.vocab);
        spec = network_spec(family_, hp, C, true, 0, m.vocab->size(), max_len_);
    } else {
        in = nn::Inputs::from_features(features_.select_rows(rows));
        spec = network_spec(family_, hp, C, false, features_.cols(), 0, 0);
    }
    auto fitted = nn::train(spec, in, y, train_config(family_, hp, seed));
    m.history = std::move(fitted.history);
    m.model = std::move(fitted.network);
    return m;
}

Matrix Experiment::fit_predict(std::span<const std::size_t> train, std::span<const std::size_t> test,
                               const HyperParams& hp, std::uint64_t seed) const {
    auto m = fit(train, hp, seed);
    if (rep_.ngrams) return predict_encoded(m, token_inputs(test, *m.vocab));
    return predict_encoded(m, nn::Inputs::from_features(features_.select_rows(test)));
}

eval::FitPredict Experiment::as_fit_predict() const {
    return [this](std::span<const std::size_t> train, std::span<const std::size_t> test, const HyperParams& hp,
                  std::uint64_t seed) { return fit_predict(train, test, hp, seed); };
}

void RunConfig::validate() const {
    if (!seed) throw ConfigError("a seed is required");
    if (k_outer < 2 || k_inner < 2) throw ConfigError("k_outer and k_inner must be at least 2");
    (void)default_grid(model, profile);
    check_compatible(rep, model);
    if (!std::filesystem::exists(data)) throw ConfigError("data file " + data.string() + " does not exist");
    if (!pssm_dir.empty() && !std::filesystem::is_directory(pssm_dir))
        throw ConfigError("PSSM directory " + pssm_dir.string() + " does not exist");
}

PssmSource RunConfig::pssm_source() const {
    return {pssm_dir, pssm_seed ? *pssm_seed : seed.value_or(0)};
}

Grid RunConfig::resolved_grid() const {
    Grid g = default_grid(model, profile);
    for (const auto& [k, v] : grid) {
        if (!allowed_keys().at(model).count(k))
            throw ConfigError("hyperparameter '" + k + "' does not apply to model '" + std::string(to_string(model)) +
                              "'");
        g[k] = v;
    }
    return g;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json g = nlohmann::json::object();
    for (const auto& [k, v] : grid) g[k] = v;
    return {{"data", data.string()},
            {"pssm_dir", pssm_dir.string()},
            {"pssm_seed", pssm_seed ? nlohmann::json(*pssm_seed) : nlohmann::json()},
            {"representation", rep.to_json()},
            {"model", to_string(model)},
            {"profile", profile},
            {"grid", g},
            {"k_outer", k_outer},
            {"k_inner", k_inner},
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json()},
            {"out", out.string()}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {"data",    "pssm_dir", "pssm_seed", "representation",
                                                "model",   "profile",  "grid",      "k_outer",
                                                "k_inner", "seed",     "out"};
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown run config key '" + k + "'");
    RunConfig c;
    try {
        if (j.contains("data")) c.data = j.at("data").get<std::string>();
        if (j.contains("pssm_dir")) c.pssm_dir = j.at("pssm_dir").get<std::string>();
        if (j.contains("pssm_seed") && !j.at("pssm_seed").is_null())
            c.pssm_seed = j.at("pssm_seed").get<std::uint64_t>();
        if (j.contains("representation")) c.rep = Representation::from_json(j.at("representation"));
        if (j.contains("model")) c.model = parse_model_family(j.at("model").get<std::string>());
        if (j.contains("profile")) c.profile = j.at("profile").get<std::string>();
        if (j.contains("grid")) c.grid = j.at("grid").get<Grid>();
        if (j.contains("k_outer")) c.k_outer = j.at("k_outer").get<std::size_t>();
        if (j.contains("k_inner")) c.k_inner = j.at("k_inner").get<std::size_t>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (!j.contains("seed") || j.at("seed").is_null()) throw ConfigError("run config must set a seed");
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    return c;
}

std::string RunConfig::hash() const {
    auto j = to_json();
    j.erase("out");
    return hex64(fnv1a64(j.dump()));
}

eval::NestedCvResult run_nested_cv(const seqio::LabeledDataset& ds, const RunConfig& cfg, const eval::CvPlan& plan,
                                   std::size_t workers) {
    Experiment exp(ds, cfg.rep, cfg.model, cfg.pssm_source(), workers);
    auto grid = expand(cfg.resolved_grid(), cfg.model);
    return eval::nested_cv(ds.labels(), ds.class_names(), exp.as_fit_predict(), grid, plan, workers);
}

}  // namespace fluhost::pipeline
