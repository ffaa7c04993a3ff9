#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fluhost/ensemble.hpp"
#include "fluhost/eval/cv.hpp"
#include "fluhost/feature_io.hpp"
#include "fluhost/ngram.hpp"
#include "fluhost/nn/models.hpp"
#include "fluhost/pssm.hpp"
#include "fluhost/seqio.hpp"

namespace fluhost::pipeline {

enum class ModelFamily { Mlp, Cnn, Transformer, RandomForest, RusBoost };

std::string_view to_string(ModelFamily f) noexcept;
// Accepts mlp, cnn, transformer, rf, rusboost.
ModelFamily parse_model_family(std::string_view s);

// Either a PSSM encoding scheme or overlapping n-grams.
struct Representation {
    bool ngrams = false;
    pssm::Scheme scheme = pssm::Scheme::ER;
    std::size_t n = 3;

    std::string describe() const;
    nlohmann::json to_json() const;
    static Representation from_json(const nlohmann::json& j);
};

// PSSM profiles come from `<dir>/<id>.pssm` (PSI-BLAST ASCII) when a
// directory is set, otherwise from the synthetic generator.
struct PssmSource {
    std::filesystem::path dir;
    std::uint64_t synth_seed = 0;

    pssm::RawPssm load(const seqio::ProteinRecord& r) const;
};

// Encoding errors name the offending record.
pssm::FeatureTable pssm_features(std::span<const seqio::ProteinRecord> records, pssm::Scheme scheme,
                                 const PssmSource& source, std::size_t workers = 1);

using HyperParams = eval::HyperParams;
using Grid = std::map<std::string, std::vector<double>>;

// "desk" is a single small configuration per family; "full" spans the
// complete search ranges.
Grid default_grid(ModelFamily f, std::string_view profile);

// Cartesian product in key order, last key varying fastest. Transformer
// points whose embed_dim is not divisible by num_heads are dropped.
std::vector<HyperParams> expand(const Grid& g, ModelFamily f);

struct TrainedModel {
    ModelFamily family = ModelFamily::Mlp;
    Representation rep;
    std::uint64_t pssm_seed = 0;
    std::vector<std::string> class_names;
    std::optional<ngram::Vocabulary> vocab;
    std::size_t max_len = 0;
    HyperParams hyperparams;
    std::variant<nn::Network, ensemble::RandomForest, ensemble::RusBoost> model;
    std::vector<double> history;  // per-epoch training loss, networks only

    // `source` supplies profiles for PSSM representations; its synth_seed is
    // ignored in favour of the one stored with the model.
    Matrix predict_proba(std::span<const seqio::ProteinRecord> records, const PssmSource& source) const;

    std::string save() const;
    static TrainedModel load(std::string_view bytes);
};

// A dataset encoded once for one representation and model family, from which
// models can be fitted on any subset of rows.
class Experiment {
public:
    Experiment(const seqio::LabeledDataset& ds, Representation rep, ModelFamily family, PssmSource source,
               std::size_t workers = 1);

    const seqio::LabeledDataset& dataset() const noexcept { return ds_; }
    std::size_t max_len() const noexcept { return max_len_; }

    // The vocabulary is built from the training rows only; every sequence is
    // padded to the longest in the dataset.
    TrainedModel fit(std::span<const std::size_t> rows, const HyperParams& hp, std::uint64_t seed) const;
    Matrix fit_predict(std::span<const std::size_t> train, std::span<const std::size_t> test, const HyperParams& hp,
                       std::uint64_t seed) const;

    eval::FitPredict as_fit_predict() const;

private:
    nn::Inputs token_inputs(std::span<const std::size_t> rows, const ngram::Vocabulary& v) const;

    const seqio::LabeledDataset& ds_;
    Representation rep_;
    ModelFamily family_;
    PssmSource source_;
    Matrix features_;
    std::vector<std::vector<std::string>> tokens_;
    std::size_t max_len_ = 0;
};

struct RunConfig {
    std::filesystem::path data;
    std::filesystem::path pssm_dir;
    std::optional<std::uint64_t> pssm_seed;  // defaults to seed
    Representation rep;
    ModelFamily model = ModelFamily::Transformer;
    std::string profile = "desk";
    Grid grid;  // per-key overrides of the profile grid
    std::size_t k_outer = 5;
    std::size_t k_inner = 4;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = ".";

    // Seed present, profile known, data file exists.
    void validate() const;

    PssmSource pssm_source() const;
    Grid resolved_grid() const;

    nlohmann::json to_json() const;
    // Throws ConfigError on unknown keys or a missing seed.
    static RunConfig from_json(const nlohmann::json& j);

    // FNV-1a of the canonical JSON form.
    std::string hash() const;
};

eval::NestedCvResult run_nested_cv(const seqio::LabeledDataset& ds, const RunConfig& cfg, const eval::CvPlan& plan,
                                   std::size_t workers);

}  // namespace fluhost::pipeline
