#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <set>

#include "fluhost/error.hpp"
#include "fluhost/pipeline.hpp"
#include "fluhost/testbench.hpp"
#include "fluhost/util.hpp"

using namespace fluhost;
using namespace fluhost::pipeline;

namespace {

Representation ngrams(std::size_t n) {
    Representation r;
    r.ngrams = true;
    r.n = n;
    return r;
}

Representation scheme(pssm::Scheme s) {
    Representation r;
    r.scheme = s;
    return r;
}

HyperParams quick(ModelFamily f) {
    auto g = default_grid(f, "desk");
    HyperParams hp;
    for (auto& [k, v] : g) hp[k] = v.front();
    if (hp.count("epochs")) hp["epochs"] = 3;
    if (f == ModelFamily::RandomForest || f == ModelFamily::RusBoost) hp["n_estimators"] = 5;
    return hp;
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

TEST(Families, Parsing) {
    for (auto f : {ModelFamily::Mlp, ModelFamily::Cnn, ModelFamily::Transformer, ModelFamily::RandomForest,
                   ModelFamily::RusBoost})
        EXPECT_EQ(parse_model_family(to_string(f)), f);
    EXPECT_THROW(parse_model_family("svm"), ConfigError);
}

TEST(Representation, JsonRoundTrip) {
    auto r = Representation::from_json(ngrams(4).to_json());
    EXPECT_TRUE(r.ngrams);
    EXPECT_EQ(r.n, 4u);
    auto s = Representation::from_json(scheme(pssm::Scheme::GDPC).to_json());
    EXPECT_FALSE(s.ngrams);
    EXPECT_EQ(s.scheme, pssm::Scheme::GDPC);
    EXPECT_THROW(Representation::from_json({{"ngrams", 12}}), ConfigError);
    EXPECT_THROW(Representation::from_json({{"foo", 1}}), ConfigError);
}

TEST(Grid, ProfilesExpand) {
    for (auto f : {ModelFamily::Mlp, ModelFamily::Cnn, ModelFamily::Transformer, ModelFamily::RandomForest,
                   ModelFamily::RusBoost}) {
        EXPECT_EQ(expand(default_grid(f, "desk"), f).size(), 1u);
        EXPECT_GE(expand(default_grid(f, "full"), f).size(), 1u);
    }
    EXPECT_EQ(expand(default_grid(ModelFamily::RandomForest, "full"), ModelFamily::RandomForest).size(), 24u);
    EXPECT_EQ(expand(default_grid(ModelFamily::Mlp, "full"), ModelFamily::Mlp).size(), 9u);
    auto t = expand(default_grid(ModelFamily::Transformer, "full"), ModelFamily::Transformer);
    EXPECT_EQ(t.size(), 9u);
    for (const auto& hp : t) EXPECT_EQ(std::fmod(hp.at("embed_dim"), hp.at("num_heads")), 0.0);
    EXPECT_THROW(default_grid(ModelFamily::Mlp, "huge"), ConfigError);
    EXPECT_THROW(expand({{"max_depth", {3}}}, ModelFamily::Mlp), ConfigError);
    EXPECT_THROW(expand({{"embed_dim", {6}}, {"num_heads", {4}}}, ModelFamily::Transformer), ConfigError);
}

TEST(Experiment, RejectsIncompatibleRepresentation) {
    auto ds = testbench::generate(testbench::default_spec(20, 2, 1));
    EXPECT_THROW(Experiment(ds, ngrams(3), ModelFamily::RandomForest, {}), ConfigError);
    EXPECT_THROW(Experiment(ds, scheme(pssm::Scheme::ER), ModelFamily::Transformer, {}), ConfigError);
}

TEST(Experiment, EveryFamilySavesAndReloads) {
    auto ds = testbench::generate(testbench::default_spec(40, 2, 3));
    PssmSource src{{}, 5};
    struct Combo {
        ModelFamily f;
        Representation r;
    };
    std::vector<Combo> combos{{ModelFamily::Mlp, scheme(pssm::Scheme::ER)},
                              {ModelFamily::Cnn, ngrams(3)},
                              {ModelFamily::Cnn, scheme(pssm::Scheme::GDPC)},
                              {ModelFamily::Transformer, ngrams(2)},
                              {ModelFamily::RandomForest, scheme(pssm::Scheme::EG)},
                              {ModelFamily::RusBoost, scheme(pssm::Scheme::ER)}};
    for (const auto& c : combos) {
        SCOPED_TRACE(std::string(to_string(c.f)) + " " + c.r.describe());
        Experiment ex(ds, c.r, c.f, src);
        auto rows = iota(30);
        auto m = ex.fit(rows, quick(c.f), 7);
        auto p = m.predict_proba(ds.records(), src);
        ASSERT_EQ(p.rows(), ds.size());
        ASSERT_EQ(p.cols(), 2u);
        auto back = TrainedModel::load(m.save());
        EXPECT_EQ(back.class_names, ds.class_names());
        EXPECT_EQ(back.predict_proba(ds.records(), PssmSource{{}, 999}), p);
        std::vector<std::size_t> test{30, 31, 32};
        auto fp = ex.fit_predict(rows, test, quick(c.f), 7);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(fp(i, k), p(30 + i, k));
    }
    EXPECT_THROW(TrainedModel::load("not a model"), DataError);
}

TEST(Experiment, VocabularyComesFromTrainingRows) {
    auto ds = testbench::generate(testbench::default_spec(30, 2, 4));
    Experiment ex(ds, ngrams(3), ModelFamily::Transformer, {});
    std::vector<std::size_t> rows{0, 1, 2};
    auto m = ex.fit(rows, quick(ModelFamily::Transformer), 1);
    ASSERT_TRUE(m.vocab);
    std::size_t distinct = 0;
    std::set<std::string> toks;
    for (auto r : rows)
        for (auto& t : ngram::tokenize(ds.records()[r].residues, 3)) toks.insert(t);
    distinct = toks.size();
    EXPECT_EQ(m.vocab->size(), distinct + 2);
    EXPECT_EQ(m.max_len, ex.max_len());
}

TEST(PssmSource, ReadsDirectoryAndNamesBadRecords) {
    auto dir = std::filesystem::temp_directory_path() / "fluhost_pssm_src";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(std::string(FLUHOST_TEST_DATA) + "/mlsitilfl.pssm", dir / "p1.pssm");
    seqio::ProteinRecord good{"p1", "MLSITILFL", seqio::HostCoarse::Human, "human", {}};
    seqio::ProteinRecord other{"p2", "MLSITILFL", seqio::HostCoarse::Human, "human", {}};
    PssmSource src{dir, 0};
    EXPECT_EQ(src.load(good).residues, "MLSITILFL");
    EXPECT_THROW(src.load(other), DataError);
    std::vector<seqio::ProteinRecord> recs{good};
    auto t = pssm_features(recs, pssm::Scheme::EG, src);
    EXPECT_EQ(t.values.cols(), 100u);
    try {
        pssm_features(recs, pssm::Scheme::ER, src);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
    }
    write_file_atomic(dir / "p2.pssm", read_file(dir / "p1.pssm"));
    other.residues = "MLSITILFA";
    EXPECT_THROW(src.load(other), DataError);
    std::filesystem::remove_all(dir);
}

TEST(RunConfig, JsonAndHash) {
    RunConfig c;
    c.seed = 4;
    c.rep = ngrams(3);
    c.grid = {{"epochs", {2, 3}}};
    auto back = RunConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(back.hash(), c.hash());
    auto moved = c;
    moved.out = "/elsewhere";
    EXPECT_EQ(moved.hash(), c.hash());
    moved.seed = 5;
    EXPECT_NE(moved.hash(), c.hash());
    auto j = c.to_json();
    j["extra"] = 1;
    EXPECT_THROW(RunConfig::from_json(j), ConfigError);
    j = c.to_json();
    j.erase("seed");
    EXPECT_THROW(RunConfig::from_json(j), ConfigError);
    EXPECT_EQ(c.resolved_grid().at("epochs"), (std::vector<double>{2, 3}));
    EXPECT_EQ(c.resolved_grid().at("embed_dim"), (std::vector<double>{32}));
    RunConfig no_seed;
    EXPECT_THROW(no_seed.validate(), ConfigError);
}
