#include <gtest/gtest.h>

#include <filesystem>

#include <json.hpp>

#include "cli_driver.hpp"
#include "fluhost/util.hpp"

using clidriver::invoke;
using clidriver::scratch;
namespace fs = std::filesystem;

namespace {

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(fluhost::read_file(p)); }

}  // namespace

TEST(Cli, UsageErrors) {
    auto r = invoke({});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(invoke({"synth", "--bogus"}).code, 1);
    EXPECT_EQ(invoke({"frobnicate"}).code, 1);
    EXPECT_EQ(invoke({"--help"}).code, 0);
    auto d = scratch("cli_usage");
    EXPECT_EQ(invoke({"encode", "--scheme", "er", "--ngrams", "3", "--out", d.string()}).code, 1);
    EXPECT_EQ(invoke({"nested-cv", "--model", "svm", "--scheme", "er", "--out", d.string()}).code, 1);
}

TEST(Cli, PrepareWritesDatasetAndReport) {
    auto d = scratch("cli_prepare");
    fluhost::write_file_atomic(d / "in.fasta",
                               ">a|host=human\nMKTIIALSYIFCLV\n>b|host=duck\nMKTIIALSYIFCLA\n"
                               ">c|host=duck\nMKTIIALSYIFCLA\n>d|host=swine\nMKTXIALSY\n");
    auto r = invoke({"prepare", "--fasta", (d / "in.fasta").string(), "--out", d.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rep = load(d / "filter_report.json");
    EXPECT_EQ(rep["parsed"], 4);
    EXPECT_EQ(rep["kept"], 2);
    EXPECT_EQ(rep["rejected_alphabet"], 1);
    EXPECT_EQ(load(d / "dataset.json")["records"].size(), 2u);
    auto man = load(d / "manifest.json");
    EXPECT_EQ(man["command"], "prepare");
    EXPECT_TRUE(fs::exists(d / "run.log"));
    EXPECT_EQ(invoke({"prepare", "--fasta", (d / "missing.fasta").string(), "--out", d.string()}).code, 2);
}

TEST(Cli, EncodeTooShortSequenceIsADataError) {
    auto d = scratch("cli_short");
    fluhost::write_file_atomic(d / "in.fasta", ">tiny|host=human\nMKTIIALS\n>ok|host=duck\nMKTIIALSYIFCLV\n");
    ASSERT_EQ(invoke({"prepare", "--fasta", (d / "in.fasta").string(), "--out", d.string()}).code, 0);
    auto r = invoke({"encode", "--scheme", "er", "--out", d.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("tiny"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("at least 10"), std::string::npos) << r.err;
    auto ok = invoke({"encode", "--scheme", "gdpc", "--binary", "--out", d.string()});
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_TRUE(fs::exists(d / "features.csv"));
    EXPECT_TRUE(fs::exists(d / "features.bin"));
    auto tok = invoke({"encode", "--ngrams", "3", "--out", d.string()});
    EXPECT_EQ(tok.code, 0) << tok.err;
    EXPECT_EQ(load(d / "vocab.json")["max_len"], 12);
    EXPECT_TRUE(fs::exists(d / "tokens.csv"));
}

TEST(Cli, SynthNestedCvIsDeterministic) {
    auto d = scratch("cli_ncv");
    ASSERT_EQ(invoke({"synth", "--records", "60", "--classes", "2", "--seed", "3", "--out", d.string()}).code, 0);
    EXPECT_TRUE(fs::exists(d / "synth.fasta"));
    std::vector<std::string> base{"nested-cv", "--model", "rf", "--scheme", "er", "--k-outer", "3",
                                  "--k-inner", "2", "--seed", "5", "--grid", "n_estimators=5,10",
                                  "--data", (d / "dataset.json").string()};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", (d / "a").string()});
    b.insert(b.end(), {"--out", (d / "b").string()});
    auto ra = invoke(a);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(invoke(b).code, 0);
    EXPECT_EQ(fluhost::read_file(d / "a" / "metrics.json"), fluhost::read_file(d / "b" / "metrics.json"));
    EXPECT_EQ(fluhost::read_file(d / "a" / "predictions.csv"), fluhost::read_file(d / "b" / "predictions.csv"));
    EXPECT_TRUE(fs::exists(d / "a" / "cv_plan.json"));
    EXPECT_TRUE(fs::exists(d / "a" / "pr_curves.csv"));
    EXPECT_EQ(load(d / "a" / "manifest.json")["config_hash"], load(d / "b" / "manifest.json")["config_hash"]);

    // Reusing the saved plan gives the same result.
    auto c = base;
    c.insert(c.end(), {"--plan", (d / "a" / "cv_plan.json").string(), "--out", (d / "c").string()});
    ASSERT_EQ(invoke(c).code, 0);
    EXPECT_EQ(fluhost::read_file(d / "a" / "metrics.json"), fluhost::read_file(d / "c" / "metrics.json"));

    // The run config recorded in the manifest reproduces the run; the manifest
    // itself is not a valid config.
    EXPECT_EQ(invoke({"nested-cv", "--config", (d / "a" / "manifest.json").string(), "--out", (d / "e").string()}).code, 1);
    fluhost::write_file_atomic(d / "run.json", load(d / "a" / "manifest.json")["config"].dump());
    auto rc = invoke({"nested-cv", "--config", (d / "run.json").string(), "--out", (d / "f").string()});
    ASSERT_EQ(rc.code, 0) << rc.err;
    EXPECT_EQ(fluhost::read_file(d / "a" / "metrics.json"), fluhost::read_file(d / "f" / "metrics.json"));

    auto rep = invoke({"report", "--data", (d / "dataset.json").string(), "--runs", (d / "a").string(),
                       (d / "c").string(), "--top-k", "5", "--out", (d / "r").string()});
    ASSERT_EQ(rep.code, 0) << rep.err;
    for (auto f : {"report.json", "metrics.csv", "pr_curves.csv", "token_frequencies.csv", "disagreement.json"})
        EXPECT_TRUE(fs::exists(d / "r" / f)) << f;
}

TEST(Cli, TrainEvaluatePredict) {
    auto d = scratch("cli_train");
    ASSERT_EQ(invoke({"synth", "--records", "40", "--classes", "3", "--seed", "1", "--pssm", "--out", d.string()}).code,
              0);
    EXPECT_TRUE(fs::exists(d / "pssm"));
    auto t = invoke({"train", "--model", "mlp", "--scheme", "gdpc", "--pssm-dir", (d / "pssm").string(), "--grid",
                     "epochs=3", "--out", d.string()});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_TRUE(fs::exists(d / "model.bin"));
    EXPECT_TRUE(fs::exists(d / "history.csv"));
    auto e = invoke({"evaluate", "--pssm-dir", (d / "pssm").string(), "--out", d.string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_TRUE(load(d / "metrics.json").contains("confusion"));
    auto p = invoke({"predict", "--fasta", (d / "synth.fasta").string(), "--pssm-dir", (d / "pssm").string(),
                     "--out", d.string()});
    ASSERT_EQ(p.code, 0) << p.err;
    auto lines = fluhost::split(fluhost::read_file(d / "predictions.csv"), '\n');
    EXPECT_EQ(lines.size(), 42u);  // header + 40 rows + trailing empty
    auto multi = invoke({"train", "--model", "mlp", "--scheme", "gdpc", "--grid", "epochs=3,4", "--out", d.string()});
    EXPECT_EQ(multi.code, 1);
    auto tok = invoke({"train", "--model", "transformer", "--ngrams", "2", "--grid", "epochs=2", "--out",
                       (d / "tok").string(), "--data", (d / "dataset.json").string()});
    ASSERT_EQ(tok.code, 0) << tok.err;
    auto pt = invoke({"predict", "--model-file", (d / "tok" / "model.bin").string(), "--data",
                      (d / "dataset.json").string(), "--out", (d / "tok").string()});
    EXPECT_EQ(pt.code, 0) << pt.err;
}
