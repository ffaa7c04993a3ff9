#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fluhost/error.hpp"
#include "fluhost/ngram.hpp"
#include "fluhost/testbench.hpp"

using namespace fluhost;
using namespace fluhost::testbench;

TEST(Synth, ClassCountsLargestRemainder) {
    SynthSpec s;
    s.records = 10;
    s.classes = {{"a", "WWW", 1.0 / 3}, {"b", "CCC", 1.0 / 3}, {"c", "KKK", 1.0 / 3}};
    EXPECT_EQ(class_counts(s), (std::vector<std::size_t>{4, 3, 3}));
    s.records = 7;
    s.classes = {{"a", "WWW", 0.5}, {"b", "CCC", 0.25}, {"c", "KKK", 0.25}};
    auto c = class_counts(s);
    EXPECT_EQ(c[0] + c[1] + c[2], 7u);
    EXPECT_EQ(c, (std::vector<std::size_t>{3, 2, 2}));
}

TEST(Synth, RecordsCarryExactlyTheirOwnMotif) {
    auto spec = default_spec(200, 5, 42);
    auto ds = generate(spec);
    ASSERT_EQ(ds.size(), 200u);
    EXPECT_EQ(ds.level(), seqio::Level::Fine);
    std::map<std::string, std::string> motif;
    for (const auto& c : spec.classes) motif[c.name] = c.motif;
    auto counts = class_counts(spec);
    std::map<std::string, std::size_t> seen;
    for (const auto& r : ds.records()) {
        EXPECT_GE(r.residues.size(), spec.min_len);
        EXPECT_LE(r.residues.size(), spec.max_len);
        EXPECT_FALSE(seqio::validate_record(r));
        auto label = r.label(seqio::Level::Fine);
        seen[label]++;
        for (const auto& [name, m] : motif) EXPECT_EQ(count_occurrences(r.residues, m), name == label ? 1u : 0u);
    }
    for (std::size_t k = 0; k < spec.classes.size(); ++k) EXPECT_EQ(seen[spec.classes[k].name], counts[k]);
}

TEST(Synth, SameSeedSameCorpus) {
    auto a = generate(default_spec(50, 3, 7));
    auto b = generate(default_spec(50, 3, 7));
    auto c = generate(default_spec(50, 3, 8));
    EXPECT_EQ(a.records(), b.records());
    EXPECT_NE(a.records(), c.records());
    auto pa = synth_pssms(a, 1);
    ASSERT_EQ(pa.size(), 50u);
    EXPECT_EQ(pa, synth_pssms(b, 1));
    EXPECT_EQ(pa[3].residues, a.records()[3].residues);
}

// A nearest-centroid classifier on trigram counts should already separate
// the classes, showing the motif is the signal.
TEST(Synth, TrigramCentroidsSeparateClasses) {
    auto ds = generate(default_spec(300, 3, 9));
    std::vector<std::map<std::string, double>> centroid(3);
    std::vector<double> n(3, 0.0);
    std::vector<std::map<std::string, double>> bags;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::map<std::string, double> bag;
        for (auto& t : ngram::tokenize(ds.records()[i].residues, 3)) bag[t] += 1.0;
        bags.push_back(bag);
        if (i % 2 == 0) {
            for (auto& [t, v] : bag) centroid[ds.labels()[i]][t] += v;
            n[ds.labels()[i]] += 1.0;
        }
    }
    std::size_t ok = 0, total = 0;
    for (std::size_t i = 1; i < ds.size(); i += 2) {
        int best = -1;
        double best_score = -1e300;
        for (int c = 0; c < 3; ++c) {
            double dot = 0.0;
            for (auto& [t, v] : bags[i])
                if (auto it = centroid[c].find(t); it != centroid[c].end()) dot += v * it->second / n[c];
            if (dot > best_score) best_score = dot, best = c;
        }
        ok += best == ds.labels()[i];
        ++total;
    }
    EXPECT_GT(static_cast<double>(ok) / static_cast<double>(total), 0.95);
}

TEST(Synth, ValidationErrors) {
    auto s = default_spec(20, 2, 0);
    s.min_len = 5;
    s.max_len = 50;
    EXPECT_THROW(s.validate(), DataError);
    s = default_spec(20, 2, 0);
    s.classes[0].proportion = 0.9;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_THROW(default_spec(20, 1, 0), ConfigError);
    EXPECT_THROW(default_spec(20, max_default_classes() + 1, 0), ConfigError);
    EXPECT_EQ(count_occurrences("AAAA", "AA"), 3u);
}
