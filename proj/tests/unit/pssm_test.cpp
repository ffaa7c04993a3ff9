#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "fluhost/alphabet.hpp"
#include "fluhost/error.hpp"
#include "fluhost/pssm.hpp"
#include "fluhost/util.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fluhost;
using namespace fluhost::pssm;

namespace {

oracle::Grid to_grid(const Gpssm& g) {
    oracle::Grid out(g.values.rows(), std::vector<double>(10));
    for (std::size_t r = 0; r < g.values.rows(); ++r)
        for (std::size_t c = 0; c < 10; ++c) out[r][c] = g.values(r, c);
    return out;
}

void expect_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LE(oracle::rel_err(got[i], want[i]), tol) << "index " << i;
}

int col(char aa) { return amino_acid_index(aa); }

}  // namespace

TEST(PsiblastParser, ReadsFixture) {
    auto m = parse_psiblast_pssm(read_file(std::string(FLUHOST_TEST_DATA) + "/mlsitilfl.pssm"));
    EXPECT_EQ(m.residues, "MLSITILFL");
    ASSERT_EQ(m.scores.size(), 9u * 20u);
    EXPECT_EQ(m(0, col('M')), 5);
    EXPECT_EQ(m(0, col('D')), -3);
    EXPECT_EQ(m(7, col('F')), 6);
    EXPECT_EQ(m(5, col('V')), 4);
    EXPECT_EQ(m(3, col('V')), 3);
    EXPECT_EQ(m(8, col('W')), -2);
}

TEST(PsiblastParser, FormatRoundTrip) {
    gen::Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        auto m = gen::raw_pssm(rng, gen::uniform(rng, 1, 60));
        EXPECT_EQ(parse_psiblast_pssm(format_psiblast_pssm(m)), m);
    }
}

TEST(PsiblastParser, SplitsRunTogetherNegativeScores) {
    std::vector<int> scores(20, -12);
    scores[0] = 3;
    auto text = format_psiblast_pssm({"M", scores});
    EXPECT_NE(text.find("-12-12"), std::string::npos);
    EXPECT_EQ(parse_psiblast_pssm(text).scores, scores);
}

TEST(PsiblastParser, RejectsBadText) {
    EXPECT_THROW(parse_psiblast_pssm("nothing here\n"), DataError);
    auto good = format_psiblast_pssm({"MK", std::vector<int>(40, 1)});
    auto bad = good;
    bad.replace(bad.rfind(" 1 "), 3, " x ");
    EXPECT_THROW(parse_psiblast_pssm(bad), DataError);
}

TEST(Normalize, SigmoidOfEachScore) {
    EXPECT_DOUBLE_EQ(oracle::sigmoid(0.0), 0.5);
    gen::Rng rng(4);
    auto m = gen::raw_pssm(rng, 15);
    auto n = sigmoid_normalize(m);
    for (std::size_t r = 0; r < 15; ++r)
        for (std::size_t c = 0; c < 20; ++c) {
            EXPECT_NEAR(n.values(r, c), oracle::sigmoid(m(r, c)), 1e-15);
            EXPECT_GE(n.values(r, c), 0.0);
            EXPECT_LE(n.values(r, c), 1.0);
        }
    auto half = sigmoid_normalize(RawPssm{"MK", std::vector<int>(40, 0)});
    for (double v : half.values.data()) EXPECT_EQ(v, 0.5);
}

TEST(Group, ColumnMeansPerGroup) {
    gen::Rng rng(5);
    auto m = gen::raw_pssm(rng, 12);
    auto n = sigmoid_normalize(m);
    auto g = group_columns(n);
    ASSERT_EQ(g.values.cols(), 10u);
    for (std::size_t r = 0; r < 12; ++r) {
        std::vector<double> sum(10, 0.0), cnt(10, 0.0);
        for (std::size_t c = 0; c < 20; ++c) {
            int gi = oracle::group_index(kAminoAcids[c]);
            sum[gi] += n.values(r, c);
            cnt[gi] += 1;
        }
        for (int gi = 0; gi < 10; ++gi) EXPECT_NEAR(g.values(r, gi), sum[gi] / cnt[gi], 1e-15);
    }
}

TEST(Group, GroupsPartitionTheAlphabet) {
    int total = 0;
    for (auto grp : kResidueGroups) total += static_cast<int>(grp.size());
    EXPECT_EQ(total, 20);
    for (char aa : kAminoAcids) EXPECT_EQ(group_of(aa), oracle::group_index(aa));
    EXPECT_EQ(group_of('X'), -1);
}

TEST(Encode, MatchesBruteForceOnRandomInputs) {
    gen::Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = gen::gpssm(rng, gen::uniform(rng, 10, 40));
        auto grid = to_grid(g);
        expect_close(encode_eg(g).values, oracle::eg(g.residues, grid), 1e-12);
        expect_close(encode_gdpc(g).values, oracle::gdpc(grid), 1e-12);
        expect_close(encode_er(g).values, oracle::er(grid), 1e-12);
    }
}

TEST(Encode, Dimensions) {
    EXPECT_EQ(feature_dim(Scheme::EG), 100u);
    EXPECT_EQ(feature_dim(Scheme::GDPC), 100u);
    EXPECT_EQ(feature_dim(Scheme::ER), 910u);
    gen::Rng rng(7);
    auto g = gen::gpssm(rng, 10);
    for (auto s : {Scheme::EG, Scheme::GDPC, Scheme::ER}) EXPECT_EQ(encode(g, s).values.size(), feature_dim(s));
}

TEST(Encode, ConstantProfileClosedForms) {
    for (double c : {0.0, 0.25, 0.5, 0.9}) {
        Gpssm g{"MLSITILFLAKW", Matrix(12, 10, c)};
        for (double v : encode_gdpc(g).values) EXPECT_NEAR(v, c * c, 1e-15);
        for (double v : encode_er(g).values) EXPECT_EQ(v, 0.0);
    }
}

TEST(Encode, EgZeroRowsForAbsentGroups) {
    gen::Rng rng(8);
    auto g = gen::gpssm(rng, 10);
    g.residues = "AAAAAAAAAA";  // group ATS only
    auto v = encode_eg(g).values;
    for (int gi = 0; gi < 10; ++gi)
        for (int j = 0; j < 10; ++j) {
            if (gi == 3) continue;
            EXPECT_EQ(v[gi * 10 + j], 0.0);
        }
}

TEST(Encode, TooShortSequencesAreRejected) {
    gen::Rng rng(9);
    auto g9 = gen::gpssm(rng, 9);
    EXPECT_THROW(encode_er(g9), DataError);
    EXPECT_NO_THROW(encode_gdpc(g9));
    auto g1 = gen::gpssm(rng, 1);
    EXPECT_THROW(encode_gdpc(g1), DataError);
    EXPECT_NO_THROW(encode_eg(g1));
    try {
        encode_er(g9);
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("at least 10"), std::string::npos);
    }
}

TEST(Encode, FixtureFeaturizes) {
    auto m = parse_psiblast_pssm(read_file(std::string(FLUHOST_TEST_DATA) + "/mlsitilfl.pssm"));
    auto eg = featurize(m, Scheme::EG);
    EXPECT_EQ(eg.values.size(), 100u);
    EXPECT_THROW(featurize(m, Scheme::ER), DataError);
    // EG row of group ML averages positions 1, 2, 7, 9.
    auto g = group_columns(sigmoid_normalize(m));
    for (int j = 0; j < 10; ++j) {
        double want = (g.values(0, j) + g.values(1, j) + g.values(6, j) + g.values(8, j)) / 4.0;
        EXPECT_NEAR(eg.values[10 + j], want, 1e-15);
    }
}

TEST(Scheme, Parsing) {
    EXPECT_EQ(parse_scheme("er"), Scheme::ER);
    EXPECT_EQ(parse_scheme("gdpc"), Scheme::GDPC);
    EXPECT_EQ(to_string(Scheme::EG), "eg");
    EXPECT_THROW(parse_scheme("xyz"), ConfigError);
}

TEST(Synth, OwnResidueStrictlyLargestAndDeterministic) {
    gen::Rng rng(10);
    auto res = gen::residues(rng, 40);
    auto a = synth_pssm(res, 11);
    EXPECT_EQ(a, synth_pssm(res, 11));
    EXPECT_NE(a, synth_pssm(res, 12));
    for (std::size_t r = 0; r < res.size(); ++r) {
        int self = a(r, col(res[r]));
        for (int c = 0; c < 20; ++c) {
            if (c != col(res[r])) {
                EXPECT_LT(a(r, c), self);
            }
        }
    }
    EXPECT_THROW(synth_pssm("MKX", 1), DataError);
}
