#include <benchmark/benchmark.h>

#include <random>

#include "fluhost/alphabet.hpp"
#include "fluhost/ensemble.hpp"
#include "fluhost/ngram.hpp"
#include "fluhost/nn/models.hpp"
#include "fluhost/pssm.hpp"

using namespace fluhost;

namespace {

pssm::RawPssm profile(std::size_t len) {
    std::mt19937_64 rng(1);
    std::string res(len, 'A');
    for (auto& c : res) c = kAminoAcids[rng() % 20];
    return pssm::synth_pssm(res, 3);
}

void BM_Featurize(benchmark::State& state, pssm::Scheme scheme) {
    auto m = profile(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(pssm::featurize(m, scheme));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Featurize, eg, pssm::Scheme::EG)->Arg(566);
BENCHMARK_CAPTURE(BM_Featurize, gdpc, pssm::Scheme::GDPC)->Arg(566);
BENCHMARK_CAPTURE(BM_Featurize, er, pssm::Scheme::ER)->Arg(566);

void BM_Tokenize(benchmark::State& state) {
    auto m = profile(566);
    for (auto _ : state) benchmark::DoNotOptimize(ngram::tokenize(m.residues, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Tokenize)->Arg(3)->Arg(6);

void BM_TreeFit(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> d;
    const auto n = static_cast<std::size_t>(state.range(0));
    Matrix X(n, 100);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 3);
        for (std::size_t j = 0; j < 100; ++j) X(i, j) = d(rng) + (j == static_cast<std::size_t>(y[i]) ? 1.0 : 0.0);
    }
    for (auto _ : state) {
        std::mt19937_64 trng(0);
        benchmark::DoNotOptimize(ensemble::fit_tree(X, y, 3, {10, 10}, trng));
    }
}
BENCHMARK(BM_TreeFit)->Arg(500)->Arg(2000);

void BM_TransformerForward(benchmark::State& state) {
    nn::ModelSpec spec;
    spec.kind = nn::ModelKind::Transformer;
    spec.input = nn::InputKind::Tokens;
    spec.num_classes = 3;
    spec.vocab_size = 8000;
    spec.max_len = 48;
    spec.embed_dim = 32;
    nn::Network net(spec, 1);
    std::vector<int> ids(64 * 48);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(2 + (i * 7919) % 7998);
    auto in = nn::Inputs::from_tokens(ids, 48);
    for (auto _ : state) benchmark::DoNotOptimize(net.predict_proba(in));
}
BENCHMARK(BM_TransformerForward);

}  // namespace
BENCHMARK_MAIN();
