#include "fluhost/ngram.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "fluhost/error.hpp"

namespace fluhost::ngram {

namespace {

void check_n(std::size_t n) {
    if (n < kMinN || n > kMaxN)
        throw ConfigError("n-gram size " + std::to_string(n) + " outside [1, 8]");
}

}  // namespace

std::vector<std::string> tokenize(std::string_view residues, std::size_t n) {
    check_n(n);
    if (n > residues.size())
        throw DataError("sequence of length " + std::to_string(residues.size()) + " is too short for " +
                        std::to_string(n) + "-grams");
    std::vector<std::string> out;
    out.reserve(residues.size() - n + 1);
    for (std::size_t i = 0; i + n <= residues.size(); ++i) out.emplace_back(residues.substr(i, n));
    return out;
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> corpus, std::size_t n) {
    check_n(n);
    if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
    Vocabulary v;
    v.n_ = n;
    v.tokens_ = {"<pad>", "<oov>"};
    for (const auto& sentence : corpus)
        for (const auto& tok : sentence) {
            if (tok.size() != n) throw DataError("token '" + tok + "' is not a " + std::to_string(n) + "-gram");
            if (v.index_.try_emplace(tok, static_cast<int>(v.tokens_.size())).second) v.tokens_.push_back(tok);
        }
    return v;
}

int Vocabulary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kOovId : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw DataError("token id " + std::to_string(id) + " outside vocabulary");
    return tokens_[static_cast<std::size_t>(id)];
}

nlohmann::json Vocabulary::to_json(std::size_t max_len) const {
    return {{"n", n_}, {"max_len", max_len}, {"tokens", tokens_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j, std::size_t* max_len) {
    try {
        Vocabulary v;
        v.n_ = j.at("n").get<std::size_t>();
        check_n(v.n_);
        v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
        if (v.tokens_.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<oov>")
            throw DataError("vocabulary must start with <pad>, <oov>");
        for (std::size_t i = 2; i < v.tokens_.size(); ++i)
            if (!v.index_.try_emplace(v.tokens_[i], static_cast<int>(i)).second)
                throw DataError("duplicate vocabulary token '" + v.tokens_[i] + "'");
        if (max_len) *max_len = j.at("max_len").get<std::size_t>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed vocabulary JSON: ") + e.what());
    }
}

TokenSequence encode_pad(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len) {
    if (max_len < 1) throw ConfigError("max_len must be at least 1");
    if (tokens.size() > max_len)
        throw DataError("sequence has " + std::to_string(tokens.size()) + " tokens, more than max_len " +
                        std::to_string(max_len));
    TokenSequence out;
    out.true_len = tokens.size();
    out.ids.assign(max_len - tokens.size(), kPadId);
    for (const auto& t : tokens) out.ids.push_back(vocab.id(t));
    return out;
}

std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab) {
    std::vector<std::string> out;
    for (std::size_t i = seq.ids.size() - seq.true_len; i < seq.ids.size(); ++i) out.push_back(vocab.token(seq.ids[i]));
    return out;
}

std::size_t max_token_count(const seqio::LabeledDataset& ds, std::size_t n) {
    std::size_t best = 0;
    for (const auto& r : ds.records()) {
        if (r.residues.size() < n)
            throw DataError("record '" + r.id + "' is shorter than n=" + std::to_string(n));
        best = std::max(best, r.residues.size() - n + 1);
    }
    return best;
}

std::vector<TokenCount> token_frequencies(const seqio::LabeledDataset& ds, std::size_t n, std::size_t top_k) {
    const auto& names = ds.class_names();
    std::vector<std::map<std::string, std::size_t>> counts(names.size());
    std::vector<std::size_t> totals(names.size(), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto c = static_cast<std::size_t>(ds.labels()[i]);
        for (auto& t : tokenize(ds.records()[i].residues, n)) {
            counts[c][t]++;
            totals[c]++;
        }
    }
    std::vector<TokenCount> out;
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<std::pair<std::string, std::size_t>> rows(counts[c].begin(), counts[c].end());
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        if (rows.size() > top_k) rows.resize(top_k);
        for (auto& [tok, cnt] : rows)
            out.push_back({names[c], tok, cnt, static_cast<double>(cnt) / static_cast<double>(totals[c])});
    }
    return out;
}

std::string token_frequencies_csv(std::span<const TokenCount> rows) {
    std::string out = "class,token,count,fraction\n";
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", r.fraction);
        out += r.label + "," + r.token + "," + std::to_string(r.count) + "," + buf + "\n";
    }
    return out;
}

}  // namespace fluhost::ngram
