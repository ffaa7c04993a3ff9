#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fluhost/seqio.hpp"

namespace fluhost::ngram {

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr std::size_t kMinN = 1;
inline constexpr std::size_t kMaxN = 8;

// Overlapping windows of n residues, in order.
std::vector<std::string> tokenize(std::string_view residues, std::size_t n);

class Vocabulary {
public:
    // Ids 2.. are assigned in first-appearance order over the corpus.
    static Vocabulary build(std::span<const std::vector<std::string>> corpus, std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return tokens_.size(); }

    // kOovId for tokens not in the table.
    int id(std::string_view token) const;
    const std::string& token(int id) const;

    // {n, max_len, tokens: [...]} with tokens in id order, PAD and OOV first.
    nlohmann::json to_json(std::size_t max_len) const;
    static Vocabulary from_json(const nlohmann::json& j, std::size_t* max_len = nullptr);

private:
    std::size_t n_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct TokenSequence {
    std::vector<int> ids;  // length max_len, left-padded
    std::size_t true_len = 0;

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Throws DataError when there are more tokens than max_len.
TokenSequence encode_pad(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len);

// Inverse of encode_pad: drops padding and maps ids back to tokens.
std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab);

// Token count of the longest sequence.
std::size_t max_token_count(const seqio::LabeledDataset& ds, std::size_t n);

struct TokenCount {
    std::string label;
    std::string token;
    std::size_t count;
    double fraction;  // of all n-grams in that class
};

// Most frequent n-grams per class; ties ordered by token text.
std::vector<TokenCount> token_frequencies(const seqio::LabeledDataset& ds, std::size_t n, std::size_t top_k);

std::string token_frequencies_csv(std::span<const TokenCount> rows);

}  // namespace fluhost::ngram
