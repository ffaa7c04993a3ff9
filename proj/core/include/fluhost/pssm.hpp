#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fluhost/matrix.hpp"

namespace fluhost::pssm {

inline constexpr std::size_t kNumGroups = 10;

// Ten physicochemical residue groups G1..G10.
inline constexpr std::array<std::string_view, kNumGroups> kResidueGroups = {
    "FYW", "ML", "IV", "ATS", "NH", "QED", "RK", "C", "G", "P"};

// Zero-based group of a canonical amino acid, or -1.
int group_of(char aa) noexcept;

// L x 20 log-odds scores, columns in kAminoAcids order.
struct RawPssm {
    std::string residues;
    std::vector<int> scores;  // row-major

    std::size_t length() const noexcept { return residues.size(); }
    int operator()(std::size_t row, std::size_t col) const { return scores[row * 20 + col]; }
    int& operator()(std::size_t row, std::size_t col) { return scores[row * 20 + col]; }

    friend bool operator==(const RawPssm&, const RawPssm&) = default;
};

// L x 20, every entry in [0, 1].
struct NormalizedPssm {
    std::string residues;
    Matrix values;
};

// L x 10 grouped PSSM.
struct Gpssm {
    std::string residues;
    Matrix values;
};

enum class Scheme { EG, GDPC, ER };

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view s);
std::size_t feature_dim(Scheme s) noexcept;

struct FeatureVector {
    Scheme scheme;
    std::vector<double> values;
};

// Reads PSI-BLAST `-out_ascii_pssm` output. Only the 20 log-odds columns and
// the residue column of each position row are kept.
RawPssm parse_psiblast_pssm(std::string_view text);

// Writes a RawPssm in the same ASCII layout (percentage and weight columns
// are filled with zeros).
std::string format_psiblast_pssm(const RawPssm& m);

NormalizedPssm sigmoid_normalize(const RawPssm& m);

// Column j of the output is the mean of the input columns in group j.
Gpssm group_columns(const NormalizedPssm& m);

// 10x10 mean of GPSSM rows per residue group of the sequence position,
// flattened row-major. Groups absent from the sequence give zero rows.
FeatureVector encode_eg(const Gpssm& g);

// 10x10 grouped dipeptide composition. Requires L >= 2.
FeatureVector encode_gdpc(const Gpssm& g);

// 900 gapped pseudo-composition values laid out (i, j, t) with t innermost,
// followed by the 10 column variances. Requires L >= 10.
FeatureVector encode_er(const Gpssm& g);

FeatureVector encode(const Gpssm& g, Scheme scheme);

// Raw PSSM -> normalize -> group -> encode.
FeatureVector featurize(const RawPssm& m, Scheme scheme);

// Deterministic stand-in for a PSI-BLAST profile: each row's own residue gets
// the strictly largest score, same-group residues get a small bonus.
RawPssm synth_pssm(std::string_view residues, std::uint64_t seed);

}  // namespace fluhost::pssm
