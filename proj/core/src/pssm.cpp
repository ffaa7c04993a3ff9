#include "fluhost/pssm.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

#include "fluhost/alphabet.hpp"
#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::pssm {

namespace {

constexpr std::size_t kDataFields = 42;  // 20 scores, 20 percentages, 2 reals

std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        // Three-wide score columns run together when a score is <= -10.
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
               !(j > i && line[j] == '-' && std::isdigit(static_cast<unsigned char>(line[j - 1]))))
            ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool is_integer(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

int to_int(std::string_view s, std::size_t line_no) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("PSSM line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not an integer score");
    return v;
}

void require_length(const Gpssm& g, std::size_t min_len, std::string_view scheme) {
    if (g.values.cols() != kNumGroups) throw DataError("GPSSM must have 10 columns");
    if (g.values.rows() != g.residues.size()) throw DataError("GPSSM row count differs from residue count");
    if (g.residues.size() < min_len)
        throw DataError(std::string(scheme) + " encoding needs a sequence of at least " + std::to_string(min_len) +
                        " residues, got " + std::to_string(g.residues.size()));
}

}  // namespace

int group_of(char aa) noexcept {
    for (std::size_t g = 0; g < kNumGroups; ++g)
        if (kResidueGroups[g].find(aa) != std::string_view::npos) return static_cast<int>(g);
    return -1;
}

std::string_view to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::EG: return "eg";
        case Scheme::GDPC: return "gdpc";
        case Scheme::ER: return "er";
    }
    return "?";
}

Scheme parse_scheme(std::string_view s) {
    if (s == "eg" || s == "EG") return Scheme::EG;
    if (s == "gdpc" || s == "GDPC") return Scheme::GDPC;
    if (s == "er" || s == "ER") return Scheme::ER;
    throw ConfigError("unknown PSSM scheme '" + std::string(s) + "' (expected eg|gdpc|er)");
}

std::size_t feature_dim(Scheme s) noexcept { return s == Scheme::ER ? 910 : 100; }

RawPssm parse_psiblast_pssm(std::string_view text) {
    RawPssm m;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        auto tok = tokens(line);
        if (tok.empty()) continue;

        // Column header: must list the standard order.
        if (tok.size() >= 20 && tok[0] == "A" && tok[1] == "R") {
            for (std::size_t j = 0; j < 20; ++j)
                if (tok[j].size() != 1 || tok[j][0] != kAminoAcids[j])
                    throw DataError("PSSM line " + std::to_string(line_no) + ": unexpected column order");
            continue;
        }
        if (!is_integer(tok[0])) continue;

        if (tok.size() != kDataFields + 2)
            throw DataError("PSSM line " + std::to_string(line_no) + ": expected " + std::to_string(kDataFields) +
                            " data fields, found " + std::to_string(tok.size() < 2 ? 0 : tok.size() - 2));
        if (to_int(tok[0], line_no) != static_cast<int>(m.residues.size() + 1))
            throw DataError("PSSM line " + std::to_string(line_no) + ": position index out of sequence");
        if (tok[1].size() != 1 || !is_amino_acid(tok[1][0]))
            throw DataError("PSSM line " + std::to_string(line_no) + ": residue '" + std::string(tok[1]) +
                            "' is not one of the 20 canonical amino acids");
        m.residues.push_back(tok[1][0]);
        for (std::size_t j = 0; j < 20; ++j) m.scores.push_back(to_int(tok[2 + j], line_no));
    }
    if (m.residues.empty()) throw DataError("PSSM text contains no position rows");
    return m;
}

std::string format_psiblast_pssm(const RawPssm& m) {
    std::string out = "\nLast position-specific scoring matrix computed, weighted observed percentages rounded down, "
                      "information per position, and relative weight of gapless real matches to pseudocounts\n";
    out += "         ";
    for (char c : kAminoAcids) {
        out += "  ";
        out += c;
    }
    for (char c : kAminoAcids) {
        out += "   ";
        out += c;
    }
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.length(); ++i) {
        std::snprintf(buf, sizeof buf, "%5zu %c  ", i + 1, m.residues[i]);
        out += buf;
        for (std::size_t j = 0; j < 20; ++j) {
            std::snprintf(buf, sizeof buf, "%3d", m(i, j));
            out += buf;
        }
        for (std::size_t j = 0; j < 20; ++j) out += "   0";
        out += "  0.00 0.00\n";
    }
    out += "\n                      K         Lambda\n";
    return out;
}

NormalizedPssm sigmoid_normalize(const RawPssm& m) {
    NormalizedPssm out{m.residues, Matrix(m.length(), 20)};
    for (std::size_t i = 0; i < m.scores.size(); ++i)
        out.values.data()[i] = 1.0 / (1.0 + std::exp(-static_cast<double>(m.scores[i])));
    return out;
}

Gpssm group_columns(const NormalizedPssm& m) {
    std::array<int, 20> col_group{};
    std::array<double, kNumGroups> size{};
    for (std::size_t j = 0; j < 20; ++j) {
        col_group[j] = group_of(kAminoAcids[j]);
        size[static_cast<std::size_t>(col_group[j])] += 1.0;
    }
    const std::size_t L = m.values.rows();
    Gpssm g{m.residues, Matrix(L, kNumGroups)};
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < 20; ++j) g.values(i, static_cast<std::size_t>(col_group[j])) += m.values(i, j);
        for (std::size_t k = 0; k < kNumGroups; ++k) g.values(i, k) /= size[k];
    }
    return g;
}

FeatureVector encode_eg(const Gpssm& g) {
    require_length(g, 1, "EG");
    FeatureVector fv{Scheme::EG, std::vector<double>(100, 0.0)};
    std::array<std::size_t, kNumGroups> count{};
    for (std::size_t k = 0; k < g.residues.size(); ++k) {
        int gi = group_of(g.residues[k]);
        if (gi < 0) throw DataError(std::string("residue '") + g.residues[k] + "' has no group");
        auto row = static_cast<std::size_t>(gi);
        count[row]++;
        for (std::size_t j = 0; j < kNumGroups; ++j) fv.values[row * kNumGroups + j] += g.values(k, j);
    }
    for (std::size_t i = 0; i < kNumGroups; ++i)
        if (count[i] > 0)
            for (std::size_t j = 0; j < kNumGroups; ++j) fv.values[i * kNumGroups + j] /= static_cast<double>(count[i]);
    return fv;
}

FeatureVector encode_gdpc(const Gpssm& g) {
    require_length(g, 2, "GDPC");
    const std::size_t L = g.residues.size();
    FeatureVector fv{Scheme::GDPC, std::vector<double>(100, 0.0)};
    for (std::size_t k = 0; k + 1 < L; ++k)
        for (std::size_t i = 0; i < kNumGroups; ++i) {
            const double a = g.values(k, i);
            for (std::size_t j = 0; j < kNumGroups; ++j) fv.values[i * kNumGroups + j] += a * g.values(k + 1, j);
        }
    for (auto& v : fv.values) v /= static_cast<double>(L - 1);
    return fv;
}

FeatureVector encode_er(const Gpssm& g) {
    constexpr std::size_t kMaxGap = 9;
    require_length(g, kMaxGap + 1, "ER");
    const std::size_t L = g.residues.size();
    FeatureVector fv{Scheme::ER, std::vector<double>(910, 0.0)};
    for (std::size_t i = 0; i < kNumGroups; ++i)
        for (std::size_t j = 0; j < kNumGroups; ++j)
            for (std::size_t t = 1; t <= kMaxGap; ++t) {
                double s = 0.0;
                for (std::size_t k = 0; k + t < L; ++k) {
                    const double d = g.values(k, i) - g.values(k + t, j);
                    s += d * d / 2.0;
                }
                fv.values[(i * kNumGroups + j) * kMaxGap + (t - 1)] = s / static_cast<double>(L - t);
            }
    for (std::size_t i = 0; i < kNumGroups; ++i) {
        // Shifted by the first value so a constant column gives exactly 0.
        const double x0 = g.values(0, i);
        double mean = 0.0;
        for (std::size_t k = 0; k < L; ++k) mean += g.values(k, i) - x0;
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double d = (g.values(k, i) - x0) - mean;
            var += d * d;
        }
        fv.values[900 + i] = var / static_cast<double>(L);
    }
    return fv;
}

FeatureVector encode(const Gpssm& g, Scheme scheme) {
    switch (scheme) {
        case Scheme::EG: return encode_eg(g);
        case Scheme::GDPC: return encode_gdpc(g);
        case Scheme::ER: return encode_er(g);
    }
    throw ConfigError("unknown scheme");
}

FeatureVector featurize(const RawPssm& m, Scheme scheme) {
    return encode(group_columns(sigmoid_normalize(m)), scheme);
}

RawPssm synth_pssm(std::string_view residues, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, fnv1a64(residues)));
    std::uniform_int_distribution<int> background(-4, 2);
    std::uniform_int_distribution<int> own(7, 9);
    RawPssm m;
    m.residues = std::string(residues);
    m.scores.resize(residues.size() * 20);
    for (std::size_t i = 0; i < residues.size(); ++i) {
        const int self = amino_acid_index(residues[i]);
        if (self < 0) throw DataError(std::string("cannot synthesize a PSSM for residue '") + residues[i] + "'");
        const int self_group = group_of(residues[i]);
        for (std::size_t j = 0; j < 20; ++j) {
            int v = background(rng);
            if (group_of(kAminoAcids[j]) == self_group) v += 2;
            m(i, j) = v;
        }
        m(i, static_cast<std::size_t>(self)) = own(rng);
    }
    return m;
}

}  // namespace fluhost::pssm
