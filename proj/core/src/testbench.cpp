#include "fluhost/testbench.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fluhost/alphabet.hpp"
#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::testbench {

namespace {

struct DefaultClass {
    const char* name;
    const char* motif;
};

constexpr DefaultClass kDefaults[] = {
    {"human", "WWWWYYYYFFFF"},   {"chicken", "CCCCGGGGPPPP"}, {"swine", "KKKKRRRREEEE"},
    {"duck", "MMMMLLLLIIII"},    {"goose", "NNNNHHHHQQQQ"},   {"turkey", "AAAATTTTSSSS"},
    {"quail", "DDDDVVVVWWWW"},   {"mallard", "HHHHCCCCYYYY"},
};

}  // namespace

std::size_t count_occurrences(std::string_view hay, std::string_view needle) noexcept {
    if (needle.empty() || needle.size() > hay.size()) return 0;
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

void SynthSpec::validate() const {
    if (classes.empty()) throw ConfigError("synthetic spec needs at least one class");
    if (records == 0) throw ConfigError("record count must be positive");
    if (min_len == 0 || min_len > max_len)
        throw ConfigError("length range [" + std::to_string(min_len) + ", " + std::to_string(max_len) + "] is empty");
    double total = 0.0;
    for (const auto& c : classes) {
        if (c.name.empty()) throw ConfigError("class name is empty");
        if (!(c.proportion >= 0.0)) throw ConfigError("class '" + c.name + "' has a negative proportion");
        if (c.motif.empty()) throw ConfigError("class '" + c.name + "' has an empty motif");
        for (char ch : c.motif)
            if (!is_amino_acid(ch))
                throw ConfigError("motif of class '" + c.name + "' has non-canonical residue '" + ch + "'");
        if (c.motif.size() > min_len)
            throw DataError("motif of class '" + c.name + "' (" + std::to_string(c.motif.size()) +
                            " residues) is longer than the minimum length " + std::to_string(min_len));
        total += c.proportion;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("class proportions sum to " + std::to_string(total));
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = 0; j < classes.size(); ++j)
            if (i != j && classes[i].motif.find(classes[j].motif) != std::string::npos)
                throw ConfigError("motif of class '" + classes[j].name + "' occurs inside that of '" +
                                  classes[i].name + "'");
}

std::size_t max_default_classes() noexcept { return std::size(kDefaults); }

SynthSpec default_spec(std::size_t records, std::size_t classes, std::uint64_t seed) {
    if (classes < 2 || classes > max_default_classes())
        throw ConfigError("class count must be between 2 and " + std::to_string(max_default_classes()));
    SynthSpec s;
    s.records = records;
    s.seed = seed;
    for (std::size_t i = 0; i < classes; ++i)
        s.classes.push_back({kDefaults[i].name, kDefaults[i].motif, 1.0 / static_cast<double>(classes)});
    return s;
}

std::vector<std::size_t> class_counts(const SynthSpec& spec) {
    const std::size_t C = spec.classes.size();
    std::vector<std::size_t> counts(C);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < C; ++c) {
        const double exact = spec.classes[c].proportion * static_cast<double>(spec.records);
        counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += counts[c];
        rem.emplace_back(exact - static_cast<double>(counts[c]), c);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < spec.records; ++i, ++assigned) counts[rem[i % C].second]++;
    return counts;
}

seqio::LabeledDataset generate(const SynthSpec& spec) {
    spec.validate();
    auto counts = class_counts(spec);
    std::vector<std::size_t> cls;
    for (std::size_t c = 0; c < counts.size(); ++c) cls.insert(cls.end(), counts[c], c);
    std::mt19937_64 order_rng(spec.seed);
    for (std::size_t i = cls.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(cls[i - 1], cls[pick(order_rng)]);
    }

    constexpr int kMaxAttempts = 10000;
    const std::size_t width = std::to_string(spec.records).size();
    std::vector<seqio::ProteinRecord> records(spec.records);
    for (std::size_t i = 0; i < spec.records; ++i) {
        const auto& k = spec.classes[cls[i]];
        std::mt19937_64 rng(derive_seed(spec.seed, i + 1));
        std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);
        std::uniform_int_distribution<std::size_t> aa(0, kAminoAcids.size() - 1);
        std::string seq;
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            const std::size_t L = len_dist(rng);
            seq.resize(L);
            for (auto& ch : seq) ch = kAminoAcids[aa(rng)];
            std::uniform_int_distribution<std::size_t> at(0, L - k.motif.size());
            seq.replace(at(rng), k.motif.size(), k.motif);
            ok = count_occurrences(seq, k.motif) == 1;
            for (const auto& other : spec.classes)
                if (&other != &k && seq.find(other.motif) != std::string::npos) ok = false;
        }
        if (!ok) throw DataError("could not place the motif of class '" + k.name + "' exactly once");

        std::string id = std::to_string(i + 1);
        id = "synth_" + std::string(width - id.size(), '0') + id;
        auto& r = records[i];
        r.id = id;
        r.residues = seq;
        r.fine_label = k.name;
        r.coarse_label = seqio::coarse_host_for(k.name);
        r.metadata = {{"host", k.name}};
    }
    return seqio::LabeledDataset(std::move(records), seqio::Level::Fine);
}

std::vector<pssm::RawPssm> synth_pssms(const seqio::LabeledDataset& ds, std::uint64_t seed) {
    std::vector<pssm::RawPssm> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records()) out.push_back(pssm::synth_pssm(r.residues, seed));
    return out;
}

}  // namespace fluhost::testbench
