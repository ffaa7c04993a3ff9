#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fluhost::seqio {

enum class HostCoarse { Human, Avian, Swine };

std::string_view to_string(HostCoarse h) noexcept;

enum class Level { Coarse, Fine };

std::string_view to_string(Level l) noexcept;
Level parse_level(std::string_view s);

struct ProteinRecord {
    std::string id;
    std::string residues;
    std::optional<HostCoarse> coarse_label;
    std::optional<std::string> fine_label;
    std::map<std::string, std::string> metadata;

    // Label at the given level; throws DataError when absent.
    std::string label(Level level) const;

    // Parsed from the `incomplete` metadata key (true/yes/1).
    bool incomplete() const;

    friend bool operator==(const ProteinRecord&, const ProteinRecord&) = default;
};

struct ParsedHeader {
    std::string id;
    std::map<std::string, std::string> metadata;
};

// Maps the text after '>' to an id plus metadata. Swap in a custom mapper for
// header schemas other than `id|key=value|key=value`.
using HeaderMapper = std::function<ParsedHeader(std::string_view header)>;

ParsedHeader default_header_mapper(std::string_view header);

// Residues are uppercased and stripped of whitespace. The `host` metadata
// value, lowercased, becomes the fine label; the coarse label is looked up in
// the host taxonomy when the host is known.
std::vector<ProteinRecord> parse_fasta(std::string_view text,
                                       const HeaderMapper& mapper = default_header_mapper);

std::string serialize_fasta(std::span<const ProteinRecord> records, std::size_t line_width = 60);

struct Rejection {
    char letter;
    std::size_t position;  // 1-based

    std::string reason() const;
};

// nullopt means accepted.
std::optional<Rejection> validate_record(const ProteinRecord& r);

// Coarse host for a host name (case-insensitive); nullopt when unknown.
std::optional<HostCoarse> coarse_host_for(std::string_view host);

// All host names the taxonomy knows about, avian sub-hosts first.
const std::vector<std::string>& known_avian_hosts();

// Fills coarse labels from fine labels. Throws DataError listing every
// unmapped host value, or naming records without any host.
void assign_labels(std::vector<ProteinRecord>& records);

class LabeledDataset {
public:
    LabeledDataset() = default;

    // class_names are the distinct labels at `level`, sorted.
    LabeledDataset(std::vector<ProteinRecord> records, Level level);

    const std::vector<ProteinRecord>& records() const noexcept { return records_; }
    Level level() const noexcept { return level_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    // Class index per record.
    const std::vector<int>& labels() const noexcept { return labels_; }

    int class_index(std::string_view name) const;

private:
    std::vector<ProteinRecord> records_;
    Level level_ = Level::Coarse;
    std::vector<std::string> class_names_;
    std::vector<int> labels_;
};

struct DedupResult {
    LabeledDataset dataset;
    std::size_t dropped_duplicate = 0;
    std::size_t dropped_multilabel = 0;
};

// Identical residue strings collapse to their first occurrence when they agree
// on the label at `level`; conflicting groups are dropped entirely.
DedupResult dedup_and_resolve(std::vector<ProteinRecord> records, Level level);

LabeledDataset relabel(const LabeledDataset& ds, Level level);

struct ClassShare {
    std::string label;
    std::size_t count;
    double fraction;
};

std::vector<ClassShare> class_distribution(const LabeledDataset& ds);

struct FilterReport {
    std::size_t parsed = 0;
    std::size_t rejected_alphabet = 0;
    std::size_t dropped_duplicate = 0;
    std::size_t dropped_multilabel = 0;
    std::size_t kept = 0;

    nlohmann::json to_json() const;
};

struct Prepared {
    LabeledDataset dataset;
    FilterReport report;
};

// parse -> validate -> label -> dedup, as one step.
Prepared prepare(std::string_view fasta_text, Level level,
                 const HeaderMapper& mapper = default_header_mapper);

nlohmann::json to_json(const LabeledDataset& ds);
LabeledDataset dataset_from_json(const nlohmann::json& j);

}  // namespace fluhost::seqio
