#include "fluhost/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "fluhost/alphabet.hpp"
#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::seqio {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const std::vector<std::string> kAvianHosts = {
    "avian",    "bird",      "chicken",  "duck",     "mallard",   "goose",   "turkey",
    "quail",    "gull",      "pheasant", "pigeon",   "ostrich",   "teal",    "wigeon",
    "shorebird", "swan",     "guineafowl", "partridge", "peafowl", "egret",  "heron",
    "crow",     "sparrow",   "magpie",   "tern",     "shoveler",  "pintail", "wild bird",
};

void finish_record(std::vector<ProteinRecord>& out, ParsedHeader& header, std::string& seq,
                   std::set<std::string>& seen) {
    if (seq.empty()) throw DataError("record '" + header.id + "' has an empty sequence");
    if (!seen.insert(header.id).second)
        throw DataError("duplicate record id '" + header.id + "'");
    ProteinRecord r;
    r.id = std::move(header.id);
    r.residues = std::move(seq);
    r.metadata = std::move(header.metadata);
    if (auto it = r.metadata.find("host"); it != r.metadata.end()) {
        r.fine_label = lowercase(trim(it->second));
        r.coarse_label = coarse_host_for(*r.fine_label);
    }
    out.push_back(std::move(r));
    seq.clear();
}

}  // namespace

std::string_view to_string(HostCoarse h) noexcept {
    switch (h) {
        case HostCoarse::Human: return "human";
        case HostCoarse::Avian: return "avian";
        case HostCoarse::Swine: return "swine";
    }
    return "?";
}

std::string_view to_string(Level l) noexcept { return l == Level::Coarse ? "coarse" : "fine"; }

Level parse_level(std::string_view s) {
    if (s == "coarse") return Level::Coarse;
    if (s == "fine") return Level::Fine;
    throw ConfigError("unknown taxonomic level '" + std::string(s) + "' (expected coarse|fine)");
}

std::string ProteinRecord::label(Level level) const {
    if (level == Level::Coarse) {
        if (!coarse_label) throw DataError("record '" + id + "' has no coarse host label");
        return std::string(to_string(*coarse_label));
    }
    if (!coarse_label && !fine_label) throw DataError("record '" + id + "' has no host label");
    if (coarse_label && *coarse_label != HostCoarse::Avian) return std::string(to_string(*coarse_label));
    if (!fine_label) throw DataError("record '" + id + "' has no fine host label");
    return *fine_label;
}

bool ProteinRecord::incomplete() const {
    auto it = metadata.find("incomplete");
    if (it == metadata.end()) return false;
    auto v = lowercase(trim(it->second));
    return v == "true" || v == "yes" || v == "1";
}

ParsedHeader default_header_mapper(std::string_view header) {
    auto parts = split(header, '|');
    ParsedHeader out;
    out.id = std::string(trim(parts.front()));
    if (out.id.empty()) throw DataError("header has an empty id");
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto field = trim(parts[i]);
        if (field.empty()) continue;
        auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw DataError("header of '" + out.id + "': field '" + std::string(field) + "' is not key=value");
        out.metadata[lowercase(trim(field.substr(0, eq)))] = std::string(trim(field.substr(eq + 1)));
    }
    return out;
}

std::vector<ProteinRecord> parse_fasta(std::string_view text, const HeaderMapper& mapper) {
    std::vector<ProteinRecord> out;
    std::set<std::string> seen;
    std::optional<ParsedHeader> header;
    std::string seq;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        if (line.front() == '>') {
            if (header) finish_record(out, *header, seq, seen);
            header = mapper(line.substr(1));
            continue;
        }
        if (!header)
            throw DataError("line " + std::to_string(line_no) + ": sequence data before any '>' header");
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (header) finish_record(out, *header, seq, seen);
    return out;
}

std::string serialize_fasta(std::span<const ProteinRecord> records, std::size_t line_width) {
    std::string out;
    for (const auto& r : records) {
        out += '>';
        out += r.id;
        auto meta = r.metadata;
        if (r.fine_label && !meta.count("host")) meta["host"] = *r.fine_label;
        for (const auto& [k, v] : meta) {
            out += '|';
            out += k;
            out += '=';
            out += v;
        }
        out += '\n';
        for (std::size_t i = 0; i < r.residues.size(); i += line_width) {
            out.append(r.residues, i, line_width);
            out += '\n';
        }
    }
    return out;
}

std::string Rejection::reason() const {
    return std::string(1, letter) + " at position " + std::to_string(position);
}

std::optional<Rejection> validate_record(const ProteinRecord& r) {
    for (std::size_t i = 0; i < r.residues.size(); ++i)
        if (!is_amino_acid(r.residues[i])) return Rejection{r.residues[i], i + 1};
    return std::nullopt;
}

std::optional<HostCoarse> coarse_host_for(std::string_view host) {
    auto h = lowercase(trim(host));
    if (h == "human") return HostCoarse::Human;
    if (h == "swine" || h == "pig") return HostCoarse::Swine;
    if (std::find(kAvianHosts.begin(), kAvianHosts.end(), h) != kAvianHosts.end()) return HostCoarse::Avian;
    return std::nullopt;
}

const std::vector<std::string>& known_avian_hosts() { return kAvianHosts; }

void assign_labels(std::vector<ProteinRecord>& records) {
    std::set<std::string> unknown;
    for (auto& r : records) {
        if (!r.fine_label) {
            if (r.coarse_label) continue;
            throw DataError("record '" + r.id + "' has no host label");
        }
        auto coarse = coarse_host_for(*r.fine_label);
        if (!coarse) {
            unknown.insert(*r.fine_label);
            continue;
        }
        r.coarse_label = coarse;
    }
    if (!unknown.empty()) {
        std::string msg = "unmapped host value(s):";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw DataError(msg);
    }
}

LabeledDataset::LabeledDataset(std::vector<ProteinRecord> records, Level level)
    : records_(std::move(records)), level_(level) {
    std::set<std::string> names;
    std::set<std::string> ids;
    std::vector<std::string> per_record;
    per_record.reserve(records_.size());
    for (const auto& r : records_) {
        if (r.residues.empty()) throw DataError("record '" + r.id + "' has an empty sequence");
        if (!ids.insert(r.id).second) throw DataError("duplicate record id '" + r.id + "'");
        per_record.push_back(r.label(level));
        names.insert(per_record.back());
    }
    class_names_.assign(names.begin(), names.end());
    labels_.reserve(records_.size());
    for (const auto& l : per_record) labels_.push_back(class_index(l));
}

int LabeledDataset::class_index(std::string_view name) const {
    auto it = std::lower_bound(class_names_.begin(), class_names_.end(), name);
    if (it == class_names_.end() || *it != name)
        throw DataError("unknown class label '" + std::string(name) + "'");
    return static_cast<int>(it - class_names_.begin());
}

DedupResult dedup_and_resolve(std::vector<ProteinRecord> records, Level level) {
    struct Group {
        std::size_t first;
        std::size_t count = 0;
        std::set<std::string> labels;
    };
    std::unordered_map<std::string, Group> groups;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = groups.try_emplace(records[i].residues, Group{i, 0, {}});
        if (inserted) order.push_back(records[i].residues);
        it->second.count++;
        it->second.labels.insert(records[i].label(level));
    }
    DedupResult out;
    std::vector<ProteinRecord> kept;
    for (const auto& key : order) {
        const auto& g = groups.at(key);
        if (g.labels.size() > 1) {
            out.dropped_multilabel += g.count;
            continue;
        }
        out.dropped_duplicate += g.count - 1;
        kept.push_back(std::move(records[g.first]));
    }
    out.dataset = LabeledDataset(std::move(kept), level);
    return out;
}

LabeledDataset relabel(const LabeledDataset& ds, Level level) {
    auto records = ds.records();
    assign_labels(records);
    return LabeledDataset(std::move(records), level);
}

std::vector<ClassShare> class_distribution(const LabeledDataset& ds) {
    std::vector<ClassShare> out;
    if (ds.empty()) return out;
    std::vector<std::size_t> counts(ds.class_names().size(), 0);
    for (int l : ds.labels()) counts[static_cast<std::size_t>(l)]++;
    const double n = static_cast<double>(ds.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        out.push_back({ds.class_names()[c], counts[c], static_cast<double>(counts[c]) / n});
    return out;
}

nlohmann::json FilterReport::to_json() const {
    return {{"parsed", parsed},
            {"rejected_alphabet", rejected_alphabet},
            {"dropped_duplicate", dropped_duplicate},
            {"dropped_multilabel", dropped_multilabel},
            {"kept", kept}};
}

Prepared prepare(std::string_view fasta_text, Level level, const HeaderMapper& mapper) {
    auto records = parse_fasta(fasta_text, mapper);
    FilterReport report;
    report.parsed = records.size();
    std::vector<ProteinRecord> valid;
    for (auto& r : records) {
        if (validate_record(r)) {
            report.rejected_alphabet++;
            continue;
        }
        valid.push_back(std::move(r));
    }
    assign_labels(valid);
    auto dedup = dedup_and_resolve(std::move(valid), level);
    report.dropped_duplicate = dedup.dropped_duplicate;
    report.dropped_multilabel = dedup.dropped_multilabel;
    report.kept = dedup.dataset.size();
    return {std::move(dedup.dataset), report};
}

nlohmann::json to_json(const LabeledDataset& ds) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : ds.records()) {
        nlohmann::json j = {{"id", r.id}, {"residues", r.residues}, {"metadata", r.metadata}};
        j["coarse"] = r.coarse_label ? nlohmann::json(to_string(*r.coarse_label)) : nlohmann::json();
        j["fine"] = r.fine_label ? nlohmann::json(*r.fine_label) : nlohmann::json();
        recs.push_back(std::move(j));
    }
    return {{"level", to_string(ds.level())}, {"class_names", ds.class_names()}, {"records", recs}};
}

LabeledDataset dataset_from_json(const nlohmann::json& j) {
    try {
        std::vector<ProteinRecord> records;
        for (const auto& jr : j.at("records")) {
            ProteinRecord r;
            r.id = jr.at("id").get<std::string>();
            r.residues = jr.at("residues").get<std::string>();
            if (jr.contains("metadata")) r.metadata = jr.at("metadata").get<std::map<std::string, std::string>>();
            if (jr.contains("fine") && !jr.at("fine").is_null()) r.fine_label = jr.at("fine").get<std::string>();
            if (jr.contains("coarse") && !jr.at("coarse").is_null()) {
                auto c = coarse_host_for(jr.at("coarse").get<std::string>());
                if (!c) throw DataError("record '" + r.id + "': bad coarse label");
                r.coarse_label = c;
            }
            if (auto bad = validate_record(r))
                throw DataError("record '" + r.id + "': invalid residue " + bad->reason());
            records.push_back(std::move(r));
        }
        return LabeledDataset(std::move(records), parse_level(j.at("level").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed dataset JSON: ") + e.what());
    }
}

}  // namespace fluhost::seqio
