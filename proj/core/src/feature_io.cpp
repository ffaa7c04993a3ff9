#include "fluhost/feature_io.hpp"

#include <charconv>
#include <cstdio>

#include "fluhost/bytes.hpp"
#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::pssm {

namespace {

constexpr std::string_view kMagic = "FLUHFEAT";
constexpr std::uint32_t kVersion = 1;

std::uint32_t scheme_code(Scheme s) { return static_cast<std::uint32_t>(s); }

Scheme scheme_from_code(std::uint32_t c) {
    if (c > 2) throw DataError("feature file has unknown scheme code " + std::to_string(c));
    return static_cast<Scheme>(c);
}

// Shortest text that parses back to the same double.
void append_double(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
}

}  // namespace

std::string to_csv(const FeatureTable& t) {
    std::string out = "id,label,scheme";
    for (std::size_t c = 0; c < t.values.cols(); ++c) out += ",v" + std::to_string(c);
    out += '\n';
    for (std::size_t r = 0; r < t.values.rows(); ++r) {
        out += t.ids[r];
        out += ',';
        out += t.labels[r];
        out += ',';
        out += to_string(t.scheme);
        for (double v : t.values.row(r)) {
            out += ',';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

FeatureTable features_from_csv(std::string_view text) {
    FeatureTable t;
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    bool first = true;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (first) {
            if (fields.size() < 4 || fields[0] != "id" || fields[1] != "label" || fields[2] != "scheme")
                throw DataError("features CSV: bad header");
            cols = fields.size() - 3;
            first = false;
            continue;
        }
        if (fields.size() != cols + 3)
            throw DataError("features CSV line " + std::to_string(line_no) + ": wrong field count");
        if (t.ids.empty()) t.scheme = parse_scheme(fields[2]);
        t.ids.push_back(fields[0]);
        t.labels.push_back(fields[1]);
        for (std::size_t c = 0; c < cols; ++c) {
            double v = 0;
            const auto& f = fields[3 + c];
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || p != f.data() + f.size())
                throw DataError("features CSV line " + std::to_string(line_no) + ": bad number '" + f + "'");
            data.push_back(v);
        }
    }
    if (first) throw DataError("features CSV is empty");
    t.values = Matrix(t.ids.size(), cols);
    t.values.data() = std::move(data);
    return t;
}

std::string to_binary(const FeatureTable& t) {
    ByteWriter w;
    w.raw(kMagic);
    w.u32(kVersion);
    w.u32(scheme_code(t.scheme));
    w.u64(t.values.rows());
    w.u64(t.values.cols());
    for (const auto& id : t.ids) w.str(id);
    for (const auto& l : t.labels) w.str(l);
    for (std::size_t c = 0; c < t.values.cols(); ++c)
        for (std::size_t r = 0; r < t.values.rows(); ++r) w.f64(t.values(r, c));
    return w.take();
}

FeatureTable features_from_binary(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(kMagic.size()) != kMagic) throw DataError("not a fluhost feature file (bad magic)");
    if (auto v = r.u32(); v != kVersion) throw DataError("unsupported feature file version " + std::to_string(v));
    FeatureTable t;
    t.scheme = scheme_from_code(r.u32());
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows > r.remaining() || cols > r.remaining()) throw DataError("truncated binary data");
    for (std::uint64_t i = 0; i < rows; ++i) t.ids.push_back(r.str());
    for (std::uint64_t i = 0; i < rows; ++i) t.labels.push_back(r.str());
    t.values = Matrix(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t i = 0; i < rows; ++i) t.values(i, c) = r.f64();
    if (!r.done()) throw DataError("trailing bytes in feature file");
    return t;
}

}  // namespace fluhost::pssm
