#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluhost/error.hpp"
#include "fluhost/eval/cv.hpp"
#include "fluhost/eval/disagreement.hpp"
#include "fluhost/eval/metrics.hpp"
#include "fluhost/feature_io.hpp"
#include "fluhost/ngram.hpp"
#include "fluhost/pipeline.hpp"
#include "fluhost/pssm.hpp"
#include "fluhost/seqio.hpp"
#include "fluhost/testbench.hpp"
#include "fluhost/util.hpp"

#ifndef FLUHOST_VERSION
#define FLUHOST_VERSION "0.0.0"
#endif

namespace fluhost::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Output directory plus the bookkeeping every subcommand shares.
class Run {
public:
    Run(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)) {
        fs::create_directories(out_);
        log("started " + command_);
    }

    const fs::path& dir() const noexcept { return out_; }

    void write(const std::string& name, std::string_view contents) {
        write_file_atomic(out_ / name, contents);
        outputs_.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void log(const std::string& line) {
        std::ofstream f(out_ / "run.log", std::ios::app);
        f << timestamp() << " " << line << "\n";
    }

    void finish(const json& config, std::optional<std::uint64_t> seed, const std::string& config_hash = "") {
        json m = {{"tool", "fluhost"},
                  {"version", FLUHOST_VERSION},
                  {"command", command_},
                  {"config", config},
                  {"config_hash", config_hash.empty() ? hex64(fnv1a64(config.dump())) : config_hash},
                  {"seed", seed ? json(*seed) : json()},
                  {"outputs", outputs_},
                  {"compiler", __VERSION__},
                  {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        write_file_atomic(out_ / "manifest.json", m.dump(2) + "\n");
        log("finished " + command_);
    }

private:
    std::string command_;
    fs::path out_;
    std::vector<std::string> outputs_;
};

json read_json(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("file " + p.string() + " does not exist");
    try {
        return json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

seqio::LabeledDataset load_dataset(const fs::path& p) {
    try {
        return seqio::dataset_from_json(read_json(p));
    } catch (const json::exception& e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

std::string read_input(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("file " + p.string() + " does not exist");
    return read_file(p);
}

pipeline::Grid parse_grid(const std::vector<std::string>& items) {
    pipeline::Grid g;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("grid entry '" + item + "' is not key=v1,v2,...");
        std::vector<double> vals;
        for (const auto& tok : split(item.substr(eq + 1), ',')) {
            try {
                std::size_t used = 0;
                const std::string t(trim(tok));
                vals.push_back(std::stod(t, &used));
                if (used != t.size()) throw std::invalid_argument(t);
            } catch (const std::logic_error&) {
                throw ConfigError("grid value '" + tok + "' is not a number");
            }
        }
        g[item.substr(0, eq)] = vals;
    }
    return g;
}

// Options shared by the model-building subcommands.
struct ModelFlags {
    std::string config;
    std::string data;
    std::string model;
    std::string scheme;
    std::size_t ngrams = 0;
    std::string profile;
    std::vector<std::string> grid;
    std::uint64_t seed = 0;
    std::string pssm_dir;
    std::uint64_t pssm_seed = 0;

    CLI::Option* o_seed = nullptr;
    CLI::Option* o_scheme = nullptr;
    CLI::Option* o_ngrams = nullptr;
    CLI::Option* o_model = nullptr;
    CLI::Option* o_profile = nullptr;
    CLI::Option* o_data = nullptr;
    CLI::Option* o_pssm_dir = nullptr;
    CLI::Option* o_pssm_seed = nullptr;

    void add(CLI::App* app) {
        app->add_option("--config", config, "Run config JSON; flags override its values");
        o_data = app->add_option("--data", data, "Dataset file (default: OUT/dataset.json)");
        o_model = app->add_option("--model", model, "mlp, cnn, transformer, rf or rusboost");
        o_scheme = app->add_option("--scheme", scheme, "PSSM encoding: eg, gdpc or er");
        o_ngrams = app->add_option("--ngrams", ngrams, "Overlapping n-gram size (1-8)");
        o_scheme->excludes(o_ngrams);
        o_profile = app->add_option("--profile", profile, "Hyperparameter profile: desk (default) or full");
        app->add_option("--grid", grid, "Hyperparameter override key=v1,v2,... (repeatable)");
        o_seed = app->add_option("--seed", seed, "Random seed (default 0)");
        o_pssm_dir = app->add_option("--pssm-dir", pssm_dir, "Directory of <id>.pssm PSI-BLAST profiles");
        o_pssm_seed = app->add_option("--pssm-seed", pssm_seed, "Seed for synthetic profiles (default: --seed)");
    }

    pipeline::RunConfig resolve(const fs::path& out, bool require_model = true) const {
        pipeline::RunConfig c;
        bool have_seed = false;
        if (!config.empty()) {
            if (!fs::exists(config)) throw ConfigError("config file " + config + " does not exist");
            c = pipeline::RunConfig::from_json(read_json(config));
            have_seed = true;
        }
        c.out = out;
        if (*o_data) c.data = data;
        if (c.data.empty()) c.data = out / "dataset.json";
        if (*o_model) c.model = pipeline::parse_model_family(model);
        else if (require_model && config.empty()) throw ConfigError("--model is required");
        if (*o_scheme) {
            c.rep.ngrams = false;
            c.rep.scheme = pssm::parse_scheme(scheme);
        }
        if (*o_ngrams) {
            if (ngrams < ngram::kMinN || ngrams > ngram::kMaxN)
                throw ConfigError("--ngrams must be in [1, 8], got " + std::to_string(ngrams));
            c.rep.ngrams = true;
            c.rep.n = ngrams;
        }
        if (!*o_scheme && !*o_ngrams && config.empty()) throw ConfigError("one of --scheme or --ngrams is required");
        if (*o_profile) c.profile = profile;
        for (const auto& [k, v] : parse_grid(grid)) c.grid[k] = v;
        if (*o_seed || !have_seed) c.seed = seed;
        if (*o_pssm_dir) c.pssm_dir = pssm_dir;
        if (*o_pssm_seed) c.pssm_seed = pssm_seed;
        return c;
    }
};

std::string predictions_csv(const std::vector<seqio::ProteinRecord>& records, const Matrix& proba,
                            const std::vector<std::string>& class_names, const std::vector<int>* truth) {
    std::string out = "id";
    if (truth) out += ",truth";
    out += ",predicted";
    for (const auto& c : class_names) out += ",p_" + c;
    out += "\n";
    auto pred = eval::argmax_rows(proba);
    for (std::size_t i = 0; i < records.size(); ++i) {
        out += records[i].id;
        if (truth) out += "," + class_names[static_cast<std::size_t>((*truth)[i])];
        out += "," + class_names[static_cast<std::size_t>(pred[i])];
        for (std::size_t k = 0; k < class_names.size(); ++k) out += "," + fmt_double(proba(i, k));
        out += "\n";
    }
    return out;
}

struct PredictionTable {
    std::vector<std::string> ids;
    std::vector<std::string> truth;
    std::vector<std::string> predicted;
    std::vector<std::string> class_names;
    Matrix proba;
};

PredictionTable read_predictions(const fs::path& p) {
    const auto text = read_input(p);
    auto lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError(p.string() + " is empty");
    auto header = split(trim(lines[0]), ',');
    if (header.size() < 4 || header[0] != "id" || header[1] != "truth" || header[2] != "predicted")
        throw DataError(p.string() + " is not a cross-validated prediction table");
    PredictionTable t;
    for (std::size_t k = 3; k < header.size(); ++k) {
        if (header[k].rfind("p_", 0) != 0) throw DataError(p.string() + ": bad column '" + header[k] + "'");
        t.class_names.push_back(header[k].substr(2));
    }
    const std::size_t C = t.class_names.size();
    t.proba = Matrix(lines.size() - 1, C);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(trim(lines[i]), ',');
        if (f.size() != C + 3) throw DataError(p.string() + ": line " + std::to_string(i + 1) + " has wrong width");
        t.ids.push_back(f[0]);
        t.truth.push_back(f[1]);
        t.predicted.push_back(f[2]);
        for (std::size_t k = 0; k < C; ++k) {
            try {
                t.proba(i - 1, k) = std::stod(f[k + 3]);
            } catch (const std::logic_error&) {
                throw DataError(p.string() + ": line " + std::to_string(i + 1) + " has a bad probability");
            }
        }
    }
    return t;
}

std::vector<int> class_indices(const std::vector<std::string>& labels, const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& l : labels) {
        auto it = std::find(names.begin(), names.end(), l);
        if (it == names.end()) throw DataError("unknown label '" + l + "'");
        out.push_back(static_cast<int>(it - names.begin()));
    }
    return out;
}

// --- subcommands -----------------------------------------------------------

int cmd_prepare(const std::string& fasta, const std::string& level, const fs::path& out) {
    const auto lv = seqio::parse_level(level);
    auto prepared = seqio::prepare(read_input(fasta), lv);
    Run run("prepare", out);
    run.write_json("dataset.json", seqio::to_json(prepared.dataset));
    run.write_json("filter_report.json", prepared.report.to_json());
    run.finish({{"fasta", fasta}, {"level", level}}, std::nullopt);
    return kExitOk;
}

int cmd_synth(std::size_t records, std::size_t classes, std::uint64_t seed, std::size_t min_len,
              std::size_t max_len, bool write_pssm, const fs::path& out) {
    auto spec = testbench::default_spec(records, classes, seed);
    spec.min_len = min_len;
    spec.max_len = max_len;
    auto ds = testbench::generate(spec);
    Run run("synth", out);
    run.write_json("dataset.json", seqio::to_json(ds));
    std::vector<seqio::ProteinRecord> recs = ds.records();
    run.write("synth.fasta", seqio::serialize_fasta(recs));
    if (write_pssm) {
        fs::create_directories(out / "pssm");
        for (const auto& r : ds.records())
            write_file_atomic(out / "pssm" / (r.id + ".pssm"), pssm::format_psiblast_pssm(pssm::synth_pssm(r.residues, seed)));
    }
    json classes_json = json::array();
    for (const auto& c : spec.classes) classes_json.push_back({{"name", c.name}, {"motif", c.motif}, {"proportion", c.proportion}});
    run.finish({{"records", records}, {"classes", classes_json}, {"min_len", min_len}, {"max_len", max_len}, {"seed", seed}},
               seed);
    return kExitOk;
}

int cmd_encode(const ModelFlags& mf, bool binary, const fs::path& out) {
    if (!*mf.o_scheme && !*mf.o_ngrams) throw ConfigError("one of --scheme or --ngrams is required");
    const fs::path data = *mf.o_data ? fs::path(mf.data) : out / "dataset.json";
    auto ds = load_dataset(data);
    json cfg = {{"data", data.string()}};
    if (*mf.o_scheme) {
        const auto scheme = pssm::parse_scheme(mf.scheme);
        pipeline::PssmSource src{mf.pssm_dir, mf.pssm_seed};
        auto table = pipeline::pssm_features(ds.records(), scheme, src, worker_count());
        for (std::size_t i = 0; i < ds.size(); ++i) table.labels[i] = ds.class_names()[static_cast<std::size_t>(ds.labels()[i])];
        Run run("encode", out);
        run.write("features.csv", pssm::to_csv(table));
        if (binary) run.write("features.bin", pssm::to_binary(table));
        cfg["scheme"] = mf.scheme;
        cfg["pssm_dir"] = mf.pssm_dir;
        cfg["pssm_seed"] = mf.pssm_seed;
        run.finish(cfg, mf.pssm_seed);
        return kExitOk;
    }
    if (mf.ngrams < ngram::kMinN || mf.ngrams > ngram::kMaxN)
        throw ConfigError("--ngrams must be in [1, 8], got " + std::to_string(mf.ngrams));
    std::vector<std::vector<std::string>> corpus;
    for (const auto& r : ds.records()) corpus.push_back(ngram::tokenize(r.residues, mf.ngrams));
    auto vocab = ngram::Vocabulary::build(corpus, mf.ngrams);
    const std::size_t max_len = ngram::max_token_count(ds, mf.ngrams);
    std::string tokens = "id,label,true_len";
    for (std::size_t t = 0; t < max_len; ++t) tokens += ",t" + std::to_string(t);
    tokens += "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto seq = ngram::encode_pad(corpus[i], vocab, max_len);
        tokens += ds.records()[i].id + "," + ds.class_names()[static_cast<std::size_t>(ds.labels()[i])] + "," +
                  std::to_string(seq.true_len);
        for (int id : seq.ids) tokens += "," + std::to_string(id);
        tokens += "\n";
    }
    Run run("encode", out);
    run.write_json("vocab.json", vocab.to_json(max_len));
    run.write("tokens.csv", tokens);
    cfg["ngrams"] = mf.ngrams;
    run.finish(cfg, std::nullopt);
    return kExitOk;
}

int cmd_train(const ModelFlags& mf, const fs::path& out) {
    auto cfg = mf.resolve(out);
    cfg.validate();
    auto grid = pipeline::expand(cfg.resolved_grid(), cfg.model);
    if (grid.size() != 1)
        throw ConfigError("train needs exactly one value per hyperparameter; the grid has " +
                          std::to_string(grid.size()) + " points (use nested-cv to search)");
    auto ds = load_dataset(cfg.data);
    pipeline::Experiment exp(ds, cfg.rep, cfg.model, cfg.pssm_source(), worker_count());
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Run run("train", out);
    auto model = exp.fit(rows, grid.front(), *cfg.seed);
    run.write("model.bin", model.save());
    if (!model.history.empty()) run.write("history.csv", nn::history_csv(model.history));
    run.finish(cfg.to_json(), cfg.seed, cfg.hash());
    return kExitOk;
}

int cmd_evaluate(const std::string& model_file, const std::string& data, const std::string& pssm_dir,
                 const fs::path& out) {
    auto model = pipeline::TrainedModel::load(read_input(model_file));
    auto ds = load_dataset(data);
    auto y = class_indices([&] {
        std::vector<std::string> l;
        for (int k : ds.labels()) l.push_back(ds.class_names()[static_cast<std::size_t>(k)]);
        return l;
    }(), model.class_names);
    auto proba = model.predict_proba(ds.records(), {pssm_dir, 0});
    auto report = eval::evaluate(proba, y, model.class_names);
    Run run("evaluate", out);
    run.write_json("metrics.json", report.to_json());
    run.write("pr_curves.csv", eval::pr_curves_csv(proba, y, model.class_names));
    run.write("predictions.csv", predictions_csv(ds.records(), proba, model.class_names, &y));
    run.finish({{"model", model_file}, {"data", data}, {"pssm_dir", pssm_dir}}, std::nullopt);
    return kExitOk;
}

int cmd_predict(const std::string& model_file, const std::string& fasta, const std::string& data,
                const std::string& pssm_dir, const fs::path& out) {
    auto model = pipeline::TrainedModel::load(read_input(model_file));
    std::vector<seqio::ProteinRecord> records;
    if (!fasta.empty()) {
        records = seqio::parse_fasta(read_input(fasta));
        for (const auto& r : records)
            if (auto rej = seqio::validate_record(r)) throw DataError("record " + r.id + ": " + rej->reason());
    } else {
        records = load_dataset(data).records();
    }
    auto proba = model.predict_proba(records, {pssm_dir, 0});
    Run run("predict", out);
    run.write("predictions.csv", predictions_csv(records, proba, model.class_names, nullptr));
    run.finish({{"model", model_file}, {"fasta", fasta}, {"data", data}, {"pssm_dir", pssm_dir}}, std::nullopt);
    return kExitOk;
}

int cmd_nested_cv(const ModelFlags& mf, std::size_t k_outer, bool k_outer_set, std::size_t k_inner, bool k_inner_set,
                  const std::string& plan_file, const fs::path& out, std::ostream& os) {
    auto cfg = mf.resolve(out);
    if (k_outer_set) cfg.k_outer = k_outer;
    if (k_inner_set) cfg.k_inner = k_inner;
    cfg.validate();
    auto ds = load_dataset(cfg.data);
    auto plan = plan_file.empty() ? eval::make_plan(ds.labels(), cfg.k_outer, cfg.k_inner, *cfg.seed)
                                  : eval::CvPlan::from_json(read_json(plan_file));
    plan.validate(ds.size());
    Run run("nested-cv", out);
    run.log("model=" + std::string(pipeline::to_string(cfg.model)) + " representation=" + cfg.rep.describe() +
            " records=" + std::to_string(ds.size()));
    auto res = pipeline::run_nested_cv(ds, cfg, plan, worker_count());
    run.write_json("cv_plan.json", plan.to_json());
    run.write_json("metrics.json", res.to_json());
    run.write("pr_curves.csv", eval::pr_curves_csv(res.oof_proba, ds.labels(), ds.class_names()));
    run.write("predictions.csv", predictions_csv(ds.records(), res.oof_proba, ds.class_names(), &ds.labels()));
    run.finish(cfg.to_json(), cfg.seed, cfg.hash());
    char line[160];
    std::snprintf(line, sizeof line, "mean_score %.4f  micro_f1 %.4f  micro_aucpr %.4f  overall_mcc %.4f\n",
                  res.mean.mean_score, res.mean.micro_f1, res.mean.micro_aucpr, res.mean.overall_mcc.value);
    os << line;
    return kExitOk;
}

int cmd_report(const std::string& data, const std::vector<std::string>& runs, std::size_t n, std::size_t top_k,
               const fs::path& out) {
    auto ds = load_dataset(data);
    json rep = json::object();
    std::string metrics_csv = "run,class,support,precision,recall,f1,mcc,aucpr,baseline\n";
    std::string pr_csv = "run,class,recall,precision\n";
    std::vector<std::pair<std::string, std::vector<int>>> preds;
    std::vector<int> truth;
    std::vector<std::string> ids;
    for (const auto& dir : runs) {
        auto t = read_predictions(fs::path(dir) / "predictions.csv");
        const std::string name = fs::path(dir).filename().empty() ? fs::path(dir).parent_path().filename().string()
                                                                   : fs::path(dir).filename().string();
        auto y = class_indices(t.truth, t.class_names);
        if (ids.empty()) {
            ids = t.ids;
            truth = y;
        } else if (t.ids != ids || y != truth) {
            throw DataError("run " + dir + " covers different records than " + runs.front());
        }
        auto report = eval::evaluate(t.proba, y, t.class_names);
        rep[name] = report.to_json();
        for (const auto& c : report.per_class)
            metrics_csv += name + "," + c.label + "," + std::to_string(c.support) + "," + fmt_double(c.precision.value) +
                           "," + fmt_double(c.recall.value) + "," + fmt_double(c.f1.value) + "," +
                           fmt_double(c.mcc.value) + "," + fmt_double(c.aucpr.value) + "," + fmt_double(c.baseline) + "\n";
        auto curves = eval::pr_curves_csv(t.proba, y, t.class_names);
        for (const auto& line : split(curves.substr(curves.find('\n') + 1), '\n'))
            if (!line.empty()) pr_csv += name + "," + line + "\n";
        preds.emplace_back(name, class_indices(t.predicted, t.class_names));
    }
    Run run("report", out);
    run.write_json("report.json", rep);
    run.write("metrics.csv", metrics_csv);
    run.write("pr_curves.csv", pr_csv);
    run.write("token_frequencies.csv", ngram::token_frequencies_csv(ngram::token_frequencies(ds, n, top_k)));
    if (!preds.empty()) {
        std::vector<std::string> names;
        {
            auto t = read_predictions(fs::path(runs.front()) / "predictions.csv");
            names = t.class_names;
        }
        auto dis = eval::ensemble_disagreement(preds, truth);
        run.write_json("disagreement.json", dis.to_json());
        run.write("disagreement.csv", dis.wrong_csv(ids, names));
    }
    run.finish({{"data", data}, {"runs", runs}, {"ngrams", n}, {"top_k", top_k}}, std::nullopt);
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Influenza A host prediction from hemagglutinin sequences", "fluhost"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FLUHOST_VERSION);
    std::string out_dir = ".";
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_dir, "Output directory (default .)"); };

    auto* prepare = app.add_subcommand("prepare", "Parse, filter and deduplicate a FASTA file");
    std::string fasta, level = "coarse";
    prepare->add_option("--fasta", fasta, "Input FASTA")->required();
    prepare->add_option("--level", level, "Label level: coarse or fine");
    add_out(prepare);

    auto* encode = app.add_subcommand("encode", "Encode a dataset as PSSM features or n-gram tokens");
    ModelFlags enc;
    bool binary = false;
    encode->add_option("--data", enc.data, "Dataset file (default: OUT/dataset.json)");
    enc.o_data = encode->get_option("--data");
    enc.o_scheme = encode->add_option("--scheme", enc.scheme, "PSSM encoding: eg, gdpc or er");
    enc.o_ngrams = encode->add_option("--ngrams", enc.ngrams, "Overlapping n-gram size (1-8)");
    enc.o_scheme->excludes(enc.o_ngrams);
    encode->add_option("--pssm-dir", enc.pssm_dir, "Directory of <id>.pssm PSI-BLAST profiles");
    encode->add_option("--pssm-seed", enc.pssm_seed, "Seed for synthetic profiles");
    encode->add_flag("--binary", binary, "Also write features.bin");
    add_out(encode);

    auto* train = app.add_subcommand("train", "Fit one model on a whole dataset");
    ModelFlags tr;
    tr.add(train);
    add_out(train);

    auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on a labelled dataset");
    std::string model_file, data, pssm_dir;
    evaluate->add_option("--model-file", model_file, "Trained model (default: OUT/model.bin)");
    evaluate->add_option("--data", data, "Dataset file (default: OUT/dataset.json)");
    evaluate->add_option("--pssm-dir", pssm_dir, "Directory of <id>.pssm PSI-BLAST profiles");
    add_out(evaluate);

    auto* nested = app.add_subcommand("nested-cv", "Stratified nested cross-validation with grid search");
    ModelFlags ncv;
    ncv.add(nested);
    std::size_t k_outer = 5, k_inner = 4;
    std::string plan_file;
    auto* o_ko = nested->add_option("--k-outer", k_outer, "Outer folds (default 5)");
    auto* o_ki = nested->add_option("--k-inner", k_inner, "Inner folds (default 4)");
    nested->add_option("--plan", plan_file, "Reuse a saved cv_plan.json");
    add_out(nested);

    auto* predict = app.add_subcommand("predict", "Predict hosts with a trained model");
    predict->add_option("--model-file", model_file, "Trained model (default: OUT/model.bin)");
    auto* o_pf = predict->add_option("--fasta", fasta, "Sequences to classify");
    auto* o_pd = predict->add_option("--data", data, "Dataset file instead of FASTA");
    o_pf->excludes(o_pd);
    predict->add_option("--pssm-dir", pssm_dir, "Directory of <id>.pssm PSI-BLAST profiles");
    add_out(predict);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic motif corpus");
    std::size_t records = 300, classes = 3, min_len = 30, max_len = 50;
    std::uint64_t synth_seed = 0;
    bool write_pssm = false;
    synth->add_option("--records", records, "Record count (default 300)");
    synth->add_option("--classes", classes, "Class count (default 3)");
    synth->add_option("--seed", synth_seed, "Random seed (default 0)");
    synth->add_option("--min-len", min_len, "Shortest sequence (default 30)");
    synth->add_option("--max-len", max_len, "Longest sequence (default 50)");
    synth->add_flag("--pssm", write_pssm, "Also write synthetic profiles to OUT/pssm/");
    add_out(synth);

    auto* report = app.add_subcommand("report", "Tables from one or more nested-cv runs");
    std::vector<std::string> runs;
    std::size_t report_n = 3, top_k = 20;
    report->add_option("--data", data, "Dataset file (default: OUT/dataset.json)");
    report->add_option("--runs", runs, "nested-cv output directories")->required();
    report->add_option("--ngrams", report_n, "n for token-frequency tables (default 3)");
    report->add_option("--top-k", top_k, "Tokens per class (default 20)");
    add_out(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << FLUHOST_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    const fs::path outp = out_dir;
    auto or_default = [&](const std::string& v, const char* name) { return v.empty() ? (outp / name).string() : v; };
    try {
        if (*prepare) return cmd_prepare(fasta, level, outp);
        if (*encode) return cmd_encode(enc, binary, outp);
        if (*train) return cmd_train(tr, outp);
        if (*evaluate)
            return cmd_evaluate(or_default(model_file, "model.bin"), or_default(data, "dataset.json"), pssm_dir, outp);
        if (*nested) return cmd_nested_cv(ncv, k_outer, o_ko->count() > 0, k_inner, o_ki->count() > 0, plan_file, outp, out);
        if (*predict) {
            if (fasta.empty() && data.empty()) throw ConfigError("predict needs --fasta or --data");
            return cmd_predict(or_default(model_file, "model.bin"), fasta, data, pssm_dir, outp);
        }
        if (*synth) return cmd_synth(records, classes, synth_seed, min_len, max_len, write_pssm, outp);
        if (*report) return cmd_report(or_default(data, "dataset.json"), runs, report_n, top_k, outp);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergedTraining& e) {
        err << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace fluhost::cli
