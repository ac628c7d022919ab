#include "glhnn/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "glhnn/corpus.hpp"
#include "glhnn/dga_corpus.hpp"
#include "glhnn/error.hpp"
#include "glhnn/evaluate.hpp"
#include "glhnn/hash.hpp"
#include "glhnn/hmm.hpp"
#include "glhnn/model.hpp"
#include "glhnn/preprocess.hpp"
#include "glhnn/rng.hpp"
#include "glhnn/train.hpp"

namespace glhnn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ----------------------------------------------------------------- options

struct ModelOptions {
    std::string architecture = "glhnn";
    std::size_t d_emb = 128;
    std::size_t k_conv = 4;
    std::size_t k_pool = 2;
    std::size_t stride = 2;
    double keep_prob_1 = 0.75;
    double keep_prob_2 = 0.75;
    bool inverted_dropout = true;
    bool align_right = true;
    std::size_t batch_size = 256;
    double lr = 0.001;
    std::size_t patience = 10;
    std::size_t max_epochs = 200;
    double clip_norm = 5.0;

    ModelConfig model_config() const {
        ModelConfig c;
        c.architecture = parse_architecture(architecture);
        c.d_emb = d_emb;
        c.k_conv = k_conv;
        c.k_pool = k_pool;
        c.stride = stride;
        c.keep_prob_1 = keep_prob_1;
        c.keep_prob_2 = keep_prob_2;
        c.inverted_dropout = inverted_dropout;
        c.align_right = align_right;
        c.validate();
        return c;
    }
    TrainConfig train_config(std::uint64_t seed) const {
        TrainConfig t;
        t.batch_size = batch_size;
        t.lr = lr;
        t.patience = patience;
        t.max_epochs = max_epochs;
        t.clip_norm = clip_norm;
        t.seed = seed;
        t.validate();
        return t;
    }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelOptions, architecture, d_emb, k_conv, k_pool, stride, keep_prob_1,
                                                keep_prob_2, inverted_dropout, align_right, batch_size, lr, patience,
                                                max_epochs, clip_norm)

struct GenerateOptions {
    std::string family;
    std::uint64_t seed = 0;
    std::size_t count = 1000;
    std::size_t min_len = 8;
    std::size_t max_len = 16;
    int label = -1;  // -1: 0 for the benign family, 1 otherwise
    bool time_dependent = false;
    std::uint64_t date_bucket = 0;
    std::string entropy_file;
    std::string wordlist;
    std::size_t min_words = 2;
    std::size_t max_words = 3;
    std::string base;
    std::string hmm;
    std::string out;
    std::string manifest;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GenerateOptions, family, seed, count, min_len, max_len, label,
                                                time_dependent, date_bucket, entropy_file, wordlist, min_words,
                                                max_words, base, hmm, out, manifest)

struct TrainOptions {
    std::string train;
    std::string val;
    std::size_t holdout_folds = 5;
    std::uint64_t seed = 0;
    bool skip_invalid = false;
    std::string out;
    std::string history;
    std::string manifest;
    ModelOptions model;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainOptions, train, val, holdout_folds, seed, skip_invalid, out,
                                                history, manifest, model)

struct XvalOptions {
    std::string benign;
    std::string agd;
    std::size_t repeats = 100;
    std::size_t folds = 5;
    std::size_t samples = 5000;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    double threshold = 0.5;
    bool skip_invalid = false;
    std::string out_csv;
    std::string out_json;
    std::string manifest;
    ModelOptions model;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(XvalOptions, benign, agd, repeats, folds, samples, seed, jobs,
                                                threshold, skip_invalid, out_csv, out_json, manifest, model)

struct ClassifyOptions {
    std::string model;
    std::string input = "-";
    std::string output = "-";
    double threshold = 0.5;
    bool strip_tld = true;
    bool skip_invalid = false;
    std::string manifest;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ClassifyOptions, model, input, output, threshold, strip_tld,
                                                skip_invalid, manifest)

struct HmmFitOptions {
    std::string input;
    bool domain_list = false;
    std::size_t states = 8;
    std::size_t iterations = 50;
    std::uint64_t seed = 0;
    bool skip_invalid = false;
    std::string out;
    std::string manifest;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HmmFitOptions, input, domain_list, states, iterations, seed,
                                                skip_invalid, out, manifest)

struct ReportOptions {
    std::vector<std::string> inputs;
    std::vector<std::string> labels;
    std::string out_json;
    std::string manifest;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ReportOptions, inputs, labels, out_json, manifest)

// ------------------------------------------------------------------ helpers

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string file_digest(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Collects what a command read and wrote and serialises the run manifest.
class Manifest {
public:
    Manifest(std::string command, json options, std::uint64_t seed, std::string seed_source)
        : command_(std::move(command)), options_(std::move(options)), seed_(seed),
          seed_source_(std::move(seed_source)), started_(utc_now()) {}

    void input(const std::string& path) { inputs_.push_back({{"path", path}, {"fnv1a64", file_digest(path)}}); }
    void output(const std::string& path) { outputs_.push_back({{"path", path}, {"fnv1a64", file_digest(path)}}); }
    json& extra() { return extra_; }

    void write(const std::string& path) const {
        json j = {{"schema", "glhnn-run-manifest"},
                  {"schema_version", kManifestSchemaVersion},
                  {"tool_version", kToolVersion},
                  {"command", command_},
                  {"options", options_},
                  {"seed", seed_},
                  {"seed_source", seed_source_},
                  {"inputs", inputs_},
                  {"outputs", outputs_},
                  {"started_at", started_},
                  {"finished_at", utc_now()}};
        if (!extra_.is_null()) j["details"] = extra_;
        auto out = open_out(path);
        out << j.dump(2) << '\n';
    }

private:
    std::string command_;
    json options_;
    std::uint64_t seed_;
    std::string seed_source_;
    std::string started_;
    json inputs_ = json::array();
    json outputs_ = json::array();
    json extra_;
};

std::string manifest_path(const std::string& given, const std::string& primary) {
    if (!given.empty()) return given;
    return primary + ".manifest.json";
}

void require(bool cond, const std::string& message) {
    if (!cond) throw UsageError(message);
}

LabeledCorpus read_corpus(const std::string& path, bool skip_invalid, std::ostream& err) {
    ReadStats stats;
    LabeledCorpus c = read_corpus_tsv(fs::path(path), ReadOptions{skip_invalid}, &stats);
    if (stats.skipped || stats.duplicates) {
        err << path << ": " << stats.accepted << " records, " << stats.duplicates << " duplicates dropped, "
            << stats.skipped << " invalid lines skipped\n";
    }
    return c;
}

// --------------------------------------------------------------- generate

int cmd_generate(const GenerateOptions& o, const std::string& seed_source, std::ostream& out, std::ostream& err) {
    require(!o.out.empty(), "generate: --out is required");
    Family family;
    try {
        family = parse_family(o.family);
    } catch (const InputError& e) {
        throw UsageError(std::string("generate: ") + e.what());
    }
    GeneratorConfig cfg;
    cfg.family = family;
    cfg.count = o.count;
    cfg.min_len = o.min_len;
    cfg.max_len = o.max_len;
    cfg.min_words = o.min_words;
    cfg.max_words = o.max_words;
    cfg.base = o.base;

    Manifest manifest("generate", o, o.seed, seed_source);
    TimeDependence td = o.time_dependent ? TimeDependence::TD : TimeDependence::TI;
    Determinism det = Determinism::D;
    cfg.seed = o.time_dependent ? time_dependent_seed(o.seed, o.date_bucket) : o.seed;
    if (!o.entropy_file.empty()) {
        det = Determinism::N;
        cfg.seed ^= seed_from_entropy_file(o.entropy_file);
        manifest.input(o.entropy_file);
    }
    if (!o.wordlist.empty()) {
        std::istringstream words(read_file(o.wordlist));
        for (std::string w; std::getline(words, w);) {
            if (!w.empty() && w.back() == '\r') w.pop_back();
            if (!w.empty() && w.front() != '#') cfg.wordlist.push_back(w);
        }
        manifest.input(o.wordlist);
    }
    if (family == Family::hmm) {
        require(!o.hmm.empty(), "generate: the hmm family needs --hmm <model.json>");
        try {
            cfg.hmm = HmmModel::from_json(json::parse(read_file(o.hmm)));
        } catch (const json::parse_error& e) {
            throw InputError("'" + o.hmm + "' is not valid JSON: " + e.what());
        }
        manifest.input(o.hmm);
    }
    const int label = o.label >= 0 ? o.label : (family == Family::benign_like ? kBenign : kMalicious);
    if (label != kBenign && label != kMalicious) throw UsageError("generate: --label must be 0 or 1");
    std::optional<DgaClass> cls;
    if (label == kMalicious) cls = family_class(family, td, det);

    const LabeledCorpus corpus = generate_corpus(cfg, label, cls);
    write_corpus_tsv(fs::path(o.out), corpus);
    manifest.output(o.out);
    manifest.extra() = corpus_manifest(cfg, corpus, label == kMalicious ? cls->code() : "benign");
    manifest.write(manifest_path(o.manifest, o.out));
    if (corpus.size() < o.count) {
        err << "generate: family produced only " << corpus.size() << " distinct domains\n";
    }
    out << "wrote " << corpus.size() << " domains to " << o.out << '\n';
    return kOk;
}

// ------------------------------------------------------------------ train

int cmd_train(const TrainOptions& o, const std::string& seed_source, std::ostream& out, std::ostream& err) {
    require(!o.train.empty(), "train: --train is required");
    require(!o.out.empty(), "train: --out is required");
    const ModelConfig mc = o.model.model_config();
    const TrainConfig tc = o.model.train_config(Rng::derive(o.seed, 1));

    Manifest manifest("train", o, o.seed, seed_source);
    LabeledCorpus train = read_corpus(o.train, o.skip_invalid, err);
    manifest.input(o.train);
    LabeledCorpus val;
    if (!o.val.empty()) {
        val = read_corpus(o.val, o.skip_invalid, err);
        manifest.input(o.val);
    } else {
        if (o.holdout_folds < 2) throw ValidationError("train: --holdout-folds must be at least 2");
        const auto folds = stratified_kfold(train, o.holdout_folds, Rng::derive(o.seed, 2));
        val = subset(train, folds.front().val);
        train = subset(train, folds.front().train);
    }

    GlhnnModel model(mc, Rng::derive(o.seed, 0));
    const TrainResult result = fit(model, train, val, tc, [&](const EpochRecord& r) {
        err << "epoch " << r.epoch << " loss " << fmt(r.train_loss) << " val_accuracy " << fmt(r.val_accuracy) << '\n';
    });
    save_checkpoint(model, o.out);
    manifest.output(o.out);
    const std::string history = o.history.empty() ? o.out + ".history.csv" : o.history;
    {
        auto h = open_out(history);
        write_history_csv(h, result.history);
    }
    manifest.extra() = {{"best_epoch", result.best_epoch},
                        {"best_val_accuracy", result.best_val_accuracy},
                        {"epochs", result.history.size()},
                        {"history", history}};
    manifest.write(manifest_path(o.manifest, o.out));
    out << "best epoch " << result.best_epoch << ", validation accuracy " << fmt(result.best_val_accuracy) << '\n';
    return kOk;
}

// ------------------------------------------------------------------- xval

struct Experiment {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t best_epoch = 0;
    std::size_t epochs = 0;
    EvalReport report;
};

const char* kXvalHeader =
    "repeat,fold,dga_class,n_train,n_val,best_epoch,epochs,tp,fp,fn,tn,accuracy,precision,recall,f1,"
    "precision_degenerate,recall_degenerate,f1_degenerate";

json summarise(const std::vector<Experiment>& rows, const std::string& dga_class) {
    json mean, sd;
    ConfusionMatrix total;
    for (const auto& r : rows) total += r.report.cm;
    const auto get = [](const Metrics& m, int which) {
        switch (which) {
            case 0: return m.accuracy;
            case 1: return m.precision;
            case 2: return m.recall;
            default: return m.f1;
        }
    };
    const char* names[] = {"accuracy", "precision", "recall", "f1"};
    for (int w = 0; w < 4; ++w) {
        double s = 0.0;
        for (const auto& r : rows) s += get(r.report.m, w);
        const double mu = s / static_cast<double>(rows.size());
        double ss = 0.0;
        for (const auto& r : rows) ss += (get(r.report.m, w) - mu) * (get(r.report.m, w) - mu);
        mean[names[w]] = mu;
        sd[names[w]] = rows.size() > 1 ? std::sqrt(ss / static_cast<double>(rows.size() - 1)) : 0.0;
    }
    return {{"dga_class", dga_class},
            {"experiments", rows.size()},
            {"mean", mean},
            {"std", sd},
            {"confusion_total", {{"tp", total.tp}, {"fp", total.fp}, {"fn", total.fn}, {"tn", total.tn}}}};
}

int cmd_xval(const XvalOptions& o, const std::string& seed_source, std::ostream& out, std::ostream& err) {
    require(!o.benign.empty() && !o.agd.empty(), "xval: --benign and --agd are required");
    require(!o.out_csv.empty(), "xval: --out-csv is required");
    if (o.folds < 2) throw ValidationError("xval: --folds must be at least 2");
    if (o.repeats == 0) throw ValidationError("xval: --repeats must be positive");
    if (o.samples == 0) throw ValidationError("xval: --samples must be positive");
    if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw ValidationError("xval: --threshold must lie in (0, 1)");
    const ModelConfig mc = o.model.model_config();
    (void)o.model.train_config(0);

    Manifest manifest("xval", o, o.seed, seed_source);
    const LabeledCorpus benign = read_corpus(o.benign, o.skip_invalid, err);
    manifest.input(o.benign);
    const LabeledCorpus agd = read_corpus(o.agd, o.skip_invalid, err);
    manifest.input(o.agd);
    if (benign.count(kBenign) != benign.size() || agd.count(kMalicious) != agd.size()) {
        throw ValidationError("xval: --benign must hold only label 0 and --agd only label 1");
    }
    const std::string dga_class = agd.empty() ? "" : agd.records.front().class_code;

    const auto pairs = bootstrap_sets(benign, agd, o.repeats, o.samples, Rng::derive(o.seed, 0));
    // Each pair is merged and deduplicated before folding so that a
    // resampled domain never sits in both the training and validation split.
    std::vector<LabeledCorpus> merged(pairs.size());
    std::vector<std::vector<Fold>> folds(pairs.size());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        merged[r] = pairs[r].benign;
        merged[r].merge(pairs[r].agd);
        folds[r] = stratified_kfold(merged[r], o.folds, Rng::derive(Rng::derive(o.seed, 1), r));
    }

    const std::size_t total = o.repeats * o.folds;
    std::vector<Experiment> results(total);
    std::vector<std::exception_ptr> failures(total);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t e = next++; e < total; e = next++) {
            try {
                const std::size_t r = e / o.folds, f = e % o.folds;
                const LabeledCorpus train = subset(merged[r], folds[r][f].train);
                const LabeledCorpus val = subset(merged[r], folds[r][f].val);
                GlhnnModel model(mc, Rng::derive(Rng::derive(o.seed, 2), e));
                const TrainResult tr = fit(model, train, val, o.model.train_config(Rng::derive(Rng::derive(o.seed, 3), e)));
                Experiment& x = results[e];
                x.repeat = r;
                x.fold = f;
                x.n_train = train.size();
                x.n_val = val.size();
                x.best_epoch = tr.best_epoch;
                x.epochs = tr.history.size();
                x.report.cm = classify_batch(model, val, o.threshold);
                x.report.m = metrics(x.report.cm);
                x.report.repeat = r;
                x.report.fold = f;
                x.report.dga_class = dga_class;
                std::lock_guard lock(log_mutex);
                err << "experiment " << e + 1 << "/" << total << " accuracy " << fmt(x.report.m.accuracy) << '\n';
            } catch (...) {
                failures[e] = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(o.jobs, total));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    {
        auto csv = open_out(o.out_csv);
        csv << kXvalHeader << '\n';
        for (const auto& x : results) {
            const auto& m = x.report.m;
            const auto& cm = x.report.cm;
            csv << x.repeat << ',' << x.fold << ',' << dga_class << ',' << x.n_train << ',' << x.n_val << ','
                << x.best_epoch << ',' << x.epochs << ',' << cm.tp << ',' << cm.fp << ',' << cm.fn << ',' << cm.tn
                << ',' << fmt(m.accuracy) << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.f1)
                << ',' << m.precision_degenerate << ',' << m.recall_degenerate << ',' << m.f1_degenerate << '\n';
        }
    }
    manifest.output(o.out_csv);
    const json summary = summarise(results, dga_class);
    if (!o.out_json.empty()) {
        auto js = open_out(o.out_json);
        js << summary.dump(2) << '\n';
        manifest.output(o.out_json);
    }
    manifest.write(manifest_path(o.manifest, o.out_csv));
    out << total << " experiments, mean accuracy " << fmt(summary["mean"]["accuracy"].get<double>()) << '\n';
    return kOk;
}

// --------------------------------------------------------------- classify

int cmd_classify(const ClassifyOptions& o, std::ostream& out, std::ostream& err) {
    require(!o.model.empty(), "classify: --model is required");
    if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw ValidationError("classify: --threshold must lie in (0, 1)");
    const GlhnnModel model = load_checkpoint(o.model, Vocabulary::standard().size());

    std::ifstream in_file;
    std::istream* in = &std::cin;
    if (o.input != "-") {
        in_file.open(o.input);
        if (!in_file) throw IoError("cannot open '" + o.input + "'");
        in = &in_file;
    }
    std::ofstream out_file;
    std::ostream* sink = &out;
    if (o.output != "-") {
        out_file = open_out(o.output);
        sink = &out_file;
    }

    std::size_t line_no = 0, scored = 0, skipped = 0;
    for (std::string line; std::getline(*in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const std::string field = line.substr(0, line.find('\t'));
        double p = 0.0;
        try {
            const EncodedDomain x = o.strip_tld ? preprocess(field) : encode(field);
            p = model.predict(x);
        } catch (const Error& e) {
            if (!o.skip_invalid) throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
            ++skipped;
            continue;
        }
        *sink << field << '\t' << fmt(p) << '\t' << (p >= o.threshold ? "agd" : "benign") << '\n';
        ++scored;
    }
    sink->flush();
    if (skipped) err << "classify: skipped " << skipped << " invalid lines\n";

    if (o.input != "-" && o.output != "-") {
        Manifest manifest("classify", o, 0, "none");
        manifest.input(o.model);
        manifest.input(o.input);
        manifest.output(o.output);
        manifest.extra() = {{"scored", scored}, {"skipped", skipped}};
        manifest.write(manifest_path(o.manifest, o.output));
    } else if (!o.manifest.empty()) {
        Manifest manifest("classify", o, 0, "none");
        manifest.input(o.model);
        manifest.extra() = {{"scored", scored}, {"skipped", skipped}};
        manifest.write(o.manifest);
    }
    return kOk;
}

// ---------------------------------------------------------------- hmm-fit

int cmd_hmm_fit(const HmmFitOptions& o, const std::string& seed_source, std::ostream& out, std::ostream& err) {
    require(!o.input.empty() && !o.out.empty(), "hmm-fit: --input and --out are required");
    if (o.states < 2) throw ValidationError("hmm-fit: --states must be at least 2");
    Manifest manifest("hmm-fit", o, o.seed, seed_source);
    const LabeledCorpus corpus = o.domain_list ? load_benign(o.input, ReadOptions{o.skip_invalid})
                                               : read_corpus(o.input, o.skip_invalid, err);
    manifest.input(o.input);
    std::vector<std::string> domains;
    domains.reserve(corpus.size());
    for (const auto& r : corpus.records) domains.push_back(r.domain);
    const HmmFitResult fitted = hmm_fit(domains, o.states, o.iterations, o.seed);
    {
        auto f = open_out(o.out);
        f << fitted.model.to_json().dump(2) << '\n';
    }
    manifest.output(o.out);
    manifest.extra() = {{"log_likelihood", fitted.log_likelihood}, {"training_domains", domains.size()}};
    manifest.write(manifest_path(o.manifest, o.out));
    out << "final log-likelihood " << fmt(fitted.log_likelihood.back()) << '\n';
    return kOk;
}

// ----------------------------------------------------------------- report

// Mean accuracy per DGA class from one xval CSV.
std::map<std::string, double> class_accuracies(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string header;
    if (!std::getline(in, header) || header != kXvalHeader) throw InputError("'" + path + "' is not an xval CSV");
    std::map<std::string, std::pair<double, std::size_t>> acc;
    std::size_t line_no = 1;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != 18) throw InputError(path + ": line " + std::to_string(line_no) + ": expected 18 columns");
        try {
            auto& [sum, n] = acc[cells[2]];
            sum += std::stod(cells[11]);
            ++n;
        } catch (const std::exception&) {
            throw InputError(path + ": line " + std::to_string(line_no) + ": bad accuracy value");
        }
    }
    std::map<std::string, double> out;
    for (const auto& [cls, v] : acc) out[cls] = v.first / static_cast<double>(v.second);
    return out;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream&) {
    require(!o.inputs.empty(), "report: at least one --input is required");
    if (!o.labels.empty() && o.labels.size() != o.inputs.size()) {
        throw UsageError("report: give one --label per --input");
    }
    Manifest manifest("report", o, 0, "none");
    std::vector<std::string> labels = o.labels;
    std::vector<std::map<std::string, double>> per_model;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        per_model.push_back(class_accuracies(o.inputs[i]));
        manifest.input(o.inputs[i]);
        if (o.labels.empty()) labels.push_back(fs::path(o.inputs[i]).stem().string());
    }
    std::vector<std::string> classes;
    for (const auto& [cls, v] : per_model.front()) {
        const bool everywhere =
            std::all_of(per_model.begin(), per_model.end(), [&](const auto& m) { return m.count(cls) > 0; });
        if (everywhere) classes.push_back(cls);
    }
    if (classes.empty()) throw InputError("report: the inputs share no DGA class");

    std::vector<std::vector<double>> table;
    for (const auto& cls : classes) {
        std::vector<double> row;
        for (const auto& m : per_model) row.push_back(m.at(cls));
        table.push_back(row);
    }
    json j = {{"models", labels}, {"classes", classes}, {"accuracy", table}};

    char buf[64];
    out << "dga_class";
    for (const auto& l : labels) out << '\t' << l;
    out << '\n';
    std::optional<RankingResult> ranking;
    if (labels.size() > 1) {
        try {
            ranking = mean_ranking(table);
        } catch (const InputError&) {
            // every class is a full tie; nothing to rank
        }
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        out << classes[c];
        for (std::size_t m = 0; m < labels.size(); ++m) {
            std::snprintf(buf, sizeof buf, "%.4f", table[c][m]);
            out << '\t' << buf;
            if (ranking && ranking->ranks[c][m]) out << '(' << *ranking->ranks[c][m] << ')';
        }
        out << '\n';
    }
    if (ranking) {
        out << "mean_rank";
        for (double r : ranking->mean_rank) {
            std::snprintf(buf, sizeof buf, "%.2f", r);
            out << '\t' << buf;
        }
        out << '\n';
        json ranks = json::array();
        for (const auto& row : ranking->ranks) {
            json jr = json::array();
            for (const auto& r : row) jr.push_back(r ? json(*r) : json(nullptr));
            ranks.push_back(jr);
        }
        j["ranks"] = ranks;
        j["mean_rank"] = ranking->mean_rank;
    }
    if (!o.out_json.empty()) {
        auto f = open_out(o.out_json);
        f << j.dump(2) << '\n';
        manifest.output(o.out_json);
        manifest.write(manifest_path(o.manifest, o.out_json));
    } else if (!o.manifest.empty()) {
        manifest.write(o.manifest);
    }
    return kOk;
}

// ------------------------------------------------------------- dispatching

void add_model_flags(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--arch", m.architecture, "glhnn or lstm_baseline")->capture_default_str();
    cmd->add_option("--d-emb", m.d_emb, "embedding / hidden width")->capture_default_str();
    cmd->add_option("--k-conv", m.k_conv, "GCNN kernel width")->capture_default_str();
    cmd->add_option("--k-pool", m.k_pool, "max-pool window")->capture_default_str();
    cmd->add_option("--stride", m.stride, "max-pool stride")->capture_default_str();
    cmd->add_option("--keep-prob-1", m.keep_prob_1, "dropout keep probability after the embedding")
        ->capture_default_str();
    cmd->add_option("--keep-prob-2", m.keep_prob_2, "dropout keep probability before the LSTM")
        ->capture_default_str();
    cmd->add_flag("--inverted-dropout,!--plain-dropout", m.inverted_dropout, "rescale kept activations");
    cmd->add_flag("--align-right,!--align-left", m.align_right, "place padding before the characters");
    cmd->add_option("--batch-size", m.batch_size, "mini-batch size")->capture_default_str();
    cmd->add_option("--lr", m.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--patience", m.patience, "early-stopping patience in epochs")->capture_default_str();
    cmd->add_option("--max-epochs", m.max_epochs, "epoch limit")->capture_default_str();
    cmd->add_option("--clip-norm", m.clip_norm, "global gradient-norm clip, 0 disables")->capture_default_str();
}

std::string resolve_seed(const CLI::Option* opt, std::uint64_t& seed) {
    if (opt->count() > 0) return "flag";
    seed = entropy_seed();
    return "entropy";
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Character-level detector for algorithmically generated domain names", "glhnn"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags take precedence");
    app.set_version_flag("--version", kToolVersion);

    GenerateOptions gen;
    auto* c_gen = app.add_subcommand("generate", "write a synthetic labelled corpus");
    c_gen->add_option("--family", gen.family, "arithmetic, hash, wordlist, permutation, hmm or benign")->required();
    auto* gen_seed = c_gen->add_option("--seed", gen.seed, "root seed");
    c_gen->add_option("--count", gen.count, "number of domains")->capture_default_str();
    c_gen->add_option("--min-len", gen.min_len, "minimum label length")->capture_default_str();
    c_gen->add_option("--max-len", gen.max_len, "maximum label length")->capture_default_str();
    c_gen->add_option("--label", gen.label, "0 benign, 1 AGD (default from family)");
    c_gen->add_flag("--time-dependent", gen.time_dependent, "derive the seed from --date-bucket");
    c_gen->add_option("--date-bucket", gen.date_bucket, "date bucket for time-dependent seeds");
    c_gen->add_option("--entropy-file", gen.entropy_file, "mix the digest of this file into the seed");
    c_gen->add_option("--wordlist", gen.wordlist, "word file, one per line (default: bundled nouns)");
    c_gen->add_option("--min-words", gen.min_words)->capture_default_str();
    c_gen->add_option("--max-words", gen.max_words)->capture_default_str();
    c_gen->add_option("--base", gen.base, "base label for the permutation family");
    c_gen->add_option("--hmm", gen.hmm, "HMM JSON for the hmm family");
    c_gen->add_option("--out", gen.out, "output TSV")->required();
    c_gen->add_option("--manifest", gen.manifest, "manifest path (default <out>.manifest.json)");

    TrainOptions tr;
    auto* c_train = app.add_subcommand("train", "train a model and write a checkpoint");
    c_train->add_option("--train", tr.train, "training corpus TSV")->required();
    c_train->add_option("--val", tr.val, "validation corpus TSV (default: stratified holdout)");
    c_train->add_option("--holdout-folds", tr.holdout_folds, "holdout is 1/k of the training corpus")
        ->capture_default_str();
    auto* tr_seed = c_train->add_option("--seed", tr.seed, "root seed");
    c_train->add_flag("--skip-invalid", tr.skip_invalid, "drop malformed corpus lines");
    c_train->add_option("--out", tr.out, "checkpoint path")->required();
    c_train->add_option("--history", tr.history, "history CSV (default <out>.history.csv)");
    c_train->add_option("--manifest", tr.manifest, "manifest path (default <out>.manifest.json)");
    add_model_flags(c_train, tr.model);

    XvalOptions xv;
    auto* c_xval = app.add_subcommand("xval", "bootstrap x stratified k-fold evaluation");
    c_xval->add_option("--benign", xv.benign, "benign corpus TSV")->required();
    c_xval->add_option("--agd", xv.agd, "AGD corpus TSV")->required();
    c_xval->add_option("--repeats", xv.repeats, "bootstrap repeats")->capture_default_str();
    c_xval->add_option("--folds", xv.folds, "cross-validation folds")->capture_default_str();
    c_xval->add_option("--samples", xv.samples, "records drawn per side and repeat")->capture_default_str();
    auto* xv_seed = c_xval->add_option("--seed", xv.seed, "root seed");
    c_xval->add_option("--jobs", xv.jobs, "worker threads")->capture_default_str();
    c_xval->add_option("--threshold", xv.threshold, "decision threshold")->capture_default_str();
    c_xval->add_flag("--skip-invalid", xv.skip_invalid, "drop malformed corpus lines");
    c_xval->add_option("--out-csv", xv.out_csv, "per-experiment CSV")->required();
    c_xval->add_option("--out-json", xv.out_json, "aggregate JSON");
    c_xval->add_option("--manifest", xv.manifest, "manifest path (default <out-csv>.manifest.json)");
    add_model_flags(c_xval, xv.model);

    ClassifyOptions cl;
    auto* c_cls = app.add_subcommand("classify", "score domains with a trained checkpoint");
    c_cls->add_option("--model", cl.model, "checkpoint")->required();
    c_cls->add_option("--input", cl.input, "domains, one per line; '-' for stdin")->capture_default_str();
    c_cls->add_option("--output", cl.output, "TSV output; '-' for stdout")->capture_default_str();
    c_cls->add_option("--threshold", cl.threshold, "decision threshold")->capture_default_str();
    c_cls->add_flag("--strip-tld,!--no-strip-tld", cl.strip_tld, "remove the last label before scoring");
    c_cls->add_flag("--skip-invalid", cl.skip_invalid, "skip unencodable domains");
    c_cls->add_option("--manifest", cl.manifest, "manifest path");

    HmmFitOptions hf;
    auto* c_hmm = app.add_subcommand("hmm-fit", "fit a character HMM to a domain corpus");
    c_hmm->add_option("--input", hf.input, "corpus TSV, or a domain list with --domain-list")->required();
    c_hmm->add_flag("--domain-list", hf.domain_list, "input is one domain (or rank,domain) per line");
    c_hmm->add_option("--states", hf.states, "hidden states")->capture_default_str();
    c_hmm->add_option("--iterations", hf.iterations, "Baum-Welch iterations")->capture_default_str();
    auto* hf_seed = c_hmm->add_option("--seed", hf.seed, "initialisation seed");
    c_hmm->add_flag("--skip-invalid", hf.skip_invalid, "drop malformed lines");
    c_hmm->add_option("--out", hf.out, "HMM JSON")->required();
    c_hmm->add_option("--manifest", hf.manifest, "manifest path (default <out>.manifest.json)");

    ReportOptions rp;
    auto* c_rep = app.add_subcommand("report", "tabulate and rank xval results");
    c_rep->add_option("--input", rp.inputs, "xval CSV, one per model")->required();
    c_rep->add_option("--label", rp.labels, "model name per input");
    c_rep->add_option("--out-json", rp.out_json, "JSON summary");
    c_rep->add_option("--manifest", rp.manifest, "manifest path");

    std::string replay_path;
    auto* c_replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
    c_replay->add_option("manifest", replay_path, "manifest JSON")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (c_gen->parsed()) return cmd_generate(gen, resolve_seed(gen_seed, gen.seed), out, err);
    if (c_train->parsed()) return cmd_train(tr, resolve_seed(tr_seed, tr.seed), out, err);
    if (c_xval->parsed()) return cmd_xval(xv, resolve_seed(xv_seed, xv.seed), out, err);
    if (c_cls->parsed()) return cmd_classify(cl, out, err);
    if (c_hmm->parsed()) return cmd_hmm_fit(hf, resolve_seed(hf_seed, hf.seed), out, err);
    if (c_rep->parsed()) return cmd_report(rp, out, err);
    json manifest;
    try {
        manifest = json::parse(read_file(replay_path));
    } catch (const json::parse_error& e) {
        throw InputError("'" + replay_path + "' is not valid JSON: " + e.what());
    }
    return replay(manifest, out, err);
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const UsageError*>(&e)) return kUsage;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
    if (dynamic_cast<const Error*>(&e)) return kValidation;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kValidation;
    if (dynamic_cast<const json::exception*>(&e)) return kValidation;
    return kNumeric;
}

int replay(const json& manifest, std::ostream& out, std::ostream& err) {
    try {
        if (manifest.value("schema", "") != "glhnn-run-manifest") throw InputError("not a run manifest");
        if (manifest.value("schema_version", 0) != kManifestSchemaVersion) {
            throw ConfigError("unsupported manifest schema version " + manifest.value("schema_version", json()).dump());
        }
        const std::string command = manifest.at("command").get<std::string>();
        const std::string source = manifest.value("seed_source", "flag");
        const json& opts = manifest.at("options");
        if (command == "generate") return cmd_generate(opts.get<GenerateOptions>(), source, out, err);
        if (command == "train") return cmd_train(opts.get<TrainOptions>(), source, out, err);
        if (command == "xval") return cmd_xval(opts.get<XvalOptions>(), source, out, err);
        if (command == "classify") return cmd_classify(opts.get<ClassifyOptions>(), out, err);
        if (command == "hmm-fit") return cmd_hmm_fit(opts.get<HmmFitOptions>(), source, out, err);
        if (command == "report") return cmd_report(opts.get<ReportOptions>(), out, err);
        throw InputError("manifest names unknown command '" + command + "'");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace glhnn::cli
