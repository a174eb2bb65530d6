#include "ganaudit/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ganaudit/ais.hpp"
#include "ganaudit/analysis.hpp"
#include "ganaudit/dataset.hpp"
#include "ganaudit/density.hpp"
#include "ganaudit/inference.hpp"
#include "ganaudit/models.hpp"
#include "ganaudit/parallel.hpp"
#include "ganaudit/projection.hpp"
#include "ganaudit/svg.hpp"
#include "ganaudit/typicality.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ganaudit {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);  // LF endings everywhere
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width mismatch");
        line(row);
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        return fields;
    };
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    table.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != table.header.size())
            throw std::runtime_error("read_csv: malformed row in " + path);
        table.rows.push_back(std::move(fields));
    }
    return table;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("csv: no column named " + name);
}

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// ---------------------------------------------------------------- options

struct AisOpts {
    int steps = 500;
    int chains = 4;
    int leapfrogs = 10;
    double step_size = 0.05;
    double target_accept = 0.65;
    double smoothing = 0.9;
    double sharpness = 4.0;

    AISConfig config() const {
        AISConfig c;
        c.steps = steps;
        c.chains = chains;
        c.leapfrog_steps = leapfrogs;
        c.initial_step_size = step_size;
        c.target_accept = target_accept;
        c.adapt_smoothing = smoothing;
        c.schedule_sharpness = sharpness;
        return c;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--steps", steps, "AIS intermediate distributions");
        cmd->add_option("--chains", chains, "AIS chains per sample");
        cmd->add_option("--leapfrogs", leapfrogs, "leapfrog steps per HMC transition");
        cmd->add_option("--step-size", step_size, "initial HMC step size");
        cmd->add_option("--target-accept", target_accept, "step-size adaptation target");
        cmd->add_option("--smoothing", smoothing, "acceptance moving-average smoothing");
        cmd->add_option("--sharpness", sharpness, "sigmoidal schedule sharpness");
    }

    json to_json() const {
        return {{"steps", steps},       {"chains", chains},
                {"leapfrogs", leapfrogs}, {"step-size", step_size},
                {"target-accept", target_accept}, {"smoothing", smoothing},
                {"sharpness", sharpness}};
    }
};

struct InvOpts {
    int iterations = 750;
    int restarts = 4;
    int init_pool = 500;
    double lr0 = 0.05;

    InversionConfig config() const {
        InversionConfig c;
        c.iterations = iterations;
        c.restarts = restarts;
        c.init_pool = init_pool;
        c.lr0 = lr0;
        return c;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--iterations", iterations, "optimizer steps per restart");
        cmd->add_option("--restarts", restarts, "independent restarts per sample");
        cmd->add_option("--init-pool", init_pool, "prior samples scanned for the init");
        cmd->add_option("--lr0", lr0, "initial learning rate of the cosine schedule");
    }

    json to_json() const {
        return {{"iterations", iterations},
                {"restarts", restarts},
                {"init-pool", init_pool},
                {"lr0", lr0}};
    }
};

std::string default_out_dir() {
    const char* env = std::getenv("GANAUDIT_OUT");
    return env ? env : "";
}

void require_out(const std::string& out) {
    if (out.empty())
        throw std::invalid_argument("--out is required (or set GANAUDIT_OUT)");
}

std::string write_manifest(const std::string& out_dir, const std::string& command,
                           json options) {
    json manifest;
    manifest["command"] = command;
    manifest["options"] = std::move(options);
    manifest["format_version"] = 1;
    std::string hash = config_hash(manifest.dump());
    manifest["config_hash"] = hash;
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
    out << manifest.dump(2) << "\n";
    return hash;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

// sigma2 flag accepts a number or the word "estimate" (mean squared
// reconstruction error of a projection pass over --train).
double resolve_sigma2(const std::string& sigma2_flag, const LoadedModel& lm,
                      const std::string& train_dir, const InvOpts& inv,
                      std::uint64_t seed, int workers) {
    if (sigma2_flag == "model") {
        if (!lm.sigma2)
            throw std::invalid_argument("--sigma2 model: manifest has no sigma2 field");
        return *lm.sigma2;
    }
    if (sigma2_flag == "estimate") {
        if (train_dir.empty())
            throw std::invalid_argument("--sigma2 estimate requires --train");
        Dataset train = load_dataset(train_dir);
        auto errors = recon_error_set(lm.model, train.samples, inv.config(),
                                      derive_seed(seed, 0x73696732), workers);
        std::vector<double> l2(errors.size());
        for (std::size_t i = 0; i < errors.size(); ++i) l2[i] = errors[i].error;
        return sigma2_from_errors(l2, lm.model.output_size());
    }
    try {
        std::size_t pos = 0;
        double v = std::stod(sigma2_flag, &pos);
        if (pos != sigma2_flag.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("--sigma2 must be a number, 'estimate' or 'model', got '" +
                                    sigma2_flag + "'");
    }
}

// Entries of the form id=path, ids dense from 0.
std::vector<std::string> parse_class_models(const std::vector<std::string>& entries) {
    std::map<int, std::string> by_id;
    for (const std::string& e : entries) {
        auto eq = e.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--model expects id=path, got '" + e + "'");
        int id = std::stoi(e.substr(0, eq));
        if (by_id.count(id)) throw std::invalid_argument("--model: duplicate class id " + std::to_string(id));
        by_id[id] = e.substr(eq + 1);
    }
    if (by_id.size() < 2) throw std::invalid_argument("--model: need at least 2 classes");
    std::vector<std::string> paths;
    for (const auto& [id, path] : by_id) {
        if (id != static_cast<int>(paths.size()))
            throw std::invalid_argument("--model: class ids must be dense from 0");
        paths.push_back(path);
    }
    return paths;
}

std::vector<std::pair<std::string, std::string>> parse_named_paths(
    const std::vector<std::string>& entries, const std::string& flag) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& e : entries) {
        auto eq = e.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(flag + " expects name=path, got '" + e + "'");
        out.emplace_back(e.substr(0, eq), e.substr(eq + 1));
    }
    return out;
}

// ------------------------------------------------------------ subcommands

struct CommonOpts {
    std::string out = default_out_dir();
    std::uint64_t seed = 0;
    int workers = 1;
    std::string config_file;

    void add_to(CLI::App* cmd, bool with_workers = true) {
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--seed", seed, "master seed; fully determines all randomness");
        if (with_workers) cmd->add_option("--workers", workers, "parallel worker cap");
        cmd->add_option("--config", config_file, "JSON config file (flags override)");
    }

    json base_json() const {
        return {{"out", out}, {"seed", seed}, {"workers", workers}};
    }
};

int cmd_synth(const CommonOpts& common, const std::string& kind,
              const SyntheticParams& params) {
    require_out(common.out);
    auto created = make_synthetic(synthetic_kind_from_string(kind), params, common.seed,
                                  common.out);
    json opts = common.base_json();
    opts["kind"] = kind;
    opts["n"] = params.n;
    opts["n-test"] = params.n_test;
    opts["dim"] = params.dim;
    opts["height"] = params.height;
    opts["width"] = params.width;
    opts["latent-k"] = params.latent_k;
    opts["sigma2"] = params.sigma2;
    opts["mean-scale"] = params.mean_scale;
    opts["shift"] = params.shift;
    opts["value"] = params.value;
    write_manifest(common.out, "synth", opts);
    for (const std::string& path : created) std::cout << path << "\n";
    return 0;
}

int cmd_fit_ppca(const CommonOpts& common, const std::string& data_dir, int k, int label,
                 const std::string& name) {
    require_out(common.out);
    Dataset ds = load_dataset(data_dir);
    std::vector<Tensor> samples;
    if (label >= 0) {
        if (ds.labels.empty())
            throw std::invalid_argument("--label given but dataset has no labels");
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            if (ds.labels[i] == label) samples.push_back(ds.samples[i]);
        if (samples.empty())
            throw std::invalid_argument("--label " + std::to_string(label) +
                                        ": no samples with that label");
    } else {
        samples = ds.samples;
    }
    PpcaFit fit = ppca_fit(samples, k);
    save_model(common.out, fit.model, name, fit.sigma2);

    json summary;
    summary["sigma2"] = fit.sigma2;
    summary["degenerate"] = fit.degenerate;
    summary["n"] = samples.size();
    summary["k"] = k;
    summary["eigenvalues"] = fit.eigenvalues;
    write_json((fs::path(common.out) / "fit.json").string(), summary);

    json opts = common.base_json();
    opts["data"] = data_dir;
    opts["k"] = k;
    opts["label"] = label;
    opts["name"] = name;
    write_manifest(common.out, "fit-ppca", opts);
    return 0;
}

int cmd_sample(const CommonOpts& common, const std::string& model_dir, int n, double sigma2,
               const std::string& group) {
    require_out(common.out);
    LoadedModel lm = load_model(model_dir);
    Dataset ds;
    ds.group = group;
    ds.samples = sample_dataset(lm.model, sigma2, n, common.seed);
    save_dataset(common.out, ds);

    json opts = common.base_json();
    opts["model"] = model_dir;
    opts["n"] = n;
    opts["sigma2"] = sigma2;
    opts["group"] = group;
    write_manifest(common.out, "sample", opts);
    return 0;
}

int cmd_project(const CommonOpts& common, const std::string& model_dir,
                const std::string& data_dir, const InvOpts& inv) {
    require_out(common.out);
    LoadedModel lm = load_model(model_dir);
    Dataset ds = load_dataset(data_dir);
    auto errors = recon_error_set(lm.model, ds.samples, inv.config(), common.seed,
                                  common.workers);

    std::vector<std::vector<std::string>> rows;
    std::vector<double> l2;
    for (const ReconError& e : errors) {
        rows.push_back({std::to_string(e.sample_id), ds.group, format_double(e.error),
                        std::to_string(e.winner_restart)});
        l2.push_back(e.error);
    }
    fs::create_directories(common.out);
    write_csv((fs::path(common.out) / "projection.csv").string(),
              {"sample_id", "group_label", "error", "winner_restart"}, rows);

    std::vector<double> sorted = l2;
    std::sort(sorted.begin(), sorted.end());
    json summary;
    summary["model"] = lm.name;
    summary["n"] = l2.size();
    summary["median_error"] = sorted[sorted.size() / 2];
    summary["sigma2_estimate"] = sigma2_from_errors(l2, lm.model.output_size());
    write_json((fs::path(common.out) / "summary.json").string(), summary);

    json opts = common.base_json();
    opts["model"] = model_dir;
    opts["data"] = data_dir;
    opts["inversion"] = inv.to_json();
    write_manifest(common.out, "project", opts);
    return 0;
}

int cmd_ll(const CommonOpts& common, const std::string& model_dir,
           const std::string& data_dir, const std::string& sigma2_flag,
           const std::string& train_dir, const AisOpts& ais, const InvOpts& inv,
           bool trace) {
    require_out(common.out);
    LoadedModel lm = load_model(model_dir);
    Dataset ds = load_dataset(data_dir);
    double sigma2 = resolve_sigma2(sigma2_flag, lm, train_dir, inv, common.seed,
                                   common.workers);
    auto estimates =
        estimate_ll(lm.model, ds.samples, sigma2, ais.config(), common.seed, common.workers);

    std::size_t dims = lm.model.output_size();
    std::vector<std::vector<std::string>> rows;
    double mean_ll = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const LLEstimate& e = estimates[i];
        double spread = *std::max_element(e.chain_logw.begin(), e.chain_logw.end()) -
                        *std::min_element(e.chain_logw.begin(), e.chain_logw.end());
        rows.push_back({std::to_string(i), ds.group, format_double(e.combined),
                        format_double(bits_per_dim(e.combined, dims)), format_double(spread),
                        format_double(e.mean_acceptance), std::to_string(e.divergences),
                        e.flagged ? "1" : "0"});
        mean_ll += e.combined;
    }
    mean_ll /= static_cast<double>(estimates.size());
    fs::create_directories(common.out);
    write_csv((fs::path(common.out) / "ll.csv").string(),
              {"sample_id", "group", "ll_nats", "ll_bits_per_dim", "chain_spread",
               "mean_acceptance", "divergences", "flagged"},
              rows);

    if (trace) {
        std::vector<std::vector<std::string>> trace_rows;
        for (std::size_t i = 0; i < estimates.size(); ++i)
            for (std::size_t t = 0; t < estimates[i].trace.size(); ++t)
                trace_rows.push_back({std::to_string(i), std::to_string(t + 1),
                                      format_double(estimates[i].trace[t])});
        write_csv((fs::path(common.out) / "trace.csv").string(),
                  {"sample_id", "step", "ll_nats"}, trace_rows);
    }

    json opts = common.base_json();
    opts["model"] = model_dir;
    opts["data"] = data_dir;
    opts["sigma2"] = sigma2_flag;
    opts["sigma2_resolved"] = sigma2;
    opts["train"] = train_dir;
    opts["ais"] = ais.to_json();
    opts["trace"] = trace;
    std::string hash = write_manifest(common.out, "ll", opts);

    json summary;
    summary["model"] = lm.name;
    summary["n"] = estimates.size();
    summary["sigma2"] = sigma2;
    summary["mean_ll_nats"] = mean_ll;
    summary["mean_ll_bits_per_dim"] = bits_per_dim(mean_ll, dims);
    summary["config_hash"] = hash;
    write_json((fs::path(common.out) / "summary.json").string(), summary);
    return 0;
}

int cmd_classify(const CommonOpts& common, const std::string& method,
                 const std::vector<std::string>& model_entries, const std::string& data_dir,
                 const std::string& train_dir, const std::string& sigma2_flag,
                 const AisOpts& ais, const InvOpts& inv) {
    require_out(common.out);
    Dataset test = load_dataset(data_dir);
    if (test.labels.empty())
        throw std::invalid_argument("classify: dataset must carry labels");

    std::vector<int> predicted(test.samples.size());
    std::vector<std::vector<double>> scores(test.samples.size());
    int n_classes = 0;

    if (method == "1nn") {
        if (train_dir.empty()) throw std::invalid_argument("--method 1nn requires --train");
        Dataset train_ds = load_dataset(train_dir);
        LabeledDataset train{train_ds.samples, train_ds.labels, train_ds.group};
        if (train.labels.empty())
            throw std::invalid_argument("classify: train dataset must carry labels");
        n_classes = *std::max_element(train.labels.begin(), train.labels.end()) + 1;
        DistanceFn dist = l2_distance_fn();
        parallel_for(test.samples.size(), common.workers, [&](std::size_t i) {
            KnnDecision d = knn1_classify(train, test.samples[i], dist);
            predicted[i] = d.class_id;
            scores[i].assign(n_classes, 0.0);
            scores[i][d.class_id] = -d.distance;
        });
    } else {
        auto paths = parse_class_models(model_entries);
        n_classes = static_cast<int>(paths.size());
        std::vector<GeneratorModel> models;
        std::optional<double> manifest_sigma2;
        for (const std::string& p : paths) {
            LoadedModel lm = load_model(p);
            if (!manifest_sigma2 && lm.sigma2) manifest_sigma2 = lm.sigma2;
            models.push_back(std::move(lm.model));
        }
        if (method == "ll") {
            double sigma2;
            if (sigma2_flag == "model") {
                if (!manifest_sigma2)
                    throw std::invalid_argument("--sigma2 model: no manifest carries sigma2");
                sigma2 = *manifest_sigma2;
            } else {
                LoadedModel first = load_model(paths[0]);
                sigma2 = resolve_sigma2(sigma2_flag, first, train_dir, inv, common.seed,
                                        common.workers);
            }
            AISConfig cfg = ais.config();
            parallel_for(test.samples.size(), common.workers, [&](std::size_t i) {
                ClassDecision d = classify_by_ll(models, test.samples[i], sigma2, cfg,
                                                 derive_seed(common.seed, i));
                predicted[i] = d.class_id;
                scores[i] = d.scores;
            });
        } else if (method == "projection") {
            InversionConfig cfg = inv.config();
            DistanceFn dist = l2_distance_fn();
            parallel_for(test.samples.size(), common.workers, [&](std::size_t i) {
                ClassDecision d = classify_by_projection(models, test.samples[i], cfg, dist,
                                                         derive_seed(common.seed, i));
                predicted[i] = d.class_id;
                // projection scores are distances; negate so higher = chosen
                scores[i] = d.scores;
                for (double& s : scores[i]) s = -s;
            });
        } else {
            throw std::invalid_argument("--method must be ll, projection or 1nn, got '" +
                                        method + "'");
        }
    }

    ClassifierReport report =
        make_classifier_report(predicted, scores, test.labels, n_classes, method);

    std::vector<std::string> header{"sample_id", "true_label", "predicted"};
    for (int c = 0; c < n_classes; ++c) header.push_back("score_" + std::to_string(c));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), std::to_string(test.labels[i]),
                                     std::to_string(predicted[i])};
        for (int c = 0; c < n_classes; ++c) row.push_back(format_double(scores[i][c]));
        rows.push_back(std::move(row));
    }
    fs::create_directories(common.out);
    write_csv((fs::path(common.out) / "classify.csv").string(), header, rows);

    json opts = common.base_json();
    opts["method"] = method;
    opts["model"] = model_entries;
    opts["data"] = data_dir;
    opts["train"] = train_dir;
    opts["sigma2"] = sigma2_flag;
    opts["ais"] = ais.to_json();
    opts["inversion"] = inv.to_json();
    std::string hash = write_manifest(common.out, "classify", opts);

    json summary;
    summary["method"] = method;
    summary["accuracy"] = report.accuracy;
    summary["confusion"] = report.confusion;
    summary["n"] = predicted.size();
    summary["config_hash"] = hash;
    write_json((fs::path(common.out) / "summary.json").string(), summary);
    return 0;
}

int cmd_outlier(const CommonOpts& common, const std::string& method,
                const std::string& model_dir, const std::string& train_dir,
                const std::string& inlier_dir, const std::string& outlier_dir,
                const std::string& sigma2_flag, const AisOpts& ais, const InvOpts& inv) {
    require_out(common.out);
    Dataset inliers = load_dataset(inlier_dir);
    Dataset outliers = load_dataset(outlier_dir);

    auto score_group = [&](const std::vector<Tensor>& xs,
                           std::uint64_t tag) -> std::vector<double> {
        std::vector<double> s(xs.size());
        if (method == "projection") {
            LoadedModel lm = load_model(model_dir);
            auto errs = recon_error_set(lm.model, xs, inv.config(),
                                        derive_seed(common.seed, tag), common.workers);
            for (std::size_t i = 0; i < xs.size(); ++i) s[i] = errs[i].error;
        } else if (method == "ll") {
            LoadedModel lm = load_model(model_dir);
            double sigma2 = resolve_sigma2(sigma2_flag, lm, train_dir, inv, common.seed,
                                           common.workers);
            auto lls = estimate_ll(lm.model, xs, sigma2, ais.config(),
                                   derive_seed(common.seed, tag), common.workers);
            for (std::size_t i = 0; i < xs.size(); ++i) s[i] = -lls[i].combined;
        } else if (method == "1nn") {
            if (train_dir.empty()) throw std::invalid_argument("--method 1nn requires --train");
            Dataset train = load_dataset(train_dir);
            DistanceFn dist = l2_distance_fn();
            parallel_for(xs.size(), common.workers, [&](std::size_t i) {
                s[i] = knn1_outlier_score(train.samples, xs[i], dist);
            });
        } else {
            throw std::invalid_argument("--method must be ll, projection or 1nn, got '" +
                                        method + "'");
        }
        return s;
    };

    std::vector<double> in_scores = score_group(inliers.samples, 0);
    std::vector<double> out_scores = score_group(outliers.samples, 1);
    double auc = roc_auc(in_scores, out_scores);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < in_scores.size(); ++i)
        rows.push_back({std::to_string(i), "inlier", format_double(in_scores[i])});
    for (std::size_t i = 0; i < out_scores.size(); ++i)
        rows.push_back({std::to_string(i), "outlier", format_double(out_scores[i])});
    fs::create_directories(common.out);
    write_csv((fs::path(common.out) / "scores.csv").string(),
              {"sample_id", "group", "score"}, rows);

    json opts = common.base_json();
    opts["method"] = method;
    opts["model"] = model_dir;
    opts["train"] = train_dir;
    opts["inliers"] = inlier_dir;
    opts["outliers"] = outlier_dir;
    opts["sigma2"] = sigma2_flag;
    opts["ais"] = ais.to_json();
    opts["inversion"] = inv.to_json();
    std::string hash = write_manifest(common.out, "outlier", opts);

    json summary;
    summary["method"] = method;
    summary["auc"] = auc;
    summary["n_inliers"] = in_scores.size();
    summary["n_outliers"] = out_scores.size();
    summary["config_hash"] = hash;
    write_json((fs::path(common.out) / "summary.json").string(), summary);
    return 0;
}

int cmd_typicality(const CommonOpts& common, const std::string& model_dir,
                   const std::string& sigma2_flag, const std::string& train_dir,
                   const std::vector<std::string>& group_entries, int entropy_samples,
                   int group_size, double level, int bootstrap, const AisOpts& ais,
                   const InvOpts& inv) {
    require_out(common.out);
    LoadedModel lm = load_model(model_dir);
    double sigma2 = resolve_sigma2(sigma2_flag, lm, train_dir, inv, common.seed,
                                   common.workers);

    std::vector<std::pair<std::string, std::vector<Tensor>>> groups;
    for (const auto& [name, path] : parse_named_paths(group_entries, "--group"))
        groups.emplace_back(name, load_dataset(path).samples);

    TypicalityReport report =
        build_typicality_report(lm.model, sigma2, groups, entropy_samples, group_size, level,
                                bootstrap, ais.config(), common.seed, common.workers);

    std::size_t dims = lm.model.output_size();
    json jreport;
    jreport["model"] = lm.name;
    jreport["sigma2"] = sigma2;
    jreport["entropy_hat_nats"] = report.entropy_hat;
    jreport["entropy_hat_bits_per_dim"] = bits_per_dim(report.entropy_hat, dims);
    jreport["epsilon_nats"] = report.epsilon;
    jreport["group_size"] = report.group_size;
    jreport["level"] = report.level;
    jreport["bootstrap_resamples"] = report.bootstrap_resamples;
    json jgroups = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const TypicalityGroupEntry& g : report.groups) {
        json jg;
        jg["name"] = g.name;
        jg["n"] = g.n;
        jg["mean_ll_nats"] = g.mean_ll_nats;
        jg["mean_ll_bits_per_dim"] = g.mean_ll_bits_per_dim;
        jg["deviation_nats"] = g.deviation;
        jg["margin_nats"] = g.margin;
        jg["member"] = g.member;
        jgroups.push_back(jg);
        for (std::size_t i = 0; i < g.lls.size(); ++i)
            rows.push_back({g.name, std::to_string(i), format_double(g.lls[i]),
                            format_double(bits_per_dim(g.lls[i], dims))});
    }
    jreport["groups"] = jgroups;
    fs::create_directories(common.out);
    write_json((fs::path(common.out) / "report.json").string(), jreport);
    write_csv((fs::path(common.out) / "lls.csv").string(),
              {"group", "sample_id", "ll_nats", "ll_bits_per_dim"}, rows);

    json opts = common.base_json();
    opts["model"] = model_dir;
    opts["sigma2"] = sigma2_flag;
    opts["sigma2_resolved"] = sigma2;
    opts["train"] = train_dir;
    opts["group"] = group_entries;
    opts["n"] = entropy_samples;
    opts["group-size"] = group_size;
    opts["level"] = level;
    opts["bootstrap"] = bootstrap;
    opts["ais"] = ais.to_json();
    write_manifest(common.out, "typicality", opts);
    return 0;
}

int cmd_cv(const CommonOpts& common, const std::string& data_dir, int patch,
           const std::string& ll_csv) {
    require_out(common.out);
    Dataset ds = load_dataset(data_dir);
    std::vector<double> cvs(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) cvs[i] = patch_cv(ds.samples[i], patch);

    std::vector<std::string> header{"sample_id", "cv"};
    std::vector<double> lls;
    if (!ll_csv.empty()) {
        CsvTable table = read_csv(ll_csv);
        std::size_t id_col = table.column("sample_id");
        std::size_t ll_col = table.column("ll_nats");
        std::vector<double> by_id(ds.samples.size(),
                                  std::numeric_limits<double>::quiet_NaN());
        for (const auto& row : table.rows) {
            std::size_t id = std::stoul(row[id_col]);
            if (id < by_id.size()) by_id[id] = std::stod(row[ll_col]);
        }
        for (std::size_t i = 0; i < by_id.size(); ++i) {
            if (std::isnan(by_id[i]))
                throw std::invalid_argument("--ll: missing ll for sample " +
                                            std::to_string(i));
        }
        lls = std::move(by_id);
        header.push_back("ll_nats");
    }

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < cvs.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), format_double(cvs[i])};
        if (!lls.empty()) row.push_back(format_double(lls[i]));
        rows.push_back(std::move(row));
    }
    fs::create_directories(common.out);
    write_csv((fs::path(common.out) / "cv.csv").string(), header, rows);

    json summary;
    summary["n"] = cvs.size();
    summary["patch"] = patch;
    if (!lls.empty()) summary["pearson_cv_ll"] = pearson(cvs, lls);
    write_json((fs::path(common.out) / "summary.json").string(), summary);

    json opts = common.base_json();
    opts["data"] = data_dir;
    opts["patch"] = patch;
    opts["ll"] = ll_csv;
    write_manifest(common.out, "cv", opts);
    return 0;
}

int cmd_plot_scatter(const CommonOpts& common, const std::string& csv_in,
                     const std::string& x_col, const std::string& y_col,
                     const std::string& title) {
    require_out(common.out);
    CsvTable table = read_csv(csv_in);
    std::size_t xc = table.column(x_col);
    std::size_t yc = table.column(y_col);
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
        xs.push_back(std::stod(row[xc]));
        ys.push_back(std::stod(row[yc]));
    }
    SvgScatterSpec spec;
    spec.title = title;
    spec.x_label = x_col;
    spec.y_label = y_col;
    fs::create_directories(common.out);
    emit_svg_scatter((fs::path(common.out) / "scatter.svg").string(), xs, ys, spec);

    json opts = common.base_json();
    opts["in"] = csv_in;
    opts["scatter"] = true;
    opts["x-col"] = x_col;
    opts["y-col"] = y_col;
    opts["title"] = title;
    write_manifest(common.out, "plot", opts);
    return 0;
}

int cmd_plot(const CommonOpts& common, const std::string& csv_in,
             const std::string& value_col, const std::string& group_col, int bins,
             double epsilon, double center, bool has_band, const std::string& title) {
    require_out(common.out);
    CsvTable table = read_csv(csv_in);
    std::size_t vc = table.column(value_col);
    std::size_t gc = table.column(group_col);

    // groups in first-appearance order; palette order is documented
    std::vector<SvgGroupSeries> groups;
    for (const auto& row : table.rows) {
        const std::string& g = row[gc];
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const SvgGroupSeries& s) { return s.name == g; });
        if (it == groups.end()) {
            groups.push_back({g, {}});
            it = groups.end() - 1;
        }
        it->values.push_back(std::stod(row[vc]));
    }

    SvgHistogramSpec spec;
    spec.bins = bins;
    spec.title = title;
    spec.x_label = value_col;
    spec.has_band = has_band;
    spec.band_center = center;
    spec.band_epsilon = epsilon;
    fs::create_directories(common.out);
    emit_svg_histogram((fs::path(common.out) / "histogram.svg").string(), groups, spec);

    json opts = common.base_json();
    opts["in"] = csv_in;
    opts["value-col"] = value_col;
    opts["group-col"] = group_col;
    opts["bins"] = bins;
    opts["epsilon"] = has_band ? json(epsilon) : json();
    opts["center"] = has_band ? json(center) : json();
    opts["title"] = title;
    write_manifest(common.out, "plot", opts);
    return 0;
}

// ------------------------------------------------------ config expansion

// The JSON config file maps long option names (without dashes) to values.
// Values become synthetic argv tokens inserted right after the subcommand,
// so explicit flags always win and unknown keys are rejected by the parser
// by name.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string config_path;
    std::size_t config_at = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            config_at = i;
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            config_at = i;
            break;
        }
    }
    if (config_path.empty()) return args;
    if (config_at < 1) throw std::invalid_argument("--config must follow a subcommand");

    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("config: cannot open " + config_path);
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::invalid_argument("config: top level must be an object");

    auto user_has = [&](const std::string& flag) {
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::vector<std::string> tokens;
    for (const auto& [key, value] : cfg.items()) {
        std::string flag = "--" + key;
        if (user_has(flag)) continue;
        if (value.is_array()) {
            for (const auto& item : value) {
                tokens.push_back(flag);
                tokens.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
        } else if (value.is_boolean()) {
            if (value.get<bool>()) tokens.push_back(flag);
        } else {
            tokens.push_back(flag);
            tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }

    // insert after the subcommand token (args[0])
    std::vector<std::string> out;
    out.push_back(args[0]);
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args) {
    CLI::App app{"generative-model audit toolkit: projection, AIS log-likelihood, "
                 "typicality and patch statistics for decoder models"};
    app.require_subcommand(1);

    // synth
    CommonOpts synth_common;
    std::string synth_kind;
    SyntheticParams synth_params;
    CLI::App* synth = app.add_subcommand("synth", "generate synthetic datasets and models");
    synth_common.add_to(synth, false);
    synth->add_option("--kind", synth_kind,
                      "two-class-ppca | spiral | single-color | shifted-cluster")
        ->required();
    synth->add_option("--n", synth_params.n, "samples (per class for two-class-ppca)");
    synth->add_option("--n-test", synth_params.n_test, "held-out samples per class");
    synth->add_option("--dim", synth_params.dim, "flat sample dimension");
    synth->add_option("--height", synth_params.height, "image height");
    synth->add_option("--width", synth_params.width, "image width");
    synth->add_option("--latent-k", synth_params.latent_k, "intrinsic latent dimension");
    synth->add_option("--sigma2", synth_params.sigma2, "observation noise variance");
    synth->add_option("--mean-scale", synth_params.mean_scale, "class mean magnitude");
    synth->add_option("--shift", synth_params.shift, "shifted-cluster offset");
    synth->add_option("--value", synth_params.value,
                      "single-color level; negative = random per sample");

    // fit-ppca
    CommonOpts fit_common;
    std::string fit_data, fit_name = "ppca";
    int fit_k = 2, fit_label = -1;
    CLI::App* fit = app.add_subcommand("fit-ppca", "closed-form PPCA fit");
    fit_common.add_to(fit, false);
    fit->add_option("--data", fit_data, "dataset directory")->required();
    fit->add_option("--k", fit_k, "latent dimension");
    fit->add_option("--label", fit_label, "fit only samples with this label");
    fit->add_option("--name", fit_name, "model name recorded in the manifest");

    // sample
    CommonOpts sample_common;
    std::string sample_model, sample_group = "generated";
    int sample_n = 100;
    double sample_sigma2 = 0.0;
    CLI::App* sample = app.add_subcommand("sample", "draw from a model");
    sample_common.add_to(sample, false);
    sample->add_option("--model", sample_model, "model directory")->required();
    sample->add_option("--n", sample_n, "number of samples");
    sample->add_option("--sigma2", sample_sigma2, "observation noise variance");
    sample->add_option("--group", sample_group, "group tag for the dataset");

    // project
    CommonOpts project_common;
    std::string project_model, project_data;
    InvOpts project_inv;
    CLI::App* project = app.add_subcommand("project", "latent inversion of a dataset");
    project_common.add_to(project);
    project->add_option("--model", project_model, "model directory")->required();
    project->add_option("--data", project_data, "dataset directory")->required();
    project_inv.add_to(project);

    // ll
    CommonOpts ll_common;
    std::string ll_model, ll_data, ll_sigma2 = "model", ll_train;
    AisOpts ll_ais;
    InvOpts ll_inv;
    bool ll_trace = false;
    CLI::App* ll = app.add_subcommand("ll", "AIS log-likelihood of a dataset");
    ll_common.add_to(ll);
    ll->add_option("--model", ll_model, "model directory")->required();
    ll->add_option("--data", ll_data, "dataset directory")->required();
    ll->add_option("--sigma2", ll_sigma2, "number, 'estimate' or 'model'");
    ll->add_option("--train", ll_train, "train dataset for --sigma2 estimate");
    ll->add_flag("--trace", ll_trace, "write per-step convergence trace");
    ll_ais.add_to(ll);
    ll_inv.add_to(ll);

    // classify
    CommonOpts classify_common;
    std::string classify_method = "ll", classify_data, classify_train,
                classify_sigma2 = "model";
    std::vector<std::string> classify_models;
    AisOpts classify_ais;
    InvOpts classify_inv;
    CLI::App* classify = app.add_subcommand("classify", "generative classification");
    classify_common.add_to(classify);
    classify->add_option("--method", classify_method, "ll | projection | 1nn");
    classify->add_option("--model", classify_models, "class model as id=path (repeatable)");
    classify->add_option("--data", classify_data, "labeled test dataset")->required();
    classify->add_option("--train", classify_train, "labeled train dataset (1nn)");
    classify->add_option("--sigma2", classify_sigma2, "number, 'estimate' or 'model'");
    classify_ais.add_to(classify);
    classify_inv.add_to(classify);

    // outlier
    CommonOpts outlier_common;
    std::string outlier_method = "projection", outlier_model, outlier_train, outlier_in,
                outlier_out, outlier_sigma2 = "model";
    AisOpts outlier_ais;
    InvOpts outlier_inv;
    CLI::App* outlier = app.add_subcommand("outlier", "outlier scoring and ROC AUC");
    outlier_common.add_to(outlier);
    outlier->add_option("--method", outlier_method, "ll | projection | 1nn");
    outlier->add_option("--model", outlier_model, "model directory (ll, projection)");
    outlier->add_option("--train", outlier_train, "train dataset (1nn, sigma2 estimate)");
    outlier->add_option("--inliers", outlier_in, "inlier dataset")->required();
    outlier->add_option("--outliers", outlier_out, "outlier dataset")->required();
    outlier->add_option("--sigma2", outlier_sigma2, "number, 'estimate' or 'model'");
    outlier_ais.add_to(outlier);
    outlier_inv.add_to(outlier);

    // typicality
    CommonOpts typ_common;
    std::string typ_model, typ_sigma2 = "model", typ_train;
    std::vector<std::string> typ_groups;
    int typ_n = 500, typ_group_size = 50, typ_bootstrap = 10000;
    double typ_level = 0.95;
    AisOpts typ_ais;
    InvOpts typ_inv;
    CLI::App* typ = app.add_subcommand("typicality", "typical-set membership test");
    typ_common.add_to(typ);
    typ->add_option("--model", typ_model, "model directory")->required();
    typ->add_option("--sigma2", typ_sigma2, "number, 'estimate' or 'model'");
    typ->add_option("--train", typ_train, "train dataset for --sigma2 estimate");
    typ->add_option("--group", typ_groups, "test group as name=path (repeatable)")
        ->required();
    typ->add_option("--n", typ_n, "generated samples for the entropy estimate");
    typ->add_option("--group-size", typ_group_size, "typical-set group size N");
    typ->add_option("--level", typ_level, "bootstrap confidence level");
    typ->add_option("--bootstrap", typ_bootstrap, "bootstrap resamples");
    typ_ais.add_to(typ);
    typ_inv.add_to(typ);

    // cv
    CommonOpts cv_common;
    std::string cv_data, cv_ll;
    int cv_patch = 8;
    CLI::App* cv = app.add_subcommand("cv", "patch coefficient-of-variation statistics");
    cv_common.add_to(cv, false);
    cv->add_option("--data", cv_data, "image dataset directory")->required();
    cv->add_option("--patch", cv_patch, "patch side length");
    cv->add_option("--ll", cv_ll, "ll.csv to join for the CV/LL correlation");

    // plot
    CommonOpts plot_common;
    std::string plot_in, plot_value = "ll_nats", plot_group = "group", plot_title;
    std::string plot_x = "cv", plot_y = "ll_nats";
    int plot_bins = 40;
    double plot_epsilon = 0.0, plot_center = 0.0;
    bool plot_scatter = false;
    CLI::App* plot = app.add_subcommand("plot", "SVG histogram or scatter from a CSV");
    plot_common.add_to(plot, false);
    plot->add_option("--in", plot_in, "input CSV")->required();
    plot->add_option("--value-col", plot_value, "value column");
    plot->add_option("--group-col", plot_group, "group column");
    plot->add_option("--bins", plot_bins, "histogram bins");
    CLI::Option* eps_opt = plot->add_option("--epsilon", plot_epsilon,
                                            "half-width of the shaded band");
    CLI::Option* center_opt =
        plot->add_option("--center", plot_center, "center of the shaded band");
    eps_opt->needs(center_opt);
    center_opt->needs(eps_opt);
    plot->add_flag("--scatter", plot_scatter, "scatter plot of --x-col vs --y-col");
    plot->add_option("--x-col", plot_x, "scatter x column");
    plot->add_option("--y-col", plot_y, "scatter y column");
    plot->add_option("--title", plot_title, "plot title");

    std::string active_command = "?";
    try {
        std::vector<std::string> args = expand_config(raw_args);
        if (!args.empty()) active_command = args[0];
        std::vector<const char*> argv;
        argv.push_back("ganaudit");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());

        if (synth->parsed()) return cmd_synth(synth_common, synth_kind, synth_params);
        if (fit->parsed())
            return cmd_fit_ppca(fit_common, fit_data, fit_k, fit_label, fit_name);
        if (sample->parsed())
            return cmd_sample(sample_common, sample_model, sample_n, sample_sigma2,
                              sample_group);
        if (project->parsed())
            return cmd_project(project_common, project_model, project_data, project_inv);
        if (ll->parsed())
            return cmd_ll(ll_common, ll_model, ll_data, ll_sigma2, ll_train, ll_ais, ll_inv,
                          ll_trace);
        if (classify->parsed())
            return cmd_classify(classify_common, classify_method, classify_models,
                                classify_data, classify_train, classify_sigma2, classify_ais,
                                classify_inv);
        if (outlier->parsed())
            return cmd_outlier(outlier_common, outlier_method, outlier_model, outlier_train,
                               outlier_in, outlier_out, outlier_sigma2, outlier_ais,
                               outlier_inv);
        if (typ->parsed())
            return cmd_typicality(typ_common, typ_model, typ_sigma2, typ_train, typ_groups,
                                  typ_n, typ_group_size, typ_level, typ_bootstrap, typ_ais,
                                  typ_inv);
        if (cv->parsed()) return cmd_cv(cv_common, cv_data, cv_patch, cv_ll);
        if (plot->parsed()) {
            if (plot_scatter)
                return cmd_plot_scatter(plot_common, plot_in, plot_x, plot_y, plot_title);
            return cmd_plot(plot_common, plot_in, plot_value, plot_group, plot_bins,
                            plot_epsilon, plot_center, eps_opt->count() > 0, plot_title);
        }
        throw std::logic_error("no subcommand dispatched");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"] = {{"command", active_command}, {"message", e.what()}, {"kind", "usage"}};
        std::cerr << err.dump() << "\n";
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"command", active_command}, {"message", e.what()}, {"kind", "runtime"}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace ganaudit
