#include "ganaudit/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "ganaudit/gten.hpp"
#include "ganaudit/models.hpp"
#include "ganaudit/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ganaudit {

void save_dataset(const std::string& dir, const Dataset& ds) {
    if (ds.samples.empty()) throw std::invalid_argument("save_dataset: empty dataset");
    if (!ds.labels.empty() && ds.labels.size() != ds.samples.size())
        throw std::invalid_argument("save_dataset: labels/samples length mismatch");
    fs::create_directories(dir);

    std::vector<std::size_t> stacked_shape;
    stacked_shape.push_back(ds.samples.size());
    for (std::size_t d : ds.samples[0].shape) stacked_shape.push_back(d);
    std::size_t per = ds.samples[0].size();
    std::vector<double> data;
    data.reserve(per * ds.samples.size());
    for (const Tensor& s : ds.samples) {
        if (!s.same_shape(ds.samples[0]))
            throw std::invalid_argument("save_dataset: inconsistent sample shapes");
        data.insert(data.end(), s.data.begin(), s.data.end());
    }
    write_gten((fs::path(dir) / "data.gten").string(), Tensor(stacked_shape, std::move(data)));

    json meta;
    meta["group"] = ds.group;
    meta["n"] = ds.samples.size();
    if (!ds.labels.empty()) meta["labels"] = ds.labels;
    std::ofstream out(fs::path(dir) / "meta.json");
    if (!out) throw std::runtime_error("save_dataset: cannot write meta.json in " + dir);
    out << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    Tensor stacked = read_gten((fs::path(dir) / "data.gten").string());
    if (stacked.shape.empty()) throw std::runtime_error("load_dataset: scalar data file");
    std::ifstream in(fs::path(dir) / "meta.json");
    if (!in) throw std::runtime_error("load_dataset: missing meta.json in " + dir);
    json meta = json::parse(in);

    Dataset ds;
    ds.group = meta.value("group", "");
    if (meta.contains("labels")) ds.labels = meta["labels"].get<std::vector<int>>();

    std::size_t n = stacked.shape[0];
    std::vector<std::size_t> shape(stacked.shape.begin() + 1, stacked.shape.end());
    if (shape.empty()) shape.push_back(1);
    std::size_t per = Tensor::numel(shape);
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> d(stacked.data.begin() + i * per,
                              stacked.data.begin() + (i + 1) * per);
        ds.samples.emplace_back(shape, std::move(d));
    }
    if (!ds.labels.empty() && ds.labels.size() != ds.samples.size())
        throw std::runtime_error("load_dataset: labels/samples length mismatch");
    return ds;
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
    if (s == "two-class-ppca") return SyntheticKind::TwoClassPpca;
    if (s == "spiral") return SyntheticKind::Spiral;
    if (s == "single-color") return SyntheticKind::SingleColor;
    if (s == "shifted-cluster") return SyntheticKind::ShiftedCluster;
    throw std::invalid_argument("unknown synthetic kind: " + s);
}

namespace {

// Random linear decoder with near-orthogonal columns of about unit norm.
GeneratorModel random_linear_model(int dim, int k, double mean_value, Rng& rng) {
    Tensor w = Tensor::zeros({static_cast<std::size_t>(dim), static_cast<std::size_t>(k)});
    for (double& v : w.data) v = rng.normal() / std::sqrt(static_cast<double>(dim));
    Tensor mean = Tensor::zeros({static_cast<std::size_t>(dim)});
    for (double& v : mean.data) v = mean_value;
    return make_linear_model(std::move(w), std::move(mean));
}

std::string write_class_datasets(const fs::path& out, const GeneratorModel& model_a,
                                 const GeneratorModel& model_b, const SyntheticParams& p,
                                 std::uint64_t seed, const std::string& name) {
    Dataset ds;
    ds.group = name;
    auto append = [&](const GeneratorModel& m, int label, int n, std::uint64_t s) {
        std::vector<Tensor> xs = sample_dataset(m, p.sigma2, n, s);
        for (Tensor& x : xs) {
            ds.samples.push_back(std::move(x));
            ds.labels.push_back(label);
        }
    };
    int n = name == "train" ? p.n : p.n_test;
    append(model_a, 0, n, derive_seed(seed, 0, name == "train" ? 0 : 2));
    append(model_b, 1, n, derive_seed(seed, 1, name == "train" ? 1 : 3));
    std::string dir = (out / name).string();
    save_dataset(dir, ds);
    return dir;
}

}  // namespace

std::vector<std::string> make_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                        std::uint64_t seed, const std::string& out_dir) {
    if (params.n < 1) throw std::invalid_argument("make_synthetic: n must be >= 1");
    fs::path out(out_dir);
    fs::create_directories(out);
    std::vector<std::string> created;

    switch (kind) {
        case SyntheticKind::TwoClassPpca: {
            if (params.latent_k < 1 || params.latent_k >= params.dim)
                throw std::invalid_argument("make_synthetic: latent_k must be in [1, dim)");
            Rng rng(derive_seed(seed, 0x70706361));
            GeneratorModel a =
                random_linear_model(params.dim, params.latent_k, params.mean_scale, rng);
            GeneratorModel b =
                random_linear_model(params.dim, params.latent_k, -params.mean_scale, rng);
            created.push_back(write_class_datasets(out, a, b, params, seed, "train"));
            created.push_back(write_class_datasets(out, a, b, params, seed, "test"));
            break;
        }
        case SyntheticKind::Spiral: {
            GeneratorModel spiral = make_spiral_model();
            std::string model_dir = (out / "model").string();
            save_model(model_dir, spiral, "spiral", params.sigma2);
            created.push_back(model_dir);
            Dataset ds;
            ds.group = "spiral";
            ds.samples = sample_dataset(spiral, params.sigma2, params.n, derive_seed(seed, 1));
            std::string data_dir = (out / "data").string();
            save_dataset(data_dir, ds);
            created.push_back(data_dir);
            break;
        }
        case SyntheticKind::SingleColor: {
            Rng rng(derive_seed(seed, 0x636f6c6f));
            Dataset ds;
            ds.group = "single-color";
            std::vector<std::size_t> shape{static_cast<std::size_t>(params.height),
                                           static_cast<std::size_t>(params.width)};
            for (int i = 0; i < params.n; ++i) {
                double level = params.value >= 0.0 ? params.value : rng.uniform();
                Tensor img = Tensor::zeros(shape);
                for (double& v : img.data) v = level;
                ds.samples.push_back(std::move(img));
            }
            std::string dir = (out / "data").string();
            save_dataset(dir, ds);
            created.push_back(dir);
            break;
        }
        case SyntheticKind::ShiftedCluster: {
            Tensor center = Tensor::zeros({static_cast<std::size_t>(params.dim)});
            for (double& v : center.data) v = params.shift;
            GeneratorModel cluster = make_constant_model(std::move(center));
            Dataset ds;
            ds.group = "shifted-cluster";
            ds.samples = sample_dataset(cluster, params.sigma2, params.n, derive_seed(seed, 2));
            std::string dir = (out / "data").string();
            save_dataset(dir, ds);
            created.push_back(dir);
            break;
        }
    }
    return created;
}

}  // namespace ganaudit
