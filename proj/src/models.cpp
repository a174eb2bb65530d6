#include "ganaudit/models.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ganaudit/gten.hpp"
#include "ganaudit/rng.hpp"
#include "json.hpp"
#include "linalg.hpp"

namespace fs = std::filesystem;

namespace ganaudit {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Linear: return "linear";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Constant: return "constant";
        case ModelKind::Spiral: return "spiral";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::Linear;
    if (s == "mlp") return ModelKind::Mlp;
    if (s == "constant") return ModelKind::Constant;
    if (s == "spiral") return ModelKind::Spiral;
    throw std::invalid_argument("unknown model kind: " + s);
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    if (s == "leaky_relu") return Activation::LeakyRelu;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::Linear: return x;
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::LeakyRelu: return x > 0.0 ? x : 0.2 * x;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

// relu subgradient at exactly 0 is 0; leaky keeps the negative-side slope.
double activation_grad(Activation a, double x, double y) {
    switch (a) {
        case Activation::Linear: return 1.0;
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::LeakyRelu: return x > 0.0 ? 1.0 : 0.2;
        case Activation::Sigmoid: return y * (1.0 - y);
    }
    return 1.0;
}

GeneratorModel make_linear_model(Tensor weight, Tensor mean,
                                 std::vector<std::size_t> output_shape) {
    if (weight.shape.size() != 2)
        throw std::invalid_argument("linear model: weight must be 2-d");
    if (mean.size() != weight.shape[0])
        throw std::invalid_argument("linear model: mean/weight row mismatch");
    GeneratorModel m;
    m.kind = ModelKind::Linear;
    m.latent_dim = static_cast<int>(weight.shape[1]);
    m.output_shape = output_shape.empty() ? std::vector<std::size_t>{weight.shape[0]}
                                          : std::move(output_shape);
    if (Tensor::numel(m.output_shape) != weight.shape[0])
        throw std::invalid_argument("linear model: output_shape/weight mismatch");
    m.weight = std::move(weight);
    m.mean = std::move(mean);
    return m;
}

GeneratorModel make_mlp_model(std::vector<DenseLayer> layers,
                              std::vector<std::size_t> output_shape) {
    if (layers.empty()) throw std::invalid_argument("mlp model: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& l = layers[i];
        if (l.weight.shape.size() != 2 || l.bias.size() != l.weight.shape[0])
            throw std::invalid_argument("mlp model: bad layer " + std::to_string(i));
        if (i > 0 && layers[i - 1].weight.shape[0] != l.weight.shape[1])
            throw std::invalid_argument("mlp model: layer size mismatch at " + std::to_string(i));
    }
    GeneratorModel m;
    m.kind = ModelKind::Mlp;
    m.latent_dim = static_cast<int>(layers.front().weight.shape[1]);
    std::size_t out = layers.back().weight.shape[0];
    m.output_shape = output_shape.empty() ? std::vector<std::size_t>{out}
                                          : std::move(output_shape);
    if (Tensor::numel(m.output_shape) != out)
        throw std::invalid_argument("mlp model: output_shape mismatch");
    m.layers = std::move(layers);
    return m;
}

GeneratorModel make_constant_model(Tensor output) {
    GeneratorModel m;
    m.kind = ModelKind::Constant;
    m.latent_dim = 1;
    m.output_shape = output.shape;
    m.constant_output = std::move(output);
    return m;
}

GeneratorModel make_spiral_model(double angular_gain, double angle_offset,
                                 double radial_gain) {
    GeneratorModel m;
    m.kind = ModelKind::Spiral;
    m.latent_dim = 1;
    m.output_shape = {2};
    m.angular_gain = angular_gain;
    m.angle_offset = angle_offset;
    m.radial_gain = radial_gain;
    return m;
}

Tensor decode(const GeneratorModel& model, const Tensor& z) {
    if (z.size() != static_cast<std::size_t>(model.latent_dim))
        throw std::invalid_argument("decode: latent dimension mismatch");
    switch (model.kind) {
        case ModelKind::Linear: {
            Tensor y = add(matvec(model.weight, z), model.mean);
            return y.reshaped(model.output_shape);
        }
        case ModelKind::Mlp: {
            Tensor h = z;
            for (const DenseLayer& l : model.layers) {
                h = add(matvec(l.weight, h), l.bias);
                for (double& v : h.data) v = apply_activation(l.activation, v);
            }
            return h.reshaped(model.output_shape);
        }
        case ModelKind::Constant:
            return model.constant_output;
        case ModelKind::Spiral: {
            double t = model.angular_gain * z.data[0] + model.angle_offset;
            double r = model.radial_gain * t;
            return Tensor({2}, {r * std::cos(t), r * std::sin(t)});
        }
    }
    throw std::logic_error("decode: bad model kind");
}

std::vector<Tensor> sample_prior(const LatentPrior& prior, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_prior: n must be >= 1");
    if (prior.dimension < 1) throw std::invalid_argument("sample_prior: bad dimension");
    Rng rng(seed);
    std::vector<Tensor> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Tensor z = Tensor::zeros({static_cast<std::size_t>(prior.dimension)});
        for (double& v : z.data) v = rng.normal();
        out.push_back(std::move(z));
    }
    return out;
}

std::vector<Tensor> sample_dataset(const GeneratorModel& model, double sigma2, int n,
                                   std::uint64_t seed) {
    if (sigma2 < 0.0) throw std::invalid_argument("sample_dataset: negative sigma2");
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    double sigma = std::sqrt(sigma2);
    std::vector<Tensor> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        Tensor z = Tensor::zeros({static_cast<std::size_t>(model.latent_dim)});
        for (double& v : z.data) v = rng.normal();
        Tensor x = decode(model, z);
        if (sigma > 0.0)
            for (double& v : x.data) v += sigma * rng.normal();
        out.push_back(std::move(x));
    }
    return out;
}

PpcaFit ppca_fit(const std::vector<Tensor>& data, int k) {
    if (data.empty()) throw std::invalid_argument("ppca_fit: empty data");
    std::size_t dim = data[0].size();
    if (k < 1) throw std::invalid_argument("ppca_fit: k must be >= 1");
    if (static_cast<std::size_t>(k) >= dim)
        throw std::invalid_argument("ppca_fit: k must be < data dimension");
    if (data.size() <= static_cast<std::size_t>(k))
        throw std::invalid_argument("ppca_fit: need more samples than k");

    std::size_t n = data.size();
    Tensor mean = Tensor::zeros({dim});
    for (const Tensor& x : data) {
        if (x.size() != dim) throw std::invalid_argument("ppca_fit: inconsistent sample size");
        for (std::size_t i = 0; i < dim; ++i) mean.data[i] += x.data[i];
    }
    for (double& v : mean.data) v /= static_cast<double>(n);

    std::vector<double> cov(dim * dim, 0.0);
    std::vector<double> centered(dim);
    for (const Tensor& x : data) {
        for (std::size_t i = 0; i < dim; ++i) centered[i] = x.data[i] - mean.data[i];
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += centered[i] * centered[j];
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            double v = cov[i * dim + j] / static_cast<double>(n);
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }

    std::vector<double> vals, vecs;
    linalg::sym_eig(dim, std::move(cov), vals, vecs);
    for (double& v : vals) v = std::max(v, 0.0);  // clamp eigen-solver noise

    double sigma2 = 0.0;
    for (std::size_t i = k; i < dim; ++i) sigma2 += vals[i];
    sigma2 /= static_cast<double>(dim - k);

    Tensor w = Tensor::zeros({dim, static_cast<std::size_t>(k)});
    double max_gap = 0.0;
    for (int j = 0; j < k; ++j) {
        double gap = std::max(vals[j] - sigma2, 0.0);
        max_gap = std::max(max_gap, gap);
        double s = std::sqrt(gap);
        for (std::size_t i = 0; i < dim; ++i) w.data[i * k + j] = vecs[i * dim + j] * s;
    }

    PpcaFit fit;
    fit.sigma2 = sigma2;
    fit.eigenvalues = vals;
    fit.degenerate = max_gap <= 1e-12 * std::max(1.0, vals[0]);
    fit.model = make_linear_model(std::move(w), std::move(mean), data[0].shape);
    return fit;
}

std::vector<std::pair<Tensor, Tensor>> generate_grid(const GeneratorModel& model,
                                                     double z_min, double z_max,
                                                     int steps) {
    if (model.latent_dim > 2)
        throw std::invalid_argument("generate_grid: latent_dim must be <= 2");
    if (steps < 2) throw std::invalid_argument("generate_grid: steps must be >= 2");
    double h = (z_max - z_min) / static_cast<double>(steps - 1);
    std::vector<std::pair<Tensor, Tensor>> out;
    if (model.latent_dim == 1) {
        out.reserve(steps);
        for (int i = 0; i < steps; ++i) {
            Tensor z({1}, {z_min + h * i});
            Tensor x = decode(model, z);
            out.emplace_back(std::move(z), std::move(x));
        }
    } else {
        out.reserve(static_cast<std::size_t>(steps) * steps);
        for (int i = 0; i < steps; ++i)
            for (int j = 0; j < steps; ++j) {
                Tensor z({2}, {z_min + h * i, z_min + h * j});
                Tensor x = decode(model, z);
                out.emplace_back(std::move(z), std::move(x));
            }
    }
    return out;
}

// ---- manifest I/O ----

using nlohmann::json;

namespace {

json shape_to_json(const std::vector<std::size_t>& s) {
    json a = json::array();
    for (std::size_t d : s) a.push_back(d);
    return a;
}

std::vector<std::size_t> shape_from_json(const json& a) {
    std::vector<std::size_t> s;
    for (const auto& v : a) s.push_back(v.get<std::size_t>());
    return s;
}

}  // namespace

void save_model(const std::string& dir, const GeneratorModel& model,
                const std::string& name, std::optional<double> sigma2) {
    fs::create_directories(dir);
    json manifest;
    manifest["name"] = name;
    manifest["kind"] = to_string(model.kind);
    manifest["latent_dim"] = model.latent_dim;
    manifest["output_shape"] = shape_to_json(model.output_shape);
    if (sigma2) manifest["sigma2"] = *sigma2;

    json params;
    std::vector<std::string> weights;
    auto put = [&](const std::string& fname, const Tensor& t) {
        write_gten((fs::path(dir) / fname).string(), t);
        weights.push_back(fname);
        return fname;
    };
    switch (model.kind) {
        case ModelKind::Linear:
            params["weight"] = put("weight.gten", model.weight);
            params["mean"] = put("mean.gten", model.mean);
            break;
        case ModelKind::Mlp: {
            json layer_list = json::array();
            for (std::size_t i = 0; i < model.layers.size(); ++i) {
                const DenseLayer& l = model.layers[i];
                json jl;
                jl["activation"] = to_string(l.activation);
                jl["weight"] = put("layer" + std::to_string(i) + "_weight.gten", l.weight);
                jl["bias"] = put("layer" + std::to_string(i) + "_bias.gten", l.bias);
                layer_list.push_back(jl);
            }
            params["layers"] = layer_list;
            break;
        }
        case ModelKind::Constant:
            params["output"] = put("output.gten", model.constant_output);
            break;
        case ModelKind::Spiral:
            params["angular_gain"] = model.angular_gain;
            params["offset"] = model.angle_offset;
            params["radial_gain"] = model.radial_gain;
            break;
    }
    manifest["params"] = params;
    manifest["weights"] = weights;

    std::ofstream out(fs::path(dir) / "model.json");
    if (!out) throw std::runtime_error("save_model: cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

LoadedModel load_model(const std::string& dir) {
    fs::path manifest_path = fs::path(dir) / "model.json";
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("load_model: missing manifest " + manifest_path.string());
    json manifest = json::parse(in);

    std::vector<std::string> weights;
    for (const auto& w : manifest.at("weights")) weights.push_back(w.get<std::string>());
    auto tensor_ref = [&](const json& ref) {
        std::string fname = ref.get<std::string>();
        if (std::find(weights.begin(), weights.end(), fname) == weights.end())
            throw std::runtime_error("load_model: " + fname + " not listed in weights");
        return read_gten((fs::path(dir) / fname).string());
    };

    LoadedModel loaded;
    loaded.name = manifest.value("name", "");
    if (manifest.contains("sigma2")) loaded.sigma2 = manifest["sigma2"].get<double>();

    ModelKind kind = model_kind_from_string(manifest.at("kind").get<std::string>());
    const json& params = manifest.at("params");
    std::vector<std::size_t> output_shape = shape_from_json(manifest.at("output_shape"));
    switch (kind) {
        case ModelKind::Linear:
            loaded.model = make_linear_model(tensor_ref(params.at("weight")),
                                             tensor_ref(params.at("mean")), output_shape);
            break;
        case ModelKind::Mlp: {
            std::vector<DenseLayer> layers;
            for (const auto& jl : params.at("layers")) {
                DenseLayer l;
                l.activation = activation_from_string(jl.at("activation").get<std::string>());
                l.weight = tensor_ref(jl.at("weight"));
                l.bias = tensor_ref(jl.at("bias"));
                layers.push_back(std::move(l));
            }
            loaded.model = make_mlp_model(std::move(layers), output_shape);
            break;
        }
        case ModelKind::Constant:
            loaded.model = make_constant_model(tensor_ref(params.at("output")));
            break;
        case ModelKind::Spiral:
            loaded.model = make_spiral_model(params.at("angular_gain").get<double>(),
                                             params.at("offset").get<double>(),
                                             params.at("radial_gain").get<double>());
            break;
    }
    int latent_dim = manifest.at("latent_dim").get<int>();
    if (latent_dim != loaded.model.latent_dim)
        throw std::runtime_error("load_model: latent_dim disagrees with weights");
    return loaded;
}

}  // namespace ganaudit
