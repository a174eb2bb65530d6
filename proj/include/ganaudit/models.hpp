#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ganaudit/tensor.hpp"

namespace ganaudit {

enum class ModelKind { Linear, Mlp, Constant, Spiral };

enum class Activation { Linear, Tanh, Relu, LeakyRelu, Sigmoid };

const char* to_string(ModelKind k);
const char* to_string(Activation a);
ModelKind model_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

double apply_activation(Activation a, double x);
// derivative expressed through pre-activation x and output y
double activation_grad(Activation a, double x, double y);

struct DenseLayer {
    Tensor weight;  // [out, in]
    Tensor bias;    // [out]
    Activation activation = Activation::Linear;
};

// A decoder z -> x with a standard-normal prior on z.
//   linear:   x = W z + mean
//   mlp:      stack of dense layers
//   constant: x = output regardless of z
//   spiral:   z in R^1 -> (r cos t, r sin t), t = a z + b, r = c t
struct GeneratorModel {
    ModelKind kind = ModelKind::Constant;
    int latent_dim = 1;
    std::vector<std::size_t> output_shape;

    Tensor weight;  // linear
    Tensor mean;
    std::vector<DenseLayer> layers;  // mlp
    Tensor constant_output;          // constant
    double angular_gain = 0.0;       // spiral
    double angle_offset = 0.0;
    double radial_gain = 0.0;

    std::size_t output_size() const { return Tensor::numel(output_shape); }
};

// Spiral defaults trace about 2.5 turns over z in [-3, 3], so inner points
// see much more arc length per unit distance than outer ones.
constexpr double kSpiralAngularGain = 2.5 * 3.14159265358979323846 / 3.0;
constexpr double kSpiralAngleOffset = 3.14159265358979323846 / 2.0;
constexpr double kSpiralRadialGain = 0.35;

GeneratorModel make_linear_model(Tensor weight, Tensor mean,
                                 std::vector<std::size_t> output_shape = {});
GeneratorModel make_mlp_model(std::vector<DenseLayer> layers,
                              std::vector<std::size_t> output_shape = {});
GeneratorModel make_constant_model(Tensor output);
GeneratorModel make_spiral_model(double angular_gain = kSpiralAngularGain,
                                 double angle_offset = kSpiralAngleOffset,
                                 double radial_gain = kSpiralRadialGain);

// Plain forward pass x = G(z), no tape. Bit-identical to the recorded
// forward in the autodiff module because both run the same kernels.
Tensor decode(const GeneratorModel& model, const Tensor& z);

struct LatentPrior {
    int dimension = 1;
};

std::vector<Tensor> sample_prior(const LatentPrior& prior, int n, std::uint64_t seed);

// x_i = G(z_i) + eps_i, eps_i ~ N(0, sigma2 I)
std::vector<Tensor> sample_dataset(const GeneratorModel& model, double sigma2, int n,
                                   std::uint64_t seed);

struct PpcaFit {
    GeneratorModel model;
    double sigma2 = 0.0;
    bool degenerate = false;  // no usable principal direction (W ~ 0)
    std::vector<double> eigenvalues;
};

// Closed-form maximum-likelihood PPCA: eigendecompose the sample covariance,
// sigma2 = mean of the trailing eigenvalues, W = U_k (L_k - sigma2 I)^{1/2}.
PpcaFit ppca_fit(const std::vector<Tensor>& data, int k);

// Uniform latent grid with decoded outputs, latent_dim <= 2.
std::vector<std::pair<Tensor, Tensor>> generate_grid(const GeneratorModel& model,
                                                     double z_min, double z_max,
                                                     int steps);

// Model manifest: JSON next to GTEN weight files.
struct LoadedModel {
    GeneratorModel model;
    std::string name;
    std::optional<double> sigma2;
};

void save_model(const std::string& dir, const GeneratorModel& model,
                const std::string& name,
                std::optional<double> sigma2 = std::nullopt);
LoadedModel load_model(const std::string& dir);

}  // namespace ganaudit
