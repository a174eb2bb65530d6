#pragma once

#include <cstdint>
#include <vector>

#include "ganaudit/models.hpp"
#include "ganaudit/tensor.hpp"

namespace ganaudit {

// Reverse-mode tape over the handful of primitives a decoder needs. Nodes
// are append-only, so reverse insertion order is a reverse topological
// order and the backward pass visits each node exactly once.
enum class OpKind : std::uint8_t {
    Input,       // leaf, value given by caller
    Constant,    // leaf, no gradient flows past it
    MatVec,      // param [m,n] * input
    AddVec,      // input + param
    Activate,    // elementwise activation
    Reshape,     //
    SubConst,    // input - param
    SumSquares,  // scalar sum of squared entries
    Scale,       // input * scalar
};

struct TapeNode {
    OpKind op = OpKind::Input;
    int input = -1;
    const Tensor* param = nullptr;  // borrowed; models outlive their tapes
    Activation activation = Activation::Linear;
    double scalar = 0.0;
    Tensor value;
};

class Tape {
public:
    int input(Tensor v);
    int constant(const Tensor& v);
    int matvec(const Tensor& w, int x);
    int add_vec(int x, const Tensor& b);
    int activate(Activation a, int x);
    int reshape(int x, std::vector<std::size_t> shape);
    int sub_const(int x, const Tensor& c);
    int sum_squares(int x);
    int scale(int x, double s);

    const Tensor& value(int id) const { return nodes_[id].value; }
    std::size_t size() const { return nodes_.size(); }

    // Recompute a node's value from the recorded ops; must match the stored
    // value bit-for-bit.
    Tensor replay(int id) const;

    // Adjoint of node `wrt` given a cotangent at node `output`.
    Tensor backward(int output, const Tensor& cotangent, int wrt) const;

private:
    int push(TapeNode n);
    std::vector<TapeNode> nodes_;
};

// Builds the decoder graph on the tape; returns the output node id.
// Spiral decoders are not tape-backed (closed-form Jacobian instead).
int record_decoder(Tape& tape, const GeneratorModel& model, int z_node);

// x = G(z). Deterministic; throws on shape mismatch or non-finite output.
Tensor forward_eval(const GeneratorModel& model, const Tensor& z);

// u^T dG/dz at z.
Tensor vjp(const GeneratorModel& model, const Tensor& z, const Tensor& cotangent);

// Max over random probes of the relative error between vjp and central
// finite differences (step 1e-5) of u^T G(z).
double grad_check(const GeneratorModel& model, const Tensor& z, int probes,
                  std::uint64_t seed = 0);

}  // namespace ganaudit
