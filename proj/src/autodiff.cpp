#include "ganaudit/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "ganaudit/rng.hpp"

namespace ganaudit {

int Tape::push(TapeNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor v) {
    TapeNode n;
    n.op = OpKind::Input;
    n.value = std::move(v);
    return push(std::move(n));
}

int Tape::constant(const Tensor& v) {
    TapeNode n;
    n.op = OpKind::Constant;
    n.value = v;
    return push(std::move(n));
}

int Tape::matvec(const Tensor& w, int x) {
    TapeNode n;
    n.op = OpKind::MatVec;
    n.input = x;
    n.param = &w;
    n.value = ganaudit::matvec(w, nodes_[x].value);
    return push(std::move(n));
}

int Tape::add_vec(int x, const Tensor& b) {
    TapeNode n;
    n.op = OpKind::AddVec;
    n.input = x;
    n.param = &b;
    n.value = add(nodes_[x].value, b);
    return push(std::move(n));
}

int Tape::activate(Activation a, int x) {
    TapeNode n;
    n.op = OpKind::Activate;
    n.input = x;
    n.activation = a;
    n.value = nodes_[x].value;
    for (double& v : n.value.data) v = apply_activation(a, v);
    return push(std::move(n));
}

int Tape::reshape(int x, std::vector<std::size_t> shape) {
    TapeNode n;
    n.op = OpKind::Reshape;
    n.input = x;
    n.value = nodes_[x].value.reshaped(std::move(shape));
    return push(std::move(n));
}

int Tape::sub_const(int x, const Tensor& c) {
    TapeNode n;
    n.op = OpKind::SubConst;
    n.input = x;
    n.param = &c;
    n.value = sub(nodes_[x].value, c);
    return push(std::move(n));
}

int Tape::sum_squares(int x) {
    TapeNode n;
    n.op = OpKind::SumSquares;
    n.input = x;
    n.value = Tensor::scalar(squared_norm(nodes_[x].value));
    return push(std::move(n));
}

int Tape::scale(int x, double s) {
    TapeNode n;
    n.op = OpKind::Scale;
    n.input = x;
    n.scalar = s;
    n.value = ganaudit::scale(nodes_[x].value, s);
    return push(std::move(n));
}

Tensor Tape::replay(int id) const {
    const TapeNode& n = nodes_[id];
    switch (n.op) {
        case OpKind::Input:
        case OpKind::Constant:
            return n.value;
        case OpKind::MatVec: return ganaudit::matvec(*n.param, replay(n.input));
        case OpKind::AddVec: return add(replay(n.input), *n.param);
        case OpKind::Activate: {
            Tensor v = replay(n.input);
            for (double& x : v.data) x = apply_activation(n.activation, x);
            return v;
        }
        case OpKind::Reshape: return replay(n.input).reshaped(n.value.shape);
        case OpKind::SubConst: return sub(replay(n.input), *n.param);
        case OpKind::SumSquares: return Tensor::scalar(squared_norm(replay(n.input)));
        case OpKind::Scale: return ganaudit::scale(replay(n.input), n.scalar);
    }
    throw std::logic_error("Tape::replay: bad op");
}

Tensor Tape::backward(int output, const Tensor& cotangent, int wrt) const {
    check_same_shape(cotangent, nodes_[output].value, "Tape::backward");
    std::vector<Tensor> adj(nodes_.size());
    adj[output] = cotangent;

    for (int i = output; i >= 0; --i) {
        if (adj[i].data.empty()) continue;
        const TapeNode& n = nodes_[i];
        if (n.op == OpKind::Input || n.op == OpKind::Constant) continue;
        const Tensor& up = adj[i];
        Tensor down;
        const Tensor& in_value = nodes_[n.input].value;
        switch (n.op) {
            case OpKind::MatVec: down = matvec_transposed(*n.param, up); break;
            case OpKind::AddVec: down = up; break;
            case OpKind::Activate: {
                down = up;
                for (std::size_t k = 0; k < down.size(); ++k)
                    down.data[k] *= activation_grad(n.activation, in_value.data[k],
                                                    n.value.data[k]);
                break;
            }
            case OpKind::Reshape: down = up.reshaped(in_value.shape); break;
            case OpKind::SubConst: down = up; break;
            case OpKind::SumSquares: down = ganaudit::scale(in_value, 2.0 * up.data[0]); break;
            case OpKind::Scale: down = ganaudit::scale(up, n.scalar); break;
            default: throw std::logic_error("Tape::backward: bad op");
        }
        if (adj[n.input].data.empty())
            adj[n.input] = std::move(down);
        else
            for (std::size_t k = 0; k < down.size(); ++k) adj[n.input].data[k] += down.data[k];
    }
    if (adj[wrt].data.empty()) return Tensor::zeros(nodes_[wrt].value.shape);
    return adj[wrt];
}

int record_decoder(Tape& tape, const GeneratorModel& model, int z_node) {
    switch (model.kind) {
        case ModelKind::Linear: {
            int h = tape.matvec(model.weight, z_node);
            h = tape.add_vec(h, model.mean);
            return tape.reshape(h, model.output_shape);
        }
        case ModelKind::Mlp: {
            int h = z_node;
            for (const DenseLayer& l : model.layers) {
                h = tape.matvec(l.weight, h);
                h = tape.add_vec(h, l.bias);
                h = tape.activate(l.activation, h);
            }
            return tape.reshape(h, model.output_shape);
        }
        case ModelKind::Constant:
            return tape.constant(model.constant_output);
        case ModelKind::Spiral:
            throw std::invalid_argument("record_decoder: spiral is not tape-backed");
    }
    throw std::logic_error("record_decoder: bad model kind");
}

Tensor forward_eval(const GeneratorModel& model, const Tensor& z) {
    if (z.size() != static_cast<std::size_t>(model.latent_dim))
        throw std::invalid_argument("forward_eval: latent dimension mismatch");
    Tensor y = decode(model, z);
    check_finite(y, "forward_eval");
    return y;
}

namespace {

// dG/dz for the spiral, a 2x1 Jacobian.
Tensor spiral_vjp(const GeneratorModel& model, const Tensor& z, const Tensor& u) {
    double t = model.angular_gain * z.data[0] + model.angle_offset;
    double r = model.radial_gain * t;
    double a = model.angular_gain, c = model.radial_gain;
    double dx0 = a * (c * std::cos(t) - r * std::sin(t));
    double dx1 = a * (c * std::sin(t) + r * std::cos(t));
    return Tensor({1}, {u.data[0] * dx0 + u.data[1] * dx1});
}

}  // namespace

Tensor vjp(const GeneratorModel& model, const Tensor& z, const Tensor& cotangent) {
    if (z.size() != static_cast<std::size_t>(model.latent_dim))
        throw std::invalid_argument("vjp: latent dimension mismatch");
    if (cotangent.size() != model.output_size())
        throw std::invalid_argument("vjp: cotangent shape mismatch");
    switch (model.kind) {
        case ModelKind::Constant: return Tensor::zeros(z.shape);
        case ModelKind::Spiral: return spiral_vjp(model, z, cotangent);
        default: break;
    }
    Tape tape;
    int z_node = tape.input(z);
    int out = record_decoder(tape, model, z_node);
    return tape.backward(out, cotangent.reshaped(tape.value(out).shape), z_node);
}

double grad_check(const GeneratorModel& model, const Tensor& z, int probes,
                  std::uint64_t seed) {
    if (probes < 1) throw std::invalid_argument("grad_check: probes must be >= 1");
    const double h = 1e-5;
    Rng rng(derive_seed(seed, 0x67726164));
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Tensor u = Tensor::zeros(model.output_shape);
        for (double& v : u.data) v = rng.normal();
        Tensor analytic = vjp(model, z, u);

        Tensor numeric = Tensor::zeros(z.shape);
        for (std::size_t i = 0; i < z.size(); ++i) {
            Tensor zp = z, zm = z;
            zp.data[i] += h;
            zm.data[i] -= h;
            double fp = dot(u, forward_eval(model, zp).reshaped(u.shape));
            double fm = dot(u, forward_eval(model, zm).reshaped(u.shape));
            numeric.data[i] = (fp - fm) / (2.0 * h);
        }
        double denom = std::max(std::sqrt(squared_norm(analytic)) +
                                    std::sqrt(squared_norm(numeric)),
                                1e-8);
        double err = l2_distance(analytic, numeric) / denom;
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace ganaudit
