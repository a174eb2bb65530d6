#include <cmath>

#include "doctest.h"
#include "ganaudit/autodiff.hpp"
#include "ganaudit/rng.hpp"
#include "oracles.hpp"

using namespace ganaudit;

namespace {

// pinned 2-4-3 tanh MLP used across the gradient tests
GeneratorModel pinned_243_tanh() {
    DenseLayer l0;
    l0.weight = Tensor({4, 2}, {0.5, -0.3, 0.8, 0.1, -0.6, 0.4, 0.2, 0.9});
    l0.bias = Tensor({4}, {0.1, -0.2, 0.05, 0.3});
    l0.activation = Activation::Tanh;
    DenseLayer l1;
    l1.weight = Tensor({3, 4}, {0.7, -0.5, 0.2, 0.4, -0.1, 0.6, -0.8, 0.3, 0.9, 0.2, -0.4, -0.6});
    l1.bias = Tensor({3}, {-0.05, 0.15, 0.0});
    l1.activation = Activation::Tanh;
    return make_mlp_model({l0, l1});
}

std::vector<oracles::RefLayer> pinned_243_ref() {
    oracles::RefLayer r0{{{0.5, -0.3}, {0.8, 0.1}, {-0.6, 0.4}, {0.2, 0.9}},
                         {0.1, -0.2, 0.05, 0.3},
                         "tanh"};
    oracles::RefLayer r1{{{0.7, -0.5, 0.2, 0.4}, {-0.1, 0.6, -0.8, 0.3}, {0.9, 0.2, -0.4, -0.6}},
                         {-0.05, 0.15, 0.0},
                         "tanh"};
    return {r0, r1};
}

GeneratorModel random_mlp(Activation act, int in, int hidden, int out, std::uint64_t seed) {
    Rng rng(seed);
    auto rand_tensor = [&](std::vector<std::size_t> shape, double s) {
        Tensor t = Tensor::zeros(std::move(shape));
        for (double& v : t.data) v = s * rng.normal();
        return t;
    };
    DenseLayer l0{rand_tensor({static_cast<std::size_t>(hidden), static_cast<std::size_t>(in)}, 0.8),
                  rand_tensor({static_cast<std::size_t>(hidden)}, 0.3), act};
    DenseLayer l1{rand_tensor({static_cast<std::size_t>(out), static_cast<std::size_t>(hidden)}, 0.8),
                  rand_tensor({static_cast<std::size_t>(out)}, 0.3), Activation::Linear};
    return make_mlp_model({l0, l1});
}

}  // namespace

TEST_CASE("forward_eval: identity dense layer") {
    DenseLayer l;
    l.weight = Tensor({2, 2}, {1, 0, 0, 1});
    l.bias = Tensor({2}, {0, 0});
    l.activation = Activation::Linear;
    GeneratorModel m = make_mlp_model({l});
    Tensor y = forward_eval(m, Tensor({2}, {1, 2}));
    CHECK(y.data[0] == 1.0);
    CHECK(y.data[1] == 2.0);
}

TEST_CASE("forward_eval: constant decoder ignores z") {
    Tensor g0({3}, {0.25, -1.0, 4.0});
    GeneratorModel m = make_constant_model(g0);
    CHECK(forward_eval(m, Tensor({1}, {2.7})).data == g0.data);
    CHECK(forward_eval(m, Tensor({1}, {-14.0})).data == g0.data);
}

TEST_CASE("forward_eval: pinned tanh MLP matches scalar reference evaluator") {
    GeneratorModel m = pinned_243_tanh();
    Tensor z({2}, {0.5, -0.5});
    Tensor y = forward_eval(m, z);
    std::vector<double> ref = oracles::ref_mlp_forward(pinned_243_ref(), {0.5, -0.5});
    REQUIRE(y.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(y.data[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("forward_eval is deterministic bit-for-bit") {
    GeneratorModel m = pinned_243_tanh();
    Tensor z({2}, {0.123, -0.456});
    Tensor a = forward_eval(m, z);
    Tensor b = forward_eval(m, z);
    CHECK(a.data == b.data);
    CHECK(a.data == decode(m, z).data);  // tape-free path is the same kernels
}

TEST_CASE("forward_eval rejects latent dimension mismatch") {
    GeneratorModel m = pinned_243_tanh();
    CHECK_THROWS_AS(forward_eval(m, Tensor({3}, {1, 2, 3})), std::invalid_argument);
}

TEST_CASE("tape replay reproduces recorded values bit-for-bit") {
    GeneratorModel m = pinned_243_tanh();
    Tape tape;
    int z = tape.input(Tensor({2}, {0.9, -1.4}));
    int out = record_decoder(tape, m, z);
    int loss = tape.sum_squares(out);
    for (int id : {z, out, loss}) CHECK(tape.replay(id).data == tape.value(id).data);
}

TEST_CASE("vjp: single linear layer gives W^T u") {
    Tensor w({3, 2}, {1, 2, 3, 4, 5, 6});
    GeneratorModel m = make_linear_model(w, Tensor({3}, {0, 0, 0}));
    Tensor u({3}, {1, -1, 2});
    Tensor got = vjp(m, Tensor({2}, {0.3, 0.7}), u);
    // W^T u computed by hand
    CHECK(got.data[0] == doctest::Approx(1 * 1 + 3 * -1 + 5 * 2));
    CHECK(got.data[1] == doctest::Approx(2 * 1 + 4 * -1 + 6 * 2));
}

TEST_CASE("vjp is linear in the cotangent") {
    GeneratorModel m = pinned_243_tanh();
    Tensor z({2}, {0.2, 0.4});
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor u = Tensor::zeros({3}), v = Tensor::zeros({3});
        for (double& a : u.data) a = rng.normal();
        for (double& a : v.data) a = rng.normal();
        double alpha = rng.normal(), beta = rng.normal();
        Tensor mix = add(scale(u, alpha), scale(v, beta));
        Tensor lhs = vjp(m, z, mix);
        Tensor rhs = add(scale(vjp(m, z, u), alpha), scale(vjp(m, z, v), beta));
        for (std::size_t i = 0; i < lhs.size(); ++i)
            CHECK(lhs.data[i] == doctest::Approx(rhs.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("grad_check: linear model is exact to 1e-10") {
    Rng rng(3);
    Tensor w = Tensor::zeros({4, 3});
    for (double& v : w.data) v = rng.normal() * 0.7;
    Tensor mu = Tensor::zeros({4});
    GeneratorModel m = make_linear_model(w, mu);
    CHECK(grad_check(m, Tensor({3}, {0.1, -0.2, 0.5}), 5) <= 1e-10);
}

TEST_CASE("grad_check: tanh MLP within 1e-6 of central differences") {
    for (std::uint64_t s = 0; s < 3; ++s) {
        GeneratorModel m = random_mlp(Activation::Tanh, 3, 8, 5, 100 + s);
        Rng rng(200 + s);
        Tensor z = Tensor::zeros({3});
        for (double& v : z.data) v = rng.normal();
        CHECK(grad_check(m, z, 5, s) <= 1e-6);
    }
}

TEST_CASE("grad_check: sigmoid and leaky_relu MLPs") {
    GeneratorModel m1 = random_mlp(Activation::Sigmoid, 3, 6, 4, 42);
    CHECK(grad_check(m1, Tensor({3}, {0.3, -0.1, 0.8}), 5) <= 1e-6);
    GeneratorModel m2 = random_mlp(Activation::LeakyRelu, 3, 6, 4, 43);
    CHECK(grad_check(m2, Tensor({3}, {0.31, -0.17, 0.83}), 5) <= 1e-6);
}

TEST_CASE("grad_check: relu MLP away from kinks") {
    // walk z until no pre-activation sits within 1e-3 of zero
    GeneratorModel m = random_mlp(Activation::Relu, 2, 6, 4, 77);
    Rng rng(5);
    Tensor z = Tensor::zeros({2});
    bool found = false;
    for (int attempt = 0; attempt < 200 && !found; ++attempt) {
        for (double& v : z.data) v = rng.normal();
        Tensor pre = add(matvec(m.layers[0].weight, z), m.layers[0].bias);
        found = true;
        for (double v : pre.data)
            if (std::fabs(v) < 1e-3) found = false;
    }
    REQUIRE(found);
    CHECK(grad_check(m, z, 5) <= 1e-6);
}

TEST_CASE("vjp: spiral closed-form Jacobian matches finite differences") {
    GeneratorModel m = make_spiral_model();
    for (double zv : {-2.0, -0.5, 0.0, 1.3, 2.9})
        CHECK(grad_check(m, Tensor({1}, {zv}), 4) <= 1e-6);
}

TEST_CASE("vjp rejects bad cotangent shape") {
    GeneratorModel m = pinned_243_tanh();
    CHECK_THROWS_AS(vjp(m, Tensor({2}, {0, 0}), Tensor({2}, {1, 1})),
                    std::invalid_argument);
}
