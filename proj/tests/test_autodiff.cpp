#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <vector>

#include "random_graph.hpp"
#include "svann/autodiff.hpp"
#include "svann/random.hpp"

using namespace svann;
using ad::NodeId;
using ad::Op;
using ad::Tape;

TEST_CASE("build and forward") {
  Tape tape;
  const NodeId a = tape.input(2.0);
  const NodeId b = tape.input(3.0);
  const NodeId ops[] = {a, b};
  const NodeId s = tape.build(Op::add, ops);
  tape.forward();
  CHECK(tape.value(s) == 5.0);

  const NodeId x = tape.input(0.0);
  const NodeId sig0 = tape.sigmoid(x);
  tape.forward();
  CHECK(tape.value(sig0) == 0.5);
  tape.set_input(x, 0.1);
  tape.forward();
  CHECK(tape.value(sig0) == doctest::Approx(0.52498).epsilon(1e-5));
}

TEST_CASE("build rejects bad arity and unknown operands") {
  Tape tape;
  const NodeId a = tape.input(1.0);
  const NodeId one[] = {a};
  CHECK_THROWS(tape.build(Op::add, one));
  CHECK_THROWS(tape.add(a, NodeId{57}));
  CHECK_THROWS(tape.set_input(tape.constant(1.0), 2.0));
}

TEST_CASE("forward requires assigned inputs, backward requires forward") {
  Tape tape;
  const NodeId x = tape.input();
  const NodeId y = tape.mul(x, x);
  CHECK_THROWS_WITH(tape.forward(), doctest::Contains("unassigned"));
  tape.set_input(x, 2.0);
  CHECK_THROWS_WITH(tape.backward(y), doctest::Contains("before forward"));
  tape.forward();
  CHECK(tape.backward(y).at(x) == 4.0);
}

TEST_CASE("toy graph forward pass matches the published trace") {
  ad::ToyGraph toy = ad::make_toy_graph();
  toy.tape.forward();
  auto val = [&](const char* name) { return toy.tape.value(toy.by_name(name)); };
  CHECK(val("v1") == doctest::Approx(0.0500).epsilon(5e-5));
  CHECK(val("v5") == doctest::Approx(0.1000).epsilon(5e-5));
  CHECK(val("v7") == doctest::Approx(0.5250).epsilon(1e-4));
  CHECK(val("v9") == doctest::Approx(0.2625).epsilon(1e-4));
  CHECK(val("yhat") == doctest::Approx(0.5250).epsilon(1e-4));
}

TEST_CASE("toy graph backward pass: exact entries and oracle-checked entries") {
  ad::ToyGraph toy = ad::make_toy_graph();
  toy.tape.forward();
  const ad::GradientRecord grads = toy.tape.backward(toy.yhat);
  // derivative-free entries are exact
  CHECK(grads.at(toy.by_name("v9")) == 1.0);
  CHECK(grads.at(toy.by_name("v10")) == 1.0);
  CHECK(grads.at(toy.by_name("v7")) == 0.5);
  CHECK(grads.at(toy.by_name("w5")) == toy.tape.value(toy.by_name("v7")));
  CHECK(grads.at(toy.by_name("yhat")) == 1.0);
  // sigmoid-derivative entries follow calculus: 0.5 * s(0.1) * (1 - s(0.1))
  CHECK(grads.at(toy.by_name("v5")) == doctest::Approx(0.12469).epsilon(1e-4));
  CHECK(grads.at(toy.by_name("x")) == doctest::Approx(0.12469).epsilon(1e-4));
  CHECK(grads.at(toy.by_name("w1")) == doctest::Approx(0.012469).epsilon(1e-4));
}

TEST_CASE("all inputs zero with zero output weights give zero") {
  ad::ToyGraph toy = ad::make_toy_graph(0.0, 0.0, 0.0);
  toy.tape.forward();
  CHECK(toy.tape.value(toy.yhat) == 0.0);
}

TEST_CASE("derive builds differentiable derivative graphs") {
  SUBCASE("d(x*x)/dx at 3") {
    Tape tape;
    const NodeId x = tape.input(3.0);
    const NodeId d = tape.derive(tape.mul(x, x), x);
    tape.forward();
    CHECK(tape.value(d) == doctest::Approx(6.0));
  }
  SUBCASE("second derivative of x^3 at 2") {
    Tape tape;
    const NodeId x = tape.input(2.0);
    const NodeId cube = tape.mul(tape.mul(x, x), x);
    const NodeId d2 = tape.derive(tape.derive(cube, x), x);
    tape.forward();
    CHECK(tape.value(d2) == doctest::Approx(12.0));
  }
  SUBCASE("d(sin x)/dx at 0") {
    Tape tape;
    const NodeId x = tape.input(0.0);
    const NodeId d = tape.derive(tape.sin(x), x);
    tape.forward();
    CHECK(tape.value(d) == doctest::Approx(1.0));
  }
  SUBCASE("wrt must be an input") {
    Tape tape;
    const NodeId x = tape.input(1.0);
    const NodeId y = tape.mul(x, x);
    CHECK_THROWS(tape.derive(y, y));
  }
  SUBCASE("independent output derives to zero") {
    Tape tape;
    const NodeId x = tape.input(1.0);
    const NodeId y = tape.input(2.0);
    const NodeId d = tape.derive(tape.mul(y, y), x);
    tape.forward();
    CHECK(tape.value(d) == 0.0);
  }
}

TEST_CASE("check_gradients on the toy graph") {
  ad::ToyGraph toy = ad::make_toy_graph();
  std::vector<NodeId> inputs;
  for (const auto& [name, id] : toy.trace_rows)
    if (toy.tape.node(id).op == Op::input) inputs.push_back(id);
  const auto report = ad::check_gradients(toy.tape, toy.yhat, inputs, 1e-5, 1e-6);
  CHECK(report.passed);
  CHECK(report.max_relative_error < 1e-6);
}

TEST_CASE("linear graph agrees with finite differences to machine precision") {
  Tape tape;
  const NodeId x = tape.input(1.7);
  const NodeId y = tape.mul(tape.constant(3.0), x);
  const NodeId in[] = {x};
  const auto report = ad::check_gradients(tape, y, in, 1e-4, 1e-12);
  CHECK(report.passed);
  CHECK(report.entries[0].adjoint == 3.0);
}

TEST_CASE("sum of products has exact coefficient adjoints") {
  Tape tape;
  SplitMix64 rng(3);
  std::vector<NodeId> xs;
  std::vector<double> coeffs;
  std::vector<NodeId> terms;
  for (int i = 0; i < 8; ++i) {
    const double c = rng.next_double(-4.0, 4.0);
    const NodeId x = tape.input(rng.next_double(-2.0, 2.0));
    xs.push_back(x);
    coeffs.push_back(c);
    terms.push_back(tape.mul(tape.constant(c), x));
  }
  const NodeId y = tape.sum(terms);
  tape.forward();
  const ad::GradientRecord grads = tape.backward(y);
  for (int i = 0; i < 8; ++i)
    CHECK(grads.at(xs[static_cast<std::size_t>(i)]) == coeffs[static_cast<std::size_t>(i)]);
}

TEST_CASE("backward is deterministic bit for bit") {
  ad::ToyGraph toy = ad::make_toy_graph(0.37, 0.21, -0.4);
  toy.tape.forward();
  const auto a = toy.tape.backward(toy.yhat);
  const auto b = toy.tape.backward(toy.yhat);
  CHECK(a.adjoints == b.adjoints);
}

TEST_CASE("random graphs pass the finite-difference oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    testing::RandomGraph g = testing::make_random_graph(seed, 40);
    const auto report = ad::check_gradients(g.tape, g.output, g.inputs, 1e-5, 1e-6);
    CAPTURE(seed);
    CHECK(report.passed);
  }
}

TEST_CASE("second derivatives via derive of derive match finite differences") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    testing::RandomGraph g = testing::make_random_graph(seed, 25);
    const NodeId x = g.inputs[0];
    const NodeId first = g.tape.derive(g.output, x);
    g.tape.forward();
    const double d1 = g.tape.value(first);

    const double x0 = g.tape.value(x);
    const double h = 1e-4;
    auto f = [&](double v) {
      g.tape.set_input(x, v);
      g.tape.forward();
      return g.tape.value(g.output);
    };
    const double fd2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
    const double fd1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
    g.tape.set_input(x, x0);

    const NodeId second = g.tape.derive(first, x);
    g.tape.forward();
    const double d2 = g.tape.value(second);

    CAPTURE(seed);
    CHECK(std::abs(d1 - fd1) / std::max({std::abs(fd1), 1.0}) < 1e-6);
    CHECK(std::abs(d2 - fd2) / std::max({std::abs(fd2), 1.0}) < 1e-4);
  }
}
