#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/gradcheck.hpp"
#include "core/ops.hpp"
#include "doctest.h"

using namespace clhoi;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(r * c);
  for (double& x : d) x = u(rng);
  return Tensor::matrix(r, c, std::move(d));
}

// Weighted sum with fixed random weights turns any tensor output into a scalar
// whose gradient exercises every output coordinate.
Var project(Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Var w = y.tape().constant(random_tensor(rng, y.rows(), y.cols()));
  return ops::sum(ops::mul(y, w));
}

void check_unary_primitive(const std::function<Var(Var)>& op, double lo, double hi, const char* name) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    ParameterMap params{{"x", random_tensor(rng, 3, 4, lo, hi)}};
    const auto loss = [&](Tape& t, const ParameterMap& p) { return project(op(t.parameter("x", p.at("x"))), seed + 1000); };
    const auto r = finite_difference_check(loss, params, {.eps = 1e-5});
    INFO(name << " seed " << seed);
    CHECK(r.max_relative_error <= 1e-6);
  }
}

void check_binary_primitive(const std::function<Var(Var, Var)>& op, std::size_t ar, std::size_t ac, std::size_t br,
                            std::size_t bc, const char* name) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    ParameterMap params{{"a", random_tensor(rng, ar, ac)}, {"b", random_tensor(rng, br, bc)}};
    const auto loss = [&](Tape& t, const ParameterMap& p) {
      return project(op(t.parameter("a", p.at("a")), t.parameter("b", p.at("b"))), seed + 7);
    };
    const auto r = finite_difference_check(loss, params, {.eps = 1e-5});
    INFO(name << " seed " << seed);
    CHECK(r.max_relative_error <= 1e-6);
  }
}

}  // namespace

TEST_CASE("tensor construction enforces shape and finiteness") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(Tensor::row({1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(Tensor::row({INFINITY}), Error);
  const Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(t(1, 2) == 6.0);
  CHECK(t.rows() == 2);
}

TEST_CASE("softmax of [1,0]") {
  Tape tape;
  Var y = ops::softmax_rows(tape.constant(Tensor::row({1.0, 0.0})));
  const double e = std::exp(1.0);
  CHECK(y.value()(0, 0) == doctest::Approx(e / (e + 1)).epsilon(1e-15));
  CHECK(y.value()(0, 1) == doctest::Approx(1 / (e + 1)).epsilon(1e-15));
  CHECK(y.value()(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
}

TEST_CASE("l2 normalize [3,4]") {
  Tape tape;
  Var y = ops::l2_normalize_rows(tape.constant(Tensor::row({3.0, 4.0})));
  CHECK(y.value()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(y.value()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("concat along columns") {
  Tape tape;
  Var y = ops::concat_cols({tape.constant(Tensor::zeros(2, 3)), tape.constant(Tensor::zeros(2, 2))});
  CHECK(y.value().shape() == Shape{2, 5});
}

TEST_CASE("shape mismatch reports both shapes") {
  Tape tape;
  Var a = tape.constant(Tensor::zeros(2, 3));
  Var b = tape.constant(Tensor::zeros(2, 3));
  try {
    ops::matmul(a, b);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimension);
    CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(ops::add(a, tape.constant(Tensor::zeros(3, 2))), Error);
}

TEST_CASE("log of non-positive value is a domain error") {
  Tape tape;
  try {
    ops::log(tape.constant(Tensor::row({1.0, 0.0})));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDomain);
  }
}

TEST_CASE("backward basics") {
  SUBCASE("x.x at x=3 gives 6") {
    Tape tape;
    Var x = tape.parameter("x", Tensor::scalar(3.0));
    auto g = tape.backward(ops::matmul(x, ops::transpose(x)));
    CHECK(g.at("x").item() == 6.0);
  }
  SUBCASE("constant output gives zero gradient") {
    Tape tape;
    Var x = tape.parameter("x", Tensor::row({1.0, 2.0}));
    Var c = tape.constant(Tensor::scalar(4.0));
    auto g = tape.backward(ops::exp(c));
    CHECK(g.at("x") == Tensor::row({0.0, 0.0}));
  }
  SUBCASE("non-scalar output is a usage error") {
    Tape tape;
    Var x = tape.parameter("x", Tensor::row({1.0, 2.0}));
    try {
      tape.backward(x);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUsage);
    }
  }
  SUBCASE("binding a name twice shares the leaf") {
    Tape tape;
    Var a = tape.parameter("w", Tensor::scalar(2.0));
    Var b = tape.parameter("w", Tensor::scalar(99.0));
    CHECK(a.id() == b.id());
    auto g = tape.backward(ops::mul(a, b));
    CHECK(g.at("w").item() == 4.0);
  }
}

TEST_CASE("softmax cross-entropy toy graph matches finite differences") {
  std::mt19937_64 rng(3);
  ParameterMap params{{"logits", random_tensor(rng, 2, 5)}, {"w", random_tensor(rng, 5, 5)}};
  const Tensor target = Tensor::matrix(2, 5, {0, 1, 0, 0, 0, 0, 0, 0, 1, 0});
  const auto loss = [&](Tape& t, const ParameterMap& p) {
    Var z = ops::matmul(t.parameter("logits", p.at("logits")), t.parameter("w", p.at("w")));
    Var logp = ops::log(ops::softmax_rows(z));
    return ops::scale(ops::sum(ops::mul(logp, t.constant(target))), -0.5);
  };
  const auto r = finite_difference_check(loss, params, {.eps = 1e-5});
  CHECK(r.max_relative_error <= 1e-6);
  CHECK(r.per_parameter.size() == 2);
}

TEST_CASE("finite_difference_check edge cases") {
  SUBCASE("x^2 at 3") {
    ParameterMap params{{"x", Tensor::scalar(3.0)}};
    const auto loss = [](Tape& t, const ParameterMap& p) { return ops::pow(t.parameter("x", p.at("x")), 2.0); };
    const auto r = finite_difference_check(loss, params, {.eps = 1e-4});
    CHECK(r.max_relative_error < 1e-8);
  }
  SUBCASE("zero parameters gives an empty result") {
    const auto loss = [](Tape& t, const ParameterMap&) { return t.constant(Tensor::scalar(1.0)); };
    const auto r = finite_difference_check(loss, {}, {});
    CHECK(r.per_parameter.empty());
    CHECK(r.coordinates_checked == 0);
  }
  SUBCASE("non-deterministic loss is rejected") {
    int calls = 0;
    ParameterMap params{{"x", Tensor::scalar(1.0)}};
    const auto loss = [&](Tape& t, const ParameterMap& p) {
      return ops::add_scalar(t.parameter("x", p.at("x")), static_cast<double>(++calls));
    };
    try {
      finite_difference_check(loss, params, {});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDeterminism);
    }
  }
  SUBCASE("non-positive eps") {
    CHECK_THROWS_AS(finite_difference_check([](Tape& t, const ParameterMap&) { return t.constant(Tensor::scalar(0)); },
                                            {}, {.eps = 0.0}),
                    Error);
  }
}

TEST_CASE("every primitive matches central differences on 100 random instances") {
  check_unary_primitive([](Var x) { return ops::softmax_rows(x); }, -2, 2, "softmax_rows");
  check_unary_primitive([](Var x) { return ops::sigmoid(x); }, -3, 3, "sigmoid");
  check_unary_primitive([](Var x) { return ops::exp(x); }, -1, 1, "exp");
  check_unary_primitive([](Var x) { return ops::log(x); }, 0.5, 2, "log");
  check_unary_primitive([](Var x) { return ops::pow(x, 1.7); }, 0.5, 2, "pow");
  check_unary_primitive([](Var x) { return ops::gelu(x); }, -2, 2, "gelu");
  check_unary_primitive([](Var x) { return ops::l2_normalize_rows(x); }, 0.1, 1, "l2_normalize_rows");
  check_unary_primitive([](Var x) { return ops::layer_norm_rows(x); }, -2, 2, "layer_norm_rows");
  check_unary_primitive([](Var x) { return ops::clamp(x, -0.5, 0.5); }, -0.45, 0.45, "clamp");
  check_unary_primitive([](Var x) { return ops::transpose(x); }, -1, 1, "transpose");
  check_unary_primitive([](Var x) { return ops::scale(x, -2.5); }, -1, 1, "scale");
  check_unary_primitive([](Var x) { return ops::add_scalar(x, 0.3); }, -1, 1, "add_scalar");
  check_unary_primitive([](Var x) { return ops::mean_rows(x); }, -1, 1, "mean_rows");
  check_unary_primitive([](Var x) { return ops::slice_rows(x, 1, 2); }, -1, 1, "slice_rows");
  check_unary_primitive([](Var x) { return ops::slice_cols(x, 1, 2); }, -1, 1, "slice_cols");
  check_unary_primitive([](Var x) { return ops::gather_rows(x, {2, 0, 2}); }, -1, 1, "gather_rows");
  check_unary_primitive([](Var x) { return ops::mean(x); }, -1, 1, "mean");

  check_binary_primitive([](Var a, Var b) { return ops::matmul(a, b); }, 3, 4, 4, 2, "matmul");
  check_binary_primitive([](Var a, Var b) { return ops::add(a, b); }, 3, 4, 3, 4, "add");
  check_binary_primitive([](Var a, Var b) { return ops::sub(a, b); }, 3, 4, 3, 4, "sub");
  check_binary_primitive([](Var a, Var b) { return ops::mul(a, b); }, 3, 4, 3, 4, "mul");
  check_binary_primitive([](Var a, Var b) { return ops::add_row(a, b); }, 3, 4, 1, 4, "add_row");
  check_binary_primitive([](Var a, Var b) { return ops::mul_row(a, b); }, 3, 4, 1, 4, "mul_row");
  check_binary_primitive([](Var a, Var b) { return ops::concat_rows({a, b}); }, 3, 4, 2, 4, "concat_rows");
  check_binary_primitive([](Var a, Var b) { return ops::concat_cols({a, b}); }, 3, 4, 3, 2, "concat_cols");
  check_binary_primitive([](Var a, Var b) { return ops::cosine(a, b); }, 3, 4, 2, 4, "cosine");
}

TEST_CASE("tape replay is bit-identical") {
  std::mt19937_64 rng(11);
  const Tensor x0 = random_tensor(rng, 4, 4);
  const auto build = [&](Tape& t) {
    Var x = t.parameter("x", x0);
    return ops::sum(ops::mul(ops::softmax_rows(ops::matmul(x, ops::transpose(x))), ops::gelu(x)));
  };
  Tape t1, t2;
  Var l1 = build(t1);
  Var l2 = build(t2);
  CHECK(l1.value() == l2.value());
  CHECK(t1.backward(l1) == t1.backward(l1));
  CHECK(t1.backward(l1) == t2.backward(l2));
}

TEST_CASE("softmax rows sum to one and sigmoid stays in (0,1)") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Tape tape;
    Var x = tape.constant(random_tensor(rng, 3, 7, -30, 30));
    const Tensor s = ops::softmax_rows(x).value();
    for (std::size_t i = 0; i < 3; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < 7; ++j) total += s(i, j);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    for (double v : ops::sigmoid(x).value().data()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("corrupted backward is visible to the checker") {
  ParameterMap params{{"x", Tensor::matrix(2, 3, {0.1, -0.4, 0.9, 0.3, 0.2, -0.7})}};
  const auto loss = [](Tape& t, const ParameterMap& p) { return project(ops::softmax_rows(t.parameter("x", p.at("x"))), 3); };
  CHECK(finite_difference_check(loss, params, {}).max_relative_error <= 1e-6);
  testing::ScopedBackwardCorruption corrupt("softmax_rows", 1.05);
  CHECK(finite_difference_check(loss, params, {}).max_relative_error > 1e-3);
}
