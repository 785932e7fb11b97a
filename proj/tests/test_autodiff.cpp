#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "logicloss/autodiff.hpp"
#include "logicloss/rng.hpp"

using namespace logicloss;

TEST_CASE("forward evaluates the residuum and t-norm arithmetic") {
  {
    // min(1, b/a) at a=0.8, b=0.4
    Tape t;
    const NodeId a = t.input("a"), b = t.input("b");
    t.set_root(t.min(t.constant(1.0), t.div(b, a)));
    CHECK(t.forward({{"a", 0.8}, {"b", 0.4}}) == doctest::Approx(0.5).epsilon(1e-12));
  }
  {
    // max(0, a+b-1) at a=0.7, b=0.5
    Tape t;
    const NodeId a = t.input("a"), b = t.input("b");
    t.set_root(t.max(t.constant(0.0), t.sub(t.add(a, b), t.constant(1.0))));
    CHECK(t.forward({{"a", 0.7}, {"b", 0.5}}) == doctest::Approx(0.2).epsilon(1e-12));
  }
  {
    // -log(x) at x=1
    Tape t;
    t.set_root(t.neg(t.log(t.input("x"))));
    CHECK(t.forward({{"x", 1.0}}) == 0.0);
  }
}

TEST_CASE("backward computes the analytic partials of the worked examples") {
  {
    // d/da relu(log a - log b) at a=0.8, b=0.4: the relu is active, so 1/a.
    Tape t;
    const NodeId a = t.param("a"), b = t.param("b");
    t.set_root(t.relu(t.sub(t.log(a), t.log(b))));
    t.forward({}, {{"a", 0.8}, {"b", 0.4}});
    const Gradient g = t.backward();
    CHECK(g.at("a") == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(g.at("b") == doctest::Approx(-2.5).epsilon(1e-12));
  }
  {
    // d/dx -log x at x=0.5
    Tape t;
    t.set_root(t.neg(t.log(t.param("x"))));
    t.forward({}, {{"x", 0.5}});
    CHECK(t.backward().at("x") == doctest::Approx(-2.0).epsilon(1e-12));
  }
}

TEST_CASE("backward before forward is an error") {
  Tape t;
  t.set_root(t.param("x"));
  Workspace ws = t.make_workspace();
  CHECK_THROWS_AS(t.backward(ws), std::logic_error);
}

TEST_CASE("unbound inputs are reported by name") {
  Tape t;
  t.set_root(t.add(t.input("left"), t.input("right")));
  CHECK_THROWS_WITH_AS(t.forward({{"left", 1.0}}), doctest::Contains("right"),
                       std::runtime_error);
}

TEST_CASE("non-finite intermediates name the failing node") {
  Tape t;
  t.set_root(t.div(t.constant(1.0), t.input("x")));
  CHECK_THROWS_WITH_AS(t.forward({{"x", 0.0}}), doctest::Contains("div"), NumericError);
}

TEST_CASE("forward is pure: repeated evaluation is bit-identical") {
  Tape t;
  const NodeId x = t.input("x");
  t.set_root(t.mul(t.exp(t.sub(x, t.constant(0.25))), t.log(t.add(x, t.constant(2.0)))));
  const double v1 = t.forward({{"x", 0.7319}});
  const double v2 = t.forward({{"x", 0.7319}});
  CHECK(v1 == v2);
}

namespace {

// Random graph whose log/div/exp arguments stay in-domain for any parameter
// values: log takes |x|+1, div takes denominator |y|+1, exp takes min(x, 3).
NodeId random_graph(Tape& t, RandomStream& rng, int n_params, int extra_nodes) {
  std::vector<NodeId> pool;
  for (int i = 0; i < n_params; ++i) pool.push_back(t.param("p" + std::to_string(i)));
  pool.push_back(t.constant(0.5));
  pool.push_back(t.constant(-1.25));
  const auto pick = [&] { return pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))]; };
  for (int i = 0; i < extra_nodes; ++i) {
    NodeId node;
    switch (rng.uniform_int(10)) {
      case 0: node = t.add(pick(), pick()); break;
      case 1: node = t.sub(pick(), pick()); break;
      case 2: node = t.mul(pick(), pick()); break;
      case 3: node = t.div(pick(), t.add(t.abs(pick()), t.constant(1.0))); break;
      case 4: node = t.neg(pick()); break;
      case 5: node = t.log(t.add(t.abs(pick()), t.constant(1.0))); break;
      case 6: node = t.exp(t.min(pick(), t.constant(3.0))); break;
      case 7: node = t.min(pick(), pick()); break;
      case 8: node = t.max(pick(), pick()); break;
      default: node = t.relu(pick()); break;
    }
    pool.push_back(node);
  }
  // Sum a few pool nodes so every parameter is likely to matter.
  NodeId root = pool.back();
  for (int i = 0; i < 4; ++i) root = t.add(root, pick());
  return root;
}

}  // namespace

TEST_CASE("adjoints match central finite differences on random graphs") {
  RandomStream rng(42);
  int checked_points = 0;
  int attempts = 0;
  // Structural ties (min(x, x), relu of a negative relu) make some graphs
  // kink-adjacent; those are skipped and replaced by fresh draws.
  while (checked_points < 100 && attempts < 500) {
    ++attempts;
    Tape t;
    t.set_root(random_graph(t, rng, 4, 20));
    Workspace ws = t.make_workspace();
    for (double& p : ws.params) p = rng.normal(0.0, 1.0);
    const GradientCheck check = t.check_gradient(ws, 1e-6);
    if (check.skipped) continue;
    ++checked_points;
    CAPTURE(attempts);
    CHECK(check.max_rel_error <= 1e-4);
  }
  CHECK(checked_points == 100);
}

TEST_CASE("gradient of a sum equals the sum of gradients") {
  const auto build = [](Tape& t, int which) {
    const NodeId x = t.param("x"), y = t.param("y");
    if (which == 0) return t.mul(t.exp(t.min(x, t.constant(2.0))), y);
    return t.log(t.add(t.abs(t.sub(x, y)), t.constant(1.0)));
  };
  Tape combined;
  combined.set_root(combined.add(build(combined, 0), build(combined, 1)));
  combined.forward({}, {{"x", 0.3}, {"y", -0.8}});
  const Gradient g_sum = combined.backward();

  Gradient parts;
  for (int which = 0; which < 2; ++which) {
    Tape t;
    t.set_root(build(t, which));
    t.forward({}, {{"x", 0.3}, {"y", -0.8}});
    for (const auto& [name, v] : t.backward()) parts[name] += v;
  }
  CHECK(std::fabs(g_sum.at("x") - parts.at("x")) <= 1e-12);
  CHECK(std::fabs(g_sum.at("y") - parts.at("y")) <= 1e-12);
}

TEST_CASE("check_gradient is exact for a linear graph") {
  Tape t;
  t.set_root(t.mul(t.param("w"), t.input("x")));
  Workspace ws = t.make_workspace();
  ws.inputs[static_cast<std::size_t>(t.input_slot("x"))] = 3.0;
  ws.params[static_cast<std::size_t>(t.param_slot("w"))] = 2.0;
  const GradientCheck check = t.check_gradient(ws, 1e-6);
  CHECK_FALSE(check.skipped);
  CHECK(check.max_rel_error <= 1e-9);
  CHECK(check.params_checked == 1);
}

TEST_CASE("check_gradient skips points at a relu kink") {
  Tape t;
  t.set_root(t.relu(t.param("w")));
  Workspace ws = t.make_workspace();
  ws.params[0] = 0.0;
  const GradientCheck check = t.check_gradient(ws, 1e-6);
  CHECK(check.skipped);
  CHECK(check.skip_reason.find("relu") != std::string::npos);
}

TEST_CASE("subgradient conventions at kinks") {
  {
    // Relu'(0) = 0
    Tape t;
    t.set_root(t.relu(t.param("x")));
    t.forward({}, {{"x", 0.0}});
    CHECK(t.backward().at("x") == 0.0);
  }
  {
    // Abs'(0) = 0
    Tape t;
    t.set_root(t.abs(t.param("x")));
    t.forward({}, {{"x", 0.0}});
    CHECK(t.backward().at("x") == 0.0);
  }
  {
    // Min routes the full adjoint to the first child on exact ties.
    Tape t;
    t.set_root(t.min(t.param("x"), t.param("y")));
    t.forward({}, {{"x", 1.0}, {"y", 1.0}});
    const Gradient g = t.backward();
    CHECK(g.at("x") == 1.0);
    CHECK(g.at("y") == 0.0);
  }
  {
    // Step has zero derivative everywhere.
    Tape t;
    t.set_root(t.step(t.param("x")));
    t.forward({}, {{"x", 0.5}});
    CHECK(t.backward().at("x") == 0.0);
  }
}

TEST_CASE("structurally identical pure subexpressions share one node") {
  Tape t;
  const NodeId x = t.input("x");
  const NodeId a = t.log(x);
  const NodeId b = t.log(x);
  CHECK(a == b);
  const NodeId s1 = t.add(a, t.constant(1.0));
  const NodeId s2 = t.add(t.constant(1.0), a);  // commutative: same node
  CHECK(s1 == s2);
}

TEST_CASE("dump emits one node per line with stable ids") {
  Tape t;
  const NodeId x = t.input("x");
  const NodeId lg = t.log(x);
  const NodeId half = t.constant(0.5);
  t.set_root(t.relu(t.sub(lg, half)));
  CHECK(t.dump() ==
        "(0 input \"x\")\n"
        "(1 log 0)\n"
        "(2 const 0.5)\n"
        "(3 sub 1 2)\n"
        "(4 relu 3)\n"
        "(root 4)\n");
}
