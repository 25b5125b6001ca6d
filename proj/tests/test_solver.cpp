#include "dualprox/solver.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace dualprox;
using testing::vec;

namespace {

CompositeProxProblem single(ProxFunction g, Vector z, std::optional<LinearOperator> op = std::nullopt) {
  const LinearOperator L = op ? *op : identity_operator(z.size());
  return {std::move(z), {{1.0, std::move(g), L, Vector::Zero(L.dim_out())}}};
}

CompositeProxProblem two_abs(double z) {
  return {vec({z}),
          {{0.5, norm1(), identity_operator(1), vec({0})}, {0.5, norm1(), identity_operator(1), vec({0})}}};
}

}  // namespace

TEST_CASE("solve examples") {
  const auto box = make_indicator(ConvexSetDescriptor::box(vec({0, 0}), vec({1, 1})));
  auto r = solve(single(box, vec({2, -1})));
  CHECK(r.solution.converged);
  CHECK((r.solution.x - vec({1, 0})).norm() <= 1e-8);

  r = solve(two_abs(3.0));
  CHECK(r.solution.converged);
  CHECK(r.solution.x[0] == doctest::Approx(2.0).epsilon(1e-8));

  r = solve(single(norm1(), vec({1}), scalar_operator(1, 2.0)));
  CHECK(r.solution.converged);
  CHECK(std::abs(r.solution.x[0]) <= 1e-8);
}

TEST_CASE("hand-rolled single step") {
  SolverConfig cfg;
  cfg.gamma = constant_schedule(1.0);
  const SplittingSolver s(single(norm2(), vec({3, 4})), cfg);
  const auto s0 = s.initial_state();
  CHECK(s0.x == vec({3, 4}));
  const auto s1 = s.step(s0);
  CHECK(s1.n == 1);
  CHECK((s1.v[0] - vec({0.6, 0.8})).norm() <= 1e-15);
  CHECK((s1.x - vec({2.4, 3.2})).norm() <= 1e-15);
}

TEST_CASE("zero injector reproduces steps bit for bit") {
  std::mt19937_64 rng(5);
  const Matrix a = testing::random_matrix(rng, 3, 2);
  CompositeProxProblem p{vec({1, -2}),
                         {{0.6, norm1(), matrix_operator(a), vec({0.1, 0.2, 0.3})},
                          {0.4, make_indicator(ConvexSetDescriptor::ball(vec({0, 0}), 1.0)), identity_operator(2),
                           vec({0, 0})}}};
  SolverConfig plain;
  SolverConfig injected;
  injected.error_injector = [](std::size_t, std::size_t, Index dim) { return Vector(Vector::Zero(dim)); };
  const SplittingSolver a1(p, plain), a2(p, injected);
  auto s = a1.initial_state();
  auto t = a2.initial_state();
  for (int k = 0; k < 50; ++k) {
    s = a1.step(s);
    t = a2.step(t);
    CHECK(s.x == t.x);
    for (std::size_t i = 0; i < s.v.size(); ++i) CHECK(s.v[i] == t.v[i]);
  }
}

TEST_CASE("primal iterate is recomputed from the duals") {
  std::mt19937_64 rng(8);
  const Matrix a = testing::random_matrix(rng, 2, 3);
  CompositeProxProblem p{vec({1, 2, 3}),
                         {{0.5, norm2(), matrix_operator(a), vec({1, 0})},
                          {0.5, elastic_net(1.0, 0.5), identity_operator(3), vec({0, 0, 1})}}};
  const SplittingSolver s(p, {});
  auto st = s.initial_state();
  for (int k = 0; k < 30; ++k) {
    st = s.step(st);
    Vector x = p.z;
    for (std::size_t i = 0; i < p.terms.size(); ++i) x -= p.terms[i].weight * p.terms[i].op.adjoint(st.v[i]);
    CHECK((x - st.x).norm() <= 1e-14);
  }
}

TEST_CASE("small relaxation bounds the dual step") {
  const double eps = 1e-3;
  SolverConfig cfg;
  cfg.lambda = constant_schedule(eps);
  cfg.epsilon = eps;
  const SplittingSolver s(single(norm2(), vec({3, 4})), cfg);
  auto st = s.initial_state();
  for (int k = 0; k < 20; ++k) {
    const auto next = s.step(st);
    const double gamma = s.schedule().gamma(st.n);
    const Vector full = norm2().prox_conjugate(gamma, st.v[0] + gamma * st.x);
    CHECK((next.v[0] - st.v[0]).norm() <= eps * (full.norm() + st.v[0].norm()) + 1e-15);
    st = next;
  }
}

TEST_CASE("objectives") {
  const auto p = single(norm2(), vec({3, 4}));
  CHECK(primal_objective(p, vec({2.4, 3.2})).value() == doctest::Approx(4.5));
  // x = z: quadratic part vanishes
  CHECK(primal_objective(p, vec({3, 4})).value() == doctest::Approx(5.0));
  const auto ball = single(make_indicator(ConvexSetDescriptor::ball(vec({0, 0}), 1.0)), vec({3, 4}));
  CHECK(primal_objective(ball, vec({2, 0})).is_infinite());

  CHECK(dual_objective(p, {vec({0, 0})})->value() == doctest::Approx(12.5));
  CHECK(dual_objective(p, {vec({0.6, 0.8})})->value() == doctest::Approx(8.0));
  CHECK(dual_objective(p, {vec({2, 0})})->is_infinite());
}

TEST_CASE("weak duality along the run") {
  std::mt19937_64 rng(13);
  const Matrix a = testing::random_matrix(rng, 2, 2);
  CompositeProxProblem p{vec({2, -1}),
                         {{0.5, norm1(), matrix_operator(a), vec({0.5, 0})},
                          {0.5, norm2(), identity_operator(2), vec({0, 1})}}};
  const auto r = solve(p);
  CHECK(r.solution.converged);
  // primal + dual >= |z|^2/2 for every dual-feasible v, with equality at the solution
  const double half = 0.5 * p.z.squaredNorm();
  for (const auto& rec : r.trace.records()) {
    if (!rec.dual || rec.dual->is_infinite() || rec.primal.is_infinite()) continue;
    CHECK(rec.primal.value() + rec.dual->value() >= half - 1e-9);
  }
  const double gap = primal_objective(p, r.solution.x).value() + dual_objective(p, r.solution.v)->value() - half;
  CHECK(std::abs(gap) <= 1e-10);
}

TEST_CASE("configuration errors") {
  const auto p = single(norm1(), vec({1}));
  SolverConfig cfg;
  cfg.gamma = constant_schedule(2.5);  // rho = 1 so gamma must stay below 2
  CHECK_THROWS_AS(SplittingSolver(p, cfg), ConfigError);
  cfg.gamma = constant_schedule(1.0);
  cfg.lambda = constant_schedule(1.5);
  CHECK_THROWS_AS(SplittingSolver(p, cfg), ConfigError);
  cfg.lambda = {};
  cfg.epsilon = 2.0;
  CHECK_THROWS_AS(SplittingSolver(p, cfg), ConfigError);
  SolverConfig neg;
  neg.tol = -1.0;
  CHECK_THROWS_AS(SplittingSolver(p, neg), ConfigError);

  CompositeProxProblem bad{vec({1}), {{0.7, norm1(), identity_operator(1), vec({0})}}};
  CHECK_THROWS(bad.validate());
  CompositeProxProblem dims{vec({1, 2}), {{1.0, norm1(), identity_operator(3), vec({0, 0, 0})}}};
  CHECK_THROWS(dims.validate());
  CompositeProxProblem nan_z{vec({std::nan("")}), {{1.0, norm1(), identity_operator(1), vec({0})}}};
  CHECK_THROWS(nan_z.validate());
}

TEST_CASE("norm override changes rho") {
  auto p = single(norm1(), vec({1}), scalar_operator(1, 2.0));
  SolverConfig cfg;
  cfg.norm_override = {4.0};
  const SplittingSolver s(p, cfg);
  CHECK(s.schedule().rho() == doctest::Approx(1.0 / 16.0));
  CHECK(SplittingSolver(p, {}).schedule().rho() == doctest::Approx(0.25));
}

TEST_CASE("non-convergence is reported, not thrown") {
  SolverConfig cfg;
  cfg.max_iter = 2;
  cfg.tol = 1e-14;
  const auto r = solve(two_abs(3.0), cfg);
  CHECK_FALSE(r.solution.converged);
  CHECK(r.solution.iterations == 2);
}

TEST_CASE("trace CSV") {
  const auto r = solve(two_abs(3.0));
  std::ostringstream os;
  r.trace.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("n,primal,dual,step_norm,gamma,lambda\n", 0) == 0);
  CHECK(r.trace.size() == r.solution.iterations + 1);
  CHECK(r.trace.records().front().n == 0);
  CHECK_FALSE(r.trace.records().front().step_norm.has_value());

  SolverConfig quiet;
  quiet.record_trace = false;
  CHECK(solve(two_abs(3.0), quiet).trace.empty());
}

TEST_CASE("initial duals warm start") {
  const auto p = single(norm2(), vec({3, 4}));
  SolverConfig cfg;
  cfg.initial_duals = {vec({0.6, 0.8})};
  const auto r = solve(p, cfg);
  CHECK(r.solution.converged);
  CHECK(r.solution.iterations <= 5);
  CHECK((r.solution.x - vec({2.4, 3.2})).norm() <= 1e-12);
}

TEST_CASE("Dykstra examples") {
  const auto lower1 = make_indicator(ConvexSetDescriptor::halfspace(vec({1, 0}), 0.0));
  const auto lower2 = make_indicator(ConvexSetDescriptor::halfspace(vec({0, 1}), 0.0));
  auto r = solve_dykstra(vec({2, 1}), WeightVector({0.5, 0.5}), {lower1, lower2});
  CHECK(r.solution.converged);
  CHECK(r.solution.x.norm() <= 1e-8);

  const DykstraSolver one(vec({3, 4}), WeightVector({1.0}), {norm2()});
  const auto st = one.step(one.initial_state());
  CHECK((st.x - norm2().prox(1.0, vec({3, 4}))).norm() <= 1e-15);

  r = solve_dykstra(vec({3}), WeightVector({0.5, 0.5}), {norm1(), norm1()});
  CHECK(r.solution.x[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("Dykstra matches the splitting iteration") {
  std::mt19937_64 rng(99);
  const std::vector<ProxFunction> fs{norm1(), norm2(), elastic_net(0.5, 1.0),
                                     make_indicator(ConvexSetDescriptor::ball(vec({0.5, 0, 0, 1}), 1.0))};
  const Vector z = testing::random_vector(rng, 4, 3.0);
  const WeightVector w({0.2, 0.3, 0.5});
  const std::vector<ProxFunction> chosen{fs[0], fs[3], fs[2]};
  SolverConfig cfg;
  cfg.gamma = constant_schedule(1.0);
  cfg.lambda = constant_schedule(1.0);
  const DykstraSolver d(z, w, chosen, cfg);
  CompositeProxProblem p{z, {}};
  for (std::size_t i = 0; i < chosen.size(); ++i) p.terms.push_back({w[i], chosen[i], identity_operator(4), Vector::Zero(4)});
  const SplittingSolver s(p, cfg);
  auto ds = d.initial_state();
  auto ss = s.initial_state();
  for (int n = 0; n < 200; ++n) {
    CHECK((ds.x - ss.x).norm() <= 1e-12);
    Vector mass = Vector::Zero(4);
    for (std::size_t i = 0; i < chosen.size(); ++i) mass += w[i] * ds.z_aux[i];
    CHECK((mass - z).norm() <= 1e-12);
    ds = d.step(ds);
    ss = s.step(ss);
  }
}

TEST_CASE("qualification") {
  CompositeProxProblem norms{vec({1, 1}),
                             {{0.5, norm1(), identity_operator(2), vec({0, 0})},
                              {0.5, norm2(), identity_operator(2), vec({0, 0})}}};
  CHECK(check_qualification(norms) == Qualification::satisfied_by_sufficient_rule);

  const auto ball = make_indicator(ConvexSetDescriptor::ball(vec({0, 0}), 1.0));
  const auto ball2 = make_indicator(ConvexSetDescriptor::ball(vec({0, 0}), 2.0));
  CompositeProxProblem balls{vec({3, 0}),
                             {{0.5, ball, identity_operator(2), vec({0, 0})},
                              {0.5, ball2, identity_operator(2), vec({0, 0})}}};
  CHECK(check_qualification(balls, vec({0, 0})) == Qualification::satisfied_by_sufficient_rule);
  CHECK(check_qualification(balls) == Qualification::unknown);
  CHECK(check_qualification(balls, vec({1.5, 0})) == Qualification::unknown);
}

TEST_CASE("stagnation rule") {
  StagnationRule rule(1e-6, 3);
  CHECK_FALSE(rule.update(1.0, 1.0, 1.0, 1.0));
  CHECK_FALSE(rule.update(0.0, 1.0, 0.0, 1.0));
  CHECK_FALSE(rule.update(0.0, 1.0, 0.0, 1.0));
  CHECK(rule.update(0.0, 1.0, 0.0, 1.0));
  StagnationRule slow(1e-6, 3);
  // steps that never shrink give q >= 1 and never stop
  for (int k = 0; k < 10; ++k) CHECK_FALSE(slow.update(1e-9, 1.0, 1e-9, 1.0));
}

TEST_CASE("weighted dual norm") {
  const std::vector<Vector> a{vec({3, 4}), vec({1})};
  const std::vector<double> w{0.5, 0.5};
  CHECK(weighted_dual_norm(a, {}, w) == doctest::Approx(std::sqrt(0.5 * 25 + 0.5)));
  CHECK(weighted_dual_norm(a, a, w) == 0.0);
}
