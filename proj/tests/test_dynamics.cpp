#include <doctest.h>

#include <cmath>
#include <random>

#include "dbmc/dynamics.hpp"
#include "dbmc/error.hpp"

#include "test_support.hpp"

using namespace dbmc;
using namespace testsup;

TEST_CASE("stationary state is a fixed point of every unperturbed rhs") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  const auto& x = p.distances;
  WeightModel nominal;

  for (auto& d : rhs_nominal(0.7, x, g, 1.2)) CHECK(std::abs(d) <= 1e-12);
  for (auto& d : rhs_ppt(1.3, x, g, TbgParams{4.0, 1e-4})) CHECK(std::abs(d) <= 1e-12);
  for (auto& d : rhs_pt(1.0, x, g, RhoParams{4.0, 2, 1.0})) CHECK(std::abs(d) <= 1e-12);
  for (auto& d : rhs_perturbed(2.0, x, g, 1.2, nominal)) CHECK(std::abs(d) <= 1e-12);
}

TEST_CASE("two-node derivative by hand") {
  auto g = build_graph(2, {{0, 1, 1.0}}, {0});
  std::vector<double> x{0.0, 5.0};
  auto d = rhs_nominal(0.0, x, g, 1.0);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(-4.0));  // -1 * (5 - (0 + 1))

  auto dp = rhs_pt(0.0, x, g, RhoParams{4.0, 2, 1.0});
  CHECK(dp[1] == doctest::Approx(-2.5 * 4.0));

  TbgParams tbg{4.0, 1e-4};
  auto dt2 = rhs_ppt(2.0, x, g, tbg);
  CHECK(dt2[1] == doctest::Approx(-tbg_gain(2.0, tbg) * 4.0));
}

TEST_CASE("uniform offset above a source parent decays at the gain rate") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  const double c = 0.75, eta = 1.3;
  auto x = p.distances;
  for (int i = 0; i < g.n; ++i)
    if (!g.is_source(i)) x[i] += c;
  auto d = rhs_nominal(0.0, x, g, eta);
  for (int i = 0; i < g.n; ++i) {
    if (g.is_source(i)) {
      CHECK(d[i] == 0.0);
      continue;
    }
    bool parent_is_source = false;
    for (int j : p.true_parents[i]) parent_is_source |= g.is_source(j);
    if (parent_is_source) CHECK(d[i] == doctest::Approx(-eta * c));
  }
}

TEST_CASE("ppt rhs vanishes at window boundaries") {
  auto g = fig2::graph();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> x(g.n);
  for (auto& v : x) v = u(rng);
  for (int s : g.sources) x[s] = 0.0;
  TbgParams tbg{4.0, 1e-4};
  for (double t : {0.0, 4.0, 8.0, 20.0})
    for (double d : rhs_ppt(t, x, g, tbg)) CHECK(d == 0.0);
}

TEST_CASE("ppt rhs is continuous across window boundaries") {
  auto g = fig2::graph();
  std::vector<double> x{0.0, 2.0, 3.0, 5.0, 1.0, 4.0, 2.5, 0.0};
  TbgParams tbg{4.0, 1e-4};
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    auto before = rhs_ppt(4.0 - eps, x, g, tbg);
    auto after = rhs_ppt(4.0 + eps, x, g, tbg);
    double gap = 0.0;
    for (int i = 0; i < g.n; ++i) gap = std::max(gap, std::abs(after[i] - before[i]));
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-4);
}

TEST_CASE("pt rhs is identically zero after the prescribed time") {
  auto g = fig2::graph();
  std::vector<double> x{0.0, 9.0, 1.0, 7.0, 3.0, 2.0, 8.0, 0.0};
  RhoParams rho{4.0, 2, 1.0};
  for (double t : {4.0, 4.5, 100.0})
    for (double d : rhs_pt(t, x, g, rho)) CHECK(d == 0.0);
}

TEST_CASE("nominal weight model reduces the perturbed rhs bitwise") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_connected_graph(rng);
    std::uniform_real_distribution<double> u(-5.0, 15.0);
    std::vector<double> x(g.n);
    for (auto& v : x) v = u(rng);
    for (int s : g.sources) x[s] = 0.0;
    WeightModel nominal;
    auto a = rhs_nominal(1.0, x, g, 1.7);
    auto b = rhs_perturbed(1.0, x, g, 1.7, nominal);
    CHECK(a == b);  // bitwise
  }
}

TEST_CASE("band model stays inside its band and its deviation inside the bound") {
  auto g = fig2::graph();
  WeightModel wm(MultiplicativeBand{0.9, 1.1, 5});
  wm.bind(g);
  CHECK(wm.input_sup(g) == doctest::Approx(0.1 * 2.0));  // widest edge has weight 2
  for (double t = 0.0; t < 20.0; t += 0.37) {
    for (int i = 0; i < g.n; ++i)
      for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k) {
        const double w = wm.at(g, i, k, t);
        CHECK(w >= 0.9 * g.adj_w[k] - 1e-12);
        CHECK(w <= 1.1 * g.adj_w[k] + 1e-12);
        CHECK(std::abs(w - g.adj_w[k]) <= 0.1 * g.adj_w[k] + 1e-12);
      }
  }
}

TEST_CASE("band draws depend on the seed, not the band width") {
  auto g = fig2::graph();
  WeightModel narrow(MultiplicativeBand{0.9, 1.1, 5});
  WeightModel wide(MultiplicativeBand{0.8, 1.2, 5});
  narrow.bind(g);
  wide.bind(g);
  CHECK(narrow.omegas() == wide.omegas());
  CHECK(narrow.phases() == wide.phases());
}

TEST_CASE("abs variant: nonnegative states reduce to the perturbed rhs") {
  auto g = fig2::graph();
  WeightModel wm(MultiplicativeBand{0.9, 1.1, 5});
  wm.bind(g);
  std::vector<double> x{0.0, 1.0, 4.0, 2.0, 0.5, 3.0, 2.5, 0.0};
  auto a = rhs_abs(1.5, x, g, 1.2, wm);
  auto b = rhs_perturbed(1.5, x, g, 1.2, wm);
  CHECK(a == b);
}

TEST_CASE("abs variant drives a negative state upward") {
  auto g = build_graph(2, {{0, 1, 1.0}}, {0});
  WeightModel nominal;
  std::vector<double> x{0.0, -3.0};
  auto d = rhs_abs(0.0, x, g, 1.0, nominal);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(4.0));  // -(-3 - (0 + 1))
}

TEST_CASE("discrete neighbor-min step") {
  auto two = build_graph(2, {{0, 1, 1.0}}, {0});
  std::vector<double> z{5.0, 10.0};
  auto z1 = discrete_min_consensus_step(z, two);
  CHECK(z1 == std::vector<double>{10.0, 5.0});
  auto z2 = discrete_min_consensus_step(z1, two);
  CHECK(z2 == z);  // period-2 oscillation, never consensus

  auto tri = build_graph(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}, {0});
  std::vector<double> w{1.0, 2.0, 3.0};
  CHECK(discrete_min_consensus_step(w, tri) == std::vector<double>{2.0, 1.0, 1.0});

  std::vector<double> c{4.0, 4.0, 4.0};
  CHECK(discrete_min_consensus_step(c, tri) == c);  // constant vectors are fixed
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  std::mt19937_64 rng(23);
  TbgParams tbg{4.0, 1e-4};
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_connected_graph(rng);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> x(g.n), ds(g.n), dp(g.n);
    for (auto& v : x) v = u(rng);
    WeightModel wm(MultiplicativeBand{0.85, 1.15, rng()});
    wm.bind(g);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    const double t = ut(rng);
    for (bool use_abs : {false, true}) {
      serial::rhs_eval(t, x, g, 1.4, wm, use_abs, ds);
      par::rhs_eval(t, x, g, 1.4, wm, use_abs, dp);
      CHECK(ds == dp);
    }
    WeightModel nominal;
    serial::rhs_eval(t, x, g, tbg_gain(t, tbg), nominal, false, ds);
    par::rhs_eval(t, x, g, tbg_gain(t, tbg), nominal, false, dp);
    CHECK(ds == dp);
  }
}

TEST_CASE("lipschitz witness pairs") {
  auto g2 = build_graph(2, {{0, 1, 1.0}}, {0});
  TbgParams tbg{4.0, 1e-4};
  const double L = tbg_gain_bound(tbg);

  std::vector<double> same{0.0, 5.0};
  auto [l0, r0] = lipschitz_witness(1.0, same, same, g2, tbg, L);
  CHECK(l0 == 0.0);
  CHECK(r0 == 0.0);

  std::vector<double> x{0.0, 5.0}, y{0.0, 7.0};
  auto [l1, r1] = lipschitz_witness(2.0, x, y, g2, tbg, L);
  CHECK(l1 <= r1);
  CHECK(r1 == doctest::Approx(2.0 * L * 2.0));

  auto g = fig2::graph();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> us(-10.0, 10.0), ut(0.0, 12.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(g.n), b(g.n);
    for (int i = 0; i < g.n; ++i) {
      a[i] = us(rng);
      b[i] = us(rng);
    }
    auto [lhs, rhs] = lipschitz_witness(ut(rng), a, b, g, tbg, L);
    CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("rhs input validation") {
  auto g = build_graph(2, {{0, 1, 1.0}}, {0});
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(rhs_nominal(0.0, wrong, g, 1.0), Error);
  std::vector<double> x{0.0, 1.0};
  CHECK_THROWS_AS(rhs_nominal(0.0, x, g, 0.0), Error);
  CHECK_THROWS_AS(rhs_nominal(0.0, x, g, -1.0), Error);
}
