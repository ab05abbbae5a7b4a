#include <doctest.h>

#include <cmath>
#include <random>

#include "dbmc/error.hpp"
#include "dbmc/small_gain.hpp"

#include "test_support.hpp"

using namespace dbmc;
using namespace testsup;

namespace {

GainMatrix hand_matrix(int n, std::vector<double> entries) {
  GainMatrix m;
  m.n = n;
  m.entries = std::move(entries);
  m.eta = 1.0;
  m.zeta = 0.5;
  return m;
}

}  // namespace

TEST_CASE("gain matrix three-case reconstruction on the fixture") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  const double eta = 1.2;
  auto m = gain_matrix(g, p, eta);

  const double src = 0.5 / (1.2 * 1.2);  // D = 3
  CHECK(m.source_row_value == doctest::Approx(src).epsilon(1e-15));
  for (int j = 0; j < g.n; ++j) {
    CHECK(m.at(fig2::n1, j) == doctest::Approx(src));
    CHECK(m.at(fig2::n9, j) == doctest::Approx(src));
  }
  // true-parent columns carry the full gain, everything else the
  // zeta-scaled one
  CHECK(m.at(fig2::n4, fig2::n2) == doctest::Approx(eta));
  CHECK(m.at(fig2::n4, fig2::n3) == doctest::Approx(eta));
  CHECK(m.at(fig2::n4, fig2::n1) == doctest::Approx(p.zeta * eta));
  CHECK(m.at(fig2::n4, fig2::n6) == doctest::Approx(p.zeta * eta));
  CHECK(m.at(fig2::n4, fig2::n4) == doctest::Approx(p.zeta * eta));
  CHECK(m.at(fig2::n8, fig2::n9) == doctest::Approx(eta));
  CHECK(m.at(fig2::n6, fig2::n8) == doctest::Approx(eta));
  CHECK(m.at(fig2::n6, fig2::n9) == doctest::Approx(eta));

  // every entry strictly positive
  for (double v : m.entries) CHECK(v > 0.0);
}

TEST_CASE("gain matrix reconstruction on random graphs") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_connected_graph(rng);
    auto p = stationary_profile(g);
    const double eta = 1.0 + 0.1 * (trial % 7);
    auto m = gain_matrix(g, p, eta > 1.0 ? eta : 1.1);
    const double used_eta = m.eta;
    const double zeff = std::max(p.zeta, 1e-12);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        double want;
        if (g.is_source(i))
          want = 0.5 / std::pow(used_eta, p.effective_diameter - 1);
        else if (std::find(p.true_parents[i].begin(), p.true_parents[i].end(), j) !=
                 p.true_parents[i].end())
          want = used_eta;
        else
          want = zeff * used_eta;
        CHECK(m.at(i, j) == doctest::Approx(want).epsilon(1e-14));
      }
  }
}

TEST_CASE("source rows equal one half at unit gain") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  auto m = gain_matrix(g, p, 1.0);
  CHECK(m.source_row_value == 0.5);  // eta^(D-1) = 1
}

TEST_CASE("zeta floor keeps entries positive and is flagged") {
  auto g = build_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}, {0});
  auto p = stationary_profile(g);
  CHECK(p.zeta_unconstrained);
  auto m = gain_matrix(g, p, 2.0);
  CHECK(m.zeta_floored);
  for (double v : m.entries) CHECK(v > 0.0);
  CHECK(m.at(1, 2) == doctest::Approx(1e-12 * 2.0));
}

TEST_CASE("adjacency indicator") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  auto m = gain_matrix(g, p, 1.2);
  auto a = adjacency(m);
  for (auto v : a) CHECK(v == 1);  // complete

  auto hand = hand_matrix(2, {0.0, 0.5, 0.7, 0.0});
  auto ah = adjacency(hand);
  CHECK(ah == std::vector<std::uint8_t>{0, 1, 1, 0});

  auto ident = hand_matrix(2, {1.0, 0.0, 0.0, 1.0});
  CHECK(adjacency(ident) == std::vector<std::uint8_t>{1, 0, 0, 1});
}

TEST_CASE("max-linear map basics") {
  auto m = hand_matrix(2, {0.2, 0.5, 0.7, 0.1});
  std::vector<double> zero{0.0, 0.0};
  CHECK(gamma_oplus(m, zero) == zero);

  // unit vector picks out a column
  std::vector<double> e0{1.0, 0.0}, e1{0.0, 1.0};
  CHECK(gamma_oplus(m, e0) == std::vector<double>{0.2, 0.7});
  CHECK(gamma_oplus(m, e1) == std::vector<double>{0.5, 0.1});

  std::vector<double> bad{-1.0, 0.0};
  CHECK_THROWS_AS(gamma_oplus(m, bad), Error);

  // monotone and positively homogeneous
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> s{u(rng), u(rng)}, t{0.0, 0.0};
    t[0] = s[0] + u(rng);
    t[1] = s[1] + u(rng);
    auto gs = gamma_oplus(m, s), gt = gamma_oplus(m, t);
    CHECK(gs[0] <= gt[0]);
    CHECK(gs[1] <= gt[1]);
    const double c = u(rng);
    std::vector<double> cs{c * s[0], c * s[1]};
    auto gcs = gamma_oplus(m, cs);
    CHECK(gcs[0] == doctest::Approx(c * gs[0]).epsilon(1e-12));
    CHECK(gcs[1] == doctest::Approx(c * gs[1]).epsilon(1e-12));
  }
}

TEST_CASE("diagonal operator") {
  std::vector<double> s{1.0, 3.0};
  CHECK(apply_D(2.0, s) == std::vector<double>{2.0, 6.0});
  CHECK_THROWS_AS(apply_D(1.0, s), Error);
  CHECK_THROWS_AS(apply_D(0.5, s), Error);
  auto near = apply_D(1.0 + 1e-12, s);
  CHECK(near[0] == doctest::Approx(1.0));
  // one-pass composition equals two-pass
  auto m = hand_matrix(2, {0.2, 0.5, 0.7, 0.1});
  auto two_pass = apply_D(1.5, gamma_oplus(m, s));
  std::vector<double> one_pass(2);
  for (int i = 0; i < 2; ++i)
    one_pass[i] = 1.5 * std::max(m.at(i, 0) * s[0], m.at(i, 1) * s[1]);
  CHECK(two_pass == one_pass);
}

TEST_CASE("sufficient condition on the fixture and boundaries") {
  // fixture: zeta = 1/3, D = 3
  auto cert = sufficient_condition(1.2, 1.0 / 3.0, 3);
  CHECK(cert.verdict == Verdict::CertifiedContractive);
  CHECK(cert.d > 1.0);
  // d2 binds here, same value the looser analytic range would give
  CHECK(cert.d == doctest::Approx(std::pow(0.5, -1.0 / 3.0)).epsilon(1e-9));

  CHECK(sufficient_condition(1.0, 1.0 / 3.0, 3).verdict ==
        Verdict::SufficientConditionFailed);  // strict at eta = 1
  CHECK(sufficient_condition(2.0, 2.0 / 3.0, 3).verdict ==
        Verdict::SufficientConditionFailed);
  CHECK(sufficient_condition(0.5, 0.2, 3).verdict == Verdict::SufficientConditionFailed);

  // unconstrained ratio: any modest gain certifies
  CHECK(sufficient_condition(1.0001, 0.0, 2).verdict == Verdict::CertifiedContractive);
  CHECK(sufficient_condition(5.0, 0.0, 2).verdict == Verdict::CertifiedContractive);

  CHECK_THROWS_AS(sufficient_condition(1.2, 1.0, 3), Error);
  CHECK_THROWS_AS(sufficient_condition(1.2, 0.5, 1), Error);
}

TEST_CASE("certification declines the chain range the cycle oracle refutes") {
  // path of 4 nodes: zeta = 1/2, D = 4. Gains up to 1/zeta = 2 satisfy the
  // looser per-pair reading, but the 2-cycle (node, parent) has product
  // d^2 eta^2 zeta >= 1 once eta reaches zeta^(-1/2); certification must
  // stop at zeta^(-1/(D-1)).
  auto g = gen_line(4, SourceEnd::Leftmost);
  auto p = stationary_profile(g);
  CHECK(p.zeta == doctest::Approx(0.5));
  CHECK(p.effective_diameter == 4);

  const double limit = std::pow(0.5, -1.0 / 3.0);  // zeta^(-1/(D-1)) ~ 1.26
  auto inside = sufficient_condition(limit - 0.05, p.zeta, 4);
  CHECK(inside.verdict == Verdict::CertifiedContractive);
  auto m_in = gain_matrix(g, p, limit - 0.05);
  CHECK(cycle_contraction_bruteforce(m_in, inside.d).verdict ==
        Verdict::CertifiedContractive);

  // eta = 1.9 < 2: inside the looser range, but genuinely refutable
  auto outside = sufficient_condition(1.9, p.zeta, 4);
  CHECK(outside.verdict == Verdict::SufficientConditionFailed);
  auto m_out = gain_matrix(g, p, 1.9);
  auto refuted = cycle_contraction_bruteforce(m_out, 1.0 + 1e-9);
  CHECK(refuted.verdict == Verdict::BruteForceRefuted);
  CHECK(refuted.cycle_product >= 1.0);
}

TEST_CASE("cycle oracle hand cases") {
  auto m = hand_matrix(2, {0.0, 0.5, 0.5, 0.0});
  auto ok = cycle_contraction_bruteforce(m, 1.1);
  CHECK(ok.verdict == Verdict::CertifiedContractive);
  // the only 2-cycle: (1.1*0.5)^2 = 0.3025

  auto bad = cycle_contraction_bruteforce(m, 3.0);
  CHECK(bad.verdict == Verdict::BruteForceRefuted);
  CHECK(bad.cycle_product == doctest::Approx(2.25));
  CHECK(bad.cycle.size() == 2);

  GainMatrix big;
  big.n = 9;
  big.entries.assign(81, 0.1);
  CHECK_THROWS_AS(cycle_contraction_bruteforce(big, 1.1), Error);
}

TEST_CASE("certified instances survive the cycle oracle and the probe") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int certified = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_connected_graph(rng, 7);
    auto p = stationary_profile(g);
    const double hi = p.zeta > 0.0 ? 1.0 / p.zeta : 5.0;
    const double eta = 1.0 + u01(rng) * (std::min(hi, 5.0) - 1.0);
    auto cert = sufficient_condition(eta, p.zeta, p.effective_diameter);
    if (cert.verdict != Verdict::CertifiedContractive) continue;
    ++certified;
    auto m = gain_matrix(g, p, eta);
    auto bf = cycle_contraction_bruteforce(m, cert.d);
    CHECK(bf.verdict == Verdict::CertifiedContractive);
    auto probe = no_increase_probe(m, cert.d, 2000, rng());
    CHECK(probe.pass);
  }
  CHECK(certified >= 10);  // the draw must exercise the certified range
}

TEST_CASE("probe finds counterexamples once the diagonal factor is too large") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  auto m = gain_matrix(g, p, 1.2);
  // with d = 3 every non-source row already scales by d*zeta*eta > 1, so
  // every positive vector violates no-increase
  auto probe = no_increase_probe(m, 3.0, 200, 7);
  CHECK_FALSE(probe.pass);
  REQUIRE(!probe.counterexamples.empty());
  const auto& x = probe.counterexamples.front();
  auto mapped = apply_D(3.0, gamma_oplus(m, x));
  for (int i = 0; i < m.n; ++i) CHECK(mapped[i] >= x[i]);
}

TEST_CASE("decay implication holds along an overestimate run") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  SimConfig cfg;
  cfg.protocol = Protocol::Nominal;
  cfg.eta = 1.2;
  cfg.init = OverestimateInit{10.0, 77};
  cfg.t_end = 12.0;
  cfg.dt = 1e-3;
  cfg.sample_every = 1;
  auto traj = integrate(cfg, g, p);
  WeightModel nominal;
  const double slack = 1e-6 + 10.0 * std::pow(cfg.dt, 4);
  auto rep = error_decay_implication_check(traj, g, p, cfg.eta, nominal, slack);
  CHECK(rep.pass);
  CHECK(rep.antecedent_fired > 100);

  // source errors stay identically zero
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    CHECK(traj.errors[s][fig2::n1] == 0.0);
    CHECK(traj.errors[s][fig2::n9] == 0.0);
  }
}

TEST_CASE("decay implication also holds under a weight band") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  SimConfig cfg;
  cfg.protocol = Protocol::Perturbed;
  cfg.eta = 1.2;
  cfg.weights = WeightModel(MultiplicativeBand{0.9, 1.1, 3});
  cfg.init = RandomBandInit{0.0, 10.0, 3};
  cfg.t_end = 20.0;
  cfg.dt = 1e-3;
  cfg.sample_every = 1;
  auto traj = integrate(cfg, g, p);
  const double slack = 1e-6 + 10.0 * std::pow(cfg.dt, 4);
  auto rep = error_decay_implication_check(traj, g, p, cfg.eta, cfg.weights, slack);
  CHECK(rep.pass);
}

TEST_CASE("decay implication is vacuous from a stationary start") {
  auto g = fig2::graph();
  auto p = stationary_profile(g);
  SimConfig cfg;
  cfg.protocol = Protocol::Nominal;
  cfg.eta = 1.2;
  cfg.init = ExplicitInit{p.distances};
  cfg.t_end = 2.0;
  cfg.dt = 1e-3;
  cfg.sample_every = 1;
  auto traj = integrate(cfg, g, p);
  WeightModel nominal;
  auto rep = error_decay_implication_check(traj, g, p, cfg.eta, nominal, 1e-6);
  CHECK(rep.pass);
  CHECK(rep.antecedent_fired == 0);
}
