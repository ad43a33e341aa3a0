#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "popdyn/lookdown.hpp"
#include "popdyn/presets.hpp"

using namespace popdyn;

namespace {

double rk4_level(double u, double b, double c, double dt, int steps) {
  const double h = dt / steps;
  auto f = [&](double v) { return c * v * v - b * v; };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(u), k2 = f(u + 0.5 * h * k1), k3 = f(u + 0.5 * h * k2), k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

LevelledPopulation levelled(const DemographyModel& m, std::size_t n, double N, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  const PointPopulation pop = uniform_population(n, N, Box::interval(0.0, 10.0), rng);
  return make_levelled(pop, m.theta, rng);
}

}  // namespace

TEST_SUITE("lookdown") {
  TEST_CASE("level ODE closed form") {
    CHECK(evolve_level(1.5, 0.7, 0.0, 2.0).level == doctest::Approx(1.5 * std::exp(-1.4)).epsilon(1e-14));
    CHECK(evolve_level(1.0, 0.0, 1.0, 0.5).level == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(evolve_level(1.0, 0.0, 1.0, 1.5).exploded);
    CHECK_THROWS(evolve_level(-0.1, 1.0, 1.0, 0.1));

    Rng rng = make_stream(31, 0);
    std::uniform_real_distribution<double> ub(-2.0, 2.0), uc(0.0, 0.3), uu(0.05, 1.0);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
      const double b = ub(rng), c = uc(rng), u0 = uu(rng), dt = 0.5;
      const LevelUpdate up = evolve_level(u0, b, c, dt);
      if (up.exploded) continue;
      const double oracle = rk4_level(u0, b, c, dt, 1000);
      CHECK(std::abs(up.level - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));
      ++checked;
    }
    CHECK(checked > 150);
  }

  TEST_CASE("level coefficients") {
    PresetParams pp;
    pp.N = 40.0;
    pp.theta = 10.0;
    const DemographyModel m = logistic_model(pp);
    Rng rng = make_stream(32, 0);
    const PointPopulation pop = uniform_population(400, pp.N, Box::interval(0.0, 10.0), rng);
    const Point x = make_point({4.0});
    const LevelCoefficients lc = level_coefficients(m, x, pop);
    CHECK(lc.b == doctest::Approx(1.0 - kernel_density(m.kernel_F, pop, x)).epsilon(1e-12));
    CHECK(lc.c == doctest::Approx(pp.theta / pp.N).epsilon(1e-14));

    pp.theta = pp.N;
    const DemographyModel eq = logistic_model(pp);
    CHECK(level_coefficients(eq, x, pop).c == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("sigma-point expectation against moments and Monte Carlo") {
    const DispersalLaw law = DispersalLaw::isotropic(1, 0.8, 4.0, make_point({0.6}));
    const Point x = make_point({1.0});
    const double mu = 1.0 + 0.6 / 4.0, var = 0.8 / 4.0;
    // Three Gauss-Hermite nodes integrate polynomials up to degree five exactly.
    CHECK(expect_dispersal(law, x, [](const Point& y) { return y[0] * y[0]; }) ==
          doctest::Approx(mu * mu + var).epsilon(1e-12));
    CHECK(expect_dispersal(law, x, [](const Point& y) { return std::pow(y[0], 4); }) ==
          doctest::Approx(std::pow(mu, 4) + 6 * mu * mu * var + 3 * var * var).epsilon(1e-12));

    // theta (E r(Y) - r(x)) for linear r stays O(1) as theta grows; compare with sampling.
    auto r = [](const Point& y) { return 0.2 + 0.05 * y[0]; };
    for (double theta : {10.0, 100.0, 1000.0}) {
      const DispersalLaw q = DispersalLaw::isotropic(1, 1.0, theta, make_point({0.5}));
      const double quad = theta * (expect_dispersal(q, x, r) - r(x));
      Rng rng = make_stream(33, static_cast<std::uint64_t>(theta));
      std::vector<double> mc;
      for (int i = 0; i < 100000; ++i) mc.push_back(theta * (r(q.sample(x, rng)) - r(x)));
      const double se = std::sqrt(testutil::variance(mc) / mc.size());
      CHECK(std::abs(quad - testutil::mean(mc)) < 3.0 * se);
      CHECK(quad == doctest::Approx(0.05 * 0.5).epsilon(1e-10));
    }
  }

  TEST_CASE("top level never reproduces") {
    PresetParams pp;
    pp.N = 10.0;
    pp.theta = 2.0;
    const DemographyModel m = critical_model(pp);
    LevelledPopulation pop;
    pop.N = pp.N;
    pop.theta = pp.theta;
    pop.domain = Box::interval(0.0, 10.0);
    LevelledIndividual ind;
    ind.position = make_point({5.0});
    ind.level = pp.N;
    ind.label = pop.labels.add_root(0.0);
    pop.individuals.push_back(ind);
    Rng rng = make_stream(34, 0);
    lookdown_step(pop, m, 0.01, rng);
    for (const auto& e : pop.log) CHECK(e.event != LogEvent::birth);
  }

  TEST_CASE("swap flag is fair and levels rise when b = 0") {
    PresetParams pp;
    pp.N = 50.0;
    pp.theta = 20.0;
    const DemographyModel m = critical_model(pp);
    LevelledPopulation pop = levelled(m, 500, pp.N, 35);
    Rng rng = make_stream(35, 1);
    const double dt = max_stable_dt(m);

    std::map<LabelId, double> before;
    for (const auto& i : pop.individuals) before[i.label] = i.level;
    lookdown_step(pop, m, dt, rng);
    for (const auto& i : pop.individuals) {
      auto it = before.find(i.label);
      if (it != before.end()) CHECK(i.level > it->second);
    }

    while (pop.log.size() < 30000 && !pop.individuals.empty()) lookdown_step(pop, m, dt, rng);
    int births = 0, swaps = 0;
    for (const auto& e : pop.log) {
      if (e.event != LogEvent::birth) continue;
      ++births;
      swaps += e.swap;
    }
    REQUIRE(births > 10000);
    CHECK(std::abs(swaps / double(births) - 0.5) < 3.0 * testutil::binomial_se(0.5, births));
  }

  TEST_CASE("projection") {
    PresetParams pp;
    pp.N = 25.0;
    const DemographyModel m = logistic_model(pp);
    LevelledPopulation empty;
    CHECK(project(empty).empty());
    const LevelledPopulation pop = levelled(m, 60, pp.N, 36);
    const PointPopulation p = project(pop);
    CHECK(p.size() == 60);
    CHECK(p.total_mass() == doctest::Approx(60.0 / 25.0));
    for (const auto& i : pop.individuals) {
      CHECK(i.level >= 0.0);
      CHECK(i.level <= pp.N);
    }
  }

  TEST_CASE("hand-built lineage") {
    LevelledPopulation pop;
    pop.N = 10.0;
    pop.domain = Box::interval(0.0, 10.0);
    const LabelId a = pop.labels.add_root(0.0);
    const LabelId b = pop.labels.add_child(a, 1.0);
    const LabelId c = pop.labels.add_child(b, 2.0);
    CHECK(pop.labels.to_string(c) == "1.1.1");
    // t=1: a at 0 gives birth to b at 5, no swap. t=2: b (at 5) gives birth, swap: b moves to 7, c takes 5.
    pop.log.push_back({1.0, LogEvent::birth, a, b, false, make_point({0.0}), make_point({5.0}), 3.0});
    pop.log.push_back({2.0, LogEvent::birth, b, c, true, make_point({5.0}), make_point({7.0}), 4.0});
    pop.time = 3.0;
    pop.individuals.push_back({make_point({0.0}), 1.0, a, 0.0});
    pop.individuals.push_back({make_point({7.0}), 2.0, b, 1.0});
    pop.individuals.push_back({make_point({5.0}), 4.0, c, 2.0});

    const LineagePath pa = trace_lineage(pop, a, 0.0);
    CHECK(pa.s.size() == 1);
    CHECK(pa.at(2.9)[0] == 0.0);

    const LineagePath pb = trace_lineage(pop, b, 0.0);
    CHECK(pb.at(0.5)[0] == 7.0);
    CHECK(pb.at(1.0)[0] == 5.0);
    CHECK(pb.at(1.5)[0] == 5.0);
    CHECK(pb.at(2.0)[0] == 0.0);
    CHECK(pb.at(2.5)[0] == 0.0);
    CHECK(pb.s == std::vector<double>{0.0, 1.0, 2.0});

    const LineagePath pc = trace_lineage(pop, c, 0.0);
    CHECK(pc.at(0.5)[0] == 5.0);
    CHECK(pc.at(1.5)[0] == 5.0);
    CHECK(pc.at(2.5)[0] == 0.0);

    pop.log_start = 0.5;
    CHECK_THROWS_WITH(trace_lineage(pop, c, 0.0), "lineage record gap");
  }

  TEST_CASE("lineage jumps sit at ancestral birth times") {
    PresetParams pp;
    pp.N = 20.0;
    pp.theta = 5.0;
    const DemographyModel m = logistic_model(pp);
    Rng rng = make_stream(37, 0);
    const PointPopulation init = uniform_population(200, pp.N, Box::interval(0.0, 10.0), rng);
    const LookdownRun run = run_lookdown(m, init, 2.0, 1.0, 0.0, rng);
    std::set<double> birth_times;
    for (const auto& e : run.final_state.log) {
      if (e.event == LogEvent::birth) birth_times.insert(run.final_state.time - e.t);
    }
    const LineageIndex index(run.final_state);
    for (std::size_t i = 0; i < run.final_state.individuals.size(); i += 10) {
      const auto& ind = run.final_state.individuals[i];
      const LineagePath p = index.trace(ind.label, ind.position, 0.0);
      for (std::size_t k = 1; k < p.s.size(); ++k) CHECK(birth_times.count(p.s[k]) == 1);
    }
  }

  TEST_CASE("KS uniformity") {
    constexpr int kReps = 10000;
    int rejects = 0;
    Rng rng = make_stream(38, 0);
    for (int i = 0; i < kReps; ++i) {
      std::vector<double> s(50);
      for (double& v : s) v = 7.0 * uniform01(rng);
      rejects += ks_uniform(s, 7.0).p_value < 0.01;
    }
    CHECK(std::abs(rejects / double(kReps) - 0.01) < 3.0 * testutil::binomial_se(0.01, kReps));
    CHECK(ks_uniform(std::vector<double>(40, 3.0), 7.0).p_value < 1e-10);

    LevelledPopulation few;
    few.N = 5.0;
    CHECK_THROWS(levels_uniformity_stat(few));
  }
}
