#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <oracles.hpp>
#include <sticky/cluster_predictor.hpp>
#include <sticky/dynamics.hpp>
#include <sticky/error.hpp>
#include <sticky/monotone.hpp>

using sticky::Ensemble;
using sticky::Forecast;
using sticky::IndexRange;
using sticky::Kernel;
using sticky::Region;

namespace {

Ensemble with_psi(std::vector<double> m, std::vector<double> x, const std::vector<double>& psi, const Kernel& k) {
  const auto v = sticky::velocities_for_natural(m, x, psi, k);
  return Ensemble::create(m, x, v, k);
}

Ensemble two(const std::vector<double>& psi, const Kernel& k = Kernel::zero()) {
  return with_psi({0.5, 0.5}, {-1, 1}, psi, k);
}

std::vector<double> vals(const sticky::PiecewiseLinear& p) { return {p.values().begin(), p.values().end()}; }

}  // namespace

TEST_CASE("flux examples") {
  for (double y : vals(sticky::build_flux(two({0, 0})))) CHECK(y == 0.0);
  const auto a = sticky::build_flux(two({1, -1}));
  CHECK(std::vector<double>(a.nodes().begin(), a.nodes().end()) == std::vector<double>{0, 0.5, 1});
  CHECK(vals(a) == std::vector<double>{0, 0.5, 0});
  CHECK(vals(sticky::build_flux(two({-1, 1}))) == std::vector<double>{0, -0.5, 0});
}

TEST_CASE("region examples") {
  const auto inc = sticky::analyze(with_psi({0.2, 0.3, 0.5}, {0, 1, 2}, {-1, 0, 2}, Kernel::zero()));
  for (auto r : inc.cell_labels) CHECK(r == Region::Subcritical);

  const auto tent = sticky::analyze(two({1, -1}));
  CHECK(tent.cell_labels == std::vector<Region>{Region::Supercritical, Region::Supercritical});
  REQUIRE(tent.supercritical.size() == 1);
  CHECK(tent.supercritical[0] == IndexRange{0, 2});

  const auto flat = sticky::analyze(two({0.7, 0.7}));
  CHECK(flat.cell_labels == std::vector<Region>{Region::Critical, Region::Critical});
  REQUIRE(flat.regions.size() == 1);
  CHECK(flat.regions[0].label == Region::Critical);
  CHECK(flat.regions[0].interval.lo == 0.0);
  CHECK(flat.regions[0].interval.hi == 1.0);
}

TEST_CASE("classify_regions rejects mismatched grids") {
  const sticky::PiecewiseLinear a({0, 0.5, 1}, {0, 0.5, 0});
  const sticky::PiecewiseLinear b({0, 1}, {0, 0});
  CHECK_THROWS_AS(sticky::classify_regions(a, b, 1e-12), sticky::InvalidArgument);
}

TEST_CASE("subgroup examples") {
  const auto convex = sticky::subgroups(sticky::PiecewiseLinear({0, 0.25, 0.5, 1}, {0, -0.5, -0.25, 1}));
  CHECK(convex.size() == 3);
  const auto zero = sticky::subgroups(sticky::PiecewiseLinear({0, 0.5, 1}, {0, 0, 0}));
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].interval.lo == 0.0);
  CHECK(zero[0].interval.hi == 1.0);
  CHECK(zero[0].psi == 0.0);
  const double t = 1.0 / 3;
  const auto runs = sticky::subgroups(sticky::PiecewiseLinear({0, t, 2 * t, 1}, {0, t, 2 * t, 2 * t + 1}), 1e-12);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].interval.hi == doctest::Approx(2 * t));
  CHECK(runs[0].psi == doctest::Approx(1.0));
  CHECK(runs[1].psi == doctest::Approx(3.0));
  CHECK(runs[1].interval.cells == IndexRange{2, 3});
}

TEST_CASE("forecast examples") {
  for (const auto& k : {Kernel::zero(), Kernel::all_to_all(1), Kernel::power_law(1, 0.5, 1)}) {
    const auto f = sticky::forecast(sticky::analyze(two({-1, 1}, k)), k);
    REQUIRE(f.size() == 2);
    for (const auto& s : f) CHECK(s.forecast == Forecast::NoCluster);
  }
  const auto z = sticky::forecast(sticky::analyze(two({1, -1})), Kernel::zero());
  REQUIRE(z.size() == 1);
  CHECK(z[0].forecast == Forecast::FiniteTimeCluster);
  CHECK(z[0].finite_time_clusters == std::vector<IndexRange>{{0, 2}});
  CHECK(sticky::forecast_partition(z, 2) == std::vector<IndexRange>{{0, 2}});

  const auto k = Kernel::all_to_all(1.0);
  const auto a = sticky::forecast(sticky::analyze(two({0, 0}, k)), k);
  REQUIRE(a.size() == 1);
  CHECK(a[0].forecast == Forecast::InfiniteTimeCluster);
  CHECK(sticky::forecast_partition(a, 2) == std::vector<IndexRange>{{0, 1}, {1, 2}});

  const auto p = Kernel::power_law(1, 0.5, 1);
  const auto b = sticky::forecast(sticky::analyze(two({0, 0}, p)), p);
  CHECK(b[0].forecast == Forecast::FiniteTimeCluster);
}

TEST_CASE("separation bound examples") {
  const auto z = sticky::analyze(two({-1, 1}));
  const auto q = sticky::QuantileFunction::from_cells(std::vector<double>{0.5, 0.5}, std::vector<double>{-1, 1});
  CHECK(sticky::separation_bound(z, Kernel::zero(), q, 0.25, 0.75) == 2.0);

  const auto k = Kernel::all_to_all(1.0);
  const auto wide = with_psi({0.5, 0.5}, {-5, 5}, {-1, 1}, k);
  const auto qw = sticky::to_quantile(wide);
  CHECK(sticky::separation_bound(sticky::analyze(wide), k, qw, 0.25, 0.75) == doctest::Approx(1.0));

  const auto e = Kernel::exponential(0.1);  // 2 sup Phi = 0.2 < sigma
  const auto s = with_psi({0.5, 0.5}, {-5, 5}, {-1, 1}, e);
  CHECK(sticky::separation_bound(sticky::analyze(s), e, sticky::to_quantile(s), 0.25, 0.75) == doctest::Approx(10.0));

  CHECK_THROWS_AS(sticky::separation_bound(z, Kernel::zero(), q, 0.75, 0.25), sticky::InvalidArgument);
  const auto t = sticky::analyze(two({1, -1}));
  CHECK_THROWS_AS(sticky::separation_bound(t, Kernel::zero(), q, 0.25, 0.75), sticky::InvalidArgument);
}

TEST_CASE("flocking threshold examples") {
  const auto e = Kernel::exponential(1.0);
  const auto th = sticky::flocking_thresholds(sticky::analyze(two({-1.5, 1.5}, e)), e, 0, 1);
  CHECK(th.regime == sticky::FlockingRegime::ThinTailDiverge);
  CHECK(th.lower == doctest::Approx(1.0));

  const auto a = Kernel::all_to_all(1.0);
  const auto fat = sticky::flocking_thresholds(sticky::analyze(two({-1, 1}, a)), a, 0, 1);
  CHECK(fat.regime == sticky::FlockingRegime::FatTailBound);
  CHECK(fat.lower == doctest::Approx(2.0));
  REQUIRE(fat.upper.has_value());
  CHECK(*fat.upper == doctest::Approx(2.0));

  const auto z = sticky::flocking_thresholds(sticky::analyze(two({-0.25, 0.5})), Kernel::zero(), 0, 1);
  CHECK(z.regime == sticky::FlockingRegime::ThinTailDiverge);
  CHECK(z.lower == doctest::Approx(0.75));

  const auto weak = sticky::flocking_thresholds(sticky::analyze(two({-0.5, 0.5}, e)), e, 0, 1);
  CHECK(weak.regime == sticky::FlockingRegime::ThinTailIndeterminate);

  CHECK_THROWS_AS(sticky::flocking_thresholds(sticky::analyze(two({-1, 1})), Kernel::zero(), 1, 0),
                  sticky::InvalidArgument);
}

TEST_CASE("envelope slopes equal the projected natural velocities") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = Kernel::exponential(1.0);
    const auto e = oracle::make(oracle::random_particles(rng, 1 + trial % 40), k);
    const auto fa = sticky::analyze(e);
    const auto slopes = fa.A_star_star.slopes();
    const auto p = sticky::pava(e.original_masses(), e.original_natural_velocities());
    REQUIRE(slopes.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(slopes[i] - p[i]) <= 1e-12);
    for (std::size_t c = 0; c < fa.cell_labels.size(); ++c) {
      const auto g = sticky::subgroup_at(fa, 0.5 * (e.cumulative_mass()[c] + e.cumulative_mass()[c + 1]));
      CHECK(std::abs(fa.subgroups[g].psi - p[c]) <= 1e-12);
    }
  }
}

TEST_CASE("labels are invariant under a Galilean shift") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_particles(rng, 1 + trial % 30);
    auto q = p;
    for (auto& v : q.velocities) v += 0.625;
    const auto fa = sticky::analyze(oracle::make(p, Kernel::zero()));
    const auto fb = sticky::analyze(oracle::make(q, Kernel::zero()));
    CHECK(fa.cell_labels == fb.cell_labels);
    const auto nodes = fa.A.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      CHECK(fb.A.values()[i] - fa.A.values()[i] == doctest::Approx(0.625 * nodes[i]).epsilon(1e-12));
      CHECK(fb.A_star_star.values()[i] - fa.A_star_star.values()[i] ==
            doctest::Approx(0.625 * nodes[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("separation bound holds along simulations") {
  std::mt19937_64 rng(33);
  const std::vector<Kernel> kernels{Kernel::zero(), Kernel::all_to_all(1.0), Kernel::power_law(1, 0.5, 1),
                                    Kernel::exponential(1.0)};
  for (int trial = 0; trial < 20; ++trial) {
    const auto& k = kernels[trial % kernels.size()];
    const auto e = oracle::make(oracle::random_particles(rng, 4 + trial), k);
    const auto fa = sticky::analyze(e);
    const auto q0 = sticky::to_quantile_original(e);
    const auto rec = sticky::simulate(e, k, 4.0, 0.5);
    for (std::size_t a = 0; a < fa.subgroups.size(); ++a) {
      for (std::size_t b = a + 1; b < fa.subgroups.size(); ++b) {
        const double m1 = 0.5 * (fa.subgroups[a].interval.lo + fa.subgroups[a].interval.hi);
        const double m2 = 0.5 * (fa.subgroups[b].interval.lo + fa.subgroups[b].interval.hi);
        const double c = sticky::separation_bound(fa, k, q0, m1, m2);
        for (const auto& st : rec.snapshots) {
          const auto q = sticky::to_quantile_original(st);
          CHECK(q(m2) - q(m1) >= c - 1e-6);
        }
      }
    }
  }
}

TEST_CASE("forecast matches a weakly singular simulation") {
  std::mt19937_64 rng(34);
  const auto k = Kernel::power_law(1.0, 0.5, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = oracle::random_particles(rng, 2 + trial);
    const auto e = oracle::make(p, k);
    const auto predicted = sticky::forecast_partition(sticky::forecast(sticky::analyze(e), k), e.original_size());
    const double mmin = *std::min_element(p.masses.begin(), p.masses.end());
    const auto rec = sticky::simulate(e, k, 50.0 / mmin, 50.0 / mmin);
    const auto& last = rec.snapshots.back();
    std::vector<IndexRange> simulated;
    for (std::size_t c = 0; c < last.size(); ++c) simulated.push_back(last.constituents(c));
    CHECK(simulated == predicted);
  }
}

TEST_CASE("strings") {
  CHECK(sticky::to_string(Region::Supercritical) == "Supercritical");
  CHECK(sticky::to_string(Forecast::InfiniteTimeCluster) == "InfiniteTimeCluster");
  CHECK(sticky::to_string(sticky::FlockingRegime::FatTailBound) == "FatTailBound");
}
