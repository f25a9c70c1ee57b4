#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <oracles.hpp>
#include <sticky/error.hpp>
#include <sticky/monotone.hpp>

using sticky::IndexRange;
using sticky::PiecewiseLinear;
using sticky::WeightedSequence;

namespace {

WeightedSequence random_sequence(std::mt19937_64& rng, std::size_t n, bool integer_values) {
  std::uniform_real_distribution<double> uw(0.1, 2.0), uv(-2.0, 2.0);
  std::uniform_int_distribution<int> ui(-2, 2);
  std::vector<double> w(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = uw(rng);
    v[i] = integer_values ? ui(rng) : uv(rng);
  }
  return {w, v};
}

double sticky_inf() { return std::numeric_limits<double>::infinity(); }

double lp_norm(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    s = std::isinf(p) ? std::max(s, d) : s + w[i] * std::pow(d, p);
  }
  return std::isinf(p) ? s : std::pow(s, 1.0 / p);
}

}  // namespace

TEST_CASE("project_monotone examples") {
  CHECK(sticky::project_monotone({{1, 1, 1}, {1, 2, 3}}).values == std::vector<double>{1, 2, 3});
  CHECK(sticky::project_monotone({{0.5, 0.5}, {2, 1}}).values == std::vector<double>{1.5, 1.5});
  const auto r = sticky::project_monotone({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {3, 1, 2}}).values;
  for (double x : r) CHECK(x == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("pava blocks") {
  const std::vector<double> w{1, 1, 1, 1}, v{0, 3, 1, 5};
  const auto b = sticky::pava_blocks(w, v);
  REQUIRE(b.size() == 3);
  CHECK(b[0] == IndexRange{0, 1});
  CHECK(b[1] == IndexRange{1, 3});
  CHECK(b[2] == IndexRange{3, 4});
  // Ties are pooled.
  const std::vector<double> tie{1, 1};
  CHECK(sticky::pava_blocks(std::vector<double>{1, 1}, tie).size() == 1);
}

TEST_CASE("weighted sequence validation") {
  CHECK_THROWS_AS(WeightedSequence({1, 2}, {1}), sticky::InvalidArgument);
  CHECK_THROWS_AS(WeightedSequence({1, 0}, {1, 2}), sticky::InvalidArgument);
  CHECK_THROWS_AS(PiecewiseLinear({0, 0}, {1, 2}), sticky::InvalidArgument);
}

TEST_CASE("lower convex envelope examples") {
  const PiecewiseLinear convex({0, 0.25, 1}, {0, -1, 2});
  const auto e0 = sticky::lower_convex_envelope(convex);
  CHECK(std::equal(e0.values().begin(), e0.values().end(), convex.values().begin()));

  const auto tent = sticky::lower_convex_envelope(PiecewiseLinear({0, 0.5, 1}, {0, 0.5, 0}));
  for (double y : tent.values()) CHECK(y == 0.0);
  CHECK(sticky::lower_convex_hull(PiecewiseLinear({0, 0.5, 1}, {0, 0.5, 0})) == std::vector<std::size_t>{0, 2});

  const PiecewiseLinear v({0, 1.0 / 3, 1}, {0, -1, 0});
  const auto ev = sticky::lower_convex_envelope(v);
  CHECK(std::equal(ev.values().begin(), ev.values().end(), v.values().begin()));
  CHECK(v.is_convex());
}

TEST_CASE("project_subspace_HX examples") {
  const std::vector<IndexRange> singles{{0, 1}, {1, 2}, {2, 3}};
  const WeightedSequence f({1, 1, 1}, {3, -1, 2});
  CHECK(sticky::project_subspace_HX(f, singles).values == f.values);
  CHECK(sticky::project_subspace_HX({{0.5, 0.5}, {0, 2}}, std::vector<IndexRange>{{0, 2}}).values ==
        std::vector<double>{1, 1});
  CHECK(sticky::project_subspace_HX({{1, 1, 1}, {0, 2, 5}}, std::vector<IndexRange>{{0, 2}, {2, 3}}).values ==
        std::vector<double>{1, 1, 5});
}

TEST_CASE("project_tangent_cone examples") {
  const WeightedSequence f({1, 1, 1}, {3, -1, 2});
  const std::vector<IndexRange> singles{{0, 1}, {1, 2}, {2, 3}};
  CHECK(sticky::project_tangent_cone(f, singles).values == f.values);
  const std::vector<IndexRange> all{{0, 3}};
  CHECK(sticky::project_tangent_cone(f, all).values == sticky::project_monotone(f).values);
  CHECK(sticky::project_tangent_cone({{1, 1, 1}, {2, 1, 0}}, std::vector<IndexRange>{{0, 2}}).values ==
        std::vector<double>{1.5, 1.5, 0});
}

TEST_CASE("malformed partitions") {
  CHECK_THROWS_AS(sticky::validate_partition(std::vector<IndexRange>{{0, 2}, {1, 3}}, 3), sticky::MalformedPartition);
  CHECK_THROWS_AS(sticky::validate_partition(std::vector<IndexRange>{{1, 1}}, 3), sticky::MalformedPartition);
  CHECK_THROWS_AS(sticky::validate_partition(std::vector<IndexRange>{{2, 3}, {0, 1}}, 3), sticky::MalformedPartition);
  CHECK_THROWS_AS(sticky::validate_partition(std::vector<IndexRange>{{0, 4}}, 3), sticky::MalformedPartition);
  CHECK_NOTHROW(sticky::validate_partition(std::vector<IndexRange>{{0, 1}, {2, 3}}, 3));
}

TEST_CASE("project_monotone matches the QP oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> un(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_sequence(rng, un(rng), trial % 2 == 0);
    const auto p = sticky::project_monotone(f).values;
    const auto q = oracle::isotonic_qp(f.weights, f.values);
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("contraction and mean preservation") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> un(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = un(rng);
    auto f = random_sequence(rng, n, false);
    auto g = random_sequence(rng, n, false);
    g.weights = f.weights;
    const auto pf = sticky::project_monotone(f).values;
    const auto pg = sticky::project_monotone(g).values;
    CHECK(std::is_sorted(pf.begin(), pf.end()));
    for (double p : {1.0, 2.0, sticky_inf()}) {
      CHECK(lp_norm(f.weights, pf, pg, p) <= lp_norm(f.weights, f.values, g.values, p) + 1e-12);
    }
    double mean_f = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_f += f.weights[i] * f.values[i];
      mean_p += f.weights[i] * pf[i];
    }
    CHECK(std::abs(mean_f - mean_p) <= 1e-14 * (1.0 + std::abs(mean_f)) * n);
  }
}

TEST_CASE("envelope slopes equal the projection") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const auto f = random_sequence(rng, 1 + trial % 12, trial % 3 == 0);
    const auto env = sticky::lower_convex_envelope(sticky::cumulative_primitive(f));
    const auto slopes = env.slopes();
    const auto p = sticky::project_monotone(f).values;
    REQUIRE(slopes.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(slopes[i] - p[i]) <= 1e-14 * (1.0 + std::abs(p[i])) * 4);
  }
}

TEST_CASE("averaging after the cone projection equals averaging") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const auto f = random_sequence(rng, n, false);
    std::vector<IndexRange> blocks;
    std::size_t at = 0;
    std::uniform_int_distribution<std::size_t> ul(1, 3);
    while (at < n) {
      const std::size_t len = std::min(n - at, ul(rng));
      blocks.push_back({at, at + len});
      at += len;
    }
    const auto lhs = sticky::project_subspace_HX(sticky::project_tangent_cone(f, blocks), blocks).values;
    const auto rhs = sticky::project_subspace_HX(f, blocks).values;
    for (std::size_t i = 0; i < n; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13));
  }
}

TEST_CASE("cumulative primitive and hull") {
  const auto F = sticky::cumulative_primitive({{0.5, 0.5}, {1, -1}});
  CHECK(std::vector<double>(F.nodes().begin(), F.nodes().end()) == std::vector<double>{0, 0.5, 1});
  CHECK(std::vector<double>(F.values().begin(), F.values().end()) == std::vector<double>{0, 0.5, 0});
  CHECK(F(0.25) == doctest::Approx(0.25));
  CHECK(F.slope(1) == doctest::Approx(-1.0));
  CHECK_FALSE(F.is_convex());
}
