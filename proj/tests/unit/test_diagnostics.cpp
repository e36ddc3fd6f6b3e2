#include "helpers.hpp"

#include "pathlangevin/diagnostics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace testing;

namespace {

std::vector<double> iid_normal(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  RandomStream rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = shift + rng.normal();
  return out;
}

std::vector<double> ar1(std::size_t n, double rho, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> out(n);
  const double innovation = std::sqrt(1.0 - rho * rho);
  double x = rng.normal();
  for (auto& v : out) {
    x = rho * x + innovation * rng.normal();
    v = x;
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ReferenceSummary summary_of(const std::vector<double>& series, const std::string& name) {
  ReferenceSummary s;
  s.intervals = 8;
  s.dim = 1;
  const auto e = ergodic_average(series);
  s.estimates.push_back({name, e.value, e.se});
  s.marginals.push_back({marginal_name(4, 0), series, {}});
  return s;
}

}  // namespace

TEST_CASE("ergodic average") {
  SUBCASE("constant series") {
    const std::vector<double> c(1000, 2.5);
    const auto e = ergodic_average(c, 100);
    CHECK(e.value == 2.5);
    CHECK(e.se == 0.0);
    CHECK(e.batches == 20);
    CHECK(e.burn_in == 100);
    CHECK(e.samples == 900);
    CHECK(e.reportable());
  }
  SUBCASE("iid standard error is about n^{-1/2}") {
    const auto x = iid_normal(10000, 1);
    const auto e = ergodic_average(x);
    const double target = 1.0 / std::sqrt(10000.0);
    CHECK(e.se > target / 1.5);
    CHECK(e.se < target * 1.5);
  }
  SUBCASE("AR(1) standard error is inflated by sqrt((1 + rho) / (1 - rho))") {
    const double rho = 0.9;
    const std::size_t n = 200000;
    const auto x = ar1(n, rho, 2);
    const auto e = ergodic_average(x);
    const double ratio = e.se * std::sqrt(double(n));
    CHECK(ratio == doctest::Approx(std::sqrt((1 + rho) / (1 - rho))).epsilon(0.3));
  }
  SUBCASE("scale equivariance") {
    auto x = ar1(5000, 0.5, 3);
    const auto e = ergodic_average(x, 50);
    for (double s : {0.5, 2.0, 1024.0}) {
      std::vector<double> y(x);
      for (auto& v : y) v *= s;
      const auto f = ergodic_average(y, 50);
      CHECK(f.value == doctest::Approx(s * e.value).epsilon(1e-13));
      CHECK(f.se == doctest::Approx(s * e.se).epsilon(1e-13));
    }
  }
  SUBCASE("too short") {
    const std::vector<double> x(30, 1.0);
    CHECK_THROWS_AS(ergodic_average(x, 15), DiagnosticsError);
    CHECK_NOTHROW(ergodic_average(x, 10));
  }
}

TEST_CASE("integrated autocorrelation time") {
  CHECK(iact(std::vector<double>(2000, 1.0)) == 1.0);
  CHECK(iact(iid_normal(20000, 4)) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(iact(ar1(200000, 0.9, 5)) == doctest::Approx(19.0).epsilon(0.3));
  CHECK(iact(ar1(200000, 0.5, 6)) == doctest::Approx(3.0).epsilon(0.3));
}

TEST_CASE("Kolmogorov-Smirnov distance") {
  const auto a = iid_normal(10000, 7);
  CHECK(ks_distance(a, a) == 0.0);

  const auto b = iid_normal(10000, 8, 1.0);
  const double exact = normal_cdf(0.5) - normal_cdf(-0.5);
  CHECK(std::abs(ks_distance(a, b) - exact) <= 0.03);
  CHECK(ks_distance(a, b) == ks_distance(b, a));

  std::vector<double> thinned;
  for (std::size_t i = 0; i < a.size(); i += 2) thinned.push_back(a[i]);
  CHECK(ks_distance(a, thinned) <= 0.02);

  const std::vector<double> lo{0.0, 0.1, 0.2};
  const std::vector<double> hi{1.0, 1.1};
  CHECK(ks_distance(lo, hi) == 1.0);
  const std::vector<double> tied{1.0, 1.0, 2.0};
  const std::vector<double> tied2{1.0, 2.0, 2.0};
  CHECK(ks_distance(tied, tied2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("weighted Kolmogorov-Smirnov distance") {
  const std::vector<double> a{0.0, 1.0};
  const std::vector<double> b{0.0, 1.0, 1.0};
  const std::vector<double> none;
  CHECK(ks_distance(a, none, b, none) == doctest::Approx(1.0 / 6.0));
  // Doubling the weight of the second point of `a` makes the CDFs identical.
  const std::vector<double> wa{0.0, std::log(2.0)};
  CHECK(ks_distance(a, wa, b, none) == doctest::Approx(0.0).epsilon(1e-15));
  // Equal log-weights reduce to the unweighted statistic.
  const auto x = iid_normal(500, 9);
  const auto y = iid_normal(700, 10, 0.2);
  const std::vector<double> wx(x.size(), -3.0);
  const std::vector<double> wy(y.size(), 5.0);
  CHECK(ks_distance(x, wx, y, wy) == doctest::Approx(ks_distance(x, y)).epsilon(1e-12));
}

TEST_CASE("effective sample size") {
  CHECK(effective_sample_size(std::vector<double>(100, -7.0)) == doctest::Approx(100.0));
  const std::vector<double> lopsided{0.0, -1000.0, -1000.0};
  CHECK(effective_sample_size(lopsided) == doctest::Approx(1.0));
  const std::vector<double> huge{800.0, 800.0};
  CHECK(effective_sample_size(huge) == doctest::Approx(2.0));
}

TEST_CASE("compare_report") {
  SUBCASE("split halves of one chain pass every gate") {
    const auto x = ar1(40000, 0.3, 11);
    const std::vector<double> first(x.begin(), x.begin() + 20000);
    const std::vector<double> second(x.begin() + 20000, x.end());
    const auto report =
        compare_report(summary_of(first, mean_name(4, 0)), summary_of(second, mean_name(4, 0)));
    REQUIRE(report.rows.size() == 1);
    REQUIRE(report.ks_rows.size() == 1);
    CHECK(report.all_pass());
    CHECK(report.max_abs_z() < 3.0);
  }
  SUBCASE("a shifted chain fails the z gate") {
    const auto a = iid_normal(20000, 12);
    const auto b = iid_normal(20000, 13, 0.5);
    const auto report = compare_report(summary_of(a, "f"), summary_of(b, "f"));
    CHECK_FALSE(report.all_pass());
    CHECK(report.max_abs_z() > 10.0);
    CHECK_FALSE(report.ks_rows[0].pass);
  }
  SUBCASE("zero standard errors") {
    ReferenceSummary a, b;
    a.intervals = b.intervals = 4;
    a.dim = b.dim = 1;
    a.estimates.push_back({"f", 1.0, 0.0});
    b.estimates.push_back({"f", 1.0, 0.0});
    CHECK(compare_report(a, b).rows[0].z == 0.0);
    b.estimates[0].value = 2.0;
    CHECK(std::isinf(compare_report(a, b).rows[0].z));
    CHECK_FALSE(compare_report(a, b).all_pass());
    b.estimates[0].value = std::nan("");
    CHECK(std::isinf(compare_report(a, b).max_abs_z()));
    CHECK_FALSE(compare_report(a, b).all_pass());
  }
  SUBCASE("selection, custom gates and errors") {
    ReferenceSummary a, b;
    a.intervals = b.intervals = 4;
    a.dim = b.dim = 1;
    a.estimates = {{"f", 0.0, 1.0}, {"g", 0.0, 1.0}};
    b.estimates = {{"f", 3.5, 1.0}, {"h", 0.0, 1.0}};
    const auto only_common = compare_report(a, b);
    REQUIRE(only_common.rows.size() == 1);
    CHECK(only_common.rows[0].name == "f");
    CHECK(only_common.all_pass());  // z = 3.5 / sqrt(2) < 3
    GateConfig tight;
    tight.z_max = 2.0;
    CHECK_FALSE(compare_report(a, b, {"f"}, tight).all_pass());
    CHECK_THROWS_AS(compare_report(a, b, {"g"}), DiagnosticsError);
    b.intervals = 8;
    CHECK_THROWS_AS(compare_report(a, b), DiagnosticsError);
  }
  SUBCASE("reports are reproducible") {
    const auto a = iid_normal(5000, 14);
    const auto b = iid_normal(5000, 15);
    const auto r1 = compare_report(summary_of(a, "f"), summary_of(b, "f"));
    const auto r2 = compare_report(summary_of(a, "f"), summary_of(b, "f"));
    CHECK(r1.rows[0].z == r2.rows[0].z);
    CHECK(r1.ks_rows[0].ks == r2.ks_rows[0].ks);
  }
}

TEST_CASE("functional names") {
  CHECK(mean_name(3, 1) == "mean[3,1]");
  CHECK(variance_name(0, 0) == "var[0,0]");
  CHECK(marginal_name(16, 0) == "node[16,0]");
}
