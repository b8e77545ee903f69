#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maicfeas/hull.hpp"
#include "support/test_oracles.hpp"

using namespace maicfeas;

namespace {

IpdMatrix square_ipd() {
  IpdMatrix ipd;
  ipd.covariate_names = {"x", "y"};
  ipd.values = Matrix(2, 4);
  const double pts[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (std::size_t j = 0; j < 4; ++j) {
    ipd.values(0, j) = pts[j][0];
    ipd.values(1, j) = pts[j][1];
  }
  return ipd;
}

AdVector ad2(double x, double y) { return {{x, y}, {"x", "y"}, std::nullopt}; }

IpdMatrix random_ipd(std::mt19937_64& rng, std::size_t p, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  IpdMatrix ipd;
  for (std::size_t i = 0; i < p; ++i) ipd.covariate_names.push_back("v" + std::to_string(i));
  ipd.values = Matrix(p, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) ipd.values(i, j) = normal(rng);
  return ipd;
}

}  // namespace

TEST_CASE("centroid of the unit square is interior") {
  const FeasibilityVerdict v = check_in_hull(square_ipd(), ad2(0.5, 0.5));
  REQUIRE(v.status == HullStatus::Interior);
  REQUIRE(v.exit_code == 0);
  REQUIRE(v.witness.has_value());
  REQUIRE_FALSE(v.certificate.has_value());
}

TEST_CASE("point outside the unit square is infeasible with a separating certificate") {
  const IpdMatrix ipd = square_ipd();
  const AdVector ad = ad2(1.5, 0.5);
  const FeasibilityVerdict v = check_in_hull(ipd, ad);
  REQUIRE(v.status == HullStatus::Infeasible);
  REQUIRE(v.exit_code == 2);
  REQUIRE(v.certificate.has_value());

  // c'ad strictly dominates every c'y_i
  const Vec& c = *v.certificate;
  const double at_ad = dot(c, ad.values);
  for (std::size_t j = 0; j < ipd.n(); ++j) {
    const double at_col = dot(c, ipd.values.col(j));
    REQUIRE(at_ad > at_col);
  }
  REQUIRE(v.separation_margin > 0.0);
}

TEST_CASE("edge midpoint of the unit square is boundary, witness on the edge") {
  const FeasibilityVerdict v = check_in_hull(square_ipd(), ad2(1.0, 0.5));
  REQUIRE(v.status == HullStatus::Boundary);
  REQUIRE(v.exit_code == 0);  // feasible, just not interior
  REQUIRE(v.witness.has_value());
  const Vec& w = *v.witness;
  // only the two right-edge corners (columns 1 and 3) can carry weight
  REQUIRE(w[0] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(w[2] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(w[1] == Catch::Approx(0.5).margin(1e-8));
  REQUIRE(w[3] == Catch::Approx(0.5).margin(1e-8));
}

TEST_CASE("the IPD column mean is always feasible with the uniform witness available") {
  std::mt19937_64 rng(42);
  const IpdMatrix ipd = random_ipd(rng, 3, 12);
  AdVector ad;
  ad.covariate_names = ipd.covariate_names;
  ad.values.resize(3);
  for (std::size_t i = 0; i < 3; ++i) ad.values[i] = sample_mean(ipd.values.row(i));
  const FeasibilityVerdict v = check_in_hull(ipd, ad);
  REQUIRE(v.status != HullStatus::Infeasible);
}

TEST_CASE("interiority probe classifies canonical cases") {
  REQUIRE(interiority_probe(square_ipd(), ad2(0.5, 0.5), 1e-6) == HullStatus::Interior);
  REQUIRE(interiority_probe(square_ipd(), ad2(1.0, 0.5), 1e-6) == HullStatus::Boundary);

  // single patient: the hull is a point, so even its own location is boundary
  IpdMatrix one;
  one.covariate_names = {"x", "y"};
  one.values = Matrix(2, 1);
  one.values(0, 0) = 3.0;
  one.values(1, 0) = -1.0;
  const FeasibilityVerdict v = check_in_hull(one, ad2(3.0, -1.0));
  REQUIRE(v.status == HullStatus::Boundary);
  REQUIRE(check_in_hull(one, ad2(3.5, -1.0)).status == HullStatus::Infeasible);
}

TEST_CASE("verdicts agree with the 2D point-in-polygon oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(3, 12);

  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(size_dist(rng));
    IpdMatrix ipd = random_ipd(rng, 2, n);

    std::vector<oracle::Point2> pts(n);
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (std::size_t j = 0; j < n; ++j) {
      pts[j] = {ipd.values(0, j), ipd.values(1, j)};
      xlo = std::min(xlo, pts[j].x);
      xhi = std::max(xhi, pts[j].x);
      ylo = std::min(ylo, pts[j].y);
      yhi = std::max(yhi, pts[j].y);
    }
    const double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
    const double wx = xhi - xlo, wy = yhi - ylo;
    const AdVector ad = ad2(cx + (uniform(rng) - 0.5) * 2.0 * wx,
                            cy + (uniform(rng) - 0.5) * 2.0 * wy);

    const bool lp_inside = check_in_hull(ipd, ad).status != HullStatus::Infeasible;
    const bool oracle_inside =
        oracle::point_in_hull_2d(pts, {ad.values[0], ad.values[1]});
    INFO("trial " << trial);
    REQUIRE(lp_inside == oracle_inside);
  }
}

TEST_CASE("witness invariants hold on random feasible instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial % 4);
    const std::size_t n = p + 2 + static_cast<std::size_t>(trial % 9);
    const IpdMatrix ipd = random_ipd(rng, p, n);

    // strictly positive combination of all columns is feasible by construction
    Vec mix(n);
    double total = 0.0;
    for (double& m : mix) {
      m = 0.05 + uniform(rng);
      total += m;
    }
    AdVector ad;
    ad.covariate_names = ipd.covariate_names;
    ad.values.assign(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < n; ++j)
        ad.values[i] += ipd.values(i, j) * mix[j] / total;

    const FeasibilityVerdict v = check_in_hull(ipd, ad);
    REQUIRE(v.status != HullStatus::Infeasible);
    REQUIRE(v.witness.has_value());
    const Vec& w = *v.witness;
    REQUIRE(v.witness_violation <= 1e-8);

    double sum = 0.0;
    for (double wi : w) {
      REQUIRE(wi >= 0.0);
      sum += wi;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("certificates strictly separate on random infeasible instances") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial % 3);
    const IpdMatrix ipd = random_ipd(rng, p, p + 3);
    AdVector ad;
    ad.covariate_names = ipd.covariate_names;
    ad.values.resize(p);
    for (std::size_t i = 0; i < p; ++i) ad.values[i] = 4.0 + std::abs(normal(rng));

    const FeasibilityVerdict v = check_in_hull(ipd, ad);
    if (v.status != HullStatus::Infeasible) continue;
    ++infeasible_seen;
    REQUIRE(v.certificate.has_value());
    const double at_ad = dot(*v.certificate, ad.values);
    for (std::size_t j = 0; j < ipd.n(); ++j)
      REQUIRE(at_ad > dot(*v.certificate, ipd.values.col(j)));
  }
  REQUIRE(infeasible_seen > 150);  // the construction should be infeasible nearly always
}

TEST_CASE("verdicts and witnesses are deterministic") {
  std::mt19937_64 rng(5);
  const IpdMatrix ipd = random_ipd(rng, 3, 10);
  AdVector ad;
  ad.covariate_names = ipd.covariate_names;
  ad.values.resize(3);
  for (std::size_t i = 0; i < 3; ++i) ad.values[i] = sample_mean(ipd.values.row(i));

  const FeasibilityVerdict a = check_in_hull(ipd, ad);
  const FeasibilityVerdict b = check_in_hull(ipd, ad);
  REQUIRE(a.status == b.status);
  REQUIRE(a.witness.has_value());
  REQUIRE(*a.witness == *b.witness);  // bitwise identical
}

TEST_CASE("feasibility is monotone under adding patient columns") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const IpdMatrix ipd = random_ipd(rng, 2, 6);
    AdVector ad;
    ad.covariate_names = ipd.covariate_names;
    ad.values = {normal(rng), normal(rng)};
    if (check_in_hull(ipd, ad).status == HullStatus::Infeasible) continue;

    IpdMatrix bigger = ipd;
    bigger.values = Matrix(2, 9);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 6; ++j) bigger.values(i, j) = ipd.values(i, j);
      for (std::size_t j = 6; j < 9; ++j) bigger.values(i, j) = normal(rng);
    }
    REQUIRE(check_in_hull(bigger, ad).status != HullStatus::Infeasible);
  }
}

TEST_CASE("nearly dependent constraint rows do not flip the verdict") {
  // two patients micrometers apart at coordinates near -118: standardization
  // makes the covariate rows almost exact negatives of each other, and a
  // phase 1 that pins artificial variables once they leave the basis reports
  // a wildly wrong infeasibility measure here (regression case)
  IpdMatrix ipd;
  ipd.covariate_names = {"x", "y"};
  ipd.values = Matrix(2, 2);
  ipd.values(0, 0) = -0.085782974842296356;
  ipd.values(1, 0) = -118.09564207917276;
  ipd.values(0, 1) = -0.085840291157647519;
  ipd.values(1, 1) = -118.09562613499371;
  AdVector ad{{-0.085821642049744545, -118.09563132277862}, {"x", "y"}, std::nullopt};

  const FeasibilityVerdict v = check_in_hull(ipd, ad);
  REQUIRE(v.status != HullStatus::Infeasible);
  REQUIRE(v.witness_violation <= 1e-8);
}

TEST_CASE("dimension mismatches and non-finite input are rejected") {
  const IpdMatrix ipd = square_ipd();
  AdVector short_ad{{0.5}, {"x"}, std::nullopt};
  REQUIRE_THROWS_AS(check_in_hull(ipd, short_ad), AlignmentError);

  AdVector nan_ad = ad2(std::numeric_limits<double>::quiet_NaN(), 0.5);
  REQUIRE_THROWS_AS(check_in_hull(ipd, nan_ad), Error);
}
