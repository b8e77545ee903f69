#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maicfeas/maic.hpp"

using namespace maicfeas;

namespace {

IpdMatrix random_ipd(std::mt19937_64& rng, std::size_t p, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  IpdMatrix ipd;
  for (std::size_t i = 0; i < p; ++i) ipd.covariate_names.push_back("v" + std::to_string(i));
  ipd.values = Matrix(p, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) ipd.values(i, j) = normal(rng);
  return ipd;
}

/// AD as a strictly positive convex combination of all columns: interior
/// whenever the cloud spans the space.
AdVector interior_ad(std::mt19937_64& rng, const IpdMatrix& ipd, double lo = 0.2) {
  std::uniform_real_distribution<double> uniform(lo, 1.0);
  Vec mix(ipd.n());
  double total = 0.0;
  for (double& m : mix) {
    m = uniform(rng);
    total += m;
  }
  AdVector ad;
  ad.covariate_names = ipd.covariate_names;
  ad.values.assign(ipd.p(), 0.0);
  for (std::size_t i = 0; i < ipd.p(); ++i)
    for (std::size_t j = 0; j < ipd.n(); ++j)
      ad.values[i] += ipd.values(i, j) * mix[j] / total;
  return ad;
}

AdVector mean_ad(const IpdMatrix& ipd) {
  AdVector ad;
  ad.covariate_names = ipd.covariate_names;
  ad.values.resize(ipd.p());
  for (std::size_t i = 0; i < ipd.p(); ++i) ad.values[i] = sample_mean(ipd.values.row(i));
  return ad;
}

/// Objective used by the finite-difference gradient check, evaluated
/// independently of the solver internals: Q(b)/n on the standardized scale.
double q_of(const Matrix& d, const Vec& beta) {
  double q = 0.0;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) s += d(i, j) * beta[i];
    q += std::exp(s);
  }
  return q / static_cast<double>(d.cols());
}

}  // namespace

TEST_CASE("matching the IPD mean gives the zero solution and uniform weights") {
  std::mt19937_64 rng(31);
  const IpdMatrix ipd = random_ipd(rng, 3, 25);
  const AdVector ad = mean_ad(ipd);

  const MaicFit fit = fit_maic(ipd, ad);
  REQUIRE(fit.converged);
  REQUIRE(fit.iterations == 0);
  for (double b : fit.beta) REQUIRE(b == Catch::Approx(0.0).margin(1e-9));
  for (double w : fit.weights) REQUIRE(w == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(fit.ess == Catch::Approx(25.0).margin(1e-9));
  REQUIRE(fit.ess_fraction == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("interior fits satisfy the moment condition") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 25; ++trial) {
    const IpdMatrix ipd = random_ipd(rng, 2 + trial % 3, 30);
    const AdVector ad = interior_ad(rng, ipd);
    const MaicFit fit = fit_maic(ipd, ad);
    REQUIRE(fit.converged);
    REQUIRE(fit.moment_residual <= 1e-6);

    // verify Eq-style moment matching directly on the raw scale
    for (std::size_t i = 0; i < ipd.p(); ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < ipd.n(); ++j) {
        num += ipd.values(i, j) * fit.weights[j];
        den += fit.weights[j];
      }
      REQUIRE(num / den == Catch::Approx(ad.values[i]).margin(1e-5));
    }

    // weights strictly positive, rescaled to sum n
    double sum = 0.0;
    for (double w : fit.weights) {
      REQUIRE(w > 0.0);
      sum += w;
    }
    REQUIRE(sum == Catch::Approx(static_cast<double>(ipd.n())).margin(1e-10));
    REQUIRE(fit.ess >= 1.0);
    REQUIRE(fit.ess <= static_cast<double>(ipd.n()));
    if (norm_inf(fit.beta) > 1e-6) REQUIRE(fit.ess < static_cast<double>(ipd.n()));
  }
}

TEST_CASE("exterior and boundary targets are refused with the verdict attached") {
  IpdMatrix square;
  square.covariate_names = {"x", "y"};
  square.values = Matrix(2, 4);
  const double pts[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (std::size_t j = 0; j < 4; ++j) {
    square.values(0, j) = pts[j][0];
    square.values(1, j) = pts[j][1];
  }

  const AdVector outside{{1.5, 0.5}, {"x", "y"}, std::nullopt};
  try {
    fit_maic(square, outside);
    FAIL("expected FeasibilityError");
  } catch (const FeasibilityError& e) {
    REQUIRE(e.verdict.status == HullStatus::Infeasible);
    REQUIRE(e.verdict.certificate.has_value());
  }

  const AdVector edge{{1.0, 0.5}, {"x", "y"}, std::nullopt};
  try {
    fit_maic(square, edge);
    FAIL("expected FeasibilityError");
  } catch (const FeasibilityError& e) {
    REQUIRE(e.verdict.status == HullStatus::Boundary);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int instance = 0; instance < 5; ++instance) {
    const std::size_t p = 2 + instance % 3, n = 20;
    const IpdMatrix ipd = random_ipd(rng, p, n);
    const AdVector ad = interior_ad(rng, ipd);
    Matrix d(p, n);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = ipd.values(i, j) - ad.values[i];

    for (int point = 0; point < 4; ++point) {
      Vec beta(p);
      for (double& b : beta) b = 0.5 * normal(rng);
      Vec grad(p, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) s += d(i, j) * beta[i];
        const double u = std::exp(s);
        for (std::size_t i = 0; i < p; ++i) grad[i] += d(i, j) * u;
      }
      for (double& g : grad) g /= static_cast<double>(n);

      for (std::size_t i = 0; i < p; ++i) {
        Vec hi = beta, lo = beta;
        hi[i] += 1e-5;
        lo[i] -= 1e-5;
        const double fd = (q_of(d, hi) - q_of(d, lo)) / 2e-5;
        REQUIRE(fd == Catch::Approx(grad[i]).epsilon(1e-5).margin(1e-10));
      }
    }
  }
}

TEST_CASE("the fit is unique across starting points") {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const IpdMatrix ipd = random_ipd(rng, 3, 40);
    const AdVector ad = interior_ad(rng, ipd);

    const MaicFit base = fit_maic(ipd, ad);
    MaicOptions opts;
    Vec start(3);
    for (double& s : start) s = normal(rng);
    opts.start = start;
    const MaicFit other = fit_maic(ipd, ad, opts);

    for (std::size_t i = 0; i < 3; ++i)
      REQUIRE(other.beta[i] == Catch::Approx(base.beta[i]).margin(1e-6));
  }
}

TEST_CASE("weights are invariant under translating the whole problem") {
  std::mt19937_64 rng(35);
  const IpdMatrix ipd = random_ipd(rng, 2, 30);
  const AdVector ad = interior_ad(rng, ipd);
  const MaicFit fit = fit_maic(ipd, ad);

  IpdMatrix shifted = ipd;
  AdVector shifted_ad = ad;
  const Vec offset{13.5, -2.25};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < ipd.n(); ++j) shifted.values(i, j) += offset[i];
    shifted_ad.values[i] += offset[i];
  }
  const MaicFit fit2 = fit_maic(shifted, shifted_ad);
  for (std::size_t j = 0; j < ipd.n(); ++j)
    REQUIRE(fit2.weights[j] == Catch::Approx(fit.weights[j]).margin(1e-10));
}

TEST_CASE("effective sample size identities") {
  REQUIRE(effective_sample_size(Vec(8, 1.0)) == 8.0);
  REQUIRE(effective_sample_size({1.0, 0.0, 0.0, 0.0}) == 1.0);
  REQUIRE(effective_sample_size({2.0, 1.0, 1.0}) == Catch::Approx(16.0 / 6.0));

  // scale invariance
  const Vec w{0.3, 1.7, 2.2, 0.9};
  Vec scaled = w;
  for (double& v : scaled) v *= 123.456;
  REQUIRE(effective_sample_size(scaled) ==
          Catch::Approx(effective_sample_size(w)).margin(1e-12));

  REQUIRE_THROWS_AS(effective_sample_size(Vec(3, 0.0)), Error);
  REQUIRE_THROWS_AS(effective_sample_size({1.0, -0.5}), Error);
}

TEST_CASE("ESS reaches n only for equal weights") {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> uniform(0.1, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 30);
    Vec w(n);
    for (double& v : w) v = uniform(rng);
    const double ess = effective_sample_size(w);
    REQUIRE(ess >= 1.0);
    REQUIRE(ess <= static_cast<double>(n) * (1.0 + 1e-12));
    double lo = w[0], hi = w[0];
    for (double v : w) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > 1e-6 * hi) REQUIRE(ess < static_cast<double>(n) - 1e-12);
  }
}

TEST_CASE("weighted outcome mean") {
  OutcomeVector r{{1.0, 2.0}, "resp"};
  REQUIRE(weighted_outcome_mean(r, {1.0, 3.0}) == Catch::Approx(7.0 / 4.0));
  REQUIRE(weighted_outcome_mean(r, {1.0, 1.0}) == Catch::Approx(1.5));
  REQUIRE(weighted_outcome_mean(r, {0.0, 5.0}) == Catch::Approx(2.0));
  REQUIRE_THROWS_AS(weighted_outcome_mean(r, {1.0}), Error);
  REQUIRE_THROWS_AS(weighted_outcome_mean(r, {0.0, 0.0}), Error);
}

TEST_CASE("steepest ascent diagnostic: log-weight is monotone in the projection") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const IpdMatrix ipd = random_ipd(rng, 2 + trial % 3, 35);
    const AdVector ad = interior_ad(rng, ipd, 0.05);
    const MaicFit fit = fit_maic(ipd, ad);
    const SteepestAscentDiagnostic diag = steepest_ascent_diagnostic(fit, ipd, ad);
    if (diag.uniform_weights) continue;
    REQUIRE(diag.rank_correlation == 1.0);
    REQUIRE(norm2(diag.direction) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(diag.max_weight_index < ipd.n());
    REQUIRE(fit.weights[diag.max_weight_index] ==
            *std::max_element(fit.weights.begin(), fit.weights.end()));
  }
}

TEST_CASE("steepest ascent diagnostic flags the uniform case") {
  std::mt19937_64 rng(37);
  const IpdMatrix ipd = random_ipd(rng, 2, 20);
  const MaicFit fit = fit_maic(ipd, mean_ad(ipd));
  const SteepestAscentDiagnostic diag = steepest_ascent_diagnostic(fit, ipd, mean_ad(ipd));
  REQUIRE(diag.uniform_weights);
}

TEST_CASE("on a circle around AD the heaviest point has the largest cosine with beta") {
  std::mt19937_64 rng(38);
  const IpdMatrix base = random_ipd(rng, 2, 30);
  const AdVector ad = interior_ad(rng, base);
  const MaicFit fit = fit_maic(base, ad);
  const double nb = norm2(fit.beta);
  REQUIRE(nb > 0.0);

  // weight of a hypothetical patient at angle theta on a circle around AD is
  // exp((y - ad)' beta); the maximizer over a 360-point grid must be the grid
  // angle closest to the direction of beta
  const double beta_angle = std::atan2(fit.beta[1], fit.beta[0]);
  std::size_t argmax = 0;
  double best = -1e300;
  for (std::size_t k = 0; k < 360; ++k) {
    const double theta = 2.0 * M_PI * static_cast<double>(k) / 360.0;
    const double logw = std::cos(theta) * fit.beta[0] + std::sin(theta) * fit.beta[1];
    if (logw > best) {
      best = logw;
      argmax = k;
    }
  }
  const double argmax_angle = 2.0 * M_PI * static_cast<double>(argmax) / 360.0;
  double diff = std::remainder(argmax_angle - beta_angle, 2.0 * M_PI);
  REQUIRE(std::abs(diff) <= 2.0 * M_PI / 360.0);
}

TEST_CASE("non-convergence raises with diagnostics instead of a partial fit") {
  std::mt19937_64 rng(39);
  const IpdMatrix ipd = random_ipd(rng, 3, 40);
  const AdVector ad = interior_ad(rng, ipd, 0.05);
  MaicOptions opts;
  opts.max_iterations = 1;
  opts.grad_tol = 1e-15;
  opts.moment_tol = 1e-15;
  REQUIRE_THROWS_AS(fit_maic(ipd, ad, opts), ConvergenceError);
}
