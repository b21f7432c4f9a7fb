#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "selfnorm/bounds.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/model.hpp"
#include "selfnorm/variance_analysis.hpp"
#include "test_util.hpp"

using namespace selfnorm;
using testutil::Draws;

TEST_SUITE("bounds") {

TEST_CASE("likelihood gap bound") {
  CHECK(lgap_upper_bound(2.0, 1.0, 2.0, 0.7) == 0.0);
  CHECK(lgap_upper_bound(5.0, 1.0, 2.0, 0.7) == 0.0);
  CHECK(lgap_upper_bound(0.0, 1.0, 2.0, 0.7) == 0.7);
  CHECK(lgap_upper_bound(1.0, 1.0, 2.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 40; ++i) {
    const double v = lgap_upper_bound(0.1 * i, 1.3, 2.0, 0.9);
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("strong likelihood gap bound") {
  CHECK(strong_lgap_bound(2.0, 2.0, 1.0, 2.0, 1.0) == 0.0);
  CHECK(strong_lgap_bound(2.0, 0.0, 1.0, 3.0, 1.0) == doctest::Approx(12.0));
  CHECK(strong_lgap_bound(2.0, 1.0, 1.0, 2.0, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(2.0 * std::exp(-1.0) == doctest::Approx(0.73576).epsilon(1e-5));
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 30; ++i) {
    const double v = strong_lgap_bound(2.5, 0.1 * i, 1.0, 1.5, 0.7);
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("shrinkage deviation") {
  const FeatureMap cc = FeatureMap::class_conjunction(3, 4, 10.0);
  Draws draws(3);
  CHECK(shrinkage_deviation(cc.zero_params(), cc, LabelSpace(4), draws.inputs(5, 3)) < 1e-15);

  const FeatureMap fm = testutil::example_one_map();
  const ParamVector eta = testutil::example_one_eta();
  Eigen::MatrixXd xs(2, 1);
  xs << std::log(2.0), -std::log(2.0);
  CHECK(shrinkage_deviation(eta, fm, LabelSpace(2), xs) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(eta.norm() * fm.radius() >= std::log(2.0));
}

TEST_CASE("shrinkage holds for 100 random parameters on the delta sphere") {
  Draws draws(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = draws.between(1, 8);
    const int k = draws.between(1, 6);
    const Eigen::MatrixXd x = draws.inputs(draws.between(1, 40), d);
    const double R = testutil::max_row_norm(x);
    const double delta = draws.uniform(0.001, 3.0);
    ParamVector eta = draws.params(k, d);
    eta *= delta / (R * eta.norm());
    const FeatureMap cc = FeatureMap::class_conjunction(d, k, R);
    CHECK(shrinkage_deviation(eta, cc, LabelSpace(k), x) <= delta + 1e-10);
  }
}

TEST_CASE("closeness") {
  Draws draws(7);
  const FeatureMap cc = FeatureMap::class_conjunction(3, 2, 10.0);
  const Dataset ds = draws.dataset(10, 3, 2);
  Eigen::MatrixXd superset(13, 3);
  superset << draws.inputs(3, 3), ds.dense_inputs();
  CHECK(closeness(ds, superset, cc) == 0.0);

  const Dataset one = Dataset::from_dense(Eigen::RowVector3d(1.0, 0.3, 0.0), Eigen::VectorXi::Zero(1), 2);
  CHECK(closeness(one, Eigen::RowVector3d(1.0, 0.0, 0.0), cc) == doctest::Approx(0.3).epsilon(1e-15));

  Eigen::MatrixXd grid(25, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid.row(5 * i + j) << 1.0, -1.0 + 0.5 * i, -1.0 + 0.5 * j;
  double brute = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < grid.rows(); ++s) {
      double worst = 0.0;
      for (int y = 0; y < 2; ++y) {
        // Class conjunction: T(x, y) - T(s, y) is x - s placed in block y.
        worst = std::max(worst, (ds.input(i) - grid.row(s).transpose()).norm());
      }
      nearest = std::min(nearest, worst);
    }
    brute += nearest;
  }
  CHECK(closeness(ds, grid, cc) == doctest::Approx(brute / ds.size()).epsilon(1e-14));
}

TEST_CASE("closeness bound on a perturbed level set") {
  CHECK(closeness_normalizability_bound(0.0, 3.0).value == 0.0);
  CHECK(closeness_normalizability_bound(0.1, 2.0).value == doctest::Approx(0.2));

  // S: points of {A = 0} for a two-class model with a constant feature.
  const ParamVector eta(2, 3, (Eigen::VectorXd(6) << 0.3, -1.0, 1.0, -0.2, -1.0, -2.0).finished());
  const FeatureMap plane = FeatureMap::shared_repeated(
      2, 3, 2, [](const Eigen::VectorXd& x) { return Eigen::Vector3d(1.0, x(0), x(1)); }, 100.0);
  const ContourSet set = levelset_input_space(eta, plane, LabelSpace(2), Box2{}, 128, 0.0, 8);
  REQUIRE(set.num_vertices() > 50);
  const FeatureMap cc = FeatureMap::class_conjunction(3, 2, 100.0);

  Draws draws(19);
  const double D = 0.05;
  std::vector<std::pair<SparseEntries, int>> records;
  double on_set = 0.0;
  Eigen::MatrixXd candidates(static_cast<Eigen::Index>(set.num_vertices()), 3);
  Eigen::Index row = 0;
  for (const auto& line : set.polylines)
    for (const auto& v : line.vertices) {
      candidates.row(row++) << 1.0, v(0), v(1);
      on_set = std::max(on_set, std::abs(log_partition(Eigen::Vector3d(1.0, v(0), v(1)), eta, cc, LabelSpace(2))));
      const double angle = draws.uniform(0.0, 2.0 * M_PI);
      records.push_back({{{0, 1.0}, {1, v(0) + D * std::cos(angle)}, {2, v(1) + D * std::sin(angle)}}, 0});
    }
  const Dataset ds = Dataset::from_records(3, 2, records);
  CHECK(closeness(ds, candidates, cc) <= D + 1e-12);
  const double sqrt_v = std::sqrt(normalizer_stats(ds, eta, cc, LabelSpace(2)).V);
  CHECK(sqrt_v <= closeness_normalizability_bound(D, eta.norm()).value + on_set);
}

TEST_CASE("covariance bound formula") {
  CHECK(covariance_eigen_bound(3, 2, 1.0, 2.0) == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(3.0 * std::exp(-2.0) == doctest::Approx(0.40601).epsilon(1e-5));
  CHECK(covariance_eigen_bound(3, 2, 1.0, 2.0, CovarianceBoundKind::PerEntry) ==
        doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(covariance_eigen_bound(5, 4, 0.2, 1e4) < 1e-300);
  CHECK_THROWS_AS(covariance_eigen_bound(3, 1, 1.0, 2.0), ArgumentError);
}

TEST_CASE("feature covariance closed forms") {
  const FeatureMap one = FeatureMap::class_conjunction(1, 2, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  const Eigen::MatrixXd cov = feature_covariance(x, one.zero_params(), one, LabelSpace(2));
  CHECK(cov(0, 0) == doctest::Approx(0.25));
  CHECK(cov(0, 1) == doctest::Approx(-0.25));
  CHECK(feature_covariance_max_eig(x, one.zero_params(), one, LabelSpace(2)) == doctest::Approx(0.5).epsilon(1e-12));

  ParamVector sharp(2, 1, Eigen::Vector2d(800.0, -800.0));
  CHECK(feature_covariance_max_eig(x, sharp, one, LabelSpace(2)) < 1e-300);
}

TEST_CASE("class-conjunction covariance factors through the conditional") {
  // Cov = (diag p - p p^T) kron x x^T, whose top eigenvalue is ||x||^2 lambda_max(diag p - p p^T).
  Draws draws(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = draws.between(1, 6);
    const int k = draws.between(2, 5);
    const FeatureMap cc = FeatureMap::class_conjunction(d, k, 100.0);
    const ParamVector eta = draws.params(k, d, 2.0);
    const Eigen::VectorXd x = draws.inputs(1, d).row(0).transpose();
    const Eigen::VectorXd p = log_probs(x, eta, cc, LabelSpace(k)).array().exp();
    const Eigen::MatrixXd m = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
    const double expected = x.squaredNorm() * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
    CHECK(feature_covariance_max_eig(x, eta, cc, LabelSpace(k), EigenMethod::Dense) ==
          doctest::Approx(expected).epsilon(1e-10));
    CHECK(feature_covariance_max_eig(x, eta, cc, LabelSpace(k), EigenMethod::PowerIteration) ==
          doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("large feature spaces use power iteration") {
  const FeatureMap big = FeatureMap::class_conjunction(60, 3, 100.0);
  Draws draws(37);
  const ParamVector eta = draws.params(3, 60, 0.2);
  const Eigen::VectorXd x = draws.inputs(1, 60).row(0).transpose();
  CHECK_THROWS_AS(feature_covariance_max_eig(x, eta, big, LabelSpace(3), EigenMethod::Dense), CapabilityError);
  const Eigen::VectorXd p = log_probs(x, eta, big, LabelSpace(3)).array().exp();
  const Eigen::MatrixXd m = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
  const double expected = x.squaredNorm() * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
  CHECK(feature_covariance_max_eig(x, eta, big, LabelSpace(3)) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("covariance of the scaled hard construction") {
  const int d = 4;
  const double alpha = 10.0;
  const ParamVector eta = alpha * hard_construction(d, 2);
  const FeatureMap cc = FeatureMap::class_conjunction(d, 2, 2.0);
  // Score gap >= alpha * hard_margin(d) = c ||alpha eta^0|| on every point but x = 0.
  const double c = hard_margin(d) / hard_construction(d, 2).norm();
  const HypercubeDist cube(d);
  // Each covariance row at x has K * |x| nonzero entries.
  CHECK(covariance_row_support(cube.point(cube.size() - 1), cc) == 2 * d);
  const double bound = covariance_eigen_bound(2 * d, 2, c, eta.norm());
  double worst = 0.0;
  for (std::int64_t i = 1; i < cube.size(); ++i) {
    const Eigen::VectorXd x = cube.point(i);
    const double eig = feature_covariance_max_eig(x, eta, cc, LabelSpace(2));
    worst = std::max(worst, eig);
    const Eigen::MatrixXd cov = feature_covariance(x, eta, cc, LabelSpace(2));
    CHECK((cov.array() != 0.0).rowwise().count().maxCoeff() <= covariance_row_support(x, cc));
  }
  CHECK(worst <= bound);
}

TEST_CASE("covariance row support") {
  const FeatureMap cc = FeatureMap::class_conjunction(4, 3, 10.0);
  CHECK(covariance_row_support(Eigen::Vector4d(1, 0, 2, 0), cc) == 6);
  CHECK(covariance_row_support(Eigen::Vector4d::Zero(), cc) == 0);
  const FeatureMap one = testutil::example_one_map();
  CHECK(covariance_row_support(Eigen::VectorXd::Constant(1, std::log(2.0)), one) == 2);
}

}
