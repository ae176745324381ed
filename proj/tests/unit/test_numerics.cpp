#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fracdyn/numerics.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace fracdyn;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Correlated columns so coordinate descent needs several sweeps.
Matrix correlated_design(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Matrix b = testing::random_matrix(rows, cols, rng);
  for (Eigen::Index c = 1; c < cols; ++c) b.col(c) = 0.8 * b.col(c - 1) + 0.2 * b.col(c);
  return b;
}

}  // namespace

TEST_CASE("numerical_rank on small matrices") {
  CHECK(numerical_rank(Matrix::Identity(3, 3)).rank == 3);
  CHECK(numerical_rank(Matrix::Zero(3, 3)).rank == 0);
  const Matrix m = mat({{1, 2}, {2, 4}, {3, 6}});
  CHECK(numerical_rank(m).rank == 1);
  CHECK(testing::exact_rank(m) == 1);
}

TEST_CASE("numerical_rank report invariants") {
  std::mt19937_64 rng(3);
  const Matrix m = testing::random_matrix(5, 3, rng) * testing::random_matrix(3, 7, rng);
  const RankReport report = numerical_rank(m);
  CHECK(report.rank == 3);
  CHECK(report.singular_values.size() == 5);
  for (Eigen::Index i = 1; i < report.singular_values.size(); ++i) {
    CHECK(report.singular_values(i) <= report.singular_values(i - 1));
    CHECK(report.singular_values(i) >= 0.0);
  }
  std::size_t above = 0;
  for (double s : report.singular_values) above += s > report.tolerance_used ? 1 : 0;
  CHECK(above == report.rank);
  CHECK(report.tolerance_used ==
        doctest::Approx(default_rank_tolerance(5, 7, report.singular_values(0))));
}

TEST_CASE("numerical_rank honours a tolerance override") {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = 1e-6;
  CHECK(numerical_rank(m).rank == 2);
  CHECK(numerical_rank(m, 1e-3).rank == 1);
}

TEST_CASE("numerical_rank rejects empty and non-finite input") {
  CHECK_THROWS_AS(numerical_rank(Matrix(0, 3)), ArgumentError);
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(numerical_rank(m), ArgumentError);
  m(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(numerical_rank(m), ArgumentError);
}

TEST_CASE("numerical_rank agrees with exact rational rank on integer matrices") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> entry(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = dim(rng);
    const int cols = dim(rng);
    const int inner = dim(rng);
    // Integer product of two factors: ranks vary between 1 and min(rows, cols).
    Matrix l(rows, inner);
    Matrix r(inner, cols);
    for (Eigen::Index i = 0; i < l.size(); ++i) l(i) = entry(rng);
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = entry(rng);
    const Matrix m = l * r;
    CAPTURE(trial);
    CHECK(numerical_rank(m).rank == testing::exact_rank(m));
  }
}

TEST_CASE("least_squares examples") {
  CHECK((least_squares(Matrix::Identity(2, 2), vec({3, 4})) - vec({3, 4})).norm() < 1e-14);
  CHECK(least_squares(mat({{1}, {1}}), vec({1, 3}))(0) == doctest::Approx(2.0));
  const Vector a = least_squares(mat({{1, 1}, {1, 1}}), vec({2, 2}));
  CHECK(a(0) == doctest::Approx(1.0));
  CHECK(a(1) == doctest::Approx(1.0));
}

TEST_CASE("least_squares dimension checks") {
  CHECK_THROWS_AS(least_squares(Matrix::Identity(2, 2), vec({1, 2, 3})), ArgumentError);
  CHECK_THROWS_AS(least_squares(Matrix::Identity(2, 2), Matrix(Matrix::Zero(3, 1))), ArgumentError);
}

TEST_CASE("matrix least_squares solves every column") {
  std::mt19937_64 rng(5);
  const Matrix x = testing::random_matrix(10, 3, rng);
  const Matrix coef = testing::random_matrix(3, 4, rng);
  CHECK((least_squares(x, Matrix(x * coef)) - coef).norm() < 1e-10);
}

TEST_CASE("ridge examples") {
  const Vector r = ridge(Matrix::Identity(2, 2), vec({2, 2}), 1.0);
  CHECK(r(0) == doctest::Approx(1.0));
  CHECK(r(1) == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  CHECK(ridge(testing::random_matrix(4, 3, rng), Vector::Zero(4), 0.5).norm() == 0.0);
  CHECK(ridge(mat({{1}, {1}}), vec({1, 3}), 1e-12)(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(ridge(Matrix::Identity(2, 2), vec({1, 2}), 0.0), ArgumentError);
  CHECK_THROWS_AS(ridge(Matrix::Identity(2, 2), vec({1}), 1.0), ArgumentError);
}

TEST_CASE("ridge matches the normal equations") {
  std::mt19937_64 rng(8);
  const Matrix x = testing::random_matrix(6, 4, rng);
  const Vector z = testing::random_matrix(6, 1, rng).col(0);
  const double eps = 0.3;
  const Matrix normal = x.transpose() * x + eps * Matrix::Identity(4, 4);
  const Vector expected = normal.ldlt().solve(x.transpose() * z);
  CHECK((ridge(x, z, eps) - expected).norm() < 1e-12);
}

TEST_CASE("ridge solution norm is nonincreasing in epsilon") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = testing::random_matrix(5, 4, rng);
    const Vector z = testing::random_matrix(5, 1, rng).col(0);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps = 1e-8; eps < 1e4; eps *= 10.0) {
      const double norm = ridge(x, z, eps).norm();
      CHECK(norm <= previous * (1.0 + 1e-12));
      previous = norm;
    }
  }
}

TEST_CASE("column and null space bases") {
  const Matrix m = mat({{1, 2, 3}, {2, 4, 6}});
  const Matrix q = column_space_basis(m);
  CHECK(q.cols() == 1);
  CHECK((q.transpose() * q - Matrix::Identity(1, 1)).norm() < 1e-14);
  const Matrix nb = null_space_basis(m);
  CHECK(nb.cols() == 2);
  CHECK((m * nb).norm() < 1e-12);
  CHECK((nb.transpose() * nb - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 0.5) == 2.5);
  CHECK(soft_threshold(-3.0, 0.5) == -2.5);
  CHECK(soft_threshold(0.1, 0.5) == 0.0);
  CHECK(soft_threshold(-0.5, 0.5) == 0.0);
}

TEST_CASE("lasso examples") {
  LassoConfig cfg;
  cfg.penalty = 1.0;
  const Vector u = lasso(Matrix::Identity(2, 2), vec({3, 0.1}), cfg);
  CHECK(u(0) == doctest::Approx(2.5));
  CHECK(u(1) == 0.0);

  std::mt19937_64 rng(2);
  CHECK(lasso(testing::random_matrix(4, 2, rng), Vector::Zero(4), cfg).norm() == 0.0);

  cfg.penalty = 0.0;
  const Vector exact = lasso(Matrix::Identity(2, 2), vec({3, 0.1}), cfg);
  CHECK(exact(0) == doctest::Approx(3.0));
  CHECK(exact(1) == doctest::Approx(0.1));
}

TEST_CASE("lasso config validation") {
  LassoConfig cfg;
  cfg.penalty = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.penalty = 1.0;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  CHECK_THROWS_AS(lasso(Matrix::Identity(2, 2), vec({1, 2}), cfg), ArgumentError);
}

TEST_CASE("lasso equals soft-thresholding for orthonormal designs") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix q = Eigen::HouseholderQR<Matrix>(testing::random_matrix(6, 6, rng))
                         .householderQ() * Matrix::Identity(6, 3);
    const Vector r = testing::random_matrix(6, 1, rng).col(0);
    LassoConfig cfg;
    cfg.penalty = 0.8;
    const Vector u = lasso(q, r, cfg);
    const Vector proj = q.transpose() * r;
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(std::abs(u(i) - soft_threshold(proj(i), cfg.penalty / 2.0)) < 1e-8);
    }
  }
}

TEST_CASE("lasso with zero penalty matches least squares") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix b = testing::random_matrix(7, 3, rng);
    const Vector r = testing::random_matrix(7, 1, rng).col(0);
    LassoConfig cfg;
    CHECK((lasso(b, r, cfg) - least_squares(b, r)).norm() < 1e-8);
    // A vanishing penalty runs coordinate descent and must land on the same point.
    cfg.penalty = 1e-12;
    cfg.convergence_tol = 1e-12;
    CHECK((lasso(b, r, cfg) - least_squares(b, r)).norm() < 1e-6);
  }
}

TEST_CASE("lasso objective is nonincreasing across sweeps") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix b = correlated_design(8, 5, rng);
    const Vector r = testing::random_matrix(8, 1, rng).col(0);
    LassoConfig cfg;
    cfg.penalty = 0.2;
    const LassoResult result = lasso_solve(b, r, cfg);
    REQUIRE(result.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
      CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-12);
    }
    CHECK(lasso_optimality_residual(b, r, result.u, cfg.penalty) <= cfg.convergence_tol * 10);
    CHECK(result.objective_trace.back() ==
          doctest::Approx(lasso_objective(b, r, result.u, cfg.penalty)));
  }
}

TEST_CASE("lasso reports non-convergence with its last iterate") {
  std::mt19937_64 rng(10);
  const Matrix b = correlated_design(8, 5, rng);
  const Vector r = testing::random_matrix(8, 1, rng).col(0);
  LassoConfig cfg;
  cfg.penalty = 0.01;
  cfg.max_iterations = 1;
  cfg.convergence_tol = 1e-14;
  try {
    (void)lasso(b, r, cfg);
    FAIL("expected LassoNonConvergence");
  } catch (const LassoNonConvergence& e) {
    CHECK(e.last_iterate().size() == 5);
    CHECK(e.optimality_residual() > cfg.convergence_tol);
    CHECK_FALSE(e.time_index().has_value());
  }
}

TEST_CASE("lasso warm start at the optimum stays put") {
  std::mt19937_64 rng(12);
  const Matrix b = correlated_design(8, 4, rng);
  const Vector r = testing::random_matrix(8, 1, rng).col(0);
  LassoConfig cfg;
  cfg.penalty = 0.5;
  const Vector u = lasso(b, r, cfg);
  const LassoResult again = lasso_solve(b, r, cfg, u);
  CHECK(again.sweeps <= 1);
  CHECK((again.u - u).norm() < 1e-8);
}
