#include <doctest.h>

#include <cmath>
#include <random>

#include "fracdyn/fraccore.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace fracdyn;

namespace {

SystemModel integrator_pair() {
  Matrix b(2, 1);
  b << 1, 0;
  return SystemModel(FractionalOrders{1.0, 1.0}, Matrix::Zero(2, 2), b);
}

// x[k+1] = (A + I) x[k] + B u[k]
Matrix lti_states(const SystemModel& m, const Vector& x0, const Matrix& u, std::size_t k) {
  const auto n = static_cast<Eigen::Index>(m.n());
  const Matrix step = m.a() + Matrix::Identity(n, n);
  Matrix x(static_cast<Eigen::Index>(k), n);
  x.row(0) = x0.transpose();
  for (Eigen::Index t = 1; t < x.rows(); ++t) {
    x.row(t) = (step * x.row(t - 1).transpose() + m.b() * u.row(t - 1).transpose()).transpose();
  }
  return x;
}

}  // namespace

TEST_CASE("psi coefficients") {
  const Vector half = psi_coefficients(0.5, 4);
  CHECK(half(0) == 1.0);
  CHECK(half(1) == -0.5);
  CHECK(half(2) == -0.125);
  CHECK(half(3) == -0.0625);
  const Vector one = psi_coefficients(1.0, 5);
  CHECK(one(0) == 1.0);
  CHECK(one(1) == -1.0);
  for (Eigen::Index j = 2; j < 5; ++j) CHECK(one(j) == 0.0);
  for (double a : {0.1, 0.7, 1.3, 2.0}) CHECK(psi_coefficients(a, 1)(0) == 1.0);
}

TEST_CASE("psi matches the log-gamma formula") {
  for (double alpha : {0.1, 0.5, 0.9, 1.3}) {
    const Vector psi = psi_coefficients(alpha, 51);
    for (std::size_t j = 0; j <= 50; ++j) {
      const double expected = testing::psi_by_lgamma(alpha, j);
      CAPTURE(alpha);
      CAPTURE(j);
      CHECK(std::abs(psi(static_cast<Eigen::Index>(j)) - expected) <= 1e-10 * std::abs(expected));
    }
  }
}

TEST_CASE("psi partial sums shrink toward zero for orders in (0, 1)") {
  for (double alpha : {0.2, 0.5, 0.8}) {
    const Vector psi = psi_coefficients(alpha, 400);
    double sum = 0.0;
    double previous = 2.0;
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
      sum += psi(j);
      CHECK(std::abs(sum) < previous);
      previous = std::abs(sum);
    }
    // The tail decays like j^-alpha, so only a loose bound holds at j = 400.
    CHECK(previous < 0.3);
  }
}

TEST_CASE("psi table layout and validation") {
  const PsiTable table = psi_table(FractionalOrders{0.5, 0.7}, 3);
  CHECK(table.horizon() == 3);
  CHECK(table(0, 0) == 1.0);
  CHECK(table(1, 0) == 1.0);
  CHECK(table(0, 1) == -0.5);
  CHECK(table(1, 1) == doctest::Approx(-0.7));
  CHECK(table(1, 2) == doctest::Approx(-0.7 * (1.0 - 0.7) / 2.0));
  CHECK_THROWS_AS(psi_table(FractionalOrders{0.5}, 0), ArgumentError);
}

TEST_CASE("fractional orders validation") {
  CHECK_THROWS_AS(FractionalOrders({0.5, -0.1}), ArgumentError);
  CHECK_THROWS_AS(FractionalOrders({0.0}), ArgumentError);
  CHECK_THROWS_AS(FractionalOrders({std::nan("")}), ArgumentError);
  Vector v(1);
  v << -0.5;
  CHECK_NOTHROW(FractionalOrders(v, true));
  CHECK(FractionalOrders::uniform(3, 0.4).values().isApproxToConstant(0.4));
}

TEST_CASE("system model validation") {
  const FractionalOrders two{1.0, 1.0};
  CHECK_THROWS_AS(SystemModel(two, Matrix::Zero(2, 3), Matrix::Zero(2, 1)), ArgumentError);
  CHECK_THROWS_AS(SystemModel(two, Matrix::Zero(3, 3), Matrix::Zero(3, 1)), ArgumentError);
  CHECK_THROWS_AS(SystemModel(two, Matrix::Zero(2, 2), Matrix::Zero(3, 1)), ArgumentError);
  CHECK_THROWS_AS(SystemModel(two, Matrix::Zero(2, 2), Matrix::Zero(2, 2)), ArgumentError);
  CHECK_NOTHROW(SystemModel(two, Matrix::Zero(2, 2), Matrix::Zero(2, 0)));
}

TEST_CASE("d_matrix") {
  CHECK(d_matrix(FractionalOrders{1.0, 1.0}, 1) == -Matrix::Identity(2, 2));
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << -0.5, -0.7;
  CHECK((d_matrix(FractionalOrders{0.5, 0.7}, 1) - expected).norm() < 1e-15);
  CHECK(d_matrix(FractionalOrders{0.5}, 2)(0, 0) == -0.125);
}

TEST_CASE("g_kernel examples") {
  const GKernel ones = g_kernel(integrator_pair(), 6);
  CHECK(ones.horizon() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(ones[k] == Matrix::Identity(2, 2));

  CHECK(g_kernel(integrator_pair(), 1).g.size() == 1);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = 0.4 * testing::random_matrix(4, 4, rng);
    const SystemModel m(FractionalOrders::uniform(4, 1.0), a, testing::random_matrix(4, 2, rng));
    const GKernel g = g_kernel(m, 12);
    CHECK(g[0] == Matrix::Identity(4, 4));
    Matrix power = Matrix::Identity(4, 4);
    for (std::size_t k = 1; k < 12; ++k) {
      power = (a + Matrix::Identity(4, 4)) * power;
      CHECK((g[k] - power).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("g_kernel follows the defining recursion") {
  std::mt19937_64 rng(2);
  const SystemModel m = testing::random_real_model(3, 1, rng);
  const GKernel g = g_kernel(m, 8);
  const Matrix a0 = m.a() - d_matrix(m.orders(), 1);
  for (std::size_t k = 1; k < 8; ++k) {
    Matrix expected = a0 * g[k - 1];
    for (std::size_t j = 1; j < k; ++j) expected -= d_matrix(m.orders(), j + 1) * g[k - 1 - j];
    CHECK((g[k] - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("simulate_recursive examples") {
  const SystemModel m = integrator_pair();
  const Trajectory ramp = simulate_recursive(m, Vector::Zero(2), Matrix::Ones(5, 1), 6);
  REQUIRE(ramp.states.rows() == 6);
  for (Eigen::Index k = 0; k < 6; ++k) {
    CHECK(ramp.states(k, 0) == doctest::Approx(static_cast<double>(k)));
    CHECK(ramp.states(k, 1) == 0.0);
  }
  const Trajectory rest = simulate_recursive(m, Vector::Zero(2), Matrix::Zero(5, 1), 6);
  CHECK(rest.states.isZero(0.0));
  CHECK_THROWS_AS(simulate_recursive(m, Vector::Zero(3), Matrix::Zero(5, 1), 6), ArgumentError);
  CHECK_THROWS_AS(simulate_recursive(m, Vector::Zero(2), Matrix::Zero(5, 2), 6), ArgumentError);
  CHECK_THROWS_AS(simulate_recursive(m, Vector::Zero(2), Matrix::Zero(3, 1), 6), ArgumentError);
}

TEST_CASE("integer orders reduce to the LTI system") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // Contractive A + I keeps the states O(1), so the bound is absolute.
    Matrix step = testing::random_matrix(3, 3, rng);
    step *= 0.95 / Eigen::JacobiSVD<Matrix>(step).singularValues()(0);
    const Matrix a = step - Matrix::Identity(3, 3);
    const SystemModel m(FractionalOrders::uniform(3, 1.0), a, testing::random_matrix(3, 1, rng));
    const Vector x0 = testing::random_matrix(3, 1, rng).col(0);
    const Matrix u = testing::random_sparse(29, 1, 0.3, rng);
    const Trajectory t = simulate_recursive(m, x0, u, 30);
    CHECK((t.states - lti_states(m, x0, u, 30)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("process disturbance enters additively") {
  const SystemModel m = integrator_pair();
  Matrix e = Matrix::Zero(3, 2);
  e(0, 1) = 1.0;
  const Trajectory t = simulate_recursive(m, Vector::Zero(2), Matrix::Zero(3, 1), 4, &e);
  // The integrator holds the kick forever.
  CHECK(t.states(1, 1) == 1.0);
  CHECK(t.states(3, 1) == 1.0);
}

TEST_CASE("closed form equals the recursion") {
  const SystemModel m = integrator_pair();
  const GKernel k = g_kernel(m, 6);
  const Trajectory ramp = simulate_closed_form(k, Vector::Zero(2), Matrix::Ones(5, 1), 6);
  CHECK((ramp.states - simulate_recursive(m, Vector::Zero(2), Matrix::Ones(5, 1), 6).states)
            .norm() < 1e-14);
  Vector x0(2);
  x0 << 3, -4;
  CHECK(simulate_closed_form(k, x0, Matrix::Zero(5, 1), 1).states.row(0) == x0.transpose());
  CHECK_THROWS_AS(simulate_closed_form(k, x0, Matrix::Zero(6, 1), 7), ArgumentError);

  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  std::uniform_int_distribution<std::size_t> len(2, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = dim(rng);
    std::uniform_int_distribution<std::size_t> inputs(0, n - 1);
    const SystemModel model = testing::random_real_model(n, inputs(rng), rng, 0.3);
    const std::size_t horizon = len(rng);
    const Vector x = testing::random_matrix(static_cast<Eigen::Index>(n), 1, rng).col(0);
    const Matrix u = testing::random_sparse(static_cast<Eigen::Index>(horizon - 1),
                                            static_cast<Eigen::Index>(model.p()), 0.2, rng);
    const Matrix rec = simulate_recursive(model, x, u, horizon).states;
    const Matrix closed = simulate_closed_form(g_kernel(model, horizon), x, u, horizon).states;
    CHECK((rec - closed).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, rec.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("fractional_difference examples") {
  std::mt19937_64 rng(3);
  const Matrix x = testing::random_matrix(10, 2, rng);
  const Matrix first = fractional_difference(x, FractionalOrders{1.0, 1.0}, 4);
  REQUIRE(first.rows() == 9);
  for (Eigen::Index k = 0; k < 9; ++k) {
    CHECK((first.row(k) - (x.row(k + 1) - x.row(k))).norm() < 1e-15);
  }
  const Matrix identity = fractional_difference(x, FractionalOrders{0.3, 0.6}, 1);
  CHECK(identity == x.bottomRows(9));

  const Matrix c = Matrix::Constant(8, 1, 2.0);
  const Matrix z = fractional_difference(c, FractionalOrders{0.5}, 3);
  CHECK(z(0, 0) == doctest::Approx(0.5 * 2.0));
  for (Eigen::Index k = 1; k < 7; ++k) CHECK(z(k, 0) == doctest::Approx(0.375 * 2.0));
  CHECK_THROWS_AS(fractional_difference(c, FractionalOrders{0.5}, 0), ArgumentError);
  CHECK_THROWS_AS(fractional_difference(c, FractionalOrders{0.5, 0.5}, 3), ArgumentError);
}

TEST_CASE("full-window difference reproduces the dynamics") {
  std::mt19937_64 rng(17);
  const SystemModel m = testing::random_real_model(4, 2, rng, 0.3);
  const Matrix u = testing::random_sparse(19, 2, 0.3, rng);
  const Trajectory t =
      simulate_recursive(m, testing::random_matrix(4, 1, rng).col(0), u, 20);
  const Matrix z = fractional_difference(t, m.orders(), 20);
  const Matrix expected = t.states.topRows(19) * m.a().transpose() + u * m.b().transpose();
  CHECK((z - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(default_truncation(20) == 20);
  CHECK(default_truncation(500) == 64);
}
