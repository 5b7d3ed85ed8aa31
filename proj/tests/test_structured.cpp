#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "bsi/structured.hpp"
#include "oracles.hpp"

using namespace bsi;

TEST_CASE("exp_kernel_precision matches the hand-derived 3x3 case") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<double> s{1.0, 1.0, 1.0};
  const double a = std::exp(-1.0);
  const double g = 1.0 / (1.0 - a * a);
  const SymTridiagonal p = exp_kernel_precision(t, s, 1.0);
  CHECK(p.d(0) == doctest::Approx(g));
  CHECK(p.d(1) == doctest::Approx((1.0 + a * a) * g));
  CHECK(p.d(2) == doctest::Approx(g));
  CHECK(p.c(0) == doctest::Approx(-a * g));
  CHECK(p.c(1) == doctest::Approx(-a * g));
}

TEST_CASE("exp_kernel_precision scalar case") {
  const SymTridiagonal p = exp_kernel_precision(std::vector<double>{3.0},
                                                std::vector<double>{2.0}, 5.0);
  CHECK(p.d.size() == 1);
  CHECK(p.c.size() == 0);
  CHECK(p.d(0) == doctest::Approx(0.25));
}

TEST_CASE("exp_kernel_precision inverts the dense covariance (oracle)") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 2 + static_cast<int>(rng.integer(39));
    const auto t = oracle::random_coords(rng, m, 50.0);
    std::vector<double> s(static_cast<std::size_t>(m));
    for (auto& v : s) v = rng.uniform(0.2, 3.0);
    const double l = rng.uniform(0.5, 80.0);
    const Eigen::MatrixXd cov = oracle::dense_exp_cov(t, s, l);
    const Eigen::MatrixXd prod = exp_kernel_precision(t, s, l).dense() * cov;
    const double err =
        (prod - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("exp_kernel_precision rejects bad input") {
  CHECK_THROWS_AS(
      exp_kernel_precision(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      exp_kernel_precision(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0}, 1e-12),
      std::invalid_argument);
  CHECK_THROWS_AS(
      exp_kernel_precision(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, -1.0}, 1.0),
      std::invalid_argument);
}

TEST_CASE("exp_kernel_cov_logdet matches dense log-determinant") {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 2 + static_cast<int>(rng.integer(30));
    const auto t = oracle::random_coords(rng, m, 40.0);
    std::vector<double> s(static_cast<std::size_t>(m));
    for (auto& v : s) v = rng.uniform(0.3, 2.0);
    const double l = rng.uniform(1.0, 60.0);
    CHECK(exp_kernel_cov_logdet(t, s, l) ==
          doctest::Approx(oracle::dense_logdet(oracle::dense_exp_cov(t, s, l)))
              .epsilon(1e-9));
  }
}

TEST_CASE("kron_logdet") {
  CHECK(kron_logdet(std::log(2.0), 2, std::log(3.0), 3) == doctest::Approx(std::log(72.0)));
  CHECK(kron_logdet(0.0, 4, 0.0, 5) == 0.0);
  Rng rng(19);
  const Eigen::MatrixXd a = oracle::random_spd(rng, 3);
  const Eigen::MatrixXd b = oracle::random_spd(rng, 4);
  const double expected = oracle::dense_logdet(oracle::dense_kron(a, b));
  CHECK(kron_logdet(oracle::dense_logdet(a), 3, oracle::dense_logdet(b), 4) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("kron_matvec equals the dense product") {
  Rng rng(23);
  SUBCASE("identity factors") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd v(9);
    for (Eigen::Index i = 0; i < 9; ++i) v(i) = rng.normal();
    CHECK(kron_matvec(eye, eye, v).isApprox(v));
  }
  SUBCASE("random factors") {
    for (int rep = 0; rep < 20; ++rep) {
      const int na = 2 + static_cast<int>(rng.integer(4));
      const int nb = 2 + static_cast<int>(rng.integer(4));
      Eigen::MatrixXd a(na, na), b(nb, nb);
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
      Eigen::VectorXd v(na * nb);
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
      const Eigen::VectorXd direct = oracle::dense_kron(a, b) * v;
      CHECK((kron_matvec(a, b, v) - direct).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("rank-1 reshape identity") {
    // v = vec(u w^T) (time-major, u spatial) -> (A (x) B) v = vec((B u)(A w)^T)
    const int na = 3, nb = 2;
    Eigen::MatrixXd a(na, na), b(nb, nb);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
    Eigen::VectorXd u(nb), w(na);
    for (Eigen::Index i = 0; i < nb; ++i) u(i) = rng.normal();
    for (Eigen::Index i = 0; i < na; ++i) w(i) = rng.normal();
    const Eigen::MatrixXd outer = u * w.transpose();
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(outer.data(), outer.size());
    const Eigen::MatrixXd expected_mat = (b * u) * (a * w).transpose();
    const Eigen::VectorXd expected =
        Eigen::Map<const Eigen::VectorXd>(expected_mat.data(), expected_mat.size());
    CHECK(kron_matvec(a, b, v).isApprox(expected, 1e-12));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(kron_matvec(Eigen::MatrixXd::Identity(2, 2),
                                Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(5)),
                    std::invalid_argument);
  }
}

TEST_CASE("thomas_solve") {
  SUBCASE("identity") {
    SymTridiagonal t{Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(3)};
    Eigen::VectorXd rhs(4);
    rhs << 1, -2, 3, -4;
    CHECK(thomas_solve(t, rhs).isApprox(rhs));
  }
  SUBCASE("inverse property against the exponential covariance") {
    // Solving the precision system with a unit rhs returns the
    // corresponding covariance column.
    const std::vector<double> tc{0.0, 1.0, 2.0};
    const std::vector<double> s{1.0, 1.0, 1.0};
    const SymTridiagonal p = exp_kernel_precision(tc, s, 1.0);
    const Eigen::MatrixXd cov = oracle::dense_exp_cov(tc, s, 1.0);
    const Eigen::VectorXd x = thomas_solve(p, Eigen::VectorXd::Unit(3, 1));
    CHECK(x.isApprox(cov.col(1), 1e-10));
  }
  SUBCASE("random SPD tridiagonal vs dense solve") {
    Rng rng(29);
    for (int rep = 0; rep < 30; ++rep) {
      const int m = 2 + static_cast<int>(rng.integer(99));
      SymTridiagonal t;
      t.d.resize(m);
      t.c.resize(m - 1);
      for (Eigen::Index i = 0; i < m - 1; ++i) t.c(i) = rng.uniform(-1.0, 1.0);
      for (Eigen::Index i = 0; i < m; ++i) t.d(i) = 2.5 + rng.uniform(0.0, 1.0);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index i = 0; i < m; ++i) rhs(i) = rng.normal();
      const Eigen::VectorXd x = thomas_solve(t, rhs);
      const Eigen::VectorXd ref = t.dense().ldlt().solve(rhs);
      CHECK((x - ref).norm() / ref.norm() <= 1e-9);
    }
  }
  SUBCASE("indefinite matrix raises") {
    SymTridiagonal t{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(1)};
    CHECK_THROWS_AS(thomas_solve(t, Eigen::VectorXd::Ones(2)), NotPositiveDefiniteError);
  }
}

TEST_CASE("block_tridiag_cholesky") {
  SUBCASE("identity blocks") {
    BlockTridiagonal m;
    m.D = {Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)};
    m.C = {Eigen::MatrixXd::Zero(3, 3)};
    const BlockCholeskyFactor f = block_tridiag_cholesky(m);
    CHECK(f.L[0].isIdentity(1e-14));
    CHECK(f.L[1].isIdentity(1e-14));
    CHECK(f.E[0].isZero(0.0));
    CHECK(logdet_from_block_cholesky(f) == doctest::Approx(0.0));
  }
  SUBCASE("scalar blocks match the hand Cholesky of [[2,-1],[-1,2]]") {
    BlockTridiagonal m;
    m.D = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
    m.C = {Eigen::MatrixXd::Constant(1, 1, -1.0)};
    const BlockCholeskyFactor f = block_tridiag_cholesky(m);
    CHECK(f.L[0](0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(f.E[0](0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(f.L[1](0, 0) == doctest::Approx(std::sqrt(1.5)));
    CHECK(logdet_from_block_cholesky(f) == doctest::Approx(std::log(3.0)));
  }
  SUBCASE("random SPD block tridiagonal: factorization, solve, logdet") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
      const int nb = 2 + static_cast<int>(rng.integer(7));
      const int n = 1 + static_cast<int>(rng.integer(5));
      BlockTridiagonal m;
      for (int k = 0; k < nb; ++k) {
        m.D.push_back(oracle::random_spd(rng, n) +
                      2.0 * static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n));
      }
      for (int k = 0; k + 1 < nb; ++k) {
        Eigen::MatrixXd c(n, n);
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = 0.3 * rng.normal();
        m.C.push_back(c);
      }
      const Eigen::MatrixXd dense = m.dense();
      const BlockCholeskyFactor f = block_tridiag_cholesky(m);

      // Expanding L L^T reproduces the input.
      Eigen::MatrixXd lfull = Eigen::MatrixXd::Zero(nb * n, nb * n);
      for (int k = 0; k < nb; ++k) {
        lfull.block(k * n, k * n, n, n) = f.L[static_cast<std::size_t>(k)];
        if (k + 1 < nb) {
          lfull.block((k + 1) * n, k * n, n, n) = f.E[static_cast<std::size_t>(k)];
        }
      }
      const Eigen::MatrixXd rebuilt = lfull * lfull.transpose();
      CHECK((rebuilt - dense).norm() / dense.norm() <= 1e-9);

      CHECK(logdet_from_block_cholesky(f) ==
            doctest::Approx(oracle::dense_logdet(dense)).epsilon(1e-9));

      Eigen::VectorXd rhs(nb * n);
      for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs(i) = rng.normal();
      const Eigen::VectorXd x = block_tridiag_solve(f, rhs);
      const Eigen::VectorXd ref = dense.ldlt().solve(rhs);
      CHECK((x - ref).norm() / ref.norm() <= 1e-9);
    }
  }
  SUBCASE("indefinite block names its index") {
    BlockTridiagonal m;
    m.D = {Eigen::MatrixXd::Identity(2, 2), -Eigen::MatrixXd::Identity(2, 2)};
    m.C = {Eigen::MatrixXd::Zero(2, 2)};
    CHECK_THROWS_WITH_AS(block_tridiag_cholesky(m),
                         "indefinite diagonal block at index 1", NotPositiveDefiniteError);
  }
}

TEST_CASE("block solve equals thomas solve for scalar blocks") {
  Rng rng(37);
  const int m = 40;
  SymTridiagonal t;
  t.d.resize(m);
  t.c.resize(m - 1);
  for (Eigen::Index i = 0; i < m - 1; ++i) t.c(i) = rng.uniform(-0.9, 0.9);
  for (Eigen::Index i = 0; i < m; ++i) t.d(i) = 2.2 + rng.uniform(0.0, 1.0);
  const BlockTridiagonal blocks = scale_blocks(t, Eigen::MatrixXd::Ones(1, 1));
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) rhs(i) = rng.normal();
  const Eigen::VectorXd a = thomas_solve(t, rhs);
  const Eigen::VectorXd b = block_tridiag_solve(block_tridiag_cholesky(blocks), rhs);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("scale_blocks expands to the dense Kronecker product") {
  Rng rng(41);
  SUBCASE("scalar B reproduces the tridiagonal") {
    SymTridiagonal t;
    t.d = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
    t.c = Eigen::VectorXd::Constant(2, -0.5);
    const BlockTridiagonal m = scale_blocks(t, Eigen::MatrixXd::Ones(1, 1));
    CHECK(m.dense().isApprox(t.dense()));
  }
  SUBCASE("identity T gives block diagonal") {
    SymTridiagonal t{Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(2)};
    const Eigen::MatrixXd b = oracle::random_spd(rng, 2);
    const BlockTridiagonal m = scale_blocks(t, b);
    CHECK(m.C[0].isZero(0.0));
    CHECK(m.D[1].isApprox(b));
  }
  SUBCASE("random T and B") {
    for (int rep = 0; rep < 10; ++rep) {
      const int mt = 2 + static_cast<int>(rng.integer(4));
      const int n = 1 + static_cast<int>(rng.integer(5));
      SymTridiagonal t;
      t.d.resize(mt);
      t.c.resize(mt - 1);
      for (Eigen::Index i = 0; i < mt; ++i) t.d(i) = rng.uniform(0.5, 2.0);
      for (Eigen::Index i = 0; i < mt - 1; ++i) t.c(i) = rng.uniform(-0.5, 0.5);
      const Eigen::MatrixXd b = oracle::random_spd(rng, n);
      CHECK(scale_blocks(t, b).dense().isApprox(oracle::dense_kron(t.dense(), b), 1e-12));
    }
  }
}

TEST_CASE("thomas_solve scales linearly (smoke)") {
  // Doubling m should roughly double the runtime; anything quadratic or
  // worse would show a 4x+ jump. Timing noise makes tight bounds flaky,
  // so this only guards against superlinear blowup.
  const auto bench = [](int m) {
    Rng rng(43);
    SymTridiagonal t;
    t.d.resize(m);
    t.c.resize(m - 1);
    for (Eigen::Index i = 0; i < m - 1; ++i) t.c(i) = rng.uniform(-0.9, 0.9);
    for (Eigen::Index i = 0; i < m; ++i) t.d(i) = 2.2 + rng.uniform(0.0, 1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
    thomas_solve(t, rhs);  // warm up
    double best = 1e300;
    for (int rep = 0; rep < 30; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      thomas_solve(t, rhs);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t1 = bench(10000);
  const double t2 = bench(20000);
  CHECK(t2 / t1 <= 3.0);
  CHECK(t2 < 1e-2);  // absolute sanity: O(m) work stays in microseconds
}
