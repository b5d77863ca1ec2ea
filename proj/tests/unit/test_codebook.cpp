#include <numbers>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "ccs/codebook.hpp"
#include "ccs/rng.hpp"

using namespace ccs;
using Catch::Approx;

TEST_CASE("paper-scale codebook: 100x1024 with unit-power columns") {
  auto cb = build_codebook(10, 100, 0, 321);
  CHECK(cb.num_rows() == 100);
  CHECK(cb.num_columns() == 1024);
  std::set<std::uint32_t> distinct(cb.rows.begin(), cb.rows.end());
  CHECK(distinct.size() == 100);
  for (std::uint32_t j : {0u, 17u, 1023u})
    CHECK(cb.column(j).squaredNorm() == Approx(100.0).epsilon(1e-12));
}

TEST_CASE("taking every DFT row gives orthogonal columns") {
  auto cb = build_codebook(3, 8, 0, 5);
  REQUIRE(cb.num_rows() == 8);
  Eigen::MatrixXcd s(8, 8);
  for (std::uint32_t j = 0; j < 8; ++j) s.col(j) = cb.column(j);
  Eigen::MatrixXcd gram = s.adjoint() * s;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      CHECK(std::abs(gram(a, b) - (a == b ? 8.0 : 0.0)) < 1e-9);
}

TEST_CASE("entries match direct DFT evaluation") {
  auto cb = build_codebook(3, 5, 1, 9);
  double scale = std::sqrt(5.0 / 4.0);
  CHECK(cb.scale == Approx(scale));
  for (std::uint32_t j = 0; j < 8; ++j) {
    auto col = cb.column(j);
    for (int r = 0; r < cb.num_rows(); ++r) {
      auto want = scale * std::exp(std::complex<double>(
                              0, -2.0 * std::numbers::pi * cb.rows[r] * j / 8.0));
      CHECK(std::abs(col(r) - want) < 1e-12);
    }
  }
}

TEST_CASE("codebook construction validates its geometry") {
  CHECK_THROWS_AS(build_codebook(3, 3, 3, 1), std::invalid_argument);   // slot_len <= T
  CHECK_THROWS_AS(build_codebook(3, 20, 8, 1), std::invalid_argument);  // rows > 2^J
  CHECK_THROWS_AS(build_codebook(0, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("zero_pad appends exactly T zeros and keeps the norm") {
  auto cb0 = build_codebook(4, 16, 0, 2);
  CHECK(zero_pad(cb0, 3) == cb0.column(3));

  auto cb = build_codebook(10, 120, 20, 2);
  auto padded = zero_pad(cb, 77);
  REQUIRE(padded.size() == 120);
  for (int t = 100; t < 120; ++t) CHECK(padded(t) == std::complex<double>(0, 0));
  CHECK(padded.norm() == Approx(cb.column(77).norm()));
  CHECK_THROWS_AS(zero_pad(cb, 1024), std::invalid_argument);
}

TEST_CASE("shifted dictionary geometry and column layout") {
  auto cb = build_codebook(10, 120, 20, 4);
  ShiftedDictionary dict(cb);
  CHECK(dict.width() == 21504);  // 2^10 * 21

  auto cb_small = build_codebook(3, 6, 2, 4);
  ShiftedDictionary d(cb_small);
  for (std::uint32_t j = 0; j < 8; ++j)
    for (int tau = 0; tau <= 2; ++tau) {
      auto col = d.column(j, tau);
      REQUIRE(col.size() == 6);
      for (int t = 0; t < tau; ++t) CHECK(col(t) == std::complex<double>(0, 0));
      for (int t = tau + 4; t < 6; ++t) CHECK(col(t) == std::complex<double>(0, 0));
      CHECK((col.segment(tau, 4) - cb_small.column(j)).norm() < 1e-14);
      // flat addressing is bijective
      auto [jj, tt] = d.column_of(d.flat_index(j, tau));
      CHECK(jj == j);
      CHECK(tt == tau);
      // shift preserves the inner product with itself
      CHECK(col.squaredNorm() == Approx(6.0).epsilon(1e-12));
    }
  CHECK_THROWS_AS(d.column(8, 0), std::invalid_argument);
  CHECK_THROWS_AS(d.column(0, 3), std::invalid_argument);
}

TEST_CASE("T=0 dictionary equals the codebook itself") {
  auto cb = build_codebook(4, 10, 0, 6);
  ShiftedDictionary d(cb);
  CHECK(d.width() == 16);
  for (std::uint32_t j = 0; j < 16; ++j) {
    CHECK((d.column(j, 0) - zero_pad(cb, j)).norm() < 1e-14);
  }
}

TEST_CASE("implicit products agree with the dense matrix") {
  for (auto [j, len, t] : {std::tuple{3, 7, 2}, {4, 12, 3}, {5, 32, 0}}) {
    auto cb = build_codebook(j, len, t, 11 + j);
    ShiftedDictionary d(cb);
    Eigen::MatrixXcd dense = d.dense();
    SeededRng rng(j * 100 + t);
    Eigen::VectorXcd x(d.width()), y(len);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.cnormal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.cnormal();
    CHECK((d.apply(x) - dense * x).norm() < 1e-10 * dense.norm());
    CHECK((d.apply_adjoint(y) - dense.adjoint() * y).norm() < 1e-10 * dense.norm());
    // power-iteration Lipschitz estimate vs exact spectral norm
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
    double exact = svd.singularValues()(0);
    CHECK(d.operator_norm_sq() == Approx(exact * exact).epsilon(1e-6));
  }
}

TEST_CASE("superposition matches sample-by-sample placement, exhaustively") {
  // S~ h~ must reproduce the delayed-column superposition for every (j, tau)
  for (int j = 2; j <= 4; ++j)
    for (int t = 0; t <= 3; ++t) {
      auto cb = build_codebook(j, 6 + t, t, 3 * j + t);
      ShiftedDictionary d(cb);
      SeededRng rng(j * 10 + t);
      // three devices with random columns, delays, coefficients
      Eigen::VectorXcd h = Eigen::VectorXcd::Zero(d.width());
      Eigen::VectorXcd direct = Eigen::VectorXcd::Zero(cb.slot_len);
      for (int dev = 0; dev < 3; ++dev) {
        auto col = static_cast<std::uint32_t>(rng.below(cb.num_columns()));
        int tau = static_cast<int>(rng.below(t + 1));
        auto coeff = rng.cnormal();
        h(d.flat_index(col, tau)) += coeff;
        auto s = cb.column(col);
        for (int r = 0; r < cb.num_rows(); ++r) direct(tau + r) += coeff * s(r);
      }
      CHECK((d.apply(h) - direct).norm() < 1e-12);
    }
}

TEST_CASE("build_codebook is deterministic in the seed") {
  auto a = build_codebook(6, 40, 5, 1234);
  auto b = build_codebook(6, 40, 5, 1234);
  auto c = build_codebook(6, 40, 5, 1235);
  CHECK(a.rows == b.rows);
  CHECK(a.rows != c.rows);
}
