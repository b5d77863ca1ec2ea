#include <catch2/catch_amalgamated.hpp>

#include "ccs/rng.hpp"

using namespace ccs;

TEST_CASE("seed_chain folds tags deterministically") {
  CHECK(seed_chain(1, 2, 3) == seed_chain(1, 2, 3));
  CHECK(seed_chain(1, 2, 3) != seed_chain(1, 3, 2));
  CHECK(seed_chain(1, 2) != seed_chain(2, 1));
  CHECK(seed_chain(0) == 0);
}

TEST_CASE("uniform01 stays in [0,1) and below(n) stays in range") {
  SeededRng rng(123);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 10000; ++i) CHECK(rng.below(7) < 7);
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}

TEST_CASE("below(n) covers the whole range") {
  SeededRng rng(5);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 1000; ++i) ++seen[rng.below(5)];
  for (int c : seen) CHECK(c > 100);
}

TEST_CASE("complex gaussian has unit variance and zero mean") {
  SeededRng rng(777);
  const int n = 100000;
  std::complex<double> mean = 0;
  double var = 0;
  for (int i = 0; i < n; ++i) {
    auto z = rng.cnormal();
    mean += z;
    var += std::norm(z);
  }
  mean /= static_cast<double>(n);
  var /= n;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == Catch::Approx(1.0).margin(3.0 / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("identical seeds give identical streams") {
  SeededRng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}
