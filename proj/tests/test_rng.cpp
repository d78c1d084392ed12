#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ehr/rng.hpp"

using namespace ehr;

TEST_SUITE("rng") {

TEST_CASE("same seed gives the same stream") {
  Rng a(77), b(77);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next() == b.next();
  CHECK(same < 5);
}

TEST_CASE("below stays in range and covers it") {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    hits[v]++;
  }
  for (const int h : hits) CHECK(h > 700);
}

TEST_CASE("range is inclusive on both ends") {
  Rng rng(4);
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    const int64_t v = rng.range(-2, 2);
    REQUIRE(v >= -2);
    REQUIRE(v <= 2);
    lo |= v == -2;
    hi |= v == 2;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("real01 in [0,1)") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.real01();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  Rng a(9), b(9);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("derive_seed separates stages") {
  CHECK(derive_seed(42, 1) != derive_seed(42, 2));
  CHECK(derive_seed(42, 1) == derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

}  // TEST_SUITE
