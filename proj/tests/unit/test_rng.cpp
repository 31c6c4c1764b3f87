// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "ccreg/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using ccreg::Rng;
using ccreg::philox4x32_10;

TEST_SUITE("rng") {

// Known-answer vectors published with the Random123 library.
TEST_CASE("philox block function matches the reference vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("split streams depend only on the parent key and the id") {
  Rng parent(7);
  const Rng child_before = parent.split(3);
  for (int i = 0; i < 17; ++i) parent.next_u32();
  Rng a = child_before;
  Rng b = parent.split(3);
  Rng other = parent.split(4);
  int same_as_other = 0;
  for (int i = 0; i < 100; ++i) {
    const auto v = a.next_u64();
    CHECK(v == b.next_u64());
    same_as_other += v == other.next_u64();
  }
  CHECK(same_as_other == 0);
}

TEST_CASE("uniform draws stay in range with the expected mean") {
  Rng r(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Standard error of the mean is sqrt(1/12/n) ~ 6.5e-4.
  CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("uniform_index is unbiased over a small range") {
  Rng r(9);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  const double p = 1.0 / 7.0;
  const double sd = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) < 5 * sd);
}

TEST_CASE("normal draws have unit variance") {
  Rng r(5);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

}  // TEST_SUITE
