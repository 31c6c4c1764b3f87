// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "ccreg/coord_space.hpp"
#include "ccreg/errors.hpp"
#include "test_support.hpp"

#include <cmath>
#include <map>

using namespace ccreg;
using ccreg::test::make_grid;

TEST_SUITE("coord_space") {

TEST_CASE("cubic extent, isotropic: one scale and the full cube covered") {
  const Grid g = make_grid(101, 101, 101);  // 100 mm span on every axis
  const NormTransform t = make_norm_transform(g, true);
  CHECK(t.scale.x() == t.scale.y());
  CHECK(t.scale.y() == t.scale.z());
  CHECK((t.to_norm(g.origin) - Vec3::Constant(-1.0)).norm() < 1e-12);
  CHECK((t.to_norm(g.origin + g.extent()) - Vec3::Constant(1.0)).norm() < 1e-12);
}

TEST_CASE("400x400x35 mm isotropic: z spans +-35/400") {
  const Grid g = make_grid(2, 2, 2, Vec3(400, 400, 35));
  const NormTransform t = make_norm_transform(g, true);
  const Vec3 lo = t.to_norm(g.origin);
  const Vec3 hi = t.to_norm(g.origin + g.extent());
  CHECK(lo.z() == doctest::Approx(-35.0 / 400.0).epsilon(1e-12));
  CHECK(hi.z() == doctest::Approx(35.0 / 400.0).epsilon(1e-12));
  CHECK(lo.x() == doctest::Approx(-1.0));
  CHECK(t.padded_extent.z() == doctest::Approx(400.0));
}

TEST_CASE("anisotropic mode maps each axis onto [-1, 1]") {
  const Grid g = make_grid(2, 2, 2, Vec3(400, 400, 35), Vec3(10, -20, 5));
  const NormTransform t = make_norm_transform(g, false);
  CHECK((t.to_norm(g.origin) - Vec3::Constant(-1.0)).norm() < 1e-12);
  CHECK((t.to_norm(g.origin + g.extent()) - Vec3::Constant(1.0)).norm() < 1e-12);
}

TEST_CASE("world -> norm -> world round trip on 1000 random points") {
  Rng rng(8);
  const Grid g = make_grid(120, 90, 33, Vec3(0.97, 0.97, 2.5), Vec3(-60, 14, -7));
  for (bool iso : {false, true}) {
    const NormTransform t = make_norm_transform(g, iso);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec3 p = test::random_vec(rng, -200, 200);
      worst = std::max(worst, (t.to_world(t.to_norm(p)) - p).norm());
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("single-voxel axis is rejected") {
  CHECK_THROWS_AS(make_norm_transform(make_grid(1, 4, 4), false), ContractError);
}

namespace {
Volume3D mask_from(const Grid& g, const std::function<bool(std::int64_t, std::int64_t, std::int64_t)>& f) {
  Volume3D m(g, DType::UInt8);
  for (std::int64_t k = 0; k < g.dims[2]; ++k)
    for (std::int64_t j = 0; j < g.dims[1]; ++j)
      for (std::int64_t i = 0; i < g.dims[0]; ++i) m.at(i, j, k) = f(i, j, k) ? 1.0f : 0.0f;
  return m;
}
}  // namespace

TEST_CASE("single-voxel mask yields copies of that voxel center") {
  const Grid g = make_grid(6, 5, 4, Vec3(1, 2, 3), Vec3(5, 5, 5));
  const Volume3D m = mask_from(g, [](auto i, auto j, auto k) { return i == 2 && j == 3 && k == 1; });
  const NormTransform t = make_norm_transform(g, false);
  Rng rng(1);
  const CoordBatch b = sample_foreground(m, t, 5, rng);
  REQUIRE(b.size() == 5);
  const Vec3 expect = t.to_norm(g.index_to_world(Vec3(2, 3, 1)));
  for (Eigen::Index s = 0; s < 5; ++s) CHECK((b.coords.col(s) - expect).norm() == 0.0);
}

TEST_CASE("empty mask is a domain error") {
  const Grid g = make_grid(4, 4, 4);
  Rng rng(1);
  CHECK_THROWS_AS(sample_foreground(Volume3D(g, DType::UInt8), make_norm_transform(g, false), 3, rng), DomainError);
}

TEST_CASE("half-foreground mask: per-voxel frequencies within 4 sd of binomial") {
  const Grid g = make_grid(8, 8, 8);
  const Volume3D m = mask_from(g, [](auto i, auto, auto) { return i < 4; });
  const NormTransform t = make_norm_transform(g, false);
  Rng rng(77);
  const Eigen::Index n = 100000;
  const CoordBatch b = sample_foreground(m, t, n, rng);
  std::map<std::size_t, int> counts;
  for (Eigen::Index s = 0; s < n; ++s) {
    const Vec3 c = b.coords.col(s);
    REQUIRE(c.cwiseAbs().maxCoeff() <= 1.0);
    const Vec3 idx = g.world_to_index(t.to_world(c));
    const Vec3 r = idx.array().round();
    REQUIRE((idx - r).norm() < 1e-9);
    const std::size_t lin = g.linear(static_cast<std::int64_t>(r.x()), static_cast<std::int64_t>(r.y()),
                                     static_cast<std::int64_t>(r.z()));
    REQUIRE(m[lin] == 1.0f);
    ++counts[lin];
  }
  CHECK(counts.size() == 256);
  const double p = 1.0 / 256.0;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  for (const auto& [lin, c] : counts) CHECK(std::abs(c - static_cast<double>(n) * p) < 4.0 * sd);
}

TEST_CASE("same seed, same batch; different seed, different batch") {
  const Grid g = make_grid(10, 10, 10);
  const Volume3D m = mask_from(g, [](auto i, auto j, auto k) { return (i + j + k) % 3 == 0; });
  const NormTransform t = make_norm_transform(g, false);
  Rng a(5), b(5), c(6);
  const CoordBatch x = sample_foreground(m, t, 1000, a);
  const CoordBatch y = sample_foreground(m, t, 1000, b);
  const CoordBatch z = sample_foreground(m, t, 1000, c);
  CHECK(x.coords == y.coords);
  CHECK(x.coords != z.coords);
  CHECK(x.rng_key == y.rng_key);
}

namespace {
Volume3D ramp_volume(const Grid& g, Rng& rng) { return test::random_volume(g, rng); }
}  // namespace

TEST_CASE("trilinear: voxel center returns the voxel value and the central-difference gradient") {
  Rng rng(12);
  const Grid g = make_grid(7, 6, 5, Vec3(0.8, 1.2, 2.0), Vec3(3, -4, 1));
  const Volume3D v = ramp_volume(g, rng);
  const NormTransform t = make_norm_transform(g, false);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t i = 1 + static_cast<std::int64_t>(rng.uniform_index(5));
    const std::int64_t j = 1 + static_cast<std::int64_t>(rng.uniform_index(4));
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng.uniform_index(3));
    // Exactly on the lattice: value of the voxel, central difference across every plane.
    const IntensitySample s = trilinear_sample_voxel(v, Vec3(i, j, k));
    CHECK(s.value == doctest::Approx(v.at(i, j, k)).epsilon(1e-12));
    auto at = [&](std::int64_t a, std::int64_t b, std::int64_t c) { return static_cast<double>(v.at(a, b, c)); };
    const Vec3 didx(0.5 * (at(i + 1, j, k) - at(i - 1, j, k)), 0.5 * (at(i, j + 1, k) - at(i, j - 1, k)),
                    0.5 * (at(i, j, k + 1) - at(i, j, k - 1)));
    for (int a = 0; a < 3; ++a) CHECK(s.gradient[a] == doctest::Approx(didx[a]).epsilon(1e-12));
  }
}

TEST_CASE("trilinear: normalized-coordinate gradient is the index gradient scaled by the chain rule") {
  Rng rng(42);
  const Grid g = make_grid(7, 6, 5, Vec3(0.8, 1.2, 2.0), Vec3(3, -4, 1));
  const Volume3D v = ramp_volume(g, rng);
  const NormTransform t = make_norm_transform(g, false);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 ijk(rng.uniform(0.1, 5.9), rng.uniform(0.1, 4.9), rng.uniform(0.1, 3.9));
    const IntensitySample a = trilinear_sample_voxel(v, ijk);
    const IntensitySample b = trilinear_sample(v, t.to_norm(g.index_to_world(ijk)), t);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-9));
    // index = (world - origin) / spacing, world = (n - offset) / scale.
    const Vec3 expect = a.gradient.cwiseQuotient(g.spacing).cwiseQuotient(t.scale);
    for (int c = 0; c < 3; ++c) CHECK(b.gradient[c] == doctest::Approx(expect[c]).epsilon(1e-9));
  }
}

TEST_CASE("trilinear: gradient inside a cell matches finite differences") {
  Rng rng(13);
  const Grid g = make_grid(6, 6, 6, Vec3(1.0, 0.7, 1.9));
  const Volume3D v = ramp_volume(g, rng);
  const NormTransform t = make_norm_transform(g, false);
  for (int trial = 0; trial < 50; ++trial) {
    // Stay away from lattice planes so the finite difference does not straddle a kink.
    Vec3 idx;
    for (int a = 0; a < 3; ++a) idx[a] = std::floor(rng.uniform(0.0, 4.99)) + rng.uniform(0.1, 0.9);
    const Vec3 x = t.to_norm(g.index_to_world(idx));
    const IntensitySample s = trilinear_sample(v, x, t);
    for (int a = 0; a < 3; ++a) {
      const double h = 1e-6;
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double fd = (trilinear_sample(v, xp, t).value - trilinear_sample(v, xm, t).value) / (2 * h);
      CHECK(s.gradient[a] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("trilinear: constant volume has constant value and zero gradient") {
  const Grid g = make_grid(4, 5, 6);
  const Volume3D v(g, DType::Float32, std::vector<float>(g.voxel_count(), 3.25f));
  const NormTransform t = make_norm_transform(g, false);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const IntensitySample s = trilinear_sample(v, test::random_vec(rng, -1.3, 1.3), t);
    CHECK(s.value == doctest::Approx(3.25).epsilon(1e-14));
    CHECK(s.gradient.norm() == 0.0);
  }
}

TEST_CASE("trilinear: halfway between 0 and 1 gives 0.5") {
  const Grid g = make_grid(2, 2, 2);
  Volume3D v(g, DType::Float32);
  for (std::int64_t k = 0; k < 2; ++k)
    for (std::int64_t j = 0; j < 2; ++j) v.at(1, j, k) = 1.0f;
  CHECK(trilinear_sample_voxel(v, Vec3(0.5, 0, 0)).value == 0.5);
  CHECK(trilinear_sample_voxel(v, Vec3(0.5, 0.3, 0.9)).value == doctest::Approx(0.5));
}

TEST_CASE("trilinear is exactly linear within a cell") {
  Rng rng(14);
  const Grid g = make_grid(5, 5, 5);
  const Volume3D v = ramp_volume(g, rng);
  for (int trial = 0; trial < 100; ++trial) {
    // Two points on a line parallel to one axis inside the same cell.
    const Vec3 base(1 + rng.uniform(0.01, 0.99), 2 + rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99));
    const int axis = static_cast<int>(rng.uniform_index(3));
    Vec3 a = base, b = base;
    a[axis] = std::floor(base[axis]) + rng.uniform(0.01, 0.99);
    b[axis] = std::floor(base[axis]) + rng.uniform(0.01, 0.99);
    const double mid = trilinear_sample_voxel(v, 0.5 * (a + b)).value;
    const double avg = 0.5 * (trilinear_sample_voxel(v, a).value + trilinear_sample_voxel(v, b).value);
    CHECK(mid == doctest::Approx(avg).epsilon(1e-12));
  }
}

TEST_CASE("trilinear clamps outside the lattice with zero gradient across the clamped axis") {
  Rng rng(15);
  const Grid g = make_grid(4, 4, 4);
  const Volume3D v = ramp_volume(g, rng);
  const IntensitySample s = trilinear_sample_voxel(v, Vec3(-2.0, 1.5, 1.5));
  const IntensitySample edge = trilinear_sample_voxel(v, Vec3(0.0, 1.5, 1.5));
  CHECK(s.value == doctest::Approx(edge.value));
  CHECK(s.gradient.x() == 0.0);
  CHECK(s.gradient.y() != 0.0);
  const IntensitySample far = trilinear_sample_voxel(v, Vec3(9.0, 9.0, 9.0));
  CHECK(far.value == doctest::Approx(v.at(3, 3, 3)));
  CHECK(far.gradient.norm() == 0.0);
  CHECK(std::isfinite(trilinear_sample_voxel(v, Vec3(1e30, -1e30, 0.5)).value));
}

}  // TEST_SUITE
