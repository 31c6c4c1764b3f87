// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/phantom.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/rng.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ccreg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream ids for the phantom generator.
constexpr std::uint64_t kFieldStream = 10;
constexpr std::uint64_t kTextureStream = 11;
constexpr std::uint64_t kLandmarkStream = 12;

Vec3 random_unit(Rng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  return v / v.norm();
}

// Cyclic sinusoid: u_x depends on y, u_y on z, u_z on x, so det(I + du) = 1 + product
// of the three slopes and the field stays invertible for slopes below 1.
class SinusoidField final : public AnalyticField {
 public:
  SinusoidField(double amp, double wavelength, const Vec3& center, const Vec3& phase)
      : amp_(amp), k_(kTwoPi / wavelength), c_(center), phase_(phase) {}

  Vec3 displacement(const Vec3& p) const override {
    const Vec3 r = p - c_;
    return amp_ * Vec3(std::sin(k_ * r.y() + phase_.x()), std::sin(k_ * r.z() + phase_.y()),
                       std::sin(k_ * r.x() + phase_.z()));
  }
  Eigen::Matrix3d displacement_jacobian(const Vec3& p) const override {
    const Vec3 r = p - c_;
    Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
    j(0, 1) = amp_ * k_ * std::cos(k_ * r.y() + phase_.x());
    j(1, 2) = amp_ * k_ * std::cos(k_ * r.z() + phase_.y());
    j(2, 0) = amp_ * k_ * std::cos(k_ * r.x() + phase_.z());
    return j;
  }

 private:
  double amp_, k_;
  Vec3 c_, phase_;
};

// Sum of directional squeezes u = -k (a.r) a g(r), g Gaussian with width sigma.
// With every direction a weighted equally on all axes (isotropic flag) the
// squeeze is radial.
class CompressionField final : public AnalyticField {
 public:
  struct Site {
    Vec3 center;
    Vec3 axis;       // unit, ignored when radial
    bool radial;
    double k;        // peak slope
  };
  CompressionField(std::vector<Site> sites, double sigma) : sites_(std::move(sites)), sigma_(sigma) {}

  Vec3 displacement(const Vec3& p) const override {
    Vec3 u = Vec3::Zero();
    for (const Site& s : sites_) {
      const Vec3 r = p - s.center;
      const double g = std::exp(-r.squaredNorm() / (2.0 * sigma_ * sigma_));
      u -= s.radial ? Vec3(s.k * g * r) : Vec3(s.k * g * s.axis.dot(r) * s.axis);
    }
    return u;
  }
  Eigen::Matrix3d displacement_jacobian(const Vec3& p) const override {
    Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
    const double inv_s2 = 1.0 / (sigma_ * sigma_);
    for (const Site& s : sites_) {
      const Vec3 r = p - s.center;
      const double g = std::exp(-0.5 * r.squaredNorm() * inv_s2);
      if (s.radial) {
        j -= s.k * g * (Eigen::Matrix3d::Identity() - inv_s2 * r * r.transpose());
      } else {
        j -= s.k * g * (s.axis * s.axis.transpose() - inv_s2 * s.axis.dot(r) * s.axis * r.transpose());
      }
    }
    return j;
  }

 private:
  std::vector<Site> sites_;
  double sigma_;
};

// Band-limited cosines plus Gaussian blobs, evaluated analytically so the moving
// image can be sampled exactly at inverse-mapped positions.
class Texture {
 public:
  Texture(Rng rng, const Vec3& lo, const Vec3& hi) {
    for (int i = 0; i < 14; ++i) {
      const double wavelength = rng.uniform(10.0, 24.0);
      waves_.push_back({random_unit(rng) * (kTwoPi / wavelength), rng.uniform(0.0, kTwoPi), rng.uniform(0.3, 1.0)});
    }
    for (int i = 0; i < 24; ++i) {
      const Vec3 c(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()), rng.uniform(lo.z(), hi.z()));
      blobs_.push_back({c, rng.uniform(2.5, 6.0), rng.uniform(-1.5, 1.5)});
    }
  }

  double operator()(const Vec3& p) const {
    double v = 0.0;
    for (const Wave& w : waves_) v += w.weight * std::cos(w.k.dot(p) + w.phase);
    for (const Blob& b : blobs_) v += b.weight * std::exp(-(p - b.center).squaredNorm() / (2.0 * b.radius * b.radius));
    return v;
  }

 private:
  struct Wave {
    Vec3 k;
    double phase, weight;
  };
  struct Blob {
    Vec3 center;
    double radius, weight;
  };
  std::vector<Wave> waves_;
  std::vector<Blob> blobs_;
};

Grid phantom_grid(const PhantomSpec& s) {
  Grid g;
  g.dims = {s.size, s.size, s.size};
  g.spacing = Vec3::Constant(s.spacing_mm);
  g.origin = Vec3::Zero();
  return g;
}

double mask_radius(const Grid& g) { return 0.38 * g.extent().minCoeff(); }

void check_spec(const PhantomSpec& s) {
  if (s.size < 4) throw ParameterError("phantom size must be at least 4 voxels");
  if (!(s.spacing_mm > 0.0) || !std::isfinite(s.spacing_mm)) throw ParameterError("phantom spacing must be positive");
  if (!(s.amplitude_mm >= 0.0) || !std::isfinite(s.amplitude_mm)) {
    throw ParameterError("phantom amplitude must be finite and non-negative");
  }
  if (s.landmarks < 0) throw ParameterError("landmark count must be non-negative");
}

}  // namespace

Vec3 AnalyticField::inverse(const Vec3& q) const {
  Vec3 p = q - displacement(q);
  for (int it = 0; it < 100; ++it) {
    const Vec3 r = map(p) - q;
    if (r.norm() <= 1e-13 * (1.0 + q.norm())) return p;
    p -= jacobian(p).partialPivLu().solve(r);
  }
  const Vec3 r = map(p) - q;
  if (r.norm() <= 1e-9) return p;
  std::ostringstream os;
  os << "inverse mapping did not converge at (" << q.transpose() << "), residual " << r.norm();
  throw NumericalError(os.str());
}

std::string_view phantom_kind_name(PhantomKind k) noexcept {
  switch (k) {
    case PhantomKind::Sinusoid: return "sinusoid";
    case PhantomKind::GaussianCompression: return "gaussian_compression";
    case PhantomKind::PiecewiseContraction: return "piecewise_contraction";
  }
  return "unknown";
}

PhantomKind parse_phantom_kind(std::string_view s) {
  for (PhantomKind k : {PhantomKind::Sinusoid, PhantomKind::GaussianCompression, PhantomKind::PiecewiseContraction}) {
    if (s == phantom_kind_name(k)) return k;
  }
  throw ParameterError("unknown phantom kind '" + std::string(s) + "'");
}

std::shared_ptr<const AnalyticField> make_phantom_field(const PhantomSpec& spec) {
  check_spec(spec);
  const Grid g = phantom_grid(spec);
  const Vec3 center = g.origin + 0.5 * g.extent();
  const double len = g.extent().minCoeff();
  const double amp = spec.amplitude_mm;
  Rng rng = Rng(spec.seed).split(kFieldStream);

  switch (spec.kind) {
    case PhantomKind::Sinusoid: {
      const Vec3 phase(rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi));
      return std::make_shared<SinusoidField>(amp, len, center, phase);
    }
    case PhantomKind::GaussianCompression: {
      // Radial squeeze; peak displacement (at distance sigma) equals the amplitude.
      const double sigma = len / 6.0;
      const double k = amp * std::exp(0.5) / sigma;
      const Vec3 shift = 0.1 * len * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      return std::make_shared<CompressionField>(
          std::vector<CompressionField::Site>{{center + shift, Vec3::UnitX(), true, k}}, sigma);
    }
    case PhantomKind::PiecewiseContraction: {
      const double sigma = len / 12.0;
      const double k = amp * std::exp(0.5) / sigma;
      const double r = mask_radius(g);
      std::vector<CompressionField::Site> sites;
      for (int i = 0; i < 6; ++i) {
        Vec3 c;
        do {
          c = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        } while (c.squaredNorm() > 1.0);
        sites.push_back({center + 0.8 * r * c, random_unit(rng), false, k});
      }
      return std::make_shared<CompressionField>(std::move(sites), sigma);
    }
  }
  throw ParameterError("unknown phantom kind");
}

Phantom generate_phantom(const PhantomSpec& spec) {
  Phantom ph;
  ph.spec = spec;
  ph.field = make_phantom_field(spec);
  const AnalyticField& f = *ph.field;
  const Grid g = phantom_grid(spec);
  const std::size_t n = g.voxel_count();

  ph.min_det = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f.jacobian(g.voxel_center(i)).determinant();
    if (d < ph.min_det) {
      ph.min_det = d;
      worst = i;
    }
  }
  if (!(ph.min_det > spec.min_det)) {
    const Index3 ijk = g.unravel(worst);
    std::ostringstream os;
    os << phantom_kind_name(spec.kind) << " phantom with amplitude " << spec.amplitude_mm
       << " mm is not invertible: min det = " << ph.min_det << " at voxel (" << ijk[0] << "," << ijk[1] << ","
       << ijk[2] << "), required > " << spec.min_det;
    throw ParameterError(os.str());
  }

  const Vec3 center = g.origin + 0.5 * g.extent();
  const double radius = mask_radius(g);
  const Texture tex(Rng(spec.seed).split(kTextureStream), g.origin, g.origin + g.extent());

  ph.fixed = Volume3D(g, DType::Float32);
  ph.moving = Volume3D(g, DType::Float32);
  ph.mask = Volume3D(g, DType::UInt8);
  for (auto& v : ph.true_displacement) v = Volume3D(g, DType::Float32);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = g.voxel_center(i);
    ph.fixed[i] = static_cast<float>(tex(p));
    ph.moving[i] = static_cast<float>(tex(f.inverse(p)));
    ph.mask[i] = (p - center).norm() <= radius ? 1.0f : 0.0f;
    const Vec3 u = f.displacement(p);
    for (int a = 0; a < 3; ++a) ph.true_displacement[a][i] = static_cast<float>(u[a]);
  }

  Rng lr = Rng(spec.seed).split(kLandmarkStream);
  for (int i = 0; i < spec.landmarks; ++i) {
    Vec3 c;
    do {
      c = Vec3(lr.uniform(-1, 1), lr.uniform(-1, 1), lr.uniform(-1, 1));
    } while (c.squaredNorm() > 1.0);
    const Vec3 p = center + radius * c;
    ph.landmarks_fixed.points.push_back(p);
    ph.landmarks_moving.points.push_back(f.map(p));
  }
  return ph;
}

}  // namespace ccreg
