// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/siren.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/parallel.hpp"
#include "ccreg/vmath.hpp"

#include <algorithm>
#include <cmath>

namespace ccreg {
namespace {

using Eigen::Index;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;

constexpr int blocks_for(int order) { return order == 0 ? 1 : (order == 1 ? 4 : 10); }

struct SineCache {
  Mat h_in;  // fan_in x K*n
  Mat z;     // fan_out x K*n, omega0 * (W h_in + b)
  Arr s;     // sin(z0)
  Arr c;     // cos(z0)
};

// Input directions: block 0 is x, block 1+i is e_i, second-order blocks are zero.
Mat stacked_input(const Eigen::Ref<const Coords>& x, int k) {
  const Index n = x.cols();
  Mat h = Mat::Zero(3, k * n);
  h.leftCols(n) = x;
  if (k >= 4) {
    for (int i = 0; i < 3; ++i) h.block(i, (1 + i) * n, 1, n).setOnes();
  }
  return h;
}

// Returns the stacked output of the final (linear) layer, 3 x K*n. When
// `caches` is non-null the sine-layer state needed for the reverse pass is kept,
// along with the final layer's input in `last_in`.
Mat forward_chunk(const SirenParams& p, const Eigen::Ref<const Coords>& x, int k, std::vector<SineCache>* caches,
                  Mat* last_in) {
  const Index n = x.cols();
  const double w0 = p.omega0;
  Mat h = stacked_input(x, k);
  const std::size_t sine_layers = p.layers.size() - 1;
  if (caches) caches->resize(sine_layers);

  for (std::size_t l = 0; l < sine_layers; ++l) {
    const DenseLayer& layer = p.layers[l];
    Mat z = w0 * (layer.weight * h);
    z.leftCols(n).colwise() += w0 * layer.bias;
    const Index rows = z.rows();
    Arr s(rows, n);
    Arr c;
    if (k == 1 && !caches) {
      sin_array(z.data(), s.data(), static_cast<std::size_t>(rows * n));
    } else {
      c.resize(rows, n);
      sincos_array(z.data(), s.data(), c.data(), static_cast<std::size_t>(rows * n));
    }

    Mat out(z.rows(), k * n);
    out.leftCols(n) = s.matrix();
    if (k >= 4) {
      for (int i = 0; i < 3; ++i) out.middleCols((1 + i) * n, n) = (c * z.middleCols((1 + i) * n, n).array()).matrix();
    }
    if (k == 10) {
      for (int q = 0; q < 6; ++q) {
        const auto [i, j] = kHessPairs[q];
        out.middleCols((4 + q) * n, n) =
            (c * z.middleCols((4 + q) * n, n).array() -
             s * z.middleCols((1 + i) * n, n).array() * z.middleCols((1 + j) * n, n).array())
                .matrix();
      }
    }
    if (caches) {
      (*caches)[l] = SineCache{std::move(h), std::move(z), std::move(s), std::move(c)};
    }
    h = std::move(out);
  }
  const DenseLayer& last = p.layers.back();
  Mat o = last.weight * h;
  o.leftCols(n).colwise() += last.bias;
  if (last_in) *last_in = std::move(h);
  return o;
}

// Reverse pass over one chunk. `go` is the adjoint of the stacked final output.
void backward_chunk(const SirenParams& p, const std::vector<SineCache>& caches, const Mat& last_in, const Mat& go,
                    Index n, int k, SirenGradients& g, Coords* input_adj) {
  const double w0 = p.omega0;
  const std::size_t sine_layers = p.layers.size() - 1;
  {
    DenseLayer& gl = g.layers.back();
    gl.weight.noalias() += go * last_in.transpose();
    gl.bias += go.leftCols(n).rowwise().sum();
  }
  Mat gh = p.layers.back().weight.transpose() * go;

  for (std::size_t li = sine_layers; li-- > 0;) {
    const SineCache& cache = caches[li];
    const Arr& s = cache.s;
    const Arr& c = cache.c;
    auto zb = [&](int b) { return cache.z.middleCols(b * n, n).array(); };
    auto ghb = [&](int b) { return gh.middleCols(b * n, n).array(); };

    Mat gz(gh.rows(), k * n);
    Arr gz0 = c * ghb(0);
    if (k >= 4) {
      for (int i = 0; i < 3; ++i) {
        gz0 -= s * ghb(1 + i) * zb(1 + i);
        gz.middleCols((1 + i) * n, n) = (c * ghb(1 + i)).matrix();
      }
    }
    if (k == 10) {
      for (int q = 0; q < 6; ++q) {
        const auto [i, j] = kHessPairs[q];
        const auto ghq = ghb(4 + q);
        gz.middleCols((4 + q) * n, n) = (c * ghq).matrix();
        gz0 -= ghq * (s * zb(4 + q) + c * zb(1 + i) * zb(1 + j));
        if (i == j) {
          gz.middleCols((1 + i) * n, n).array() -= 2.0 * s * zb(1 + i) * ghq;
        } else {
          gz.middleCols((1 + i) * n, n).array() -= s * zb(1 + j) * ghq;
          gz.middleCols((1 + j) * n, n).array() -= s * zb(1 + i) * ghq;
        }
      }
    }
    gz.leftCols(n) = gz0.matrix();

    DenseLayer& gl = g.layers[li];
    gl.weight.noalias() += w0 * (gz * cache.h_in.transpose());
    gl.bias += w0 * gz.leftCols(n).rowwise().sum();

    const DenseLayer& layer = p.layers[li];
    if (li > 0) {
      gh = w0 * (layer.weight.transpose() * gz);
    } else if (input_adj) {
      // Only the value block of the network input depends on x.
      *input_adj += w0 * (layer.weight.transpose() * gz.leftCols(n));
    }
  }
}

Index chunk_count(Index n) { return (n + kSirenChunk - 1) / kSirenChunk; }

}  // namespace

std::vector<int> SirenParams::layer_sizes() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

std::size_t SirenParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool SirenParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.weight.allFinite() && l.bias.allFinite(); });
}

void SirenParams::validate() const {
  if (layers.size() < 2) throw ContractError("siren needs at least one sine layer and one output layer");
  if (!(omega0 > 0.0)) throw ContractError("siren omega0 must be positive");
  Index fan_in = 3;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.cols() != fan_in || layer.bias.size() != layer.weight.rows() || layer.weight.rows() == 0) {
      throw ContractError("siren layer " + std::to_string(l) + " has inconsistent shape");
    }
    fan_in = layer.weight.rows();
  }
  if (fan_in != 3) throw ContractError("siren output layer must have 3 outputs");
}

bool SirenParams::operator==(const SirenParams& o) const {
  if (omega0 != o.omega0 || layers.size() != o.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight.rows() != o.layers[l].weight.rows() || layers[l].weight.cols() != o.layers[l].weight.cols())
      return false;
    if (layers[l].weight != o.layers[l].weight || layers[l].bias != o.layers[l].bias) return false;
  }
  return true;
}

SirenParams init_siren(const SirenShape& shape, Rng& rng) {
  if (shape.hidden_layers < 1 || shape.width < 1) throw ContractError("siren layer counts must be positive");
  if (!(shape.omega0 > 0.0)) throw ContractError("siren omega0 must be positive");
  SirenParams p;
  p.omega0 = shape.omega0;
  int fan_in = 3;
  const int total = shape.hidden_layers + 1;
  for (int l = 0; l < total; ++l) {
    const bool output = l == total - 1;
    const int fan_out = output ? 3 : shape.width;
    double bound;
    if (l == 0 && !output) {
      bound = 1.0 / fan_in;
    } else {
      bound = std::sqrt(6.0 / fan_in) / shape.omega0;
      if (output) bound /= shape.omega0;
    }
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    // Row-major fill order so the draw sequence does not depend on Eigen's storage.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    p.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return p;
}

SirenGradients SirenGradients::zeros_like(const SirenParams& p) {
  SirenGradients g;
  g.layers.reserve(p.layers.size());
  for (const auto& l : p.layers) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

SirenGradients& SirenGradients::operator+=(const SirenGradients& o) {
  if (o.layers.size() != layers.size()) throw ContractError("gradient shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weight += o.layers[l].weight;
    layers[l].bias += o.layers[l].bias;
  }
  return *this;
}

SirenGradients& SirenGradients::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

double SirenGradients::squared_norm() const {
  double acc = 0.0;
  for (const auto& l : layers) acc += l.weight.squaredNorm() + l.bias.squaredNorm();
  return acc;
}

bool SirenGradients::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.weight.allFinite() && l.bias.allFinite(); });
}

SpatialBatch SpatialBatch::zeros(int order, Index n) {
  if (order < 0 || order > 2) throw ContractError("derivative order must be 0, 1 or 2");
  SpatialBatch b;
  b.order = order;
  b.phi = Coords::Zero(3, n);
  if (order >= 1) {
    for (auto& d : b.d1) d = Coords::Zero(3, n);
  }
  if (order >= 2) {
    for (auto& d : b.d2) d = Coords::Zero(3, n);
  }
  return b;
}

Eigen::Matrix3d SpatialBatch::jacobian(Index n) const {
  Eigen::Matrix3d j;
  for (int i = 0; i < 3; ++i) j.col(i) = d1[i].col(n);
  return j;
}

SpatialEval SpatialBatch::at(Index n) const {
  SpatialEval e;
  e.order = order;
  e.phi = phi.col(n);
  if (order >= 1) e.jac = jacobian(n);
  if (order >= 2) {
    for (int q = 0; q < 6; ++q) {
      const auto [i, j] = kHessPairs[q];
      for (int k = 0; k < 3; ++k) {
        e.hess[k](i, j) = d2[q](k, n);
        e.hess[k](j, i) = d2[q](k, n);
      }
    }
  }
  return e;
}

struct SirenTape::Impl {
  int order = 0;
  Index n = 0;
  std::vector<int> sizes;
  std::vector<std::vector<SineCache>> caches;  // per chunk
  std::vector<Mat> last_in;                    // per chunk
};

SirenTape::SirenTape() = default;
SirenTape::~SirenTape() = default;
SirenTape::SirenTape(SirenTape&&) noexcept = default;
SirenTape& SirenTape::operator=(SirenTape&&) noexcept = default;
int SirenTape::order() const noexcept { return impl_ ? impl_->order : -1; }
Index SirenTape::size() const noexcept { return impl_ ? impl_->n : 0; }

SpatialBatch eval_spatial(const SirenParams& p, const Coords& x, int order, SirenTape* tape) {
  p.validate();
  const Index n = x.cols();
  SpatialBatch out = SpatialBatch::zeros(order, n);
  const int k = blocks_for(order);
  const auto chunks = static_cast<std::size_t>(chunk_count(n));
  SirenTape::Impl* rec = nullptr;
  if (tape) {
    tape->impl_ = std::make_unique<SirenTape::Impl>();
    rec = tape->impl_.get();
    rec->order = order;
    rec->n = n;
    rec->sizes = p.layer_sizes();
    rec->caches.resize(chunks);
    rec->last_in.resize(chunks);
  }
  parallel_for(chunks, [&](std::size_t ci) {
    const Index start = static_cast<Index>(ci) * kSirenChunk;
    const Index m = std::min(kSirenChunk, n - start);
    const Mat o = forward_chunk(p, x.middleCols(start, m), k, rec ? &rec->caches[ci] : nullptr,
                                rec ? &rec->last_in[ci] : nullptr);
    out.phi.middleCols(start, m) = x.middleCols(start, m) + o.leftCols(m);
    if (order >= 1) {
      for (int i = 0; i < 3; ++i) {
        out.d1[i].middleCols(start, m) = o.middleCols((1 + i) * m, m);
        out.d1[i].row(i).segment(start, m).array() += 1.0;
      }
    }
    if (order >= 2) {
      for (int q = 0; q < 6; ++q) out.d2[q].middleCols(start, m) = o.middleCols((4 + q) * m, m);
    }
  });
  return out;
}

SpatialBatch eval_spatial(const SirenParams& p, const Coords& x, int order) {
  return eval_spatial(p, x, order, nullptr);
}

SirenGradients param_gradients(const SirenParams& p, const SirenTape& tape, const SpatialAdjoint& adjoint,
                               Coords* input_adjoint) {
  p.validate();
  const SirenTape::Impl* rec = tape.impl_.get();
  if (!rec) throw ContractError("param_gradients: empty tape");
  if (rec->sizes != p.layer_sizes()) throw ContractError("param_gradients: tape was recorded for another network");
  const Index n = rec->n;
  const int order = adjoint.order;
  if (order != rec->order) throw ContractError("param_gradients: adjoint order differs from the recorded order");
  if (adjoint.phi.cols() != n) throw ContractError("phi adjoint length does not match coordinates");
  for (int i = 0; order >= 1 && i < 3; ++i) {
    if (adjoint.d1[i].cols() != n) throw ContractError("jacobian adjoint length does not match coordinates");
  }
  for (int q = 0; order >= 2 && q < 6; ++q) {
    if (adjoint.d2[q].cols() != n) throw ContractError("hessian adjoint length does not match coordinates");
  }
  const int k = blocks_for(order);
  const auto chunks = static_cast<std::size_t>(chunk_count(n));
  std::vector<SirenGradients> partial(chunks);
  if (input_adjoint) *input_adjoint = adjoint.phi;

  parallel_for(chunks, [&](std::size_t ci) {
    const Index start = static_cast<Index>(ci) * kSirenChunk;
    const Index m = std::min(kSirenChunk, n - start);
    Mat go(3, k * m);
    go.leftCols(m) = adjoint.phi.middleCols(start, m);
    if (k >= 4) {
      for (int i = 0; i < 3; ++i) go.middleCols((1 + i) * m, m) = adjoint.d1[i].middleCols(start, m);
    }
    if (k == 10) {
      for (int q = 0; q < 6; ++q) go.middleCols((4 + q) * m, m) = adjoint.d2[q].middleCols(start, m);
    }
    partial[ci] = SirenGradients::zeros_like(p);
    Coords in_adj;
    if (input_adjoint) in_adj = Coords::Zero(3, m);
    backward_chunk(p, rec->caches[ci], rec->last_in[ci], go, m, k, partial[ci], input_adjoint ? &in_adj : nullptr);
    if (input_adjoint) input_adjoint->middleCols(start, m) += in_adj;
  });

  SirenGradients total = SirenGradients::zeros_like(p);
  for (const auto& g : partial) total += g;
  return total;
}

SirenGradients param_gradients(const SirenParams& p, const Coords& x, const SpatialAdjoint& adjoint,
                               Coords* input_adjoint) {
  if (adjoint.order < 0 || adjoint.order > 2) throw ContractError("adjoint order must be 0, 1 or 2");
  SirenTape tape;
  eval_spatial(p, x, adjoint.order, &tape);
  return param_gradients(p, tape, adjoint, input_adjoint);
}

AdamState AdamState::for_params(const SirenParams& p) {
  AdamState s;
  const auto z = SirenGradients::zeros_like(p);
  s.m = z.layers;
  s.v = z.layers;
  return s;
}

void adam_step(SirenParams& p, const SirenGradients& g, AdamState& s, double lr) {
  if (g.layers.size() != p.layers.size() || s.m.size() != p.layers.size() || s.v.size() != p.layers.size()) {
    throw ContractError("adam: gradient/state/parameter layer counts differ");
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& gl = g.layers[l];
    if (gl.weight.rows() != p.layers[l].weight.rows() || gl.weight.cols() != p.layers[l].weight.cols() ||
        gl.bias.size() != p.layers[l].bias.size()) {
      throw ContractError("adam: gradient shape mismatch in layer " + std::to_string(l));
    }
    if (!gl.weight.allFinite()) throw NumericalError("non-finite gradient in layer " + std::to_string(l) + " weights");
    if (!gl.bias.allFinite()) throw NumericalError("non-finite gradient in layer " + std::to_string(l) + " bias");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m.array() = s.beta1 * m.array() + (1.0 - s.beta1) * grad.array();
    v.array() = s.beta2 * v.array() + (1.0 - s.beta2) * grad.array().square();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    update(p.layers[l].weight, s.m[l].weight, s.v[l].weight, g.layers[l].weight);
    update(p.layers[l].bias, s.m[l].bias, s.v[l].bias, g.layers[l].bias);
  }
}

}  // namespace ccreg
