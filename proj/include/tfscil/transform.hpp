// Copyright 2026 The tfscil Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Context transform family acting on spectrograms.
//
// A context c = (delta, tau, bias, tilt) maps a canonical spectrogram M to
//
//   T_c(M) = A_{bias,tilt}(G_{delta,tau}(M)),
//   G: bilinear resampling on a grid shifted by delta along frequency and
//      scaled by tau along time (about the grid center), clipped to [-1, 1];
//   A: M + bias + tilt * r_f with r_f = 2f/(F-1) - 1.
//
// The approximate inverse subtracts the envelope first and then warps with
// (-delta, 1/tau). Batched versions live in namespace ad and carry adjoints
// with respect to the input maps, the grid and the context parameters.

#ifndef TFSCIL_TRANSFORM_HPP_
#define TFSCIL_TRANSFORM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "tfscil/autodiff.hpp"
#include "tfscil/rng.hpp"
#include "tfscil/spectrogram.hpp"

namespace tfscil {

struct ContextParams {
  double delta = 0.0;  // frequency translation, normalized units
  double tau = 1.0;    // temporal scale, > 0
  double bias = 0.0;   // global log-energy offset
  double tilt = 0.0;   // spectral slope against r_f

  static ContextParams identity() { return {}; }
  bool is_finite() const {
    return std::isfinite(delta) && std::isfinite(tau) && std::isfinite(bias) && std::isfinite(tilt);
  }
  std::array<double, 4> as_array() const { return {delta, tau, bias, tilt}; }
  friend bool operator==(const ContextParams&, const ContextParams&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ContextParams& c) {
  return os << '(' << c.delta << ", " << c.tau << ", " << c.bias << ", " << c.tilt << ')';
}

struct ContextBounds {
  double delta_max = 0.15;
  double tau_min = 0.85;
  double tau_max = 1.18;
  double bias_max = 0.3;
  double tilt_max = 0.15;

  static ContextBounds identity_only() { return {0.0, 1.0, 1.0, 0.0, 0.0}; }

  void validate() const {
    if (!(delta_max >= 0 && bias_max >= 0 && tilt_max >= 0)) {
      throw std::invalid_argument("ContextBounds: half-widths must be non-negative");
    }
    if (!(tau_min > 0 && tau_min <= 1.0 && 1.0 <= tau_max)) {
      throw std::invalid_argument("ContextBounds: need 0 < tau_min <= 1 <= tau_max");
    }
  }
  bool contains(const ContextParams& c, double slack = 0.0) const {
    return std::abs(c.delta) <= delta_max + slack && c.tau >= tau_min - slack &&
           c.tau <= tau_max + slack && std::abs(c.bias) <= bias_max + slack &&
           std::abs(c.tilt) <= tilt_max + slack;
  }
  ContextBounds scaled(double k) const {
    return {delta_max * k, std::pow(tau_min, k), std::pow(tau_max, k), bias_max * k, tilt_max * k};
  }
  friend bool operator==(const ContextBounds&, const ContextBounds&) = default;
};

// Each coordinate independent and uniform on its interval.
inline ContextParams sample_pseudo_context(const ContextBounds& bounds, Rng& rng) {
  ContextParams c;
  c.delta = uniform(rng, -bounds.delta_max, bounds.delta_max);
  c.tau = uniform(rng, bounds.tau_min, bounds.tau_max);
  c.bias = uniform(rng, -bounds.bias_max, bounds.bias_max);
  c.tilt = uniform(rng, -bounds.tilt_max, bounds.tilt_max);
  return c;
}

// r[f] = 2f/(F-1) - 1.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> freq_coords(Index bins) {
  if (bins < 2) throw std::invalid_argument("freq_coords: need at least 2 bins");
  Eigen::Array<Scalar, Eigen::Dynamic, 1> r(bins);
  for (Index f = 0; f < bins; ++f) {
    r[f] = Scalar(2) * static_cast<Scalar>(f) / static_cast<Scalar>(bins - 1) - Scalar(1);
  }
  r[0] = Scalar(-1);
  r[bins - 1] = Scalar(1);
  return r;
}

// Per-axis translation and scaling of the normalized sampling grid:
// sample(v) = clip((v - shift) / scale, -1, 1).
struct WarpParams {
  double freq_shift = 0.0;
  double freq_scale = 1.0;
  double time_shift = 0.0;
  double time_scale = 1.0;
};

// The single place where context coordinates are assigned to grid axes:
// delta translates frequency, tau scales time.
inline WarpParams forward_warp(const ContextParams& c) { return {c.delta, 1.0, 0.0, c.tau}; }
inline WarpParams inverse_warp(const ContextParams& c) { return {-c.delta, 1.0, 0.0, 1.0 / c.tau}; }

// Normalized sampling coordinates for every output cell, laid out
// [f][t][axis] with axis 0 = frequency, 1 = time.
template <typename Scalar>
struct SampleGrid {
  Index mel_bins = 0;
  Index frames = 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> coords;

  Scalar freq(Index f, Index t) const { return coords[(f * frames + t) * 2]; }
  Scalar time(Index f, Index t) const { return coords[(f * frames + t) * 2 + 1]; }
  Tensor<Scalar> as_batch() const { return Tensor<Scalar>({1, mel_bins, frames, 2}, coords); }
};

namespace detail {

template <typename Scalar>
inline Scalar clip_unit(Scalar v) {
  return std::min(Scalar(1), std::max(Scalar(-1), v));
}

// Pixel position of a normalized coordinate on an axis of `len` cells.
// Positions within rounding noise of a cell center snap onto it so the
// identity grid reproduces its input exactly.
template <typename Scalar>
inline Scalar to_pixel(Scalar v, Index len) {
  const Scalar p = (v + Scalar(1)) * Scalar(0.5) * static_cast<Scalar>(len - 1);
  const Scalar r = std::round(p);
  const Scalar snap = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(len);
  return std::abs(p - r) <= snap ? r : p;
}

// Lower neighbour index and fractional weight; the upper neighbour is
// base + 1, which stays in range because base <= len - 2.
template <typename Scalar>
inline void neighbours(Scalar p, Index len, Index& base, Scalar& frac) {
  base = std::clamp<Index>(static_cast<Index>(std::floor(p)), 0, len - 2);
  frac = p - static_cast<Scalar>(base);
}

// Bilinear sampling of one multi-channel map. `grid` holds (f, t, 2)
// normalized coordinates, already clipped to [-1, 1].
template <typename Scalar>
void grid_sample_forward(const Scalar* in, Index channels, Index bins, Index frames,
                         const Scalar* grid, Scalar* out) {
  for (Index f = 0; f < bins; ++f) {
    for (Index t = 0; t < frames; ++t) {
      const Scalar* g = grid + (f * frames + t) * 2;
      Index f0, t0;
      Scalar wf, wt;
      neighbours(to_pixel(g[0], bins), bins, f0, wf);
      neighbours(to_pixel(g[1], frames), frames, t0, wt);
      for (Index c = 0; c < channels; ++c) {
        const Scalar* m = in + c * bins * frames;
        const Scalar v00 = m[f0 * frames + t0], v01 = m[f0 * frames + t0 + 1];
        const Scalar v10 = m[(f0 + 1) * frames + t0], v11 = m[(f0 + 1) * frames + t0 + 1];
        out[(c * bins + f) * frames + t] = (Scalar(1) - wf) * ((Scalar(1) - wt) * v00 + wt * v01) +
                                           wf * ((Scalar(1) - wt) * v10 + wt * v11);
      }
    }
  }
}

template <typename Scalar>
void grid_sample_backward(const Scalar* in, Index channels, Index bins, Index frames,
                          const Scalar* grid, const Scalar* gout, Scalar* gin, Scalar* ggrid) {
  const Scalar half_f = Scalar(0.5) * static_cast<Scalar>(bins - 1);
  const Scalar half_t = Scalar(0.5) * static_cast<Scalar>(frames - 1);
  for (Index f = 0; f < bins; ++f) {
    for (Index t = 0; t < frames; ++t) {
      const Scalar* g = grid + (f * frames + t) * 2;
      Index f0, t0;
      Scalar wf, wt;
      neighbours(to_pixel(g[0], bins), bins, f0, wf);
      neighbours(to_pixel(g[1], frames), frames, t0, wt);
      Scalar d_pf = 0, d_pt = 0;
      for (Index c = 0; c < channels; ++c) {
        const Index base = c * bins * frames;
        const Scalar go = gout[base + f * frames + t];
        if (go == Scalar(0)) continue;
        const Index i00 = base + f0 * frames + t0, i01 = i00 + 1;
        const Index i10 = i00 + frames, i11 = i10 + 1;
        if (gin) {
          gin[i00] += go * (Scalar(1) - wf) * (Scalar(1) - wt);
          gin[i01] += go * (Scalar(1) - wf) * wt;
          gin[i10] += go * wf * (Scalar(1) - wt);
          gin[i11] += go * wf * wt;
        }
        if (ggrid) {
          d_pf += go * ((Scalar(1) - wt) * (in[i10] - in[i00]) + wt * (in[i11] - in[i01]));
          d_pt += go * ((Scalar(1) - wf) * (in[i01] - in[i00]) + wf * (in[i11] - in[i10]));
        }
      }
      if (ggrid) {
        ggrid[(f * frames + t) * 2] += d_pf * half_f;
        ggrid[(f * frames + t) * 2 + 1] += d_pt * half_t;
      }
    }
  }
}

}  // namespace detail

namespace ad {

// Context tensors are (n, 4) with columns (delta, tau, bias, tilt).
template <typename Scalar>
Tensor<Scalar> context_tensor(const std::vector<ContextParams>& cs) {
  Tensor<Scalar> t({static_cast<Index>(cs.size()), 4});
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto a = cs[i].as_array();
    for (Index j = 0; j < 4; ++j) t[static_cast<Index>(i) * 4 + j] = static_cast<Scalar>(a[j]);
  }
  return t;
}

template <typename Scalar>
std::vector<ContextParams> context_list(const Tensor<Scalar>& t) {
  require_shape({t.dim(0), 4}, t.shape, "context_list");
  std::vector<ContextParams> cs(static_cast<std::size_t>(t.dim(0)));
  for (Index i = 0; i < t.dim(0); ++i) {
    cs[i] = {double(t[i * 4]), double(t[i * 4 + 1]), double(t[i * 4 + 2]), double(t[i * 4 + 3])};
  }
  return cs;
}

// (n, 4) contexts -> (n, 4) warp params (freq_shift, freq_scale, time_shift, time_scale).
template <typename Scalar>
Var<Scalar> warp_params(const Var<Scalar>& ctx, bool inverse) {
  const Index n = ctx->value.dim(0);
  require_shape(ctx->value.shape, {n, 4}, "warp_params");
  Tensor<Scalar> out({n, 4});
  for (Index i = 0; i < n; ++i) {
    const Scalar delta = ctx->value[i * 4], tau = ctx->value[i * 4 + 1];
    if (!(tau > Scalar(0))) throw std::domain_error("warp_params: tau must be positive");
    const WarpParams w = inverse ? inverse_warp({double(delta), double(tau), 0, 0})
                                 : forward_warp({double(delta), double(tau), 0, 0});
    out[i * 4] = inverse ? -delta : delta;
    out[i * 4 + 1] = static_cast<Scalar>(w.freq_scale);
    out[i * 4 + 2] = static_cast<Scalar>(w.time_shift);
    out[i * 4 + 3] = inverse ? Scalar(1) / tau : tau;
  }
  return make_node<Scalar>(std::move(out), {ctx}, [ctx, n, inverse](const Node<Scalar>& self) {
    auto& g = ctx->grad_buffer();
    for (Index i = 0; i < n; ++i) {
      const Scalar tau = ctx->value[i * 4 + 1];
      g[i * 4] += inverse ? -self.grad[i * 4] : self.grad[i * 4];
      g[i * 4 + 1] += inverse ? -self.grad[i * 4 + 3] / (tau * tau) : self.grad[i * 4 + 3];
    }
  });
}

// (n, 4) warp params -> (n, F, T, 2) clipped sampling coordinates. The
// gradient is zero wherever the clip is active.
template <typename Scalar>
Var<Scalar> make_grid(const Var<Scalar>& warp, Index bins, Index frames) {
  const Index n = warp->value.dim(0);
  require_shape(warp->value.shape, {n, 4}, "make_grid");
  const auto rf = freq_coords<Scalar>(bins);
  const auto rt = freq_coords<Scalar>(frames);
  Tensor<Scalar> out({n, bins, frames, 2});
  for (Index i = 0; i < n; ++i) {
    const Scalar* w = warp->value.ptr() + i * 4;
    for (Index f = 0; f < bins; ++f) {
      const Scalar gf = tfscil::detail::clip_unit((rf[f] - w[0]) / w[1]);
      for (Index t = 0; t < frames; ++t) {
        Scalar* g = out.ptr() + ((i * bins + f) * frames + t) * 2;
        g[0] = gf;
        g[1] = tfscil::detail::clip_unit((rt[t] - w[2]) / w[3]);
      }
    }
  }
  return make_node<Scalar>(std::move(out), {warp}, [warp, n, bins, frames, rf, rt](const Node<Scalar>& self) {
    auto& gw = warp->grad_buffer();
    for (Index i = 0; i < n; ++i) {
      const Scalar* w = warp->value.ptr() + i * 4;
      for (Index f = 0; f < bins; ++f) {
        const Scalar uf = (rf[f] - w[0]) / w[1];
        const bool f_live = uf >= Scalar(-1) && uf <= Scalar(1);
        for (Index t = 0; t < frames; ++t) {
          const Scalar* g = self.grad.data() + ((i * bins + f) * frames + t) * 2;
          if (f_live && g[0] != Scalar(0)) {
            gw[i * 4] += -g[0] / w[1];
            gw[i * 4 + 1] += -g[0] * uf / w[1];
          }
          const Scalar ut = (rt[t] - w[2]) / w[3];
          if (ut >= Scalar(-1) && ut <= Scalar(1) && g[1] != Scalar(0)) {
            gw[i * 4 + 2] += -g[1] / w[3];
            gw[i * 4 + 3] += -g[1] * ut / w[3];
          }
        }
      }
    }
  });
}

// Bilinear resampling of (n, c, F, T) maps on an (n, F, T, 2) grid. A grid
// with batch 1 is shared by every map.
template <typename Scalar>
Var<Scalar> grid_sample(const Var<Scalar>& maps, const Var<Scalar>& grid) {
  const auto& ms = maps->value.shape;
  if (ms.size() != 4) throw ShapeError("grid_sample: maps must be rank 4");
  const Index n = ms[0], c = ms[1], bins = ms[2], frames = ms[3];
  if (bins < 2 || frames < 2) throw ShapeError("grid_sample: need at least 2 bins and 2 frames");
  const auto& gs = grid->value.shape;
  if (gs.size() != 4 || (gs[0] != n && gs[0] != 1) || gs[1] != bins || gs[2] != frames || gs[3] != 2) {
    throw ShapeError("grid_sample: grid " + to_string(gs) + " does not match maps " + to_string(ms));
  }
  const bool shared = gs[0] == 1 && n != 1;
  const Index map_sz = c * bins * frames, grid_sz = bins * frames * 2;
  Tensor<Scalar> out(ms);
  for (Index i = 0; i < n; ++i) {
    tfscil::detail::grid_sample_forward(maps->value.ptr() + i * map_sz, c, bins, frames,
                                grid->value.ptr() + (shared ? 0 : i * grid_sz), out.ptr() + i * map_sz);
  }
  return make_node<Scalar>(std::move(out), {maps, grid}, [=](const Node<Scalar>& self) {
    Scalar* gin = maps->requires_grad ? maps->grad_buffer().data() : nullptr;
    Scalar* ggrid = grid->requires_grad ? grid->grad_buffer().data() : nullptr;
    for (Index i = 0; i < n; ++i) {
      const Index goff = shared ? 0 : i * grid_sz;
      tfscil::detail::grid_sample_backward(maps->value.ptr() + i * map_sz, c, bins, frames,
                                   grid->value.ptr() + goff, self.grad.data() + i * map_sz,
                                   gin ? gin + i * map_sz : nullptr, ggrid ? ggrid + goff : nullptr);
    }
  });
}

// maps + sign * (bias + tilt * r_f), bias/tilt read from columns 2/3 of ctx.
template <typename Scalar>
Var<Scalar> amplitude(const Var<Scalar>& maps, const Var<Scalar>& ctx, Scalar sign) {
  const auto& ms = maps->value.shape;
  if (ms.size() != 4) throw ShapeError("amplitude: maps must be rank 4");
  const Index n = ms[0], c = ms[1], bins = ms[2], frames = ms[3];
  require_shape(ctx->value.shape, {n, 4}, "amplitude context");
  const auto rf = freq_coords<Scalar>(bins);
  Tensor<Scalar> out = maps->value;
  for (Index i = 0; i < n; ++i) {
    const Scalar b = ctx->value[i * 4 + 2], s = ctx->value[i * 4 + 3];
    for (Index ch = 0; ch < c; ++ch) {
      for (Index f = 0; f < bins; ++f) {
        out.data.segment(((i * c + ch) * bins + f) * frames, frames) += sign * (b + s * rf[f]);
      }
    }
  }
  return make_node<Scalar>(std::move(out), {maps, ctx}, [=](const Node<Scalar>& self) {
    if (maps->requires_grad) maps->grad_buffer() += self.grad;
    if (!ctx->requires_grad) return;
    auto& gc = ctx->grad_buffer();
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        for (Index f = 0; f < bins; ++f) {
          const Scalar row = self.grad.segment(((i * c + ch) * bins + f) * frames, frames).sum();
          gc[i * 4 + 2] += sign * row;
          gc[i * 4 + 3] += sign * row * rf[f];
        }
      }
    }
  });
}

template <typename Scalar>
Var<Scalar> apply_transform(const Var<Scalar>& maps, const Var<Scalar>& ctx) {
  const Index bins = maps->value.dim(2), frames = maps->value.dim(3);
  auto warped = grid_sample(maps, make_grid(warp_params(ctx, false), bins, frames));
  return amplitude(warped, ctx, Scalar(1));
}

template <typename Scalar>
Var<Scalar> apply_inverse(const Var<Scalar>& maps, const Var<Scalar>& ctx) {
  const Index bins = maps->value.dim(2), frames = maps->value.dim(3);
  auto flat = amplitude(maps, ctx, Scalar(-1));
  return grid_sample(flat, make_grid(warp_params(ctx, true), bins, frames));
}

// Squashes raw head outputs (n, 4) into the bounds: delta by a scaled tanh,
// tau by a sigmoid mapped onto [tau_min, tau_max], bias and tilt by a hard
// clamp.
template <typename Scalar>
Var<Scalar> context_head(const Var<Scalar>& raw, const ContextBounds& bounds) {
  const Index n = raw->value.dim(0);
  require_shape(raw->value.shape, {n, 4}, "context_head");
  const Scalar dmax = Scalar(bounds.delta_max), tlo = Scalar(bounds.tau_min),
               tspan = Scalar(bounds.tau_max - bounds.tau_min), bmax = Scalar(bounds.bias_max),
               smax = Scalar(bounds.tilt_max);
  Tensor<Scalar> out({n, 4});
  for (Index i = 0; i < n; ++i) {
    const Scalar* h = raw->value.ptr() + i * 4;
    out[i * 4] = dmax * std::tanh(h[0]);
    out[i * 4 + 1] = tlo + tspan / (Scalar(1) + std::exp(-h[1]));
    out[i * 4 + 2] = std::clamp(h[2], -bmax, bmax);
    out[i * 4 + 3] = std::clamp(h[3], -smax, smax);
  }
  return make_node<Scalar>(std::move(out), {raw}, [=](const Node<Scalar>& self) {
    auto& g = raw->grad_buffer();
    for (Index i = 0; i < n; ++i) {
      const Scalar* h = raw->value.ptr() + i * 4;
      const Scalar th = std::tanh(h[0]);
      const Scalar sg = Scalar(1) / (Scalar(1) + std::exp(-h[1]));
      g[i * 4] += self.grad[i * 4] * dmax * (Scalar(1) - th * th);
      g[i * 4 + 1] += self.grad[i * 4 + 1] * tspan * sg * (Scalar(1) - sg);
      if (h[2] > -bmax && h[2] < bmax) g[i * 4 + 2] += self.grad[i * 4 + 2];
      if (h[3] > -smax && h[3] < smax) g[i * 4 + 3] += self.grad[i * 4 + 3];
    }
  });
}

// Mean over the batch of delta^2 + (log tau)^2 + bias^2 + tilt^2.
template <typename Scalar>
Var<Scalar> context_reg(const Var<Scalar>& ctx) {
  const Index n = ctx->value.dim(0);
  require_shape(ctx->value.shape, {n, 4}, "context_reg");
  Scalar total = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar* c = ctx->value.ptr() + i * 4;
    const Scalar lt = std::log(c[1]);
    total += c[0] * c[0] + lt * lt + c[2] * c[2] + c[3] * c[3];
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  return make_node<Scalar>(Tensor<Scalar>::filled({1}, total * inv_n), {ctx},
                           [ctx, n, inv_n](const Node<Scalar>& self) {
                             auto& g = ctx->grad_buffer();
                             const Scalar w = Scalar(2) * self.grad[0] * inv_n;
                             for (Index i = 0; i < n; ++i) {
                               const Scalar* c = ctx->value.ptr() + i * 4;
                               g[i * 4] += w * c[0];
                               g[i * 4 + 1] += w * std::log(c[1]) / c[1];
                               g[i * 4 + 2] += w * c[2];
                               g[i * 4 + 3] += w * c[3];
                             }
                           });
}

}  // namespace ad

// ---------------------------------------------------------------------------
// Single-spectrogram API. These evaluate the batched ops above on constant
// inputs so both paths share one implementation.

template <typename Scalar>
SampleGrid<Scalar> make_grid(const WarpParams& w, Index bins, Index frames) {
  if (bins < 2 || frames < 2) throw std::invalid_argument("make_grid: need F >= 2 and T >= 2");
  Tensor<Scalar> wt({1, 4});
  wt[0] = Scalar(w.freq_shift);
  wt[1] = Scalar(w.freq_scale);
  wt[2] = Scalar(w.time_shift);
  wt[3] = Scalar(w.time_scale);
  auto g = ad::make_grid(ad::constant(std::move(wt)), bins, frames);
  return {bins, frames, g->value.data};
}

template <typename Scalar>
SampleGrid<Scalar> make_grid(const ContextParams& c, Index bins, Index frames) {
  return make_grid<Scalar>(forward_warp(c), bins, frames);
}

template <typename Scalar>
Spectrogram<Scalar> grid_sample(const Spectrogram<Scalar>& m, const SampleGrid<Scalar>& g) {
  if (g.mel_bins != m.mel_bins || g.frames != m.frames) {
    throw ShapeError("grid_sample: grid shape does not match spectrogram");
  }
  auto out = ad::grid_sample(ad::constant(m.as_batch()), ad::constant(g.as_batch()));
  return Spectrogram<Scalar>::from_batch(out->value, 0);
}

template <typename Scalar>
Spectrogram<Scalar> apply_amplitude(const Spectrogram<Scalar>& m, double bias, double tilt) {
  const auto rf = freq_coords<Scalar>(m.mel_bins);
  Spectrogram<Scalar> out = m;
  for (Index c = 0; c < m.channels; ++c) {
    for (Index f = 0; f < m.mel_bins; ++f) {
      out.values.segment((c * m.mel_bins + f) * m.frames, m.frames) +=
          Scalar(bias) + Scalar(tilt) * rf[f];
    }
  }
  return out;
}

template <typename Scalar>
Spectrogram<Scalar> apply_transform(const Spectrogram<Scalar>& m, const ContextParams& c) {
  if (!(c.tau > 0)) throw std::domain_error("apply_transform: tau must be positive");
  auto out = ad::apply_transform(ad::constant(m.as_batch()),
                                 ad::constant(ad::context_tensor<Scalar>({c})));
  return Spectrogram<Scalar>::from_batch(out->value, 0);
}

template <typename Scalar>
Spectrogram<Scalar> apply_inverse(const Spectrogram<Scalar>& m, const ContextParams& c) {
  if (!(c.tau > 0)) throw std::domain_error("apply_inverse: tau must be positive");
  auto out = ad::apply_inverse(ad::constant(m.as_batch()),
                               ad::constant(ad::context_tensor<Scalar>({c})));
  return Spectrogram<Scalar>::from_batch(out->value, 0);
}

// Cells at each edge whose round trip passes through a clipped coordinate:
// ceil(|delta| (F-1) / 2) + 1 frequency bins, and for tau > 1 the frames
// mapped outside [-1, 1] by the inverse scaling, plus one.
struct InteriorMargins {
  Index bins = 0;
  Index frames = 0;
};

inline InteriorMargins roundtrip_margins(const ContextParams& c, Index bins, Index frames) {
  InteriorMargins m;
  m.bins = static_cast<Index>(std::ceil(std::abs(c.delta) * static_cast<double>(bins - 1) / 2.0)) + 1;
  const double spill = std::max(0.0, 1.0 - 1.0 / c.tau);
  m.frames = static_cast<Index>(std::ceil(spill * static_cast<double>(frames - 1) / 2.0)) + 1;
  return m;
}

// Mean absolute difference over the window that excludes the margins at
// both edges of each axis.
template <typename Scalar>
double interior_l1(const Spectrogram<Scalar>& a, const Spectrogram<Scalar>& b, InteriorMargins margin) {
  if (!a.same_shape(b)) throw ShapeError("interior_l1: shape mismatch");
  double total = 0;
  Index count = 0;
  for (Index c = 0; c < a.channels; ++c) {
    for (Index f = margin.bins; f < a.mel_bins - margin.bins; ++f) {
      for (Index t = margin.frames; t < a.frames - margin.frames; ++t) {
        total += std::abs(double(a(c, f, t)) - double(b(c, f, t)));
        ++count;
      }
    }
  }
  if (count == 0) throw std::invalid_argument("interior_l1: margins leave no interior");
  return total / static_cast<double>(count);
}

}  // namespace tfscil

#endif  // TFSCIL_TRANSFORM_HPP_
