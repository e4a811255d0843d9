#pragma once

#include <cmath>
#include <vector>

#include "artis/core.hpp"
#include "artis/ingest.hpp"

namespace artis {

struct FlowParams {
  double window_sigma = 1.5;
  int poly_n = 7;  // neighborhood radius; the window spans 2*poly_n+1 pixels
  int iterations = 3;
  int smoothing_radius = 7;
  int threads = 0;
};

/// Per-pixel quadratic signal model f(p + d) ~ c + b.d + d'Ad with
/// A = [[axx, axy], [axy, ayy]], b = (bx, by), fit by Gaussian-weighted
/// least squares over the (2n+1)^2 neighborhood.
struct PolyExpansion {
  Matd c, bx, by, axx, ayy, axy;

  int rows() const { return c.rows(); }
  int cols() const { return c.cols(); }
};

struct FlowField {
  Matf magnitude;  // pixels/frame, >= 0
  Matf direction;  // radians; retained but unused downstream
};

namespace detail {

constexpr double kTikhonov = 1e-6;

struct ExpansionKernel {
  std::vector<double> g, xg, xxg;  // indexed by k + n
  int n = 0;
  // inverse of the Gram block coupling the (1, x^2, y^2) basis; the Gram
  // matrix depends only on the weights, never on image content, so it is
  // always well conditioned and needs no damping (the flow solve does).
  double inv3[3][3];
  double inv_s2 = 0;     // solves the x and y projections
  double inv_cross = 0;  // solves the xy projection

  explicit ExpansionKernel(double sigma, int n_) : n(n_) {
    const int len = 2 * n + 1;
    g.resize(len);
    xg.resize(len);
    xxg.resize(len);
    double sum = 0;
    for (int k = -n; k <= n; ++k) {
      g[k + n] = std::exp(-0.5 * k * k / (sigma * sigma));
      sum += g[k + n];
    }
    double s2 = 0, s4 = 0;
    for (int k = -n; k <= n; ++k) {
      g[k + n] /= sum;
      xg[k + n] = k * g[k + n];
      xxg[k + n] = static_cast<double>(k) * k * g[k + n];
      s2 += static_cast<double>(k) * k * g[k + n];
      s4 += static_cast<double>(k) * k * k * k * g[k + n];
    }
    // Gram matrix of (1, x^2, y^2) under the separable weight g(x)g(y):
    //   [ 1    s2     s2   ]
    //   [ s2   s4     s2^2 ]
    //   [ s2   s2^2   s4   ]
    double m[3][3] = {{1, s2, s2}, {s2, s4, s2 * s2}, {s2, s2 * s2, s4}};
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    double id = 1.0 / det;
    inv3[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * id;
    inv3[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
    inv3[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
    inv3[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * id;
    inv3[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
    inv3[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
    inv3[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * id;
    inv3[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
    inv3[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
    inv_s2 = 1.0 / s2;
    inv_cross = 1.0 / (s2 * s2);
  }
};

/// Normalized box mean with replicate-edge padding, exact via prefix sums.
inline Matd box_mean(const Matd& m, int radius) {
  if (radius <= 0) return m;
  const int h = m.rows(), w = m.cols(), r = radius;
  const int ph = h + 2 * r, pw = w + 2 * r;
  // prefix(i, j) = sum of padded[0..i)[0..j)
  std::vector<double> prefix(static_cast<std::size_t>(ph + 1) * (pw + 1), 0.0);
  auto at = [&](int i, int j) -> double& {
    return prefix[static_cast<std::size_t>(i) * (pw + 1) + j];
  };
  for (int i = 0; i < ph; ++i) {
    double rowsum = 0;
    int sy = clamp_int(i - r, 0, h - 1);
    for (int j = 0; j < pw; ++j) {
      int sx = clamp_int(j - r, 0, w - 1);
      rowsum += m(sy, sx);
      at(i + 1, j + 1) = at(i, j + 1) + rowsum;
    }
  }
  const double inv_area = 1.0 / (static_cast<double>(2 * r + 1) * (2 * r + 1));
  Matd out(h, w);
  for (int y = 0; y < h; ++y) {
    const int i0 = y, i1 = y + 2 * r + 1;
    for (int x = 0; x < w; ++x) {
      const int j0 = x, j1 = x + 2 * r + 1;
      out(y, x) = (at(i1, j1) - at(i0, j1) - at(i1, j0) + at(i0, j0)) * inv_area;
    }
  }
  return out;
}

}  // namespace detail

inline PolyExpansion polynomial_expansion(const Matf& img, double window_sigma = 1.5,
                                          int poly_n = 7, int threads = 0) {
  if (poly_n < 3 || poly_n % 2 == 0)
    throw ValidationError("polynomial_expansion: poly_n must be odd and >= 3");
  if (window_sigma <= 0) throw ValidationError("polynomial_expansion: sigma must be > 0");
  if (img.rows() <= poly_n || img.cols() <= poly_n)
    throw ValidationError("polynomial_expansion: frame not larger than the window");

  const int h = img.rows(), w = img.cols(), n = poly_n;
  const detail::ExpansionKernel ker(window_sigma, n);

  PolyExpansion out;
  out.c = Matd(h, w);
  out.bx = Matd(h, w);
  out.by = Matd(h, w);
  out.axx = Matd(h, w);
  out.ayy = Matd(h, w);
  out.axy = Matd(h, w);

  // Vertical pass: correlate each column with {g, y*g, y^2*g} (replicate edges).
  Matd t0(h, w), t1(h, w), t2(h, w);
  parallel_for(0, h, threads, [&](int y) {
    double* r0 = t0.row(y);
    double* r1 = t1.row(y);
    double* r2 = t2.row(y);
    for (int x = 0; x < w; ++x) r0[x] = r1[x] = r2[x] = 0.0;
    for (int k = -n; k <= n; ++k) {
      const float* src = img.row(clamp_int(y + k, 0, h - 1));
      const double g0 = ker.g[k + n], g1 = ker.xg[k + n], g2 = ker.xxg[k + n];
      for (int x = 0; x < w; ++x) {
        const double v = src[x];
        r0[x] += g0 * v;
        r1[x] += g1 * v;
        r2[x] += g2 * v;
      }
    }
  });

  // Horizontal pass: project onto the six basis functions and solve.
  parallel_for(0, h, threads, [&](int y) {
    const double* r0 = t0.row(y);
    const double* r1 = t1.row(y);
    const double* r2 = t2.row(y);
    for (int x = 0; x < w; ++x) {
      double p1 = 0, px = 0, py = 0, pxx = 0, pyy = 0, pxy = 0;
      for (int k = -n; k <= n; ++k) {
        const int xx = clamp_int(x + k, 0, w - 1);
        const double g0 = ker.g[k + n], g1 = ker.xg[k + n], g2 = ker.xxg[k + n];
        p1 += g0 * r0[xx];
        px += g1 * r0[xx];
        pxx += g2 * r0[xx];
        py += g0 * r1[xx];
        pxy += g1 * r1[xx];
        pyy += g0 * r2[xx];
      }
      out.bx(y, x) = px * ker.inv_s2;
      out.by(y, x) = py * ker.inv_s2;
      out.axy(y, x) = 0.5 * pxy * ker.inv_cross;
      out.c(y, x) = ker.inv3[0][0] * p1 + ker.inv3[0][1] * pxx + ker.inv3[0][2] * pyy;
      out.axx(y, x) = ker.inv3[1][0] * p1 + ker.inv3[1][1] * pxx + ker.inv3[1][2] * pyy;
      out.ayy(y, x) = ker.inv3[2][0] * p1 + ker.inv3[2][1] * pxx + ker.inv3[2][2] * pyy;
    }
  });
  return out;
}

inline PolyExpansion polynomial_expansion(const Frame& f, double window_sigma = 1.5,
                                          int poly_n = 7, int threads = 0) {
  return polynomial_expansion(f.pixels, window_sigma, poly_n, threads);
}

/// Two-frame displacement estimate from the expansions of both frames:
/// with A = (A1 + A2)/2 and db = (b1 - b2)/2 the model gives A d = db; the
/// per-pixel normal equations are averaged over a box neighborhood and the
/// estimate is refined over `iterations` warp passes.
inline FlowField estimate_flow(const Matf& prev, const Matf& next, const FlowParams& p = {}) {
  if (!prev.same_size(next)) throw ValidationError("estimate_flow: dimension mismatch");
  const int h = prev.rows(), w = prev.cols();

  const PolyExpansion e1 = polynomial_expansion(prev, p.window_sigma, p.poly_n, p.threads);
  const PolyExpansion e2 = polynomial_expansion(next, p.window_sigma, p.poly_n, p.threads);

  Matd fx(h, w, 0.0), fy(h, w, 0.0);
  const double l = detail::kTikhonov;
  const int iters = std::max(1, p.iterations);

  Matd g00(h, w), g01(h, w), g11(h, w), h0(h, w), h1(h, w);
  for (int it = 0; it < iters; ++it) {
    parallel_for(0, h, p.threads, [&](int y) {
      for (int x = 0; x < w; ++x) {
        const double dx = fx(y, x), dy = fy(y, x);
        const int sx = clamp_int(static_cast<int>(std::lround(x + dx)), 0, w - 1);
        const int sy = clamp_int(static_cast<int>(std::lround(y + dy)), 0, h - 1);
        const double axx = 0.5 * (e1.axx(y, x) + e2.axx(sy, sx));
        const double ayy = 0.5 * (e1.ayy(y, x) + e2.ayy(sy, sx));
        const double axy = 0.5 * (e1.axy(y, x) + e2.axy(sy, sx));
        const double dbx = 0.5 * (e1.bx(y, x) - e2.bx(sy, sx)) + axx * dx + axy * dy;
        const double dby = 0.5 * (e1.by(y, x) - e2.by(sy, sx)) + axy * dx + ayy * dy;
        g00(y, x) = axx * axx + axy * axy;
        g01(y, x) = (axx + ayy) * axy;
        g11(y, x) = ayy * ayy + axy * axy;
        h0(y, x) = axx * dbx + axy * dby;
        h1(y, x) = axy * dbx + ayy * dby;
      }
    });
    const Matd sg00 = detail::box_mean(g00, p.smoothing_radius);
    const Matd sg01 = detail::box_mean(g01, p.smoothing_radius);
    const Matd sg11 = detail::box_mean(g11, p.smoothing_radius);
    const Matd sh0 = detail::box_mean(h0, p.smoothing_radius);
    const Matd sh1 = detail::box_mean(h1, p.smoothing_radius);
    parallel_for(0, h, p.threads, [&](int y) {
      for (int x = 0; x < w; ++x) {
        const double a = sg00(y, x) + l, b = sg01(y, x), c = sg11(y, x) + l;
        const double det = a * c - b * b;
        fx(y, x) = (c * sh0(y, x) - b * sh1(y, x)) / det;
        fy(y, x) = (a * sh1(y, x) - b * sh0(y, x)) / det;
      }
    });
  }

  FlowField field;
  field.magnitude = Matf(h, w);
  field.direction = Matf(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      field.magnitude(y, x) = static_cast<float>(std::hypot(fx(y, x), fy(y, x)));
      field.direction(y, x) = static_cast<float>(std::atan2(fy(y, x), fx(y, x)));
    }
  return field;
}

inline FlowField estimate_flow(const Frame& prev, const Frame& next, const FlowParams& p = {}) {
  return estimate_flow(prev.pixels, next.pixels, p);
}

}  // namespace artis
