#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/ingest.hpp"
#include "artis/optflow.hpp"

namespace artis {

enum class GridKind { FH, DOF, FHDOF, PATCHNORM };

/// Per-frame 2-D descriptor: keypoint density (FH), flow magnitude (DOF),
/// their cellwise product (FHDOF), or a patch-normalized thumbnail.
struct FeatureGrid {
  Matf cells;
  GridKind kind = GridKind::FH;

  int grid_w() const { return cells.cols(); }
  int grid_h() const { return cells.rows(); }
};

struct DescriptorSequence {
  std::vector<FeatureGrid> grids;
  GridKind kind = GridKind::FHDOF;
  std::string source_id;

  std::size_t size() const { return grids.size(); }
};

struct Keypoint {
  int x = 0;
  int y = 0;

  bool operator==(const Keypoint&) const = default;
};

// ---------------------------------------------------------------------------
// Box-filter determinant-of-Hessian detector (detection stage only, no
// descriptors). Responses are computed on an integral image at the fixed
// box sizes {9, 15, 21}; a keypoint is a thresholded 3x3 spatial maximum.

namespace detail {

/// integral(r, c) = sum of img/255 over rows [0, r) x cols [0, c).
inline Matd integral_image(const Matf& img) {
  const int h = img.rows(), w = img.cols();
  Matd I(h + 1, w + 1, 0.0);
  for (int y = 0; y < h; ++y) {
    double rowsum = 0;
    const float* src = img.row(y);
    for (int x = 0; x < w; ++x) {
      rowsum += src[x] / 255.0;
      I(y + 1, x + 1) = I(y, x + 1) + rowsum;
    }
  }
  return I;
}

/// Sum over rows [r0, r0+rows) x cols [c0, c0+cols); must lie inside the image.
inline double box_sum(const Matd& I, int r0, int c0, int rows, int cols) {
  return I(r0 + rows, c0 + cols) - I(r0, c0 + cols) - I(r0 + rows, c0) + I(r0, c0);
}

/// Determinant-of-Hessian response for one filter size; entries outside the
/// valid margin stay 0. Valid iff margin <= y < h-margin (same for x).
inline Matd hessian_response(const Matd& I, int filter_size) {
  const int h = I.rows() - 1, w = I.cols() - 1;
  const int L = filter_size;
  const int b = (L - 1) / 2;
  const int lobe = L / 3;
  const double inv_area = 1.0 / (static_cast<double>(L) * L);
  Matd resp(h, w, 0.0);
  if (h < L || w < L) return resp;
  for (int y = b; y < h - b; ++y) {
    for (int x = b; x < w - b; ++x) {
      double dxx = box_sum(I, y - lobe + 1, x - b, 2 * lobe - 1, L) -
                   3.0 * box_sum(I, y - lobe + 1, x - lobe / 2, 2 * lobe - 1, lobe);
      double dyy = box_sum(I, y - b, x - lobe + 1, L, 2 * lobe - 1) -
                   3.0 * box_sum(I, y - lobe / 2, x - lobe + 1, lobe, 2 * lobe - 1);
      double dxy = box_sum(I, y - lobe, x + 1, lobe, lobe) +
                   box_sum(I, y + 1, x - lobe, lobe, lobe) -
                   box_sum(I, y - lobe, x - lobe, lobe, lobe) -
                   box_sum(I, y + 1, x + 1, lobe, lobe);
      dxx *= inv_area;
      dyy *= inv_area;
      dxy *= inv_area;
      resp(y, x) = dxx * dyy - 0.81 * dxy * dxy;
    }
  }
  return resp;
}

constexpr int kHessianBoxSizes[3] = {9, 15, 21};

}  // namespace detail

/// Keypoint positions where the determinant-of-Hessian response exceeds the
/// threshold and is a strict 3x3 spatial maximum at one of the detection
/// scales. Positions detected at several scales are reported once.
inline std::vector<Keypoint> detect_keypoints(const Matf& frame,
                                              double hessian_threshold = 4e-4) {
  if (frame.empty()) throw ValidationError("detect_keypoints: empty frame");
  const int h = frame.rows(), w = frame.cols();
  const Matd I = detail::integral_image(frame);

  std::vector<Keypoint> points;
  for (int L : detail::kHessianBoxSizes) {
    const int margin = (L - 1) / 2 + 1;
    if (h < 2 * margin + 1 || w < 2 * margin + 1) continue;
    const Matd resp = detail::hessian_response(I, L);
    for (int y = margin; y < h - margin; ++y) {
      for (int x = margin; x < w - margin; ++x) {
        const double v = resp(y, x);
        if (!(v > hessian_threshold)) continue;
        bool is_max = true;
        for (int dy = -1; dy <= 1 && is_max; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (resp(y + dy, x + dx) >= v) {
              is_max = false;
              break;
            }
          }
        if (is_max) points.push_back({x, y});
      }
    }
  }
  std::sort(points.begin(), points.end(),
            [](const Keypoint& a, const Keypoint& b) {
              return a.y != b.y ? a.y < b.y : a.x < b.x;
            });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

inline std::vector<Keypoint> detect_keypoints(const Frame& f, double hessian_threshold = 4e-4) {
  return detect_keypoints(f.pixels, hessian_threshold);
}

// ---------------------------------------------------------------------------

/// Count keypoints into patch x patch cells; the grid is ceil(h/patch) rows
/// by ceil(w/patch) cols so ragged border cells are kept.
inline FeatureGrid feature_histogram(const std::vector<Keypoint>& keypoints, int frame_w,
                                     int frame_h, int patch) {
  if (patch < 1) throw ValidationError("feature_histogram: patch must be >= 1");
  const int gw = (frame_w + patch - 1) / patch;
  const int gh = (frame_h + patch - 1) / patch;
  FeatureGrid grid;
  grid.kind = GridKind::FH;
  grid.cells = Matf(gh, gw, 0.0f);
  for (const Keypoint& kp : keypoints) {
    if (kp.x < 0 || kp.x >= frame_w || kp.y < 0 || kp.y >= frame_h)
      throw ValidationError("feature_histogram: keypoint outside frame bounds");
    grid.cells(kp.y / patch, kp.x / patch) += 1.0f;
  }
  return grid;
}

/// Schur product of the density histogram and the flow magnitude; cells with
/// zero motion vanish.
inline FeatureGrid fuse(const FeatureGrid& fh, const FeatureGrid& flow_mag) {
  if (!fh.cells.same_size(flow_mag.cells))
    throw ValidationError("fuse: grid dimension mismatch");
  FeatureGrid out;
  out.kind = GridKind::FHDOF;
  out.cells = Matf(fh.grid_h(), fh.grid_w());
  for (std::size_t k = 0; k < out.cells.size(); ++k)
    out.cells.data()[k] = fh.cells.data()[k] * flow_mag.cells.data()[k];
  return out;
}

struct FhdofParams {
  int patch = 30;
  double hessian_threshold = 4e-4;
  FlowParams flow;
  // 0 means flow runs at the input resolution; otherwise frames are
  // downscaled to this size before flow estimation.
  int flow_work_width = 0;
  int flow_work_height = 0;
  int threads = 0;
};

/// One FHDOF grid per consecutive frame pair (n-1 grids): the density
/// histogram of the pair's first frame fused with the pair's flow magnitude
/// rescaled to the grid size.
inline DescriptorSequence build_descriptor_sequence(const FrameSequence& seq,
                                                    const FhdofParams& p = {}) {
  if (seq.size() < 2)
    throw ValidationError("build_descriptor_sequence: need at least 2 frames");
  const int n_pairs = static_cast<int>(seq.size()) - 1;
  const int gw = (seq.width + p.patch - 1) / p.patch;
  const int gh = (seq.height + p.patch - 1) / p.patch;
  const bool rescale_flow_input =
      p.flow_work_width > 0 && p.flow_work_height > 0 &&
      (p.flow_work_width < seq.width || p.flow_work_height < seq.height);

  DescriptorSequence out;
  out.kind = GridKind::FHDOF;
  out.source_id = seq.source_id;
  out.grids.resize(n_pairs);

  FlowParams flow_params = p.flow;
  flow_params.threads = 1;  // parallelism lives at the frame-pair level
  parallel_for(0, n_pairs, p.threads, [&](int i) {
    const Frame& a = seq.frames[i];
    const Frame& b = seq.frames[i + 1];
    FeatureGrid fh = feature_histogram(detect_keypoints(a, p.hessian_threshold), seq.width,
                                       seq.height, p.patch);
    FlowField flow =
        rescale_flow_input
            ? estimate_flow(downscale(a.pixels, p.flow_work_width, p.flow_work_height),
                            downscale(b.pixels, p.flow_work_width, p.flow_work_height),
                            flow_params)
            : estimate_flow(a.pixels, b.pixels, flow_params);
    FeatureGrid dof;
    dof.kind = GridKind::DOF;
    dof.cells = downscale(flow.magnitude, gw, gh);
    out.grids[i] = fuse(fh, dof);
  });
  return out;
}

/// Downscaled, blockwise-standardized frames: each norm_patch x norm_patch
/// block is shifted to zero mean and unit variance; near-constant blocks
/// (sigma < 1e-6) become all-zero. One grid per frame.
inline DescriptorSequence patchnorm_descriptor(const FrameSequence& seq, int grid_w = 64,
                                               int grid_h = 36, int norm_patch = 8,
                                               int threads = 0) {
  if (seq.size() < 1) throw ValidationError("patchnorm_descriptor: empty sequence");
  if (norm_patch < 1) throw ValidationError("patchnorm_descriptor: norm_patch must be >= 1");
  DescriptorSequence out;
  out.kind = GridKind::PATCHNORM;
  out.source_id = seq.source_id;
  out.grids.resize(seq.size());
  parallel_for(0, static_cast<int>(seq.size()), threads, [&](int i) {
    Matf small = downscale(seq.frames[i].pixels, grid_w, grid_h);
    Matf norm(grid_h, grid_w, 0.0f);
    for (int by = 0; by < grid_h; by += norm_patch) {
      for (int bx = 0; bx < grid_w; bx += norm_patch) {
        const int bh = std::min(norm_patch, grid_h - by);
        const int bw = std::min(norm_patch, grid_w - bx);
        double sum = 0, sum2 = 0;
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw; ++x) {
            const double v = small(by + y, bx + x);
            sum += v;
            sum2 += v * v;
          }
        const double cnt = static_cast<double>(bh) * bw;
        const double mean = sum / cnt;
        const double var = std::max(0.0, sum2 / cnt - mean * mean);
        const double sigma = std::sqrt(var);
        if (sigma < 1e-6) continue;  // block stays zero
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw; ++x)
            norm(by + y, bx + x) =
                static_cast<float>((small(by + y, bx + x) - mean) / sigma);
      }
    }
    FeatureGrid g;
    g.kind = GridKind::PATCHNORM;
    g.cells = std::move(norm);
    out.grids[i] = std::move(g);
  });
  return out;
}

// ---------------------------------------------------------------------------

/// Flatten a descriptor sequence row-major into ARTV-compatible vectors.
inline FeatureVectorSequence to_feature_vectors(const DescriptorSequence& desc) {
  FeatureVectorSequence out;
  out.source_id = desc.source_id;
  if (desc.grids.empty()) return out;
  out.dim = desc.grids.front().grid_w() * desc.grids.front().grid_h();
  out.vectors.reserve(desc.size());
  for (const FeatureGrid& g : desc.grids) {
    if (static_cast<int>(g.cells.size()) != out.dim)
      throw ValidationError("to_feature_vectors: heterogeneous grid sizes");
    out.vectors.push_back(g.cells.data());
  }
  return out;
}

}  // namespace artis
