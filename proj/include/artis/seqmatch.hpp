#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/fhdof.hpp"
#include "artis/ingest.hpp"

namespace artis {

enum class Polarity { distance, similarity };
enum class Stage { raw, enhanced, thresholded };

/// m x n pairwise score matrix between template (rows) and observation
/// (columns). Polarity is carried explicitly: seqmatch works on distances
/// (lower = better), tpdf on similarities (higher = better).
struct SimilarityMatrix {
  Matd scores;
  Polarity polarity = Polarity::distance;
  Stage stage = Stage::raw;

  int m() const { return scores.rows(); }
  int n() const { return scores.cols(); }
};

struct Correspondence {
  int template_index = 0;
  int observation_index = 0;
  double score = 0;
};

/// A run of correspondences: observation indices strictly increase, template
/// indices never decrease. `velocity` is the slope of the matched line.
struct MatchSegment {
  std::vector<Correspondence> pairs;
  double score = 0;
  double velocity = 1.0;
};

// ---------------------------------------------------------------------------

/// Sum-of-squared-differences matrix between two descriptor sequences,
/// normalized into [0,1] by the matrix maximum (SSD is bounded below by 0).
inline SimilarityMatrix ssd_matrix(const FeatureVectorSequence& temp,
                                   const FeatureVectorSequence& obs, int threads = 0) {
  if (temp.vectors.empty() || obs.vectors.empty())
    throw ValidationError("ssd_matrix: empty sequence");
  if (temp.dim != obs.dim) throw ValidationError("ssd_matrix: dimension mismatch");
  const int m = static_cast<int>(temp.size());
  const int n = static_cast<int>(obs.size());
  const int dim = temp.dim;
  for (const auto& v : temp.vectors)
    if (static_cast<int>(v.size()) != dim)
      throw ValidationError("ssd_matrix: ragged template vectors");
  for (const auto& v : obs.vectors)
    if (static_cast<int>(v.size()) != dim)
      throw ValidationError("ssd_matrix: ragged observation vectors");

  SimilarityMatrix s;
  s.polarity = Polarity::distance;
  s.stage = Stage::raw;
  s.scores = Matd(m, n);
  parallel_for(0, m, threads, [&](int i) {
    const float* a = temp.vectors[i].data();
    for (int j = 0; j < n; ++j) {
      const float* b = obs.vectors[j].data();
      double acc = 0;
      for (int d = 0; d < dim; ++d) {
        const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        acc += diff * diff;
      }
      s.scores(i, j) = acc;
    }
  });
  const double hi = s.scores.max_value();
  if (hi > 0) {
    for (double& v : s.scores.data()) v /= hi;
  }
  return s;
}

inline SimilarityMatrix ssd_matrix(const DescriptorSequence& temp,
                                   const DescriptorSequence& obs, int threads = 0) {
  return ssd_matrix(to_feature_vectors(temp), to_feature_vectors(obs), threads);
}

/// Local contrast enhancement: each entry is standardized against the mean
/// and population sigma of the window x window square patch centered on it.
/// Patches are clipped at the matrix edges; sigma < 1e-9 yields 0.
inline SimilarityMatrix enhance(const SimilarityMatrix& s, int window = 11) {
  if (s.stage != Stage::raw) throw ValidationError("enhance: expects a raw matrix");
  if (window < 3 || window % 2 == 0)
    throw ValidationError("enhance: window must be odd and >= 3");
  const int m = s.m(), n = s.n(), r = window / 2;

  // Prefix sums of globally centered scores for O(1) patch statistics; the
  // centering keeps E[x^2] - mean^2 from cancelling on near-constant patches.
  double global_sum = 0;
  for (double v : s.scores.data()) global_sum += v;
  const double global_mean = global_sum / static_cast<double>(s.scores.size());

  std::vector<double> p1(static_cast<std::size_t>(m + 1) * (n + 1), 0.0);
  std::vector<double> p2(p1.size(), 0.0);
  auto a1 = [&](int i, int j) -> double& { return p1[static_cast<std::size_t>(i) * (n + 1) + j]; };
  auto a2 = [&](int i, int j) -> double& { return p2[static_cast<std::size_t>(i) * (n + 1) + j]; };
  for (int i = 0; i < m; ++i) {
    double row1 = 0, row2 = 0;
    for (int j = 0; j < n; ++j) {
      const double v = s.scores(i, j) - global_mean;
      row1 += v;
      row2 += v * v;
      a1(i + 1, j + 1) = a1(i, j + 1) + row1;
      a2(i + 1, j + 1) = a2(i, j + 1) + row2;
    }
  }

  SimilarityMatrix out;
  out.polarity = s.polarity;
  out.stage = Stage::enhanced;
  out.scores = Matd(m, n);
  for (int i = 0; i < m; ++i) {
    const int i0 = std::max(0, i - r), i1 = std::min(m, i + r + 1);
    for (int j = 0; j < n; ++j) {
      const int j0 = std::max(0, j - r), j1 = std::min(n, j + r + 1);
      const double cnt = static_cast<double>(i1 - i0) * (j1 - j0);
      const double sum = a1(i1, j1) - a1(i0, j1) - a1(i1, j0) + a1(i0, j0);
      const double sum2 = a2(i1, j1) - a2(i0, j1) - a2(i1, j0) + a2(i0, j0);
      const double mean = sum / cnt;
      const double var = std::max(0.0, sum2 / cnt - mean * mean);
      const double sigma = std::sqrt(var);
      out.scores(i, j) =
          sigma < 1e-9 ? 0.0 : (s.scores(i, j) - global_mean - mean) / sigma;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct LineSearchParams {
  int ds = 10;
  double v_min = 0.8;
  double v_max = 1.25;
  double v_step = 0.05;
  double uniqueness_mu = 0.95;
  int window_exclude = 10;
  int threads = 0;
};

/// One accepted line endpoint per observation column.
struct ColumnMatch {
  int template_index = 0;
  int observation_index = 0;
  double score = 0;     // min-shifted line sum, >= 0, lower = better
  double velocity = 1.0;
};

/// For each observation column j >= ds, sweep line slopes over the trailing
/// ds-column window ending at j; a line of slope v ending at template row i
/// accumulates the enhanced distances at (i - v*(ds-k), j-ds+k), k = 0..ds.
/// The minimum-sum row i* is accepted iff best <= mu * runner-up, where the
/// runner-up is the best line farther than window_exclude rows from i*.
/// Sums are taken over the min-shifted matrix so they are non-negative and
/// the uniqueness ratio is well defined.
inline std::vector<ColumnMatch> sweep_columns(const SimilarityMatrix& s_enh,
                                              const LineSearchParams& p) {
  if (s_enh.stage != Stage::enhanced)
    throw ValidationError("sweep_columns: expects an enhanced matrix");
  if (s_enh.polarity != Polarity::distance)
    throw ValidationError("sweep_columns: expects distance polarity");
  if (p.ds < 2) throw ValidationError("sweep_columns: ds must be >= 2");
  if (!(p.v_min > 0) || p.v_min > p.v_max || !(p.v_step > 0))
    throw ValidationError("sweep_columns: invalid velocity range");

  const int m = s_enh.m(), n = s_enh.n(), ds = p.ds;
  if (n <= ds) {
    std::cerr << "warning: observation shorter than the ds window, no matches\n";
    return {};
  }

  std::vector<double> velocities;
  for (double v = p.v_min; v <= p.v_max + 1e-9; v += p.v_step) velocities.push_back(v);
  // row offsets of each line point relative to the endpoint row, per velocity
  std::vector<std::vector<int>> offsets(velocities.size());
  for (std::size_t vi = 0; vi < velocities.size(); ++vi) {
    offsets[vi].resize(ds + 1);
    for (int k = 0; k <= ds; ++k)
      offsets[vi][k] = static_cast<int>(std::lround(velocities[vi] * (ds - k)));
  }

  const double shift = s_enh.scores.min_value();
  const double shift_total = shift * (ds + 1);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<ColumnMatch> accepted(n - ds);
  std::vector<char> has_match(n - ds, 0);
  parallel_for(ds, n, p.threads, [&](int j) {
    std::vector<double> col_score(m, inf);
    std::vector<double> col_vel(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double best = inf;
      double best_v = 0;
      for (std::size_t vi = 0; vi < velocities.size(); ++vi) {
        const auto& off = offsets[vi];
        if (i - off[0] < 0) continue;  // steepest point leaves the matrix
        double acc = 0;
        for (int k = 0; k <= ds; ++k) acc += s_enh.scores(i - off[k], j - ds + k);
        if (acc < best) {
          best = acc;
          best_v = velocities[vi];
        }
      }
      col_score[i] = best;
      col_vel[i] = best_v;
    }
    int best_i = -1;
    for (int i = 0; i < m; ++i)
      if (best_i < 0 || col_score[i] < col_score[best_i]) best_i = i;
    if (best_i < 0 || col_score[best_i] == inf) return;
    double runner = inf;
    for (int i = 0; i < m; ++i) {
      if (std::abs(i - best_i) <= p.window_exclude) continue;
      runner = std::min(runner, col_score[i]);
    }
    const double best_shifted = col_score[best_i] - shift_total;
    const double runner_shifted = runner - shift_total;
    if (runner != inf && !(best_shifted <= p.uniqueness_mu * runner_shifted)) return;
    accepted[j - ds] = {best_i, j, best_shifted, col_vel[best_i]};
    has_match[j - ds] = 1;
  });

  std::vector<ColumnMatch> out;
  for (int k = 0; k < n - ds; ++k)
    if (has_match[k]) out.push_back(accepted[k]);
  return out;
}

/// Chain accepted columns into segments: consecutive observation columns
/// whose template rows advance by 0 .. ceil(v_max) share a segment, keeping
/// template indices non-decreasing within every segment.
inline std::vector<MatchSegment> chain_columns(const std::vector<ColumnMatch>& cols,
                                               double v_max) {
  const int max_step = static_cast<int>(std::ceil(v_max));
  std::vector<MatchSegment> segments;
  for (const ColumnMatch& c : cols) {
    bool extend = false;
    if (!segments.empty() && !segments.back().pairs.empty()) {
      const Correspondence& prev = segments.back().pairs.back();
      const int di = c.template_index - prev.template_index;
      extend = c.observation_index == prev.observation_index + 1 && di >= 0 &&
               di <= max_step;
    }
    if (!extend) segments.emplace_back();
    segments.back().pairs.push_back({c.template_index, c.observation_index, c.score});
    segments.back().score += c.score;
    segments.back().velocity += c.velocity;
  }
  for (MatchSegment& seg : segments) {
    const double cnt = static_cast<double>(seg.pairs.size());
    seg.score /= cnt;
    seg.velocity /= cnt;
  }
  return segments;
}

inline std::vector<MatchSegment> line_search(const SimilarityMatrix& s_enh,
                                             const LineSearchParams& p = {}) {
  return chain_columns(sweep_columns(s_enh, p), p.v_max);
}

// ---------------------------------------------------------------------------
// matches CSV: template_index,observation_index,score,segment_id

inline void save_matches_csv(const std::vector<MatchSegment>& segments,
                             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "template_index,observation_index,score,segment_id\n";
  char buf[64];
  for (std::size_t id = 0; id < segments.size(); ++id) {
    for (const Correspondence& c : segments[id].pairs) {
      std::snprintf(buf, sizeof(buf), "%.9g", c.score);
      os << c.template_index << ',' << c.observation_index << ',' << buf << ',' << id
         << '\n';
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

inline std::vector<MatchSegment> load_matches_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty matches file: " + path);
  if (trim(line) != "template_index,observation_index,score,segment_id")
    throw ValidationError("unexpected matches CSV header in " + path);
  std::vector<MatchSegment> segments;
  long last_id = -1;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 4) throw ValidationError("malformed matches row in " + path);
    Correspondence c;
    c.template_index = std::stoi(fields[0]);
    c.observation_index = std::stoi(fields[1]);
    c.score = std::stod(fields[2]);
    long id = std::stol(fields[3]);
    if (id != last_id) {
      segments.emplace_back();
      last_id = id;
    }
    segments.back().pairs.push_back(c);
  }
  return segments;
}

}  // namespace artis
