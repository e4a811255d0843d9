#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/ingest.hpp"
#include "artis/seqmatch.hpp"

namespace artis {

enum class PoolMethod { approx, ranksvm };

inline PoolMethod parse_pool_method(const std::string& s) {
  if (s == "approx") return PoolMethod::approx;
  if (s == "ranksvm") return PoolMethod::ranksvm;
  throw ValidationError("unknown pooling method: " + s);
}

/// Rank-pooled sliding-window descriptors p_1 .. p_{n-W}.
struct PooledSequence {
  std::vector<std::vector<double>> pooled;
  int window = 0;
  PoolMethod method = PoolMethod::approx;

  std::size_t size() const { return pooled.size(); }
  int dim() const { return pooled.empty() ? 0 : static_cast<int>(pooled.front().size()); }
};

struct Candidate {
  int i = 0;
  int j = 0;
  double similarity = 0;
};

/// Matrix entries whose similarity strictly exceeds the adaptive threshold.
struct CandidateSet {
  std::vector<Candidate> pairs;
  double threshold = 0;
};

struct RankSvmParams {
  double lambda = 0.01;
  int iterations = 300;
};

// ---------------------------------------------------------------------------
// rank pooling

namespace detail {

inline double ranking_objective(const std::vector<double>& u,
                                const std::vector<std::vector<double>>& diffs,
                                double lambda) {
  double obj = lambda * std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
  for (const auto& d : diffs) {
    const double margin = 1.0 - std::inner_product(u.begin(), u.end(), d.begin(), 0.0);
    if (margin > 0) obj += margin;
  }
  return obj;
}

/// Exact minimizer of J(s) = lambda*s^2*|u|^2 + sum max(0, 1 - s*g_p) over
/// s >= 0, where g_p = u.d_p. J is piecewise quadratic with breakpoints at
/// 1/g_p; every interval vertex and breakpoint is a candidate.
inline double optimal_scale(const std::vector<double>& dots, double lambda_norm2) {
  if (lambda_norm2 <= 0) return 1.0;
  std::vector<double> breaks = {0.0};
  for (double g : dots)
    if (g > 0) breaks.push_back(1.0 / g);
  std::sort(breaks.begin(), breaks.end());

  auto objective_at = [&](double s) {
    double obj = lambda_norm2 * s * s;
    for (double g : dots) {
      const double margin = 1.0 - s * g;
      if (margin > 0) obj += margin;
    }
    return obj;
  };

  double best_s = 1.0;
  double best_obj = objective_at(1.0);
  auto consider = [&](double s) {
    if (s < 0) return;
    const double obj = objective_at(s);
    if (obj < best_obj) {
      best_obj = obj;
      best_s = s;
    }
  };
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    consider(breaks[k]);
    // vertex of the quadratic valid on [breaks[k], next): slope terms are the
    // still-violated margins at s slightly above breaks[k]
    const double s_probe = breaks[k] + 1e-12;
    double slope_b = 0;
    for (double g : dots)
      if (1.0 - s_probe * g > 0) slope_b += g;
    const double vertex = slope_b / (2.0 * lambda_norm2);
    const double hi = k + 1 < breaks.size() ? breaks[k + 1]
                                            : std::numeric_limits<double>::infinity();
    if (vertex >= breaks[k] && vertex <= hi) consider(vertex);
  }
  return best_s;
}

}  // namespace detail

/// Pairwise-hinge ranking objective over the time-varying means of a window;
/// exposed so tests can score solutions independently of the solver.
inline double rank_pool_objective(const std::vector<double>& u,
                                  const std::vector<std::vector<double>>& means,
                                  double lambda = 0.01) {
  std::vector<std::vector<double>> diffs;
  for (std::size_t t = 0; t < means.size(); ++t)
    for (std::size_t t2 = t + 1; t2 < means.size(); ++t2) {
      std::vector<double> d(means[t2].size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = means[t2][k] - means[t][k];
      diffs.push_back(std::move(d));
    }
  return detail::ranking_objective(u, diffs, lambda);
}

/// Time-varying means m_t = (1/t) sum_{s<=t} v_s of a window.
inline std::vector<std::vector<double>> window_means(
    const std::vector<std::vector<float>>& window_vectors) {
  const std::size_t dim = window_vectors.front().size();
  std::vector<std::vector<double>> means(window_vectors.size(),
                                         std::vector<double>(dim, 0.0));
  std::vector<double> acc(dim, 0.0);
  for (std::size_t t = 0; t < window_vectors.size(); ++t) {
    for (std::size_t k = 0; k < dim; ++k) {
      acc[k] += window_vectors[t][k];
      means[t][k] = acc[k] / static_cast<double>(t + 1);
    }
  }
  return means;
}

/// Encode a window's temporal evolution as one D-vector.
///
/// approx: closed-form coefficients a_t = 2t - W - 1 (t = 1..W) applied to
/// the raw vectors. ranksvm: deterministic full-batch subgradient descent on
/// the pairwise hinge ranking loss over the time-varying means.
inline std::vector<double> rank_pool(const std::vector<std::vector<float>>& window_vectors,
                                     PoolMethod method, const RankSvmParams& sp = {}) {
  const int w = static_cast<int>(window_vectors.size());
  if (w < 2) throw ValidationError("rank_pool: window must hold at least 2 vectors");
  const std::size_t dim = window_vectors.front().size();
  if (dim == 0) throw ValidationError("rank_pool: zero-dimension vectors");
  for (const auto& v : window_vectors)
    if (v.size() != dim) throw ValidationError("rank_pool: heterogeneous dimensions");

  if (method == PoolMethod::approx) {
    std::vector<double> out(dim, 0.0);
    for (int t = 0; t < w; ++t) {
      const double alpha = 2.0 * (t + 1) - w - 1;
      const auto& v = window_vectors[t];
      for (std::size_t k = 0; k < dim; ++k) out[k] += alpha * v[k];
    }
    return out;
  }

  // ranksvm
  const auto means = window_means(window_vectors);
  std::vector<std::vector<double>> diffs;
  double norm2_sum = 0;
  for (std::size_t t = 0; t < means.size(); ++t)
    for (std::size_t t2 = t + 1; t2 < means.size(); ++t2) {
      std::vector<double> d(dim);
      double n2 = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        d[k] = means[t2][k] - means[t][k];
        n2 += d[k] * d[k];
      }
      norm2_sum += n2;
      diffs.push_back(std::move(d));
    }
  const double avg_norm2 = norm2_sum / static_cast<double>(diffs.size());
  const double step0 = 1.0 / (2.0 * sp.lambda + avg_norm2 + 1e-12);

  std::vector<double> u(dim, 0.0), grad(dim), best_u(dim, 0.0);
  double best_obj = detail::ranking_objective(u, diffs, sp.lambda);

  auto rescale_exactly = [&]() {
    // close the gap along the current direction: J is piecewise quadratic in
    // the scale, so the 1-D problem solves in closed form
    double norm2 = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    if (norm2 <= 0) return;
    std::vector<double> dots(diffs.size());
    for (std::size_t p = 0; p < diffs.size(); ++p)
      dots[p] = std::inner_product(u.begin(), u.end(), diffs[p].begin(), 0.0);
    const double s = detail::optimal_scale(dots, sp.lambda * norm2);
    for (auto& v : u) v *= s;
  };

  for (int it = 0; it < sp.iterations; ++it) {
    for (std::size_t k = 0; k < dim; ++k) grad[k] = 2.0 * sp.lambda * u[k];
    for (const auto& d : diffs) {
      const double margin = 1.0 - std::inner_product(u.begin(), u.end(), d.begin(), 0.0);
      if (margin > 0)
        for (std::size_t k = 0; k < dim; ++k) grad[k] -= d[k];
    }
    const double eta = step0 / std::sqrt(static_cast<double>(it + 1));
    for (std::size_t k = 0; k < dim; ++k) u[k] -= eta * grad[k];
    if ((it + 1) % 20 == 0 || it + 1 == sp.iterations) rescale_exactly();
    const double obj = detail::ranking_objective(u, diffs, sp.lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best_u = u;
    }
  }
  return best_u;
}

/// pooled_k = rank_pool(v_k .. v_{k+W-1}) for k = 0 .. n-W-1.
inline PooledSequence pool_sequence(const FeatureVectorSequence& features, int window,
                                    PoolMethod method, const RankSvmParams& sp = {},
                                    int threads = 0) {
  if (window < 2) throw ValidationError("pool_sequence: window must be >= 2");
  const int n = static_cast<int>(features.size());
  if (n <= window) throw ValidationError("pool_sequence: sequence shorter than window + 1");
  PooledSequence out;
  out.window = window;
  out.method = method;
  out.pooled.resize(n - window);
  parallel_for(0, n - window, threads, [&](int k) {
    std::vector<std::vector<float>> win(features.vectors.begin() + k,
                                        features.vectors.begin() + k + window);
    out.pooled[k] = rank_pool(win, method, sp);
  });
  return out;
}

// ---------------------------------------------------------------------------

/// Cosine similarity between all pooled pairs; zero vectors score 0 against
/// everything. Entries are clamped into [-1, 1].
inline SimilarityMatrix cosine_similarity_matrix(const PooledSequence& pa,
                                                 const PooledSequence& pb,
                                                 int threads = 0) {
  if (pa.pooled.empty() || pb.pooled.empty())
    throw ValidationError("cosine_similarity_matrix: empty sequence");
  if (pa.dim() != pb.dim())
    throw ValidationError("cosine_similarity_matrix: dimension mismatch");

  auto normalize = [](const std::vector<std::vector<double>>& vs) {
    std::vector<std::vector<double>> out(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const double n2 = std::inner_product(vs[i].begin(), vs[i].end(), vs[i].begin(), 0.0);
      const double norm = std::sqrt(n2);
      out[i].resize(vs[i].size(), 0.0);
      if (norm > 1e-12)
        for (std::size_t k = 0; k < vs[i].size(); ++k) out[i][k] = vs[i][k] / norm;
      // zero vectors stay zero and score 0 everywhere
    }
    return out;
  };
  const auto na = normalize(pa.pooled);
  const auto nb = normalize(pb.pooled);

  SimilarityMatrix s;
  s.polarity = Polarity::similarity;
  s.stage = Stage::raw;
  s.scores = Matd(static_cast<int>(na.size()), static_cast<int>(nb.size()));
  parallel_for(0, static_cast<int>(na.size()), threads, [&](int i) {
    for (std::size_t j = 0; j < nb.size(); ++j) {
      double dot = std::inner_product(na[i].begin(), na[i].end(), nb[j].begin(), 0.0);
      if (dot > 1.0) dot = 1.0;
      if (dot < -1.0) dot = -1.0;
      s.scores(i, static_cast<int>(j)) = dot;
    }
  });
  return s;
}

/// Keep entries strictly above T = mean(A) + 0.5 * std(A) (population sigma
/// over all entries).
inline CandidateSet adaptive_threshold(const SimilarityMatrix& a) {
  if (a.stage != Stage::raw || a.polarity != Polarity::similarity)
    throw ValidationError("adaptive_threshold: expects a raw similarity matrix");
  const std::size_t total = a.scores.size();
  double sum = 0, sum2 = 0;
  for (double v : a.scores.data()) {
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / static_cast<double>(total);
  const double var = std::max(0.0, sum2 / static_cast<double>(total) - mean * mean);
  CandidateSet set;
  set.threshold = mean + 0.5 * std::sqrt(var);
  for (int i = 0; i < a.m(); ++i)
    for (int j = 0; j < a.n(); ++j)
      if (a.scores(i, j) > set.threshold) set.pairs.push_back({i, j, a.scores(i, j)});
  return set;
}

/// Thresholded copy of the similarity matrix (entries <= T are zeroed); the
/// "enhanced" stage of the TPDF pipeline's matrix dumps.
inline SimilarityMatrix apply_threshold(const SimilarityMatrix& a, double threshold) {
  SimilarityMatrix out;
  out.polarity = a.polarity;
  out.stage = Stage::thresholded;
  out.scores = Matd(a.m(), a.n(), 0.0);
  for (int i = 0; i < a.m(); ++i)
    for (int j = 0; j < a.n(); ++j)
      if (a.scores(i, j) > threshold) out.scores(i, j) = a.scores(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// maximum-weight double-monotone chain

namespace detail {

struct FenwickMax {
  // 1-based Fenwick tree over compressed j holding (best dp, candidate index)
  std::vector<double> value;
  std::vector<int> arg;

  explicit FenwickMax(int n) : value(n + 1, -1.0), arg(n + 1, -1) {}

  void update(int pos, double v, int idx) {
    for (int p = pos + 1; p < static_cast<int>(value.size()); p += p & (-p)) {
      if (v > value[p]) {
        value[p] = v;
        arg[p] = idx;
      }
    }
  }

  // max over compressed positions [0, pos)
  std::pair<double, int> query(int pos) const {
    double best = -1.0;
    int best_idx = -1;
    for (int p = pos; p > 0; p -= p & (-p)) {
      if (value[p] > best) {
        best = value[p];
        best_idx = arg[p];
      }
    }
    return {best, best_idx};
  }
};

}  // namespace detail

/// Maximum-weight chain of candidates strictly increasing in both i and j
/// (weight = summed similarity). Returns the chain in (i, j) order plus its
/// weight. O(C log C) via a Fenwick tree over compressed j.
inline std::pair<std::vector<Candidate>, double> max_weight_chain(const CandidateSet& cands) {
  const std::size_t c = cands.pairs.size();
  if (c == 0) return {{}, 0.0};

  std::vector<int> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Candidate &ca = cands.pairs[a], &cb = cands.pairs[b];
    return ca.i != cb.i ? ca.i < cb.i : ca.j < cb.j;
  });

  std::vector<int> js;
  js.reserve(c);
  for (const Candidate& cand : cands.pairs) js.push_back(cand.j);
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());
  auto compress = [&js](int j) {
    return static_cast<int>(std::lower_bound(js.begin(), js.end(), j) - js.begin());
  };

  std::vector<double> dp(c, 0.0);
  std::vector<int> parent(c, -1);
  detail::FenwickMax tree(static_cast<int>(js.size()));

  std::size_t group_start = 0;
  std::vector<std::pair<int, int>> pending;  // (compressed j, candidate) per i-group
  while (group_start < c) {
    std::size_t group_end = group_start;
    const int gi = cands.pairs[order[group_start]].i;
    while (group_end < c && cands.pairs[order[group_end]].i == gi) ++group_end;
    // query against strictly smaller i only: the tree state excludes this group
    for (std::size_t t = group_start; t < group_end; ++t) {
      const int idx = order[t];
      const Candidate& cand = cands.pairs[idx];
      const auto [best_prev, prev_idx] = tree.query(compress(cand.j));
      dp[idx] = cand.similarity + (best_prev > 0 ? best_prev : 0.0);
      parent[idx] = best_prev > 0 ? prev_idx : -1;
    }
    pending.clear();
    for (std::size_t t = group_start; t < group_end; ++t)
      pending.emplace_back(compress(cands.pairs[order[t]].j), order[t]);
    for (const auto& [cj, idx] : pending) tree.update(cj, dp[idx], idx);
    group_start = group_end;
  }

  int best_end = 0;
  for (std::size_t idx = 1; idx < c; ++idx)
    if (dp[idx] > dp[best_end]) best_end = static_cast<int>(idx);

  std::vector<Candidate> chain;
  for (int idx = best_end; idx >= 0; idx = parent[idx]) chain.push_back(cands.pairs[idx]);
  std::reverse(chain.begin(), chain.end());
  return {chain, dp[best_end]};
}

/// Split a chain into MatchSegments at index gaps larger than gap_max.
inline std::vector<MatchSegment> split_chain(const std::vector<Candidate>& chain,
                                             int gap_max) {
  std::vector<MatchSegment> segments;
  for (const Candidate& cand : chain) {
    const bool extend = !segments.empty() && !segments.back().pairs.empty() &&
                        cand.i - segments.back().pairs.back().template_index <= gap_max &&
                        cand.j - segments.back().pairs.back().observation_index <= gap_max;
    if (!extend) segments.emplace_back();
    segments.back().pairs.push_back({cand.i, cand.j, cand.similarity});
    segments.back().score += cand.similarity;
  }
  for (MatchSegment& seg : segments) {
    seg.score /= static_cast<double>(seg.pairs.size());
    const auto& first = seg.pairs.front();
    const auto& last = seg.pairs.back();
    const int dj = last.observation_index - first.observation_index;
    seg.velocity =
        dj > 0 ? static_cast<double>(last.template_index - first.template_index) / dj : 1.0;
  }
  return segments;
}

/// The single maximum-weight temporally consistent chain, split at gaps.
inline std::vector<MatchSegment> consistent_chain(const CandidateSet& cands,
                                                  int gap_max = 20) {
  return split_chain(max_weight_chain(cands).first, gap_max);
}

struct ChainParams {
  int gap_max = 20;
  int min_points = 3;
  double min_weight_frac = 0.1;
  int max_rounds = 64;
};

/// Repeated chain extraction: pull the maximum-weight chain, remove its
/// candidates, repeat. Reordered (non-monotone) action sequences need more
/// than one chain, since a single chain can only follow one ordering.
inline std::vector<MatchSegment> extract_chains(const CandidateSet& cands,
                                                const ChainParams& p = {}) {
  CandidateSet remaining = cands;
  std::vector<MatchSegment> out;
  double first_weight = 0;
  for (int round = 0; round < p.max_rounds && !remaining.pairs.empty(); ++round) {
    auto [chain, weight] = max_weight_chain(remaining);
    if (chain.empty() || weight <= 0) break;
    if (round == 0) first_weight = weight;
    if (weight < p.min_weight_frac * first_weight ||
        static_cast<int>(chain.size()) < p.min_points)
      break;
    auto segments = split_chain(chain, p.gap_max);
    out.insert(out.end(), segments.begin(), segments.end());

    std::vector<Candidate> rest;
    rest.reserve(remaining.pairs.size() - chain.size());
    std::size_t next_used = 0;
    std::sort(chain.begin(), chain.end(), [](const Candidate& a, const Candidate& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<Candidate> sorted_remaining = remaining.pairs;
    std::sort(sorted_remaining.begin(), sorted_remaining.end(),
              [](const Candidate& a, const Candidate& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    for (const Candidate& cand : sorted_remaining) {
      if (next_used < chain.size() && cand.i == chain[next_used].i &&
          cand.j == chain[next_used].j) {
        ++next_used;
        continue;
      }
      rest.push_back(cand);
    }
    remaining.pairs = std::move(rest);
  }
  return out;
}

}  // namespace artis
