// Acceptance suite: one self-contained check per release criterion, one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "artis/artis.hpp"
#include "oracles.hpp"

using namespace artis;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d [%s] %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "artis_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const std::string& stdout_path = "") {
  std::string cmd = std::string(ARTIS_CLI_PATH) + " " + args;
  cmd += stdout_path.empty() ? " >/dev/null 2>&1" : " >" + stdout_path + " 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return {};
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

SynthAction translate_action(const std::string& label, int dur, double size, double speed,
                             double sx, double sy, double dx, double dy) {
  SynthAction a;
  a.label = label;
  a.duration = dur;
  a.motif = Motif::translate_blob;
  a.size = size;
  a.speed = speed;
  a.start_x = sx;
  a.start_y = sy;
  a.dir_x = dx;
  a.dir_y = dy;
  return a;
}

/// Seeded non-repetitive scripts: every action is a translation with its own
/// geometry, so no two frames repeat within a sequence.
SynthScript acceptance_script(int seed) {
  SynthScript s;
  s.canvas_w = 320;
  s.canvas_h = 180;
  s.seed = static_cast<std::uint64_t>(seed);
  const double sp = 1.5 + 0.25 * (seed % 3);
  switch (seed % 5) {
    case 0:
      s.actions = {translate_action("a", 45, 24, sp, 40, 60, 1, 0),
                   translate_action("b", 45, 30, sp, 280, 40, -1, 0.5),
                   translate_action("c", 40, 20, sp, 60, 140, 1, -0.6)};
      break;
    case 1:
      s.actions = {translate_action("a", 40, 26, sp, 30, 40, 1, 0.4),
                   translate_action("b", 45, 22, sp, 290, 150, -1, -0.5),
                   translate_action("c", 45, 28, sp, 160, 30, 0, 1)};
      break;
    case 2:
      s.actions = {translate_action("a", 45, 20, sp, 50, 90, 1, 0),
                   translate_action("b", 40, 26, sp, 270, 90, -1, 0),
                   translate_action("c", 45, 24, sp, 160, 150, 0, -1),
                   translate_action("d", 40, 30, sp, 40, 30, 1, 0.7)};
      break;
    case 3:
      s.actions = {translate_action("a", 50, 28, sp, 40, 140, 1, -0.4),
                   translate_action("b", 45, 24, sp, 160, 20, 0.5, 1),
                   translate_action("c", 45, 22, sp, 280, 160, -1, -0.4)};
      break;
    default:
      s.actions = {translate_action("a", 45, 32, sp, 60, 50, 1, 0.3),
                   translate_action("b", 45, 18, sp, 260, 130, -1, 0),
                   translate_action("c", 40, 26, sp, 50, 160, 1, -0.8),
                   translate_action("d", 40, 22, sp, 200, 40, 0, 1)};
  }
  return s;
}

std::vector<double> theta_sweep() {
  std::vector<double> out;
  for (double t = 0; t <= 1.0 + 1e-9; t += 0.05) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// 1. The reference precision/recall/F1 figures for the original recordings
// (close-up drawer run: TPDF 0.88/0.71/0.77, FHDOF 0.56/0.82/0.66, baseline
// 0.45/0.63/0.52) need the original dataset plus externally extracted
// per-frame CNN features, neither of which ship with this repository; they
// are documented targets, not assertions. What must work end to end is the
// documented procedure: externally produced ARTV features plus converted
// labels in, a full sweep report out.
void criterion_1() {
  const fs::path dir = work_dir() / "c1";
  fs::create_directories(dir);

  // stand-in for externally extracted per-frame features of two runs
  std::mt19937_64 rng(71);
  for (const char* name : {"run_a", "run_b"}) {
    std::vector<std::vector<float>> vecs;
    for (int t = 0; t < 120; ++t) {
      std::vector<float> v(64);
      const double center = 0.5 * t + (name[4] == 'b' ? 1.5 : 0.0);
      for (int d = 0; d < 64; ++d) {
        const double dist = d - 0.4 * center;
        v[d] = static_cast<float>(std::exp(-0.1 * dist * dist) +
                                  0.02 * oracles::uniform(rng, -1, 1));
      }
      vecs.push_back(v);
    }
    save_artv(vecs, 64, (dir / (std::string(name) + ".artv")).string());
  }
  for (const char* name : {"labels_a", "labels_b"}) {
    std::ofstream os(dir / (std::string(name) + ".csv"));
    os << "action,start_frame,end_frame\nreach,0,39\nplace,40,79\nfasten,80,119\n";
  }

  bool ok = run_cli("match-tpdf --features-a " + (dir / "run_a.artv").string() +
                    " --features-b " + (dir / "run_b.artv").string() +
                    " --window 10 --method approx --out-dir " +
                    (dir / "m").string()) == 0;
  ok = ok && run_cli("eval --matches " + (dir / "m" / "matches.csv").string() +
                     " --template-labels " + (dir / "labels_a.csv").string() +
                     " --observation-labels " + (dir / "labels_b.csv").string() +
                     " --out " + (dir / "report.csv").string()) == 0;

  std::string shape = "missing";
  if (ok) {
    const auto report = load_report_csv((dir / "report.csv").string());
    const bool has_sweep = report.rows.size() >= 2;
    bool columns_sane = !report.rows.empty();
    for (const auto& row : report.rows) {
      columns_sane = columns_sane && row.precision >= 0 && row.precision <= 1 &&
                     row.recall >= 0 && row.recall <= 1 && row.f1 >= 0 && row.f1 <= 1;
    }
    const bool counts = report.class_count == 3 && report.within_count == 3 &&
                        report.between_count == 6;
    ok = has_sweep && columns_sane && counts;
    shape = "threshold sweep rows=" + std::to_string(report.rows.size()) +
            ", prec/recall/F1 columns, class counts in header";
  }
  report(1, ok,
         "external-feature procedure runs end to end (" + shape +
         "); published-run figures stay documented targets only");
}

// ---------------------------------------------------------------------------
// 2. Self-match on five seeded synthetic sequences.
void criterion_2() {
  RunConfig cfg;
  cfg.patch = 16;
  cfg.threads = 4;
  bool all_ok = true;
  double worst_rate = 1.0, worst_time = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    auto [seq, labels] = render(acceptance_script(seed));
    auto vecs = to_feature_vectors(build_descriptor_sequence(seq, fhdof_params(cfg)));
    auto enh = enhance(ssd_matrix(vecs, vecs, cfg.threads), cfg.enhance_window);
    auto cols = sweep_columns(enh, line_search_params(cfg));
    int good = 0;
    for (const auto& c : cols)
      if (std::abs(c.template_index - c.observation_index) <= 1) ++good;
    const int evaluable = static_cast<int>(vecs.size()) - cfg.ds;
    const double rate = static_cast<double>(good) / evaluable;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_ok = all_ok && seq.size() >= 120 && labels.size() >= 3 && rate >= 0.9 &&
             elapsed < 30.0;
    worst_rate = std::min(worst_rate, rate);
    worst_time = std::max(worst_time, elapsed);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "self-match diagonal recovery on 5 seeded scripts: worst rate %.3f "
                "(>= 0.9), worst runtime %.1fs (< 30s)",
                worst_rate, worst_time);
  report(2, all_ok, buf);
}

// ---------------------------------------------------------------------------
// 3. Permuted action order: both pipelines localize every action block.
void criterion_3() {
  RunConfig cfg;
  cfg.patch = 16;
  cfg.threads = 4;
  SynthScript base;
  base.canvas_w = 320;
  base.canvas_h = 180;
  base.seed = 4;
  base.actions = {translate_action("a", 50, 24, 2.0, 40, 60, 1, 0),
                  translate_action("b", 50, 30, 1.8, 280, 40, -1, 0.5),
                  translate_action("c", 50, 20, 2.2, 60, 140, 1, -0.6),
                  translate_action("d", 50, 28, 1.6, 160, 20, 0, 1)};
  auto permuted = permute(base, {0, 2, 1, 3});
  auto [tseq, tlabels] = render(base, "template");
  auto [oseq, olabels] = render(permuted, "observation");

  // labels map 1:1 onto motifs by construction; record the signature
  std::map<std::string, std::string> motif_of;
  for (const auto& a : base.actions) {
    std::ostringstream sig;
    sig << motif_name(a.motif) << ':' << a.size << ':' << a.speed << ':' << a.start_x
        << ':' << a.start_y;
    motif_of[a.label] = sig.str();
  }

  const auto areas = build_areas(tlabels, olabels);
  auto evaluate = [&](const std::vector<MatchSegment>& segments) {
    return score(segments, areas, theta_sweep());
  };
  auto tp_areas_same_motif = [&](const std::vector<MatchSegment>& segments,
                                 double theta) {
    for (const auto& area : areas) {
      if (area.kind != AreaKind::within_class) continue;
      if (coverage_ratio(segments, area) > theta) {
        if (motif_of[area.template_segment.action_label] !=
            motif_of[area.observation_segment.action_label])
          return false;
      }
    }
    return true;
  };

  // FHDOF pipeline
  auto tv = to_feature_vectors(build_descriptor_sequence(tseq, fhdof_params(cfg)));
  auto ov = to_feature_vectors(build_descriptor_sequence(oseq, fhdof_params(cfg)));
  auto fh_segments = line_search(enhance(ssd_matrix(tv, ov, cfg.threads), cfg.enhance_window),
                                 line_search_params(cfg));
  const auto fh_report = evaluate(fh_segments);
  const auto& fh_best = fh_report.best();

  // TPDF pipeline over the built-in frame feature
  cfg.tpdf_window = 8;
  auto tp = to_feature_vectors(
      patchnorm_descriptor(tseq, cfg.pn_grid_w, cfg.pn_grid_h, cfg.pn_patch, cfg.threads));
  auto op = to_feature_vectors(
      patchnorm_descriptor(oseq, cfg.pn_grid_w, cfg.pn_grid_h, cfg.pn_patch, cfg.threads));
  auto pa = pool_sequence(tp, cfg.tpdf_window, PoolMethod::approx, {}, cfg.threads);
  auto pb = pool_sequence(op, cfg.tpdf_window, PoolMethod::approx, {}, cfg.threads);
  auto cands = adaptive_threshold(cosine_similarity_matrix(pa, pb, cfg.threads));
  auto tp_segments = extract_chains(cands, chain_params(cfg));
  const auto tp_report = evaluate(tp_segments);
  const auto& tp_best = tp_report.best();

  const bool ok = fh_best.f1 >= 0.8 && tp_best.f1 >= 0.8 &&
                  tp_areas_same_motif(fh_segments, fh_best.threshold) &&
                  tp_areas_same_motif(tp_segments, tp_best.threshold);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "permuted actions: best F1 fhdof %.3f, tpdf %.3f (>= 0.8); every TP "
                "area is a same-motif pair",
                fh_best.f1, tp_best.f1);
  report(3, ok, buf);
}

// ---------------------------------------------------------------------------
// 4. Time-warped observations: per-column line velocities track the warp.
void criterion_4() {
  RunConfig cfg;
  cfg.patch = 8;
  cfg.ds = 20;
  cfg.threads = 4;
  SynthScript base;
  base.canvas_w = 320;
  base.canvas_h = 180;
  base.seed = 4;
  base.actions = {translate_action("a", 50, 24, 2.0, 40, 60, 1, 0),
                  translate_action("b", 50, 30, 1.8, 280, 40, -1, 0.5),
                  translate_action("c", 50, 20, 2.2, 60, 140, 1, -0.6),
                  translate_action("d", 50, 28, 1.6, 160, 20, 0, 1)};
  auto [tseq, tlabels] = render(base, "template");
  auto tv = to_feature_vectors(build_descriptor_sequence(tseq, fhdof_params(cfg)));

  bool ok = true;
  std::string detail = "velocity within +/-0.1 on";
  for (double warp : {0.5, 1.25}) {
    auto [wseq, wlabels] = render(time_warp(base, warp), "warped");
    auto wv = to_feature_vectors(build_descriptor_sequence(wseq, fhdof_params(cfg)));
    LineSearchParams lp = line_search_params(cfg);
    lp.v_min = 0.3;
    lp.v_max = 1.5;
    auto cols =
        sweep_columns(enhance(ssd_matrix(tv, wv, cfg.threads), cfg.enhance_window), lp);
    int good = 0;
    for (const auto& c : cols)
      if (std::abs(c.velocity - warp) <= 0.1) ++good;
    const double rate = cols.empty() ? 0.0 : static_cast<double>(good) / cols.size();
    ok = ok && rate >= 0.8;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %.0f%% of columns at %.2fx", 100.0 * rate, warp);
    detail += buf;
  }
  report(4, ok, detail + " (>= 80% each)");
}

// ---------------------------------------------------------------------------
// 5. Chain extraction equals exhaustive search on small candidate sets.
void criterion_5() {
  std::mt19937_64 rng(59);
  int agreements = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const int count = 1 + static_cast<int>(rng() % 15);
    std::set<std::pair<int, int>> used;
    CandidateSet cands;
    while (static_cast<int>(cands.pairs.size()) < count) {
      const int i = static_cast<int>(rng() % 14);
      const int j = static_cast<int>(rng() % 14);
      if (!used.insert({i, j}).second) continue;
      const double w = oracles::uniform(rng, trial % 7 == 0 ? -0.5 : 0.02, 1.0);
      cands.pairs.push_back({i, j, w});
    }
    const double dp_weight = max_weight_chain(cands).second;
    const double brute = oracles::brute_force_chain_weight(cands.pairs);
    if (std::abs(dp_weight - brute) <= 1e-12) ++agreements;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "chain DP matches brute-force maximum weight on %d/%d random sets",
                agreements, trials);
  report(5, agreements == trials, buf);
}

// ---------------------------------------------------------------------------
// 6. Rank pooling identities and solver quality.
void criterion_6() {
  std::mt19937_64 rng(61);
  bool approx_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 3 + static_cast<int>(rng() % 6);
    const int dim = 2 + static_cast<int>(rng() % 6);
    std::vector<std::vector<float>> constant(
        w, std::vector<float>(dim, static_cast<float>(oracles::uniform(rng, -3, 3))));
    for (double v : rank_pool(constant, PoolMethod::approx))
      approx_ok = approx_ok && std::abs(v) <= 1e-9;

    // integer-valued inputs so the mixed window is exactly representable and
    // the identities hold to the last bit, not merely to float rounding
    std::vector<std::vector<float>> win(w, std::vector<float>(dim)), win2 = win;
    for (auto& v : win)
      for (auto& x : v) x = static_cast<float>(static_cast<int>(rng() % 17) - 8);
    for (auto& v : win2)
      for (auto& x : v) x = static_cast<float>(static_cast<int>(rng() % 17) - 8);
    auto fwd = rank_pool(win, PoolMethod::approx);
    auto reversed = win;
    std::reverse(reversed.begin(), reversed.end());
    auto rev = rank_pool(reversed, PoolMethod::approx);
    for (std::size_t k = 0; k < fwd.size(); ++k)
      approx_ok = approx_ok && std::abs(fwd[k] + rev[k]) <= 1e-9;

    const double a = static_cast<double>(1 + static_cast<int>(rng() % 3)) *
                     (rng() % 2 ? 1 : -1);
    const double b = static_cast<double>(1 + static_cast<int>(rng() % 3)) *
                     (rng() % 2 ? 1 : -1);
    std::vector<std::vector<float>> mix(w, std::vector<float>(dim));
    for (int t = 0; t < w; ++t)
      for (int d = 0; d < dim; ++d)
        mix[t][d] = static_cast<float>(a * win[t][d] + b * win2[t][d]);
    auto pm = rank_pool(mix, PoolMethod::approx);
    auto pv = rank_pool(win, PoolMethod::approx);
    auto pw = rank_pool(win2, PoolMethod::approx);
    for (std::size_t k = 0; k < pm.size(); ++k)
      approx_ok = approx_ok && std::abs(pm[k] - (a * pv[k] + b * pw[k])) <= 1e-9;
  }

  // ranksvm: 50 seeded trials, 1000 random equal-norm competitors each
  long wins = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::mt19937_64 trial_rng(1000 + trial);
    std::vector<double> base(3), dir(3);
    for (auto& v : base) v = oracles::uniform(trial_rng, -1, 1);
    for (auto& v : dir) v = oracles::uniform(trial_rng, 0.2, 1.0);
    std::vector<std::vector<float>> track;
    double t = 0;
    for (int k = 0; k < 10; ++k) {
      t += oracles::uniform(trial_rng, 0.5, 1.5);
      std::vector<float> v(3);
      for (int d = 0; d < 3; ++d)
        v[d] = static_cast<float>(base[d] + dir[d] * t +
                                  0.1 * oracles::uniform(trial_rng, -1, 1));
      track.push_back(v);
    }
    auto u = rank_pool(track, PoolMethod::ranksvm);
    auto means = window_means(track);
    const double obj_u = rank_pool_objective(u, means);
    double norm = 0;
    for (double v : u) norm += v * v;
    norm = std::sqrt(norm);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> r(u.size());
      double rn = 0;
      for (auto& v : r) {
        v = oracles::uniform(trial_rng, -1, 1);
        rn += v * v;
      }
      rn = std::sqrt(rn);
      for (auto& v : r) v *= norm / rn;
      const double obj_r = rank_pool_objective(r, means);
      ++total;
      if (obj_u <= obj_r + 1e-9 * std::max(1.0, std::abs(obj_r))) ++wins;
    }
  }
  const double win_rate = static_cast<double>(wins) / static_cast<double>(total);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "approx pooling identities exact to 1e-9; ranksvm beats %.2f%% of "
                "50x1000 random equal-norm vectors (>= 99%%)",
                100.0 * win_rate);
  report(6, approx_ok && win_rate >= 0.99, buf);
}

// ---------------------------------------------------------------------------
// 7. Flow identities.
void criterion_7() {
  std::mt19937_64 rng(67);
  bool zero_ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    Matf img = oracles::random_frame(rng, 40, 30);
    zero_ok = zero_ok && estimate_flow(img, img).magnitude.max_value() < 1e-9f;
  }

  Matf prev(64, 64, 0.0f), next(64, 64, 0.0f);
  for (int y = 30; y < 35; ++y)
    for (int x = 20; x < 25; ++x) {
      prev(y, x) = 255.0f;
      next(y, x + 2) = 255.0f;
    }
  auto flow = estimate_flow(prev, next);
  double acc = 0;
  int cnt = 0;
  for (int y = 30; y < 35; ++y)
    for (int x = 20; x < 25; ++x) {
      acc += flow.magnitude(y, x);
      ++cnt;
    }
  const double mean_mag = acc / cnt;
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "flow(f,f) max magnitude < 1e-9 on 10 random frames; 2 px translation "
                "mean magnitude %.2f in [1, 3]",
                mean_mag);
  report(7, zero_ok && mean_mag >= 1.0 && mean_mag <= 3.0, buf);
}

// ---------------------------------------------------------------------------
// 8. Evaluation arithmetic against hand-computed fixtures.
void criterion_8() {
  auto seg = [](const std::string& label, int s, int e) {
    GroundTruthSegment g;
    g.action_label = label;
    g.start_frame = s;
    g.end_frame = e;
    g.sequence_id = "fixture";
    return g;
  };
  auto matches_of = [](const std::vector<std::pair<int, int>>& pts) {
    MatchSegment m;
    for (auto [i, j] : pts) m.pairs.push_back({i, j, 1.0});
    return std::vector<MatchSegment>{m};
  };

  bool ok = true;
  std::string failed;

  // six labeled actions on both sides: 6 within-class and 30 between-class
  {
    std::vector<GroundTruthSegment> t6, o6;
    for (int k = 0; k < 6; ++k) {
      t6.push_back(seg("act" + std::to_string(k), k * 100, k * 100 + 99));
      o6.push_back(seg("act" + std::to_string(k), k * 100, k * 100 + 99));
    }
    auto areas = build_areas(t6, o6);
    int within = 0, between = 0;
    for (const auto& a : areas)
      (a.kind == AreaKind::within_class ? within : between) += 1;
    if (!(within == 6 && between == 30)) {
      ok = false;
      failed += " six-class-areas";
    }
  }

  struct Fixture {
    const char* name;
    std::vector<GroundTruthSegment> temp, obs;
    std::vector<std::pair<int, int>> pts;
    double theta;
    int tp, fp, fn;  // hand-derived
  };
  std::vector<Fixture> fixtures;

  // 1: three of five classes covered plus one cross hit
  {
    Fixture f;
    f.name = "tp3fp1fn2";
    for (int k = 0; k < 5; ++k) {
      f.temp.push_back(seg("c" + std::to_string(k), k * 10, k * 10 + 9));
      f.obs.push_back(seg("c" + std::to_string(k), k * 10, k * 10 + 9));
    }
    for (int k = 0; k < 10; ++k) {
      f.pts.emplace_back(k, k);
      f.pts.emplace_back(10 + k, 10 + k);
      f.pts.emplace_back(20 + k, 20 + k);
      f.pts.emplace_back(30 + k, 40 + k);
    }
    f.theta = 0.5;
    f.tp = 3;
    f.fp = 1;
    f.fn = 2;
    fixtures.push_back(std::move(f));
  }
  // 2: nothing matched
  {
    Fixture f;
    f.name = "empty";
    f.temp = {seg("a", 0, 9), seg("b", 10, 19)};
    f.obs = f.temp;
    f.theta = 0.0;
    f.tp = 0;
    f.fp = 0;
    f.fn = 2;
    fixtures.push_back(std::move(f));
  }
  // 3: every rectangle touched at threshold zero
  {
    Fixture f;
    f.name = "floor";
    f.temp = {seg("a", 0, 9), seg("b", 10, 19)};
    f.obs = f.temp;
    f.pts = {{0, 0}, {0, 10}, {10, 0}, {10, 10}};
    f.theta = 0.0;
    f.tp = 2;
    f.fp = 2;
    f.fn = 0;
    fixtures.push_back(std::move(f));
  }
  // 4: coverage exactly at the threshold is not a hit
  {
    Fixture f;
    f.name = "boundary-miss";
    f.temp = {seg("a", 0, 9)};
    f.obs = f.temp;
    for (int k = 0; k < 5; ++k) f.pts.emplace_back(k, k);
    f.theta = 0.5;
    f.tp = 0;
    f.fp = 0;
    f.fn = 1;
    fixtures.push_back(std::move(f));
  }
  // 5: the same coverage just above the threshold is a hit
  {
    Fixture f;
    f.name = "boundary-hit";
    f.temp = {seg("a", 0, 9)};
    f.obs = f.temp;
    for (int k = 0; k < 5; ++k) f.pts.emplace_back(k, k);
    f.theta = 0.49;
    f.tp = 1;
    f.fp = 0;
    f.fn = 0;
    fixtures.push_back(std::move(f));
  }
  // 6: six perfect diagonal blocks
  {
    Fixture f;
    f.name = "six-perfect";
    for (int k = 0; k < 6; ++k) {
      f.temp.push_back(seg("act" + std::to_string(k), k * 10, k * 10 + 9));
      f.obs.push_back(seg("act" + std::to_string(k), k * 10, k * 10 + 9));
      for (int q = 0; q < 10; ++q) f.pts.emplace_back(k * 10 + q, k * 10 + q);
    }
    f.theta = 0.5;
    f.tp = 6;
    f.fp = 0;
    f.fn = 0;
    fixtures.push_back(std::move(f));
  }
  // 7: disjoint label sets, matches land in between-class areas only
  {
    Fixture f;
    f.name = "disjoint";
    f.temp = {seg("a", 0, 9), seg("b", 10, 19)};
    f.obs = {seg("x", 0, 9)};
    for (int k = 0; k < 10; ++k) {
      f.pts.emplace_back(k, k);
      f.pts.emplace_back(10 + k, k);
    }
    f.theta = 0.5;
    f.tp = 0;
    f.fp = 2;
    f.fn = 0;
    fixtures.push_back(std::move(f));
  }
  // 8: a repeated action label forms four within-class areas; one is covered
  {
    Fixture f;
    f.name = "repeated-label";
    f.temp = {seg("x", 0, 9), seg("x", 10, 19)};
    f.obs = {seg("x", 0, 9), seg("x", 10, 19)};
    for (int k = 0; k < 10; ++k) f.pts.emplace_back(k, k);
    f.theta = 0.5;
    f.tp = 1;
    f.fp = 0;
    f.fn = 3;
    fixtures.push_back(std::move(f));
  }
  // 9: high threshold knocks every hit out
  {
    Fixture f;
    f.name = "high-theta";
    f.temp = {seg("a", 0, 9)};
    f.obs = f.temp;
    for (int k = 0; k < 8; ++k) f.pts.emplace_back(k, k);
    f.theta = 0.9;
    f.tp = 0;
    f.fp = 0;
    f.fn = 1;
    fixtures.push_back(std::move(f));
  }
  // 10: asymmetric counts
  {
    Fixture f;
    f.name = "tp2fp3fn1";
    for (int k = 0; k < 3; ++k) {
      f.temp.push_back(seg("c" + std::to_string(k), k * 10, k * 10 + 9));
      f.obs.push_back(seg("c" + std::to_string(k), k * 10, k * 10 + 9));
    }
    for (int k = 0; k < 10; ++k) {
      f.pts.emplace_back(k, k);            // within c0
      f.pts.emplace_back(10 + k, 10 + k);  // within c1
      f.pts.emplace_back(k, 10 + k);       // c0 x c1
      f.pts.emplace_back(10 + k, 20 + k);  // c1 x c2
      f.pts.emplace_back(20 + k, k);       // c2 x c0
    }
    f.theta = 0.5;
    f.tp = 2;
    f.fp = 3;
    f.fn = 1;
    fixtures.push_back(std::move(f));
  }

  for (const auto& f : fixtures) {
    const auto areas = build_areas(f.temp, f.obs);
    const auto rep = score(matches_of(f.pts), areas, {f.theta});
    const auto& row = rep.rows[0];
    const double expect_p =
        f.tp + f.fp == 0 ? 1.0 : static_cast<double>(f.tp) / (f.tp + f.fp);
    const double expect_r =
        f.tp + f.fn == 0 ? 0.0 : static_cast<double>(f.tp) / (f.tp + f.fn);
    const double expect_f1 = expect_p + expect_r == 0
                                 ? 0.0
                                 : 2.0 * expect_p * expect_r / (expect_p + expect_r);
    const bool good = row.tp == f.tp && row.fp == f.fp && row.fn == f.fn &&
                      std::abs(row.precision - expect_p) <= 1e-12 &&
                      std::abs(row.recall - expect_r) <= 1e-12 &&
                      std::abs(row.f1 - expect_f1) <= 1e-12;
    if (!good) {
      ok = false;
      failed += std::string(" ") + f.name;
    }
  }

  // coverage-ratio spot values
  {
    CorrespondenceArea area;
    area.template_segment = seg("a", 0, 9);
    area.observation_segment = seg("a", 0, 19);
    area.kind = AreaKind::within_class;
    const double half = coverage_ratio(matches_of({{0, 0}, {1, 2}, {2, 4}, {3, 6}, {4, 8}}),
                                       area);
    if (std::abs(half - 0.5) > 1e-12) {
      ok = false;
      failed += " coverage-half";
    }
  }

  report(8, ok,
         ok ? "area counts 6/30 and 10 fixture cases match hand-computed P/R/F1 to 1e-12"
            : "fixture mismatches:" + failed);
}

// ---------------------------------------------------------------------------
// 9. CLI determinism: identical runs produce byte-identical outputs.
void criterion_9() {
  const fs::path dir = work_dir() / "c9";
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "script.txt");
    os << "canvas=256x144\nseed=21\ncell=4\nnoise_sigma=2\n";
    os << "action=a,36,translate,size=22,speed=2,start=40x60,dir=1x0\n";
    os << "action=b,36,translate,size=26,speed=1.5,start=220x40,dir=-1x0.5\n";
    os << "action=c,36,translate,size=18,speed=2,start=50x110,dir=1x-0.5\n";
  }

  bool ok = true;
  for (const char* run : {"r1", "r2"}) {
    const std::string d = (dir / run).string();
    fs::create_directories(d);
    const std::string script = (dir / "script.txt").string();
    ok = ok && run_cli("synth --script " + script + " --out " + d + "/t.artf --labels " +
                       d + "/tl.csv") == 0;
    ok = ok && run_cli("synth --script " + script + " --permute 0,2,1 --out " + d +
                       "/o.artf --labels " + d + "/ol.csv") == 0;
    ok = ok && run_cli("extract-fhdof --input " + d + "/t.artf --out " + d +
                       "/t.artv --patch 16 --threads 4") == 0;
    ok = ok && run_cli("extract-fhdof --input " + d + "/o.artf --out " + d +
                       "/o.artv --patch 16 --threads 4") == 0;
    ok = ok && run_cli("extract-patchnorm --input " + d + "/t.artf --out " + d +
                       "/tp.artv --threads 4") == 0;
    ok = ok && run_cli("match --method fhdof --template " + d + "/t.artv --observation " +
                       d + "/o.artv --out-dir " + d + "/mf --threads 4") == 0;
    ok = ok && run_cli("match --method tpdf --template " + d + "/t.artf --observation " +
                       d + "/o.artf --out-dir " + d + "/mt --tpdf_window 8 --threads 4") == 0;
    ok = ok && run_cli("eval --matches " + d + "/mf/matches.csv --template-labels " + d +
                       "/tl.csv --observation-labels " + d + "/ol.csv --out " + d +
                       "/report.csv") == 0;
  }

  int compared = 0;
  if (ok) {
    for (const char* name :
         {"t.artf", "o.artf", "tl.csv", "ol.csv", "t.artv", "o.artv", "tp.artv",
          "t.artv.config", "mf/matches.csv", "mf/matrix_raw.artv",
          "mf/matrix_enhanced.artv", "mf/matrix_raw.pgm", "mf/matrix_enhanced.pgm",
          "mf/config.txt", "mt/matches.csv", "mt/matrix_raw.artv",
          "mt/matrix_enhanced.artv", "mt/config.txt", "report.csv",
          "report.csv.config"}) {
      const auto a = slurp(dir / "r1" / name);
      const auto b = slurp(dir / "r2" / name);
      ok = ok && !a.empty() && a == b;
      ++compared;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "two identical CLI pipeline runs: %d output files byte-identical",
                compared);
  report(9, ok, buf);
}

// ---------------------------------------------------------------------------
// 10. Throughput of the on-line pipeline at 320x180.
void criterion_10() {
  const fs::path out = work_dir() / "bench.txt";
  const bool ran = run_cli("bench --width 320 --height 180 --frames 45 --threads 4",
                           out.string()) == 0;
  double fps = 0;
  if (ran) {
    std::ifstream is(out);
    std::string token;
    while (is >> token)
      if (token.rfind("fps=", 0) == 0) fps = std::stod(token.substr(4));
  }
  char buf[100];
  std::snprintf(buf, sizeof(buf), "extract+match throughput %.1f frames/s (>= 3)", fps);
  report(10, ran && fps >= 3.0, buf);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return g_failures;
}
