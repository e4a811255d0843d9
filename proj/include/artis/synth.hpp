#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/eval.hpp"
#include "artis/ingest.hpp"

namespace artis {

enum class Motif { translate_blob, oscillate_blob, static_blob, swap_blobs };

inline Motif parse_motif(const std::string& s) {
  if (s == "translate") return Motif::translate_blob;
  if (s == "oscillate") return Motif::oscillate_blob;
  if (s == "static") return Motif::static_blob;
  if (s == "swap") return Motif::swap_blobs;
  throw ValidationError("unknown motif: " + s);
}

inline std::string motif_name(Motif m) {
  switch (m) {
    case Motif::translate_blob: return "translate";
    case Motif::oscillate_blob: return "oscillate";
    case Motif::static_blob: return "static";
    case Motif::swap_blobs: return "swap";
  }
  return "?";
}

struct SynthAction {
  std::string label;
  int duration = 0;
  Motif motif = Motif::static_blob;
  double size = 24;        // blob side length, px
  double speed = 2;        // translate: px/frame
  double amp = 16;         // oscillate: px
  double period = 24;      // oscillate: frames
  double start_x = 0, start_y = 0;
  double dir_x = 1, dir_y = 0;  // translate direction / oscillation axis
  double bx = 0, by = 0;        // swap: second blob position
};

/// Deterministic script: textured blobs moving per motif on a dark canvas,
/// with exact per-action ground-truth frame ranges.
struct SynthScript {
  int canvas_w = 320;
  int canvas_h = 180;
  std::uint64_t seed = 0;
  double noise_sigma = 0;
  int checker_cell = 4;
  std::vector<SynthAction> actions;
};

namespace detail {

/// Uniform double in [0,1) from raw engine output; fixed across platforms.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11)) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; the second value is discarded to keep the stream simple.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi_v<double> * u2);
}

/// Checkered square anchored to its own top-left corner so the texture moves
/// with the blob.
inline void draw_blob(Matf& img, double cx, double cy, double size, int cell, int phase) {
  const int left = static_cast<int>(std::lround(cx - size / 2));
  const int top = static_cast<int>(std::lround(cy - size / 2));
  const int side = static_cast<int>(std::lround(size));
  for (int y = 0; y < side; ++y) {
    const int py = top + y;
    if (py < 0 || py >= img.rows()) continue;
    for (int x = 0; x < side; ++x) {
      const int px = left + x;
      if (px < 0 || px >= img.cols()) continue;
      img(py, px) = ((x / cell + y / cell + phase) % 2) ? 220.0f : 60.0f;
    }
  }
}

inline void check_inside(const SynthScript& script, const SynthAction& a, double cx,
                         double cy) {
  const double half = a.size / 2;
  if (cx - half < 0 || cx + half > script.canvas_w || cy - half < 0 ||
      cy + half > script.canvas_h)
    throw ValidationError("blob leaves canvas in action '" + a.label + "'");
}

}  // namespace detail

inline void validate_script(const SynthScript& script) {
  if (script.canvas_w < 8 || script.canvas_h < 8)
    throw ValidationError("canvas too small");
  if (script.actions.empty()) throw ValidationError("script has no actions");
  for (const auto& a : script.actions) {
    if (a.duration < 2) throw ValidationError("action durations must be >= 2");
    if (a.size < 2) throw ValidationError("blob size must be >= 2");
    if (a.motif == Motif::oscillate_blob && a.period <= 0)
      throw ValidationError("oscillation period must be positive");
  }
}

/// Blob center(s) of an action at local frame t.
inline std::vector<std::pair<double, double>> action_positions(const SynthAction& a, int t) {
  const double norm = std::hypot(a.dir_x, a.dir_y);
  const double ux = norm > 0 ? a.dir_x / norm : 1.0;
  const double uy = norm > 0 ? a.dir_y / norm : 0.0;
  switch (a.motif) {
    case Motif::static_blob:
      return {{a.start_x, a.start_y}};
    case Motif::translate_blob:
      return {{a.start_x + ux * a.speed * t, a.start_y + uy * a.speed * t}};
    case Motif::oscillate_blob: {
      const double s = a.amp * std::sin(2.0 * std::numbers::pi_v<double> * t / a.period);
      return {{a.start_x + ux * s, a.start_y + uy * s}};
    }
    case Motif::swap_blobs: {
      const double f = a.duration > 1 ? static_cast<double>(t) / (a.duration - 1) : 0.0;
      return {{a.start_x + (a.bx - a.start_x) * f, a.start_y + (a.by - a.start_y) * f},
              {a.bx + (a.start_x - a.bx) * f, a.by + (a.start_y - a.by) * f}};
    }
  }
  return {};
}

inline std::pair<FrameSequence, std::vector<GroundTruthSegment>> render(
    const SynthScript& script, const std::string& source_id = "synth") {
  validate_script(script);
  // validate trajectories before rendering anything
  for (const auto& a : script.actions)
    for (int t = 0; t < a.duration; ++t)
      for (const auto& [cx, cy] : action_positions(a, t))
        detail::check_inside(script, a, cx, cy);

  FrameSequence seq;
  seq.width = script.canvas_w;
  seq.height = script.canvas_h;
  seq.source_id = source_id;
  std::vector<GroundTruthSegment> labels;
  std::mt19937_64 rng(script.seed);

  int frame_index = 0;
  for (const auto& a : script.actions) {
    GroundTruthSegment seg;
    seg.action_label = a.label;
    seg.start_frame = frame_index;
    seg.sequence_id = source_id;
    for (int t = 0; t < a.duration; ++t) {
      Matf img(script.canvas_h, script.canvas_w, 16.0f);
      int phase = 0;
      for (const auto& [cx, cy] : action_positions(a, t))
        detail::draw_blob(img, cx, cy, a.size, script.checker_cell, phase++);
      if (script.noise_sigma > 0) {
        for (float& v : img.data()) {
          double nv = v + script.noise_sigma * detail::gaussian(rng);
          v = static_cast<float>(nv < 0 ? 0 : (nv > 255 ? 255 : nv));
        }
      }
      Frame f;
      f.pixels = std::move(img);
      f.index = frame_index++;
      seq.frames.push_back(std::move(f));
    }
    seg.end_frame = frame_index - 1;
    labels.push_back(std::move(seg));
  }
  return {std::move(seq), std::move(labels)};
}

/// Reorder the actions; motifs carry their own geometry, so a permuted script
/// renders the same per-action footage in a different order.
inline SynthScript permute(const SynthScript& script, const std::vector<int>& order) {
  if (order.size() != script.actions.size())
    throw ValidationError("permute: order length mismatch");
  std::vector<char> seen(order.size(), 0);
  for (int idx : order) {
    if (idx < 0 || idx >= static_cast<int>(order.size()) || seen[idx])
      throw ValidationError("permute: not a permutation");
    seen[idx] = 1;
  }
  SynthScript out = script;
  out.actions.clear();
  for (int idx : order) out.actions.push_back(script.actions[idx]);
  return out;
}

/// Re-render the same content at a different playback speed: durations scale
/// by 1/speed and per-frame motion by speed, so a 0.5x warp is true slow
/// motion. The expected matched velocity against the original is `speed`.
inline SynthScript time_warp(const SynthScript& script, double speed) {
  if (!(speed > 0)) throw ValidationError("time_warp: speed must be positive");
  SynthScript out = script;
  for (auto& a : out.actions) {
    a.duration = std::max(2, static_cast<int>(std::lround(a.duration / speed)));
    a.speed *= speed;
    a.period /= speed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// script text format: key=value lines; actions as
//   action=<label>,<duration>,<motif>[,k=v ...]   with positions as XxY

namespace detail {

inline std::pair<double, double> parse_xy(const std::string& s, const char* what) {
  auto parts = split(s, 'x');
  if (parts.size() != 2) throw ValidationError(std::string("expected XxY for ") + what);
  return {std::stod(parts[0]), std::stod(parts[1])};
}

}  // namespace detail

inline SynthScript parse_script(const std::vector<std::string>& lines) {
  SynthScript script;
  for (const std::string& raw : lines) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("malformed script line: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "canvas") {
      auto [w, h] = detail::parse_xy(value, "canvas");
      script.canvas_w = static_cast<int>(w);
      script.canvas_h = static_cast<int>(h);
    } else if (key == "seed") {
      script.seed = std::stoull(value);
    } else if (key == "noise_sigma") {
      script.noise_sigma = std::stod(value);
    } else if (key == "cell") {
      script.checker_cell = std::stoi(value);
    } else if (key == "action") {
      auto fields = split(value, ',');
      if (fields.size() < 3) throw ValidationError("malformed action line: " + line);
      SynthAction a;
      a.label = trim(fields[0]);
      a.duration = std::stoi(trim(fields[1]));
      a.motif = parse_motif(trim(fields[2]));
      for (std::size_t k = 3; k < fields.size(); ++k) {
        const std::string field = trim(fields[k]);
        const auto feq = field.find('=');
        if (feq == std::string::npos)
          throw ValidationError("malformed action parameter: " + field);
        const std::string pkey = field.substr(0, feq);
        const std::string pval = field.substr(feq + 1);
        if (pkey == "size") {
          a.size = std::stod(pval);
        } else if (pkey == "speed") {
          a.speed = std::stod(pval);
        } else if (pkey == "amp") {
          a.amp = std::stod(pval);
        } else if (pkey == "period") {
          a.period = std::stod(pval);
        } else if (pkey == "start") {
          std::tie(a.start_x, a.start_y) = detail::parse_xy(pval, "start");
        } else if (pkey == "dir") {
          std::tie(a.dir_x, a.dir_y) = detail::parse_xy(pval, "dir");
        } else if (pkey == "b") {
          std::tie(a.bx, a.by) = detail::parse_xy(pval, "b");
        } else {
          throw ValidationError("unknown action parameter: " + pkey);
        }
      }
      script.actions.push_back(std::move(a));
    } else {
      throw ValidationError("unknown script key: " + key);
    }
  }
  validate_script(script);
  return script;
}

inline SynthScript load_script(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return parse_script(lines);
}

inline void save_script(const SynthScript& script, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "canvas=" << script.canvas_w << 'x' << script.canvas_h << '\n';
  os << "seed=" << script.seed << '\n';
  os << "noise_sigma=" << script.noise_sigma << '\n';
  os << "cell=" << script.checker_cell << '\n';
  for (const auto& a : script.actions) {
    os << "action=" << a.label << ',' << a.duration << ',' << motif_name(a.motif)
       << ",size=" << a.size << ",start=" << a.start_x << 'x' << a.start_y;
    if (a.motif == Motif::translate_blob)
      os << ",speed=" << a.speed << ",dir=" << a.dir_x << 'x' << a.dir_y;
    if (a.motif == Motif::oscillate_blob)
      os << ",amp=" << a.amp << ",period=" << a.period << ",dir=" << a.dir_x << 'x'
         << a.dir_y;
    if (a.motif == Motif::swap_blobs) os << ",b=" << a.bx << 'x' << a.by;
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace artis
