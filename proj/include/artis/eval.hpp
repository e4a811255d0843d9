#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/seqmatch.hpp"

namespace artis {

struct GroundTruthSegment {
  std::string action_label;
  int start_frame = 0;  // inclusive
  int end_frame = 0;    // inclusive
  std::string sequence_id;

  int length() const { return end_frame - start_frame + 1; }
};

enum class AreaKind { within_class, between_class };

/// Rectangle in the (template, observation) index plane spanned by a pair of
/// labeled segments; the unit of TP/FP counting.
struct CorrespondenceArea {
  GroundTruthSegment template_segment;
  GroundTruthSegment observation_segment;
  AreaKind kind = AreaKind::between_class;
};

struct EvalRow {
  double threshold = 0;
  int tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  int class_count = 0;
  int within_count = 0;
  int between_count = 0;

  const EvalRow& best() const {
    std::size_t best_idx = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].f1 > rows[best_idx].f1) best_idx = k;
    return rows[best_idx];
  }
};

// ---------------------------------------------------------------------------
// labels CSV: header "action,start_frame,end_frame", 0-based inclusive frames

inline void validate_labels(const std::vector<GroundTruthSegment>& segments) {
  std::vector<GroundTruthSegment> sorted = segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const GroundTruthSegment& a, const GroundTruthSegment& b) {
              return a.start_frame < b.start_frame;
            });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].start_frame < 0)
      throw ValidationError("label segment with negative start frame");
    if (sorted[k].start_frame > sorted[k].end_frame)
      throw ValidationError("label segment with start > end: " + sorted[k].action_label);
    if (k > 0 && sorted[k].start_frame <= sorted[k - 1].end_frame)
      throw ValidationError("overlapping label segments: " + sorted[k - 1].action_label +
                            " and " + sorted[k].action_label);
  }
}

inline std::vector<GroundTruthSegment> load_labels(const std::string& path,
                                                   const std::string& sequence_id = "") {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty labels file: " + path);
  if (trim(line) != "action,start_frame,end_frame")
    throw ValidationError("unexpected labels CSV header in " + path);
  std::vector<GroundTruthSegment> segments;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() != 3) throw ValidationError("malformed labels row in " + path);
    GroundTruthSegment seg;
    seg.action_label = trim(fields[0]);
    seg.start_frame = std::stoi(fields[1]);
    seg.end_frame = std::stoi(fields[2]);
    seg.sequence_id = sequence_id.empty() ? path : sequence_id;
    segments.push_back(std::move(seg));
  }
  validate_labels(segments);
  return segments;
}

inline void save_labels_csv(const std::vector<GroundTruthSegment>& segments,
                            const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "action,start_frame,end_frame\n";
  for (const auto& seg : segments)
    os << seg.action_label << ',' << seg.start_frame << ',' << seg.end_frame << '\n';
  if (!os) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------

/// Cartesian product of template and observation segments, partitioned by
/// label equality.
inline std::vector<CorrespondenceArea> build_areas(
    const std::vector<GroundTruthSegment>& temp_labels,
    const std::vector<GroundTruthSegment>& obs_labels) {
  if (temp_labels.empty() || obs_labels.empty())
    throw ValidationError("build_areas: empty label set");
  std::vector<CorrespondenceArea> areas;
  areas.reserve(temp_labels.size() * obs_labels.size());
  for (const auto& t : temp_labels)
    for (const auto& o : obs_labels) {
      CorrespondenceArea area;
      area.template_segment = t;
      area.observation_segment = o;
      area.kind = t.action_label == o.action_label ? AreaKind::within_class
                                                   : AreaKind::between_class;
      areas.push_back(std::move(area));
    }
  return areas;
}

/// Distinct matched points inside the area's rectangle divided by the shorter
/// of the two segment lengths.
inline double coverage_ratio(const std::vector<MatchSegment>& matches,
                             const CorrespondenceArea& area) {
  std::set<std::pair<int, int>> inside;
  const auto& t = area.template_segment;
  const auto& o = area.observation_segment;
  for (const MatchSegment& seg : matches)
    for (const Correspondence& c : seg.pairs)
      if (c.template_index >= t.start_frame && c.template_index <= t.end_frame &&
          c.observation_index >= o.start_frame && c.observation_index <= o.end_frame)
        inside.insert({c.template_index, c.observation_index});
  const int min_len = std::min(t.length(), o.length());
  return static_cast<double>(inside.size()) / static_cast<double>(min_len);
}

/// Sweep coverage thresholds: an area counts as a hit at threshold t iff its
/// coverage ratio strictly exceeds t. precision = 1 when nothing is asserted.
inline EvalReport score(const std::vector<MatchSegment>& matches,
                        const std::vector<CorrespondenceArea>& areas,
                        const std::vector<double>& thresholds) {
  for (std::size_t k = 1; k < thresholds.size(); ++k)
    if (thresholds[k] < thresholds[k - 1])
      throw ValidationError("score: thresholds must be sorted ascending");

  std::vector<double> coverage(areas.size());
  std::set<std::string> labels;
  EvalReport report;
  for (std::size_t k = 0; k < areas.size(); ++k) {
    coverage[k] = coverage_ratio(matches, areas[k]);
    labels.insert(areas[k].template_segment.action_label);
    labels.insert(areas[k].observation_segment.action_label);
    if (areas[k].kind == AreaKind::within_class)
      ++report.within_count;
    else
      ++report.between_count;
  }
  report.class_count = static_cast<int>(labels.size());

  for (double theta : thresholds) {
    EvalRow row;
    row.threshold = theta;
    for (std::size_t k = 0; k < areas.size(); ++k) {
      const bool hit = coverage[k] > theta;
      if (areas[k].kind == AreaKind::within_class) {
        if (hit)
          ++row.tp;
        else
          ++row.fn;
      } else if (hit) {
        ++row.fp;
      }
    }
    row.precision = row.tp + row.fp == 0 ? 1.0
                                         : static_cast<double>(row.tp) /
                                               static_cast<double>(row.tp + row.fp);
    row.recall = row.tp + row.fn == 0
                     ? 0.0
                     : static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn);
    row.f1 = row.precision + row.recall == 0
                 ? 0.0
                 : 2.0 * row.precision * row.recall / (row.precision + row.recall);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// report CSV

inline void save_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# classes=%d within_areas=%d between_areas=%d\n",
                report.class_count, report.within_count, report.between_count);
  os << buf;
  os << "threshold,tp,fp,fn,precision,recall,f1\n";
  for (const EvalRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%d,%d,%.9f,%.9f,%.9f\n", row.threshold,
                  row.tp, row.fp, row.fn, row.precision, row.recall, row.f1);
    os << buf;
  }
  if (!report.rows.empty()) {
    const EvalRow& best = report.best();
    std::snprintf(buf, sizeof(buf), "# best_f1=%.9f at_threshold=%.6f\n", best.f1,
                  best.threshold);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path);
}

inline EvalReport load_report_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  EvalReport report;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# classes=%d within_areas=%d between_areas=%d",
                  &report.class_count, &report.within_count, &report.between_count);
      continue;
    }
    if (line.rfind("threshold,", 0) == 0) continue;
    auto fields = split(line, ',');
    if (fields.size() != 7) throw ValidationError("malformed report row in " + path);
    EvalRow row;
    row.threshold = std::stod(fields[0]);
    row.tp = std::stoi(fields[1]);
    row.fp = std::stoi(fields[2]);
    row.fn = std::stoi(fields[3]);
    row.precision = std::stod(fields[4]);
    row.recall = std::stod(fields[5]);
    row.f1 = std::stod(fields[6]);
    report.rows.push_back(row);
  }
  return report;
}

/// Per-area coverage dump for match-inspection figures.
inline void save_coverage_csv(const std::vector<MatchSegment>& matches,
                              const std::vector<CorrespondenceArea>& areas,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "template_label,template_start,template_end,observation_label,observation_start,"
        "observation_end,kind,coverage\n";
  char buf[64];
  for (const auto& area : areas) {
    std::snprintf(buf, sizeof(buf), "%.9f", coverage_ratio(matches, area));
    os << area.template_segment.action_label << ',' << area.template_segment.start_frame
       << ',' << area.template_segment.end_frame << ','
       << area.observation_segment.action_label << ','
       << area.observation_segment.start_frame << ','
       << area.observation_segment.end_frame << ','
       << (area.kind == AreaKind::within_class ? "within" : "between") << ',' << buf
       << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace artis
