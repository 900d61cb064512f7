#include "depthcal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include "depthcal/errors.hpp"

namespace depthcal {

namespace {

using Key = std::pair<int, int>;  // (frame_id, id)

std::string key_string(const Key& k) {
  return "(frame " + std::to_string(k.first) + ", id " + std::to_string(k.second) + ")";
}

std::map<Key, Vec2> index_2d(std::span<const Observation2d> obs) {
  std::map<Key, Vec2> index;
  for (const Observation2d& o : obs) {
    if (!o.px.allFinite()) {
      throw ParseError("non-finite 2d observation at " + key_string({o.frame_id, o.id}));
    }
    if (!index.emplace(Key{o.frame_id, o.id}, o.px).second) {
      throw ParseError("duplicate key " + key_string({o.frame_id, o.id}));
    }
  }
  return index;
}

std::map<Key, Vec3> index_3d(std::span<const Observation3d> obs) {
  std::map<Key, Vec3> index;
  for (const Observation3d& o : obs) {
    if (o.frame != Frame::unspecified && o.frame != Frame::camera_left) {
      throw FrameMismatch("3d observation at " + key_string({o.frame_id, o.id}) +
                          " is tagged " + std::string(to_string(o.frame)) +
                          ", expected camera-left");
    }
    if (!o.mm.allFinite()) {
      throw ParseError("non-finite 3d observation at " + key_string({o.frame_id, o.id}));
    }
    if (!index.emplace(Key{o.frame_id, o.id}, o.mm).second) {
      throw ParseError("duplicate key " + key_string({o.frame_id, o.id}));
    }
  }
  return index;
}

struct NeighborSamples {
  std::vector<double> samples;
  int skipped = 0;
};

NeighborSamples neighbor_samples(std::span<const IdPoint3> points,
                                 std::span<const CaliperDistance> caliper) {
  std::map<int, Vec3> by_id;
  for (const IdPoint3& p : points) {
    if (!by_id.emplace(p.id, p.mm).second) {
      throw ParseError("duplicate point id " + std::to_string(p.id));
    }
  }
  std::vector<CaliperDistance> sorted(caliper.begin(), caliper.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CaliperDistance& a, const CaliperDistance& b) {
              return std::tie(a.id_a, a.id_b) < std::tie(b.id_a, b.id_b);
            });
  NeighborSamples out;
  for (const CaliperDistance& c : sorted) {
    if (!(c.distance_mm >= 0.0) || !std::isfinite(c.distance_mm)) {
      throw ParseError("invalid caliper distance for pair (" + std::to_string(c.id_a) +
                       ", " + std::to_string(c.id_b) + ")");
    }
    const auto a = by_id.find(c.id_a);
    const auto b = by_id.find(c.id_b);
    if (a == by_id.end() || b == by_id.end()) {
      ++out.skipped;
      continue;
    }
    out.samples.push_back(std::abs((a->second - b->second).norm() - c.distance_mm));
  }
  return out;
}

std::string format_stats(const std::optional<ErrorStats>& stats) {
  if (!stats.has_value()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", stats->mean, stats->stddev);
  return buf;
}

/// Column width in characters, counting UTF-8 continuation bytes as zero
/// (the only non-ASCII output is the plus-minus sign).
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++w;
  }
  return w;
}

void append_section(std::ostringstream& out, const std::string& title,
                    const std::vector<ReportCell>& cells, bool caliper_style) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"cell", "mean±std", "n", caliper_style ? "skipped" : "excluded", "note"});
  for (const ReportCell& cell : cells) {
    std::vector<std::string> row;
    row.push_back(cell.name);
    row.push_back(format_stats(cell.stats));
    row.push_back(cell.stats.has_value() ? std::to_string(cell.stats->n) : "-");
    if (caliper_style) {
      row.push_back(std::to_string(cell.skipped_pairs));
    } else {
      row.push_back(std::to_string(cell.excluded_a) + "+" + std::to_string(cell.excluded_b));
    }
    row.push_back(cell.note);
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(row[c]));
    }
  }
  out << title << "\n";
  for (const auto& row : rows) {
    out << " ";
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << " " << row[c];
      if (c + 1 < row.size()) {
        out << std::string(widths[c] - display_width(row[c]), ' ');
      }
    }
    out << "\n";
  }
}

}  // namespace

ErrorStats make_error_stats(std::vector<double> samples, std::string unit) {
  if (samples.empty()) {
    throw EmptyIntersection("no samples to aggregate");
  }
  ErrorStats stats;
  stats.n = static_cast<int>(samples.size());
  double sum = 0.0;
  for (double s : samples) sum += s;
  stats.mean = sum / static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - stats.mean) * (s - stats.mean);
  stats.stddev = std::sqrt(var / static_cast<double>(samples.size()));
  stats.unit = std::move(unit);
  stats.samples = std::move(samples);
  return stats;
}

ErrorStats error_2d(std::span<const Observation2d> a, std::span<const Observation2d> b) {
  const auto index_a = index_2d(a);
  const auto index_b = index_2d(b);
  std::vector<double> samples;
  for (const auto& [key, pa] : index_a) {
    const auto it = index_b.find(key);
    if (it != index_b.end()) {
      samples.push_back((pa - it->second).norm());
    }
  }
  if (samples.empty()) {
    throw EmptyIntersection("error_2d: no shared (frame, id) keys");
  }
  return make_error_stats(std::move(samples), "px");
}

ErrorStats error_3d(std::span<const Observation3d> a, std::span<const Observation3d> b) {
  const auto index_a = index_3d(a);
  const auto index_b = index_3d(b);
  std::vector<double> samples;
  for (const auto& [key, pa] : index_a) {
    const auto it = index_b.find(key);
    if (it != index_b.end()) {
      samples.push_back((pa - it->second).norm());
    }
  }
  if (samples.empty()) {
    throw EmptyIntersection("error_3d: no shared (frame, id) keys");
  }
  return make_error_stats(std::move(samples), "mm");
}

NeighborDistanceStats neighbor_distances(std::span<const IdPoint3> points,
                                         std::span<const CaliperDistance> caliper) {
  NeighborSamples ns = neighbor_samples(points, caliper);
  if (ns.samples.empty()) {
    throw MissingNeighbor("no caliper pair has both endpoints measured");
  }
  return NeighborDistanceStats{make_error_stats(std::move(ns.samples), "mm"), ns.skipped};
}

EvaluationReport build_report(const std::string& dataset, const ReportInputs& inputs) {
  EvaluationReport report;
  report.dataset = dataset;

  const auto pair_cell_2d = [](std::string name, const std::vector<Observation2d>& a,
                               const std::vector<Observation2d>& b) {
    ReportCell cell;
    cell.name = std::move(name);
    if (a.empty() || b.empty()) {
      cell.missing = true;
      cell.note = "source not available";
      return cell;
    }
    try {
      cell.stats = error_2d(a, b);
      cell.excluded_a = static_cast<int>(a.size()) - cell.stats->n;
      cell.excluded_b = static_cast<int>(b.size()) - cell.stats->n;
    } catch (const EmptyIntersection& e) {
      cell.missing = true;
      cell.note = e.what();
    } catch (const ParseError& e) {
      throw ParseError(cell.name + ": " + e.what());
    }
    return cell;
  };

  const auto pair_cell_3d = [](std::string name, const std::vector<Observation3d>& a,
                               const std::vector<Observation3d>& b) {
    ReportCell cell;
    cell.name = std::move(name);
    if (a.empty() || b.empty()) {
      cell.missing = true;
      cell.note = "source not available";
      return cell;
    }
    try {
      cell.stats = error_3d(a, b);
      cell.excluded_a = static_cast<int>(a.size()) - cell.stats->n;
      cell.excluded_b = static_cast<int>(b.size()) - cell.stats->n;
    } catch (const EmptyIntersection& e) {
      cell.missing = true;
      cell.note = e.what();
    } catch (const FrameMismatch& e) {
      throw FrameMismatch(cell.name + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(cell.name + ": " + e.what());
    }
    return cell;
  };

  const auto caliper_cell = [&inputs](std::string name,
                                      const std::vector<Observation3d>& source) {
    ReportCell cell;
    cell.name = std::move(name);
    if (source.empty() || inputs.caliper.empty()) {
      cell.missing = true;
      cell.note = "source not available";
      return cell;
    }
    try {
      std::map<int, std::vector<IdPoint3>> per_frame;
      for (const Observation3d& o : source) {
        per_frame[o.frame_id].push_back({o.id, o.mm});
      }
      std::vector<double> samples;
      for (const auto& [frame_id, points] : per_frame) {
        NeighborSamples ns = neighbor_samples(points, inputs.caliper);
        samples.insert(samples.end(), ns.samples.begin(), ns.samples.end());
        cell.skipped_pairs += ns.skipped;
      }
      if (samples.empty()) {
        cell.missing = true;
        cell.note = "no caliper pair has both endpoints measured";
      } else {
        cell.stats = make_error_stats(std::move(samples), "mm");
      }
    } catch (const ParseError& e) {
      throw ParseError(cell.name + ": " + e.what());
    }
    return cell;
  };

  report.table_2d.push_back(pair_cell_2d("p_gt-p_reproj left", inputs.gt_left, inputs.reproj_left));
  report.table_2d.push_back(pair_cell_2d("p_m-p_reproj left", inputs.model_left, inputs.reproj_left));
  report.table_2d.push_back(pair_cell_2d("p_m-p_gt left", inputs.model_left, inputs.gt_left));
  report.table_2d.push_back(pair_cell_2d("p_gt-p_reproj right", inputs.gt_right, inputs.reproj_right));
  report.table_2d.push_back(pair_cell_2d("p_m-p_reproj right", inputs.model_right, inputs.reproj_right));
  report.table_2d.push_back(pair_cell_2d("p_m-p_gt right", inputs.model_right, inputs.gt_right));

  report.table_3d.push_back(pair_cell_3d("d_p_gt-d_he", inputs.depth_gt, inputs.depth_handeye));
  report.table_3d.push_back(pair_cell_3d("d_p_m-d_p_gt", inputs.depth_model, inputs.depth_gt));
  report.table_3d.push_back(pair_cell_3d("d_p_m-d_he", inputs.depth_model, inputs.depth_handeye));

  report.caliper.push_back(caliper_cell("d_he", inputs.depth_handeye));
  report.caliper.push_back(caliper_cell("d_p_gt", inputs.depth_gt));
  report.caliper.push_back(caliper_cell("d_p_m", inputs.depth_model));

  const auto all_missing = [](const std::vector<ReportCell>& cells) {
    return std::all_of(cells.begin(), cells.end(),
                       [](const ReportCell& c) { return c.missing; });
  };
  if (all_missing(report.table_2d) && all_missing(report.table_3d) &&
      all_missing(report.caliper)) {
    throw EmptyIntersection("build_report: not a single cell could be evaluated");
  }
  return report;
}

std::string format_text_table(const EvaluationReport& report) {
  std::ostringstream out;
  out << "dataset: " << report.dataset << "\n";
  out << "values are mean±std (population std) over evaluated point instances\n\n";
  append_section(out, "2D error [px]", report.table_2d, false);
  out << "\n";
  append_section(out, "3D error [mm]", report.table_3d, false);
  out << "\n";
  append_section(out, "caliper deviation [mm]", report.caliper, true);
  return out.str();
}

}  // namespace depthcal
