#include "motseg/evaluation.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace motseg {

namespace {
double ratio(std::uint64_t num, std::uint64_t den, double empty_score) {
  return den == 0 ? empty_score : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MaskMetrics PixelCounts::metrics(double empty_score) const {
  return {ratio(inter, uni(), empty_score), ratio(inter, pred, empty_score), ratio(inter, gt, empty_score)};
}

PixelCounts count_pixels(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "mask_metrics");
  PixelCounts n;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    n.pred += p;
    n.gt += g;
    n.inter += p && g;
  }
  return n;
}

MaskMetrics mask_metrics(const BinaryMask& pred, const BinaryMask& gt) { return count_pixels(pred, gt).metrics(); }

ClassMetrics evaluate_sequence(const std::string& name, const std::vector<BinaryMask>& preds,
                               const std::vector<BinaryMask>& gts, double empty_score) {
  if (preds.size() != gts.size()) {
    throw DataError("evaluate_sequence '" + name + "': " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(gts.size()) + " ground-truth frames");
  }
  PixelCounts total;
  for (std::size_t i = 0; i < preds.size(); ++i) total += count_pixels(preds[i], gts[i]);
  const MaskMetrics m = total.metrics(empty_score);
  return {name, m.iou, m.precision, m.recall, preds.size()};
}

void MetricsReport::update_averages() {
  averages = {};
  if (per_class.empty()) return;
  for (const auto& c : per_class) {
    averages.iou += c.miou;
    averages.precision += c.precision;
    averages.recall += c.recall;
  }
  const double n = static_cast<double>(per_class.size());
  averages.iou /= n;
  averages.precision /= n;
  averages.recall /= n;
}

MetricsReport make_report(const std::string& method, std::vector<ClassMetrics> per_class) {
  MetricsReport r{method, std::move(per_class), {}};
  r.update_averages();
  return r;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.per_class) {
    classes.push_back({{"name", c.name},
                       {"miou", c.miou},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"frame_count", c.frame_count}});
  }
  nlohmann::json j = {{"method", report.method},
                      {"per_class", classes},
                      {"averages",
                       {{"miou", report.averages.iou},
                        {"precision", report.averages.precision},
                        {"recall", report.averages.recall}}}};
  return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.method = j.at("method").get<std::string>();
    for (const auto& c : j.at("per_class")) {
      r.per_class.push_back({c.at("name").get<std::string>(), c.at("miou").get<double>(),
                             c.at("precision").get<double>(), c.at("recall").get<double>(),
                             c.at("frame_count").get<std::size_t>()});
    }
    const auto& a = j.at("averages");
    r.averages = {a.at("miou").get<double>(), a.at("precision").get<double>(), a.at("recall").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics report: ") + e.what());
  }
  return r;
}

namespace {
std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}
}  // namespace

std::string comparison_table(const std::vector<MetricsReport>& reports, bool all_metrics) {
  if (reports.empty()) return {};
  const auto& classes = reports.front().per_class;
  for (const auto& r : reports) {
    if (r.per_class.size() != classes.size()) throw DataError("comparison_table: reports cover different classes");
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (r.per_class[i].name != classes[i].name) throw DataError("comparison_table: class order differs");
    }
  }
  std::size_t name_w = 7;
  for (const auto& c : classes) name_w = std::max(name_w, c.name.size());
  const int col_w = 10;
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_w)) << "Object";
  // First column of each group, wide enough for its header.
  auto lead_w = [&](const MetricsReport& r) {
    const std::size_t label = r.method.size() + (all_metrics ? 4 : 0);
    return std::max<int>(col_w, static_cast<int>(label) + 2);
  };
  for (const auto& r : reports) {
    if (all_metrics) {
      out << std::right << std::setw(lead_w(r)) << (r.method + " IoU") << std::setw(col_w) << "Prec" << std::setw(col_w)
          << "Rec";
    } else {
      out << std::right << std::setw(lead_w(r)) << r.method;
    }
  }
  out << '\n';
  auto row = [&](const std::string& name, auto get) {
    out << std::left << std::setw(static_cast<int>(name_w)) << name;
    for (const auto& r : reports) {
      const MaskMetrics m = get(r);
      if (all_metrics) {
        out << std::right << std::setw(lead_w(r)) << pct(m.iou) << std::setw(col_w) << pct(m.precision)
            << std::setw(col_w) << pct(m.recall);
      } else {
        out << std::right << std::setw(lead_w(r)) << pct(m.iou);
      }
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < classes.size(); ++i) {
    row(classes[i].name, [&](const MetricsReport& r) {
      const auto& c = r.per_class[i];
      return MaskMetrics{c.miou, c.precision, c.recall};
    });
  }
  row("Average", [](const MetricsReport& r) { return r.averages; });
  return out.str();
}

std::vector<std::pair<std::string, AblationToggles>> ablation_schedule() {
  std::vector<std::pair<std::string, AblationToggles>> rows;
  AblationToggles t;
  rows.emplace_back("full", t);
  t.min_area = false;
  rows.emplace_back("-min_mask_size", t);
  t.gripper_distance = false;
  rows.emplace_back("-max_gripper_dist", t);
  t.border_deletion = false;
  rows.emplace_back("-border_deletion", t);
  t.loss_weight = false;
  rows.emplace_back("-gripper_loss_weight", t);
  t.occluder = false;
  rows.emplace_back("-occluding_object", t);
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "label,min_area,gripper_distance,border_deletion,loss_weight,occluder,flow_mode,miou\n";
  static const char* modes[3] = {"forward", "intersection", "union"};
  for (const auto& r : rows) {
    for (int m = 0; m < 3; ++m) {
      const auto& t = r.toggles;
      out << r.label << ',' << t.min_area << ',' << t.gripper_distance << ',' << t.border_deletion << ','
          << t.loss_weight << ',' << t.occluder << ',' << modes[m] << ',' << r.miou[m] << '\n';
    }
  }
  return out.str();
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(22) << "Row" << std::right << std::setw(14) << "Forward" << std::setw(14)
      << "Intersection" << std::setw(14) << "Union" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(22) << r.label << std::right << std::setw(14) << pct(r.miou[0]) << std::setw(14)
        << pct(r.miou[1]) << std::setw(14) << pct(r.miou[2]) << '\n';
  }
  return out.str();
}

}  // namespace motseg
