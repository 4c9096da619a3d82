#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "motseg/image.hpp"

namespace motseg {

struct MaskMetrics {
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Pixel counts behind the metrics; adding counts pools frames.
struct PixelCounts {
  std::uint64_t pred = 0;
  std::uint64_t gt = 0;
  std::uint64_t inter = 0;

  PixelCounts& operator+=(const PixelCounts& o) {
    pred += o.pred;
    gt += o.gt;
    inter += o.inter;
    return *this;
  }
  std::uint64_t uni() const { return pred + gt - inter; }

  // A 0/0 ratio scores empty_score (1 by default: absence predicted
  // correctly).
  MaskMetrics metrics(double empty_score = 1.0) const;
};

PixelCounts count_pixels(const BinaryMask& pred, const BinaryMask& gt);
MaskMetrics mask_metrics(const BinaryMask& pred, const BinaryMask& gt);

struct ClassMetrics {
  std::string name;
  double miou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t frame_count = 0;
};

// Micro average over the frames of one object.
ClassMetrics evaluate_sequence(const std::string& name, const std::vector<BinaryMask>& preds,
                               const std::vector<BinaryMask>& gts, double empty_score = 1.0);

struct MetricsReport {
  std::string method;
  std::vector<ClassMetrics> per_class;
  MaskMetrics averages;  // unweighted over classes

  void update_averages();
};

MetricsReport make_report(const std::string& method, std::vector<ClassMetrics> per_class);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);

// Per-class rows, one column group per report, plus an Average row.
// All reports must list the same classes in the same order.
std::string comparison_table(const std::vector<MetricsReport>& reports, bool all_metrics = false);

// Cumulative toggles, in the order they are dropped.
struct AblationToggles {
  bool min_area = true;
  bool gripper_distance = true;
  bool border_deletion = true;
  bool loss_weight = true;
  bool occluder = true;
};

struct AblationRow {
  std::string label;
  AblationToggles toggles;
  std::array<double, 3> miou{};  // forward, intersection, union
};

// Full configuration, then each step dropped together with all previous
// ones: min mask size, gripper distance, border deletion, gripper loss
// weight, occluding object.
std::vector<std::pair<std::string, AblationToggles>> ablation_schedule();

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace motseg
