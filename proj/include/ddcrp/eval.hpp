#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ddcrp/rank.hpp"

namespace ddcrp {

struct GroundTruthObject {
  int object_id = 0;
  BBox bbox;
  Mask mask;  // empty (0x0) when only a box is known
};

struct GroundTruthFrame {
  std::string frame_id;
  std::vector<GroundTruthObject> objects;
};

/// Per-frame result. first_match_rank[o] is the 1-based k at which object o
/// was first matched, or 0 when it never matches within k_max.
struct FrameEval {
  std::vector<double> precision_at_k;
  std::vector<double> recall_at_k;
  std::vector<int> first_match_rank;
  bool empty_truth = false;
};

struct EvalCurves {
  std::vector<double> precision_at_k;  // index k-1
  std::vector<double> recall_at_k;
  std::vector<double> global_recall_at_k;
  double auc_precision = 0.0;
  double auc_recall = 0.0;
  double auc_global_recall = 0.0;
};

/// Greedy one-to-one matching in rank order: each proposal claims the
/// unmatched object of highest bbox IoU when that IoU >= iou_min.
FrameEval evaluate_frame(const std::vector<RankedProposal>& ranked, const GroundTruthFrame& truth, double iou_min,
                         int k_max);

/// Mean of a curve over k = 1..k_max by the trapezoid rule, normalized to [0, 1].
double curve_auc(const std::vector<double>& curve);

/// Averages per-frame curves and computes global recall over the distinct
/// object ids of the whole sequence.
EvalCurves aggregate(const std::vector<FrameEval>& frames, const std::vector<GroundTruthFrame>& truth, int k_max);

EvalCurves frame_curves(const FrameEval& frame, const GroundTruthFrame& truth, int k_max);

/// Object id per pixel (0 = background) from a 16-bit PNG, or bboxes from
/// JSON Lines ({"object_id": int, "bbox": [x_min, y_min, x_max, y_max]}).
GroundTruthFrame load_ground_truth(const std::filesystem::path& path, const std::string& frame_id);

double mask_iou(const Mask& a, const Mask& b);

}  // namespace ddcrp
