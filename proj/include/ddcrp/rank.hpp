#pragma once

#include <array>
#include <vector>

#include "ddcrp/gestalt.hpp"
#include "ddcrp/proposals.hpp"

namespace ddcrp {

/// Regression from Gestalt measures to expected IoU with a ground-truth
/// object. Predictions are clamped to [0, 1].
class Scorer {
 public:
  virtual ~Scorer() = default;
  [[nodiscard]] virtual double raw_predict(const GestaltMeasures& m) const = 0;
  [[nodiscard]] double predict(const GestaltMeasures& m) const;
};

/// Ridge regression on standardized measures.
struct ScoringModel : Scorer {
  std::array<double, kNumMeasures> feature_means{};
  std::array<double, kNumMeasures> feature_scales{1, 1, 1, 1, 1, 1, 1};
  std::array<double, kNumMeasures> coefficients{};
  double bias = 0.0;

  [[nodiscard]] double raw_predict(const GestaltMeasures& m) const override;
};

struct TrainingExample {
  GestaltMeasures measures;
  double target_iou = 0.0;
};

/// Minimizes mean squared error + ridge * |coefficients|^2 over standardized
/// features (population statistics); the bias is unpenalized.
ScoringModel fit_scoring_model(const std::vector<TrainingExample>& training, double ridge);

struct RankedProposal {
  Proposal proposal;
  GestaltMeasures measures;
  double score = 0.0;
  double weighted_score = 0.0;
  BBox bbox;
};

enum class RankKey { kPlain, kWeighted };

/// masks[i] belongs to proposals[i]. Sorted descending by the key, ties by
/// likelihood descending then superpixel list ascending.
std::vector<RankedProposal> score_proposals(const std::vector<Proposal>& proposals, const std::vector<Mask>& masks,
                                            const Scorer& model, RankKey key);

/// Orders an already scored list by the key.
void sort_ranked(std::vector<RankedProposal>& ranked, RankKey key);

/// Greedy suppression: a proposal is dropped when its bbox IoU with any kept
/// higher-ranked proposal is strictly greater than the threshold.
std::vector<RankedProposal> non_maxima_suppression(const std::vector<RankedProposal>& ranked, double iou_threshold);

double bbox_iou(const BBox& a, const BBox& b);

}  // namespace ddcrp
