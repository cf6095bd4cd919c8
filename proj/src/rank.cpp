#include "ddcrp/rank.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace ddcrp {

double Scorer::predict(const GestaltMeasures& m) const { return std::clamp(raw_predict(m), 0.0, 1.0); }

double ScoringModel::raw_predict(const GestaltMeasures& m) const {
  const auto x = m.as_array();
  double y = bias;
  for (int k = 0; k < kNumMeasures; ++k) y += coefficients[k] * (x[k] - feature_means[k]) / feature_scales[k];
  return y;
}

ScoringModel fit_scoring_model(const std::vector<TrainingExample>& training, double ridge) {
  if (training.size() < 8) throw std::invalid_argument("fit_scoring_model: need at least 8 training pairs");
  if (!(ridge >= 0.0)) throw std::invalid_argument("fit_scoring_model: ridge must be >= 0");
  const auto n = static_cast<Eigen::Index>(training.size());
  Eigen::MatrixXd x(n, kNumMeasures);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = training[static_cast<size_t>(i)].measures.as_array();
    for (int k = 0; k < kNumMeasures; ++k) x(i, k) = row[k];
    y(i) = training[static_cast<size_t>(i)].target_iou;
  }

  ScoringModel model;
  std::vector<int> active;
  for (int k = 0; k < kNumMeasures; ++k) {
    const double mean = x.col(k).mean();
    const double var = (x.col(k).array() - mean).square().mean();
    model.feature_means[k] = mean;
    if (var <= 1e-24 * std::max(1.0, mean * mean)) {
      model.feature_scales[k] = 1.0;
      std::cerr << "warning: measure " << kMeasureNames[k] << " has zero variance; coefficient fixed at 0\n";
    } else {
      model.feature_scales[k] = std::sqrt(var);
      active.push_back(k);
    }
  }
  const double y_mean = y.mean();
  model.bias = y_mean;
  if (active.empty()) return model;

  const auto p = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const int k = active[static_cast<size_t>(j)];
    z.col(j) = (x.col(k).array() - model.feature_means[k]) / model.feature_scales[k];
  }
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = z.transpose() * z / static_cast<double>(n);
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd rhs = z.transpose() * yc / static_cast<double>(n);
  // pseudo-inverse solve tolerates collinear measures when ridge = 0
  const Eigen::VectorXd w = gram.completeOrthogonalDecomposition().solve(rhs);
  for (Eigen::Index j = 0; j < p; ++j) model.coefficients[active[static_cast<size_t>(j)]] = w(j);
  return model;
}

namespace {

bool ranks_before(const RankedProposal& a, const RankedProposal& b, RankKey key) {
  const double sa = key == RankKey::kWeighted ? a.weighted_score : a.score;
  const double sb = key == RankKey::kWeighted ? b.weighted_score : b.score;
  if (sa != sb) return sa > sb;
  if (a.proposal.likelihood != b.proposal.likelihood) return a.proposal.likelihood > b.proposal.likelihood;
  return a.proposal.superpixels < b.proposal.superpixels;
}

}  // namespace

void sort_ranked(std::vector<RankedProposal>& ranked, RankKey key) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [key](const RankedProposal& a, const RankedProposal& b) { return ranks_before(a, b, key); });
}

std::vector<RankedProposal> score_proposals(const std::vector<Proposal>& proposals, const std::vector<Mask>& masks,
                                            const Scorer& model, RankKey key) {
  if (proposals.size() != masks.size()) throw std::invalid_argument("score_proposals: one mask per proposal required");
  std::vector<RankedProposal> out;
  out.reserve(proposals.size());
  for (size_t i = 0; i < proposals.size(); ++i) {
    RankedProposal r;
    r.proposal = proposals[i];
    r.measures = gestalt_measures(masks[i]);
    r.score = model.predict(r.measures);
    r.weighted_score = r.proposal.likelihood * r.score;
    r.bbox = masks[i].bbox();
    out.push_back(std::move(r));
  }
  sort_ranked(out, key);
  return out;
}

double bbox_iou(const BBox& a, const BBox& b) {
  if (a.x_min > a.x_max || a.y_min > a.y_max || b.x_min > b.x_max || b.y_min > b.y_max) {
    throw std::invalid_argument("bbox_iou: malformed box");
  }
  const int ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const int iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = static_cast<double>(ix) * iy;
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

std::vector<RankedProposal> non_maxima_suppression(const std::vector<RankedProposal>& ranked, double iou_threshold) {
  std::vector<RankedProposal> kept;
  for (const auto& r : ranked) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const RankedProposal& k) { return bbox_iou(k.bbox, r.bbox) > iou_threshold; });
    if (!suppressed) kept.push_back(r);
  }
  return kept;
}

}  // namespace ddcrp
