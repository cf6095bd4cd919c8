#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ddcrp/config.hpp"
#include "ddcrp/eval.hpp"
#include "ddcrp/features.hpp"
#include "ddcrp/image.hpp"
#include "ddcrp/proposals.hpp"
#include "ddcrp/rank.hpp"
#include "ddcrp/sampler.hpp"

namespace ddcrp {

/// Everything produced for one image by superpixels -> features -> sampling
/// -> proposal extraction.
struct FrameResult {
  LabelMap labels;
  SuperpixelGraph graph;
  std::vector<FeatureVector> features;
  DistanceTable distances;
  std::vector<SegmentationSample> samples;
  std::vector<Proposal> all_proposals;
  std::vector<Proposal> proposals;  // after the size filter
};

/// Runs the proposal pipeline. When `labels` is given it replaces SLIC.
FrameResult propose(const ImageRGB& image, const PipelineConfig& config, std::optional<LabelMap> labels = std::nullopt);

/// Scores, orders by the configured key, optionally suppresses, truncates to top_k.
std::vector<RankedProposal> rank(const std::vector<Proposal>& proposals, const LabelMap& labels, const Scorer& model,
                                 const PipelineConfig::Ranking& options);

/// Regression targets: best mask IoU of each proposal against the frame's
/// objects (bbox IoU for objects without a mask); 0 when there are none.
std::vector<TrainingExample> training_examples(const std::vector<Proposal>& proposals, const LabelMap& labels,
                                               const GroundTruthFrame& truth);

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace ddcrp
