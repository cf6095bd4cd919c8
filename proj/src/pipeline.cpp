#include "ddcrp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace ddcrp {

FrameResult propose(const ImageRGB& image, const PipelineConfig& config, std::optional<LabelMap> labels) {
  config.validate();
  FrameResult r;
  if (labels) {
    if (labels->width != image.width || labels->height != image.height) {
      throw IoError("label map dimensions do not match the image");
    }
    r.labels = std::move(*labels);
  } else {
    r.labels = slic_superpixels(image, config.superpixels.n_target, config.superpixels.compactness, config.sampler.seed);
  }
  r.graph = build_graph(r.labels);
  r.features = superpixel_features(image, compute_feature_maps(image), r.labels);
  r.distances = pairwise_distances(r.features, r.graph, config.sampler.weights);
  r.samples = sample_posterior(r.features, r.distances, config.sampler);
  r.all_proposals = extract_proposals(r.samples, r.graph);
  r.proposals = filter_by_size(r.all_proposals, static_cast<long long>(image.width) * image.height,
                               config.proposals.min_frac, config.proposals.max_frac);
  return r;
}

std::vector<RankedProposal> rank(const std::vector<Proposal>& proposals, const LabelMap& labels, const Scorer& model,
                                 const PipelineConfig::Ranking& options) {
  const MaskBuilder builder(labels);
  std::vector<Mask> masks;
  masks.reserve(proposals.size());
  for (const auto& p : proposals) masks.push_back(builder.build(p.superpixels));
  const RankKey key = options.use_weighted ? RankKey::kWeighted : RankKey::kPlain;
  std::vector<RankedProposal> ranked = score_proposals(proposals, masks, model, key);
  if (options.nms) ranked = non_maxima_suppression(ranked, options.iou_threshold);
  if (ranked.size() > static_cast<size_t>(options.top_k)) ranked.resize(static_cast<size_t>(options.top_k));
  return ranked;
}

std::vector<TrainingExample> training_examples(const std::vector<Proposal>& proposals, const LabelMap& labels,
                                               const GroundTruthFrame& truth) {
  const MaskBuilder builder(labels);
  std::vector<TrainingExample> out;
  out.reserve(proposals.size());
  for (const auto& p : proposals) {
    const Mask mask = builder.build(p.superpixels);
    double best = 0.0;
    for (const auto& obj : truth.objects) {
      const double iou = obj.mask.bits.empty() ? bbox_iou(mask.bbox(), obj.bbox) : mask_iou(mask, obj.mask);
      best = std::max(best, iou);
    }
    out.push_back({gestalt_measures(mask), best});
  }
  return out;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::clamp(workers, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ddcrp
