#pragma once

#include <vector>

#include "ddcrp/image.hpp"
#include "ddcrp/sampler.hpp"

namespace ddcrp {

/// A unique segment observed among the posterior samples.
struct Proposal {
  std::vector<int> superpixels;  // strictly ascending; the proposal's identity
  int occurrences = 0;
  double likelihood = 0.0;
  long long pixel_area = 0;

  bool operator==(const Proposal&) const = default;
};

/// Unique tables across samples with P(o) = occurrences / total segment count,
/// sorted by likelihood descending then superpixel list ascending.
std::vector<Proposal> extract_proposals(const std::vector<SegmentationSample>& samples, const SuperpixelGraph& graph);

/// Keeps proposals whose area fraction lies in [min_frac, max_frac].
std::vector<Proposal> filter_by_size(const std::vector<Proposal>& proposals, long long image_area, double min_frac,
                                     double max_frac);

}  // namespace ddcrp
