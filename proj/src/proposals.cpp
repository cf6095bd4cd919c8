#include "ddcrp/proposals.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace ddcrp {

std::vector<Proposal> extract_proposals(const std::vector<SegmentationSample>& samples, const SuperpixelGraph& graph) {
  if (samples.empty()) throw std::invalid_argument("extract_proposals: no samples");
  // an ordered map keeps the result independent of sample order
  std::map<std::vector<int>, int> counts;
  long long total_segments = 0;
  for (const auto& sample : samples) {
    total_segments += sample.assignment.n_tables;
    for (const auto& members : sample.assignment.members) {
      std::vector<int> key = members;
      std::sort(key.begin(), key.end());
      ++counts[key];
    }
  }
  std::vector<Proposal> out;
  out.reserve(counts.size());
  for (auto& [ids, count] : counts) {
    Proposal p;
    p.superpixels = ids;
    p.occurrences = count;
    p.likelihood = static_cast<double>(count) / static_cast<double>(total_segments);
    for (int id : ids) {
      if (id < 0 || id >= graph.n) throw std::invalid_argument("extract_proposals: superpixel id out of range");
      p.pixel_area += graph.pixel_count[static_cast<size_t>(id)];
    }
    out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(), [](const Proposal& a, const Proposal& b) {
    if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
    return a.superpixels < b.superpixels;
  });
  return out;
}

std::vector<Proposal> filter_by_size(const std::vector<Proposal>& proposals, long long image_area, double min_frac,
                                     double max_frac) {
  if (!(min_frac >= 0.0 && min_frac < max_frac && max_frac <= 1.0)) {
    throw std::invalid_argument("filter_by_size: require 0 <= min_frac < max_frac <= 1");
  }
  if (image_area <= 0) throw std::invalid_argument("filter_by_size: image area must be positive");
  std::vector<Proposal> out;
  for (const auto& p : proposals) {
    const double frac = static_cast<double>(p.pixel_area) / static_cast<double>(image_area);
    if (frac >= min_frac && frac <= max_frac) out.push_back(p);
  }
  return out;
}

}  // namespace ddcrp
