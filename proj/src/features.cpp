#include "ddcrp/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace ddcrp {

void DistanceTable::set(int i, int j, double d) {
  auto put = [](std::vector<std::pair<int, double>>& row, int key, double value) {
    auto it = std::lower_bound(row.begin(), row.end(), key, [](const auto& e, int k) { return e.first < k; });
    if (it != row.end() && it->first == key) {
      it->second = value;
    } else {
      row.insert(it, {key, value});
    }
  };
  put(rows_[static_cast<size_t>(i)], j, d);
  put(rows_[static_cast<size_t>(j)], i, d);
}

double DistanceTable::at(int i, int j) const {
  const auto& row = rows_[static_cast<size_t>(i)];
  auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, int k) { return e.first < k; });
  return it != row.end() && it->first == j ? it->second : kInfiniteDistance;
}

FeatureMaps compute_feature_maps(const ImageRGB& image) {
  FeatureMaps maps;
  maps.width = image.width;
  maps.height = image.height;
  const size_t n = image.size();
  maps.intensity.resize(n);
  maps.rg_contrast.resize(n);
  maps.by_contrast.resize(n);
  for (size_t p = 0; p < n; ++p) {
    const auto [r, g, b] = image.pixels[p];
    maps.intensity[p] = std::clamp((r + g + b) / 3.0, 0.0, 1.0);
    maps.rg_contrast[p] = std::clamp((r - g + 1.0) / 2.0, 0.0, 1.0);
    maps.by_contrast[p] = std::clamp((b - (r + g) / 2.0 + 1.0) / 2.0, 0.0, 1.0);
  }
  return maps;
}

int histogram_bin(double value) {
  const int k = static_cast<int>(std::floor(value * kHistogramBins));
  return std::clamp(k, 0, kHistogramBins - 1);
}

std::vector<FeatureVector> superpixel_features(const ImageRGB& image, const FeatureMaps& maps,
                                               const LabelMap& label_map) {
  if (image.width != label_map.width || image.height != label_map.height || maps.width != image.width ||
      maps.height != image.height) {
    throw std::invalid_argument("superpixel_features: dimension mismatch");
  }
  const int n = label_map.n_superpixels;
  std::vector<FeatureVector> features(static_cast<size_t>(n));
  std::vector<long long> count(static_cast<size_t>(n), 0);
  for (size_t p = 0; p < label_map.labels.size(); ++p) {
    FeatureVector& f = features[static_cast<size_t>(label_map.labels[p])];
    f.hist_i[histogram_bin(maps.intensity[p])] += 1.0;
    f.hist_rg[histogram_bin(maps.rg_contrast[p])] += 1.0;
    f.hist_by[histogram_bin(maps.by_contrast[p])] += 1.0;
    f.avg_rgb += Vec3(image.pixels[p][0], image.pixels[p][1], image.pixels[p][2]);
    ++count[static_cast<size_t>(label_map.labels[p])];
  }
  for (int i = 0; i < n; ++i) {
    FeatureVector& f = features[static_cast<size_t>(i)];
    const double inv = 1.0 / static_cast<double>(count[static_cast<size_t>(i)]);
    for (Histogram* h : {&f.hist_i, &f.hist_rg, &f.hist_by}) {
      for (double& v : *h) v *= inv;
    }
    f.avg_rgb *= inv;
  }
  return features;
}

DistanceTable pairwise_distances(const std::vector<FeatureVector>& features, const SuperpixelGraph& graph,
                                 const ChannelWeights& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("pairwise_distances: negative channel weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("pairwise_distances: weights must sum to 1");
  if (static_cast<int>(features.size()) != graph.n) {
    throw std::invalid_argument("pairwise_distances: feature count does not match graph");
  }

  DistanceTable table(graph.n);
  for (int i = 0; i < graph.n; ++i) {
    for (int j : graph.adjacency[static_cast<size_t>(i)]) {
      if (j < i) continue;
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const Histogram& a = features[static_cast<size_t>(i)].channel(c);
        const Histogram& b = features[static_cast<size_t>(j)].channel(c);
        double l1 = 0.0;
        for (int k = 0; k < kHistogramBins; ++k) l1 += std::abs(a[k] - b[k]);
        d += weights[c] * 0.5 * l1;
      }
      table.set(i, j, std::clamp(d, 0.0, 1.0));
    }
  }
  return table;
}

double decay(double d, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("decay: scale must be > 0");
  if (std::isinf(d)) return 0.0;
  return std::exp(-d / a);
}

void write_features_csv(const std::vector<FeatureVector>& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (size_t i = 0; i < features.size(); ++i) {
    out << i;
    for (int c = 0; c < 3; ++c) {
      for (double v : features[i].channel(c)) out << ',' << v;
    }
    for (int c = 0; c < 3; ++c) out << ',' << features[i].avg_rgb[c];
    out << '\n';
  }
}

void write_distances_csv(const DistanceTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (int i = 0; i < table.size(); ++i) {
    for (const auto& [j, d] : table.row(i)) {
      if (j > i) out << i << ',' << j << ',' << d << '\n';
    }
  }
}

}  // namespace ddcrp
