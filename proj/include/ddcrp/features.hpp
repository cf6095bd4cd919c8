#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "ddcrp/image.hpp"

namespace ddcrp {

inline constexpr int kHistogramBins = 16;
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

using Histogram = std::array<double, kHistogramBins>;

/// Per-pixel intensity and opponent-color maps, each in [0, 1].
struct FeatureMaps {
  int width = 0;
  int height = 0;
  std::vector<double> intensity;
  std::vector<double> rg_contrast;
  std::vector<double> by_contrast;
};

struct FeatureVector {
  Histogram hist_i{};
  Histogram hist_rg{};
  Histogram hist_by{};
  Vec3 avg_rgb = Vec3::Zero();

  [[nodiscard]] const Histogram& channel(int n) const { return n == 0 ? hist_i : (n == 1 ? hist_rg : hist_by); }
};

/// Distances between adjacent superpixels; absent pairs are infinitely far.
class DistanceTable {
 public:
  DistanceTable() = default;
  explicit DistanceTable(int n) : rows_(static_cast<size_t>(n)) {}

  void set(int i, int j, double d);
  /// kInfiniteDistance when (i, j) is not stored.
  [[nodiscard]] double at(int i, int j) const;
  [[nodiscard]] int size() const { return static_cast<int>(rows_.size()); }
  /// Stored (neighbor, distance) pairs of i, sorted by neighbor.
  [[nodiscard]] const std::vector<std::pair<int, double>>& row(int i) const { return rows_[static_cast<size_t>(i)]; }

 private:
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

using ChannelWeights = std::array<double, 3>;
inline constexpr ChannelWeights kDefaultWeights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

FeatureMaps compute_feature_maps(const ImageRGB& image);

/// Bin k covers [k/16, (k+1)/16); the last bin is closed at 1.
int histogram_bin(double value);

std::vector<FeatureVector> superpixel_features(const ImageRGB& image, const FeatureMaps& maps,
                                               const LabelMap& label_map);

/// Weighted total-variation distance between histograms of adjacent superpixels.
DistanceTable pairwise_distances(const std::vector<FeatureVector>& features, const SuperpixelGraph& graph,
                                 const ChannelWeights& weights = kDefaultWeights);

/// Exponential decay exp(-d/a), exactly 0 at d = infinity.
double decay(double d, double a);

void write_features_csv(const std::vector<FeatureVector>& features, const std::filesystem::path& path);
void write_distances_csv(const DistanceTable& table, const std::filesystem::path& path);

}  // namespace ddcrp
