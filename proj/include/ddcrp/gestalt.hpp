#pragma once

#include <array>
#include <vector>

#include "ddcrp/image.hpp"
#include "ddcrp/proposals.hpp"

namespace ddcrp {

/// Binary membership mask of one proposal. The bits cover a window of the
/// image whose top-left pixel is (origin_x, origin_y); accessors take
/// window-local coordinates.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  int origin_x = 0;
  int origin_y = 0;
  int image_width = 0;
  int image_height = 0;

  Mask() = default;
  /// Window covering a whole w x h image.
  Mask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0), image_width(w), image_height(h) {}
  Mask(int w, int h, int x0, int y0, int image_w, int image_h)
      : width(w), height(h), bits(static_cast<size_t>(w) * h, 0), origin_x(x0), origin_y(y0),
        image_width(image_w), image_height(image_h) {}

  [[nodiscard]] bool at(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && bits[static_cast<size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v = true) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }

  [[nodiscard]] long long area() const;
  /// Window-local centroid.
  [[nodiscard]] Vec2 centroid() const;
  /// Window-local members with a non-member 4-neighbor or lying on the image edge.
  [[nodiscard]] std::vector<std::array<int, 2>> boundary_pixels() const;
  /// Tightest box in image coordinates.
  [[nodiscard]] BBox bbox() const;
};

/// Builds proposal masks cropped to the proposal's bounding box.
class MaskBuilder {
 public:
  explicit MaskBuilder(const LabelMap& labels);
  [[nodiscard]] Mask build(const std::vector<int>& superpixels) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<int>> pixels_;  // flat image indices per superpixel
  std::vector<BBox> boxes_;
};

Mask proposal_mask(const Proposal& proposal, const LabelMap& labels);

inline constexpr int kNumMeasures = 7;

struct GestaltMeasures {
  double sym_weighted = 1.0;
  double sym_max = 1.0;
  double solidity = 1.0;
  double convexity = 1.0;
  double compactness = 1.0 / 16.0;
  double eccentricity = 0.0;
  double centroid_distance = 1.0;

  [[nodiscard]] std::array<double, kNumMeasures> as_array() const {
    return {sym_weighted, sym_max, solidity, convexity, compactness, eccentricity, centroid_distance};
  }
  static GestaltMeasures from_array(const std::array<double, kNumMeasures>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  }
};

inline constexpr std::array<const char*, kNumMeasures> kMeasureNames = {
    "sym_weighted", "sym_max", "solidity", "convexity", "compactness", "eccentricity", "centroid_distance"};

/// Closed boundary geometry of a mask: length and enclosed area of its
/// smoothed iso-contour plus that contour's convex hull.
struct ContourGeometry {
  double length = 0.0;
  double area = 0.0;
  double hull_length = 0.0;
  double hull_area = 0.0;
  double sigma = 0.0;  // smoothing actually used (0 = unsmoothed)
};

ContourGeometry contour_geometry(const Mask& mask);

/// Principal-axis scatter of the member pixel coordinates: eigenvalues
/// (descending) and matching unit eigenvectors as columns.
struct PrincipalAxes {
  Vec2 centroid = Vec2::Zero();
  Vec2 eigenvalues = Vec2::Zero();
  Mat2 axes = Mat2::Identity();
};

PrincipalAxes principal_axes(const Mask& mask);

/// Fraction of member pixels whose reflection across the line through the
/// centroid along `axis` (rounded to the nearest pixel) is also a member.
double mirror_overlap(const Mask& mask, const Vec2& centroid, const Vec2& axis);

GestaltMeasures gestalt_measures(const Mask& mask);

}  // namespace ddcrp
