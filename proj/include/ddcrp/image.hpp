#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ddcrp/types.hpp"

namespace ddcrp {

/// Normalized RGB image, row-major, each channel in [0, 1].
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::array<double, 3>> pixels;

  ImageRGB() = default;
  ImageRGB(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h, {0.0, 0.0, 0.0}) {}

  [[nodiscard]] size_t size() const { return pixels.size(); }
  std::array<double, 3>& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  [[nodiscard]] const std::array<double, 3>& at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
};

/// Superpixel id per pixel. Ids are contiguous 0..n_superpixels-1 and each
/// superpixel is 4-connected.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  int n_superpixels = 0;

  [[nodiscard]] int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

struct SuperpixelGraph {
  int n = 0;
  std::vector<std::vector<int>> adjacency;  // sorted, symmetric, no self entries
  std::vector<int> pixel_count;
  std::vector<Vec2> centroid;  // (x, y)

  [[nodiscard]] bool adjacent(int i, int j) const;
};

ImageRGB load_image(const std::filesystem::path& path);
void save_ppm(const ImageRGB& image, const std::filesystem::path& path);

LabelMap slic_superpixels(const ImageRGB& image, int n_target, double compactness, std::uint64_t seed);

/// Reads a CSV or 16-bit PNG label map. Labels are re-indexed by first
/// appearance; non-connected labels are split into their 4-connected
/// components (a warning is written to stderr).
LabelMap load_label_map(const std::filesystem::path& path);
LabelMap load_label_map(const std::filesystem::path& path, int expected_width, int expected_height);
void save_label_map(const LabelMap& labels, const std::filesystem::path& path);

/// Canonicalizes raw ids: first-appearance order, one id per 4-connected
/// component. Returns the number of labels that had to be split.
int canonicalize_labels(LabelMap& map);

SuperpixelGraph build_graph(const LabelMap& label_map);

// Raw 16-bit grayscale PNG access, shared with ground-truth loading.
struct GrayImage16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};
GrayImage16 read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const GrayImage16& image, const std::filesystem::path& path);

}  // namespace ddcrp
