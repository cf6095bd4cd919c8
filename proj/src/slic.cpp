#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ddcrp/image.hpp"

namespace ddcrp {
namespace {

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

// sRGB -> CIELAB, D65 white point.
Vec3 to_lab(const std::array<double, 3>& rgb) {
  const double r = srgb_to_linear(rgb[0]);
  const double g = srgb_to_linear(rgb[1]);
  const double b = srgb_to_linear(rgb[2]);
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / 1.00000;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  const double fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Center {
  Vec3 lab;
  double x = 0.0;
  double y = 0.0;
};

// Merges every 4-connected fragment that is not the largest piece of its
// label into the largest adjacent region, repeating until none remain.
void enforce_connectivity(std::vector<int>& labels, int w, int h) {
  LabelMap comp{w, h, labels, 0};
  canonicalize_labels(comp);
  const int n_comp = comp.n_superpixels;

  std::vector<int> size(n_comp, 0);
  std::vector<int> owner(n_comp, -1);
  for (size_t p = 0; p < labels.size(); ++p) {
    ++size[comp.labels[p]];
    owner[comp.labels[p]] = labels[p];
  }
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  std::vector<int> largest(max_label + 1, -1);
  for (int c = 0; c < n_comp; ++c) {
    int& best = largest[owner[c]];
    if (best < 0 || size[c] > size[best]) best = c;
  }

  std::vector<std::vector<int>> adj(n_comp);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int a = comp.labels[static_cast<size_t>(y) * w + x];
      if (x + 1 < w) {
        const int b = comp.labels[static_cast<size_t>(y) * w + x + 1];
        if (a != b) adj[a].push_back(b), adj[b].push_back(a);
      }
      if (y + 1 < h) {
        const int b = comp.labels[static_cast<size_t>(y + 1) * w + x];
        if (a != b) adj[a].push_back(b), adj[b].push_back(a);
      }
    }
  }

  // union-find over components; a root is "orphan" until it absorbs or joins
  // a primary component
  std::vector<int> parent(n_comp);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> region_size = size;
  std::vector<char> primary(n_comp, 0);
  for (int c = 0; c < n_comp; ++c) primary[c] = largest[owner[c]] == c;
  auto find = [&](int c) {
    while (parent[c] != c) c = parent[c] = parent[parent[c]];
    return c;
  };
  std::vector<std::vector<int>> members(n_comp);
  for (int c = 0; c < n_comp; ++c) members[c] = {c};

  bool changed = true;
  while (changed) {
    changed = false;
    for (int c = 0; c < n_comp; ++c) {
      const int root = find(c);
      if (root != c || primary[root]) continue;
      int target = -1;
      for (int m : members[root]) {
        for (int nb : adj[m]) {
          const int r = find(nb);
          if (r == root) continue;
          if (target < 0 || region_size[r] > region_size[target] ||
              (region_size[r] == region_size[target] && r < target)) {
            target = r;
          }
        }
      }
      if (target < 0) continue;  // whole image is one orphan region
      parent[root] = target;
      region_size[target] += region_size[root];
      members[target].insert(members[target].end(), members[root].begin(), members[root].end());
      members[root].clear();
      changed = true;
    }
  }
  for (size_t p = 0; p < labels.size(); ++p) labels[p] = owner[find(comp.labels[p])];
}

}  // namespace

LabelMap slic_superpixels(const ImageRGB& image, int n_target, double compactness, std::uint64_t seed) {
  const int w = image.width;
  const int h = image.height;
  const long long n_pixels = static_cast<long long>(w) * h;
  if (w <= 0 || h <= 0) throw std::invalid_argument("slic_superpixels: empty image");
  if (n_target < 1) throw std::invalid_argument("slic_superpixels: n_target must be >= 1");
  if (!(compactness > 0.0)) throw std::invalid_argument("slic_superpixels: compactness must be > 0");
  if (n_target > n_pixels) throw std::invalid_argument("slic_superpixels: n_target exceeds pixel count");

  std::vector<Vec3> lab(static_cast<size_t>(n_pixels));
  for (size_t i = 0; i < lab.size(); ++i) lab[i] = to_lab(image.pixels[i]);
  auto lab_at = [&](int x, int y) -> const Vec3& { return lab[static_cast<size_t>(y) * w + x]; };

  // grid: cell count closest to n_target, then squarest cells, then more columns
  int nx = 1, ny = 1;
  {
    double best_count = INFINITY, best_aspect = INFINITY;
    for (int cx = 1; cx <= std::min(n_target, w); ++cx) {
      const int cy = std::clamp(static_cast<int>(std::lround(static_cast<double>(n_target) / cx)), 1, h);
      const double count = std::abs(static_cast<double>(cx) * cy - n_target);
      const double aspect = std::abs(std::log((static_cast<double>(w) / cx) / (static_cast<double>(h) / cy)));
      if (count < best_count || (count == best_count && aspect <= best_aspect + 1e-12)) {
        best_count = count;
        best_aspect = aspect;
        nx = cx;
        ny = cy;
      }
    }
  }
  const double step = std::sqrt(static_cast<double>(n_pixels) / (static_cast<double>(nx) * ny));

  auto gradient = [&](int x, int y) {
    const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
    return (lab_at(x1, y) - lab_at(x0, y)).squaredNorm() + (lab_at(x, y1) - lab_at(x, y0)).squaredNorm();
  };

  // Seeds sit at grid-cell centers and move to the lowest-gradient pixel of
  // their 3x3 neighborhood; exact ties are broken by the seeded generator.
  std::mt19937_64 rng(seed);
  std::vector<Center> centers;
  centers.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cx = std::min(static_cast<int>((i + 0.5) * w / nx), w - 1);
      const int cy = std::min(static_cast<int>((j + 0.5) * h / ny), h - 1);
      double best = std::numeric_limits<double>::infinity();
      std::vector<std::pair<int, int>> ties;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const double g = gradient(x, y);
          if (g < best - 1e-12) {
            best = g;
            ties.assign(1, {x, y});
          } else if (std::abs(g - best) <= 1e-12) {
            ties.emplace_back(x, y);
          }
        }
      }
      const auto [sx, sy] = ties.size() == 1 ? ties.front() : ties[rng() % ties.size()];
      centers.push_back({lab_at(sx, sy), static_cast<double>(sx), static_cast<double>(sy)});
    }
  }

  std::vector<int> labels(static_cast<size_t>(n_pixels));
  for (int y = 0; y < h; ++y) {
    const int j = std::min(static_cast<int>(static_cast<long long>(y) * ny / h), ny - 1);
    for (int x = 0; x < w; ++x) {
      const int i = std::min(static_cast<int>(static_cast<long long>(x) * nx / w), nx - 1);
      labels[static_cast<size_t>(y) * w + x] = j * nx + i;
    }
  }

  const double spatial = (compactness / step) * (compactness / step);
  const int radius = static_cast<int>(std::ceil(step));
  std::vector<double> best_dist(labels.size());
  constexpr int kIterations = 10;
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(best_dist.begin(), best_dist.end(), std::numeric_limits<double>::infinity());
    for (size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int xc = static_cast<int>(std::lround(c.x));
      const int yc = static_cast<int>(std::lround(c.y));
      for (int y = std::max(yc - radius, 0); y <= std::min(yc + radius, h - 1); ++y) {
        for (int x = std::max(xc - radius, 0); x <= std::min(xc + radius, w - 1); ++x) {
          const size_t p = static_cast<size_t>(y) * w + x;
          const double dxy = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
          const double d = (lab[p] - c.lab).squaredNorm() + spatial * dxy;
          if (d < best_dist[p]) {
            best_dist[p] = d;
            labels[p] = static_cast<int>(k);
          }
        }
      }
    }
    std::vector<Vec3> sum_lab(centers.size(), Vec3::Zero());
    std::vector<double> sum_x(centers.size(), 0.0), sum_y(centers.size(), 0.0);
    std::vector<long long> count(centers.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t p = static_cast<size_t>(y) * w + x;
        const int k = labels[p];
        sum_lab[k] += lab[p];
        sum_x[k] += x;
        sum_y[k] += y;
        ++count[k];
      }
    }
    for (size_t k = 0; k < centers.size(); ++k) {
      if (count[k] == 0) continue;
      centers[k].lab = sum_lab[k] / static_cast<double>(count[k]);
      centers[k].x = sum_x[k] / static_cast<double>(count[k]);
      centers[k].y = sum_y[k] / static_cast<double>(count[k]);
    }
  }

  enforce_connectivity(labels, w, h);
  LabelMap out{w, h, std::move(labels), 0};
  canonicalize_labels(out);
  return out;
}

}  // namespace ddcrp
