#include "ddcrp/gestalt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace ddcrp {

long long Mask::area() const {
  long long n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

Vec2 Mask::centroid() const {
  Vec2 sum = Vec2::Zero();
  long long n = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (bits[static_cast<size_t>(y) * width + x]) {
        sum += Vec2(x, y);
        ++n;
      }
    }
  }
  return n ? Vec2(sum / static_cast<double>(n)) : Vec2(Vec2::Zero());
}

std::vector<std::array<int, 2>> Mask::boundary_pixels() const {
  std::vector<std::array<int, 2>> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!at(x, y)) continue;
      const int gx = x + origin_x, gy = y + origin_y;
      const bool edge = gx == 0 || gy == 0 || gx == image_width - 1 || gy == image_height - 1;
      if (edge || !at(x - 1, y) || !at(x + 1, y) || !at(x, y - 1) || !at(x, y + 1)) out.push_back({x, y});
    }
  }
  return out;
}

BBox Mask::bbox() const {
  BBox box{width, height, -1, -1};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!bits[static_cast<size_t>(y) * width + x]) continue;
      box.x_min = std::min(box.x_min, x);
      box.y_min = std::min(box.y_min, y);
      box.x_max = std::max(box.x_max, x);
      box.y_max = std::max(box.y_max, y);
    }
  }
  if (box.x_max < 0) throw std::invalid_argument("Mask::bbox: empty mask");
  return {box.x_min + origin_x, box.y_min + origin_y, box.x_max + origin_x, box.y_max + origin_y};
}

MaskBuilder::MaskBuilder(const LabelMap& labels)
    : width_(labels.width),
      height_(labels.height),
      pixels_(static_cast<size_t>(labels.n_superpixels)),
      boxes_(static_cast<size_t>(labels.n_superpixels), BBox{labels.width, labels.height, -1, -1}) {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const int id = labels.at(x, y);
      pixels_[static_cast<size_t>(id)].push_back(y * width_ + x);
      BBox& b = boxes_[static_cast<size_t>(id)];
      b.x_min = std::min(b.x_min, x);
      b.y_min = std::min(b.y_min, y);
      b.x_max = std::max(b.x_max, x);
      b.y_max = std::max(b.y_max, y);
    }
  }
}

Mask MaskBuilder::build(const std::vector<int>& superpixels) const {
  if (superpixels.empty()) throw std::invalid_argument("MaskBuilder: empty superpixel list");
  BBox box{width_, height_, -1, -1};
  for (int id : superpixels) {
    if (id < 0 || static_cast<size_t>(id) >= boxes_.size()) {
      throw std::invalid_argument("MaskBuilder: superpixel id out of range");
    }
    const BBox& b = boxes_[static_cast<size_t>(id)];
    box = {std::min(box.x_min, b.x_min), std::min(box.y_min, b.y_min), std::max(box.x_max, b.x_max),
           std::max(box.y_max, b.y_max)};
  }
  Mask mask(box.x_max - box.x_min + 1, box.y_max - box.y_min + 1, box.x_min, box.y_min, width_, height_);
  for (int id : superpixels) {
    for (int p : pixels_[static_cast<size_t>(id)]) mask.set(p % width_ - box.x_min, p / width_ - box.y_min);
  }
  return mask;
}

Mask proposal_mask(const Proposal& proposal, const LabelMap& labels) {
  return MaskBuilder(labels).build(proposal.superpixels);
}

// ---------------------------------------------------------------------------
// Principal axes and symmetry

PrincipalAxes principal_axes(const Mask& mask) {
  // integer moments keep exactly symmetric shapes exactly isotropic
  __int128 n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.bits[static_cast<size_t>(y) * mask.width + x]) continue;
      ++n;
      sx += x;
      sy += y;
      sxx += static_cast<__int128>(x) * x;
      syy += static_cast<__int128>(y) * y;
      sxy += static_cast<__int128>(x) * y;
    }
  }
  PrincipalAxes out;
  if (n == 0) return out;
  const double nn = static_cast<double>(n);
  out.centroid = Vec2(static_cast<double>(sx) / nn, static_cast<double>(sy) / nn);
  const double vxx = static_cast<double>(n * sxx - sx * sx) / (nn * nn);
  const double vyy = static_cast<double>(n * syy - sy * sy) / (nn * nn);
  const double vxy = static_cast<double>(n * sxy - sx * sy) / (nn * nn);
  if (vxy == 0.0) {
    if (vxx >= vyy) {
      out.eigenvalues = Vec2(vxx, vyy);
      out.axes = Mat2::Identity();
    } else {
      out.eigenvalues = Vec2(vyy, vxx);
      out.axes << 0.0, 1.0, 1.0, 0.0;
    }
    return out;
  }
  Mat2 scatter;
  scatter << vxx, vxy, vxy, vyy;
  Eigen::SelfAdjointEigenSolver<Mat2> solver(scatter);
  // ascending order from the solver; principal axis first here
  out.eigenvalues = Vec2(solver.eigenvalues()(1), solver.eigenvalues()(0));
  out.axes.col(0) = solver.eigenvectors().col(1);
  out.axes.col(1) = solver.eigenvectors().col(0);
  return out;
}

double mirror_overlap(const Mask& mask, const Vec2& centroid, const Vec2& axis) {
  const Vec2 e = axis.normalized();
  const Mat2 reflect = 2.0 * e * e.transpose() - Mat2::Identity();
  long long hits = 0, total = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.bits[static_cast<size_t>(y) * mask.width + x]) continue;
      ++total;
      const Vec2 q = centroid + reflect * (Vec2(x, y) - centroid);
      const int qx = static_cast<int>(std::floor(q.x() + 0.5));
      const int qy = static_cast<int>(std::floor(q.y() + 0.5));
      hits += mask.at(qx, qy);
    }
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 1.0;
}

// ---------------------------------------------------------------------------
// Contour geometry

namespace {

struct Field {
  int width = 0;
  int height = 0;
  std::vector<double> v;
  [[nodiscard]] double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Cropped copy of the mask with `pad` empty pixels on every side, then
// blurred by a separable Gaussian when sigma > 0.
Field smoothed_field(const Mask& mask, const BBox& box, int pad, double sigma) {
  Field f;
  f.width = box.x_max - box.x_min + 1 + 2 * pad;
  f.height = box.y_max - box.y_min + 1 + 2 * pad;
  f.v.assign(static_cast<size_t>(f.width) * f.height, 0.0);
  for (int y = box.y_min; y <= box.y_max; ++y) {
    for (int x = box.x_min; x <= box.x_max; ++x) {
      if (mask.at(x, y)) f.v[static_cast<size_t>(y - box.y_min + pad) * f.width + (x - box.x_min + pad)] = 1.0;
    }
  }
  if (sigma <= 0.0) return f;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[static_cast<size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
    norm += kernel[static_cast<size_t>(k + radius)];
  }
  for (double& k : kernel) k /= norm;

  std::vector<double> tmp(f.v.size(), 0.0);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        if (xx >= 0 && xx < f.width) acc += kernel[static_cast<size_t>(k + radius)] * f.at(xx, y);
      }
      tmp[static_cast<size_t>(y) * f.width + x] = acc;
    }
  }
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        if (yy >= 0 && yy < f.height) acc += kernel[static_cast<size_t>(k + radius)] * tmp[static_cast<size_t>(yy) * f.width + x];
      }
      f.v[static_cast<size_t>(y) * f.width + x] = acc;
    }
  }
  return f;
}

struct Contour {
  double length = 0.0;
  double signed_area = 0.0;
  std::vector<Vec2> vertices;
};

// Marching squares at level 0.5 with linear interpolation. Each segment is
// oriented with the inside on its left, so the shoelace sum over segments is
// the enclosed area with holes subtracted.
Contour iso_contour(const Field& f) {
  constexpr double kLevel = 0.5;
  Contour c;
  for (int y = 0; y + 1 < f.height; ++y) {
    for (int x = 0; x + 1 < f.width; ++x) {
      // corners in cyclic order TL, TR, BR, BL
      const std::array<Vec2, 4> pos = {Vec2(x, y), Vec2(x + 1, y), Vec2(x + 1, y + 1), Vec2(x, y + 1)};
      const std::array<double, 4> val = {f.at(x, y), f.at(x + 1, y), f.at(x + 1, y + 1), f.at(x, y + 1)};
      std::array<bool, 4> in{};
      int n_in = 0;
      for (int k = 0; k < 4; ++k) n_in += (in[k] = val[k] >= kLevel);
      if (n_in == 0 || n_in == 4) continue;

      // edge k joins corner k and corner k+1
      auto edge_point = [&](int k) {
        const int a = k, b = (k + 1) % 4;
        const double t = (kLevel - val[a]) / (val[b] - val[a]);
        return Vec2(pos[a] + t * (pos[b] - pos[a]));
      };
      auto emit = [&](int e0, int e1, int ref) {
        Vec2 p = edge_point(e0), q = edge_point(e1);
        const double side = cross(q - p, pos[ref] - p);
        if ((side > 0.0) != in[ref]) std::swap(p, q);
        c.length += (q - p).norm();
        c.signed_area += 0.5 * cross(p, q);
        c.vertices.push_back(p);
        c.vertices.push_back(q);
      };

      std::array<int, 4> crossing{};
      int n_cross = 0;
      for (int k = 0; k < 4; ++k) {
        if (in[k] != in[(k + 1) % 4]) crossing[n_cross++] = k;
      }
      if (n_cross == 2) {
        // reference corner farthest from the segment line
        const Vec2 p = edge_point(crossing[0]), q = edge_point(crossing[1]);
        int ref = 0;
        double best = -1.0;
        for (int k = 0; k < 4; ++k) {
          const double s = std::abs(cross(q - p, pos[k] - p));
          if (s > best) best = s, ref = k;
        }
        emit(crossing[0], crossing[1], ref);
      } else {
        // saddle: the cell center decides which diagonal pair is connected
        const double center = 0.25 * (val[0] + val[1] + val[2] + val[3]);
        const bool cut_inside = center < kLevel;
        for (int k = 0; k < 4; ++k) {
          if (in[k] == cut_inside) emit((k + 3) % 4, k, k);
        }
      }
    }
  }
  return c;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a == b; }), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

ContourGeometry geometry_at(const Mask& mask, const BBox& box, double sigma) {
  const int pad = static_cast<int>(std::ceil(3.0 * sigma)) + 2;
  const Field field = smoothed_field(mask, box, pad, sigma);
  const Contour contour = iso_contour(field);
  ContourGeometry g;
  g.sigma = sigma;
  g.length = contour.length;
  g.area = std::abs(contour.signed_area);
  const std::vector<Vec2> hull = convex_hull(contour.vertices);
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    g.hull_length += (b - a).norm();
    g.hull_area += 0.5 * cross(a, b);
  }
  g.hull_area = std::abs(g.hull_area);
  return g;
}

}  // namespace

ContourGeometry contour_geometry(const Mask& mask) {
  const long long area = mask.area();
  if (area == 0) throw std::invalid_argument("contour_geometry: empty mask");
  const BBox global = mask.bbox();
  const BBox box{global.x_min - mask.origin_x, global.y_min - mask.origin_y, global.x_max - mask.origin_x,
                 global.y_max - mask.origin_y};
  const double sigma = std::clamp(0.04 * std::sqrt(static_cast<double>(area)), 0.5, 6.0);
  ContourGeometry g = geometry_at(mask, box, sigma);
  // thin structures can vanish under the blur
  if (g.length <= 0.0 || g.area < 0.5 * static_cast<double>(area)) g = geometry_at(mask, box, 0.0);
  return g;
}

GestaltMeasures gestalt_measures(const Mask& mask) {
  const long long area = mask.area();
  if (area < 1) throw std::invalid_argument("gestalt_measures: empty mask");
  GestaltMeasures m;
  if (area == 1) return m;  // degenerate defaults: perimeter 4

  const PrincipalAxes pa = principal_axes(mask);
  const double l1 = pa.eigenvalues(0);
  const double l2 = std::max(pa.eigenvalues(1), 0.0);
  const double o1 = mirror_overlap(mask, pa.centroid, pa.axes.col(0));
  const double o2 = mirror_overlap(mask, pa.centroid, pa.axes.col(1));
  m.sym_weighted = l1 + l2 > 0.0 ? (l1 * o1 + l2 * o2) / (l1 + l2) : 1.0;
  m.sym_max = std::max(o1, o2);
  m.eccentricity = l1 > 0.0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;

  const ContourGeometry g = contour_geometry(mask);
  if (g.area > 0.0 && g.length > 0.0) {
    m.solidity = std::max(1.0, std::max(g.hull_area, 1.0) / g.area);
    m.convexity = g.hull_length > 0.0 ? std::max(1.0, g.length / g.hull_length) : 1.0;
    m.compactness = g.area / (g.length * g.length);
  }

  const auto boundary = mask.boundary_pixels();
  double dist = 0.0;
  for (const auto& b : boundary) dist += (Vec2(b[0], b[1]) - pa.centroid).norm();
  dist /= static_cast<double>(boundary.size());
  m.centroid_distance = dist / std::sqrt(static_cast<double>(area) / std::numbers::pi);
  return m;
}

}  // namespace ddcrp
