#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <unistd.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ddcrp/partition.hpp"

namespace ddcrp::testing {

namespace {

constexpr double kPi = std::numbers::pi;

// rotate (x, y) about (cx, cy) by -angle into the shape frame
Vec2 to_local(double x, double y, double cx, double cy, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dx = x - cx, dy = y - cy;
  return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace

Mask rasterize(const ShapeFn& inside, int width, int height) {
  Mask m(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (inside(x + 0.5, y + 0.5)) m.set(x, y);
    }
  }
  return m;
}

ShapeFn rectangle(double cx, double cy, double w, double h, double angle) {
  return [=](double x, double y) {
    const Vec2 p = to_local(x, y, cx, cy, angle);
    return std::abs(p.x()) < w / 2 && std::abs(p.y()) < h / 2;
  };
}

ShapeFn square(double cx, double cy, double side, double angle) { return rectangle(cx, cy, side, side, angle); }

ShapeFn ellipse(double cx, double cy, double rx, double ry, double angle) {
  return [=](double x, double y) {
    const Vec2 p = to_local(x, y, cx, cy, angle);
    return (p.x() * p.x()) / (rx * rx) + (p.y() * p.y()) / (ry * ry) <= 1.0;
  };
}

ShapeFn disk(double cx, double cy, double r) { return ellipse(cx, cy, r, r); }

ShapeFn regular_polygon(double cx, double cy, double r, int sides, double angle) {
  // inside every edge half-plane; apothem = r cos(pi/n)
  const double apothem = r * std::cos(kPi / sides);
  return [=](double x, double y) {
    const Vec2 p = to_local(x, y, cx, cy, angle);
    for (int k = 0; k < sides; ++k) {
      const double theta = 2 * kPi * (k + 0.5) / sides;
      if (p.x() * std::cos(theta) + p.y() * std::sin(theta) > apothem) return false;
    }
    return true;
  };
}

Mask upscale2(const Mask& m) {
  Mask out(2 * m.width, 2 * m.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (m.at(x / 2, y / 2)) out.set(x, y);
    }
  }
  return out;
}

std::vector<NamedShape> shape_fixture_set() {
  std::vector<NamedShape> set;
  auto add = [&](std::string name, auto fn) { set.push_back({std::move(name), fn}); };
  for (double side : {16.0, 24.0, 32.0, 40.0}) {
    add("square" + std::to_string(static_cast<int>(side)),
        [side](double cx, double cy, double s, double a) { return square(cx, cy, side * s, a); });
  }
  for (double r : {12.0, 18.0, 24.0}) {
    add("disk" + std::to_string(static_cast<int>(r)),
        [r](double cx, double cy, double s, double) { return disk(cx, cy, r * s); });
  }
  for (auto [w, h] : {std::pair{40.0, 20.0}, {48.0, 16.0}, {30.0, 24.0}}) {
    add("rect" + std::to_string(static_cast<int>(w)) + "x" + std::to_string(static_cast<int>(h)),
        [w, h](double cx, double cy, double s, double a) { return rectangle(cx, cy, w * s, h * s, a); });
  }
  for (auto [rx, ry] : {std::pair{24.0, 12.0}, {20.0, 16.0}, {30.0, 10.0}}) {
    add("ellipse" + std::to_string(static_cast<int>(rx)) + "x" + std::to_string(static_cast<int>(ry)),
        [rx, ry](double cx, double cy, double s, double a) { return ellipse(cx, cy, rx * s, ry * s, a); });
  }
  for (int sides : {3, 5, 6, 8}) {
    add("polygon" + std::to_string(sides),
        [sides](double cx, double cy, double s, double a) { return regular_polygon(cx, cy, 22.0 * s, sides, a); });
  }
  for (double r : {14.0, 26.0}) {
    add("hexagon" + std::to_string(static_cast<int>(r)),
        [r](double cx, double cy, double s, double a) { return regular_polygon(cx, cy, r * s, 6, a + 0.3); });
  }
  add("ellipse28x18_tilted",
      [](double cx, double cy, double s, double a) { return ellipse(cx, cy, 28 * s, 18 * s, a + 0.4); });
  return set;
}

// ---------------------------------------------------------------------------

SyntheticScene make_scene(std::uint64_t seed, int width, int height, int n_objects) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double area = static_cast<double>(width) * height;

  SyntheticScene scene;
  scene.image = ImageRGB(width, height);
  const double fx = 0.25 + 0.2 * u01(rng), fy = 0.25 + 0.2 * u01(rng);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = 0.5 + 0.12 * std::sin(fx * x) * std::sin(fy * y) + 0.2 * (u01(rng) - 0.5);
      scene.image.at(x, y) = {v, v, v};
    }
  }

  static const std::array<std::array<double, 3>, 8> palette = {{{0.9, 0.1, 0.1},
                                                                {0.1, 0.75, 0.1},
                                                                {0.1, 0.2, 0.9},
                                                                {0.95, 0.85, 0.1},
                                                                {0.85, 0.1, 0.85},
                                                                {0.1, 0.85, 0.85},
                                                                {0.95, 0.5, 0.05},
                                                                {0.45, 0.1, 0.6}}};
  std::vector<int> colors(palette.size());
  for (size_t i = 0; i < colors.size(); ++i) colors[i] = static_cast<int>(i);
  std::shuffle(colors.begin(), colors.end(), rng);

  // one size per octave-ish band so every scene spans the whole range
  std::vector<double> fracs;
  const double lo = std::log(0.007), hi = std::log(0.065);
  for (int k = 0; k < n_objects; ++k) {
    const double t = (k + u01(rng)) / n_objects;
    fracs.push_back(std::exp(lo + t * (hi - lo)));
  }
  std::shuffle(fracs.begin(), fracs.end(), rng);

  struct Placed {
    double cx, cy, radius;
  };
  std::vector<Placed> placed;
  std::vector<int> owner(static_cast<size_t>(width) * height, 0);
  for (int k = 0; k < n_objects; ++k) {
    const double target = fracs[static_cast<size_t>(k)] * area;
    const int type = static_cast<int>(rng() % 3);
    const double aspect = 1.0 + 0.8 * u01(rng);
    const double angle = kPi * u01(rng);
    const int sides = 5 + static_cast<int>(rng() % 4);
    double radius = 0;
    if (type == 0) {
      radius = aspect * std::sqrt(target / (kPi * aspect));
    } else if (type == 1) {
      const double h = std::sqrt(target / aspect);
      radius = 0.5 * std::hypot(aspect * h, h);
    } else {
      radius = std::sqrt(2 * target / (sides * std::sin(2 * kPi / sides)));
    }
    double cx = 0, cy = 0;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw std::runtime_error("make_scene: cannot place objects");
      cx = radius + 6 + u01(rng) * (width - 2 * radius - 12);
      cy = radius + 6 + u01(rng) * (height - 2 * radius - 12);
      bool clear = true;
      for (const Placed& p : placed) clear = clear && std::hypot(p.cx - cx, p.cy - cy) > p.radius + radius + 12;
      if (clear) break;
    }
    ShapeFn shape;
    if (type == 0) {
      const double ry = std::sqrt(target / (kPi * aspect));
      shape = ellipse(cx, cy, aspect * ry, ry, angle);
    } else if (type == 1) {
      const double h = std::sqrt(target / aspect);
      shape = rectangle(cx, cy, aspect * h, h, angle);
    } else {
      shape = regular_polygon(cx, cy, radius, sides, angle);
    }
    placed.push_back({cx, cy, radius});

    const auto& color = palette[static_cast<size_t>(colors[static_cast<size_t>(k)])];
    GroundTruthObject obj;
    obj.object_id = k + 1;
    obj.mask = Mask(width, height);
    const int x0 = std::max(0, static_cast<int>(cx - radius) - 1), x1 = std::min(width - 1, static_cast<int>(cx + radius) + 1);
    const int y0 = std::max(0, static_cast<int>(cy - radius) - 1), y1 = std::min(height - 1, static_cast<int>(cy + radius) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!shape(x + 0.5, y + 0.5)) continue;
        obj.mask.set(x, y);
        scene.image.at(x, y) = color;
      }
    }
    obj.bbox = obj.mask.bbox();
    scene.truth.objects.push_back(std::move(obj));
  }
  scene.truth.frame_id = "scene" + std::to_string(seed);
  return scene;
}

// ---------------------------------------------------------------------------

std::map<std::vector<int>, double> exact_partition_posterior(const std::vector<Vec3>& obs,
                                                             const DistanceTable& distances,
                                                             const SamplerConfig& config) {
  const int n = static_cast<int>(obs.size());
  std::vector<std::vector<std::pair<int, double>>> options(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    options[static_cast<size_t>(i)].push_back({i, std::log(config.alpha)});
    for (int j = 0; j < n; ++j) {
      const double f = decay(distances.at(i, j), config.a);
      if (j != i && f > 0) options[static_cast<size_t>(i)].push_back({j, std::log(f)});
    }
  }
  std::map<std::vector<int>, std::vector<double>> terms;
  std::vector<size_t> idx(static_cast<size_t>(n), 0);
  LinkState links;
  links.links.resize(static_cast<size_t>(n));
  while (true) {
    double lw = 0;
    for (int i = 0; i < n; ++i) {
      const auto& [c, w] = options[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
      links.links[static_cast<size_t>(i)] = c;
      lw += w;
    }
    const TableAssignment t = tables_from_links(links);
    for (const auto& members : t.members) {
      TableStatsD s;
      for (int m : members) s.add(obs[static_cast<size_t>(m)]);
      lw += niw_log_marginal(s, config.niw);
    }
    terms[t.table_of].push_back(lw);

    int i = 0;
    while (i < n && ++idx[static_cast<size_t>(i)] == options[static_cast<size_t>(i)].size()) {
      idx[static_cast<size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : terms) {
    for (double w : v) max_lw = std::max(max_lw, w);
  }
  std::map<std::vector<int>, double> out;
  double total = 0;
  for (const auto& [k, v] : terms) {
    double s = 0;
    for (double w : v) s += std::exp(w - max_lw);
    out[k] = s;
    total += s;
  }
  for (auto& [k, p] : out) p /= total;
  return out;
}

MonteCarloEstimate monte_carlo_log_marginal(const std::vector<Vec3>& xs, const NiwPriorD& prior, long draws,
                                            std::uint64_t seed, bool integrate_mean) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<std::chi_squared_distribution<double>, 3> chi2 = {
      std::chi_squared_distribution<double>(prior.v0), std::chi_squared_distribution<double>(prior.v0 - 1),
      std::chi_squared_distribution<double>(prior.v0 - 2)};
  // Sigma^-1 ~ Wishart(S0^-1, v0) by the Bartlett decomposition
  const Mat3 chol_v = Eigen::LLT<Mat3>(prior.S0.inverse()).matrixL();
  const double log_2pi = std::log(2 * kPi);
  const double n = static_cast<double>(xs.size());

  // scatter about the sample mean, used when mu is integrated out
  Vec3 mean = Vec3::Zero();
  for (const Vec3& x : xs) mean += x / n;
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& x : xs) scatter += (x - mean) * (x - mean).transpose();
  const Vec3 shift = mean - prior.m0;
  const Mat3 spread = scatter + (prior.kappa0 * n / (prior.kappa0 + n)) * shift * shift.transpose();

  // running log-sum-exp of the terms and of their squares
  double max_term = -std::numeric_limits<double>::infinity();
  double acc = 0, acc2 = 0;
  for (long t = 0; t < draws; ++t) {
    Mat3 a = Mat3::Zero();
    for (int i = 0; i < 3; ++i) {
      a(i, i) = std::sqrt(chi2[static_cast<size_t>(i)](rng));
      for (int j = 0; j < i; ++j) a(i, j) = normal(rng);
    }
    const Mat3 la = chol_v * a;
    const Mat3 precision = la * la.transpose();
    const double log_det_precision = 2 * la.diagonal().array().abs().log().sum();

    double term = 0;
    if (integrate_mean) {
      // int prod_i N(x_i; mu, Sigma) N(mu; m0, Sigma/kappa0) dmu
      term = -0.5 * n * 3 * log_2pi + 0.5 * n * log_det_precision +
             1.5 * std::log(prior.kappa0 / (prior.kappa0 + n)) - 0.5 * (precision * spread).trace();
    } else {
      const Mat3 sigma_l = Eigen::LLT<Mat3>(precision.inverse()).matrixL();
      const Vec3 z(normal(rng), normal(rng), normal(rng));
      const Vec3 mu = prior.m0 + sigma_l * z / std::sqrt(prior.kappa0);
      for (const Vec3& x : xs) {
        const Vec3 r = x - mu;
        term += -0.5 * (3 * log_2pi - log_det_precision + r.dot(precision * r));
      }
    }
    if (term > max_term) {
      const double scale = std::exp(max_term - term);
      acc = acc * scale + 1.0;
      acc2 = acc2 * scale * scale + 1.0;
      max_term = term;
    } else {
      const double w = std::exp(term - max_term);
      acc += w;
      acc2 += w * w;
    }
  }
  const double d = static_cast<double>(draws);
  const double mean_w = acc / d;
  const double var_w = std::max(0.0, acc2 / d - mean_w * mean_w);
  return {max_term + std::log(mean_w), std::sqrt(var_w / d) / mean_w};
}

double total_variation(const std::map<std::vector<int>, double>& p, const std::map<std::vector<int>, double>& q) {
  double tv = 0;
  for (const auto& [k, v] : p) {
    const auto it = q.find(k);
    tv += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.count(k)) tv += v;
  }
  return 0.5 * tv;
}

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ddcrp_" + name + "_" + std::to_string(getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace ddcrp::testing
