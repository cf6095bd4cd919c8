#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ddcrp/eval.hpp"
#include "ddcrp/gestalt.hpp"
#include "ddcrp/image.hpp"
#include "ddcrp/niw.hpp"
#include "ddcrp/sampler.hpp"

namespace ddcrp::testing {

// ---------------------------------------------------------------------------
// Shapes

/// Inside test in continuous coordinates; pixel (x, y) is sampled at its center.
using ShapeFn = std::function<bool(double x, double y)>;

Mask rasterize(const ShapeFn& inside, int width, int height);

ShapeFn square(double cx, double cy, double side, double angle = 0.0);
ShapeFn rectangle(double cx, double cy, double w, double h, double angle = 0.0);
ShapeFn ellipse(double cx, double cy, double rx, double ry, double angle = 0.0);
ShapeFn disk(double cx, double cy, double r);
/// Regular polygon with circumradius r.
ShapeFn regular_polygon(double cx, double cy, double r, int sides, double angle = 0.0);

/// Nearest-neighbor 2x upscaling.
Mask upscale2(const Mask& m);

struct NamedShape {
  std::string name;
  // (center x, center y, scale factor, rotation) -> shape
  std::function<ShapeFn(double, double, double, double)> make;
};

/// 20 shapes used for the scale and rotation properties.
std::vector<NamedShape> shape_fixture_set();

// ---------------------------------------------------------------------------
// Synthetic scenes

struct SyntheticScene {
  ImageRGB image;
  GroundTruthFrame truth;
};

/// width x height scene: textured gray background with `n_objects` convex,
/// uniformly colored objects covering 0.5%-8% of the image each.
SyntheticScene make_scene(std::uint64_t seed, int width = 640, int height = 480, int n_objects = 5);

// ---------------------------------------------------------------------------
// Oracles

/// Exact partition posterior by enumerating every link vector.
/// Keys are canonical table_of vectors.
std::map<std::vector<int>, double> exact_partition_posterior(const std::vector<Vec3>& obs,
                                                             const DistanceTable& distances,
                                                             const SamplerConfig& config);

struct MonteCarloEstimate {
  double log_value = 0.0;
  double std_error = 0.0;  // of log_value, delta method
};

/// log of the prior expectation of prod_i N(x_i; mu, Sigma) under the NIW
/// prior from `draws` samples. With integrate_mean the Gaussian integral over
/// mu given Sigma is done analytically and only Sigma is sampled; otherwise
/// (mu, Sigma) are both drawn from the prior.
MonteCarloEstimate monte_carlo_log_marginal(const std::vector<Vec3>& xs, const NiwPriorD& prior, long draws,
                                            std::uint64_t seed, bool integrate_mean = false);

double total_variation(const std::map<std::vector<int>, double>& p, const std::map<std::vector<int>, double>& q);

/// Fresh, empty scratch directory under the system temp dir.
std::string scratch_dir(const std::string& name);

}  // namespace ddcrp::testing
