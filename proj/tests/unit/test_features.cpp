#include <doctest.h>

#include <cmath>
#include <random>

#include "ddcrp/features.hpp"
#include "fixtures.hpp"

using namespace ddcrp;

namespace {

ImageRGB one_pixel(double r, double g, double b) {
  ImageRGB img(1, 1);
  img.pixels[0] = {r, g, b};
  return img;
}

}  // namespace

TEST_CASE("feature maps: channel formulas") {
  // gray: (b - (r+g)/2 + 1)/2 = (0.5 - 0.5 + 1)/2 = 0.5
  FeatureMaps gray = compute_feature_maps(one_pixel(0.5, 0.5, 0.5));
  CHECK(gray.intensity[0] == doctest::Approx(0.5));
  CHECK(gray.rg_contrast[0] == doctest::Approx(0.5));
  CHECK(gray.by_contrast[0] == doctest::Approx(0.5));

  FeatureMaps red = compute_feature_maps(one_pixel(1, 0, 0));
  CHECK(red.intensity[0] == doctest::Approx(1.0 / 3.0));
  CHECK(red.rg_contrast[0] == doctest::Approx(1.0));
  CHECK(red.by_contrast[0] == doctest::Approx(0.25));

  FeatureMaps blue = compute_feature_maps(one_pixel(0, 0, 1));
  CHECK(blue.intensity[0] == doctest::Approx(1.0 / 3.0));
  CHECK(blue.rg_contrast[0] == doctest::Approx(0.5));
  CHECK(blue.by_contrast[0] == doctest::Approx(1.0));

  FeatureMaps green = compute_feature_maps(one_pixel(0, 1, 0));
  CHECK(green.rg_contrast[0] == doctest::Approx(0.0));
}

TEST_CASE("histogram bins: half-open, last bin closed") {
  CHECK(histogram_bin(0.0) == 0);
  CHECK(histogram_bin(0.5) == 8);
  CHECK(histogram_bin(1.0 / 16.0) == 1);
  CHECK(histogram_bin(std::nextafter(1.0 / 16.0, 0.0)) == 0);
  CHECK(histogram_bin(15.0 / 16.0) == 15);
  CHECK(histogram_bin(1.0) == 15);
}

TEST_CASE("superpixel features") {
  SUBCASE("constant intensity 0.5 lands in bin 8") {
    ImageRGB img(2, 1);
    img.pixels = {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
    LabelMap m{2, 1, {0, 0}, 1};
    const auto f = superpixel_features(img, compute_feature_maps(img), m);
    REQUIRE(f.size() == 1);
    for (int k = 0; k < kHistogramBins; ++k) CHECK(f[0].hist_i[static_cast<size_t>(k)] == (k == 8 ? 1.0 : 0.0));
  }
  SUBCASE("black and white pixel") {
    ImageRGB img(2, 1);
    img.pixels = {{0, 0, 0}, {1, 1, 1}};
    LabelMap m{2, 1, {0, 0}, 1};
    const auto f = superpixel_features(img, compute_feature_maps(img), m);
    CHECK(f[0].avg_rgb.isApprox(Vec3(0.5, 0.5, 0.5)));
    CHECK(f[0].hist_i[0] == 0.5);
    CHECK(f[0].hist_i[15] == 0.5);
  }
  SUBCASE("histograms are normalized") {
    const auto scene = testing::make_scene(2, 160, 120, 2);
    const LabelMap m = slic_superpixels(scene.image, 60, 45.0, 0);
    const auto f = superpixel_features(scene.image, compute_feature_maps(scene.image), m);
    REQUIRE(static_cast<int>(f.size()) == m.n_superpixels);
    for (const auto& v : f) {
      for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (double h : v.channel(c)) s += h;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pairwise distances") {
  SuperpixelGraph g = build_graph(LabelMap{3, 1, {0, 1, 2}, 3});
  FeatureVector a, b;
  a.hist_i[0] = a.hist_rg[0] = a.hist_by[0] = 1.0;
  b.hist_i[15] = b.hist_rg[15] = b.hist_by[15] = 1.0;

  const DistanceTable same = pairwise_distances({a, a, a}, g);
  CHECK(same.at(0, 1) == 0.0);

  const DistanceTable disjoint = pairwise_distances({a, b, a}, g);
  CHECK(disjoint.at(0, 1) == doctest::Approx(1.0));
  CHECK(disjoint.at(1, 0) == disjoint.at(0, 1));
  CHECK(std::isinf(disjoint.at(0, 2)));

  // only the intensity channel differs: d = w_I
  FeatureVector c = a;
  c.hist_i = b.hist_i;
  const DistanceTable weighted = pairwise_distances({a, c, a}, g, {0.5, 0.25, 0.25});
  CHECK(weighted.at(0, 1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(pairwise_distances({a, b, a}, g, {0.5, 0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(pairwise_distances({a, b, a}, g, {1.2, -0.1, -0.1}), std::invalid_argument);
}

TEST_CASE("pairwise distances lie in [0, 1] and are symmetric on a real image") {
  const auto scene = testing::make_scene(4, 160, 120, 3);
  const LabelMap m = slic_superpixels(scene.image, 80, 45.0, 0);
  const SuperpixelGraph g = build_graph(m);
  const auto f = superpixel_features(scene.image, compute_feature_maps(scene.image), m);
  const DistanceTable d = pairwise_distances(f, g, {0.2, 0.3, 0.5});
  for (int i = 0; i < g.n; ++i) {
    CHECK(d.row(i).size() == g.adjacency[static_cast<size_t>(i)].size());
    for (const auto& [j, v] : d.row(i)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(d.at(j, i) == v);
    }
  }
}

TEST_CASE("decay") {
  CHECK(decay(0.0, 0.05) == 1.0);
  CHECK(decay(kInfiniteDistance, 0.05) == 0.0);
  CHECK(decay(0.05, 0.05) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(decay(0.1, 0.05) <= decay(0.05, 0.05));
  CHECK_THROWS_AS(decay(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(decay(0.1, -1.0), std::invalid_argument);
}
