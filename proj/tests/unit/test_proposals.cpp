#include <doctest.h>

#include <algorithm>
#include <random>

#include "ddcrp/proposals.hpp"
#include "fixtures.hpp"

using namespace ddcrp;

namespace {

SegmentationSample sample_from(const std::vector<int>& table_of) {
  SegmentationSample s;
  s.assignment = canonical_assignment(table_of);
  return s;
}

// a sample given directly as its list of segments
SegmentationSample sample_of_segments(std::vector<std::vector<int>> segments) {
  SegmentationSample s;
  s.assignment.n_tables = static_cast<int>(segments.size());
  s.assignment.members = std::move(segments);
  return s;
}

SuperpixelGraph line_graph(int n, int pixels_each = 1) {
  LabelMap m{n * pixels_each, 1, {}, n};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < pixels_each; ++k) m.labels.push_back(i);
  }
  return build_graph(m);
}

const Proposal* find(const std::vector<Proposal>& ps, const std::vector<int>& ids) {
  for (const auto& p : ps) {
    if (p.superpixels == ids) return &p;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("one sample with K segments gives 1/K each") {
  const auto props = extract_proposals({sample_from({0, 0, 1, 2, 2})}, line_graph(5));
  REQUIRE(props.size() == 3);
  for (const auto& p : props) CHECK(p.likelihood == 1.0 / 3.0);
}

TEST_CASE("M=2: S1 = {A, B}, S2 = {A, C}") {
  const std::vector<int> A = {0, 1}, B = {2, 3}, C = {4};
  const auto props = extract_proposals({sample_of_segments({A, B}), sample_of_segments({A, C})}, line_graph(5));
  REQUIRE(props.size() == 3);
  CHECK(find(props, A)->likelihood == 0.5);
  CHECK(find(props, B)->likelihood == 0.25);
  CHECK(find(props, C)->likelihood == 0.25);
  CHECK(find(props, A)->occurrences == 2);
  CHECK(props[0].superpixels == A);
  CHECK(props[1].superpixels == B);  // tie broken by id list
}

TEST_CASE("segment present in all 50 samples of K=10") {
  std::vector<SegmentationSample> samples;
  std::mt19937_64 rng(3);
  for (int s = 0; s < 50; ++s) {
    // superpixel 0 alone in every sample; the other 9 tables vary
    std::vector<int> table_of = {0};
    for (int i = 1; i < 30; ++i) table_of.push_back(1 + static_cast<int>(rng() % 9));
    for (int k = 1; k <= 9; ++k) table_of[static_cast<size_t>(k)] = k;  // keep all 9 tables nonempty
    samples.push_back(sample_from(table_of));
  }
  const auto props = extract_proposals(samples, line_graph(30));
  CHECK(find(props, {0})->likelihood == 0.1);
}

TEST_CASE("likelihoods form a distribution and extraction is order independent") {
  const auto scene = testing::make_scene(8, 160, 120, 2);
  const LabelMap m = slic_superpixels(scene.image, 100, 45.0, 0);
  const SuperpixelGraph g = build_graph(m);
  const auto f = superpixel_features(scene.image, compute_feature_maps(scene.image), m);
  SamplerConfig cfg;
  cfg.n_samples = 20;
  cfg.burn_in = 5;
  auto samples = sample_posterior(f, pairwise_distances(f, g), cfg);
  const auto props = extract_proposals(samples, g);
  double total = 0;
  long long occ = 0, segments = 0;
  for (const auto& p : props) {
    total += p.likelihood;
    occ += p.occurrences;
    long long area = 0;
    for (int id : p.superpixels) area += g.pixel_count[static_cast<size_t>(id)];
    CHECK(area == p.pixel_area);
  }
  for (const auto& s : samples) segments += s.assignment.n_tables;
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(occ == segments);

  std::reverse(samples.begin(), samples.end());
  std::shuffle(samples.begin(), samples.end(), std::mt19937_64(1));
  CHECK(extract_proposals(samples, g) == props);
}

TEST_CASE("size filter bounds are inclusive") {
  const SuperpixelGraph g = line_graph(3, 10);
  const auto props = extract_proposals({sample_from({0, 1, 1})}, g);  // areas 10 and 20
  CHECK(filter_by_size(props, 100, 0.0, 0.1).size() == 1);            // exactly 10% kept
  CHECK(filter_by_size(props, 100, 0.2, 0.5).size() == 1);            // exactly 20% kept at min
  const auto small = filter_by_size(props, 20000, 0.001, 0.1);        // 0.05% removed, 0.1% kept
  REQUIRE(small.size() == 1);
  CHECK(small[0].pixel_area == 20);
  CHECK(filter_by_size(props, 100, 0.0, 1.0) == props);
  CHECK_THROWS_AS(filter_by_size(props, 100, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(filter_by_size(props, 100, -0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(filter_by_size(props, 100, 0.1, 1.5), std::invalid_argument);
}
