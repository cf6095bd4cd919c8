#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ddcrp/features.hpp"
#include "ddcrp/niw.hpp"
#include "ddcrp/partition.hpp"

namespace ddcrp {

struct SamplerConfig {
  double alpha = 1.0;  // self-link mass; log alpha = 0
  double a = 0.05;     // decay scale
  ChannelWeights weights = kDefaultWeights;
  NiwPriorD niw;
  int n_samples = 50;
  int burn_in = 50;
  std::uint64_t seed = 0;
  bool random_scan = false;

  void validate() const;
};

/// Chain-owned generator. Uniform draws use the top 53 bits so streams are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct SegmentationSample {
  TableAssignment assignment;
  LinkState links;
  int sweep_index = 0;
};

/// Gibbs sampler over customer links. Table membership is maintained
/// incrementally: removing a link re-explores only the affected table
/// through a reverse-link index, and merges move the smaller table.
class GibbsSampler {
 public:
  GibbsSampler(std::span<const Vec3> observations, const DistanceTable& distances, const SamplerConfig& config,
               LinkState initial);

  /// Resamples every customer's link once (ascending order unless random_scan).
  void sweep(Rng& rng);
  /// Resamples customer i's link from its full conditional.
  void resample(int i, Rng& rng);

  /// Unnormalized log-weights of the candidates for customer i's link given
  /// all other links, as (candidate, log-weight) pairs with the self-link first.
  /// Leaves customer i self-linked.
  std::vector<std::pair<int, double>> conditional(int i);

  [[nodiscard]] const LinkState& links() const { return links_; }
  [[nodiscard]] TableAssignment assignment() const;
  /// Per-table statistics in canonical table order.
  [[nodiscard]] std::vector<TableStatsD> table_stats() const;
  [[nodiscard]] int n_tables() const { return n_tables_; }

 private:
  struct Table {
    std::vector<int> members;
    TableStatsD stats;
    double log_marginal = 0.0;
  };

  void detach(int i);
  void attach(int i, int j);
  void refresh(int t);
  int new_table();

  std::vector<Vec3> obs_;
  const DistanceTable& distances_;
  SamplerConfig config_;
  double log_alpha_;

  LinkState links_;
  std::vector<std::vector<int>> in_links_;
  std::vector<int> table_of_;
  std::vector<Table> tables_;
  std::vector<int> free_tables_;
  int n_tables_ = 0;

  std::vector<unsigned> stamp_;
  unsigned generation_ = 0;
  std::vector<int> queue_;
};

/// One sweep from an arbitrary link state; convenience wrapper over GibbsSampler.
LinkState gibbs_sweep(const LinkState& state, const std::vector<FeatureVector>& features,
                      const DistanceTable& distances, const SamplerConfig& config, Rng& rng);

/// Starts from all self-links, discards burn_in sweeps, then records one
/// sample per sweep for n_samples sweeps.
std::vector<SegmentationSample> sample_posterior(const std::vector<FeatureVector>& features,
                                                 const DistanceTable& distances, const SamplerConfig& config);

std::vector<Vec3> average_colors(const std::vector<FeatureVector>& features);

}  // namespace ddcrp
