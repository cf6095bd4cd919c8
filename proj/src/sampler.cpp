#include "ddcrp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ddcrp {

void SamplerConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("sampler.alpha must be > 0");
  if (!(a > 0.0)) throw ConfigError("sampler.a must be > 0");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("features.weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("features.weights must sum to 1");
  try {
    niw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_samples < 1) throw ConfigError("sampler.n_samples must be >= 1");
  if (burn_in < 0) throw ConfigError("sampler.burn_in must be >= 0");
}

std::vector<Vec3> average_colors(const std::vector<FeatureVector>& features) {
  std::vector<Vec3> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.avg_rgb);
  return out;
}

GibbsSampler::GibbsSampler(std::span<const Vec3> observations, const DistanceTable& distances,
                           const SamplerConfig& config, LinkState initial)
    : obs_(observations.begin(), observations.end()),
      distances_(distances),
      config_(config),
      log_alpha_(std::log(config.alpha)),
      links_(std::move(initial)) {
  config_.validate();
  const int n = links_.size();
  if (static_cast<int>(obs_.size()) != n || distances_.size() != n) {
    throw std::invalid_argument("GibbsSampler: observation, distance and link sizes differ");
  }
  in_links_.assign(static_cast<size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    const int j = links_.links[static_cast<size_t>(i)];
    if (j < 0 || j >= n) throw std::invalid_argument("GibbsSampler: link out of range");
    if (j != i) in_links_[static_cast<size_t>(j)].push_back(i);
  }
  const TableAssignment start = tables_from_links(links_);
  table_of_ = start.table_of;
  tables_.resize(static_cast<size_t>(start.n_tables));
  for (int t = 0; t < start.n_tables; ++t) {
    tables_[static_cast<size_t>(t)].members = start.members[static_cast<size_t>(t)];
    refresh(t);
  }
  n_tables_ = start.n_tables;
  stamp_.assign(static_cast<size_t>(n), 0);
  queue_.reserve(static_cast<size_t>(n));
}

void GibbsSampler::refresh(int t) {
  Table& table = tables_[static_cast<size_t>(t)];
  table.stats = TableStatsD{};
  for (int m : table.members) table.stats.add(obs_[static_cast<size_t>(m)]);
  table.log_marginal = niw_log_marginal(table.stats, config_.niw);
}

int GibbsSampler::new_table() {
  ++n_tables_;
  if (!free_tables_.empty()) {
    const int t = free_tables_.back();
    free_tables_.pop_back();
    return t;
  }
  tables_.emplace_back();
  return static_cast<int>(tables_.size()) - 1;
}

void GibbsSampler::detach(int i) {
  const int old = links_.links[static_cast<size_t>(i)];
  if (old == i) return;
  auto& in = in_links_[static_cast<size_t>(old)];
  in.erase(std::find(in.begin(), in.end(), i));
  links_.links[static_cast<size_t>(i)] = i;

  // breadth-first search from i; reaching the old target means no split
  if (++generation_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0u);
    generation_ = 1;
  }
  queue_.clear();
  queue_.push_back(i);
  stamp_[static_cast<size_t>(i)] = generation_;
  for (size_t q = 0; q < queue_.size(); ++q) {
    const int u = queue_[q];
    auto visit = [&](int v) {
      if (stamp_[static_cast<size_t>(v)] != generation_) {
        stamp_[static_cast<size_t>(v)] = generation_;
        queue_.push_back(v);
      }
    };
    const int out = links_.links[static_cast<size_t>(u)];
    if (out != u) visit(out);
    for (int v : in_links_[static_cast<size_t>(u)]) visit(v);
    if (stamp_[static_cast<size_t>(old)] == generation_) return;
  }

  const int t = table_of_[static_cast<size_t>(i)];
  const int t_new = new_table();
  Table& split_off = tables_[static_cast<size_t>(t_new)];
  split_off.members = queue_;
  for (int m : queue_) table_of_[static_cast<size_t>(m)] = t_new;
  auto& rest = tables_[static_cast<size_t>(t)].members;
  rest.erase(std::remove_if(rest.begin(), rest.end(),
                            [&](int m) { return stamp_[static_cast<size_t>(m)] == generation_; }),
             rest.end());
  refresh(t_new);
  refresh(t);
}

void GibbsSampler::attach(int i, int j) {
  links_.links[static_cast<size_t>(i)] = j;
  if (j == i) return;
  in_links_[static_cast<size_t>(j)].push_back(i);
  int keep = table_of_[static_cast<size_t>(j)];
  int gone = table_of_[static_cast<size_t>(i)];
  if (keep == gone) return;
  if (tables_[static_cast<size_t>(keep)].members.size() < tables_[static_cast<size_t>(gone)].members.size()) {
    std::swap(keep, gone);
  }
  Table& dst = tables_[static_cast<size_t>(keep)];
  Table& src = tables_[static_cast<size_t>(gone)];
  for (int m : src.members) table_of_[static_cast<size_t>(m)] = keep;
  dst.members.insert(dst.members.end(), src.members.begin(), src.members.end());
  dst.stats += src.stats;
  dst.log_marginal = niw_log_marginal(dst.stats, config_.niw);
  src = Table{};
  free_tables_.push_back(gone);
  --n_tables_;
}

std::vector<std::pair<int, double>> GibbsSampler::conditional(int i) {
  detach(i);
  const int ti = table_of_[static_cast<size_t>(i)];
  const Table& own = tables_[static_cast<size_t>(ti)];
  std::vector<std::pair<int, double>> weights;
  const auto& row = distances_.row(i);
  weights.reserve(row.size() + 1);
  weights.emplace_back(i, log_alpha_);

  // merge ratios cached per neighboring table
  std::vector<std::pair<int, double>> ratios;
  for (const auto& [j, d] : row) {
    if (std::isinf(d)) continue;
    double lw = -d / config_.a;
    const int tj = table_of_[static_cast<size_t>(j)];
    if (tj != ti) {
      auto it = std::find_if(ratios.begin(), ratios.end(), [tj](const auto& r) { return r.first == tj; });
      if (it == ratios.end()) {
        const Table& other = tables_[static_cast<size_t>(tj)];
        const double ratio = niw_log_marginal(own.stats + other.stats, config_.niw) -
                             (own.log_marginal + other.log_marginal);
        ratios.emplace_back(tj, ratio);
        it = std::prev(ratios.end());
      }
      lw += it->second;
    }
    weights.emplace_back(j, lw);
  }
  return weights;
}

void GibbsSampler::resample(int i, Rng& rng) {
  const auto weights = conditional(i);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& [j, lw] : weights) max_lw = std::max(max_lw, lw);
  double total = 0.0;
  std::vector<double> cumulative(weights.size());
  for (size_t k = 0; k < weights.size(); ++k) {
    total += std::exp(weights[k].second - max_lw);
    cumulative[k] = total;
  }
  const double u = rng.uniform() * total;
  size_t pick = static_cast<size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  pick = std::min(pick, weights.size() - 1);
  attach(i, weights[pick].first);
}

void GibbsSampler::sweep(Rng& rng) {
  const int n = links_.size();
  if (config_.random_scan) {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int k = n - 1; k > 0; --k) {
      std::swap(order[static_cast<size_t>(k)], order[rng.next() % static_cast<std::uint64_t>(k + 1)]);
    }
    for (int i : order) resample(i, rng);
    return;
  }
  for (int i = 0; i < n; ++i) resample(i, rng);
}

TableAssignment GibbsSampler::assignment() const { return canonical_assignment(table_of_); }

std::vector<TableStatsD> GibbsSampler::table_stats() const {
  std::vector<TableStatsD> out;
  std::vector<char> seen(tables_.size(), 0);
  for (int t : table_of_) {
    if (seen[static_cast<size_t>(t)]) continue;
    seen[static_cast<size_t>(t)] = 1;
    out.push_back(tables_[static_cast<size_t>(t)].stats);
  }
  return out;
}

LinkState gibbs_sweep(const LinkState& state, const std::vector<FeatureVector>& features,
                      const DistanceTable& distances, const SamplerConfig& config, Rng& rng) {
  const std::vector<Vec3> obs = average_colors(features);
  GibbsSampler sampler(obs, distances, config, state);
  sampler.sweep(rng);
  return sampler.links();
}

std::vector<SegmentationSample> sample_posterior(const std::vector<FeatureVector>& features,
                                                 const DistanceTable& distances, const SamplerConfig& config) {
  config.validate();
  const std::vector<Vec3> obs = average_colors(features);
  GibbsSampler sampler(obs, distances, config, LinkState::self_links(static_cast<int>(features.size())));
  Rng rng(config.seed);
  for (int s = 0; s < config.burn_in; ++s) sampler.sweep(rng);
  std::vector<SegmentationSample> samples;
  samples.reserve(static_cast<size_t>(config.n_samples));
  for (int s = 0; s < config.n_samples; ++s) {
    sampler.sweep(rng);
    samples.push_back({sampler.assignment(), sampler.links(), config.burn_in + s});
  }
  return samples;
}

}  // namespace ddcrp
