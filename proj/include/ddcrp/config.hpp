#pragma once

#include <filesystem>
#include <string>

#include "ddcrp/sampler.hpp"

namespace ddcrp {

struct PipelineConfig {
  struct Superpixels {
    int n_target = 1000;
    double compactness = 45.0;
  } superpixels;
  SamplerConfig sampler;  // includes feature weights
  struct Proposals {
    double min_frac = 0.001;
    double max_frac = 0.1;
  } proposals;
  struct Ranking {
    std::string scorer;
    bool use_weighted = true;
    bool nms = true;
    double iou_threshold = 0.5;
    int top_k = 200;
  } ranking;
  struct Eval {
    double iou_min = 0.5;
    int k_max = 200;
  } eval;

  void validate() const;
};

/// Strict JSON: every key must be present and unknown keys are rejected.
/// Throws ConfigError naming the offending key.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);
std::string dump_config(const PipelineConfig& config);

}  // namespace ddcrp
