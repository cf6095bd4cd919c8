#include "ddcrp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ddcrp {
using nlohmann::json;

void PipelineConfig::validate() const {
  if (superpixels.n_target < 1) throw ConfigError("superpixels.n_target must be >= 1");
  if (!(superpixels.compactness > 0.0)) throw ConfigError("superpixels.compactness must be > 0");
  sampler.validate();
  if (!(proposals.min_frac >= 0.0 && proposals.min_frac < proposals.max_frac && proposals.max_frac <= 1.0)) {
    throw ConfigError("proposals: require 0 <= min_frac < max_frac <= 1");
  }
  if (!(ranking.iou_threshold >= 0.0 && ranking.iou_threshold <= 1.0)) {
    throw ConfigError("ranking.iou_threshold must lie in [0, 1]");
  }
  if (ranking.top_k < 1) throw ConfigError("ranking.top_k must be >= 1");
  if (!(eval.iou_min >= 0.0 && eval.iou_min <= 1.0)) throw ConfigError("eval.iou_min must lie in [0, 1]");
  if (eval.k_max < 1) throw ConfigError("eval.k_max must be >= 1");
}

namespace {

// Tracks which keys of an object were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& parent, const std::string& name) : name_(name) {
    if (!parent.contains(name)) throw ConfigError("missing config key: " + name);
    node_ = &parent.at(name);
    if (!node_->is_object()) throw ConfigError("config key " + name + " must be an object");
  }

  template <typename T>
  T get(const std::string& key) {
    const std::string full = name_ + "." + key;
    if (!node_->contains(key)) throw ConfigError("missing config key: " + full);
    used_.insert(key);
    try {
      return node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key " + full + " has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) throw ConfigError("unknown config key: " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kSections = {"superpixels", "features", "sampler", "proposals", "ranking", "eval"};
  for (const auto& [key, value] : root.items()) {
    if (!kSections.count(key)) throw ConfigError("unknown config key: " + key);
  }

  PipelineConfig c;
  {
    Section s(root, "superpixels");
    c.superpixels.n_target = s.get<int>("n_target");
    c.superpixels.compactness = s.get<double>("compactness");
    s.finish();
  }
  {
    Section s(root, "features");
    const auto w = s.get<std::vector<double>>("weights");
    if (w.size() != 3) throw ConfigError("features.weights must have 3 entries");
    c.sampler.weights = {w[0], w[1], w[2]};
    s.finish();
  }
  {
    Section s(root, "sampler");
    c.sampler.alpha = s.get<double>("alpha");
    c.sampler.a = s.get<double>("a");
    const auto m0 = s.get<std::vector<double>>("m0");
    if (m0.size() != 3) throw ConfigError("sampler.m0 must have 3 entries");
    c.sampler.niw.m0 = Vec3(m0[0], m0[1], m0[2]);
    c.sampler.niw.kappa0 = s.get<double>("kappa0");
    const auto s0 = s.get<std::vector<std::vector<double>>>("S0");
    if (s0.size() != 3) throw ConfigError("sampler.S0 must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (s0[r].size() != 3) throw ConfigError("sampler.S0 must be 3x3");
      for (int k = 0; k < 3; ++k) c.sampler.niw.S0(r, k) = s0[r][k];
    }
    c.sampler.niw.v0 = s.get<double>("v0");
    c.sampler.n_samples = s.get<int>("n_samples");
    c.sampler.burn_in = s.get<int>("burn_in");
    c.sampler.seed = s.get<std::uint64_t>("seed");
    c.sampler.random_scan = s.get<bool>("random_scan");
    s.finish();
  }
  {
    Section s(root, "proposals");
    c.proposals.min_frac = s.get<double>("min_frac");
    c.proposals.max_frac = s.get<double>("max_frac");
    s.finish();
  }
  {
    Section s(root, "ranking");
    c.ranking.scorer = s.get<std::string>("scorer");
    c.ranking.use_weighted = s.get<bool>("use_weighted");
    c.ranking.nms = s.get<bool>("nms");
    c.ranking.iou_threshold = s.get<double>("iou_threshold");
    c.ranking.top_k = s.get<int>("top_k");
    s.finish();
  }
  {
    Section s(root, "eval");
    c.eval.iou_min = s.get<double>("iou_min");
    c.eval.k_max = s.get<int>("k_max");
    s.finish();
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("unreadable file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const PipelineConfig& c) {
  json j;
  j["superpixels"] = {{"n_target", c.superpixels.n_target}, {"compactness", c.superpixels.compactness}};
  j["features"] = {{"weights", c.sampler.weights}};
  json s0 = json::array();
  for (int r = 0; r < 3; ++r) s0.push_back({c.sampler.niw.S0(r, 0), c.sampler.niw.S0(r, 1), c.sampler.niw.S0(r, 2)});
  j["sampler"] = {{"alpha", c.sampler.alpha},
                  {"a", c.sampler.a},
                  {"m0", {c.sampler.niw.m0(0), c.sampler.niw.m0(1), c.sampler.niw.m0(2)}},
                  {"kappa0", c.sampler.niw.kappa0},
                  {"S0", s0},
                  {"v0", c.sampler.niw.v0},
                  {"n_samples", c.sampler.n_samples},
                  {"burn_in", c.sampler.burn_in},
                  {"seed", c.sampler.seed},
                  {"random_scan", c.sampler.random_scan}};
  j["proposals"] = {{"min_frac", c.proposals.min_frac}, {"max_frac", c.proposals.max_frac}};
  j["ranking"] = {{"scorer", c.ranking.scorer},
                  {"use_weighted", c.ranking.use_weighted},
                  {"nms", c.ranking.nms},
                  {"iou_threshold", c.ranking.iou_threshold},
                  {"top_k", c.ranking.top_k}};
  j["eval"] = {{"iou_min", c.eval.iou_min}, {"k_max", c.eval.k_max}};
  return j.dump(2) + "\n";
}

}  // namespace ddcrp
