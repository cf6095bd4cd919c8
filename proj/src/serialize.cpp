#include "ddcrp/serialize.hpp"

#include <fstream>
#include <iomanip>

#include <json.hpp>

namespace ddcrp {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json proposal_json(const Proposal& p) {
  json j;
  j["superpixel_ids"] = p.superpixels;
  j["occurrences"] = p.occurrences;
  j["likelihood"] = p.likelihood;
  j["pixel_area"] = p.pixel_area;
  return j;
}

Proposal proposal_from_json(const json& j) {
  Proposal p;
  p.superpixels = j.at("superpixel_ids").get<std::vector<int>>();
  p.occurrences = j.at("occurrences").get<int>();
  p.likelihood = j.at("likelihood").get<double>();
  p.pixel_area = j.at("pixel_area").get<long long>();
  if (p.superpixels.empty() || !std::is_sorted(p.superpixels.begin(), p.superpixels.end()) ||
      std::adjacent_find(p.superpixels.begin(), p.superpixels.end()) != p.superpixels.end()) {
    throw IoError("superpixel_ids must be nonempty and strictly ascending");
  }
  return p;
}

template <typename F>
void for_each_json_line(const fs::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw IoError("unreadable file: " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_proposals(const std::vector<Proposal>& proposals, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& p : proposals) out << proposal_json(p).dump() << '\n';
}

std::vector<Proposal> read_proposals(const fs::path& path) {
  std::vector<Proposal> out;
  for_each_json_line(path, [&](const json& j) { out.push_back(proposal_from_json(j)); });
  return out;
}

void write_ranked(const std::vector<RankedProposal>& ranked, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& r : ranked) {
    json j = proposal_json(r.proposal);
    json m;
    const auto values = r.measures.as_array();
    for (int k = 0; k < kNumMeasures; ++k) m[kMeasureNames[k]] = values[k];
    j["measures"] = m;
    j["score"] = r.score;
    j["weighted_score"] = r.weighted_score;
    j["bbox"] = {r.bbox.x_min, r.bbox.y_min, r.bbox.x_max, r.bbox.y_max};
    out << j.dump() << '\n';
  }
}

std::vector<RankedProposal> read_ranked(const fs::path& path) {
  std::vector<RankedProposal> out;
  for_each_json_line(path, [&](const json& j) {
    RankedProposal r;
    r.proposal = proposal_from_json(j);
    std::array<double, kNumMeasures> values{};
    for (int k = 0; k < kNumMeasures; ++k) values[k] = j.at("measures").at(kMeasureNames[k]).get<double>();
    r.measures = GestaltMeasures::from_array(values);
    r.score = j.at("score").get<double>();
    r.weighted_score = j.at("weighted_score").get<double>();
    const auto b = j.at("bbox").get<std::vector<int>>();
    if (b.size() != 4 || b[0] > b[2] || b[1] > b[3]) throw IoError("malformed bbox");
    r.bbox = {b[0], b[1], b[2], b[3]};
    out.push_back(std::move(r));
  });
  return out;
}

void write_model(const ScoringModel& model, const fs::path& path) {
  json j;
  j["type"] = "ridge_linear";
  j["measures"] = kMeasureNames;
  j["means"] = model.feature_means;
  j["scales"] = model.feature_scales;
  j["coefficients"] = model.coefficients;
  j["bias"] = model.bias;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ScoringModel read_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("unreadable file: " + path.string());
  try {
    const json j = json::parse(in);
    ScoringModel m;
    auto get7 = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (v.size() != kNumMeasures) throw IoError(std::string(key) + " must have 7 entries");
      std::array<double, kNumMeasures> a{};
      std::copy(v.begin(), v.end(), a.begin());
      return a;
    };
    m.feature_means = get7("means");
    m.feature_scales = get7("scales");
    m.coefficients = get7("coefficients");
    m.bias = j.at("bias").get<double>();
    for (double s : m.feature_scales) {
      if (!(s > 0.0)) throw IoError("scales must be positive");
    }
    return m;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError("bad scoring model " + path.string() + ": " + e.what());
  }
}

void write_run_log(const std::vector<SegmentationSample>& samples, std::ostream& out) {
  for (const auto& s : samples) {
    out << "sweep " << s.sweep_index << " K " << s.assignment.n_tables << " links";
    for (int c : s.links.links) out << ' ' << c;
    out << '\n';
  }
}

void write_run_log(const std::vector<SegmentationSample>& samples, const fs::path& path) {
  auto out = open_out(path);
  write_run_log(samples, out);
}

void write_curves_csv(const EvalCurves& curves, const fs::path& path) {
  auto out = open_out(path);
  out << "k,precision,recall,global_recall\n" << std::setprecision(17);
  for (size_t k = 0; k < curves.precision_at_k.size(); ++k) {
    out << k + 1 << ',' << curves.precision_at_k[k] << ',' << curves.recall_at_k[k] << ','
        << curves.global_recall_at_k[k] << '\n';
  }
}

}  // namespace ddcrp
