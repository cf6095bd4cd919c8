#include "ddcrp/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace ddcrp {

FrameEval evaluate_frame(const std::vector<RankedProposal>& ranked, const GroundTruthFrame& truth, double iou_min,
                         int k_max) {
  if (k_max < 1) throw std::invalid_argument("evaluate_frame: k_max must be >= 1");
  FrameEval out;
  const size_t n_obj = truth.objects.size();
  out.empty_truth = n_obj == 0;
  out.first_match_rank.assign(n_obj, 0);
  out.precision_at_k.assign(static_cast<size_t>(k_max), 0.0);
  out.recall_at_k.assign(static_cast<size_t>(k_max), out.empty_truth ? 1.0 : 0.0);

  std::vector<char> matched(n_obj, 0);
  int matches = 0;
  for (int k = 1; k <= k_max; ++k) {
    if (static_cast<size_t>(k) <= ranked.size()) {
      const BBox& box = ranked[static_cast<size_t>(k - 1)].bbox;
      int best = -1;
      double best_iou = -1.0;
      for (size_t o = 0; o < n_obj; ++o) {
        if (matched[o]) continue;
        const double iou = bbox_iou(box, truth.objects[o].bbox);
        if (iou > best_iou) best_iou = iou, best = static_cast<int>(o);
      }
      if (best >= 0 && best_iou >= iou_min) {
        matched[static_cast<size_t>(best)] = 1;
        out.first_match_rank[static_cast<size_t>(best)] = k;
        ++matches;
      }
    }
    out.precision_at_k[static_cast<size_t>(k - 1)] = static_cast<double>(matches) / k;
    if (!out.empty_truth) out.recall_at_k[static_cast<size_t>(k - 1)] = static_cast<double>(matches) / n_obj;
  }
  return out;
}

double curve_auc(const std::vector<double>& curve) {
  if (curve.empty()) return 0.0;
  if (curve.size() == 1) return curve.front();
  double area = 0.0;
  for (size_t k = 1; k < curve.size(); ++k) area += 0.5 * (curve[k - 1] + curve[k]);
  return area / static_cast<double>(curve.size() - 1);
}

EvalCurves aggregate(const std::vector<FrameEval>& frames, const std::vector<GroundTruthFrame>& truth, int k_max) {
  if (frames.size() != truth.size()) throw std::invalid_argument("aggregate: frame count mismatch");
  EvalCurves c;
  const auto km = static_cast<size_t>(k_max);
  c.precision_at_k.assign(km, 0.0);
  c.recall_at_k.assign(km, 0.0);
  c.global_recall_at_k.assign(km, 0.0);
  if (frames.empty()) return c;

  for (const auto& f : frames) {
    for (size_t k = 0; k < km; ++k) {
      c.precision_at_k[k] += f.precision_at_k[k] / static_cast<double>(frames.size());
      c.recall_at_k[k] += f.recall_at_k[k] / static_cast<double>(frames.size());
    }
  }
  // earliest rank at which each distinct object id is matched in any frame
  std::map<int, int> earliest;
  for (size_t i = 0; i < frames.size(); ++i) {
    for (size_t o = 0; o < truth[i].objects.size(); ++o) {
      const int id = truth[i].objects[o].object_id;
      const int r = frames[i].first_match_rank[o];
      auto [it, inserted] = earliest.emplace(id, r);
      if (!inserted && r > 0 && (it->second == 0 || r < it->second)) it->second = r;
    }
  }
  for (size_t k = 0; k < km; ++k) {
    if (earliest.empty()) {
      c.global_recall_at_k[k] = 1.0;
      continue;
    }
    long hit = 0;
    for (const auto& [id, r] : earliest) hit += r > 0 && static_cast<size_t>(r) <= k + 1;
    c.global_recall_at_k[k] = static_cast<double>(hit) / static_cast<double>(earliest.size());
  }
  c.auc_precision = curve_auc(c.precision_at_k);
  c.auc_recall = curve_auc(c.recall_at_k);
  c.auc_global_recall = curve_auc(c.global_recall_at_k);
  return c;
}

EvalCurves frame_curves(const FrameEval& frame, const GroundTruthFrame& truth, int k_max) {
  return aggregate({frame}, {truth}, k_max);
}

double mask_iou(const Mask& a, const Mask& b) {
  long long inter = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (a.at(x, y) && b.at(x + a.origin_x - b.origin_x, y + a.origin_y - b.origin_y)) ++inter;
    }
  }
  const long long uni = a.area() + b.area() - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

GroundTruthFrame load_ground_truth(const std::filesystem::path& path, const std::string& frame_id) {
  GroundTruthFrame frame;
  frame.frame_id = frame_id;
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".png") {
    const GrayImage16 gray = read_png_gray16(path);
    std::map<int, Mask> masks;
    for (int y = 0; y < gray.height; ++y) {
      for (int x = 0; x < gray.width; ++x) {
        const int id = gray.values[static_cast<size_t>(y) * gray.width + x];
        if (id == 0) continue;
        auto it = masks.try_emplace(id, gray.width, gray.height).first;
        it->second.set(x, y);
      }
    }
    for (auto& [id, mask] : masks) frame.objects.push_back({id, mask.bbox(), std::move(mask)});
    return frame;
  }

  std::ifstream in(path);
  if (!in) throw IoError("unreadable file: " + path.string());
  std::string line;
  std::set<int> ids;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GroundTruthObject obj;
      obj.object_id = j.at("object_id").get<int>();
      const auto b = j.at("bbox").get<std::vector<int>>();
      if (b.size() != 4 || b[0] > b[2] || b[1] > b[3]) throw IoError("malformed bbox");
      obj.bbox = {b[0], b[1], b[2], b[3]};
      if (!ids.insert(obj.object_id).second) throw IoError("duplicate object_id " + std::to_string(obj.object_id));
      frame.objects.push_back(std::move(obj));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frame;
}

}  // namespace ddcrp
