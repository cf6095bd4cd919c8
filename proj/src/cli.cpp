#include "ddcrp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddcrp/config.hpp"
#include "ddcrp/pipeline.hpp"
#include "ddcrp/serialize.hpp"

namespace ddcrp {
namespace fs = std::filesystem;

namespace {

// Validation failures that are not config-file problems but still exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 1;
};

PipelineConfig resolve_config(const CommonOptions& opt) {
  PipelineConfig config = opt.config_path.empty() ? PipelineConfig{} : load_config(opt.config_path);
  if (opt.seed) config.sampler.seed = *opt.seed;
  config.validate();
  return config;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::optional<LabelMap> optional_labels(const std::string& path, const ImageRGB& image) {
  if (path.empty()) return std::nullopt;
  return load_label_map(path, image.width, image.height);
}

int cmd_propose(const std::string& image_path, const std::string& labels_path, const CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const ImageRGB image = load_image(image_path);
  const FrameResult r = propose(image, config, optional_labels(labels_path, image));
  const fs::path out(opt.out);
  ensure_dir(out);
  write_proposals(r.proposals, out / "proposals.jsonl");
  save_label_map(r.labels, out / "labels.csv");
  write_run_log(r.samples, out / "run.log");
  std::cout << r.proposals.size() << " proposals (" << r.all_proposals.size() << " before size filter), "
            << r.labels.n_superpixels << " superpixels -> " << out.string() << "\n";
  return kExitOk;
}

ScoringModel resolve_model(const std::string& flag_path, const PipelineConfig& config) {
  const std::string path = flag_path.empty() ? config.ranking.scorer : flag_path;
  if (path.empty()) throw UsageError("missing scorer model (use --model or ranking.scorer)");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError("missing scorer model: " + path);
  return read_model(path);
}

struct RankFlags {
  std::string model;
  std::string labels;
  std::string image;
  std::optional<bool> weighted;
  std::optional<bool> nms;
  std::optional<int> top_k;
};

int cmd_rank(const std::string& proposals_path, const RankFlags& flags, const CommonOptions& opt) {
  PipelineConfig config = resolve_config(opt);
  if (flags.weighted) config.ranking.use_weighted = *flags.weighted;
  if (flags.nms) config.ranking.nms = *flags.nms;
  if (flags.top_k) {
    if (*flags.top_k < 1) throw UsageError("--top-k must be >= 1");
    config.ranking.top_k = *flags.top_k;
  }
  const ScoringModel model = resolve_model(flags.model, config);
  std::optional<ImageRGB> image;
  if (!flags.image.empty()) image = load_image(flags.image);
  const LabelMap labels =
      image ? load_label_map(flags.labels, image->width, image->height) : load_label_map(flags.labels);
  const std::vector<Proposal> proposals = read_proposals(proposals_path);
  const auto ranked = rank(proposals, labels, model, config.ranking);
  write_ranked(ranked, opt.out);
  std::cout << ranked.size() << " ranked proposals -> " << opt.out << "\n";
  return kExitOk;
}

struct ManifestEntry {
  fs::path image;
  std::optional<fs::path> labels;
  fs::path truth;
  std::string frame_id;
};

std::vector<ManifestEntry> read_manifest(const fs::path& manifest, const fs::path& gt_dir) {
  std::ifstream in(manifest);
  if (!in) throw IoError("unreadable file: " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3) {
      throw UsageError(manifest.string() + ":" + std::to_string(line_no) + ": expected image,labels,ground_truth");
    }
    ManifestEntry e;
    e.image = base / cells[0];
    if (cells[1] != "-" && !cells[1].empty()) e.labels = base / cells[1];
    e.truth = gt_dir / cells[2];
    e.frame_id = fs::path(cells[0]).stem().string();
    entries.push_back(std::move(e));
  }
  return entries;
}

int cmd_train(const std::string& manifest, const std::string& gt_dir, double ridge, const CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const auto entries = read_manifest(manifest, gt_dir);
  std::vector<std::vector<TrainingExample>> per_frame(entries.size());
  parallel_for(static_cast<int>(entries.size()), opt.workers, [&](int i) {
    const ManifestEntry& e = entries[static_cast<size_t>(i)];
    const ImageRGB image = load_image(e.image);
    std::optional<LabelMap> labels;
    if (e.labels) labels = load_label_map(*e.labels, image.width, image.height);
    const FrameResult r = propose(image, config, std::move(labels));
    const GroundTruthFrame truth = load_ground_truth(e.truth, e.frame_id);
    per_frame[static_cast<size_t>(i)] = training_examples(r.proposals, r.labels, truth);
  });
  std::vector<TrainingExample> all;
  for (auto& f : per_frame) all.insert(all.end(), f.begin(), f.end());
  if (all.size() < 8) {
    throw UsageError("only " + std::to_string(all.size()) + " training proposals; at least 8 are required");
  }
  const ScoringModel model = fit_scoring_model(all, ridge);
  write_model(model, opt.out);
  std::cout << "fitted scorer on " << all.size() << " proposals from " << entries.size() << " frames -> " << opt.out
            << "\n";
  return kExitOk;
}

void write_svg(const EvalCurves& c, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  constexpr double kW = 640, kH = 400, kPad = 40;
  const size_t n = c.precision_at_k.size();
  auto polyline = [&](const std::vector<double>& v, const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (size_t k = 0; k < n; ++k) {
      const double x = kPad + (n > 1 ? (kW - 2 * kPad) * k / (n - 1.0) : 0.0);
      const double y = kH - kPad - (kH - 2 * kPad) * v[k];
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kW - 2 * kPad << "\" height=\""
      << kH - 2 * kPad << "\" fill=\"none\" stroke=\"black\"/>\n";
  polyline(c.precision_at_k, "red");
  polyline(c.recall_at_k, "blue");
  polyline(c.global_recall_at_k, "green");
  out << "<text x=\"" << kPad << "\" y=\"20\">precision (red), recall (blue), global recall (green) vs k</text>\n";
  out << "</svg>\n";
}

int cmd_evaluate(const std::string& ranked_dir, const std::string& gt_dir, bool svg, const CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  auto frame_files = [](const fs::path& dir, const std::set<std::string>& exts) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || !exts.count(entry.path().extension().string())) continue;
      if (!out.emplace(entry.path().stem().string(), entry.path()).second) {
        throw UsageError("duplicate frame id " + entry.path().stem().string() + " in " + dir.string());
      }
    }
    return out;
  };
  const auto ranked_files = frame_files(ranked_dir, {".jsonl"});
  const auto truth_files = frame_files(gt_dir, {".png", ".jsonl"});
  for (const auto& [id, path] : ranked_files) {
    if (!truth_files.count(id)) throw UsageError("frame " + id + " has no ground truth in " + gt_dir);
  }
  for (const auto& [id, path] : truth_files) {
    if (!ranked_files.count(id)) throw UsageError("frame " + id + " has no ranked proposals in " + ranked_dir);
  }

  std::vector<std::string> ids;
  for (const auto& [id, path] : ranked_files) ids.push_back(id);
  std::vector<GroundTruthFrame> truth(ids.size());
  std::vector<FrameEval> evals(ids.size());
  parallel_for(static_cast<int>(ids.size()), opt.workers, [&](int i) {
    const std::string& id = ids[static_cast<size_t>(i)];
    const auto ranked = read_ranked(ranked_files.at(id));
    if (ranked.empty()) std::cerr << "warning: frame " << id << " has no ranked proposals\n";
    truth[static_cast<size_t>(i)] = load_ground_truth(truth_files.at(id), id);
    evals[static_cast<size_t>(i)] = evaluate_frame(ranked, truth[static_cast<size_t>(i)], config.eval.iou_min,
                                                   config.eval.k_max);
    if (evals[static_cast<size_t>(i)].empty_truth) {
      std::cerr << "warning: frame " << id << " has no ground-truth objects; recall set to 1\n";
    }
  });

  const fs::path out(opt.out);
  ensure_dir(out);
  nlohmann::json frames = nlohmann::json::object();
  for (size_t i = 0; i < ids.size(); ++i) {
    const EvalCurves c = frame_curves(evals[i], truth[i], config.eval.k_max);
    write_curves_csv(c, out / (ids[i] + "_curves.csv"));
    frames[ids[i]] = {{"auc_precision", c.auc_precision}, {"auc_recall", c.auc_recall}};
  }
  const EvalCurves all = aggregate(evals, truth, config.eval.k_max);
  write_curves_csv(all, out / "curves.csv");
  if (svg) write_svg(all, out / "curves.svg");
  nlohmann::json summary = {{"frames", ids.size()},
                            {"k_max", config.eval.k_max},
                            {"iou_min", config.eval.iou_min},
                            {"auc_precision", all.auc_precision},
                            {"auc_recall", all.auc_recall},
                            {"auc_global_recall", all.auc_global_recall},
                            {"per_frame", frames}};
  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
  std::cout << "evaluated " << ids.size() << " frame(s): AUC precision " << all.auc_precision << ", recall "
            << all.auc_recall << " -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_segment(const std::string& image_path, const CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const ImageRGB image = load_image(image_path);
  const LabelMap labels =
      slic_superpixels(image, config.superpixels.n_target, config.superpixels.compactness, config.sampler.seed);
  save_label_map(labels, opt.out);
  std::cout << labels.n_superpixels << " superpixels -> " << opt.out << "\n";
  return kExitOk;
}

int cmd_sample(const std::string& image_path, const std::string& labels_path, const CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const ImageRGB image = load_image(image_path);
  std::optional<LabelMap> given = optional_labels(labels_path, image);
  const LabelMap labels = given ? std::move(*given)
                                : slic_superpixels(image, config.superpixels.n_target,
                                                   config.superpixels.compactness, config.sampler.seed);
  const SuperpixelGraph graph = build_graph(labels);
  const auto features = superpixel_features(image, compute_feature_maps(image), labels);
  const DistanceTable distances = pairwise_distances(features, graph, config.sampler.weights);
  const auto samples = sample_posterior(features, distances, config.sampler);
  write_run_log(samples, opt.out);
  std::cout << samples.size() << " samples -> " << opt.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"ddCRP object proposals: superpixels, posterior sampling, Gestalt ranking, evaluation"};
  app.require_subcommand(1);
  CommonOptions opt;
  auto add_common = [&](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--config", opt.config_path, "JSON pipeline config (all keys required)");
    if (needs_seed) cmd->add_option("--seed", opt.seed, "overrides sampler.seed");
    cmd->add_option("--out", opt.out, "output path")->required();
  };

  std::string image, labels, proposals, manifest, gt_dir, ranked_dir;
  double ridge = 1e-3;
  bool svg = false;
  RankFlags rank_flags;

  auto* propose_cmd = app.add_subcommand("propose", "superpixels + ddCRP samples -> proposals.jsonl, labels.csv, run.log");
  propose_cmd->add_option("image", image, "PNG or PPM image")->required();
  propose_cmd->add_option("--labels", labels, "external label map (CSV or 16-bit PNG) instead of SLIC");
  add_common(propose_cmd, true);

  auto* rank_cmd = app.add_subcommand("rank", "score proposals with Gestalt measures");
  rank_cmd->add_option("proposals", proposals, "proposals JSON Lines")->required();
  rank_cmd->add_option("--labels", rank_flags.labels, "label map the proposals refer to")->required();
  rank_cmd->add_option("--image", rank_flags.image, "source image (dimension check)");
  rank_cmd->add_option("--model", rank_flags.model, "scoring model JSON (default: ranking.scorer)");
  rank_cmd->add_flag("--weighted,!--plain", rank_flags.weighted, "rank by P(o)s(o) instead of s(o)");
  rank_cmd->add_flag("--nms,!--no-nms", rank_flags.nms, "non-maxima suppression");
  rank_cmd->add_option("--top-k", rank_flags.top_k, "maximum proposals written");
  add_common(rank_cmd, false);

  auto* train_cmd = app.add_subcommand("train-scorer", "fit the scoring model on labeled frames");
  train_cmd->add_option("manifest", manifest, "lines of image,labels|-,ground_truth")->required();
  train_cmd->add_option("--gt-dir", gt_dir, "directory the ground-truth column is relative to")->required();
  train_cmd->add_option("--ridge", ridge, "ridge penalty")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--workers", opt.workers, "frames processed in parallel")->check(CLI::PositiveNumber);
  add_common(train_cmd, true);

  auto* eval_cmd = app.add_subcommand("evaluate", "precision/recall curves against ground truth");
  eval_cmd->add_option("ranked_dir", ranked_dir, "directory of <frame>.jsonl ranked files")->required();
  eval_cmd->add_option("--gt-dir", gt_dir, "directory of <frame>.png or <frame>.jsonl")->required();
  eval_cmd->add_flag("--svg", svg, "also write curves.svg");
  eval_cmd->add_option("--workers", opt.workers, "frames processed in parallel")->check(CLI::PositiveNumber);
  add_common(eval_cmd, false);

  auto* segment_cmd = app.add_subcommand("segment", "SLIC superpixels only");
  segment_cmd->add_option("image", image, "PNG or PPM image")->required();
  add_common(segment_cmd, true);

  auto* sample_cmd = app.add_subcommand("sample", "raw ddCRP samples as a run log");
  sample_cmd->add_option("image", image, "PNG or PPM image")->required();
  sample_cmd->add_option("--labels", labels, "external label map instead of SLIC");
  add_common(sample_cmd, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*propose_cmd) return cmd_propose(image, labels, opt);
    if (*rank_cmd) return cmd_rank(proposals, rank_flags, opt);
    if (*train_cmd) return cmd_train(manifest, gt_dir, ridge, opt);
    if (*eval_cmd) return cmd_evaluate(ranked_dir, gt_dir, svg, opt);
    if (*segment_cmd) return cmd_segment(image, opt);
    if (*sample_cmd) return cmd_sample(image, labels, opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ddcrp
