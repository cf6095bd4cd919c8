#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ddcrp/eval.hpp"
#include "ddcrp/rank.hpp"
#include "ddcrp/sampler.hpp"

namespace ddcrp {

// Proposals: one JSON object per line with superpixel_ids, occurrences,
// likelihood, pixel_area. Ranked proposals add measures, score,
// weighted_score and bbox.
void write_proposals(const std::vector<Proposal>& proposals, const std::filesystem::path& path);
std::vector<Proposal> read_proposals(const std::filesystem::path& path);

void write_ranked(const std::vector<RankedProposal>& ranked, const std::filesystem::path& path);
std::vector<RankedProposal> read_ranked(const std::filesystem::path& path);

void write_model(const ScoringModel& model, const std::filesystem::path& path);
ScoringModel read_model(const std::filesystem::path& path);

/// One line per sample: "sweep <index> K <tables> links <c_0> ... <c_N-1>".
void write_run_log(const std::vector<SegmentationSample>& samples, std::ostream& out);
void write_run_log(const std::vector<SegmentationSample>& samples, const std::filesystem::path& path);

/// Curves as CSV rows "k,precision,recall,global_recall".
void write_curves_csv(const EvalCurves& curves, const std::filesystem::path& path);

}  // namespace ddcrp
