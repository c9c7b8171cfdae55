#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blendforge/manifest.hpp"

namespace blendforge {

struct ScoredLabel {
  double score = 0.0;
  Label label = Label::Real;
};

/// Mann-Whitney AUROC by mid-rank sums: P(fake > real) + 0.5 P(tie).
/// Throws UndefinedMetric unless both classes are present.
double auroc(std::span<const ScoredLabel> samples);

using FrameKey = std::pair<std::string, int>;  // (video_id, frame_idx)

/// Per-frame detector outputs. CSV form: "video_id,frame_idx,score".
class ScoreTable {
 public:
  using Map = std::map<FrameKey, double>;

  void set(const std::string& video_id, int frame_idx, double score);
  const Map& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool operator==(const ScoreTable&) const = default;

 private:
  Map entries_;
};

/// Line-numbered schema errors. Values are written with 17 significant
/// digits so tables round-trip exactly.
ScoreTable load_score_table(const std::filesystem::path& path);
void save_score_table(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable parse_score_table(const std::string& text, const std::string& origin = {});
std::string format_score_table(const ScoreTable& table);

struct VideoScore {
  std::string video_id;
  double score = 0.0;
  Label label = Label::Real;
};

/// Frame scores of each manifest video, ordered by frame index, reduced with
/// score_video. Videos come out sorted by id. Throws ManifestIntegrity on mixed
/// labels within a video, Join when a manifest frame has no score.
std::vector<VideoScore> aggregate_video(const ScoreTable& table, const Manifest& manifest,
                                        std::size_t k = 32);

/// aggregate_video followed by auroc.
double video_auroc(const ScoreTable& table, const Manifest& manifest, std::size_t k = 32);

/// Unweighted per-key mean. Throws Join listing keys missing from any table.
ScoreTable ensemble_mean(std::span<const ScoreTable> tables);

/// Relabels extra's records as `assign`, prefixes their video ids with
/// "<prefix>/" and appends them to base. metadata["mix"] records the
/// configuration name.
Manifest mix_manifests(const Manifest& base, const Manifest& extra, Label assign,
                       const std::string& config_name, const std::string& prefix = "mix");

struct DatasetResult {
  std::string dataset;
  double auroc = 0.0;
};

struct Report {
  std::string csv;
  std::string markdown;
  double mean = 0.0;  // over non-excluded datasets, in [0, 1]
};

/// One column per dataset plus an unweighted "Mean" column, AUROC in percent
/// with one decimal. Excluded datasets are shown but left out of the mean.
Report render_report(const std::vector<DatasetResult>& results,
                     const std::set<std::string>& exclude = {});

/// One decimal percentage, e.g. 0.75 -> "75.0".
std::string format_percent(double fraction);

}  // namespace blendforge
