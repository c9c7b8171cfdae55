#include "blendforge/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "blendforge/error.hpp"
#include "blendforge/seam.hpp"

namespace blendforge {

namespace fs = std::filesystem;

double auroc(std::span<const ScoredLabel> samples) {
  std::vector<ScoredLabel> sorted(samples.begin(), samples.end());
  long long n_fake = 0;
  for (const ScoredLabel& s : sorted) {
    if (!std::isfinite(s.score)) {
      throw Error(ErrorCode::InvalidInput, "auroc scores must be finite");
    }
    if (s.label == Label::Fake) ++n_fake;
  }
  const long long n_real = static_cast<long long>(sorted.size()) - n_fake;
  if (n_fake == 0 || n_real == 0) {
    throw Error(ErrorCode::UndefinedMetric,
                fmt::format("auroc needs both classes, got {} fake and {} real", n_fake,
                            n_real));
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });

  // Twice the fake rank sum, with 1-based mid-ranks for ties, kept integral.
  long long twice_rank_sum = 0;
  for (std::size_t first = 0; first < sorted.size();) {
    std::size_t last = first;
    while (last + 1 < sorted.size() && sorted[last + 1].score == sorted[first].score) ++last;
    long long fakes = 0;
    for (std::size_t i = first; i <= last; ++i) fakes += sorted[i].label == Label::Fake;
    twice_rank_sum += fakes * static_cast<long long>(first + last + 2);
    first = last + 1;
  }
  const long long twice_u = twice_rank_sum - n_fake * (n_fake + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_fake * n_real);
}

void ScoreTable::set(const std::string& video_id, int frame_idx, double score) {
  if (!std::isfinite(score)) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("non-finite score for ({}, {})", video_id, frame_idx));
  }
  entries_[{video_id, frame_idx}] = score;
}

std::string format_score_table(const ScoreTable& table) {
  std::string out = "video_id,frame_idx,score\n";
  for (const auto& [key, score] : table.entries()) {
    out += fmt::format("{},{},{:.17g}\n", key.first, key.second, score);
  }
  return out;
}

ScoreTable parse_score_table(const std::string& text, const std::string& origin) {
  auto fail = [&](int line, const std::string& what) {
    return LocatedError(ErrorCode::Schema, fmt::format("{}:{}: {}", origin, line, what),
                        origin, line);
  };
  std::istringstream in(text);
  std::string row;
  int line = 0;
  bool header_seen = false;
  ScoreTable table;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "video_id,frame_idx,score") {
        throw fail(line, "expected header \"video_id,frame_idx,score\"");
      }
      header_seen = true;
      continue;
    }
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string::npos || row.find(',', c2 + 1) != std::string::npos) {
      throw fail(line, "expected 3 comma-separated fields");
    }
    const std::string video = row.substr(0, c1);
    const std::string frame_text = row.substr(c1 + 1, c2 - c1 - 1);
    const std::string score_text = row.substr(c2 + 1);
    if (video.empty()) throw fail(line, "empty video_id");
    int frame = 0;
    const auto [fp, fec] =
        std::from_chars(frame_text.data(), frame_text.data() + frame_text.size(), frame);
    if (fec != std::errc() || fp != frame_text.data() + frame_text.size() || frame < 0) {
      throw fail(line, fmt::format("invalid frame_idx \"{}\"", frame_text));
    }
    double score = 0.0;
    std::size_t used = 0;
    try {
      score = std::stod(score_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != score_text.size() || !std::isfinite(score)) {
      throw fail(line, fmt::format("invalid score \"{}\"", score_text));
    }
    if (table.entries().count({video, frame})) {
      throw fail(line, fmt::format("duplicate key ({}, {})", video, frame));
    }
    table.set(video, frame, score);
  }
  if (!header_seen) throw fail(std::max(line, 1), "missing header");
  return table;
}

ScoreTable load_score_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot open {}", path.string()),
                       path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_score_table(buffer.str(), path.string());
}

void save_score_table(const fs::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << format_score_table(table);
  if (!out) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot write {}", path.string()),
                       path.string());
  }
}

std::vector<VideoScore> aggregate_video(const ScoreTable& table, const Manifest& manifest,
                                        std::size_t k) {
  struct Video {
    Label label;
    std::vector<std::pair<int, double>> frames;
    bool has_frames = false;
  };
  std::map<std::string, Video> videos;
  std::size_t joined = 0;
  for (const SampleRecord& r : manifest.records) {
    auto [it, inserted] = videos.try_emplace(r.video_id, Video{r.label, {}});
    if (!inserted && it->second.label != r.label) {
      throw Error(ErrorCode::ManifestIntegrity,
                  fmt::format("video {} mixes real and fake labels", r.video_id));
    }
    const auto score = table.entries().find({r.video_id, r.frame_idx});
    if (score != table.entries().end()) {
      it->second.frames.emplace_back(r.frame_idx, score->second);
      ++joined;
    }
  }
  if (joined != table.size()) {
    std::string missing;
    int listed = 0;
    for (const auto& [key, value] : table.entries()) {
      const bool known = std::any_of(
          manifest.records.begin(), manifest.records.end(), [&](const SampleRecord& r) {
            return r.video_id == key.first && r.frame_idx == key.second;
          });
      if (!known && listed++ < 5) missing += fmt::format(" ({}, {})", key.first, key.second);
    }
    throw Error(ErrorCode::Join,
                fmt::format("{} scored frames are not in the manifest:{}",
                            table.size() - joined, missing));
  }

  std::vector<VideoScore> out;
  for (auto& [id, video] : videos) {
    if (video.frames.empty()) {
      throw Error(ErrorCode::Join, fmt::format("video {} has no scored frames", id));
    }
    std::sort(video.frames.begin(), video.frames.end());
    std::vector<double> scores;
    for (const auto& f : video.frames) scores.push_back(f.second);
    out.push_back({id, score_video(scores, k), video.label});
  }
  return out;
}

double video_auroc(const ScoreTable& table, const Manifest& manifest, std::size_t k) {
  const auto videos = aggregate_video(table, manifest, k);
  std::vector<ScoredLabel> samples;
  for (const VideoScore& v : videos) samples.push_back({v.score, v.label});
  return auroc(samples);
}

ScoreTable ensemble_mean(std::span<const ScoreTable> tables) {
  if (tables.empty()) throw Error(ErrorCode::InvalidInput, "ensemble needs at least one table");
  const auto& reference = tables.front().entries();
  for (std::size_t t = 1; t < tables.size(); ++t) {
    const auto& other = tables[t].entries();
    std::vector<FrameKey> missing;
    for (const auto& [key, v] : reference) {
      if (!other.count(key)) missing.push_back(key);
    }
    for (const auto& [key, v] : other) {
      if (!reference.count(key)) missing.push_back(key);
    }
    if (!missing.empty()) {
      std::string listed;
      for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
        listed += fmt::format(" ({}, {})", missing[i].first, missing[i].second);
      }
      throw Error(ErrorCode::Join,
                  fmt::format("table {} differs from table 0 in {} keys:{}", t,
                              missing.size(), listed));
    }
  }
  ScoreTable out;
  for (const auto& [key, v] : reference) {
    double acc = 0.0;
    bool uniform = true;
    for (const ScoreTable& t : tables) {
      const double x = t.entries().at(key);
      acc += x;
      uniform &= x == v;
    }
    // k * v / k can round away from v; agreeing members average to v itself.
    out.set(key.first, key.second, uniform ? v : acc / static_cast<double>(tables.size()));
  }
  return out;
}

Manifest mix_manifests(const Manifest& base, const Manifest& extra, Label assign,
                       const std::string& config_name, const std::string& prefix) {
  if (extra.records.empty()) return base;
  Manifest out = base;
  const Manifest moved =
      extra.root == base.root ? extra : rebase_manifest(extra, base.root);
  std::set<FrameKey> keys;
  for (const SampleRecord& r : base.records) keys.emplace(r.video_id, r.frame_idx);
  for (SampleRecord r : moved.records) {
    r.video_id = prefix + "/" + r.video_id;
    r.label = assign;
    if (!keys.emplace(r.video_id, r.frame_idx).second) {
      throw Error(ErrorCode::ManifestIntegrity,
                  fmt::format("mixed manifest key collision at ({}, {})", r.video_id,
                              r.frame_idx));
    }
    out.records.push_back(std::move(r));
  }
  out.metadata["mix"] = {{"config", config_name},
                         {"assign", label_name(assign)},
                         {"prefix", prefix},
                         {"extra_records", extra.records.size()},
                         {"extra_metadata", extra.metadata}};
  return out;
}

std::string format_percent(double fraction) {
  return fmt::format("{:.1f}", 100.0 * fraction);
}

Report render_report(const std::vector<DatasetResult>& results,
                     const std::set<std::string>& exclude) {
  if (results.empty()) throw Error(ErrorCode::InvalidInput, "report needs at least one result");
  double acc = 0.0;
  int counted = 0;
  for (const DatasetResult& r : results) {
    if (exclude.count(r.dataset)) continue;
    acc += r.auroc;
    ++counted;
  }
  if (counted == 0) {
    throw Error(ErrorCode::InvalidInput, "every dataset is excluded from the mean");
  }
  Report report;
  report.mean = acc / counted;

  std::string header, values, md_header, md_rule, md_values;
  for (const DatasetResult& r : results) {
    header += r.dataset + ",";
    values += format_percent(r.auroc) + ",";
    md_header += " " + r.dataset + " |";
    md_rule += "---|";
    md_values += exclude.count(r.dataset) ? " (" + format_percent(r.auroc) + ") |"
                                          : " " + format_percent(r.auroc) + " |";
  }
  report.csv = header + "Mean\n" + values + format_percent(report.mean) + "\n";
  report.markdown = "|" + md_header + " Mean |\n|" + md_rule + "---|\n|" + md_values +
                    " " + format_percent(report.mean) + " |\n";
  if (!exclude.empty()) {
    report.markdown += "\nValues in parentheses are excluded from the mean.\n";
  }
  return report;
}

}  // namespace blendforge
