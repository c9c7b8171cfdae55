#include "blendforge/probes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "batch_util.hpp"
#include "blendforge/blending.hpp"
#include "blendforge/error.hpp"
#include "blendforge/parallel.hpp"
#include "blendforge/png_io.hpp"
#include "blendforge/version.hpp"
#include "json_util.hpp"

namespace blendforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> ProbeSpec::default_deltas() {
  std::vector<double> d;
  for (int i = 0; i <= 10; ++i) d.push_back(i / 10.0);
  return d;
}

void ProbeSpec::validate() const {
  if (deltas.empty()) throw Error(ErrorCode::InvalidParameter, "probe deltas are empty");
  std::set<long> percents;
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw Error(ErrorCode::InvalidParameter,
                  fmt::format("probe delta {} outside [0, 1]", d));
    }
    if (!percents.insert(std::lround(d * 100.0)).second) {
      throw Error(ErrorCode::InvalidParameter,
                  fmt::format("probe delta {} repeats a percentage", d));
    }
  }
  if (mask_mode == MaskMode::Soft && !(soft_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "soft mask sigma must be positive");
  }
}

Mask probe_mask(const LandmarkSet& landmarks, int width, int height, MaskMode mode,
                double soft_sigma) {
  Mask mask = rasterize_polygon(convex_hull(landmarks), width, height);
  if (mode == MaskMode::Soft) mask = soften_mask(mask, soft_sigma);
  return mask;
}

double matching_global_delta(const ImageBuffer& img, double target_mean) {
  // mean(clamp(g x)) is piecewise linear in the gain g: with the k smallest
  // samples unclamped it equals (g * S_k + (N - k)) / N. Solve each piece,
  // largest k first, and keep the one whose breakpoints bracket the gain.
  const auto samples = img.samples();
  double sum = 0.0, top = 0.0;
  for (double v : samples) {
    sum += v;
    top = std::max(top, v);
  }
  if (sum > 0.0) {
    const double gain = target_mean * static_cast<double>(samples.size()) / sum;
    if (top * gain < 1.0) return gain - 1.0;
  }
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + xs[i];
  if (prefix[n] <= 0.0) return 0.0;
  const double total = target_mean * static_cast<double>(n);
  if (total >= prefix[n] && total == prefix[n]) return 0.0;
  for (std::size_t k = n; k >= 1; --k) {
    if (prefix[k] <= 0.0) break;
    const double gain = (total - static_cast<double>(n - k)) / prefix[k];
    if (!(gain > 0.0)) continue;
    const bool below = xs[k - 1] * gain < 1.0;
    const bool above = k == n || xs[k] * gain >= 1.0;
    if (below && above) return std::max(gain - 1.0, -1.0);
  }
  // Unreachable target (above the fraction of non-zero samples): saturate.
  return xs[n - 1] > 0.0 ? 1.0 / xs[n - 1] - 1.0 + 1e-12 : 0.0;
}

ProbePair generate_probe_pair(const ImageBuffer& img, const Mask& mask, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("probe delta {} outside [0, 1]", delta));
  }
  ProbePair pair;
  pair.delta = delta;
  pair.fake = alpha_blend(adjust_brightness(img, delta), img, mask);
  if (pair.fake == img) {
    // Re-summing the mean can move the gain off 1 by an ulp, which shifts
    // off-grid samples across an 8-bit rounding boundary.
    pair.matched_real = img;
  } else {
    pair.global_delta = matching_global_delta(img, pair.fake.mean());
    pair.matched_real = adjust_brightness(img, pair.global_delta);
  }
  pair.region_fraction = mask.support_fraction();
  return pair;
}

ProbePair generate_probe_pair(const ImageBuffer& img, const LandmarkSet& landmarks,
                              double delta, MaskMode mode, double soft_sigma) {
  return generate_probe_pair(img, probe_mask(landmarks, img.width(), img.height(), mode,
                                             soft_sigma),
                             delta);
}

std::string probe_subset_name(double delta, MaskMode mode) {
  return fmt::format("delta_{}_{}", std::lround(delta * 100.0),
                     mode == MaskMode::Hard ? "hard" : "soft");
}

ProbeDatasetSummary generate_probe_dataset(const Manifest& input,
                                           const LandmarkIndex& landmarks,
                                           const ProbeSpec& spec, const fs::path& out_dir,
                                           const BatchOptions& options) {
  spec.validate();
  const std::string mode_name = spec.mask_mode == MaskMode::Hard ? "hard" : "soft";
  std::vector<std::string> names;
  for (double d : spec.deltas) {
    names.push_back(probe_subset_name(d, spec.mask_mode));
    fs::create_directories(out_dir / names.back() / "fakes");
    fs::create_directories(out_dir / names.back() / "reals");
  }
  fs::create_directories(out_dir / "masks");

  struct Outcome {
    std::optional<std::string> skip_reason;
    std::string name;
    std::vector<double> global_deltas;
    double region_fraction = 0.0;
  };
  std::vector<std::size_t> reals;
  for (std::size_t i = 0; i < input.records.size(); ++i) {
    if (input.records[i].label == Label::Real) reals.push_back(i);
  }
  std::vector<Outcome> outcomes(reals.size());

  parallel_for(reals.size(), options.threads, [&](std::size_t k) {
    const SampleRecord& rec = input.records[reals[k]];
    Outcome& out = outcomes[k];
    out.name = detail::sample_name(k, rec);
    const auto found = detail::find_landmarks(landmarks, rec);
    if (!found) {
      out.skip_reason = "missing landmarks";
      return;
    }
    const ImageBuffer frame = read_png(input.resolve(rec));
    try {
      const detail::PreparedFrame prepared = detail::prepare_frame(frame, *found, options);
      const Mask mask = probe_mask(prepared.landmarks, prepared.image.width(),
                                   prepared.image.height(), spec.mask_mode,
                                   spec.soft_sigma);
      write_mask_png(out_dir / "masks" / (out.name + ".png"), mask);
      out.region_fraction = mask.support_fraction();
      for (std::size_t d = 0; d < spec.deltas.size(); ++d) {
        const ProbePair pair = generate_probe_pair(prepared.image, mask, spec.deltas[d]);
        write_png(out_dir / names[d] / "fakes" / (out.name + ".png"), pair.fake);
        write_png(out_dir / names[d] / "reals" / (out.name + ".png"), pair.matched_real);
        out.global_deltas.push_back(pair.global_delta);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateGeometry) throw;
      out.skip_reason = fmt::format("degenerate geometry: {}", e.what());
    }
  });

  ProbeDatasetSummary summary;
  json skipped = json::array();
  for (std::size_t k = 0; k < reals.size(); ++k) {
    if (outcomes[k].skip_reason) {
      skipped.push_back({{"source_id", input.records[reals[k]].path},
                         {"reason", *outcomes[k].skip_reason}});
      ++summary.skipped;
    } else {
      ++summary.frames;
    }
  }

  json index_subsets = json::array();
  for (std::size_t d = 0; d < spec.deltas.size(); ++d) {
    ProbeSubset subset{names[d], spec.deltas[d], {}};
    Manifest& m = subset.manifest;
    m.root = out_dir / names[d];
    json matched = json::object();
    for (std::size_t k = 0; k < reals.size(); ++k) {
      const Outcome& out = outcomes[k];
      if (out.skip_reason) continue;
      const SampleRecord& rec = input.records[reals[k]];
      m.records.push_back({"fakes/" + out.name + ".png", Label::Fake,
                           "probe/" + rec.video_id, rec.frame_idx, "probe-" + mode_name,
                           spec.seed});
      m.records.push_back({"reals/" + out.name + ".png", Label::Real, rec.video_id,
                           rec.frame_idx, "matched-real", spec.seed});
      matched[out.name] = {{"global_delta", out.global_deltas[d]},
                           {"region_fraction", out.region_fraction}};
    }
    m.metadata = {{"generator", "blendforge"},
                  {"version", kVersion},
                  {"kind", "probe"},
                  {"delta", spec.deltas[d]},
                  {"mask_mode", mode_name},
                  {"seed", spec.seed},
                  {"crop", detail::crop_options_json(options)},
                  {"pairs", matched},
                  {"skipped", skipped}};
    if (spec.mask_mode == MaskMode::Soft) m.metadata["sigma"] = spec.soft_sigma;
    save_manifest(m.root / "manifest.json", m);
    index_subsets.push_back({{"name", names[d]},
                             {"delta", spec.deltas[d]},
                             {"manifest", names[d] + "/manifest.json"}});
    summary.subsets.push_back(std::move(subset));
  }

  json index = {{"generator", "blendforge"},
                {"version", kVersion},
                {"mask_mode", mode_name},
                {"seed", spec.seed},
                {"frames", summary.frames},
                {"subsets", index_subsets}};
  if (spec.mask_mode == MaskMode::Soft) index["sigma"] = spec.soft_sigma;
  detail::write_json_file(out_dir / "index.json", index);
  return summary;
}

}  // namespace blendforge
