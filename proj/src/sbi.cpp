#include "blendforge/sbi.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "batch_util.hpp"
#include "blendforge/blending.hpp"
#include "blendforge/error.hpp"
#include "blendforge/parallel.hpp"
#include "blendforge/png_io.hpp"
#include "blendforge/rng.hpp"
#include "blendforge/version.hpp"
#include "json_util.hpp"

namespace blendforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("SBI range {} = [{}, {}] is empty", name, r.lo, r.hi));
  }
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error(ErrorCode::Schema, fmt::format("SBI param \"{}\" must be [lo, hi]", key));
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

json jitter_json(const ColorJitter& j) {
  return {{"brightness_delta", j.brightness_delta},
          {"contrast_delta", j.contrast_delta},
          {"hue_shift", j.hue_shift},
          {"saturation_delta", j.saturation_delta}};
}

ColorJitter jitter_from(const json& j, ColorJitter fallback) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "jitter must be an object");
  ColorJitter out = fallback;
  out.brightness_delta = j.value("brightness_delta", out.brightness_delta);
  out.contrast_delta = j.value("contrast_delta", out.contrast_delta);
  out.hue_shift = j.value("hue_shift", out.hue_shift);
  out.saturation_delta = j.value("saturation_delta", out.saturation_delta);
  return out;
}

}  // namespace

void SbiParams::validate() const {
  ColorJitter bounds = jitter_bounds;
  bounds.validate();
  if (bounds.brightness_delta < 0 || bounds.contrast_delta < 0 || bounds.hue_shift < 0 ||
      bounds.saturation_delta < 0) {
    throw Error(ErrorCode::InvalidParameter, "jitter bounds must be non-negative");
  }
  check_range(resize_frac, "resize_frac");
  check_range(translate_px, "translate_px");
  check_range(deform_amplitude, "deform_amplitude");
  check_range(mask_blur_sigma, "mask_blur_sigma");
  if (resize_frac.lo <= 0.0) {
    throw Error(ErrorCode::InvalidParameter, "resize_frac must be positive");
  }
  if (deform_amplitude.lo < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "deform_amplitude must be >= 0");
  }
  if (mask_blur_sigma.lo < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "mask_blur_sigma must be >= 0");
  }
  if (!(deform_field_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "deform_field_sigma must be positive");
  }
  if (blend_ratios.empty()) {
    throw Error(ErrorCode::InvalidParameter, "blend_ratios must not be empty");
  }
  for (double r : blend_ratios) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw Error(ErrorCode::InvalidParameter,
                  fmt::format("blend ratio {} outside (0, 1]", r));
    }
  }
}

json SbiParams::to_json() const {
  return {{"jitter_bounds", jitter_json(jitter_bounds)},
          {"resize_frac", range_json(resize_frac)},
          {"translate_px", range_json(translate_px)},
          {"deform_amplitude", range_json(deform_amplitude)},
          {"deform_field_sigma", deform_field_sigma},
          {"mask_blur_sigma", range_json(mask_blur_sigma)},
          {"blend_ratios", blend_ratios}};
}

SbiParams SbiParams::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "SBI params must be an object");
  SbiParams p;
  try {
    if (doc.contains("jitter_bounds")) {
      p.jitter_bounds = jitter_from(doc["jitter_bounds"], p.jitter_bounds);
    }
    p.resize_frac = range_from(doc, "resize_frac", p.resize_frac);
    p.translate_px = range_from(doc, "translate_px", p.translate_px);
    p.deform_amplitude = range_from(doc, "deform_amplitude", p.deform_amplitude);
    p.mask_blur_sigma = range_from(doc, "mask_blur_sigma", p.mask_blur_sigma);
    p.deform_field_sigma = doc.value("deform_field_sigma", p.deform_field_sigma);
    if (doc.contains("blend_ratios")) {
      p.blend_ratios = doc["blend_ratios"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, fmt::format("invalid SBI params: {}", e.what()));
  }
  p.validate();
  return p;
}

json SbiDraw::to_json() const {
  return {{"seed", seed},
          {"jitter_source", jitter_source},
          {"jitter", jitter_json(jitter)},
          {"resize_frac", resize_frac},
          {"translate_x", translate_x},
          {"translate_y", translate_y},
          {"deform_amplitude", deform_amplitude},
          {"deform_field_sigma", deform_field_sigma},
          {"deform_seed", deform_seed},
          {"mask_blur_sigma", mask_blur_sigma},
          {"blend_ratio", blend_ratio}};
}

SbiDraw SbiDraw::from_json(const json& doc) {
  try {
    SbiDraw d;
    d.seed = doc.at("seed").get<std::uint64_t>();
    d.jitter_source = doc.at("jitter_source").get<bool>();
    d.jitter = jitter_from(doc.at("jitter"), {});
    d.resize_frac = doc.at("resize_frac").get<double>();
    d.translate_x = doc.at("translate_x").get<double>();
    d.translate_y = doc.at("translate_y").get<double>();
    d.deform_amplitude = doc.at("deform_amplitude").get<double>();
    d.deform_field_sigma = doc.at("deform_field_sigma").get<double>();
    d.deform_seed = doc.at("deform_seed").get<std::uint64_t>();
    d.mask_blur_sigma = doc.at("mask_blur_sigma").get<double>();
    d.blend_ratio = doc.at("blend_ratio").get<double>();
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, fmt::format("invalid SBI param record: {}", e.what()));
  }
}

SbiDraw SbiDraw::identity() { return SbiDraw{}; }

SbiDraw sample_sbi_draw(const SbiParams& params, std::uint64_t seed) {
  params.validate();
  SplitMix64 rng(seed);
  SbiDraw d;
  d.seed = seed;
  d.jitter_source = rng.coin();
  const ColorJitter& b = params.jitter_bounds;
  d.jitter.brightness_delta = rng.uniform(-b.brightness_delta, b.brightness_delta);
  d.jitter.contrast_delta = rng.uniform(-b.contrast_delta, b.contrast_delta);
  d.jitter.hue_shift = rng.uniform(-b.hue_shift, b.hue_shift);
  d.jitter.saturation_delta = rng.uniform(-b.saturation_delta, b.saturation_delta);
  d.resize_frac = rng.uniform(params.resize_frac.lo, params.resize_frac.hi);
  d.translate_x = rng.uniform(params.translate_px.lo, params.translate_px.hi);
  d.translate_y = rng.uniform(params.translate_px.lo, params.translate_px.hi);
  d.deform_amplitude = rng.uniform(params.deform_amplitude.lo, params.deform_amplitude.hi);
  d.deform_field_sigma = params.deform_field_sigma;
  d.deform_seed = rng.next();
  d.mask_blur_sigma = rng.uniform(params.mask_blur_sigma.lo, params.mask_blur_sigma.hi);
  d.blend_ratio = params.blend_ratios[rng.below(params.blend_ratios.size())];
  return d;
}

ImageBuffer warp_scale_translate(const ImageBuffer& img, double frac, double tx,
                                 double ty) {
  if (!(frac > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "resize fraction must be positive");
  }
  if (frac == 1.0 && tx == 0.0 && ty == 0.0) return img;
  const double cx = 0.5 * img.width();
  const double cy = 0.5 * img.height();
  std::array<Plane, 3> planes;
  for (int c = 0; c < 3; ++c) {
    const Plane src = img.plane(c);
    Plane out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
      const double sy = (y + 0.5 - cy - ty) / frac + cy - 0.5;
      for (int x = 0; x < img.width(); ++x) {
        const double sx = (x + 0.5 - cx - tx) / frac + cx - 0.5;
        out(x, y) = sample_bilinear(src, sx, sy);
      }
    }
    planes[c] = std::move(out);
  }
  return ImageBuffer::from_planes(planes);
}

SbiSample render_sbi(const ImageBuffer& real, const LandmarkSet& landmarks,
                     const SbiDraw& draw) {
  ImageBuffer source = real;
  ImageBuffer target = real;
  if (!draw.jitter.is_identity()) {
    if (draw.jitter_source) {
      source = apply_color_jitter(source, draw.jitter);
    } else {
      target = apply_color_jitter(target, draw.jitter);
    }
  }
  source = warp_scale_translate(source, draw.resize_frac, draw.translate_x,
                                draw.translate_y);

  Mask mask = rasterize_polygon(convex_hull(landmarks), real.width(), real.height());
  mask = elastic_deform_mask(mask, draw.deform_seed,
                             {draw.deform_amplitude, draw.deform_field_sigma});
  if (draw.mask_blur_sigma > 0.0) mask = soften_mask(mask, draw.mask_blur_sigma);
  if (!(draw.blend_ratio > 0.0 && draw.blend_ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "blend ratio outside (0, 1]");
  }
  if (draw.blend_ratio != 1.0) mask = mask.scaled(draw.blend_ratio);

  SbiSample sample;
  sample.image = alpha_blend(source, target, mask);
  sample.mask_used = std::move(mask);
  sample.param_record = draw;
  sample.source_id = landmarks.image_ref;
  return sample;
}

SbiSample generate_sbi(const ImageBuffer& real, const LandmarkSet& landmarks,
                       const SbiParams& params, std::uint64_t seed) {
  return render_sbi(real, landmarks, sample_sbi_draw(params, seed));
}

SbiBatchSummary generate_sbi_batch(const Manifest& input, const LandmarkIndex& landmarks,
                                   const SbiParams& params, std::uint64_t base_seed,
                                   const fs::path& out_dir, const BatchOptions& options) {
  params.validate();
  for (const char* sub : {"reals", "fakes", "masks", "params"}) {
    fs::create_directories(out_dir / sub);
  }

  struct Outcome {
    std::optional<std::string> skip_reason;
    std::string name;
    std::uint64_t seed = 0;
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
      out.seed = derive_seed(base_seed, rec.path);
      const SbiSample sample =
          generate_sbi(prepared.image, prepared.landmarks, params, out.seed);
      write_png(out_dir / "reals" / (out.name + ".png"), prepared.image);
      write_png(out_dir / "fakes" / (out.name + ".png"), sample.image);
      write_mask_png(out_dir / "masks" / (out.name + ".png"), sample.mask_used);
      json sidecar = {{"source_id", rec.path},
                      {"video_id", rec.video_id},
                      {"frame_idx", rec.frame_idx},
                      {"base_seed", base_seed},
                      {"draw", sample.param_record.to_json()},
                      {"crop", prepared.crop_json}};
      detail::write_json_file(out_dir / "params" / (out.name + ".json"), sidecar);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateGeometry) throw;
      out.skip_reason = fmt::format("degenerate geometry: {}", e.what());
    }
  });

  SbiBatchSummary summary;
  Manifest& m = summary.manifest;
  m.root = out_dir;
  json skipped = json::array();
  for (std::size_t k = 0; k < reals.size(); ++k) {
    const SampleRecord& rec = input.records[reals[k]];
    const Outcome& out = outcomes[k];
    if (out.skip_reason) {
      skipped.push_back({{"source_id", rec.path}, {"reason", *out.skip_reason}});
      ++summary.skipped;
      continue;
    }
    m.records.push_back({"reals/" + out.name + ".png", Label::Real, rec.video_id,
                         rec.frame_idx, "real", std::nullopt});
    m.records.push_back({"fakes/" + out.name + ".png", Label::Fake, "sbi/" + rec.video_id,
                         rec.frame_idx, "sbi", out.seed});
    ++summary.generated;
  }
  m.metadata = {{"generator", "blendforge"},
                {"version", kVersion},
                {"kind", "sbi"},
                {"base_seed", base_seed},
                {"params", params.to_json()},
                {"crop", detail::crop_options_json(options)},
                {"generated", summary.generated},
                {"skipped", skipped}};
  save_manifest(out_dir / "manifest.json", m);
  return summary;
}

}  // namespace blendforge
