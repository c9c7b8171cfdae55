#include "cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "blendforge/error.hpp"
#include "blendforge/eval.hpp"
#include "blendforge/geometry.hpp"
#include "blendforge/parallel.hpp"
#include "blendforge/png_io.hpp"
#include "blendforge/probes.hpp"
#include "blendforge/sbi.hpp"
#include "blendforge/seam.hpp"
#include "blendforge/version.hpp"

namespace blendforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string manifest;
  std::string landmarks;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string params;
  int threads = 0;
  bool overwrite = false;
  bool no_crop = false;
  double margin = 1.3;
  int size = 224;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BLENDFORGE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(fmt::format("BLENDFORGE_SEED is not an unsigned integer: {}", env));
  }
  return 0;
}

// Output directories start empty; --overwrite clears an existing one.
void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw LocatedError(ErrorCode::InvalidInput,
                         fmt::format("output path is not a directory: {}", dir.string()),
                         dir.string());
    }
    if (!fs::is_empty(dir)) {
      if (!overwrite) {
        throw LocatedError(
            ErrorCode::InvalidInput,
            fmt::format("output directory is not empty (pass --overwrite): {}", dir.string()),
            dir.string());
      }
      const fs::path canonical = fs::weakly_canonical(fs::absolute(dir));
      if (canonical == canonical.root_path()) {
        throw LocatedError(ErrorCode::InvalidInput, "refusing to clear a filesystem root",
                           dir.string());
      }
      fs::remove_all(dir);
    }
  }
  fs::create_directories(dir);
}

void prepare_output_file(const fs::path& file, bool overwrite) {
  if (fs::exists(file) && !overwrite) {
    throw LocatedError(ErrorCode::InvalidInput,
                       fmt::format("output file exists (pass --overwrite): {}", file.string()),
                       file.string());
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

BatchOptions batch_options(const CommonOptions& o) {
  BatchOptions b;
  b.threads = o.threads;
  b.crop = !o.no_crop;
  b.crop_margin = o.margin;
  b.crop_size = o.size;
  return b;
}

void add_generation_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--manifest", o.manifest, "Input manifest of real frames")->required();
  cmd->add_option("--landmarks", o.landmarks, "Landmark JSON keyed by frame file name")
      ->required();
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--seed", o.seed, "Base seed (overrides BLENDFORGE_SEED)");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = logical cores)");
  cmd->add_flag("--overwrite", o.overwrite, "Clear a non-empty output directory");
  cmd->add_flag("--no-crop", o.no_crop, "Frames are already face crops");
  cmd->add_option("--margin", o.margin, "Face box enlargement factor");
  cmd->add_option("--size", o.size, "Crop side length in pixels");
}

int cmd_gen_sbi(const CommonOptions& o, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(o.seed);
  SbiParams params;
  if (!o.params.empty()) {
    std::ifstream in(o.params);
    if (!in) {
      throw LocatedError(ErrorCode::Io, fmt::format("cannot open {}", o.params), o.params);
    }
    params = SbiParams::from_json(json::parse(in));
  }
  const LandmarkIndex landmarks = load_landmarks(o.landmarks);
  const Manifest input = load_manifest(o.manifest);
  input.validate_files();
  prepare_output_dir(o.out, o.overwrite);
  const SbiBatchSummary summary =
      generate_sbi_batch(input, landmarks, params, seed, o.out, batch_options(o));
  out << fmt::format("gen-sbi: {} real, {} fake, {} skipped -> {}\n", summary.generated,
                     summary.generated, summary.skipped,
                     (fs::path(o.out) / "manifest.json").string());
  return 0;
}

std::vector<double> parse_deltas(const std::string& text) {
  std::vector<double> deltas;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      deltas.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--deltas: not a number: \"{}\"", item));
    }
  }
  return deltas;
}

int cmd_gen_probes(const CommonOptions& o, const std::string& deltas,
                   const std::string& mask, double sigma, std::ostream& out) {
  ProbeSpec spec;
  spec.seed = resolve_seed(o.seed);
  if (!deltas.empty()) spec.deltas = parse_deltas(deltas);
  spec.mask_mode = mask == "soft" ? MaskMode::Soft : MaskMode::Hard;
  spec.soft_sigma = sigma;
  spec.validate();
  const LandmarkIndex landmarks = load_landmarks(o.landmarks);
  const Manifest input = load_manifest(o.manifest);
  input.validate_files();
  prepare_output_dir(o.out, o.overwrite);
  const ProbeDatasetSummary summary =
      generate_probe_dataset(input, landmarks, spec, o.out, batch_options(o));
  out << fmt::format("gen-probes: {} datasets x {} frames, {} skipped -> {}\n",
                     summary.subsets.size(), summary.frames, summary.skipped, o.out);
  return 0;
}

int cmd_score(const std::string& manifest_path, const std::string& out_path,
              const SeamDetectorConfig& config, int threads, bool overwrite,
              std::ostream& out) {
  const Manifest manifest = load_manifest(manifest_path);
  manifest.validate_files();
  prepare_output_file(out_path, overwrite);
  std::vector<double> scores(manifest.records.size());
  parallel_for(manifest.records.size(), threads, [&](std::size_t i) {
    scores[i] = score_frame(read_png(manifest.resolve(manifest.records[i])), config).value;
  });
  ScoreTable table;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    table.set(manifest.records[i].video_id, manifest.records[i].frame_idx, scores[i]);
  }
  save_score_table(out_path, table);
  out << fmt::format("score: {} frames -> {}\n", table.size(), out_path);
  return 0;
}

std::string default_dataset_name(const std::string& manifest_path) {
  const fs::path p = fs::absolute(manifest_path);
  const std::string dir = p.parent_path().filename().string();
  return dir.empty() ? p.stem().string() : dir;
}

int cmd_auroc(const std::vector<std::string>& manifests,
              const std::vector<std::string>& score_files, std::vector<std::string> names,
              std::size_t k, const std::string& out_path, bool overwrite,
              std::ostream& out) {
  if (manifests.size() != score_files.size()) {
    throw UsageError("--manifest and --scores must be given the same number of times");
  }
  if (!names.empty() && names.size() != manifests.size()) {
    throw UsageError("--name must be given once per --manifest, or not at all");
  }
  if (names.empty()) {
    for (const auto& m : manifests) names.push_back(default_dataset_name(m));
  }
  std::vector<DatasetResult> results;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const Manifest manifest = load_manifest(manifests[i]);
    manifest.check_keys();
    const ScoreTable table = load_score_table(score_files[i]);
    results.push_back({names[i], video_auroc(table, manifest, k)});
  }
  json doc = {{"k", k}, {"datasets", json::array()}};
  double acc = 0.0;
  for (const DatasetResult& r : results) {
    out << fmt::format("{}: {}\n", r.dataset, format_percent(r.auroc));
    doc["datasets"].push_back({{"dataset", r.dataset}, {"auroc", r.auroc}});
    acc += r.auroc;
  }
  const double mean = acc / static_cast<double>(results.size());
  doc["mean"] = mean;
  if (!out_path.empty()) {
    prepare_output_file(out_path, overwrite);
    std::ofstream(out_path) << doc.dump(2) << '\n';
  }
  out << fmt::format("mean: {}\n", format_percent(mean));
  return 0;
}

int cmd_ensemble(const std::vector<std::string>& score_files, const std::string& out_path,
                 bool overwrite, std::ostream& out) {
  std::vector<ScoreTable> tables;
  for (const auto& f : score_files) tables.push_back(load_score_table(f));
  const ScoreTable merged = ensemble_mean(tables);
  prepare_output_file(out_path, overwrite);
  save_score_table(out_path, merged);
  out << fmt::format("ensemble: {} tables, {} frames -> {}\n", tables.size(), merged.size(),
                     out_path);
  return 0;
}

int cmd_mix(const std::string& base_path, const std::string& extra_path,
            const std::string& assign_text, std::string name, const std::string& prefix,
            const std::string& out_path, bool overwrite, std::ostream& out) {
  const auto assign = parse_label(assign_text);
  if (!assign) throw UsageError("--assign must be real or fake");
  const Manifest base = load_manifest(base_path);
  const Manifest extra = load_manifest(extra_path);
  if (name.empty()) {
    name = fmt::format("{}+{}={}", default_dataset_name(base_path),
                       default_dataset_name(extra_path), *assign == Label::Real ? "R" : "F");
  }
  prepare_output_file(out_path, overwrite);
  const fs::path out_root = fs::path(out_path).parent_path();
  const Manifest base_moved = rebase_manifest(base, out_root.empty() ? "." : out_root);
  const Manifest mixed = mix_manifests(base_moved, extra, *assign, name, prefix);
  save_manifest(out_path, mixed);
  out << fmt::format("mix-manifest: {} real, {} fake ({}) -> {}\n", mixed.count(Label::Real),
                     mixed.count(Label::Fake), name, out_path);
  return 0;
}

std::vector<DatasetResult> load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LocatedError(ErrorCode::Io, fmt::format("cannot open {}", path), path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorCode::Schema, fmt::format("{}: invalid JSON: {}", path, e.what()),
                       path);
  }
  if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_array()) {
    throw LocatedError(ErrorCode::Schema,
                       fmt::format("{}: expected a \"datasets\" array", path), path);
  }
  std::vector<DatasetResult> results;
  for (const auto& d : doc["datasets"]) {
    if (!d.is_object() || !d.contains("dataset") || !d["dataset"].is_string() ||
        !d.contains("auroc") || !d["auroc"].is_number()) {
      throw LocatedError(ErrorCode::Schema,
                         fmt::format("{}: entries need \"dataset\" and \"auroc\"", path),
                         path);
    }
    results.push_back({d["dataset"].get<std::string>(), d["auroc"].get<double>()});
  }
  return results;
}

int cmd_report(const std::vector<std::string>& result_files,
               const std::vector<std::string>& inline_results,
               const std::vector<std::string>& exclude, const std::string& out_dir,
               bool overwrite, std::ostream& out) {
  std::vector<DatasetResult> results;
  for (const auto& f : result_files) {
    const auto loaded = load_results(f);
    results.insert(results.end(), loaded.begin(), loaded.end());
  }
  for (const auto& item : inline_results) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError(fmt::format("--auroc expects name=value, got \"{}\"", item));
    }
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      results.push_back({item.substr(0, eq), v});
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--auroc value is not a number in \"{}\"", item));
    }
  }
  const Report report =
      render_report(results, std::set<std::string>(exclude.begin(), exclude.end()));
  const fs::path dir(out_dir);
  if (fs::exists(dir / "report.csv") || fs::exists(dir / "report.md")) {
    if (!overwrite) {
      throw LocatedError(ErrorCode::InvalidInput,
                         fmt::format("report exists in {} (pass --overwrite)", out_dir),
                         out_dir);
    }
  }
  fs::create_directories(dir);
  std::ofstream(dir / "report.csv", std::ios::binary) << report.csv;
  std::ofstream(dir / "report.md", std::ios::binary) << report.markdown;
  out << report.markdown;
  return 0;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message,
                 const std::string& path = {}, int line = 0) {
  json e = {{"error", code}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  if (line > 0) e["line"] = line;
  err << e.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blending-artifact dataset synthesis and detector evaluation", "blendforge"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions sbi_opts;
  auto* gen_sbi = app.add_subcommand("gen-sbi", "Generate self-blended pseudo-fakes");
  add_generation_options(gen_sbi, sbi_opts);
  gen_sbi->add_option("--params", sbi_opts.params, "SBI parameter JSON");

  CommonOptions probe_opts;
  std::string deltas;
  std::string mask = "hard";
  double sigma = ProbeSpec::kDefaultSoftSigma;
  auto* gen_probes = app.add_subcommand("gen-probes", "Generate Real-on-Real probe datasets");
  add_generation_options(gen_probes, probe_opts);
  gen_probes->add_option("--deltas", deltas, "Comma-separated brightness deltas in [0, 1]");
  gen_probes->add_option("--mask", mask, "Compositing mask")
      ->check(CLI::IsMember({"hard", "soft"}));
  gen_probes->add_option("--sigma", sigma, "Soft-mask blur sigma");

  std::string score_manifest, score_out;
  SeamDetectorConfig seam_config;
  int score_threads = 0;
  bool score_overwrite = false;
  auto* score = app.add_subcommand("score", "Score frames with the seam detector");
  score->add_option("--manifest", score_manifest, "Manifest to score")->required();
  score->add_option("--out", score_out, "Output score CSV")->required();
  score->add_option("--residual-sigma", seam_config.residual_sigma, "High-pass blur sigma");
  score->add_option("--percentile", seam_config.percentile, "High energy percentile");
  score->add_option("--threads", score_threads, "Worker threads (0 = logical cores)");
  score->add_flag("--overwrite", score_overwrite, "Replace an existing output file");

  std::vector<std::string> auroc_manifests, auroc_scores, auroc_names;
  std::size_t auroc_k = 32;
  std::string auroc_out;
  bool auroc_overwrite = false;
  auto* auroc_cmd = app.add_subcommand("auroc", "Video-level AUROC per dataset");
  auroc_cmd->add_option("--manifest", auroc_manifests, "Dataset manifest (repeatable)")
      ->required();
  auroc_cmd->add_option("--scores", auroc_scores, "Score CSV, one per --manifest")
      ->required();
  auroc_cmd->add_option("--name", auroc_names, "Dataset name, one per --manifest");
  auroc_cmd->add_option("--frames", auroc_k, "Evenly sampled frames per video")
      ->check(CLI::PositiveNumber);
  auroc_cmd->add_option("--out", auroc_out, "Write results JSON for the report command");
  auroc_cmd->add_flag("--overwrite", auroc_overwrite, "Replace an existing output file");

  std::vector<std::string> ensemble_scores;
  std::string ensemble_out;
  bool ensemble_overwrite = false;
  auto* ensemble = app.add_subcommand("ensemble", "Average score tables");
  ensemble->add_option("--scores", ensemble_scores, "Score CSV (repeatable)")->required();
  ensemble->add_option("--out", ensemble_out, "Output score CSV")->required();
  ensemble->add_flag("--overwrite", ensemble_overwrite, "Replace an existing output file");

  std::string mix_base, mix_extra, mix_assign, mix_name, mix_prefix = "mix", mix_out;
  bool mix_overwrite = false;
  auto* mix = app.add_subcommand("mix-manifest", "Add relabeled samples to a manifest");
  mix->add_option("--base", mix_base, "Base manifest")->required();
  mix->add_option("--extra", mix_extra, "Manifest whose records are added")->required();
  mix->add_option("--assign", mix_assign, "Label for the added records (real|fake)")
      ->required();
  mix->add_option("--name", mix_name, "Configuration name, e.g. FF+SBI=R");
  mix->add_option("--prefix", mix_prefix, "Namespace for added video ids");
  mix->add_option("--out", mix_out, "Output manifest path")->required();
  mix->add_flag("--overwrite", mix_overwrite, "Replace an existing output file");

  std::vector<std::string> report_results, report_inline, report_exclude;
  std::string report_out;
  bool report_overwrite = false;
  auto* report = app.add_subcommand("report", "Render AUROC tables");
  report->add_option("--results", report_results, "Results JSON from auroc --out");
  report->add_option("--auroc", report_inline, "Inline result name=value");
  report->add_option("--exclude", report_exclude, "Dataset left out of the mean");
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_flag("--overwrite", report_overwrite, "Replace existing report files");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (*gen_sbi) return cmd_gen_sbi(sbi_opts, out);
    if (*gen_probes) return cmd_gen_probes(probe_opts, deltas, mask, sigma, out);
    if (*score) {
      return cmd_score(score_manifest, score_out, seam_config, score_threads,
                       score_overwrite, out);
    }
    if (*auroc_cmd) {
      return cmd_auroc(auroc_manifests, auroc_scores, auroc_names, auroc_k, auroc_out,
                       auroc_overwrite, out);
    }
    if (*ensemble) return cmd_ensemble(ensemble_scores, ensemble_out, ensemble_overwrite, out);
    if (*mix) {
      return cmd_mix(mix_base, mix_extra, mix_assign, mix_name, mix_prefix, mix_out,
                     mix_overwrite, out);
    }
    if (*report) {
      if (report_results.empty() && report_inline.empty()) {
        throw UsageError("report needs --results or --auroc");
      }
      return cmd_report(report_results, report_inline, report_exclude, report_out,
                        report_overwrite, out);
    }
  } catch (const UsageError& e) {
    print_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const LocatedError& e) {
    print_error(err, error_code_name(e.code()), e.what(), e.path(), e.line());
    return kExitError;
  } catch (const Error& e) {
    print_error(err, error_code_name(e.code()), e.what());
    return kExitError;
  } catch (const nlohmann::json::exception& e) {
    print_error(err, error_code_name(ErrorCode::Schema), e.what());
    return kExitError;
  } catch (const fs::filesystem_error& e) {
    print_error(err, error_code_name(ErrorCode::Io), e.what(), e.path1().string());
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace blendforge::cli
