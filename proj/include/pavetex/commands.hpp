#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pavetex/dataset.hpp"
#include "pavetex/detection.hpp"
#include "pavetex/error.hpp"
#include "pavetex/image_io.hpp"
#include "pavetex/learning.hpp"
#include "pavetex/model_io.hpp"
#include "pavetex/synthetic.hpp"
#include "pavetex/texture.hpp"

// Implementations of the command-line subcommands, kept here so they can be
// driven from tests without spawning a process.
namespace pavetex {

struct ExtractOptions {
  TextureParams texture;
  int patch_side = 500;
};

inline bool split_matches(const ManifestRow& row, const std::string& split) {
  return split.empty() || row.split == split;
}

// Features of every labelled manifest row in the split, in row order. The
// frame id is the row's path as written in the manifest.
inline std::vector<LabeledSample> extract_manifest(const Manifest& m, const ExtractOptions& opt,
                                                   const std::string& split = "") {
  std::vector<LabeledSample> out;
  for (const auto& row : m.rows) {
    if (!split_matches(row, split)) continue;
    LabeledSample s;
    try {
      s.features = extract_fs(extract_center_patch(read_gray(m.resolve(row)), opt.patch_side), opt.texture);
    } catch (const Error& e) {
      fail(e.kind(), row.path + ": " + e.what());
    }
    s.label = row.label;
    s.city = row.city;
    s.frame_id = row.path;
    s.timestamp = row.timestamp;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature CSV

inline std::string features_csv(std::span<const LabeledSample> samples) {
  std::string csv = "frame_id";
  for (std::size_t f = 0; f < kFeatureCount; ++f) csv += ',' + feature_column_name(f);
  csv += ",label\n";
  for (const auto& s : samples) {
    csv += csv_field(s.frame_id);
    for (double v : s.features.fs) csv += ',' + format_double(v);
    csv += ',' + csv_field(s.label) + '\n';
  }
  return csv;
}

inline std::vector<LabeledSample> load_features_csv(const fs::path& path) {
  const auto lines = read_lines(path, ErrorKind::IoError);
  std::vector<std::string> f;
  if (lines.empty() || !split_csv_line(lines[0], f) || f.size() != kFeatureCount + 2 || f.front() != "frame_id" ||
      f.back() != "label") {
    fail(ErrorKind::InvalidInput, path.string() + " line 1: not a feature CSV header");
  }
  std::vector<LabeledSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1) + ": ";
    if (!split_csv_line(lines[i], f) || f.size() != kFeatureCount + 2) fail(ErrorKind::InvalidInput, where + "wrong field count");
    LabeledSample s;
    s.frame_id = f[0];
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (!parse_number(f[k + 1], s.features.fs[k])) fail(ErrorKind::InvalidInput, where + "bad number '" + f[k + 1] + "'");
    }
    s.label = f.back();
    out.push_back(std::move(s));
  }
  return out;
}

inline void cmd_features(const fs::path& manifest, const fs::path& out, const ExtractOptions& opt,
                         const std::string& split = "") {
  const Manifest m = load_manifest(manifest);
  write_text(out, features_csv(extract_manifest(m, opt, split)));
}

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SyntheticSpec {
  std::string class_name;
  std::optional<TextureKind> kind;  // none: curb-transition blends
  std::uint64_t seed = 0;
  int count = 0;
  int side = 80;  // frame side; the analysed patch is cut from its centre
};

struct SynthResult {
  std::vector<ManifestRow> rows;
  std::vector<std::string> warnings;
};

/// Writes `count` frames of one class under out_dir/<class>/ and returns
/// their manifest rows (paths relative to out_dir). Every fifth frame is
/// tagged for the test split.
inline SynthResult generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir, const std::string& city) {
  SynthResult out;
  if (spec.count < 0) fail(ErrorKind::InvalidInput, "count must be non-negative");
  if (spec.count == 0) {
    out.warnings.push_back("class '" + spec.class_name + "' has no samples");
    return out;
  }
  for (int i = 0; i < spec.count; ++i) {
    const std::uint64_t seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    const GrayImage img = spec.kind ? generate_texture(*spec.kind, spec.side, seed) : generate_transition(spec.side, seed);
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04d.png", spec.class_name.c_str(), i);
    const fs::path rel = fs::path(spec.class_name) / name;
    write_png(out_dir / rel, img);
    out.rows.push_back({rel.generic_string(), spec.class_name, city, "", i, 0.0, i % 5 == 4 ? "test" : "train"});
  }
  return out;
}

struct SynthOptions {
  fs::path out_dir;
  std::uint64_t seed = 1;
  int count = 200;        // per material class
  int transitions = 0;    // transition-class exemplars
  int patch_side = 64;
  int frame_side = 0;     // 0: patch side + 25%
  int streams = 0;
  int entrances = 2;
  double fps = 30.0;
  double duration = 60.0;
  std::string city = "synthetic";
};

inline int frame_side_for(const SynthOptions& o) {
  return o.frame_side > 0 ? o.frame_side : o.patch_side + (o.patch_side + 3) / 4;
}

inline std::vector<std::string> synthetic_classes(const SynthOptions& o) {
  std::vector<std::string> classes(kMaterialNames.begin(), kMaterialNames.end());
  if (o.transitions > 0 || o.streams > 0) classes.emplace_back("transition");
  return classes;
}

/// Writes out_dir/materials.csv (+ .json) with the material (and optional
/// transition) frames, and, when streams are requested, out_dir/streams.csv
/// (+ .json) with the sampled stream frames and out_dir/annotations.csv.
inline std::vector<std::string> cmd_synth(const SynthOptions& o) {
  if (o.patch_side < 1) fail(ErrorKind::InvalidInput, "patch side must be positive");
  const int side = frame_side_for(o);
  if (side < o.patch_side) fail(ErrorKind::InvalidInput, "frame side smaller than patch side");
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + o.out_dir.string());

  std::vector<std::string> warnings;
  Manifest materials;
  materials.classes = synthetic_classes(o);
  materials.fps = o.fps;
  const fs::path material_dir = o.out_dir / "materials";
  for (std::size_t k = 0; k < kMaterialNames.size(); ++k) {
    const SyntheticSpec spec{std::string(kMaterialNames[k]), static_cast<TextureKind>(k), mix_seed(o.seed, k + 1), o.count, side};
    auto r = generate_synthetic(spec, material_dir, o.city);
    materials.rows.insert(materials.rows.end(), r.rows.begin(), r.rows.end());
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  if (o.transitions > 0) {
    const SyntheticSpec spec{"transition", std::nullopt, mix_seed(o.seed, 99), o.transitions, side};
    auto r = generate_synthetic(spec, material_dir, o.city);
    materials.rows.insert(materials.rows.end(), r.rows.begin(), r.rows.end());
  }
  for (auto& row : materials.rows) row.path = "materials/" + row.path;
  write_manifest(o.out_dir / "materials.csv", materials);

  if (o.streams > 0) {
    Manifest streams;
    streams.classes = materials.classes;
    streams.fps = o.fps;
    std::map<std::string, GroundTruthAnnotation> truth;
    for (int s = 0; s < o.streams; ++s) {
      char id[32];
      std::snprintf(id, sizeof(id), "stream_%03d", s);
      StreamSpec spec;
      spec.id = id;
      spec.fps = o.fps;
      spec.duration = o.duration;
      spec.entrances = o.entrances;
      spec.frame_side = side;
      spec.patch_side = o.patch_side;
      spec.seed = mix_seed(o.seed, 1000 + static_cast<std::uint64_t>(s));
      const SyntheticStream stream = make_stream(spec);
      truth[spec.id] = stream.truth;
      for (const auto& frame : stream.stream.frames) {
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%06lld.png", static_cast<long long>(frame.frame_index));
        const fs::path rel = fs::path("streams") / spec.id / name;
        write_png(o.out_dir / rel, render_stream_frame(stream, frame));
        streams.rows.push_back({rel.generic_string(), "", o.city, spec.id, frame.frame_index, frame.timestamp, "stream"});
      }
    }
    write_manifest(o.out_dir / "streams.csv", streams);
    write_annotations(o.out_dir / "annotations.csv", truth);
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Training and classification

struct TrainOptions {
  ExtractOptions extract;
  EcocOptions ecoc;
  std::string split;  // empty: every labelled row
};

// Declared classes that occur among the samples, in declared order.
inline std::vector<std::string> present_classes(const Manifest& m, std::span<const LabeledSample> samples) {
  std::vector<std::string> out;
  for (const auto& c : m.classes) {
    if (std::any_of(samples.begin(), samples.end(), [&](const LabeledSample& s) { return s.label == c; })) out.push_back(c);
  }
  return out;
}

inline TrainedModel train_from_samples(std::span<const LabeledSample> samples, std::vector<std::string> classes,
                                       const TrainOptions& opt) {
  TrainedModel model;
  model.texture = opt.extract.texture;
  model.patch_side = opt.extract.patch_side;
  model.ecoc = train_ecoc(samples, std::move(classes), opt.ecoc);
  return model;
}

inline TrainedModel cmd_train(const fs::path& manifest, const fs::path& model_out, const TrainOptions& opt,
                              std::ostream& log) {
  const Manifest m = load_manifest(manifest);
  std::vector<LabeledSample> samples;
  for (auto& s : extract_manifest(m, opt.extract, opt.split)) {
    if (!s.label.empty()) samples.push_back(std::move(s));
  }
  const auto classes = present_classes(m, samples);
  for (const auto& c : m.classes) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) log << "note: class '" << c << "' has no samples\n";
  }
  const TrainedModel model = train_from_samples(samples, classes, opt);
  save_model(model_out, model);
  log << "trained on " << samples.size() << " samples, " << model.ecoc.per_class << " per class after balancing, "
      << model.ecoc.pca.dims() << " principal components\n";
  return model;
}

struct ClassifySummary {
  std::size_t rows = 0;
  std::size_t labelled = 0;
  std::size_t correct = 0;
};

inline std::string posteriors_csv(const TrainedModel& model, std::span<const LabeledSample> samples,
                                  ClassifySummary& summary) {
  std::string csv = "frame_id,label,predicted";
  for (const auto& c : model.ecoc.classes) csv += ',' + csv_field("p_" + c);
  csv += '\n';
  for (const auto& s : samples) {
    const Prediction p = predict_posterior(model.ecoc, s.features);
    const std::string& predicted = model.ecoc.classes[p.index];
    csv += csv_field(s.frame_id) + ',' + csv_field(s.label) + ',' + csv_field(predicted);
    for (double v : p.posterior) csv += ',' + format_double(v);
    csv += '\n';
    ++summary.rows;
    if (!s.label.empty()) {
      ++summary.labelled;
      if (s.label == predicted) ++summary.correct;
    }
  }
  return csv;
}

// Classifies manifest frames, or rows of a feature CSV when `features` is set.
inline ClassifySummary cmd_classify(const fs::path& model_path, const fs::path& manifest, const fs::path& features,
                                    const fs::path& out, const std::string& split = "") {
  const TrainedModel model = load_model(model_path);
  std::vector<LabeledSample> samples;
  if (!features.empty()) {
    samples = load_features_csv(features);
  } else {
    samples = extract_manifest(load_manifest(manifest), {model.texture, model.patch_side}, split);
  }
  ClassifySummary summary;
  write_text(out, posteriors_csv(model, samples, summary));
  return summary;
}

inline void cmd_rank(const fs::path& manifest, const std::string& class_a, const std::string& class_b,
                     const ExtractOptions& opt, const fs::path& out) {
  const Manifest m = load_manifest(manifest);
  const auto samples = extract_manifest(m, opt);
  std::vector<double> a, b;
  const auto order = rank_features(samples, class_a, class_b);
  const Matrix X = feature_matrix(samples);
  std::string csv = "rank,feature,p_value\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    a.clear();
    b.clear();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double v = X(static_cast<Eigen::Index>(i), order[r]);
      if (samples[i].label == class_a) a.push_back(v);
      if (samples[i].label == class_b) b.push_back(v);
    }
    csv += std::to_string(r + 1) + ',' + feature_column_name(static_cast<std::size_t>(order[r])) + ',' +
           format_double(ranksum_p(a, b)) + '\n';
  }
  write_text(out, csv);
}

// ---------------------------------------------------------------------------
// Detection and evaluation

struct DetectOptions {
  double threshold = 0.5;
  double guard_seconds = kDefaultGuardSeconds;
  int sample_every = 0;  // 0: derived from the manifest fps
  double max_fpr = 0.03;  // operating-point constraint reported by eval
};

struct ScoredManifestStream {
  FrameStream stream;
  ScoredStream scored;
};

inline std::vector<ScoredManifestStream> score_manifest_streams(const TrainedModel& model, const Manifest& m,
                                                                const DetectOptions& opt, std::ostream& log) {
  ScoringParams params;
  params.texture = model.texture;
  params.patch_side = model.patch_side;
  params.sample_every = opt.sample_every > 0 ? opt.sample_every : sample_interval(m.fps);
  std::vector<ScoredManifestStream> out;
  for (const auto& s : manifest_streams(m)) {
    ScoredManifestStream entry{s, score_stream(s, model.ecoc, params, [](const StreamFrame& f) { return read_gray(f.path); })};
    for (const auto& skip : entry.scored.skipped) {
      log << "skipped frame " << skip.frame_index << " of " << s.id << ": " << skip.reason << '\n';
    }
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::string detections_csv(std::span<const DetectionEvent> events, std::span<const DetectionEvent> accepted,
                                  const std::vector<int>* matched) {
  std::string csv = "timestamp,frame_index,score_difference,accepted,matched_entrance\n";
  std::size_t a = 0;
  for (const auto& e : events) {
    const bool is_accepted = a < accepted.size() && accepted[a].frame_index == e.frame_index;
    std::string match;
    if (is_accepted && matched != nullptr) {
      const int k = (*matched)[a];
      match = k >= 0 ? std::to_string(k) : "-1";
    }
    csv += format_double(e.timestamp) + ',' + std::to_string(e.frame_index) + ',' + format_double(e.score_difference) +
           ',' + (is_accepted ? "1" : "0") + ',' + match + '\n';
    if (is_accepted) ++a;
  }
  return csv;
}

inline fs::path detections_path(const fs::path& out_dir, const std::string& stream) {
  return out_dir / ("detections_" + stream + ".csv");
}

inline void cmd_detect(const fs::path& model_path, const fs::path& manifest, const DetectOptions& opt,
                       const fs::path& out_dir, std::ostream& log) {
  const TrainedModel model = load_model(model_path);
  const Manifest m = load_manifest(manifest);
  for (const auto& s : score_manifest_streams(model, m, opt, log)) {
    const auto accepted = apply_guard_zone(s.scored.events, opt.threshold, opt.guard_seconds);
    write_text(detections_path(out_dir, s.stream.id), detections_csv(s.scored.events, accepted, nullptr));
    log << s.stream.id << ": " << accepted.size() << " detections\n";
  }
}

inline std::string roc_csv(const SweepResult& sweep) {
  std::string csv = "threshold,fpr,tpr\n";
  for (const auto& p : sweep.points) {
    char t[16];
    std::snprintf(t, sizeof(t), "%.2f", p.threshold);
    csv += std::string(t) + ',' + format_double(p.fpr) + ',' + format_double(p.tpr) + '\n';
  }
  return csv;
}

struct EvalReport {
  DetectionMetrics metrics;  // pooled over streams at the chosen threshold
  SweepResult sweep;
  std::optional<SweepPoint> best;
};

/// Scores every stream, writes per-stream detection CSVs, roc.csv (the
/// 101-threshold sweep) and metrics.json (counts at --threshold, sweep AUC,
/// best operating point under max_fpr and a latency histogram).
inline EvalReport cmd_eval(const fs::path& model_path, const fs::path& manifest, const fs::path& annotations,
                           const DetectOptions& opt, const fs::path& out_dir, std::ostream& log) {
  const TrainedModel model = load_model(model_path);
  const Manifest m = load_manifest(manifest);
  const auto truth = load_annotations(annotations);
  const auto scored = score_manifest_streams(model, m, opt, log);

  EvalReport report;
  std::vector<StreamOutcome> outcomes;
  std::size_t skipped = 0;
  for (const auto& s : scored) {
    const auto it = truth.find(s.stream.id);
    const GroundTruthAnnotation gt = it != truth.end() ? it->second : GroundTruthAnnotation{};
    outcomes.push_back({s.scored.events, s.scored.sampled_times, gt});
    skipped += s.scored.skipped.size();
    const auto accepted = apply_guard_zone(s.scored.events, opt.threshold, opt.guard_seconds);
    const auto metrics = evaluate(accepted, gt, s.scored.sampled_times);
    write_text(detections_path(out_dir, s.stream.id), detections_csv(s.scored.events, accepted, &metrics.matched_entrance));
    auto& pooled = report.metrics;
    pooled.true_positives += metrics.true_positives;
    pooled.false_positives += metrics.false_positives;
    pooled.false_negatives += metrics.false_negatives;
    pooled.negatives += metrics.negatives;
    pooled.latencies.insert(pooled.latencies.end(), metrics.latencies.begin(), metrics.latencies.end());
  }
  auto& pooled = report.metrics;
  const int entrances = pooled.true_positives + pooled.false_negatives;
  pooled.tpr_undefined = entrances == 0;
  pooled.tpr = entrances > 0 ? static_cast<double>(pooled.true_positives) / entrances : 1.0;
  pooled.fpr_undefined = pooled.negatives == 0;
  pooled.fpr = pooled.negatives > 0 ? static_cast<double>(pooled.false_positives) / pooled.negatives : 0.0;

  report.sweep = threshold_sweep(outcomes, opt.guard_seconds);
  report.best = best_operating_point(report.sweep, opt.max_fpr);
  if (!report.sweep.tp_monotone) log << "warning: true-positive count rose with the threshold\n";
  write_text(out_dir / "roc.csv", roc_csv(report.sweep));

  nlohmann::ordered_json j;
  j["threshold"] = opt.threshold;
  j["guard_seconds"] = opt.guard_seconds;
  j["pre_window"] = kDefaultPreWindow;
  j["post_window"] = kDefaultPostWindow;
  j["streams"] = scored.size();
  j["skipped_frames"] = skipped;
  j["true_positives"] = pooled.true_positives;
  j["false_positives"] = pooled.false_positives;
  j["false_negatives"] = pooled.false_negatives;
  j["negatives"] = pooled.negatives;
  j["tpr"] = pooled.tpr;
  j["fpr"] = pooled.fpr;
  j["tpr_undefined"] = pooled.tpr_undefined;
  j["fpr_undefined"] = pooled.fpr_undefined;
  j["auc"] = report.sweep.auc;
  j["tp_monotone"] = report.sweep.tp_monotone;
  if (report.best) {
    j["best_operating_point"] = {{"max_fpr", opt.max_fpr},
                                 {"threshold", report.best->threshold},
                                 {"tpr", report.best->tpr},
                                 {"fpr", report.best->fpr}};
  } else {
    j["best_operating_point"] = nullptr;
  }
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const auto& b : latency_histogram(pooled.latencies)) bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  j["latency_histogram"] = std::move(bins);
  j["latencies"] = pooled.latencies;
  write_text(out_dir / "metrics.json", j.dump(2) + '\n');
  return report;
}

}  // namespace pavetex
