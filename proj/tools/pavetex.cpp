// pavetex: synthetic corpus generation, training, classification and
// curb-entrance detection from the command line.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pavetex/commands.hpp"

namespace {

using namespace pavetex;

struct TextureFlags {
  int patch_side = 500;
  TextureParams params;
  bool sum_aggregation = false;

  void attach(CLI::App* app) {
    app->add_option("--patch-side", patch_side, "Side of the centre patch in pixels")->check(CLI::PositiveNumber);
    app->add_option("--glcm-levels", params.glcm_levels, "Gray levels for co-occurrence")->check(CLI::Range(2, 256));
    app->add_option("--haralick-window", params.haralick_window, "Haralick sliding window side (odd)")->check(CLI::Range(3, 4096));
    app->add_option("--collage-window", params.collage_window, "CoLlAGe window side (odd)")->check(CLI::Range(3, 4096));
    app->add_option("--collage-bins", params.collage_bins, "Orientation bins")->check(CLI::Range(2, 256));
    app->add_flag("--haralick-sum", sum_aggregation, "Sum windowed Haralick values instead of averaging");
  }

  ExtractOptions options() const {
    ExtractOptions o{params, patch_side};
    if (sum_aggregation) o.texture.haralick_aggregation = Aggregation::Sum;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-texture classification and street-entrance detection"};
  app.require_subcommand(1);

  std::string manifest, model, out, out_dir, features, annotations, split;
  std::uint64_t seed = 1;

  // synth
  SynthOptions synth;
  std::string synth_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic corpus (materials, optional streams)");
  synth_cmd->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--count", synth.count, "Frames per material class")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--transitions", synth.transitions, "Curb-transition exemplars")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--patch-side", synth.patch_side, "Patch side the frames are sized for")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--frame-side", synth.frame_side, "Frame side (default patch side + 25%)");
  synth_cmd->add_option("--streams", synth.streams, "Walking streams to render")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--entrances", synth.entrances, "Entrances per stream")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--fps", synth.fps, "Source frame rate of the streams")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--duration", synth.duration, "Stream length in seconds")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--city", synth.city, "City tag written to the manifests");

  // train
  TrainOptions train;
  TextureFlags train_tex;
  auto* train_cmd = app.add_subcommand("train", "Train the one-vs-all classifier on a manifest");
  train_cmd->add_option("--manifest", manifest, "Manifest CSV")->required();
  train_cmd->add_option("--model", model, "Model file to write")->required();
  train_cmd->add_option("--seed", seed, "Random seed (class balancing)");
  train_cmd->add_option("--pca-variance", train.ecoc.variance_fraction, "Retained variance fraction")
      ->check(CLI::Range(1e-9, 1.0));
  train_cmd->add_option("--svm-c", train.ecoc.c, "SVM regularization C")->check(CLI::PositiveNumber);
  train_cmd->add_option("--split", split, "Use only rows with this split tag");
  train_tex.attach(train_cmd);

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Per-frame posteriors for a manifest or feature CSV");
  classify_cmd->add_option("--model", model, "Model file")->required();
  auto* classify_src = classify_cmd->add_option("--manifest", manifest, "Manifest CSV");
  classify_cmd->add_option("--features", features, "Feature CSV from 'features dump'")->excludes(classify_src);
  classify_cmd->add_option("--split", split, "Use only rows with this split tag");
  classify_cmd->add_option("--out", out, "Posterior CSV (default <out-dir>/posteriors.csv)");
  classify_cmd->add_option("--out-dir", out_dir, "Output directory");

  // features dump
  TextureFlags feat_tex;
  auto* features_cmd = app.add_subcommand("features", "Feature extraction");
  features_cmd->require_subcommand(1);
  auto* dump_cmd = features_cmd->add_subcommand("dump", "Write the 94-column feature CSV of a manifest");
  dump_cmd->add_option("--manifest", manifest, "Manifest CSV")->required();
  dump_cmd->add_option("--out", out, "Feature CSV (default <out-dir>/features.csv)");
  dump_cmd->add_option("--out-dir", out_dir, "Output directory");
  dump_cmd->add_option("--split", split, "Use only rows with this split tag");
  feat_tex.attach(dump_cmd);

  // detect / eval
  DetectOptions detect;
  auto add_detect_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", model, "Model file")->required();
    cmd->add_option("--manifest", manifest, "Stream manifest CSV")->required();
    cmd->add_option("--threshold", detect.threshold, "Score-difference threshold");
    cmd->add_option("--guard-seconds", detect.guard_seconds, "Suppression after each detection")->check(CLI::NonNegativeNumber);
    cmd->add_option("--sample-every", detect.sample_every, "Score every n-th frame (default fps/5)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  };
  auto* detect_cmd = app.add_subcommand("detect", "Detect street entrances on frame streams");
  add_detect_flags(detect_cmd);
  auto* eval_cmd = app.add_subcommand("eval", "Detection metrics and threshold sweep against annotations");
  add_detect_flags(eval_cmd);
  eval_cmd->add_option("--annotations", annotations, "Annotation CSV (stream,event,timestamp)")->required();
  eval_cmd->add_option("--max-fpr", detect.max_fpr, "FPR bound for the reported operating point");

  // rank
  std::string class_a, class_b;
  TextureFlags rank_tex;
  auto* rank_cmd = app.add_subcommand("rank", "Rank features by rank-sum p-value between two classes");
  rank_cmd->add_option("--manifest", manifest, "Manifest CSV")->required();
  rank_cmd->add_option("--class-a", class_a, "First class")->required();
  rank_cmd->add_option("--class-b", class_b, "Second class")->required();
  rank_cmd->add_option("--out", out, "Ranking CSV (default <out-dir>/ranking.csv)");
  rank_cmd->add_option("--out-dir", out_dir, "Output directory");
  rank_tex.attach(rank_cmd);

  CLI11_PARSE(app, argc, argv);

  auto output = [&](const std::string& fallback) {
    if (!out.empty()) return std::filesystem::path(out);
    return (out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir)) / fallback;
  };

  try {
    if (*synth_cmd) {
      synth.out_dir = synth_dir;
      for (const auto& w : cmd_synth(synth)) std::cerr << "warning: " << w << '\n';
    } else if (*train_cmd) {
      train.extract = train_tex.options();
      train.ecoc.seed = seed;
      train.split = split;
      cmd_train(manifest, model, train, std::cerr);
    } else if (*classify_cmd) {
      if (manifest.empty() && features.empty()) throw CLI::RequiredError("--manifest or --features");
      const auto s = cmd_classify(model, manifest, features, output("posteriors.csv"), split);
      std::cout << s.rows << " rows";
      if (s.labelled > 0) {
        std::cout << ", accuracy " << static_cast<double>(s.correct) / static_cast<double>(s.labelled) << " on "
                  << s.labelled << " labelled";
      }
      std::cout << '\n';
    } else if (*dump_cmd) {
      cmd_features(manifest, output("features.csv"), feat_tex.options(), split);
    } else if (*detect_cmd) {
      cmd_detect(model, manifest, detect, out_dir, std::cerr);
    } else if (*eval_cmd) {
      const auto r = cmd_eval(model, manifest, annotations, detect, out_dir, std::cerr);
      std::cout << "TP " << r.metrics.true_positives << " FP " << r.metrics.false_positives << " FN "
                << r.metrics.false_negatives << " TPR " << r.metrics.tpr << " FPR " << r.metrics.fpr << " AUC "
                << r.sweep.auc << '\n';
      if (r.best) {
        std::cout << "best at FPR <= " << detect.max_fpr << ": threshold " << r.best->threshold << " TPR " << r.best->tpr
                  << " FPR " << r.best->fpr << '\n';
      }
    } else if (*rank_cmd) {
      cmd_rank(manifest, class_a, class_b, rank_tex.options(), output("ranking.csv"));
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const pavetex::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
