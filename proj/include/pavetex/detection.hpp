#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pavetex/error.hpp"
#include "pavetex/imaging.hpp"
#include "pavetex/learning.hpp"
#include "pavetex/texture.hpp"

namespace pavetex {

inline constexpr double kTargetSampleRate = 5.0;  // decisions per second
inline constexpr double kDefaultGuardSeconds = 2.0;
inline constexpr double kDefaultPreWindow = 2.0;
inline constexpr double kDefaultPostWindow = 1.0;
inline constexpr int kSweepSteps = 100;
// Slack on time comparisons; frame_index / fps is rarely exact.
inline constexpr double kTimeEpsilon = 1e-9;

struct StreamFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;  // seconds
  std::string path;        // empty for frames rendered in memory
};

struct FrameStream {
  std::string id;
  double fps = 30.0;
  std::vector<StreamFrame> frames;  // strictly increasing timestamps
};

struct DetectionEvent {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  double score_difference = 0.0;  // P(transition) - P(not transition), in [-1, 1]

  bool operator==(const DetectionEvent&) const = default;
};

struct GroundTruthAnnotation {
  std::vector<double> entrances;
  std::vector<double> exits;
};

// Every n-th source frame brings the rate down to about 5 per second
// (n = 6 at 30 fps, n = 12 at 60 fps).
inline int sample_interval(double fps) {
  if (!(fps > 0.0)) fail(ErrorKind::InvalidInput, "fps must be positive");
  return std::max(1, static_cast<int>(std::lround(fps / kTargetSampleRate)));
}

inline FrameStream sample_frames(const FrameStream& s, int n) {
  if (n < 1) fail(ErrorKind::InvalidInput, "sampling interval must be at least 1");
  if (s.frames.empty()) fail(ErrorKind::InvalidInput, "empty stream");
  FrameStream out{s.id, s.fps, {}};
  for (const auto& f : s.frames) {
    if (f.frame_index % n == 0) out.frames.push_back(f);
  }
  return out;
}

struct ScoringParams {
  TextureParams texture;
  int patch_side = 500;
  int sample_every = 6;
};

struct SkippedFrame {
  std::int64_t frame_index = 0;
  std::string reason;
};

struct ScoredStream {
  std::vector<DetectionEvent> events;
  std::vector<double> sampled_times;  // every sampled frame, scored or skipped
  std::vector<SkippedFrame> skipped;
};

using FrameLoader = std::function<GrayImage(const StreamFrame&)>;

inline std::size_t transition_class(const EcocModel& model) {
  const auto it = std::find(model.classes.begin(), model.classes.end(), "transition");
  if (it == model.classes.end()) fail(ErrorKind::InvalidInput, "model has no 'transition' class");
  return static_cast<std::size_t>(it - model.classes.begin());
}

inline double score_difference(const EcocModel& model, const FeatureVector& f) {
  const Prediction p = predict_posterior(model, f);
  const double pt = p.posterior[transition_class(model)];
  return pt - (1.0 - pt);
}

/// Samples the stream, then scores every sampled frame. A frame whose
/// loading or extraction fails is skipped and reported in `skipped`.
inline ScoredStream score_stream(const FrameStream& s, const EcocModel& model, const ScoringParams& params,
                                 const FrameLoader& load) {
  const std::size_t positive = transition_class(model);
  ScoredStream out;
  if (s.frames.empty()) return out;
  for (const auto& frame : sample_frames(s, params.sample_every).frames) {
    out.sampled_times.push_back(frame.timestamp);
    try {
      const Patch patch = extract_center_patch(load(frame), params.patch_side);
      const Prediction p = predict_posterior(model, extract_fs(patch, params.texture));
      const double pt = p.posterior[positive];
      out.events.push_back({frame.frame_index, frame.timestamp, pt - (1.0 - pt)});
    } catch (const std::exception& e) {
      out.skipped.push_back({frame.frame_index, e.what()});
    }
  }
  return out;
}

/// Accepts, in time order, events scoring at least `threshold` unless an
/// earlier accepted event lies within the preceding `guard` seconds; an
/// accepted event at t suppresses (t, t + guard].
inline std::vector<DetectionEvent> apply_guard_zone(std::span<const DetectionEvent> events, double threshold,
                                                    double guard = kDefaultGuardSeconds) {
  std::vector<DetectionEvent> accepted;
  for (const auto& e : events) {
    if (e.score_difference < threshold) continue;
    if (!accepted.empty() && e.timestamp - accepted.back().timestamp <= guard + kTimeEpsilon) continue;
    accepted.push_back(e);
  }
  return accepted;
}

struct DetectionMetrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int negatives = 0;  // sampled frames outside every entrance window
  double tpr = 0.0;
  double fpr = 0.0;
  bool tpr_undefined = false;  // no entrances: tpr reported as 1.0
  bool fpr_undefined = false;  // no negatives: fpr reported as 0.0
  std::vector<double> latencies;          // per detected entrance, seconds
  std::vector<int> matched_entrance;      // per detection, entrance index or -1
};

inline bool in_window(double t, double entrance, double pre, double post) {
  return t >= entrance - pre - kTimeEpsilon && t <= entrance + post + kTimeEpsilon;
}

/// Scores accepted detections against annotated entrances. A detection is
/// attributed to the nearest entrance whose window [e - pre, e + post]
/// holds it (earlier entrance on ties); detections outside every window are
/// false positives. `sampled_times` are the decision opportunities, used
/// for the false-positive-rate denominator.
inline DetectionMetrics evaluate(std::span<const DetectionEvent> detections, const GroundTruthAnnotation& gt,
                                 std::span<const double> sampled_times, double pre = kDefaultPreWindow,
                                 double post = kDefaultPostWindow) {
  const auto& ent = gt.entrances;
  DetectionMetrics m;
  std::vector<double> earliest(ent.size(), std::numeric_limits<double>::infinity());
  for (const auto& d : detections) {
    int best = -1;
    for (std::size_t k = 0; k < ent.size(); ++k) {
      if (!in_window(d.timestamp, ent[k], pre, post)) continue;
      if (best < 0 || std::abs(d.timestamp - ent[k]) < std::abs(d.timestamp - ent[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(k);
      }
    }
    m.matched_entrance.push_back(best);
    if (best < 0) {
      ++m.false_positives;
    } else {
      auto& e = earliest[static_cast<std::size_t>(best)];
      e = std::min(e, d.timestamp);
    }
  }
  for (std::size_t k = 0; k < ent.size(); ++k) {
    if (std::isfinite(earliest[k])) {
      ++m.true_positives;
      m.latencies.push_back(earliest[k] - ent[k]);
    } else {
      ++m.false_negatives;
    }
  }
  for (double t : sampled_times) {
    const bool inside = std::any_of(ent.begin(), ent.end(), [&](double e) { return in_window(t, e, pre, post); });
    if (!inside) ++m.negatives;
  }
  if (ent.empty()) {
    m.tpr = 1.0;
    m.tpr_undefined = true;
  } else {
    m.tpr = static_cast<double>(m.true_positives) / static_cast<double>(ent.size());
  }
  if (m.negatives == 0) {
    m.fpr_undefined = true;
  } else {
    m.fpr = static_cast<double>(m.false_positives) / static_cast<double>(m.negatives);
  }
  return m;
}

// One stream's scored events with its annotation.
struct StreamOutcome {
  std::vector<DetectionEvent> events;
  std::vector<double> sampled_times;
  GroundTruthAnnotation truth;
};

struct SweepPoint {
  double threshold = 0.0;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int negatives = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // thresholds 0.00 .. 1.00
  double auc = 0.0;
  bool tp_monotone = true;  // TP count never rose with the threshold
};

/// Guard zone then evaluation at every threshold i/100, pooling counts over
/// all streams. AUC is the trapezoidal area of the (fpr, tpr) points sorted
/// by fpr, with (0,0) and (1,1) added.
inline SweepResult threshold_sweep(std::span<const StreamOutcome> streams, double guard = kDefaultGuardSeconds,
                                   double pre = kDefaultPreWindow, double post = kDefaultPostWindow) {
  SweepResult out;
  for (int i = 0; i <= kSweepSteps; ++i) {
    SweepPoint p;
    p.threshold = i / static_cast<double>(kSweepSteps);
    int entrances = 0;
    for (const auto& s : streams) {
      const auto accepted = apply_guard_zone(s.events, p.threshold, guard);
      const auto m = evaluate(accepted, s.truth, s.sampled_times, pre, post);
      p.true_positives += m.true_positives;
      p.false_positives += m.false_positives;
      p.false_negatives += m.false_negatives;
      p.negatives += m.negatives;
      entrances += static_cast<int>(s.truth.entrances.size());
    }
    p.tpr = entrances > 0 ? static_cast<double>(p.true_positives) / entrances : 1.0;
    p.fpr = p.negatives > 0 ? static_cast<double>(p.false_positives) / p.negatives : 0.0;
    if (!out.points.empty() && p.true_positives > out.points.back().true_positives) out.tp_monotone = false;
    out.points.push_back(p);
  }

  std::vector<std::pair<double, double>> curve{{0.0, 0.0}, {1.0, 1.0}};
  for (const auto& p : out.points) curve.emplace_back(p.fpr, p.tpr);
  std::sort(curve.begin(), curve.end());
  for (std::size_t k = 1; k < curve.size(); ++k) {
    out.auc += (curve[k].first - curve[k - 1].first) * (curve[k].second + curve[k - 1].second) / 2.0;
  }
  return out;
}

/// Highest-TPR sweep point with fpr <= max_fpr (lower fpr, then lower
/// threshold, on ties).
inline std::optional<SweepPoint> best_operating_point(const SweepResult& sweep, double max_fpr) {
  std::optional<SweepPoint> best;
  for (const auto& p : sweep.points) {
    if (p.fpr > max_fpr) continue;
    if (!best || p.tpr > best->tpr || (p.tpr == best->tpr && p.fpr < best->fpr)) best = p;
  }
  return best;
}

struct LatencyBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

// Histogram of detection latencies over [-pre, post] in `width`-second bins;
// the last bin is closed.
inline std::vector<LatencyBin> latency_histogram(std::span<const double> latencies, double pre = kDefaultPreWindow,
                                                 double post = kDefaultPostWindow, double width = 0.5) {
  const int bins = std::max(1, static_cast<int>(std::ceil((pre + post) / width - 1e-9)));
  std::vector<LatencyBin> out;
  for (int b = 0; b < bins; ++b) out.push_back({-pre + b * width, std::min(post, -pre + (b + 1) * width), 0});
  for (double l : latencies) {
    const int b = std::clamp(static_cast<int>(std::floor((l + pre) / width)), 0, bins - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

}  // namespace pavetex
