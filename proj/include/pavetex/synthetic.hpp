#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pavetex/detection.hpp"
#include "pavetex/error.hpp"
#include "pavetex/imaging.hpp"
#include "pavetex/rng.hpp"

// Seeded stand-ins for the four sidewalk/street materials and for frames
// that straddle a curb. Per-kind visual statistics:
//   band-noise (asphalt)          mean 95-125, box-blurred Gaussian noise with
//                                 blur radius 1-2 px (passband ~1/(2r+1)
//                                 cycles/px), sd 14-22, sparse specks
//   smooth-with-cracks (concrete) mean 160-190, shading of period 40-120 px,
//                                 fine noise sd 3, 1-3 dark crack walks
//   periodic-grid (brick)         courses 9-13 px high, bricks 2-2.4x as long,
//                                 staggered, 2 px light mortar
//   tiled (tiles)                 square tiles 14-20 px, two alternating
//                                 shades, 1-2 px dark grout
namespace pavetex {

enum class TextureKind { BandNoise, SmoothWithCracks, PeriodicGrid, Tiled };

inline constexpr std::array<std::string_view, 4> kTextureKindNames{"band-noise", "smooth-with-cracks",
                                                                   "periodic-grid", "tiled"};

inline std::string_view to_string(TextureKind k) { return kTextureKindNames[static_cast<std::size_t>(k)]; }

inline std::optional<TextureKind> parse_texture_kind(std::string_view s) {
  for (std::size_t i = 0; i < kTextureKindNames.size(); ++i) {
    if (kTextureKindNames[i] == s) return static_cast<TextureKind>(i);
  }
  return std::nullopt;
}

// Material class names used for the synthetic corpus, one per kind.
inline constexpr std::array<std::string_view, 4> kMaterialNames{"asphalt", "concrete", "brick", "tiles"};

inline TextureKind kind_for_material(std::string_view material) {
  for (std::size_t i = 0; i < kMaterialNames.size(); ++i) {
    if (kMaterialNames[i] == material) return static_cast<TextureKind>(i);
  }
  fail(ErrorKind::InvalidInput, "no generator for material '" + std::string(material) + "'");
}

// splitmix64 finalizer: decorrelates derived seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1) + 0xBF58476D1CE4E5B9ull * (c + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

// Real-valued canvas, converted to 8 bits at the end.
struct Canvas {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Canvas(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  GrayImage to_gray() const {
    std::vector<std::uint8_t> px(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v[i]), 0L, 255L));
    }
    return GrayImage(cols, rows, std::move(px));
  }
};

inline Canvas box_blur(const Canvas& in, int radius) {
  Canvas tmp(in.rows, in.cols), out(in.rows, in.cols);
  const double norm = 1.0 / (2 * radius + 1);
  for (int r = 0; r < in.rows; ++r) {
    for (int c = 0; c < in.cols; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += in.at(r, std::clamp(c + k, 0, in.cols - 1));
      tmp.at(r, c) = s * norm;
    }
  }
  for (int r = 0; r < in.rows; ++r) {
    for (int c = 0; c < in.cols; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += tmp.at(std::clamp(r + k, 0, in.rows - 1), c);
      out.at(r, c) = s * norm;
    }
  }
  return out;
}

inline void add_noise(Canvas& cv, Rng& rng, double sd) {
  for (auto& x : cv.v) x += rng.normal(0.0, sd);
}

inline Canvas band_noise(int rows, int cols, Rng& rng) {
  const int radius = 1 + static_cast<int>(rng.below(2));
  const double mean = rng.uniform(95.0, 125.0);
  const double sd = rng.uniform(14.0, 22.0);
  Canvas white(rows, cols);
  for (auto& x : white.v) x = rng.normal();
  Canvas cv = box_blur(white, radius);
  // A box blur of radius r scales unit white noise to sd 1/(2r+1).
  const double gain = sd * (2 * radius + 1);
  for (auto& x : cv.v) {
    x = mean + gain * x;
    const double u = rng.uniform();
    if (u < 0.01) x += 45.0;
    else if (u < 0.02) x -= 35.0;
  }
  return cv;
}

inline Canvas smooth_with_cracks(int rows, int cols, Rng& rng) {
  Canvas cv(rows, cols, rng.uniform(160.0, 190.0));
  for (int k = 0; k < 3; ++k) {
    const double period = rng.uniform(40.0, 120.0);
    const double angle = rng.uniform(0.0, std::numbers::pi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = rng.uniform(3.0, 7.0);
    const double fx = std::cos(angle) * 2.0 * std::numbers::pi / period;
    const double fy = std::sin(angle) * 2.0 * std::numbers::pi / period;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) cv.at(r, c) += amp * std::sin(fx * c + fy * r + phase);
    }
  }
  add_noise(cv, rng, 3.0);
  const int cracks = 1 + static_cast<int>(rng.below(3));
  for (int k = 0; k < cracks; ++k) {
    double x = rng.uniform(0.0, cols - 1.0), y = rng.uniform(0.0, rows - 1.0);
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double depth = rng.uniform(50.0, 80.0);
    const int steps = 2 * (rows + cols);
    for (int s = 0; s < steps; ++s) {
      const int r = static_cast<int>(std::lround(y)), c = static_cast<int>(std::lround(x));
      if (r < 0 || r >= rows || c < 0 || c >= cols) break;
      cv.at(r, c) -= depth;
      if (c + 1 < cols) cv.at(r, c + 1) -= depth / 2.0;
      heading += rng.normal(0.0, 0.25);
      x += std::cos(heading);
      y += std::sin(heading);
    }
  }
  return cv;
}

inline Canvas periodic_grid(int rows, int cols, Rng& rng) {
  const double course = rng.uniform(9.0, 13.0);
  const double length = course * rng.uniform(2.0, 2.4);
  const double mortar_level = rng.uniform(175.0, 200.0);
  const double brick_mean = rng.uniform(95.0, 125.0);
  const double oy = rng.uniform(0.0, course), ox = rng.uniform(0.0, length);
  constexpr double kMortar = 2.0;
  // Per-brick shade, indexed by (course, brick) through a hash.
  const std::uint64_t shade_seed = rng.next();
  Canvas cv(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double yy = r + oy;
    const auto row = static_cast<std::int64_t>(std::floor(yy / course));
    const double in_row = yy - static_cast<double>(row) * course;
    const double shift = (row % 2 == 0) ? 0.0 : length / 2.0;
    for (int c = 0; c < cols; ++c) {
      const double xx = c + ox + shift;
      const auto col = static_cast<std::int64_t>(std::floor(xx / length));
      const double in_col = xx - static_cast<double>(col) * length;
      if (in_row < kMortar || in_col < kMortar) {
        cv.at(r, c) = mortar_level;
      } else {
        Rng shade(mix_seed(shade_seed, static_cast<std::uint64_t>(row + 1000), static_cast<std::uint64_t>(col + 1000)));
        cv.at(r, c) = brick_mean + shade.normal(0.0, 12.0);
      }
    }
  }
  add_noise(cv, rng, 6.0);
  return cv;
}

inline Canvas tiled(int rows, int cols, Rng& rng) {
  const double size = rng.uniform(14.0, 20.0);
  const double grout = 1.0 + static_cast<double>(rng.below(2));
  const double grout_level = rng.uniform(50.0, 70.0);
  const double shade_a = rng.uniform(135.0, 160.0), shade_b = rng.uniform(195.0, 220.0);
  const double oy = rng.uniform(0.0, size), ox = rng.uniform(0.0, size);
  Canvas cv(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double yy = r + oy;
    const auto ty = static_cast<std::int64_t>(std::floor(yy / size));
    const double in_y = yy - static_cast<double>(ty) * size;
    for (int c = 0; c < cols; ++c) {
      const double xx = c + ox;
      const auto tx = static_cast<std::int64_t>(std::floor(xx / size));
      const double in_x = xx - static_cast<double>(tx) * size;
      if (in_y < grout || in_x < grout) cv.at(r, c) = grout_level;
      else cv.at(r, c) = ((tx + ty) % 2 == 0) ? shade_a : shade_b;
    }
  }
  add_noise(cv, rng, 3.0);
  return cv;
}

inline Canvas render(TextureKind kind, int rows, int cols, Rng& rng) {
  switch (kind) {
    case TextureKind::BandNoise: return band_noise(rows, cols, rng);
    case TextureKind::SmoothWithCracks: return smooth_with_cracks(rows, cols, rng);
    case TextureKind::PeriodicGrid: return periodic_grid(rows, cols, rng);
    case TextureKind::Tiled: return tiled(rows, cols, rng);
  }
  fail(ErrorKind::InvalidInput, "unknown texture kind");
}

}  // namespace detail

inline GrayImage generate_texture(TextureKind kind, int side, std::uint64_t seed) {
  if (side < 1) fail(ErrorKind::InvalidInput, "side must be positive");
  Rng rng(seed);
  return detail::render(kind, side, side, rng).to_gray();
}

// A straight curb through the image: pixels ahead of the line (signed
// distance > 0 along the unit normal at `angle`, offset `offset` pixels from
// the centre) show `ahead`, the rest `behind`, with a 3 px curb stripe.
struct Boundary {
  double angle = -std::numbers::pi / 2.0;  // normal pointing up the image
  double offset = 0.0;
};

inline GrayImage blend_across(TextureKind behind, TextureKind ahead, int side, const Boundary& line, std::uint64_t seed) {
  Rng rng(seed);
  const detail::Canvas a = detail::render(behind, side, side, rng);
  const detail::Canvas b = detail::render(ahead, side, side, rng);
  detail::Canvas out(side, side);
  const double nx = std::cos(line.angle), ny = std::sin(line.angle);
  const double cx = (side - 1) / 2.0, cy = (side - 1) / 2.0;
  const double curb = rng.uniform(190.0, 215.0);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double d = (c - cx) * nx + (r - cy) * ny - line.offset;
      if (std::abs(d) <= 1.5) out.at(r, c) = curb + rng.normal(0.0, 4.0);
      else out.at(r, c) = d > 0.0 ? b.at(r, c) : a.at(r, c);
    }
  }
  return out.to_gray();
}

// Sidewalk kinds a curb transition starts from; the street is band-noise.
inline constexpr std::array<TextureKind, 3> kSidewalkKinds{TextureKind::SmoothWithCracks, TextureKind::PeriodicGrid,
                                                           TextureKind::Tiled};

// Training exemplar of the transition class: a random sidewalk meeting the
// street with the curb within the central half of the image.
inline GrayImage generate_transition(int side, std::uint64_t seed) {
  Rng rng(seed);
  const TextureKind sidewalk = kSidewalkKinds[rng.below(kSidewalkKinds.size())];
  Boundary line;
  line.angle = -std::numbers::pi / 2.0 + rng.uniform(-0.45, 0.45);
  line.offset = rng.uniform(-0.25, 0.25) * side;
  const bool entering = rng.below(2) == 0;
  return entering ? blend_across(sidewalk, TextureKind::BandNoise, side, line, rng.next())
                  : blend_across(TextureKind::BandNoise, sidewalk, side, line, rng.next());
}

// ---------------------------------------------------------------------------
// Synthetic walking streams

struct SyntheticStream {
  FrameStream stream;  // sampled frames only
  GroundTruthAnnotation truth;
  TextureKind sidewalk = TextureKind::SmoothWithCracks;
  int frame_side = 0;
  double patch_side = 0.0;
  std::uint64_t seed = 0;
};

struct StreamSpec {
  std::string id = "stream";
  double fps = 30.0;
  double duration = 60.0;
  int entrances = 2;
  int frame_side = 80;
  int patch_side = 64;
  std::uint64_t seed = 0;
};

// Seconds the curb takes to sweep across the patch, and how long before
// the entrance (first foot in the street) it passes the patch centre.
inline constexpr double kCrossingSeconds = 1.0;
inline constexpr double kCrossingLead = 0.4;

/// Lays out alternating entrance/exit events (6-14 s apart, first entrance
/// after 6 s) and the sampled frame grid of one stream. Frames are rendered
/// on demand by render_stream_frame.
inline SyntheticStream make_stream(const StreamSpec& spec) {
  if (spec.fps <= 0.0 || spec.duration <= 0.0) fail(ErrorKind::InvalidInput, "fps and duration must be positive");
  if (spec.patch_side < 1 || spec.frame_side < spec.patch_side) fail(ErrorKind::InvalidInput, "bad frame/patch side");
  Rng rng(mix_seed(spec.seed, 0x5eed));
  SyntheticStream out;
  out.seed = spec.seed;
  out.frame_side = spec.frame_side;
  out.patch_side = spec.patch_side;
  out.sidewalk = kSidewalkKinds[rng.below(kSidewalkKinds.size())];
  double t = rng.uniform(6.0, 14.0);
  for (int k = 0; k < spec.entrances; ++k) {
    out.truth.entrances.push_back(t);
    t += rng.uniform(7.0, 10.0);
    out.truth.exits.push_back(t);
    t += rng.uniform(6.0, 10.0);
  }
  if (!out.truth.exits.empty() && out.truth.exits.back() > spec.duration - 1.0) {
    fail(ErrorKind::InvalidInput, "stream too short for the requested entrances");
  }
  out.stream.id = spec.id;
  out.stream.fps = spec.fps;
  const int n = sample_interval(spec.fps);
  const auto total = static_cast<std::int64_t>(std::floor(spec.duration * spec.fps));
  for (std::int64_t f = 0; f < total; f += n) {
    out.stream.frames.push_back({f, static_cast<double>(f) / spec.fps, {}});
  }
  return out;
}

/// Renders the frame at `timestamp`: the curb moves up the image at one
/// patch side per kCrossingSeconds around every entrance (sidewalk to
/// street) and exit (street to sidewalk).
inline GrayImage render_stream_frame(const SyntheticStream& s, const StreamFrame& frame) {
  const std::uint64_t seed = mix_seed(s.seed, static_cast<std::uint64_t>(frame.frame_index), 0xf4a3e);
  const double speed = s.patch_side / kCrossingSeconds;  // px per second
  struct Event {
    double time;
    bool entrance;
  };
  std::vector<Event> events;
  for (double e : s.truth.entrances) events.push_back({e, true});
  for (double x : s.truth.exits) events.push_back({x, false});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

  // Nearest event decides what the camera is looking at.
  const Event* nearest = nullptr;
  for (const auto& e : events) {
    if (!nearest || std::abs(e.time - frame.timestamp) < std::abs(nearest->time - frame.timestamp)) nearest = &e;
  }
  bool in_street = false;
  for (const auto& e : events) {
    if (e.time - kCrossingLead <= frame.timestamp) in_street = e.entrance;
  }
  if (nearest != nullptr) {
    // Distance the curb has travelled past the frame centre, in pixels.
    const double travelled = (frame.timestamp - (nearest->time - kCrossingLead)) * speed;
    if (std::abs(travelled) < s.frame_side / 2.0 + 2.0) {
      Rng rng(seed);
      Boundary line;
      line.angle = -std::numbers::pi / 2.0 + rng.uniform(-0.3, 0.3);
      line.offset = -travelled;  // ahead region grows as the curb moves down
      const TextureKind from = nearest->entrance ? s.sidewalk : TextureKind::BandNoise;
      const TextureKind to = nearest->entrance ? TextureKind::BandNoise : s.sidewalk;
      return blend_across(from, to, s.frame_side, line, rng.next());
    }
  }
  return generate_texture(in_street ? TextureKind::BandNoise : s.sidewalk, s.frame_side, seed);
}

}  // namespace pavetex
