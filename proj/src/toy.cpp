#include "semreid/data/toy.hpp"

#include <algorithm>
#include <cmath>

#include "semreid/core/errors.hpp"
#include "semreid/core/rng.hpp"

namespace semreid::data {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb identity_color(int j, int n) {
  // evenly spaced hues, full saturation; j >= 1
  const double h = 6.0 * static_cast<double>(j - 1) / std::max(1, n);
  const int i = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  switch (i) {
    case 0: return {1.0, f, 0.0};
    case 1: return {1.0 - f, 1.0, 0.0};
    case 2: return {0.0, 1.0, f};
    case 3: return {0.0, 1.0 - f, 1.0};
    case 4: return {f, 0.0, 1.0};
    default: return {1.0, 0.0, 1.0 - f};
  }
}

void fill_rect(Tensor& img, int size, int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::clamp(x0, 0, size - 1);
  y0 = std::clamp(y0, 0, size - 1);
  x1 = std::clamp(x1, 0, size - 1);
  y1 = std::clamp(y1, 0, size - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      img[(0 * size + y) * static_cast<std::size_t>(size) + x] = 2.0 * c.r - 1.0;
      img[(1 * size + y) * static_cast<std::size_t>(size) + x] = 2.0 * c.g - 1.0;
      img[(2 * size + y) * static_cast<std::size_t>(size) + x] = 2.0 * c.b - 1.0;
    }
}

}  // namespace

Dataset synth_toy_corpus(const ToyConfig& cfg, std::uint64_t seed) {
  if (cfg.p_face < 0.0 || cfg.p_face > 1.0)
    throw ConfigError("p_face must lie in [0,1], got " + std::to_string(cfg.p_face));
  if (cfg.n_identities < 1 || cfg.sessions < 1 || cfg.per_session < 1 || cfg.patch_size < 8)
    throw ConfigError("toy corpus needs n_identities >= 1, sessions >= 1, per_session >= 1, "
                      "patch_size >= 8");
  Rng rng(seed);
  const int S = cfg.patch_size;
  Dataset ds;
  ds.n_identities = cfg.n_identities;
  for (int sess = 0; sess < cfg.sessions; ++sess) {
    // mild per-session background tint makes leave-one-session-out non-trivial
    const double tint = rng.uniform(-0.15, 0.15);
    for (int i = 0; i < cfg.per_session; ++i) {
      Sample s;
      s.label = static_cast<int>(rng.uniform_int(0, cfg.n_identities));
      s.session_id = sess;
      s.tracklet_id = i / 8;  // small bursts of consecutive frames
      s.image = Tensor{3, S, S};
      for (std::size_t p = 0; p < s.image.numel(); ++p)
        s.image[p] = std::clamp(tint + rng.normal(0.0, 0.06) - 0.4, -1.0, 1.0);
      int glyph_cx = 0, glyph_cy = 0;
      if (s.label == 0) {
        // clutter class: a few random blobs; a face may still appear
        // (multiple people / partial person in the box)
        const int blobs = static_cast<int>(rng.uniform_int(2, 4));
        for (int b = 0; b < blobs; ++b) {
          const int x0 = static_cast<int>(rng.uniform_int(0, S - 5));
          const int y0 = static_cast<int>(rng.uniform_int(0, S - 5));
          const int bw = static_cast<int>(rng.uniform_int(2, S / 3));
          const int bh = static_cast<int>(rng.uniform_int(2, S / 3));
          fill_rect(s.image, S, x0, y0, x0 + bw, y0 + bh,
                    {rng.uniform(), rng.uniform(), rng.uniform()});
        }
        glyph_cx = static_cast<int>(rng.uniform_int(2, S - 3));
        glyph_cy = static_cast<int>(rng.uniform_int(2, S - 3));
      } else {
        const Rgb body = identity_color(s.label, cfg.n_identities);
        // per-identity torso width signature plus positional jitter
        const int half_w = S / 8 + (s.label % 3);
        const int cx = S / 2 + static_cast<int>(rng.uniform_int(-S / 8, S / 8));
        const int torso_top = S / 4 + static_cast<int>(rng.uniform_int(-2, 2));
        const int torso_bot = S - S / 8;
        fill_rect(s.image, S, cx - half_w, torso_top, cx + half_w, torso_bot, body);
        // head block in skin tone
        const int head_r = S / 10 + 1;
        const int head_cy = torso_top - head_r - 1;
        fill_rect(s.image, S, cx - head_r, head_cy - head_r, cx + head_r, head_cy + head_r,
                  {0.87, 0.72, 0.53});
        // legs darker than torso, splitting the lower body
        fill_rect(s.image, S, cx - half_w, torso_bot - S / 8, cx - 1, S - 2,
                  {body.r * 0.4, body.g * 0.4, body.b * 0.4});
        fill_rect(s.image, S, cx + 1, torso_bot - S / 8, cx + half_w, S - 2,
                  {body.r * 0.4, body.g * 0.4, body.b * 0.4});
        glyph_cx = cx;
        glyph_cy = head_cy;
      }
      if (rng.uniform() < cfg.p_face) {
        const int g = std::max(1, S / 16);
        fill_rect(s.image, S, glyph_cx - g, glyph_cy - g, glyph_cx + g, glyph_cy + g,
                  {1.0, 1.0, 0.95});
        s.face_glyph = FaceGlyphMeta{static_cast<double>(glyph_cx) / S,
                                     static_cast<double>(std::clamp(glyph_cy, 0, S - 1)) / S};
      }
      ds.samples.push_back(std::move(s));
    }
  }
  ds.rebuild_session_index();
  return ds;
}

}  // namespace semreid::data
