#pragma once

#include <cstdint>

#include "semreid/data/dataset.hpp"

namespace semreid::data {

// Procedural stand-in corpus: "person" patches whose identity is a body
// color/shape signature, an optional bright face glyph recorded in metadata
// (so the oracle keypoint detector is exact), and class 0 as clutter.
struct ToyConfig {
  int n_identities = 3;     // N; labels run 0..N
  int sessions = 4;
  int per_session = 50;     // samples per session, spread over classes
  int patch_size = 32;
  double p_face = 0.6;      // probability a patch carries the face glyph
};

Dataset synth_toy_corpus(const ToyConfig& config, std::uint64_t seed);

}  // namespace semreid::data
