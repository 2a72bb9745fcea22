#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semreid/core/tensor.hpp"

namespace semreid::data {

enum class Origin { original, synthetic };

// Toy-corpus generation metadata: normalized face-glyph center. Present only
// when the rendered patch actually contains the glyph; the oracle keypoint
// detector reads this.
struct FaceGlyphMeta {
  double x = 0.0;
  double y = 0.0;
};

struct Sample {
  Tensor image;  // (3, H, W), values in [-1, 1]
  int label = 0;  // identity j in {0..N}, 0 = unknown
  int session_id = 0;
  int tracklet_id = 0;
  Origin origin = Origin::original;
  std::optional<std::string> generator_id;     // set iff origin == synthetic
  std::optional<FaceGlyphMeta> face_glyph;     // toy-corpus metadata
  std::optional<std::vector<double>> soft_label;  // target distribution over N+1 classes
};

struct Dataset {
  std::vector<Sample> samples;
  int n_identities = 0;  // N; labels run 0..N
  std::map<int, std::vector<std::size_t>> session_index;

  void rebuild_session_index() {
    session_index.clear();
    for (std::size_t i = 0; i < samples.size(); ++i)
      session_index[samples[i].session_id].push_back(i);
  }
};

struct SplitFold {
  std::vector<int> train_sessions;
  std::vector<int> test_sessions;
};

struct SplitPlan {
  std::vector<SplitFold> folds;
  double holdout_fraction = 0.15;
};

// Manifest ingestion: UTF-8 text, header "path,label,session,tracklet",
// one row per sample, image paths relative to the manifest's directory.
Dataset load_dataset(const std::string& manifest_path, int n_identities);

SplitPlan make_loso_splits(const Dataset& dataset);

// Per class: max(1, floor(fraction * count)) samples to test, chosen by a
// seeded deterministic shuffle.
std::pair<Dataset, Dataset> holdout_per_class(const Dataset& dataset, double fraction,
                                              std::uint64_t seed = 0);

// Views of a dataset restricted to a session set / a class.
Dataset subset_by_sessions(const Dataset& dataset, const std::vector<int>& sessions);
Dataset subset_by_label(const Dataset& dataset, int label);

}  // namespace semreid::data
