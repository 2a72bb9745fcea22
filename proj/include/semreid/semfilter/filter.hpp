#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "semreid/core/errors.hpp"
#include "semreid/data/dataset.hpp"

namespace semreid::semfilter {

struct Keypoint {
  double x = 0.0;  // normalized [0,1]
  double y = 0.0;
  double confidence = 0.0;
};

struct KeypointDetection {
  std::vector<Keypoint> keypoints;
};

struct FilterVerdict {
  int present = 0;  // 1 iff at least one keypoint clears the threshold
  KeypointDetection detection;
};

// Detector plug-in contract: an image (with its generation metadata, when
// the sample carries any) goes in, a keypoint list with confidences comes
// out. Implementations must state whether a shared instance may be called
// from multiple threads.
class KeypointDetector {
 public:
  virtual ~KeypointDetector() = default;
  virtual KeypointDetection detect(const data::Sample& sample) const = 0;
  virtual std::string name() const = 0;
  virtual bool thread_safe() const { return true; }
};

// Exact detector for the toy corpus: reads the recorded face-glyph metadata.
class OracleDetector : public KeypointDetector {
 public:
  KeypointDetection detect(const data::Sample& sample) const override {
    KeypointDetection det;
    if (sample.face_glyph)
      det.keypoints.push_back({sample.face_glyph->x, sample.face_glyph->y, 1.0});
    return det;
  }
  std::string name() const override { return "oracle"; }
};

// Pixel-space detector for synthetic toy imagery, where no generation
// metadata exists: scans for the near-white glyph color.
class GlyphPixelDetector : public KeypointDetector {
 public:
  explicit GlyphPixelDetector(double min_value = 0.75) : min_value_(min_value) {}
  KeypointDetection detect(const data::Sample& sample) const override;
  std::string name() const override { return "glyph-pixel"; }

 private:
  double min_value_;
};

// Stand-in for an external detector that has not been plugged in; any use
// fails loudly instead of silently skipping the filter.
class UnavailableDetector : public KeypointDetector {
 public:
  explicit UnavailableDetector(std::string which) : which_(std::move(which)) {}
  KeypointDetection detect(const data::Sample&) const override {
    throw DetectorError("detector '" + which_ + "' is not available");
  }
  std::string name() const override { return which_; }

 private:
  std::string which_;
};

std::unique_ptr<KeypointDetector> make_detector(const std::string& kind);

KeypointDetection detect_keypoints(const data::Sample& sample, const KeypointDetector& detector);

FilterVerdict face_present(const KeypointDetection& detection, double confidence_threshold);

struct ClassRetention {
  std::size_t kept = 0;
  std::size_t total = 0;
};

struct FilterStats {
  std::map<int, ClassRetention> per_class;
  std::size_t kept = 0;
  std::size_t total = 0;
  double retention() const {
    return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
  }
};

struct FilterResult {
  std::vector<data::Sample> kept;
  FilterStats stats;
};

FilterResult filter_samples(const std::vector<data::Sample>& samples,
                            const KeypointDetector& detector, double threshold);

}  // namespace semreid::semfilter
