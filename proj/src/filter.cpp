#include "semreid/semfilter/filter.hpp"

namespace semreid::semfilter {

KeypointDetection GlyphPixelDetector::detect(const data::Sample& sample) const {
  const Tensor& img = sample.image;
  const int h = img.dim(1), w = img.dim(2);
  KeypointDetection det;
  double best = -1.0;
  int bx = 0, by = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double r = img[(0 * static_cast<std::size_t>(h) + y) * w + x];
      const double g = img[(1 * static_cast<std::size_t>(h) + y) * w + x];
      const double b = img[(2 * static_cast<std::size_t>(h) + y) * w + x];
      const double v = std::min(r, std::min(g, b));
      if (v > best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  if (best >= min_value_) {
    // confidence scales with how far the brightest pixel clears the cut
    const double conf = std::min(1.0, (best - min_value_) / (1.0 - min_value_) + 0.5);
    det.keypoints.push_back({static_cast<double>(bx) / w, static_cast<double>(by) / h, conf});
  }
  return det;
}

std::unique_ptr<KeypointDetector> make_detector(const std::string& kind) {
  if (kind == "oracle") return std::make_unique<OracleDetector>();
  if (kind == "glyph-pixel") return std::make_unique<GlyphPixelDetector>();
  if (kind == "external") return std::make_unique<UnavailableDetector>("external");
  throw ConfigError("unknown detector kind: " + kind);
}

KeypointDetection detect_keypoints(const data::Sample& sample,
                                   const KeypointDetector& detector) {
  KeypointDetection det = detector.detect(sample);
  for (const Keypoint& kp : det.keypoints) {
    if (kp.confidence < 0.0 || kp.confidence > 1.0 || kp.x < 0.0 || kp.x > 1.0 || kp.y < 0.0 ||
        kp.y > 1.0)
      throw DetectorError("detector '" + detector.name() +
                          "' returned out-of-range keypoint");
  }
  return det;
}

FilterVerdict face_present(const KeypointDetection& detection, double confidence_threshold) {
  if (confidence_threshold < 0.0 || confidence_threshold > 1.0)
    throw ConfigError("confidence threshold must lie in [0,1]");
  FilterVerdict v;
  v.detection = detection;
  for (const Keypoint& kp : detection.keypoints)
    if (kp.confidence >= confidence_threshold) {
      v.present = 1;
      break;
    }
  return v;
}

FilterResult filter_samples(const std::vector<data::Sample>& samples,
                            const KeypointDetector& detector, double threshold) {
  FilterResult res;
  for (const data::Sample& s : samples) {
    auto& cls = res.stats.per_class[s.label];
    ++cls.total;
    ++res.stats.total;
    const FilterVerdict v = face_present(detect_keypoints(s, detector), threshold);
    if (v.present == 1) {
      res.kept.push_back(s);
      ++cls.kept;
      ++res.stats.kept;
    }
  }
  return res;
}

}  // namespace semreid::semfilter
