#pragma once

#include <stdexcept>
#include <string>

namespace semreid {

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HoldoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DetectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArchitectureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GatingViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyFilteredSetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegistryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what, std::string checkpoint = "")
      : std::runtime_error("stage '" + stage + "': " + what),
        stage_name(stage),
        checkpoint_ref(std::move(checkpoint)) {}
  std::string stage_name;
  std::string checkpoint_ref;  // resumable checkpoint, empty if none was written
};

// Thrown when a training step produces a non-finite loss. Carries a path to
// the last good checkpoint when one has been written.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what, std::string checkpoint = "")
      : std::runtime_error(what), checkpoint_ref(std::move(checkpoint)) {}
  std::string checkpoint_ref;
};

}  // namespace semreid
