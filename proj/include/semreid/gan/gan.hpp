#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semreid/data/dataset.hpp"
#include "semreid/nn/optim.hpp"
#include "semreid/nn/sequential.hpp"
#include "semreid/semfilter/filter.hpp"

namespace semreid::gan {

struct GanConfig {
  int latent_dim = 64;
  int image_size = 32;  // power of two, >= 8
  // channels at spatial levels 4, 8, ..., image_size/2 (generator view);
  // length must equal log2(image_size) - 2
  std::vector<int> channel_schedule = {128, 64, 32};
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 16;
  std::int64_t max_iterations = 2000;
  bool filter_enabled = true;
  double filter_threshold = 0.0;
  std::int64_t checkpoint_every = 0;  // 0 = no periodic checkpoints
  std::string checkpoint_dir;

  void validate() const;
};

struct LossRecord {
  double d_loss_real = 0.0;
  double d_loss_fake = 0.0;
  double g_loss = 0.0;
};

enum class Provenance { scratch, warm_started };

// One generator/discriminator pair with optimizer and bookkeeping state.
// Owned exclusively by a single training run; move-only.
struct GanState {
  GanConfig config;
  std::string name = "G";  // generator identity, e.g. "G", "G_0", "G_3"
  Provenance provenance = Provenance::scratch;
  std::string base_id;  // set when warm-started
  std::int64_t iteration = 0;
  std::vector<LossRecord> loss_history;
  Rng rng;

  std::unique_ptr<nn::Sequential> generator;
  std::unique_ptr<nn::Sequential> discriminator;
  std::unique_ptr<nn::Adam> opt_g;
  std::unique_ptr<nn::Adam> opt_d;

  // gating instrumentation: every real batch consumed vs. those whose
  // samples all re-passed the semantic filter
  std::int64_t real_batches_consumed = 0;
  std::int64_t real_batches_approved = 0;

  // staged d_loss_real waiting for the fake half of the iteration
  std::optional<double> pending_d_loss_real;
};

GanState init_dcgan(const GanConfig& config, std::uint64_t seed, const std::string& name = "G");

// Step (1): update D on a batch of real, filter-approved samples under
// -log(D(x)). When the filter is enabled the verdicts are re-asserted here.
double discriminator_step_real(GanState& state, const std::vector<data::Sample>& real_batch,
                               const semfilter::KeypointDetector* detector = nullptr);

// Step (2): update D on generated samples under -log(1 - D(G(z))), then G
// under -log(D(G(z))). Completes the iteration's loss record.
std::pair<double, double> adversarial_step_fake(GanState& state, const Tensor& z);

Tensor draw_latent(GanState& state, int batch);

struct TrainSchedule {
  std::int64_t iterations = 0;
};

void train_dcgan(GanState& state, const data::Dataset& dataset,
                 const semfilter::KeypointDetector* detector, double threshold,
                 const TrainSchedule& schedule);

GanState warm_start(const GanState& base, const GanConfig& target_config, int target_class);

enum class Labeling { unknown_class, uniform_soft, class_label };

std::vector<data::Sample> sample_generator(GanState& state, int count, std::uint64_t seed,
                                           int label, Labeling labeling, int n_identities);

enum class PlanMode { generic, per_class };

struct PlanEntry {
  std::string generator;  // "G", "G_0", "G_<j>"
  int count = 0;
  Labeling labeling = Labeling::uniform_soft;
  int label = 0;
};

struct AugmentationPlan {
  PlanMode mode = PlanMode::generic;
  std::vector<PlanEntry> entries;
  double synth_to_original_ratio = 0.0;
  int total_synthetic() const {
    int t = 0;
    for (const auto& e : entries) t += e.count;
    return t;
  }
};

AugmentationPlan build_augmentation_plan(PlanMode mode, const std::vector<int>& counts,
                                         Labeling labeling, int n_identities,
                                         std::size_t original_count);

void save_checkpoint(const GanState& state, const std::string& path);
GanState load_checkpoint(const std::string& path);

// loss history as delimited text (iteration, d_loss_real, d_loss_fake, g_loss)
void export_loss_history(const GanState& state, const std::string& path);

// parameter/buffer access helpers shared with tests and checkpoints
std::vector<Tensor*> collect_buffers(nn::Sequential& net);

}  // namespace semreid::gan
