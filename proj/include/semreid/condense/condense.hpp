#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semreid/data/dataset.hpp"
#include "semreid/nn/basic.hpp"
#include "semreid/nn/batchnorm.hpp"
#include "semreid/nn/conv.hpp"
#include "semreid/nn/sequential.hpp"

namespace semreid::condense {

struct CondenseConfig {
  int input_size = 32;
  std::vector<int> stage_depths = {2, 2};
  std::vector<int> growth_rates = {8, 8};  // one per stage
  int stem_channels = 16;
  int bottleneck = 4;          // 1x1 output = bottleneck * growth
  int groups = 4;              // output groups of the learned group convs
  int condensation_factor = 4; // C
  int epochs = 30;
  double lr0 = 0.1;            // cosine-annealed
  double momentum = 0.9;       // Nesterov
  int num_classes = 4;         // N + 1
  int batch_size = 32;

  void validate() const;
};

// Dense unit: BN-ReLU-1x1 learned group conv, BN-ReLU-3x3 group conv.
// Units inside a block consume the concatenation of the block input and all
// previous unit outputs.
class DenseBlock : public nn::Layer {
 public:
  DenseBlock(int in_channels, int depth, int growth, int bottleneck, int groups);

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  void init(Rng& rng) override;
  nn::LayerStats stats(int in_h, int in_w) const override;

  int out_channels() const { return in_channels_ + depth_ * growth_; }
  std::vector<nn::Conv2d*> learned_group_convs() { return lgc_; }
  std::vector<nn::BatchNorm2d*> batch_norms() { return bns_; }

 private:
  int in_channels_, depth_, growth_;
  std::vector<std::unique_ptr<nn::Sequential>> units_;
  std::vector<nn::Conv2d*> lgc_;
  std::vector<nn::BatchNorm2d*> bns_;
  std::vector<int> unit_in_channels_;
  Tensor cached_features_;  // concatenated block features from forward
  int cached_h_ = 0, cached_w_ = 0, cached_n_ = 0;
  std::vector<Tensor> unit_outputs_;  // per-unit outputs (train mode)
};

// The compressed Re-ID classifier.
class ReidModel {
 public:
  ReidModel(const CondenseConfig& config, std::uint64_t seed);

  // raw class logits, (n, N+1); input (n, 3, S, S)
  Tensor forward_logits(const Tensor& images, bool train);
  Tensor backward(const Tensor& grad_logits);

  std::vector<Tensor*> params();
  std::vector<Tensor*> grads();
  std::vector<Tensor*> buffers();
  void zero_grad();
  void apply_masks();

  const CondenseConfig& config() const { return config_; }
  int current_stage() const { return stage_; }
  int epoch() const { return epoch_; }
  void set_epoch(int e) { epoch_ = e; }
  std::vector<nn::Conv2d*>& learned_group_convs() { return lgc_; }

  friend void condensation_step(ReidModel& model, int stage);
  friend void save_model(const ReidModel& model, const std::string& path);
  friend ReidModel load_model(const std::string& path);

  nn::LayerStats total_stats() const;

 private:
  CondenseConfig config_;
  nn::Sequential net_;  // stem, blocks, transitions, head (up to logits)
  std::vector<nn::Conv2d*> lgc_;
  int stage_ = 0;
  int epoch_ = 0;
  Tensor cached_logits_;
};

ReidModel build_condensenet(const CondenseConfig& config, std::uint64_t seed);

// One condensing stage: per learned group conv and output group, the
// lowest-importance live input connections are masked so exactly
// ceil((C - stage)/C * fan_in) remain. Stages must arrive in order.
void condensation_step(ReidModel& model, int stage);

// epochs (0-based) at which condensing stages fire: stage s during the first
// half of training, evenly spaced
std::vector<int> condensation_epochs(const CondenseConfig& config);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_prec1 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
};

TrainResult train_reid(ReidModel& model, const std::vector<data::Sample>& train_set,
                       std::uint64_t seed, const std::string& checkpoint_dir = "");

std::vector<double> infer(ReidModel& model, const Tensor& image);

// scores for a list of samples as an M x (N+1) matrix
Tensor score_samples(ReidModel& model, const std::vector<data::Sample>& samples);

struct ModelCost {
  std::int64_t params = 0;
  std::int64_t mult_adds = 0;
};

ModelCost count_params_flops(const ReidModel& model);

void save_model(const ReidModel& model, const std::string& path);
ReidModel load_model(const std::string& path);

void export_train_log(const TrainResult& result, const std::string& path);

}  // namespace semreid::condense
