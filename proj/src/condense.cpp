#include "semreid/condense/condense.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "semreid/core/errors.hpp"
#include "semreid/core/serialize.hpp"
#include "semreid/nn/activations.hpp"
#include "semreid/nn/loss.hpp"
#include "semreid/nn/optim.hpp"

namespace semreid::condense {

void CondenseConfig::validate() const {
  if (condensation_factor < 1) throw ArchitectureError("condensation factor C must be >= 1");
  if (groups < 1) throw ArchitectureError("groups must be >= 1");
  if (epochs < 0) throw ArchitectureError("epochs must be >= 0");
  if (stage_depths.empty() || stage_depths.size() != growth_rates.size())
    throw ArchitectureError("stage_depths and growth_rates must be non-empty and equal length");
  if (num_classes < 2) throw ArchitectureError("num_classes must be >= 2");
  // every 1x1 learned group conv input must be divisible by the group count
  int ch = stem_channels;
  for (std::size_t s = 0; s < stage_depths.size(); ++s) {
    for (int d = 0; d < stage_depths[s]; ++d) {
      if (ch % groups != 0)
        throw ArchitectureError("1x1 layer input channels " + std::to_string(ch) +
                                " not divisible by groups " + std::to_string(groups));
      const int bott = bottleneck * growth_rates[s];
      if (bott % groups != 0)
        throw ArchitectureError("bottleneck channels " + std::to_string(bott) +
                                " not divisible by groups " + std::to_string(groups));
      ch += growth_rates[s];
    }
  }
}

DenseBlock::DenseBlock(int in_channels, int depth, int growth, int bottleneck, int groups)
    : in_channels_(in_channels), depth_(depth), growth_(growth) {
  int ch = in_channels;
  for (int d = 0; d < depth; ++d) {
    auto unit = std::make_unique<nn::Sequential>();
    unit->add<nn::BatchNorm2d>(ch);
    bns_.push_back(static_cast<nn::BatchNorm2d*>(unit->layer(unit->size() - 1)));
    unit->add<nn::ReLU>();
    const int bott = bottleneck * growth;
    auto* lgc = unit->add<nn::Conv2d>(ch, bott, 1, 1, 0, 1, false);
    lgc->enable_mask();
    lgc_.push_back(lgc);
    unit->add<nn::BatchNorm2d>(bott);
    bns_.push_back(static_cast<nn::BatchNorm2d*>(unit->layer(unit->size() - 1)));
    unit->add<nn::ReLU>();
    unit->add<nn::Conv2d>(bott, growth, 3, 1, 1, groups, false);
    unit_in_channels_.push_back(ch);
    units_.push_back(std::move(unit));
    ch += growth;
  }
}

Tensor DenseBlock::forward(const Tensor& x, bool train) {
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor feats{n, out_channels(), h, w};
  // copy block input into the front channels
  for (int i = 0; i < n; ++i)
    std::copy(x.data() + static_cast<std::size_t>(i) * in_channels_ * plane,
              x.data() + static_cast<std::size_t>(i + 1) * in_channels_ * plane,
              feats.data() + static_cast<std::size_t>(i) * out_channels() * plane);
  int ch = in_channels_;
  for (auto& unit : units_) {
    // view of the first ch channels
    Tensor view{n, ch, h, w};
    for (int i = 0; i < n; ++i)
      std::copy(feats.data() + static_cast<std::size_t>(i) * out_channels() * plane,
                feats.data() + (static_cast<std::size_t>(i) * out_channels() + ch) * plane,
                view.data() + static_cast<std::size_t>(i) * ch * plane);
    Tensor y = unit->forward(view, train);
    for (int i = 0; i < n; ++i)
      std::copy(y.data() + static_cast<std::size_t>(i) * growth_ * plane,
                y.data() + static_cast<std::size_t>(i + 1) * growth_ * plane,
                feats.data() + (static_cast<std::size_t>(i) * out_channels() + ch) * plane);
    ch += growth_;
  }
  if (train) {
    cached_n_ = n;
    cached_h_ = h;
    cached_w_ = w;
  }
  return feats;
}

Tensor DenseBlock::backward(const Tensor& grad_out) {
  const int n = cached_n_, h = cached_h_, w = cached_w_;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  // accumulated gradient over the growing feature map
  Tensor g = grad_out;
  for (int u = depth_ - 1; u >= 0; --u) {
    const int ch = unit_in_channels_[static_cast<std::size_t>(u)];
    Tensor g_y{n, growth_, h, w};
    for (int i = 0; i < n; ++i)
      std::copy(g.data() + (static_cast<std::size_t>(i) * out_channels() + ch) * plane,
                g.data() + (static_cast<std::size_t>(i) * out_channels() + ch + growth_) * plane,
                g_y.data() + static_cast<std::size_t>(i) * growth_ * plane);
    Tensor g_in = units_[static_cast<std::size_t>(u)]->backward(g_y);
    // fold the unit's input gradient back into the shared prefix
    for (int i = 0; i < n; ++i) {
      double* dst = g.data() + static_cast<std::size_t>(i) * out_channels() * plane;
      const double* src = g_in.data() + static_cast<std::size_t>(i) * ch * plane;
      for (std::size_t j = 0; j < static_cast<std::size_t>(ch) * plane; ++j) dst[j] += src[j];
    }
  }
  Tensor grad_in{n, in_channels_, h, w};
  for (int i = 0; i < n; ++i)
    std::copy(g.data() + static_cast<std::size_t>(i) * out_channels() * plane,
              g.data() + (static_cast<std::size_t>(i) * out_channels() + in_channels_) * plane,
              grad_in.data() + static_cast<std::size_t>(i) * in_channels_ * plane);
  return grad_in;
}

std::vector<Tensor*> DenseBlock::params() {
  std::vector<Tensor*> out;
  for (auto& u : units_)
    for (Tensor* p : u->params()) out.push_back(p);
  return out;
}

std::vector<Tensor*> DenseBlock::grads() {
  std::vector<Tensor*> out;
  for (auto& u : units_)
    for (Tensor* g : u->grads()) out.push_back(g);
  return out;
}

void DenseBlock::init(Rng& rng) {
  for (auto& u : units_) u->init(rng);
}

nn::LayerStats DenseBlock::stats(int in_h, int in_w) const {
  nn::LayerStats total;
  for (const auto& u : units_) {
    nn::LayerStats s = u->stats(in_h, in_w);
    total.params += s.params;
    total.mult_adds += s.mult_adds;
  }
  return total;
}

ReidModel::ReidModel(const CondenseConfig& config, std::uint64_t seed) : config_(config) {
  config.validate();
  net_.add<nn::Conv2d>(3, config.stem_channels, 3, 1, 1, 1, false);
  int ch = config.stem_channels;
  for (std::size_t s = 0; s < config.stage_depths.size(); ++s) {
    auto* block = net_.add<DenseBlock>(ch, config.stage_depths[s], config.growth_rates[s],
                                       config.bottleneck, config.groups);
    for (nn::Conv2d* c : block->learned_group_convs()) lgc_.push_back(c);
    ch = block->out_channels();
    if (s + 1 < config.stage_depths.size()) net_.add<nn::AvgPool2x2>();
  }
  net_.add<nn::BatchNorm2d>(ch);
  net_.add<nn::ReLU>();
  net_.add<nn::GlobalAvgPool>();
  net_.add<nn::Linear>(ch, config.num_classes);
  Rng rng(seed);
  net_.init(rng);
}

Tensor ReidModel::forward_logits(const Tensor& images, bool train) {
  if (images.dim(2) != config_.input_size || images.dim(3) != config_.input_size)
    throw ShapeError("input is " + std::to_string(images.dim(2)) + "x" +
                     std::to_string(images.dim(3)) + ", model expects " +
                     std::to_string(config_.input_size) + "x" +
                     std::to_string(config_.input_size));
  return net_.forward(images, train);
}

Tensor ReidModel::backward(const Tensor& grad_logits) { return net_.backward(grad_logits); }

std::vector<Tensor*> ReidModel::params() { return net_.params(); }
std::vector<Tensor*> ReidModel::grads() { return net_.grads(); }

std::vector<Tensor*> ReidModel::buffers() {
  std::vector<Tensor*> out;
  for (const auto& l : net_.layers()) {
    if (auto* bn = dynamic_cast<nn::BatchNorm2d*>(l.get())) {
      for (Tensor* b : bn->buffers()) out.push_back(b);
    } else if (auto* block = dynamic_cast<DenseBlock*>(l.get())) {
      for (nn::BatchNorm2d* bn2 : block->batch_norms())
        for (Tensor* b : bn2->buffers()) out.push_back(b);
    }
  }
  return out;
}

void ReidModel::zero_grad() { net_.zero_grad(); }

void ReidModel::apply_masks() {
  for (nn::Conv2d* c : lgc_) c->apply_mask();
}

nn::LayerStats ReidModel::total_stats() const {
  return net_.stats(config_.input_size, config_.input_size);
}

ReidModel build_condensenet(const CondenseConfig& config, std::uint64_t seed) {
  return ReidModel(config, seed);
}

void condensation_step(ReidModel& model, int stage) {
  const int C = model.config_.condensation_factor;
  if (stage != model.stage_ + 1 || stage > C - 1)
    throw ScheduleError("condensation stage " + std::to_string(stage) +
                        " out of order (current " + std::to_string(model.stage_) + ", C=" +
                        std::to_string(C) + ")");
  const int groups = model.config_.groups;
  for (nn::Conv2d* conv : model.lgc_) {
    const int c_in = conv->in_channels(), c_out = conv->out_channels();
    const int per_group = c_out / groups;
    Tensor& w = conv->weight();
    Tensor& m = conv->mask();
    const int keep = static_cast<int>(
        std::ceil(static_cast<double>(C - stage) / C * static_cast<double>(c_in)));
    for (int g = 0; g < groups; ++g) {
      // importance of input channel i for this output group: accumulated L1
      // over the group's rows
      std::vector<std::pair<double, int>> live;
      for (int i = 0; i < c_in; ++i) {
        if (m.at(g * per_group, i) == 0.0) continue;  // mask is uniform within a group
        double imp = 0.0;
        for (int o = g * per_group; o < (g + 1) * per_group; ++o) imp += std::abs(w.at(o, i));
        live.push_back({imp, i});
      }
      const int prune = static_cast<int>(live.size()) - keep;
      if (prune <= 0) continue;
      // smallest magnitude first; ties broken by ascending channel index
      std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
      });
      for (int p = 0; p < prune; ++p) {
        const int i = live[static_cast<std::size_t>(p)].second;
        for (int o = g * per_group; o < (g + 1) * per_group; ++o) {
          m.at(o, i) = 0.0;
          w.at(o, i) = 0.0;
        }
      }
    }
  }
  model.stage_ = stage;
}

std::vector<int> condensation_epochs(const CondenseConfig& config) {
  std::vector<int> out;
  const int C = config.condensation_factor;
  if (C <= 1) return out;
  // stages spread evenly over the first half of training
  const double half = config.epochs / 2.0;
  for (int s = 1; s <= C - 1; ++s)
    out.push_back(static_cast<int>(std::floor(half * s / (C - 1))));
  return out;
}

namespace {

Tensor batch_images(const std::vector<const data::Sample*>& batch) {
  const int n = static_cast<int>(batch.size());
  const int h = batch[0]->image.dim(1), w = batch[0]->image.dim(2);
  Tensor x{n, 3, h, w};
  for (int i = 0; i < n; ++i)
    std::copy(batch[i]->image.data(), batch[i]->image.data() + batch[i]->image.numel(),
              x.data() + static_cast<std::size_t>(i) * batch[i]->image.numel());
  return x;
}

Tensor batch_targets(const std::vector<const data::Sample*>& batch, int num_classes) {
  const int n = static_cast<int>(batch.size());
  Tensor t{n, num_classes};
  for (int i = 0; i < n; ++i) {
    if (batch[i]->soft_label) {
      const auto& sl = *batch[i]->soft_label;
      if (static_cast<int>(sl.size()) != num_classes)
        throw TrainingError("soft label size mismatch");
      for (int j = 0; j < num_classes; ++j) t.at(i, j) = sl[static_cast<std::size_t>(j)];
    } else {
      t.at(i, batch[i]->label) = 1.0;
    }
  }
  return t;
}

}  // namespace

TrainResult train_reid(ReidModel& model, const std::vector<data::Sample>& train_set,
                       std::uint64_t seed, const std::string& checkpoint_dir) {
  if (train_set.empty()) throw TrainingError("training set is empty");
  const CondenseConfig& cfg = model.config();
  TrainResult result;
  if (cfg.epochs == 0) return result;
  nn::SgdNesterov opt(model.params(), model.grads(), cfg.lr0, cfg.momentum);
  Rng rng(seed);
  const std::vector<int> cond_epochs = condensation_epochs(cfg);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::string last_ckpt;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < cond_epochs.size(); ++s)
      if (cond_epochs[s] == epoch && model.current_stage() == static_cast<int>(s))
        condensation_step(model, static_cast<int>(s) + 1);
    const double lr = nn::cosine_lr(cfg.lr0, epoch, cfg.epochs);
    opt.set_lr(lr);
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0, batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const data::Sample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);
      Tensor x = batch_images(batch);
      Tensor targets = batch_targets(batch, cfg.num_classes);
      Tensor logits = model.forward_logits(x, true);
      Tensor grad;
      const double loss = nn::cross_entropy(logits, targets, grad);
      if (!std::isfinite(loss)) {
        if (!checkpoint_dir.empty()) {
          std::filesystem::create_directories(checkpoint_dir);
          last_ckpt = checkpoint_dir + "/reid_diverged_epoch" + std::to_string(epoch) + ".ckpt";
          save_model(model, last_ckpt);
        }
        throw DivergenceError("classifier loss is not finite at epoch " + std::to_string(epoch),
                              last_ckpt);
      }
      model.zero_grad();
      model.backward(grad);
      opt.step();
      model.apply_masks();  // pruned connections stay dead
      loss_sum += loss;
      ++batches;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        int argmax = 0;
        for (int j = 1; j < cfg.num_classes; ++j)
          if (logits.at(static_cast<int>(i), j) > logits.at(static_cast<int>(i), argmax))
            argmax = j;
        if (argmax == batch[i]->label) ++correct;
        ++seen;
      }
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    log.train_prec1 = seen > 0 ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    log.lr = lr;
    result.log.push_back(log);
    model.set_epoch(epoch + 1);
  }
  // any condensing stages scheduled at or past the last epoch still apply
  for (std::size_t s = 0; s < cond_epochs.size(); ++s)
    if (model.current_stage() == static_cast<int>(s) && cond_epochs[s] >= cfg.epochs)
      condensation_step(model, static_cast<int>(s) + 1);
  return result;
}

std::vector<double> infer(ReidModel& model, const Tensor& image) {
  Tensor x{1, image.dim(0), image.dim(1), image.dim(2)};
  std::copy(image.data(), image.data() + image.numel(), x.data());
  Tensor logits = model.forward_logits(x, false);
  Tensor p = nn::softmax(logits);
  std::vector<double> out(static_cast<std::size_t>(p.dim(1)));
  for (int j = 0; j < p.dim(1); ++j) out[static_cast<std::size_t>(j)] = p.at(0, j);
  return out;
}

Tensor score_samples(ReidModel& model, const std::vector<data::Sample>& samples) {
  const int num_classes = model.config().num_classes;
  Tensor scores{static_cast<int>(samples.size()), num_classes};
  const int bs = model.config().batch_size;
  for (std::size_t start = 0; start < samples.size(); start += bs) {
    const std::size_t end = std::min(samples.size(), start + bs);
    std::vector<const data::Sample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&samples[i]);
    Tensor logits = model.forward_logits(batch_images(batch), false);
    Tensor p = nn::softmax(logits);
    for (std::size_t i = start; i < end; ++i)
      for (int j = 0; j < num_classes; ++j)
        scores.at(static_cast<int>(i), j) = p.at(static_cast<int>(i - start), j);
  }
  return scores;
}

ModelCost count_params_flops(const ReidModel& model) {
  const nn::LayerStats s = model.total_stats();
  return {s.params, s.mult_adds};
}

namespace {
constexpr std::uint32_t kReidMagic = 0x53524332;  // "SRC2"
}

void save_model(const ReidModel& model, const std::string& path) {
  auto& m = const_cast<ReidModel&>(model);
  BinaryWriter w(path);
  w.u32(kReidMagic);
  w.u32(1);
  const CondenseConfig& c = model.config_;
  w.u32(static_cast<std::uint32_t>(c.input_size));
  w.u32(static_cast<std::uint32_t>(c.stage_depths.size()));
  for (int d : c.stage_depths) w.u32(static_cast<std::uint32_t>(d));
  for (int g : c.growth_rates) w.u32(static_cast<std::uint32_t>(g));
  w.u32(static_cast<std::uint32_t>(c.stem_channels));
  w.u32(static_cast<std::uint32_t>(c.bottleneck));
  w.u32(static_cast<std::uint32_t>(c.groups));
  w.u32(static_cast<std::uint32_t>(c.condensation_factor));
  w.u32(static_cast<std::uint32_t>(c.epochs));
  w.f64(c.lr0);
  w.f64(c.momentum);
  w.u32(static_cast<std::uint32_t>(c.num_classes));
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.u32(static_cast<std::uint32_t>(model.stage_));
  w.u32(static_cast<std::uint32_t>(model.epoch_));
  auto params = m.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (Tensor* p : params) w.tensor(*p);
  auto buffers = m.buffers();
  w.u32(static_cast<std::uint32_t>(buffers.size()));
  for (Tensor* b : buffers) w.tensor(*b);
  w.u32(static_cast<std::uint32_t>(m.lgc_.size()));
  for (nn::Conv2d* conv : m.lgc_) w.tensor(conv->mask());
}

ReidModel load_model(const std::string& path) {
  BinaryReader r(path);
  if (r.u32() != kReidMagic) throw LoadError("not a classifier checkpoint: " + path);
  if (r.u32() != 1) throw LoadError("unsupported classifier checkpoint version: " + path);
  CondenseConfig c;
  c.input_size = static_cast<int>(r.u32());
  const std::uint32_t stages = r.u32();
  c.stage_depths.resize(stages);
  c.growth_rates.resize(stages);
  for (int& d : c.stage_depths) d = static_cast<int>(r.u32());
  for (int& g : c.growth_rates) g = static_cast<int>(r.u32());
  c.stem_channels = static_cast<int>(r.u32());
  c.bottleneck = static_cast<int>(r.u32());
  c.groups = static_cast<int>(r.u32());
  c.condensation_factor = static_cast<int>(r.u32());
  c.epochs = static_cast<int>(r.u32());
  c.lr0 = r.f64();
  c.momentum = r.f64();
  c.num_classes = static_cast<int>(r.u32());
  c.batch_size = static_cast<int>(r.u32());
  ReidModel model(c, 0);
  model.stage_ = static_cast<int>(r.u32());
  model.epoch_ = static_cast<int>(r.u32());
  auto params = model.params();
  if (r.u32() != params.size()) throw LoadError("classifier checkpoint parameter mismatch");
  for (Tensor* p : params) *p = r.tensor();
  auto buffers = model.buffers();
  if (r.u32() != buffers.size()) throw LoadError("classifier checkpoint buffer mismatch");
  for (Tensor* b : buffers) *b = r.tensor();
  if (r.u32() != model.lgc_.size()) throw LoadError("classifier checkpoint mask mismatch");
  for (nn::Conv2d* conv : model.lgc_) conv->mask() = r.tensor();
  return model;
}

void export_train_log(const TrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write training log: " + path);
  out << "epoch,loss,train_prec1,lr\n";
  for (const EpochLog& l : result.log)
    out << l.epoch << "," << l.loss << "," << l.train_prec1 << "," << l.lr << "\n";
}

}  // namespace semreid::condense
