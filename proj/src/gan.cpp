#include "semreid/gan/gan.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "semreid/core/serialize.hpp"
#include "semreid/nn/activations.hpp"
#include "semreid/nn/batchnorm.hpp"
#include "semreid/nn/conv.hpp"
#include "semreid/nn/loss.hpp"

namespace semreid::gan {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int ladder_rungs(int image_size) {
  int r = 0, s = image_size;
  while (s > 4) {
    s /= 2;
    ++r;
  }
  return r;  // number of stride-2 steps between 4x4 and image_size
}

std::unique_ptr<nn::Sequential> build_generator(const GanConfig& cfg) {
  auto g = std::make_unique<nn::Sequential>();
  const auto& cs = cfg.channel_schedule;
  g->add<nn::ConvTranspose2d>(cfg.latent_dim, cs[0], 4, 1, 0, false);
  g->add<nn::BatchNorm2d>(cs[0]);
  g->add<nn::ReLU>();
  for (std::size_t i = 1; i < cs.size(); ++i) {
    g->add<nn::ConvTranspose2d>(cs[i - 1], cs[i], 4, 2, 1, false);
    g->add<nn::BatchNorm2d>(cs[i]);
    g->add<nn::ReLU>();
  }
  g->add<nn::ConvTranspose2d>(cs.back(), 3, 4, 2, 1, false);
  g->add<nn::Tanh>();
  return g;
}

std::unique_ptr<nn::Sequential> build_discriminator(const GanConfig& cfg) {
  auto d = std::make_unique<nn::Sequential>();
  const auto& cs = cfg.channel_schedule;
  // mirror of the generator ladder; no batch norm on the input layer
  d->add<nn::Conv2d>(3, cs.back(), 4, 2, 1, 1, false);
  d->add<nn::LeakyReLU>(0.2);
  for (std::size_t i = cs.size() - 1; i > 0; --i) {
    d->add<nn::Conv2d>(cs[i], cs[i - 1], 4, 2, 1, 1, false);
    d->add<nn::BatchNorm2d>(cs[i - 1]);
    d->add<nn::LeakyReLU>(0.2);
  }
  d->add<nn::Conv2d>(cs[0], 1, 4, 1, 0, 1, true);
  d->add<nn::Sigmoid>();
  return d;
}

void dcgan_init(nn::Sequential& net, Rng& rng) {
  for (const auto& l : net.layers()) {
    if (auto* bn = dynamic_cast<nn::BatchNorm2d*>(l.get())) {
      bn->init(rng);
      // DCGAN recipe: scale drawn around 1
      for (Tensor* p : bn->params()) (void)p;
      rng.fill_normal(*bn->params()[0], 1.0, 0.02);
      bn->params()[1]->zero();
    } else {
      for (Tensor* p : l->params()) {
        if (p->ndim() >= 2)
          rng.fill_normal(*p, 0.0, 0.02);
        else
          p->zero();
      }
    }
  }
}

Tensor batch_from_samples(const std::vector<data::Sample>& batch) {
  const int n = static_cast<int>(batch.size());
  const int h = batch[0].image.dim(1), w = batch[0].image.dim(2);
  Tensor x{n, 3, h, w};
  for (int i = 0; i < n; ++i) {
    const Tensor& img = batch[i].image;
    std::copy(img.data(), img.data() + img.numel(),
              x.data() + static_cast<std::size_t>(i) * img.numel());
  }
  return x;
}

void make_optimizers(GanState& st) {
  st.opt_g = std::make_unique<nn::Adam>(st.generator->params(), st.generator->grads(),
                                        st.config.learning_rate, st.config.beta1,
                                        st.config.beta2);
  st.opt_d = std::make_unique<nn::Adam>(st.discriminator->params(), st.discriminator->grads(),
                                        st.config.learning_rate, st.config.beta1,
                                        st.config.beta2);
}

void copy_tensors(const std::vector<Tensor*>& src, const std::vector<Tensor*>& dst) {
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = *src[i];
}

}  // namespace

void GanConfig::validate() const {
  if (latent_dim < 1) throw ArchitectureError("latent_dim must be >= 1");
  if (batch_size < 2) throw ArchitectureError("batch_size must be >= 2");
  if (!is_pow2(image_size) || image_size < 8)
    throw ArchitectureError("image_size must be a power of two >= 8, got " +
                            std::to_string(image_size));
  const int rungs = ladder_rungs(image_size);
  if (static_cast<int>(channel_schedule.size()) != rungs)
    throw ArchitectureError("channel_schedule needs " + std::to_string(rungs) +
                            " entries for image_size " + std::to_string(image_size) + ", got " +
                            std::to_string(channel_schedule.size()));
  for (int c : channel_schedule)
    if (c < 1) throw ArchitectureError("channel_schedule entries must be >= 1");
}

std::vector<Tensor*> collect_buffers(nn::Sequential& net) {
  std::vector<Tensor*> out;
  for (const auto& l : net.layers())
    if (auto* bn = dynamic_cast<nn::BatchNorm2d*>(l.get()))
      for (Tensor* b : bn->buffers()) out.push_back(b);
  return out;
}

GanState init_dcgan(const GanConfig& config, std::uint64_t seed, const std::string& name) {
  config.validate();
  GanState st;
  st.config = config;
  st.name = name;
  st.rng = Rng(seed);
  st.generator = build_generator(config);
  st.discriminator = build_discriminator(config);
  dcgan_init(*st.generator, st.rng);
  dcgan_init(*st.discriminator, st.rng);
  make_optimizers(st);
  return st;
}

Tensor draw_latent(GanState& state, int batch) {
  Tensor z{batch, state.config.latent_dim, 1, 1};
  state.rng.fill_normal(z, 0.0, 1.0);
  return z;
}

double discriminator_step_real(GanState& state, const std::vector<data::Sample>& real_batch,
                               const semfilter::KeypointDetector* detector) {
  if (real_batch.empty()) throw TrainingError("discriminator_step_real: empty batch");
  ++state.real_batches_consumed;
  if (state.config.filter_enabled) {
    if (detector == nullptr)
      throw GatingViolationError("filter enabled but no detector supplied to re-assert gating");
    for (const data::Sample& s : real_batch) {
      const auto verdict = semfilter::face_present(semfilter::detect_keypoints(s, *detector),
                                                   state.config.filter_threshold);
      if (verdict.present != 1)
        throw GatingViolationError("real batch contains a sample that fails the semantic filter");
    }
    ++state.real_batches_approved;
  }
  Tensor x = batch_from_samples(real_batch);
  Tensor p = state.discriminator->forward(x, true);
  Tensor grad;
  const double loss = nn::nll_real(p, grad);
  if (!std::isfinite(loss)) throw DivergenceError("d_loss_real is not finite");
  state.discriminator->zero_grad();
  state.discriminator->backward(grad);
  state.opt_d->step();
  state.pending_d_loss_real = loss;
  return loss;
}

std::pair<double, double> adversarial_step_fake(GanState& state, const Tensor& z) {
  // D half: push generated samples toward the "synthetic" verdict
  Tensor fake = state.generator->forward(z, true);
  Tensor p_fake = state.discriminator->forward(fake, true);
  Tensor grad_d;
  const double d_loss_fake = nn::nll_fake(p_fake, grad_d);
  if (!std::isfinite(d_loss_fake)) throw DivergenceError("d_loss_fake is not finite");
  state.discriminator->zero_grad();
  state.discriminator->backward(grad_d);
  state.opt_d->step();

  // G half: errors propagate through the whole D(G(z)) stack, only G moves
  Tensor p_fooled = state.discriminator->forward(fake, true);
  Tensor grad_g;
  const double g_loss = nn::nll_real(p_fooled, grad_g);
  if (!std::isfinite(g_loss)) throw DivergenceError("g_loss is not finite");
  state.discriminator->zero_grad();
  Tensor grad_image = state.discriminator->backward(grad_g);
  state.generator->zero_grad();
  state.generator->backward(grad_image);
  state.opt_g->step();

  LossRecord rec;
  rec.d_loss_real = state.pending_d_loss_real.value_or(0.0);
  rec.d_loss_fake = d_loss_fake;
  rec.g_loss = g_loss;
  state.pending_d_loss_real.reset();
  state.loss_history.push_back(rec);
  ++state.iteration;
  return {d_loss_fake, g_loss};
}

void train_dcgan(GanState& state, const data::Dataset& dataset,
                 const semfilter::KeypointDetector* detector, double threshold,
                 const TrainSchedule& schedule) {
  if (schedule.iterations <= 0) return;
  std::vector<data::Sample> pool;
  if (state.config.filter_enabled) {
    if (detector == nullptr) throw DetectorError("filter enabled but no detector supplied");
    auto res = semfilter::filter_samples(dataset.samples, *detector, threshold);
    if (res.kept.empty())
      throw EmptyFilteredSetError("semantic filter removed every training sample");
    pool = std::move(res.kept);
  } else {
    pool = dataset.samples;
  }
  std::string last_ckpt;
  const auto maybe_checkpoint = [&](const char* tag) {
    if (state.config.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(state.config.checkpoint_dir);
    last_ckpt = state.config.checkpoint_dir + "/" + state.name + "_" + tag + "_iter" +
                std::to_string(state.iteration) + ".ckpt";
    save_checkpoint(state, last_ckpt);
  };
  for (std::int64_t it = 0; it < schedule.iterations; ++it) {
    std::vector<data::Sample> batch;
    batch.reserve(state.config.batch_size);
    for (int b = 0; b < state.config.batch_size; ++b)
      batch.push_back(pool[static_cast<std::size_t>(
          state.rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]);
    try {
      discriminator_step_real(state, batch, detector);
      Tensor z = draw_latent(state, state.config.batch_size);
      adversarial_step_fake(state, z);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), last_ckpt);
    }
    if (state.config.checkpoint_every > 0 &&
        state.iteration % state.config.checkpoint_every == 0)
      maybe_checkpoint("periodic");
  }
  if (!state.config.checkpoint_dir.empty()) maybe_checkpoint("final");
}

GanState warm_start(const GanState& base, const GanConfig& target_config, int target_class) {
  if (target_config.latent_dim != base.config.latent_dim ||
      target_config.image_size != base.config.image_size ||
      target_config.channel_schedule != base.config.channel_schedule)
    throw ArchitectureError("warm_start: base and target architectures differ");
  GanState st = init_dcgan(target_config, 0, "G_" + std::to_string(target_class));
  copy_tensors(const_cast<GanState&>(base).generator->params(), st.generator->params());
  copy_tensors(const_cast<GanState&>(base).discriminator->params(),
               st.discriminator->params());
  copy_tensors(collect_buffers(*const_cast<GanState&>(base).generator),
               collect_buffers(*st.generator));
  copy_tensors(collect_buffers(*const_cast<GanState&>(base).discriminator),
               collect_buffers(*st.discriminator));
  st.rng = base.rng;  // continue the base's stream so runs stay reproducible
  st.provenance = Provenance::warm_started;
  st.base_id = base.name;
  st.iteration = 0;
  st.loss_history.clear();
  return st;
}

std::vector<data::Sample> sample_generator(GanState& state, int count, std::uint64_t seed,
                                           int label, Labeling labeling, int n_identities) {
  if (count < 1) throw ConfigError("sample count must be >= 1");
  Rng rng(seed);
  std::vector<data::Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  const int s = state.config.image_size;
  int remaining = count;
  while (remaining > 0) {
    const int b = std::min(remaining, state.config.batch_size);
    Tensor z{b, state.config.latent_dim, 1, 1};
    rng.fill_normal(z, 0.0, 1.0);
    Tensor imgs = state.generator->forward(z, false);
    for (int i = 0; i < b; ++i) {
      data::Sample smp;
      smp.image = Tensor{3, s, s};
      std::copy(imgs.data() + static_cast<std::size_t>(i) * smp.image.numel(),
                imgs.data() + static_cast<std::size_t>(i + 1) * smp.image.numel(),
                smp.image.data());
      smp.origin = data::Origin::synthetic;
      smp.generator_id = state.name;
      switch (labeling) {
        case Labeling::unknown_class:
          smp.label = 0;
          break;
        case Labeling::class_label:
          smp.label = label;
          break;
        case Labeling::uniform_soft: {
          smp.label = 0;
          smp.soft_label = std::vector<double>(static_cast<std::size_t>(n_identities) + 1,
                                               1.0 / (n_identities + 1));
          break;
        }
      }
      out.push_back(std::move(smp));
    }
    remaining -= b;
  }
  return out;
}

AugmentationPlan build_augmentation_plan(PlanMode mode, const std::vector<int>& counts,
                                         Labeling labeling, int n_identities,
                                         std::size_t original_count) {
  for (int c : counts)
    if (c <= 0) throw ConfigError("augmentation counts must be positive");
  AugmentationPlan plan;
  plan.mode = mode;
  if (mode == PlanMode::generic) {
    if (counts.size() != 1)
      throw ConfigError("generic augmentation takes exactly one count, got " +
                        std::to_string(counts.size()));
    plan.entries.push_back({"G", counts[0], labeling, 0});
  } else {
    if (counts.size() != static_cast<std::size_t>(n_identities) + 1)
      throw ConfigError("per-class augmentation needs a count for G_0 and each of the " +
                        std::to_string(n_identities) + " identities");
    plan.entries.push_back({"G_0", counts[0], Labeling::unknown_class, 0});
    for (int j = 1; j <= n_identities; ++j)
      plan.entries.push_back({"G_" + std::to_string(j), counts[static_cast<std::size_t>(j)],
                              Labeling::class_label, j});
  }
  plan.synth_to_original_ratio =
      original_count == 0 ? 0.0
                          : static_cast<double>(plan.total_synthetic()) /
                                static_cast<double>(original_count);
  return plan;
}

namespace {
constexpr std::uint32_t kGanMagic = 0x53524731;  // "SRG1"

void write_net(BinaryWriter& w, nn::Sequential& net) {
  auto params = net.params();
  auto buffers = collect_buffers(net);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (Tensor* p : params) w.tensor(*p);
  w.u32(static_cast<std::uint32_t>(buffers.size()));
  for (Tensor* b : buffers) w.tensor(*b);
}

void read_net(BinaryReader& r, nn::Sequential& net) {
  auto params = net.params();
  auto buffers = collect_buffers(net);
  if (r.u32() != params.size()) throw LoadError("checkpoint parameter count mismatch");
  for (Tensor* p : params) *p = r.tensor();
  if (r.u32() != buffers.size()) throw LoadError("checkpoint buffer count mismatch");
  for (Tensor* b : buffers) *b = r.tensor();
}

void write_adam(BinaryWriter& w, nn::Adam& opt) {
  w.i64(opt.steps());
  w.u32(static_cast<std::uint32_t>(opt.moment1().size()));
  for (Tensor& t : opt.moment1()) w.tensor(t);
  for (Tensor& t : opt.moment2()) w.tensor(t);
}

void read_adam(BinaryReader& r, nn::Adam& opt) {
  opt.set_steps(r.i64());
  const std::uint32_t n = r.u32();
  if (n != opt.moment1().size()) throw LoadError("checkpoint optimizer state mismatch");
  for (Tensor& t : opt.moment1()) t = r.tensor();
  for (Tensor& t : opt.moment2()) t = r.tensor();
}
}  // namespace

void save_checkpoint(const GanState& state, const std::string& path) {
  auto& st = const_cast<GanState&>(state);
  BinaryWriter w(path);
  w.u32(kGanMagic);
  w.u32(1);  // version
  const GanConfig& c = st.config;
  w.u32(static_cast<std::uint32_t>(c.latent_dim));
  w.u32(static_cast<std::uint32_t>(c.image_size));
  w.u32(static_cast<std::uint32_t>(c.channel_schedule.size()));
  for (int ch : c.channel_schedule) w.u32(static_cast<std::uint32_t>(ch));
  w.f64(c.learning_rate);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.i64(c.max_iterations);
  w.u32(c.filter_enabled ? 1 : 0);
  w.f64(c.filter_threshold);
  w.str(st.name);
  w.u32(st.provenance == Provenance::warm_started ? 1 : 0);
  w.str(st.base_id);
  w.i64(st.iteration);
  w.str(st.rng.serialize());
  w.u32(static_cast<std::uint32_t>(st.loss_history.size()));
  for (const LossRecord& rec : st.loss_history) {
    w.f64(rec.d_loss_real);
    w.f64(rec.d_loss_fake);
    w.f64(rec.g_loss);
  }
  write_net(w, *st.generator);
  write_net(w, *st.discriminator);
  write_adam(w, *st.opt_g);
  write_adam(w, *st.opt_d);
  w.i64(st.real_batches_consumed);
  w.i64(st.real_batches_approved);
}

GanState load_checkpoint(const std::string& path) {
  BinaryReader r(path);
  if (r.u32() != kGanMagic) throw LoadError("not a GAN checkpoint: " + path);
  if (r.u32() != 1) throw LoadError("unsupported GAN checkpoint version: " + path);
  GanConfig c;
  c.latent_dim = static_cast<int>(r.u32());
  c.image_size = static_cast<int>(r.u32());
  c.channel_schedule.resize(r.u32());
  for (int& ch : c.channel_schedule) ch = static_cast<int>(r.u32());
  c.learning_rate = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.batch_size = static_cast<int>(r.u32());
  c.max_iterations = r.i64();
  c.filter_enabled = r.u32() != 0;
  c.filter_threshold = r.f64();
  const std::string name = r.str();
  GanState st = init_dcgan(c, 0, name);
  st.provenance = r.u32() != 0 ? Provenance::warm_started : Provenance::scratch;
  st.base_id = r.str();
  st.iteration = r.i64();
  st.rng.deserialize(r.str());
  st.loss_history.resize(r.u32());
  for (LossRecord& rec : st.loss_history) {
    rec.d_loss_real = r.f64();
    rec.d_loss_fake = r.f64();
    rec.g_loss = r.f64();
  }
  read_net(r, *st.generator);
  read_net(r, *st.discriminator);
  read_adam(r, *st.opt_g);
  read_adam(r, *st.opt_d);
  st.real_batches_consumed = r.i64();
  st.real_batches_approved = r.i64();
  return st;
}

void export_loss_history(const GanState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write loss history: " + path);
  out << "iteration,d_loss_real,d_loss_fake,g_loss\n";
  for (std::size_t i = 0; i < state.loss_history.size(); ++i) {
    const LossRecord& r = state.loss_history[i];
    out << i + 1 << "," << r.d_loss_real << "," << r.d_loss_fake << "," << r.g_loss << "\n";
  }
}

}  // namespace semreid::gan
