// Acceptance gate: ten pinned criteria covering metric oracles, gradient
// checks, semantic gating, condensation exactness, compression accounting,
// warm-start convergence, augmentation direction, split invariants, registry
// fidelity, and end-to-end determinism. Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "semreid/condense/condense.hpp"
#include "semreid/core/errors.hpp"
#include "semreid/core/rng.hpp"
#include "semreid/data/toy.hpp"
#include "semreid/eval/metrics.hpp"
#include "semreid/gan/gan.hpp"
#include "semreid/harness/config.hpp"
#include "semreid/harness/experiment.hpp"
#include "semreid/harness/registry.hpp"
#include "semreid/nn/activations.hpp"
#include "semreid/nn/basic.hpp"
#include "semreid/nn/conv.hpp"
#include "semreid/nn/loss.hpp"
#include "semreid/semfilter/filter.hpp"

using namespace semreid;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ------------------------------------------------------------ infrastructure

int g_failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<std::string()>& body) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  if (!detail.empty() && detail.rfind("FAIL:", 0) == 0) {
    ok = false;
    detail = detail.substr(5);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s criterion %d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", number,
              title.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --------------------------------------------- brute-force metric oracles
// Independent reimplementations by explicit counting and selection sorts;
// they share no code with the library's metric kernels.

bool row_in_scope(int label, eval::Scope scope) {
  return scope == eval::Scope::ALL || label != 0;
}

double bf_prec_at_k(const eval::ScoreMatrix& m, int k, eval::Scope scope) {
  int n = 0, hits = 0;
  for (int i = 0; i < m.rows(); ++i) {
    const int t = m.labels[static_cast<std::size_t>(i)];
    if (!row_in_scope(t, scope)) continue;
    ++n;
    int better = 0;
    for (int j = 0; j < m.classes(); ++j) {
      if (j == t) continue;
      if (m.scores.at(i, j) > m.scores.at(i, t) ||
          (m.scores.at(i, j) == m.scores.at(i, t) && j < t))
        ++better;
    }
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / n;
}

double bf_ap_from_flags(const std::vector<bool>& rel) {
  double hits = 0, s = 0;
  for (std::size_t r = 0; r < rel.size(); ++r)
    if (rel[r]) {
      hits += 1;
      s += hits / static_cast<double>(r + 1);
    }
  return hits > 0 ? s / hits : 0.0;
}

double bf_map_classification(const eval::ScoreMatrix& m, eval::Scope scope) {
  std::vector<int> rows;
  for (int i = 0; i < m.rows(); ++i)
    if (row_in_scope(m.labels[static_cast<std::size_t>(i)], scope)) rows.push_back(i);
  double sum = 0;
  int counted = 0;
  for (int c = (scope == eval::Scope::pID ? 1 : 0); c < m.classes(); ++c) {
    int pos = 0;
    for (int i : rows) pos += m.labels[static_cast<std::size_t>(i)] == c;
    if (pos == 0) continue;
    std::vector<int> order = rows;
    for (std::size_t a = 0; a < order.size(); ++a)
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const double sa = m.scores.at(order[a], c), sb = m.scores.at(order[b], c);
        if (sb > sa || (sb == sa && order[b] < order[a])) std::swap(order[a], order[b]);
      }
    std::vector<bool> rel;
    for (int i : order) rel.push_back(m.labels[static_cast<std::size_t>(i)] == c);
    sum += bf_ap_from_flags(rel);
    ++counted;
  }
  return sum / counted;
}

eval::CmcResult bf_cmc(const Tensor& sim, const std::vector<eval::RetrievalItem>& queries,
                       const std::vector<eval::RetrievalItem>& gallery, bool exclude_same_cam,
                       int max_rank) {
  const int g = sim.dim(1);
  if (max_rank <= 0 || max_rank > g) max_rank = g;
  eval::CmcResult res;
  res.cmc.assign(static_cast<std::size_t>(max_rank), 0.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::vector<int> valid;
    for (int j = 0; j < g; ++j) {
      const auto& gi = gallery[static_cast<std::size_t>(j)];
      if (exclude_same_cam && gi.label == queries[i].label && gi.cam == queries[i].cam)
        continue;
      valid.push_back(j);
    }
    for (std::size_t a = 0; a < valid.size(); ++a)
      for (std::size_t b = a + 1; b < valid.size(); ++b) {
        const double sa = sim.at(static_cast<int>(i), valid[a]);
        const double sb = sim.at(static_cast<int>(i), valid[b]);
        if (sb > sa || (sb == sa && valid[b] < valid[a])) std::swap(valid[a], valid[b]);
      }
    std::vector<bool> rel;
    int first = -1;
    for (std::size_t r = 0; r < valid.size(); ++r) {
      const bool match = gallery[static_cast<std::size_t>(valid[r])].label == queries[i].label;
      rel.push_back(match);
      if (match && first < 0) first = static_cast<int>(r);
    }
    for (int r = first; r >= 0 && r < max_rank; ++r)
      res.cmc[static_cast<std::size_t>(r)] += 1.0;
    res.map += bf_ap_from_flags(rel);
  }
  for (double& v : res.cmc) v /= static_cast<double>(queries.size());
  res.map /= static_cast<double>(queries.size());
  return res;
}

eval::ScoreMatrix random_matrix(Rng& rng, bool with_ties) {
  const int m = static_cast<int>(rng.uniform_int(2, 20));
  const int classes = static_cast<int>(rng.uniform_int(2, 8));  // N+1, N <= 7
  eval::ScoreMatrix sm;
  sm.scores = Tensor{m, classes};
  for (int i = 0; i < m; ++i) {
    double s = 0;
    for (int j = 0; j < classes; ++j) {
      double v = rng.uniform(0.05, 1.0);
      if (with_ties) v = std::round(v * 4.0) / 4.0 + 0.05;
      sm.scores.at(i, j) = v;
      s += v;
    }
    for (int j = 0; j < classes; ++j) sm.scores.at(i, j) /= s;
  }
  for (int i = 0; i < m; ++i)
    sm.labels.push_back(static_cast<int>(rng.uniform_int(0, classes - 1)));
  sm.labels[0] = 1;  // pID scope must be nonempty
  return sm;
}

// ------------------------------------------------------- finite differences
// Mixed tolerance: relative error with an absolute floor, because central
// differences on near-zero gradients are dominated by floating-point
// cancellation rather than truncation.

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-3});
}

double fd_max_rel(nn::Sequential& net, const std::function<double(Tensor&)>& loss_of,
                  double h) {
  Tensor scratch;
  auto params = net.params();
  auto grads = net.grads();
  double max_rel = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->numel(); ++i) {
      const double orig = (*params[k])[i];
      (*params[k])[i] = orig + h;
      const double lp = loss_of(scratch);
      (*params[k])[i] = orig - h;
      const double lm = loss_of(scratch);
      (*params[k])[i] = orig;
      max_rel = std::max(max_rel, rel_err((*grads[k])[i], (lp - lm) / (2 * h)));
    }
  return max_rel;
}

Tensor batch_tensor(const std::vector<data::Sample>& samples) {
  const int n = static_cast<int>(samples.size());
  const int c = samples[0].image.dim(0);
  const int h = samples[0].image.dim(1), w = samples[0].image.dim(2);
  Tensor out({n, c, h, w});
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < samples[static_cast<std::size_t>(i)].image.numel(); ++j)
      out[static_cast<std::size_t>(i) * samples[0].image.numel() + j] =
          samples[static_cast<std::size_t>(i)].image[j];
  return out;
}

// first iteration whose trailing `win`-record mean of d_loss_real drops
// below tau; history size + 1 if it never does
std::int64_t first_below(const std::vector<gan::LossRecord>& h, double tau, int win) {
  for (std::size_t i = static_cast<std::size_t>(win); i <= h.size(); ++i) {
    double s = 0;
    for (std::size_t j = i - static_cast<std::size_t>(win); j < i; ++j) s += h[j].d_loss_real;
    if (s / win < tau) return static_cast<std::int64_t>(i);
  }
  return static_cast<std::int64_t>(h.size()) + 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::string registry_path = "registry/paper_results.tsv";
  std::string configs_dir = "configs";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--registry") registry_path = argv[i + 1];
    if (std::string(argv[i]) == "--configs") configs_dir = argv[i + 1];
  }
  const std::string work =
      (fs::temp_directory_path() / ("semreid_acceptance_" + std::to_string(::getpid())))
          .string();
  fs::create_directories(work);

  // ---------------------------------------------------------------- 1
  run_criterion(1, "metric oracle equivalence on 200 random problems", [&]() -> std::string {
    const double tol = 1e-9;
    double worst = 0.0;
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
      eval::ScoreMatrix m = random_matrix(rng, trial % 2 == 0);
      for (eval::Scope scope : {eval::Scope::ALL, eval::Scope::pID}) {
        for (int k : {1, 2, m.classes()})
          worst = std::max(worst, std::fabs(eval::prec_at_k(m, k, scope) -
                                            bf_prec_at_k(m, k, scope)));
        worst = std::max(worst, std::fabs(eval::mean_ap_classification(m, scope).map -
                                          bf_map_classification(m, scope)));
      }
    }
    Rng rng2(505);
    for (int trial = 0; trial < 200; ++trial) {
      const int nq = static_cast<int>(rng2.uniform_int(1, 8));
      const int ng = static_cast<int>(rng2.uniform_int(4, 20));
      std::vector<eval::RetrievalItem> queries, gallery;
      for (int j = 0; j < ng; ++j)
        gallery.push_back({static_cast<int>(rng2.uniform_int(1, 4)),
                           static_cast<int>(rng2.uniform_int(0, 2))});
      for (int i = 0; i < nq; ++i) {
        const auto& gi = gallery[static_cast<std::size_t>(rng2.uniform_int(0, ng - 1))];
        queries.push_back({gi.label, gi.cam + 10});
      }
      Tensor sim{nq, ng};
      for (int i = 0; i < nq; ++i)
        for (int j = 0; j < ng; ++j)
          sim.at(i, j) = std::round(rng2.uniform(0.0, 1.0) * 8.0) / 8.0;
      for (bool excl : {true, false}) {
        const eval::CmcResult a = eval::cmc_single_query(sim, queries, gallery, excl);
        const eval::CmcResult b = bf_cmc(sim, queries, gallery, excl, 0);
        if (a.cmc.size() != b.cmc.size()) return "FAIL:cmc length mismatch";
        for (std::size_t r = 0; r < a.cmc.size(); ++r)
          worst = std::max(worst, std::fabs(a.cmc[r] - b.cmc[r]));
        worst = std::max(worst, std::fabs(a.map - b.map));
      }
    }
    if (worst >= tol) return "FAIL:max deviation " + fmt(worst) + " >= 1e-9";
    return "max deviation " + fmt(worst) + " < 1e-9";
  });

  // ---------------------------------------------------------------- 2
  run_criterion(2, "analytic gradients match central finite differences", [&]() -> std::string {
    const double rtol = 1e-4, h = 1e-6;
    double worst = 0.0;

    gan::GanConfig gc;
    gc.latent_dim = 4;
    gc.image_size = 8;
    gc.channel_schedule = {8};
    gc.batch_size = 4;
    gc.filter_enabled = false;
    gan::GanState st = gan::init_dcgan(gc, 12);
    std::size_t param_total = 0;
    for (Tensor* p : st.generator->params()) param_total += p->numel();
    for (Tensor* p : st.discriminator->params()) param_total += p->numel();
    if (param_total > 5000) return "FAIL:GAN fixture exceeds 5000 parameters";

    data::Dataset ds = data::synth_toy_corpus({2, 2, 16, 8, 0.6}, 5);
    Tensor x = batch_tensor({ds.samples.begin(), ds.samples.begin() + 3});
    nn::Sequential& G = *st.generator;
    nn::Sequential& D = *st.discriminator;
    Tensor z({3, 4, 1, 1});
    st.rng.fill_normal(z, 0.0, 1.0);
    Tensor fake = G.forward(z, false);

    // adversarial loss (a): -log(D(x)) w.r.t. discriminator parameters
    {
      D.zero_grad();
      Tensor p = D.forward(x, true);
      Tensor gp;
      nn::nll_real(p, gp);
      D.backward(gp);
      worst = std::max(worst, fd_max_rel(
          D, [&](Tensor& t) { return nn::nll_real(D.forward(x, true), t); }, h));
    }
    // adversarial loss (b): -log(1 - D(G(z))) w.r.t. discriminator parameters
    {
      D.zero_grad();
      Tensor p = D.forward(fake, true);
      Tensor gp;
      nn::nll_fake(p, gp);
      D.backward(gp);
      worst = std::max(worst, fd_max_rel(
          D, [&](Tensor& t) { return nn::nll_fake(D.forward(fake, true), t); }, h));
    }
    // adversarial loss (c): -log(D(G(z))) w.r.t. generator parameters
    {
      G.zero_grad();
      Tensor img = G.forward(z, true);
      Tensor p = D.forward(img, true);
      Tensor gp;
      nn::nll_real(p, gp);
      G.backward(D.backward(gp));
      worst = std::max(worst, fd_max_rel(
          G,
          [&](Tensor& t) { return nn::nll_real(D.forward(G.forward(z, true), true), t); },
          h));
    }
    // classifier loss with uniform soft labels on a small smooth network
    {
      nn::Sequential net;
      net.add<nn::Conv2d>(3, 4, 3, 2, 1, 1, true);
      net.add<nn::Tanh>();
      net.add<nn::Conv2d>(4, 6, 3, 2, 1, 1, true);
      net.add<nn::Tanh>();
      net.add<nn::GlobalAvgPool>();
      net.add<nn::Linear>(6, 3);
      Rng nrng(9);
      net.init(nrng);
      std::size_t net_params = 0;
      for (Tensor* p : net.params()) net_params += p->numel();
      if (net_params > 5000) return "FAIL:classifier fixture exceeds 5000 parameters";
      Tensor targets{3, 3};
      for (int i = 0; i < 3; ++i) {
        targets.at(i, i % 3) = i == 0 ? 0.0 : 1.0;  // rows 1,2: hard labels
        if (i == 0)
          for (int j = 0; j < 3; ++j) targets.at(0, j) = 1.0 / 3.0;  // uniform soft
      }
      net.zero_grad();
      Tensor logits = net.forward(x, true);
      Tensor gl;
      nn::cross_entropy(logits, targets, gl);
      net.backward(gl);
      worst = std::max(worst, fd_max_rel(
          net,
          [&](Tensor& t) { return nn::cross_entropy(net.forward(x, true), targets, t); },
          h));
    }
    if (worst >= rtol) return "FAIL:max relative error " + fmt(worst) + " >= 1e-4";
    return "max relative error " + fmt(worst) + " < 1e-4";
  });

  // ---------------------------------------------------------------- 3
  run_criterion(3, "semantic gating audit over 2000 iterations at 32x32", [&]() -> std::string {
    data::Dataset ds = data::synth_toy_corpus({3, 2, 40, 32, 0.7}, 5);
    gan::GanConfig gc;
    gc.latent_dim = 16;
    gc.image_size = 32;
    gc.channel_schedule = {32, 16, 8};
    gc.batch_size = 8;
    gc.filter_enabled = true;
    gc.filter_threshold = 0.5;
    auto detector = semfilter::make_detector("oracle");
    gan::GanState st = gan::init_dcgan(gc, 7);
    gan::train_dcgan(st, ds, detector.get(), 0.5, {2000});
    if (st.real_batches_consumed != 2000)
      return "FAIL:consumed " + std::to_string(st.real_batches_consumed) + " != 2000";
    if (st.real_batches_approved != st.real_batches_consumed)
      return "FAIL:approved " + std::to_string(st.real_batches_approved) + " of " +
             std::to_string(st.real_batches_consumed);
    return "approved 2000/2000 real batches (100%)";
  });

  // ---------------------------------------------------------------- 4
  run_criterion(4, "condensation keeps exact per-group fractions", [&]() -> std::string {
    condense::CondenseConfig cc;
    cc.input_size = 16;
    cc.stage_depths = {2, 2};
    cc.growth_rates = {8, 8};
    cc.stem_channels = 16;
    cc.bottleneck = 2;
    cc.groups = 4;
    cc.condensation_factor = 4;  // C = 4
    cc.epochs = 6;
    cc.num_classes = 4;
    cc.batch_size = 8;
    condense::ReidModel model = condense::build_condensenet(cc, 9);
    const int C = cc.condensation_factor;
    for (int stage = 1; stage <= C - 1; ++stage) {
      condense::condensation_step(model, stage);
      for (nn::Conv2d* conv : model.learned_group_convs()) {
        const Tensor& m = conv->mask();
        const int c_in = conv->in_channels();
        const int rows_per_group = conv->out_channels() / cc.groups;
        const int keep = static_cast<int>(
            std::ceil(static_cast<double>(C - stage) / C * static_cast<double>(c_in)));
        for (int g = 0; g < cc.groups; ++g) {
          int live = 0;
          for (int ch = 0; ch < c_in; ++ch) live += m.at(g * rows_per_group, ch) != 0.0;
          if (live != keep)
            return "FAIL:stage " + std::to_string(stage) + " group keeps " +
                   std::to_string(live) + " channels, expected " + std::to_string(keep);
          // expected fractions: 3/4 of c_in after stage 1, 1/4 after stage 3
          if (4 * keep != (C - stage) * c_in)
            return "FAIL:stage " + std::to_string(stage) + " fraction is not " +
                   std::to_string(C - stage) + "/4";
        }
      }
    }
    // inference invariance to scribbling on masked storage
    data::Sample s;
    s.image = Tensor({3, cc.input_size, cc.input_size});
    Rng rng(4);
    for (std::size_t i = 0; i < s.image.numel(); ++i) s.image[i] = rng.uniform(-1.0, 1.0);
    const std::vector<double> before = condense::infer(model, s.image);
    for (nn::Conv2d* c : model.learned_group_convs()) {
      Tensor& w = c->weight();
      const Tensor& m = c->mask();
      for (std::size_t j = 0; j < w.numel(); ++j)
        if (m[j] == 0.0) w[j] = 1e6;
    }
    if (condense::infer(model, s.image) != before)
      return "FAIL:inference changed after perturbing masked weights";
    return "fractions 3/4, 2/4, 1/4 exact; inference invariant to dead storage";
  });

  // ---------------------------------------------------------------- 5
  run_criterion(5, "compression accounting matches hand-derived formulas", [&]() -> std::string {
    {
      nn::Conv2d conv(8, 16, 3, 1, 1, 1, false);
      const nn::LayerStats s = conv.stats(32, 32);
      if (s.params != 1152) return "FAIL:dense 3x3 params " + std::to_string(s.params);
      if (s.mult_adds != 1179648)
        return "FAIL:dense 3x3 mult-adds " + std::to_string(s.mult_adds);
    }
    {
      nn::Conv2d conv(8, 16, 3, 1, 1, 4, false);
      const nn::LayerStats s = conv.stats(32, 32);
      if (s.params != 288) return "FAIL:grouped params " + std::to_string(s.params);
    }
    condense::CondenseConfig cc;
    cc.input_size = 16;
    cc.stage_depths = {2, 2};
    cc.growth_rates = {8, 8};
    cc.stem_channels = 16;
    cc.bottleneck = 2;
    cc.groups = 4;
    cc.condensation_factor = 4;
    cc.epochs = 6;
    cc.num_classes = 4;
    cc.batch_size = 8;
    condense::ReidModel model = condense::build_condensenet(cc, 33);
    std::int64_t dense_live = 0;
    for (nn::Conv2d* c : model.learned_group_convs())
      dense_live += static_cast<std::int64_t>(c->weight().numel());
    const condense::ModelCost before = count_params_flops(model);
    for (int stage = 1; stage <= 3; ++stage) condense::condensation_step(model, stage);
    std::int64_t live = 0;
    for (nn::Conv2d* c : model.learned_group_convs()) {
      const Tensor& m = c->mask();
      for (std::size_t j = 0; j < m.numel(); ++j) live += m[j] != 0.0;
    }
    if (live * 4 != dense_live)
      return "FAIL:condensed live weights " + std::to_string(live) + " != dense/4";
    const condense::ModelCost after = count_params_flops(model);
    if (after.params != before.params - (dense_live - live))
      return "FAIL:total params " + std::to_string(after.params) + " inconsistent";
    return "1152 / 1179648 / 288 exact; condensed live = dense/4 = " + std::to_string(live);
  });

  // ---------------------------------------------------------------- 6
  run_criterion(6, "warm-start halves median iterations to loss threshold",
                [&]() -> std::string {
    // loss = trailing 5-iteration mean of the discriminator's real-sample
    // loss; tau = 0.20; 400-iteration cap; medians over 5 seeds
    const double tau = 0.20;
    const int window = 5;
    gan::GanConfig gc;
    gc.latent_dim = 8;
    gc.image_size = 16;
    gc.channel_schedule = {16, 8};
    gc.batch_size = 8;
    gc.filter_enabled = false;
    std::vector<std::int64_t> warm_iters, scratch_iters;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      data::Dataset ds = data::synth_toy_corpus({3, 2, 40, 16, 0.7}, seed);
      data::Dataset cls = data::subset_by_label(ds, 1);
      gan::GanState base = gan::init_dcgan(gc, seed * 100);
      gan::train_dcgan(base, ds, nullptr, 0.0, {300});
      gan::GanState warm = gan::warm_start(base, gc, 1);
      gan::train_dcgan(warm, cls, nullptr, 0.0, {400});
      gan::GanState scratch = gan::init_dcgan(gc, seed * 100 + 50, "G_1");
      gan::train_dcgan(scratch, cls, nullptr, 0.0, {400});
      warm_iters.push_back(first_below(warm.loss_history, tau, window));
      scratch_iters.push_back(first_below(scratch.loss_history, tau, window));
    }
    std::sort(warm_iters.begin(), warm_iters.end());
    std::sort(scratch_iters.begin(), scratch_iters.end());
    const std::int64_t mw = warm_iters[2], ms = scratch_iters[2];
    if (2 * mw > ms)
      return "FAIL:median warm " + std::to_string(mw) + " > 0.5 x scratch " +
             std::to_string(ms);
    return "median warm " + std::to_string(mw) + " <= 0.5 x scratch " + std::to_string(ms);
  });

  // ---------------------------------------------------------------- 7
  run_criterion(7, "augmentation does not hurt mean prec@1 on a starved split",
                [&]() -> std::string {
    auto run_one = [](std::uint64_t seed, bool augment) {
      data::Dataset ds = data::synth_toy_corpus({3, 2, 20, 16, 0.7}, seed);
      auto [train, test] = data::holdout_per_class(ds, 0.5, seed);
      std::vector<data::Sample> pool = train.samples;
      if (augment) {
        gan::GanConfig gc;
        gc.latent_dim = 8;
        gc.image_size = 16;
        gc.channel_schedule = {16, 8};
        gc.batch_size = 8;
        gc.filter_enabled = false;
        gan::GanState st = gan::init_dcgan(gc, seed);
        gan::train_dcgan(st, train, nullptr, 0.0, {150});
        auto synth = gan::sample_generator(st, 80, seed + 1, 0,
                                           gan::Labeling::uniform_soft, ds.n_identities);
        pool.insert(pool.end(), synth.begin(), synth.end());
      }
      condense::CondenseConfig cc;
      cc.input_size = 16;
      cc.stage_depths = {2, 2};
      cc.growth_rates = {8, 8};
      cc.stem_channels = 16;
      cc.bottleneck = 2;
      cc.groups = 4;
      cc.condensation_factor = 4;
      cc.epochs = 3;
      cc.num_classes = ds.n_identities + 1;
      cc.batch_size = 8;
      condense::ReidModel model = condense::build_condensenet(cc, seed);
      condense::train_reid(model, pool, seed);
      eval::ScoreMatrix m;
      m.scores = condense::score_samples(model, test.samples);
      for (const auto& s : test.samples) m.labels.push_back(s.label);
      return eval::prec_at_k(m, 1, eval::Scope::ALL);
    };
    double mean_aug = 0, mean_plain = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      mean_aug += run_one(seed, true) / 5.0;
      mean_plain += run_one(seed, false) / 5.0;
    }
    if (mean_aug < mean_plain)
      return "FAIL:mean prec@1 with augmentation " + fmt(mean_aug) + " < without " +
             fmt(mean_plain);
    return "mean prec@1 " + fmt(mean_aug) + " (augmented) >= " + fmt(mean_plain) + " (plain)";
  });

  // ---------------------------------------------------------------- 8
  run_criterion(8, "split invariants over 100 randomized datasets", [&]() -> std::string {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      data::ToyConfig tc;
      tc.n_identities = static_cast<int>(rng.uniform_int(2, 4));
      tc.sessions = static_cast<int>(rng.uniform_int(2, 6));
      tc.per_session = static_cast<int>(rng.uniform_int(16, 40));
      tc.patch_size = 8;
      tc.p_face = 0.6;
      data::Dataset ds = data::synth_toy_corpus(tc, 9000 + static_cast<std::uint64_t>(trial));

      // leave-one-session-out folds partition the sessions with no overlap
      const data::SplitPlan plan = data::make_loso_splits(ds);
      if (static_cast<int>(plan.folds.size()) != tc.sessions)
        return "FAIL:expected one fold per session";
      std::vector<int> test_count(static_cast<std::size_t>(tc.sessions), 0);
      for (const auto& fold : plan.folds) {
        if (fold.test_sessions.size() != 1) return "FAIL:test side must be one session";
        test_count[static_cast<std::size_t>(fold.test_sessions[0])] += 1;
        for (int tr : fold.train_sessions)
          if (tr == fold.test_sessions[0]) return "FAIL:session in both sides of a fold";
        if (static_cast<int>(fold.train_sessions.size()) + 1 != tc.sessions)
          return "FAIL:fold does not cover all sessions";
      }
      for (int c : test_count)
        if (c != 1) return "FAIL:session not tested exactly once";

      // per-class holdout counts: |test_c| = max(1, floor(0.15 * n_c))
      auto [train, test] = data::holdout_per_class(
          ds, 0.15, 100 + static_cast<std::uint64_t>(trial));
      std::map<int, int> total, held;
      for (const auto& s : ds.samples) total[s.label] += 1;
      for (const auto& s : test.samples) held[s.label] += 1;
      if (train.samples.size() + test.samples.size() != ds.samples.size())
        return "FAIL:holdout does not partition the dataset";
      for (const auto& [label, n] : total) {
        const int expect = std::max(1, static_cast<int>(std::floor(0.15 * n)));
        if (held[label] != expect)
          return "FAIL:class " + std::to_string(label) + " holds " +
                 std::to_string(held[label]) + ", expected " + std::to_string(expect);
      }
    }
    return "100 datasets: LOSO partitions exact, holdout counts max(1, floor(0.15 n))";
  });

  // ---------------------------------------------------------------- 9
  run_criterion(9, "registry reproduces published values bit-exactly", [&]() -> std::string {
    const harness::ResultsRegistry reg = harness::ResultsRegistry::load(registry_path);
    if (reg.serialize() != slurp(registry_path))
      return "FAIL:serialize() differs from the shipped file";
    const std::vector<std::tuple<std::string, std::string, std::string, std::string>> fixtures =
        {{"lima", "1", "all_prec1", "89.1"},   {"lima", "2", "all_prec1", "91.98"},
         {"lima", "6", "all_prec1", "92.58"},  {"lima", "7", "pid_map", "97.04"},
         {"duke", "3", "prec1", "87.70"},      {"duke", "4", "cmc1_sq", "36.45"},
         {"duke", "4", "map_sq", "21.11"},     {"lima", "1", "pid_map", "-"}};
    for (const auto& [table, row, metric, want] : fixtures) {
      const std::string got = reg.row(table, row).raw(metric);
      if (got != want)
        return "FAIL:" + table + "/" + row + " " + metric + " = '" + got + "', want '" +
               want + "'";
    }
    return "file round trip identical; spot values verbatim";
  });

  // ---------------------------------------------------------------- 10
  run_criterion(10, "full run preset is byte-identical across repeats", [&]() -> std::string {
    harness::Config cfg = harness::Config::load(configs_dir + "/run.cfg");
    cfg.set("out_dir", work + "/det_a");
    const harness::RunResult a = harness::run_experiment(cfg);
    cfg.set("out_dir", work + "/det_b");
    const harness::RunResult b = harness::run_experiment(cfg);
    if (a.report_paths.size() != b.report_paths.size() || a.report_paths.empty())
      return "FAIL:report count mismatch";
    for (std::size_t i = 0; i < a.report_paths.size(); ++i)
      if (slurp(a.report_paths[i]) != slurp(b.report_paths[i]))
        return "FAIL:report " + a.report_paths[i] + " differs between runs";
    return std::to_string(a.report_paths.size()) + " report(s) byte-identical";
  });

  fs::remove_all(work);
  if (g_failures > 0) {
    std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all 10 criteria passed\n");
  return 0;
}
