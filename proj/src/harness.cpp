#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semreid/condense/condense.hpp"
#include "semreid/data/toy.hpp"
#include "semreid/gan/gan.hpp"
#include "semreid/harness/config.hpp"
#include "semreid/harness/experiment.hpp"
#include "semreid/harness/registry.hpp"

namespace semreid::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- Config

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), fs::path(path).parent_path().string());
}

Config Config::from_string(const std::string& text, const std::string& base_dir) {
  Config cfg;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "include") {
      const fs::path inc = fs::path(value).is_absolute() ? fs::path(value)
                                                         : fs::path(base_dir) / value;
      Config base = Config::load(inc.string());
      // included settings are defaults; keys set so far and later both win
      for (const auto& [k, v] : base.values_)
        if (!cfg.values_.count(k)) cfg.values_[k] = v;
      continue;
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int Config::integer(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoi(it->second);
}

std::int64_t Config::integer64(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoll(it->second);
}

double Config::real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

bool Config::boolean(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "on" || it->second == "1") return true;
  if (it->second == "false" || it->second == "off" || it->second == "0") return false;
  throw ConfigError("config key " + key + ": expected a boolean, got '" + it->second + "'");
}

std::vector<int> Config::int_list(const std::string& key,
                                  const std::vector<int>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

// ---------------------------------------------------------------- plots

namespace {

struct Series {
  std::string color;
  std::vector<std::pair<double, double>> points;
  int marker_every = 0;  // 0 = dense polyline, else sparse markers
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<Series>& series) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double W = 640, H = 400, m = 40;
  const auto sx = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (W - 2 * m); };
  const auto sy = [&](double y) { return H - m - (y - ymin) / (ymax - ymin) * (H - 2 * m); };
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write plot: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  out << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  out << "<line x1='" << m << "' y1='" << m << "' x2='" << m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  out << "<text x='" << m << "' y='" << H - m + 16 << "' font-size='10'>" << xmin << "</text>\n";
  out << "<text x='" << W - m << "' y='" << H - m + 16
      << "' text-anchor='end' font-size='10'>" << xmax << "</text>\n";
  out << "<text x='" << m - 4 << "' y='" << H - m << "' text-anchor='end' font-size='10'>"
      << ymin << "</text>\n";
  out << "<text x='" << m - 4 << "' y='" << m << "' text-anchor='end' font-size='10'>" << ymax
      << "</text>\n";
  for (const auto& s : series) {
    if (s.marker_every > 0) {
      for (std::size_t i = 0; i < s.points.size(); i += s.marker_every)
        out << "<circle cx='" << sx(s.points[i].first) << "' cy='" << sy(s.points[i].second)
            << "' r='2.5' fill='" << s.color << "'/>\n";
    } else {
      out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1' points='";
      for (const auto& [x, y] : s.points) out << sx(x) << "," << sy(y) << " ";
      out << "'/>\n";
    }
  }
  out << "</svg>\n";
}

std::vector<std::vector<double>> read_csv_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("missing artifact: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(std::move(row));
  }
  return rows;
}

void append_manifest(const std::string& run_dir, const std::string& stage,
                     const std::string& artifact_or_skip) {
  std::ofstream out(run_dir + "/artifacts.tsv", std::ios::app);
  out << stage << "\t" << artifact_or_skip << "\n";
}

}  // namespace

// ---------------------------------------------------------------- run

namespace {

struct FoldData {
  std::vector<data::Sample> train;
  std::vector<data::Sample> test;
  std::string tag;
};

gan::GanConfig gan_config_from(const Config& cfg) {
  gan::GanConfig gc;
  gc.latent_dim = cfg.integer("gan.latent_dim", 32);
  gc.image_size = cfg.integer("toy.patch_size", 32);
  gc.channel_schedule = cfg.int_list("gan.channels", {64, 32, 16});
  gc.learning_rate = cfg.real("gan.lr", 2e-4);
  gc.batch_size = cfg.integer("gan.batch", 16);
  gc.max_iterations = cfg.integer64("gan.iterations", 500);
  gc.filter_enabled = cfg.boolean("gan.filter", true);
  gc.filter_threshold = cfg.real("filter.threshold", 0.0);
  return gc;
}

condense::CondenseConfig condense_config_from(const Config& cfg, int n_identities) {
  condense::CondenseConfig cc;
  cc.input_size = cfg.integer("toy.patch_size", 32);
  cc.stage_depths = cfg.int_list("condense.depths", {2, 2});
  cc.growth_rates = cfg.int_list("condense.growth", {8, 8});
  cc.stem_channels = cfg.integer("condense.stem", 16);
  cc.bottleneck = cfg.integer("condense.bottleneck", 2);
  cc.groups = cfg.integer("condense.groups", 4);
  cc.condensation_factor = cfg.integer("condense.factor", 4);
  cc.epochs = cfg.integer("condense.epochs", 20);
  cc.lr0 = cfg.real("condense.lr0", 0.1);
  cc.momentum = cfg.real("condense.momentum", 0.9);
  cc.num_classes = n_identities + 1;
  cc.batch_size = cfg.integer("condense.batch", 32);
  return cc;
}

eval::ScoreMatrix score_test_set(condense::ReidModel& model,
                                 const std::vector<data::Sample>& test) {
  eval::ScoreMatrix m;
  m.scores = condense::score_samples(model, test);
  for (const data::Sample& s : test) m.labels.push_back(s.label);
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path);
  out << text;
}

}  // namespace

RunResult run_experiment(const Config& cfg) {
  const std::string run_dir = cfg.str("out_dir");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer64("seed", 7));
  fs::create_directories(run_dir);
  std::ofstream(run_dir + "/artifacts.tsv").close();  // fresh manifest
  write_text(run_dir + "/config_echo.txt", cfg.echo());
  append_manifest(run_dir, "config", "config_echo.txt");

  // ---- dataset
  data::Dataset dataset;
  const std::string dkind = cfg.str("dataset.kind", "toy");
  if (dkind == "toy") {
    data::ToyConfig tc;
    tc.n_identities = cfg.integer("toy.n_identities", 3);
    tc.sessions = cfg.integer("toy.sessions", 4);
    tc.per_session = cfg.integer("toy.per_session", 60);
    tc.patch_size = cfg.integer("toy.patch_size", 32);
    tc.p_face = cfg.real("toy.p_face", 0.6);
    dataset = data::synth_toy_corpus(tc, seed);
  } else if (dkind == "manifest") {
    dataset = data::load_dataset(cfg.str("dataset.manifest"),
                                 cfg.integer("dataset.n_identities", 1));
  } else {
    throw StageError("dataset", "unknown dataset.kind '" + dkind + "'");
  }
  append_manifest(run_dir, "dataset",
                  "in-memory (" + std::to_string(dataset.samples.size()) + " samples)");

  // ---- splits
  std::vector<FoldData> folds;
  const std::string skind = cfg.str("split.kind", "holdout");
  if (skind == "holdout") {
    auto [train, test] =
        data::holdout_per_class(dataset, cfg.real("split.holdout_fraction", 0.15), seed);
    folds.push_back({std::move(train.samples), std::move(test.samples), "holdout"});
  } else if (skind == "loso") {
    const data::SplitPlan plan = data::make_loso_splits(dataset);
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      data::Dataset train = data::subset_by_sessions(dataset, plan.folds[f].train_sessions);
      data::Dataset test = data::subset_by_sessions(dataset, plan.folds[f].test_sessions);
      folds.push_back({std::move(train.samples), std::move(test.samples),
                       "fold" + std::to_string(f)});
    }
  } else {
    throw StageError("split", "unknown split.kind '" + skind + "'");
  }
  append_manifest(run_dir, "split", skind + " (" + std::to_string(folds.size()) + " fold(s))");

  const std::string detector_kind = cfg.str("filter.detector", "oracle");
  std::unique_ptr<semfilter::KeypointDetector> detector;
  if (detector_kind != "none") detector = semfilter::make_detector(detector_kind);
  const double threshold = cfg.real("filter.threshold", 0.0);

  RunResult result;
  result.run_dir = run_dir;
  const int num_classes = dataset.n_identities + 1;

  for (FoldData& fold : folds) {
    std::vector<data::Sample> train_pool = fold.train;

    // ---- optional direct semantic control of the classifier input (FR)
    if (cfg.boolean("filter.train_input", false)) {
      if (!detector) throw StageError("filter", "filter.train_input needs a detector");
      auto res = semfilter::filter_samples(train_pool, *detector, threshold);
      std::ostringstream os;
      os << "training-set filter retention\n";
      os << "kept " << res.stats.kept << " of " << res.stats.total << " ("
         << res.stats.retention() << ")\n";
      for (const auto& [label, cr] : res.stats.per_class)
        os << "class " << label << " " << cr.kept << "/" << cr.total << "\n";
      const std::string path = run_dir + "/filter_stats_" + fold.tag + ".txt";
      write_text(path, os.str());
      append_manifest(run_dir, "filter", fs::path(path).filename().string());
      train_pool = std::move(res.kept);
      if (train_pool.empty()) throw StageError("filter", "filter removed all training samples");
    } else {
      append_manifest(run_dir, "filter", "skip: filter.train_input = false");
    }

    // ---- adversarial synthesis
    std::vector<data::Sample> synthetic;
    if (cfg.boolean("gan.enabled", false)) {
      try {
        gan::GanConfig gc = gan_config_from(cfg);
        const std::string mode = cfg.str("gan.mode", "generic");
        const int aug_count = cfg.integer("aug.count", 200);
        data::Dataset train_ds;
        train_ds.n_identities = dataset.n_identities;
        train_ds.samples = fold.train;  // GAN always trains on the unfiltered originals pool
        train_ds.rebuild_session_index();
        const std::string labeling_str = cfg.str("aug.labeling", "uniform_soft");
        gan::Labeling labeling = gan::Labeling::uniform_soft;
        if (labeling_str == "unknown_class") labeling = gan::Labeling::unknown_class;
        else if (labeling_str == "class_label") labeling = gan::Labeling::class_label;
        else if (labeling_str != "uniform_soft")
          throw ConfigError("unknown aug.labeling '" + labeling_str + "'");

        gan::GanState base = gan::init_dcgan(gc, seed, "G");
        gan::train_dcgan(base, train_ds, detector.get(), threshold,
                         {gc.max_iterations});
        gan::export_loss_history(base, run_dir + "/gan_G_loss_" + fold.tag + ".csv");
        gan::save_checkpoint(base, run_dir + "/gan_G_" + fold.tag + ".ckpt");
        append_manifest(run_dir, "gan", "gan_G_" + fold.tag + ".ckpt");

        if (mode == "generic") {
          const auto plan = gan::build_augmentation_plan(
              gan::PlanMode::generic, {aug_count}, labeling, dataset.n_identities,
              train_pool.size());
          auto samples = gan::sample_generator(base, plan.entries[0].count, seed + 1,
                                               plan.entries[0].label, plan.entries[0].labeling,
                                               dataset.n_identities);
          synthetic.insert(synthetic.end(), samples.begin(), samples.end());
        } else if (mode == "per_class") {
          std::vector<int> counts(static_cast<std::size_t>(dataset.n_identities) + 1,
                                  aug_count);
          const auto plan = gan::build_augmentation_plan(gan::PlanMode::per_class, counts,
                                                         labeling, dataset.n_identities,
                                                         train_pool.size());
          for (const auto& entry : plan.entries) {
            gan::GanConfig class_gc = gc;
            // semantic control applies to identity classes, not to G_0
            class_gc.filter_enabled = gc.filter_enabled && entry.label != 0;
            gan::GanState gj = gan::warm_start(base, class_gc, entry.label);
            data::Dataset class_ds = data::subset_by_label(train_ds, entry.label);
            if (!class_ds.samples.empty()) {
              gan::train_dcgan(gj, class_ds, detector.get(), threshold,
                               {cfg.integer64("gan.class_iterations", gc.max_iterations / 2)});
            }
            auto samples = gan::sample_generator(gj, entry.count, seed + 2 + entry.label,
                                                 entry.label, entry.labeling,
                                                 dataset.n_identities);
            synthetic.insert(synthetic.end(), samples.begin(), samples.end());
            gan::save_checkpoint(gj, run_dir + "/gan_" + gj.name + "_" + fold.tag + ".ckpt");
          }
        } else {
          throw ConfigError("unknown gan.mode '" + mode + "'");
        }
        std::ostringstream os;
        os << "synthetic " << synthetic.size() << " originals " << train_pool.size()
           << " ratio "
           << (train_pool.empty() ? 0.0
                                  : static_cast<double>(synthetic.size()) /
                                        static_cast<double>(train_pool.size()))
           << "\n";
        write_text(run_dir + "/augmentation_" + fold.tag + ".txt", os.str());
        append_manifest(run_dir, "augmentation", "augmentation_" + fold.tag + ".txt");
      } catch (const DivergenceError& e) {
        throw StageError("gan", e.what(), e.checkpoint_ref);
      }
    } else {
      append_manifest(run_dir, "gan", "skip: gan.enabled = false");
      append_manifest(run_dir, "augmentation", "skip: gan.enabled = false");
    }

    // ---- classifier training
    std::vector<data::Sample> unified = train_pool;
    unified.insert(unified.end(), synthetic.begin(), synthetic.end());
    condense::CondenseConfig cc = condense_config_from(cfg, dataset.n_identities);
    condense::ReidModel model = condense::build_condensenet(cc, seed);
    condense::TrainResult tr;
    try {
      tr = condense::train_reid(model, unified, seed, run_dir);
    } catch (const DivergenceError& e) {
      throw StageError("train-reid", e.what(), e.checkpoint_ref);
    }
    condense::export_train_log(tr, run_dir + "/train_log_" + fold.tag + ".csv");
    condense::save_model(model, run_dir + "/reid_" + fold.tag + ".ckpt");
    append_manifest(run_dir, "train-reid", "reid_" + fold.tag + ".ckpt");

    // ---- evaluation
    eval::ScoreMatrix sm = score_test_set(model, fold.test);
    std::vector<int> ks = cfg.int_list("eval.ks", {1, 2});
    for (int& k : ks) k = std::min(k, num_classes);
    eval::EvalReport report = eval::evaluate_classification(sm, ks);

    if (cfg.boolean("eval.retrieval", false)) {
      // single-query protocol over the test set; session acts as the camera
      std::vector<eval::RetrievalItem> gallery;
      for (const data::Sample& s : fold.test) gallery.push_back({s.label, s.session_id});
      std::vector<int> query_rows;
      for (std::size_t i = 0; i < fold.test.size(); ++i) {
        bool has_match = false;
        for (std::size_t j = 0; j < fold.test.size(); ++j)
          if (j != i && gallery[j].label == gallery[i].label &&
              (gallery[j].cam != gallery[i].cam))
            has_match = true;
        if (has_match) query_rows.push_back(static_cast<int>(i));
      }
      if (!query_rows.empty()) {
        Tensor sim{static_cast<int>(query_rows.size()), static_cast<int>(fold.test.size())};
        for (std::size_t qi = 0; qi < query_rows.size(); ++qi)
          for (std::size_t gj = 0; gj < fold.test.size(); ++gj) {
            double dot = 0.0;  // score-vector cosine as the embedding similarity
            double nq = 0.0, ng = 0.0;
            for (int c = 0; c < num_classes; ++c) {
              const double a = sm.scores.at(query_rows[qi], c);
              const double b = sm.scores.at(static_cast<int>(gj), c);
              dot += a * b;
              nq += a * a;
              ng += b * b;
            }
            sim.at(static_cast<int>(qi), static_cast<int>(gj)) =
                dot / std::sqrt(nq * ng);
          }
        std::vector<eval::RetrievalItem> queries;
        for (int r : query_rows) queries.push_back(gallery[static_cast<std::size_t>(r)]);
        const eval::CmcResult cmc = eval::cmc_single_query(
            sim, queries, gallery, true, cfg.integer("eval.cmc_max_rank", 50));
        report.cmc = cmc.cmc;
        report.retrieval_map = cmc.map;
        std::ofstream out(run_dir + "/cmc_" + fold.tag + ".csv");
        out << "rank,cmc\n";
        for (std::size_t r = 0; r < cmc.cmc.size(); ++r)
          out << r + 1 << "," << cmc.cmc[r] << "\n";
        append_manifest(run_dir, "retrieval", "cmc_" + fold.tag + ".csv");
      } else {
        append_manifest(run_dir, "retrieval", "skip: no query has a cross-camera match");
      }
    } else {
      append_manifest(run_dir, "retrieval", "skip: eval.retrieval = false");
    }

    const std::string report_path = run_dir + "/report_" + fold.tag + ".txt";
    write_text(report_path, report.to_text());
    append_manifest(run_dir, "eval", "report_" + fold.tag + ".txt");
    result.report_paths.push_back(report_path);
    result.fold_reports.push_back(std::move(report));
  }

  // ---- aggregate over folds
  if (result.fold_reports.size() > 1) {
    std::ostringstream os;
    os.precision(17);
    double prec1 = 0.0, map_all = 0.0, map_pid = 0.0;
    for (const auto& r : result.fold_reports) {
      for (const auto& [k, p] : r.prec_at)
        if (k == 1) prec1 += p;
      map_all += r.map_all;
      map_pid += r.map_pid;
    }
    const double n = static_cast<double>(result.fold_reports.size());
    os << "aggregate over " << result.fold_reports.size() << " folds\n";
    os << "mean_prec@1 " << prec1 / n << "\n";
    os << "mean_map_all " << map_all / n << "\n";
    os << "mean_map_pid " << map_pid / n << "\n";
    write_text(run_dir + "/aggregate.txt", os.str());
    append_manifest(run_dir, "aggregate", "aggregate.txt");
  }
  return result;
}

void emit_plots(const std::string& run_dir) {
  if (!fs::exists(run_dir + "/artifacts.tsv"))
    throw LoadError("missing artifact: " + run_dir + "/artifacts.tsv");
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("gan_", 0) == 0 && name.find("_loss_") != std::string::npos &&
        entry.path().extension() == ".csv") {
      const auto rows = read_csv_numeric(entry.path().string());
      Series d_real{"blue", {}, 0};
      Series d_fake{"red", {}, 100};  // generated-sample losses marked sparsely
      Series g{"green", {}, 0};
      for (const auto& r : rows) {
        d_real.points.push_back({r[0], r[1]});
        d_fake.points.push_back({r[0], r[2]});
        g.points.push_back({r[0], r[3]});
      }
      write_svg_chart(run_dir + "/" + name.substr(0, name.size() - 4) + ".svg",
                      "adversarial training loss", {d_real, d_fake, g});
    }
    if (name.rfind("cmc_", 0) == 0 && entry.path().extension() == ".csv") {
      const auto rows = read_csv_numeric(entry.path().string());
      Series s{"blue", {}, 0};
      for (const auto& r : rows) s.points.push_back({r[0], r[1]});
      write_svg_chart(run_dir + "/" + name.substr(0, name.size() - 4) + ".svg", "CMC", {s});
    }
    if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".txt") {
      // confusion heat table: grayscale grid from the report's counts
      std::ifstream in(entry.path());
      std::string line;
      std::vector<std::vector<long long>> counts;
      std::vector<bool> present;
      int n = 0;
      while (std::getline(in, line)) {
        if (line.rfind("confusion ", 0) == 0) {
          n = std::stoi(line.substr(10));
          for (int i = 0; i < n && std::getline(in, line); ++i) {
            if (line == "absent") {
              counts.emplace_back(static_cast<std::size_t>(n), 0);
              present.push_back(false);
              continue;
            }
            std::vector<long long> row;
            std::istringstream ss(line);
            long long v;
            while (ss >> v) row.push_back(v);
            counts.push_back(std::move(row));
            present.push_back(true);
          }
        }
      }
      if (n == 0) continue;
      long long mx = 1;
      for (const auto& row : counts)
        for (long long v : row) mx = std::max(mx, v);
      const double cell = 24.0;
      std::ofstream out(run_dir + "/" + name.substr(0, name.size() - 4) + "_confusion.svg");
      out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << n * cell + 40 << "' height='"
          << n * cell + 40 << "'>\n";
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (!present[static_cast<std::size_t>(i)]) {
            out << "<rect x='" << 20 + j * cell << "' y='" << 20 + i * cell << "' width='"
                << cell << "' height='" << cell << "' fill='none' stroke='gray'/>\n";
            continue;
          }
          const double shade =
              1.0 - static_cast<double>(counts[static_cast<std::size_t>(i)]
                                              [static_cast<std::size_t>(j)]) /
                        static_cast<double>(mx);
          const int gray = static_cast<int>(shade * 255);
          out << "<rect x='" << 20 + j * cell << "' y='" << 20 + i * cell << "' width='" << cell
              << "' height='" << cell << "' fill='rgb(" << gray << "," << gray << "," << gray
              << ")' stroke='black'/>\n";
        }
      out << "</svg>\n";
    }
  }
}

}  // namespace semreid::harness
