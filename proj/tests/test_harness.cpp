#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "semreid/core/errors.hpp"
#include "semreid/harness/config.hpp"
#include "semreid/harness/experiment.hpp"
#include "semreid/harness/registry.hpp"

using namespace semreid;
using harness::Config;
using harness::ResultsRegistry;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& tag) {
  const std::string dir =
      (fs::temp_directory_path() / ("semreid_harness_" + tag + "_" + std::to_string(::getpid())))
          .string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string registry_path() {
  // tests run from the build tree; the registry ships with the sources
  for (const char* p : {"../registry/paper_results.tsv", "../../registry/paper_results.tsv",
                        "registry/paper_results.tsv", "/root/proj/registry/paper_results.tsv"})
    if (fs::exists(p)) return p;
  FAIL("registry/paper_results.tsv not found");
  return "";
}

// key -> artifact/skip column of artifacts.tsv (a stage may repeat per fold)
std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& run_dir) {
  std::ifstream in(run_dir + "/artifacts.tsv");
  REQUIRE(in.good());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

bool manifest_has(const std::vector<std::pair<std::string, std::string>>& rows,
                  const std::string& stage, const std::string& needle) {
  for (const auto& [s, a] : rows)
    if (s == stage && a.find(needle) != std::string::npos) return true;
  return false;
}

// shared tiny experiment: 2 identities, 2 sessions, 16x16 patches, 1 epoch
Config tiny_experiment(const std::string& out_dir) {
  Config cfg;
  cfg.set("out_dir", out_dir);
  cfg.set("seed", "11");
  cfg.set("dataset.kind", "toy");
  cfg.set("toy.n_identities", "2");
  cfg.set("toy.sessions", "2");
  cfg.set("toy.per_session", "24");
  cfg.set("toy.patch_size", "16");
  cfg.set("toy.p_face", "0.6");
  cfg.set("split.kind", "holdout");
  cfg.set("split.holdout_fraction", "0.25");
  cfg.set("filter.detector", "oracle");
  cfg.set("filter.threshold", "0.5");
  cfg.set("gan.enabled", "false");
  cfg.set("condense.epochs", "1");
  cfg.set("condense.batch", "8");
  cfg.set("eval.ks", "1,2");
  return cfg;
}

}  // namespace

// ------------------------------------------------------------------ Config

TEST_CASE("config parses comments, blanks and typed values") {
  const Config cfg = Config::from_string(
      "# a comment line\n"
      "\n"
      "alpha = 3   # trailing comment\n"
      "  beta.gamma =  -2.5 \n"
      "flag = on\n"
      "other = off\n"
      "name = hello world\n"
      "list = 4,8,15\n");
  CHECK(cfg.integer("alpha", 0) == 3);
  CHECK(cfg.real("beta.gamma", 0.0) == doctest::Approx(-2.5));
  CHECK(cfg.boolean("flag", false));
  CHECK_FALSE(cfg.boolean("other", true));
  CHECK(cfg.str("name") == "hello world");
  CHECK(cfg.int_list("list", {}) == std::vector<int>{4, 8, 15});
  CHECK(cfg.has("alpha"));
  CHECK_FALSE(cfg.has("missing"));
  // fallbacks only fill absent keys
  CHECK(cfg.integer("absent", 42) == 42);
  CHECK(cfg.str("absent", "d") == "d");
  CHECK(cfg.int_list("absent", {1}) == std::vector<int>{1});
}

TEST_CASE("config rejects malformed input and bad booleans") {
  CHECK_THROWS_AS(Config::from_string("keyvalue\n"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("b = maybe\n").boolean("b", false), ConfigError);
  CHECK_THROWS_AS(Config::from_string("a = 1\n").str("nope"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("config include inheritance: included values are defaults, includer wins") {
  const std::string dir = fresh_dir("cfg_inc");
  write_file(dir + "/base.cfg", "a = 1\nb = 2\nc = 3\n");
  write_file(dir + "/derived.cfg", "b = 20\ninclude = base.cfg\nc = 30\n");
  const Config cfg = Config::load(dir + "/derived.cfg");
  CHECK(cfg.integer("a", 0) == 1);    // inherited
  CHECK(cfg.integer("b", 0) == 20);   // set before the include still wins
  CHECK(cfg.integer("c", 0) == 30);   // set after the include wins
  // two-level chains resolve relative to each file's directory
  fs::create_directories(dir + "/sub");
  write_file(dir + "/sub/leaf.cfg", "include = ../base.cfg\na = 100\n");
  const Config leaf = Config::load(dir + "/sub/leaf.cfg");
  CHECK(leaf.integer("a", 0) == 100);
  CHECK(leaf.integer("b", 0) == 2);
  fs::remove_all(dir);
}

TEST_CASE("config echo is deterministic and key-sorted") {
  const Config a = Config::from_string("z = 1\na = 2\nm = 3\n");
  const Config b = Config::from_string("m = 3\nz = 1\na = 2\n");
  CHECK(a.echo() == b.echo());
  CHECK(a.echo() == "a = 2\nm = 3\nz = 1\n");
}

// ---------------------------------------------------------------- registry

TEST_CASE("registry serializes back to the exact file content") {
  const std::string path = registry_path();
  const ResultsRegistry reg = ResultsRegistry::load(path);
  CHECK(reg.serialize() == slurp(path));
  CHECK(reg.rows().size() > 10);
}

TEST_CASE("registry row lookup returns verbatim published strings") {
  const ResultsRegistry reg = ResultsRegistry::load(registry_path());

  const auto& lima1 = reg.row("lima", "1");
  CHECK(lima1.raw("all_prec1") == "89.1");
  CHECK(lima1.value("all_prec1") == doctest::Approx(89.1));
  CHECK(lima1.raw("pid_map") == "-");
  CHECK_FALSE(lima1.value("pid_map").has_value());

  const auto& lima6 = reg.row("lima", "6");
  CHECK(lima6.raw("all_prec1") == "92.58");
  CHECK(lima6.raw("pid_prec1") == "94.57");
  CHECK(lima6.raw("all_map") == "91.14");
  CHECK(lima6.raw("pid_map") == "97.02");

  const auto& duke5 = reg.row("duke", "5");
  CHECK(duke5.raw("prec1") == "88.84");
  CHECK(duke5.value("map_sq") == doctest::Approx(20.6));

  CHECK_THROWS_AS(reg.row("lima", "99"), RegistryError);
}

TEST_CASE("compare_to_registry renders computed and published columns") {
  const ResultsRegistry reg = ResultsRegistry::load(registry_path());
  eval::EvalReport report;
  report.prec_at = {{1, 0.875}};
  report.map_all = 0.8;
  report.map_pid = 0.9;
  const std::string text = harness::compare_to_registry(report, reg, "lima", "2");
  CHECK(text.find("No Augmentation (R)") != std::string::npos);
  CHECK(text.find("91.98") != std::string::npos);  // published prec@1
  CHECK(text.find("87.5") != std::string::npos);   // computed prec@1, percent
}

// ----------------------------------------------------------- run_experiment

TEST_CASE("run_experiment without augmentation records skips and artifacts") {
  const std::string dir = fresh_dir("run_noaug");
  const Config cfg = tiny_experiment(dir + "/run");
  const harness::RunResult res = harness::run_experiment(cfg);

  CHECK(res.run_dir == dir + "/run");
  REQUIRE(res.report_paths.size() == 1);
  REQUIRE(res.fold_reports.size() == 1);
  CHECK(fs::exists(res.report_paths[0]));
  CHECK(slurp(res.report_paths[0]) == res.fold_reports[0].to_text());
  CHECK(slurp(dir + "/run/config_echo.txt") == cfg.echo());

  const auto rows = read_manifest(dir + "/run");
  // every pipeline stage leaves a line, artifact or skip reason
  for (const char* stage : {"config", "dataset", "split", "filter", "gan", "augmentation",
                            "train-reid", "retrieval", "eval"})
    CHECK(manifest_has(rows, stage, ""));
  CHECK(manifest_has(rows, "gan", "skip: gan.enabled = false"));
  CHECK(manifest_has(rows, "augmentation", "skip: gan.enabled = false"));
  CHECK(manifest_has(rows, "filter", "skip: filter.train_input = false"));
  CHECK(manifest_has(rows, "retrieval", "skip: eval.retrieval = false"));
  CHECK(manifest_has(rows, "split", "holdout (1 fold(s))"));
  CHECK(fs::exists(dir + "/run/reid_holdout.ckpt"));
  CHECK(fs::exists(dir + "/run/train_log_holdout.csv"));
  CHECK(fs::exists(dir + "/run/report_holdout.txt"));
  CHECK_FALSE(fs::exists(dir + "/run/aggregate.txt"));  // single fold
  fs::remove_all(dir);
}

TEST_CASE("run_experiment can gate the classifier training set directly") {
  const std::string dir = fresh_dir("run_fr");
  Config cfg = tiny_experiment(dir + "/run");
  cfg.set("filter.train_input", "true");
  harness::run_experiment(cfg);

  const std::string stats_path = dir + "/run/filter_stats_holdout.txt";
  REQUIRE(fs::exists(stats_path));
  const std::string stats = slurp(stats_path);
  CHECK(stats.find("training-set filter retention") != std::string::npos);
  CHECK(stats.find("kept ") != std::string::npos);
  CHECK(stats.find("class 0 ") != std::string::npos);
  CHECK(manifest_has(read_manifest(dir + "/run"), "filter", "filter_stats_holdout.txt"));
  fs::remove_all(dir);
}

TEST_CASE("run_experiment leave-one-session-out produces per-fold reports and an aggregate") {
  const std::string dir = fresh_dir("run_loso");
  Config cfg = tiny_experiment(dir + "/run");
  cfg.set("split.kind", "loso");
  const harness::RunResult res = harness::run_experiment(cfg);

  REQUIRE(res.fold_reports.size() == 2);  // one fold per session
  CHECK(fs::exists(dir + "/run/report_fold0.txt"));
  CHECK(fs::exists(dir + "/run/report_fold1.txt"));
  REQUIRE(fs::exists(dir + "/run/aggregate.txt"));
  const std::string agg = slurp(dir + "/run/aggregate.txt");
  CHECK(agg.find("aggregate over 2 folds") != std::string::npos);

  // the aggregate means match the per-fold reports
  double prec1 = 0.0;
  for (const auto& r : res.fold_reports)
    for (const auto& [k, p] : r.prec_at)
      if (k == 1) prec1 += p;
  std::ostringstream expect;
  expect.precision(17);
  expect << "mean_prec@1 " << prec1 / 2.0 << "\n";
  CHECK(agg.find(expect.str()) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run_experiment with synthesis writes generator artifacts and the mix ratio") {
  const std::string dir = fresh_dir("run_gan");
  Config cfg = tiny_experiment(dir + "/run");
  cfg.set("gan.enabled", "true");
  cfg.set("gan.mode", "generic");
  cfg.set("gan.latent_dim", "4");
  cfg.set("gan.channels", "8,8");
  cfg.set("gan.batch", "4");
  cfg.set("gan.iterations", "4");
  cfg.set("gan.filter", "false");
  cfg.set("aug.count", "8");
  cfg.set("aug.labeling", "uniform_soft");
  harness::run_experiment(cfg);

  CHECK(fs::exists(dir + "/run/gan_G_holdout.ckpt"));
  CHECK(fs::exists(dir + "/run/gan_G_loss_holdout.csv"));
  REQUIRE(fs::exists(dir + "/run/augmentation_holdout.txt"));
  const std::string aug = slurp(dir + "/run/augmentation_holdout.txt");
  CHECK(aug.find("synthetic 8 ") != std::string::npos);
  const auto rows = read_manifest(dir + "/run");
  CHECK(manifest_has(rows, "gan", "gan_G_holdout.ckpt"));
  CHECK(manifest_has(rows, "augmentation", "augmentation_holdout.txt"));
  fs::remove_all(dir);
}

TEST_CASE("run_experiment is reproducible: same config and seed, identical reports") {
  const std::string dir = fresh_dir("run_repro");
  Config a = tiny_experiment(dir + "/a");
  Config b = tiny_experiment(dir + "/b");
  b.set("out_dir", dir + "/b");
  harness::run_experiment(a);
  harness::run_experiment(b);
  CHECK(slurp(dir + "/a/report_holdout.txt") == slurp(dir + "/b/report_holdout.txt"));
  CHECK(slurp(dir + "/a/train_log_holdout.csv") == slurp(dir + "/b/train_log_holdout.csv"));

  Config c = tiny_experiment(dir + "/c");
  c.set("seed", "12");
  harness::run_experiment(c);
  // a different seed draws a different corpus and split; the report may differ
  // but the run must still complete with the same artifact set
  CHECK(fs::exists(dir + "/c/report_holdout.txt"));
  fs::remove_all(dir);
}

TEST_CASE("run_experiment rejects unknown stage kinds") {
  const std::string dir = fresh_dir("run_bad");
  Config cfg = tiny_experiment(dir + "/run");
  cfg.set("dataset.kind", "imagenet");
  CHECK_THROWS_AS(harness::run_experiment(cfg), StageError);

  Config cfg2 = tiny_experiment(dir + "/run2");
  cfg2.set("split.kind", "kfold");
  CHECK_THROWS_AS(harness::run_experiment(cfg2), StageError);

  Config cfg3 = tiny_experiment(dir + "/run3");
  cfg3.set("filter.detector", "none");
  cfg3.set("filter.train_input", "true");
  CHECK_THROWS_AS(harness::run_experiment(cfg3), StageError);
  fs::remove_all(dir);
}

// --------------------------------------------------------------- emit_plots

TEST_CASE("emit_plots converts run artifacts to SVG charts") {
  const std::string dir = fresh_dir("plots");
  write_file(dir + "/artifacts.tsv", "config\tconfig_echo.txt\n");
  write_file(dir + "/gan_G_loss_holdout.csv",
             "iteration,d_loss_real,d_loss_fake,g_loss\n"
             "1,0.9,0.8,0.7\n2,0.6,0.5,0.4\n");
  write_file(dir + "/cmc_holdout.csv", "rank,cmc\n1,0.5\n2,0.75\n3,1\n");
  write_file(dir + "/report_holdout.txt",
             "prec@1 0.5\nmap_all 0.5\nmap_pid 0.5\nconfusion 2\n3 1\n0 4\n");
  harness::emit_plots(dir);

  for (const char* name : {"gan_G_loss_holdout.svg", "cmc_holdout.svg",
                           "report_holdout_confusion.svg"}) {
    INFO(name);
    REQUIRE(fs::exists(dir + "/" + std::string(name)));
    CHECK(slurp(dir + "/" + std::string(name)).find("<svg") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("emit_plots requires an existing run manifest") {
  const std::string dir = fresh_dir("plots_missing");
  CHECK_THROWS_AS(harness::emit_plots(dir), LoadError);
  fs::remove_all(dir);
}

TEST_CASE("emit_plots on a real run directory emits the confusion chart") {
  const std::string dir = fresh_dir("plots_run");
  const Config cfg = tiny_experiment(dir + "/run");
  harness::run_experiment(cfg);
  harness::emit_plots(dir + "/run");
  CHECK(fs::exists(dir + "/run/report_holdout_confusion.svg"));
  fs::remove_all(dir);
}
