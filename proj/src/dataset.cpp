#include "semreid/data/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semreid/core/errors.hpp"
#include "semreid/core/rng.hpp"
#include "semreid/data/ppm.hpp"

namespace semreid::data {

namespace fs = std::filesystem;

Dataset load_dataset(const std::string& manifest_path, int n_identities) {
  std::ifstream in(manifest_path);
  if (!in) throw LoadError("cannot open manifest: " + manifest_path);
  std::string line;
  if (!std::getline(in, line)) throw LoadError("empty manifest: " + manifest_path);
  if (line != "path,label,session,tracklet")
    throw SchemaError("manifest header must be 'path,label,session,tracklet', got '" + line +
                      "'");
  const fs::path base = fs::path(manifest_path).parent_path();
  Dataset ds;
  ds.n_identities = n_identities;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string path_field, label_field, session_field, tracklet_field;
    if (!std::getline(ss, path_field, ',') || !std::getline(ss, label_field, ',') ||
        !std::getline(ss, session_field, ',') || !std::getline(ss, tracklet_field, ','))
      throw SchemaError("manifest row " + std::to_string(row) + ": expected 4 fields");
    Sample s;
    s.label = std::stoi(label_field);
    s.session_id = std::stoi(session_field);
    s.tracklet_id = std::stoi(tracklet_field);
    if (s.label < 0 || s.label > n_identities)
      throw SchemaError("manifest row " + std::to_string(row) + ": label " +
                        std::to_string(s.label) + " outside {0.." +
                        std::to_string(n_identities) + "}");
    if (s.session_id < 0 || s.tracklet_id < 0)
      throw SchemaError("manifest row " + std::to_string(row) + ": negative session/tracklet");
    const fs::path img_path = fs::path(path_field).is_absolute()
                                  ? fs::path(path_field)
                                  : base / path_field;
    if (!fs::exists(img_path))
      throw LoadError("manifest row " + std::to_string(row) + ": missing image '" +
                      img_path.string() + "'");
    s.image = read_ppm(img_path.string());
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw LoadError("manifest has no samples: " + manifest_path);
  ds.rebuild_session_index();
  return ds;
}

SplitPlan make_loso_splits(const Dataset& dataset) {
  std::vector<int> sessions;
  for (const auto& [sid, idx] : dataset.session_index)
    if (!idx.empty()) sessions.push_back(sid);
  if (sessions.size() < 2)
    throw SplitError("leave-one-session-out needs >= 2 sessions, got " +
                     std::to_string(sessions.size()));
  SplitPlan plan;
  for (int test_sid : sessions) {
    SplitFold fold;
    fold.test_sessions = {test_sid};
    for (int sid : sessions)
      if (sid != test_sid) fold.train_sessions.push_back(sid);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

std::pair<Dataset, Dataset> holdout_per_class(const Dataset& dataset, double fraction,
                                              std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw ConfigError("holdout fraction must lie in (0,1), got " + std::to_string(fraction));
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    by_class[dataset.samples[i].label].push_back(i);
  for (const auto& [label, idx] : by_class)
    if (idx.size() < 2)
      throw HoldoutError("class " + std::to_string(label) + " has only " +
                         std::to_string(idx.size()) + " sample(s); holdout needs >= 2");
  Rng rng(seed);
  std::vector<bool> to_test(dataset.samples.size(), false);
  for (auto& [label, idx] : by_class) {
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < n_test; ++i) to_test[order[i]] = true;
  }
  Dataset train, test;
  train.n_identities = test.n_identities = dataset.n_identities;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    (to_test[i] ? test : train).samples.push_back(dataset.samples[i]);
  train.rebuild_session_index();
  test.rebuild_session_index();
  return {std::move(train), std::move(test)};
}

Dataset subset_by_sessions(const Dataset& dataset, const std::vector<int>& sessions) {
  Dataset out;
  out.n_identities = dataset.n_identities;
  for (const auto& s : dataset.samples)
    if (std::find(sessions.begin(), sessions.end(), s.session_id) != sessions.end())
      out.samples.push_back(s);
  out.rebuild_session_index();
  return out;
}

Dataset subset_by_label(const Dataset& dataset, int label) {
  Dataset out;
  out.n_identities = dataset.n_identities;
  for (const auto& s : dataset.samples)
    if (s.label == label) out.samples.push_back(s);
  out.rebuild_session_index();
  return out;
}

}  // namespace semreid::data
