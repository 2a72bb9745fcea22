#include "semreid/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "semreid/core/errors.hpp"

namespace semreid::eval {

void ScoreMatrix::validate() const {
  if (scores.ndim() != 2 || static_cast<int>(labels.size()) != rows())
    throw MetricError("score matrix and labels disagree on row count");
  for (int i = 0; i < rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < classes(); ++j) sum += scores.at(i, j);
    if (std::abs(sum - 1.0) > 1e-6)
      throw MetricError("score row " + std::to_string(i) + " sums to " + std::to_string(sum));
    if (labels[static_cast<std::size_t>(i)] < 0 ||
        labels[static_cast<std::size_t>(i)] >= classes())
      throw MetricError("label out of range at row " + std::to_string(i));
  }
}

namespace {

std::vector<int> rows_in_scope(const ScoreMatrix& m, Scope scope) {
  std::vector<int> rows;
  for (int i = 0; i < m.rows(); ++i)
    if (scope == Scope::ALL || m.labels[static_cast<std::size_t>(i)] != 0) rows.push_back(i);
  return rows;
}

// classes ranked by descending score for a row, ties by ascending index
std::vector<int> ranked_classes(const ScoreMatrix& m, int row) {
  std::vector<int> order(static_cast<std::size_t>(m.classes()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return m.scores.at(row, a) > m.scores.at(row, b);
  });
  return order;
}

double average_precision(const std::vector<bool>& relevant_in_rank_order) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < relevant_in_rank_order.size(); ++r) {
    if (relevant_in_rank_order[r]) {
      hits += 1.0;
      sum += hits / static_cast<double>(r + 1);
    }
  }
  return hits > 0.0 ? sum / hits : 0.0;
}

}  // namespace

double prec_at_k(const ScoreMatrix& m, int k, Scope scope) {
  if (k < 1 || k > m.classes())
    throw MetricError("k must lie in [1, N+1], got " + std::to_string(k));
  const std::vector<int> rows = rows_in_scope(m, scope);
  if (rows.empty()) throw MetricError("prec@k is undefined on an empty scope");
  std::size_t hits = 0;
  for (int i : rows) {
    const std::vector<int> order = ranked_classes(m, i);
    for (int r = 0; r < k; ++r)
      if (order[static_cast<std::size_t>(r)] == m.labels[static_cast<std::size_t>(i)]) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

MapResult mean_ap_classification(const ScoreMatrix& m, Scope scope) {
  const std::vector<int> rows = rows_in_scope(m, scope);
  if (rows.empty()) throw MetricError("mAP is undefined on an empty scope");
  MapResult result;
  double sum = 0.0;
  int counted = 0;
  const int first_class = scope == Scope::pID ? 1 : 0;
  for (int c = first_class; c < m.classes(); ++c) {
    bool has_positive = false;
    for (int i : rows)
      if (m.labels[static_cast<std::size_t>(i)] == c) {
        has_positive = true;
        break;
      }
    if (!has_positive) {
      result.skipped_classes.push_back(c);
      continue;
    }
    // one-vs-rest ranking of the in-scope rows by the class-c score
    std::vector<int> order = rows;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (m.scores.at(a, c) != m.scores.at(b, c)) return m.scores.at(a, c) > m.scores.at(b, c);
      return a < b;
    });
    std::vector<bool> rel;
    rel.reserve(order.size());
    for (int i : order) rel.push_back(m.labels[static_cast<std::size_t>(i)] == c);
    sum += average_precision(rel);
    ++counted;
  }
  if (counted == 0) throw MetricError("no class has positives in scope");
  result.map = sum / static_cast<double>(counted);
  return result;
}

CmcResult cmc_single_query(const Tensor& similarity, const std::vector<RetrievalItem>& queries,
                           const std::vector<RetrievalItem>& gallery, bool exclude_same_cam,
                           int max_rank) {
  const int q = similarity.dim(0), g = similarity.dim(1);
  if (static_cast<int>(queries.size()) != q || static_cast<int>(gallery.size()) != g)
    throw MetricError("similarity matrix and item lists disagree");
  if (max_rank <= 0 || max_rank > g) max_rank = g;
  CmcResult result;
  result.cmc.assign(static_cast<std::size_t>(max_rank), 0.0);
  double ap_sum = 0.0;
  for (int i = 0; i < q; ++i) {
    std::vector<int> valid;
    for (int j = 0; j < g; ++j) {
      // junk rule: same identity seen by the same camera is not a valid match
      if (exclude_same_cam && gallery[static_cast<std::size_t>(j)].label ==
                                  queries[static_cast<std::size_t>(i)].label &&
          gallery[static_cast<std::size_t>(j)].cam == queries[static_cast<std::size_t>(i)].cam)
        continue;
      valid.push_back(j);
    }
    std::stable_sort(valid.begin(), valid.end(), [&](int a, int b) {
      if (similarity.at(i, a) != similarity.at(i, b))
        return similarity.at(i, a) > similarity.at(i, b);
      return a < b;
    });
    int first_match = -1;
    std::vector<bool> rel;
    rel.reserve(valid.size());
    for (std::size_t r = 0; r < valid.size(); ++r) {
      const bool match = gallery[static_cast<std::size_t>(valid[r])].label ==
                         queries[static_cast<std::size_t>(i)].label;
      rel.push_back(match);
      if (match && first_match < 0) first_match = static_cast<int>(r);
    }
    if (first_match < 0)
      throw ProtocolError("query " + std::to_string(i) + " has no gallery match");
    for (int r = first_match; r < max_rank; ++r) result.cmc[static_cast<std::size_t>(r)] += 1.0;
    ap_sum += average_precision(rel);
  }
  for (double& v : result.cmc) v /= static_cast<double>(q);
  result.map = ap_sum / static_cast<double>(q);
  return result;
}

ConfusionMatrix confusion_matrix(const ScoreMatrix& m) {
  ConfusionMatrix cm;
  cm.counts = Tensor{m.classes(), m.classes()};
  cm.class_present.assign(static_cast<std::size_t>(m.classes()), false);
  for (int i = 0; i < m.rows(); ++i) {
    int argmax = 0;
    for (int j = 1; j < m.classes(); ++j)
      if (m.scores.at(i, j) > m.scores.at(i, argmax)) argmax = j;
    const int truth = m.labels[static_cast<std::size_t>(i)];
    cm.counts.at(truth, argmax) += 1.0;
    cm.class_present[static_cast<std::size_t>(truth)] = true;
  }
  return cm;
}

EvalReport evaluate_classification(const ScoreMatrix& m, const std::vector<int>& ks) {
  m.validate();
  EvalReport report;
  for (int k : ks) report.prec_at.push_back({k, prec_at_k(m, k, Scope::ALL)});
  MapResult all = mean_ap_classification(m, Scope::ALL);
  report.map_all = all.map;
  for (int c : all.skipped_classes)
    report.warnings.push_back("ALL mAP: class " + std::to_string(c) +
                              " has no positives; excluded");
  bool has_pid = false;
  for (int l : m.labels)
    if (l != 0) has_pid = true;
  if (has_pid) {
    MapResult pid = mean_ap_classification(m, Scope::pID);
    report.map_pid = pid.map;
    for (int c : pid.skipped_classes)
      report.warnings.push_back("p-ID mAP: class " + std::to_string(c) +
                                " has no positives; excluded");
  } else {
    report.warnings.push_back("p-ID metrics skipped: no known-identity rows");
  }
  report.confusion = confusion_matrix(m);
  report.scope_note = "classification (closed set), one-vs-rest AP per class";
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "eval_report v1\n";
  os << "scope_note " << scope_note << "\n";
  for (const auto& [k, v] : prec_at) os << "prec@" << k << " " << v << "\n";
  os << "map_all " << map_all << "\n";
  os << "map_pid " << map_pid << "\n";
  if (!cmc.empty()) {
    os << "retrieval_map " << retrieval_map << "\n";
    os << "cmc";
    for (double v : cmc) os << " " << v;
    os << "\n";
  }
  if (!confusion.counts.empty()) {
    os << "confusion " << confusion.counts.dim(0) << "\n";
    for (int i = 0; i < confusion.counts.dim(0); ++i) {
      if (!confusion.class_present[static_cast<std::size_t>(i)]) {
        os << "absent\n";
        continue;
      }
      for (int j = 0; j < confusion.counts.dim(1); ++j)
        os << (j ? " " : "") << static_cast<long long>(confusion.counts.at(i, j));
      os << "\n";
    }
  }
  for (const std::string& w : warnings) os << "warning " << w << "\n";
  return os.str();
}

}  // namespace semreid::eval
