#pragma once

#include <string>
#include <vector>

#include "semreid/core/tensor.hpp"

namespace semreid::eval {

enum class Scope { ALL, pID };  // pID drops ground-truth label 0 rows

struct ScoreMatrix {
  Tensor scores;            // M x (N+1), rows sum to 1
  std::vector<int> labels;  // M ground-truth labels in {0..N}

  int rows() const { return scores.dim(0); }
  int classes() const { return scores.dim(1); }
  void validate() const;
};

double prec_at_k(const ScoreMatrix& m, int k, Scope scope);

struct MapResult {
  double map = 0.0;
  std::vector<int> skipped_classes;  // no positives in scope; excluded with a warning
};

MapResult mean_ap_classification(const ScoreMatrix& m, Scope scope);

struct RetrievalItem {
  int label = 0;
  int cam = 0;  // camera/session id, used by the exclusion rule
};

struct CmcResult {
  std::vector<double> cmc;  // cmc[r] = P(first correct match at rank <= r+1)
  double map = 0.0;         // retrieval mean average precision
};

// Single-query protocol: for each query, gallery entries are ranked by
// similarity; entries sharing the query's label AND camera are excluded when
// exclude_same_cam is set. similarity is Q x G (higher = closer).
CmcResult cmc_single_query(const Tensor& similarity, const std::vector<RetrievalItem>& queries,
                           const std::vector<RetrievalItem>& gallery, bool exclude_same_cam,
                           int max_rank = 0);

struct ConfusionMatrix {
  Tensor counts;                     // (N+1) x (N+1), (true, predicted)
  std::vector<bool> class_present;   // false rows correspond to absent classes
};

ConfusionMatrix confusion_matrix(const ScoreMatrix& m);

struct EvalReport {
  std::vector<std::pair<int, double>> prec_at;  // (k, precision)
  double map_all = 0.0;
  double map_pid = 0.0;
  std::vector<double> cmc;  // empty unless a retrieval protocol ran
  double retrieval_map = 0.0;
  ConfusionMatrix confusion;
  std::string scope_note;
  std::vector<std::string> warnings;

  std::string to_text() const;  // deterministic serialization
};

EvalReport evaluate_classification(const ScoreMatrix& m, const std::vector<int>& ks);

}  // namespace semreid::eval
