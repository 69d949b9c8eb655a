#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "deeptagrec/checkpoint.hpp"
#include "deeptagrec/model.hpp"

namespace dtr {

struct EvalInstance {
  std::set<int> relevant;      // asker's tag indices, non-empty
  std::vector<int> ranked;     // recommended tag indices, duplicate-free
};

/// mean over instances of |relevant ∩ top-k| / k
double precision_at_k(const std::vector<EvalInstance>& instances, int k);
/// mean over instances of |relevant ∩ top-k| / |relevant|
double recall_at_k(const std::vector<EvalInstance>& instances, int k);
/// fraction of instances with at least one relevant tag in the top k
double topk_accuracy(const std::vector<EvalInstance>& instances, int k);
/// fraction of instances whose k-th ranked tag (1-indexed) is relevant
double exactk_accuracy(const std::vector<EvalInstance>& instances, int k);

struct MetricsReport {
  long q = 0;
  std::map<int, double> precision;
  std::map<int, double> recall;
  std::map<int, double> topk;
  std::map<int, double> exactk;

  std::string to_json() const;
};

/// Runs predict + rank_tags per test record and computes all four metrics
/// for every k in ks. Records whose tags are all out-of-vocabulary are
/// skipped (an empty relevant set has no defined recall).
MetricsReport evaluate(const Checkpoint& ckpt,
                       const std::vector<QuestionRecord>& test_records,
                       const std::vector<int>& ks, int max_len = 300);

}  // namespace dtr
