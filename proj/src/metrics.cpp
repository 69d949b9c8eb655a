#include "deeptagrec/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dtr {

namespace {

void check_instances(const std::vector<EvalInstance>& instances, int k) {
  if (instances.empty()) {
    throw std::invalid_argument("metrics: empty instance list");
  }
  for (const auto& inst : instances) {
    if (static_cast<int>(inst.ranked.size()) < k) {
      throw std::invalid_argument(
          "metrics: instance has fewer than k recommendations");
    }
  }
}

int hits_at_k(const EvalInstance& inst, int k) {
  int hits = 0;
  for (int i = 0; i < k; ++i) {
    if (inst.relevant.count(inst.ranked[i])) ++hits;
  }
  return hits;
}

}  // namespace

double precision_at_k(const std::vector<EvalInstance>& instances, int k) {
  check_instances(instances, k);
  double sum = 0.0;
  for (const auto& inst : instances) {
    sum += static_cast<double>(hits_at_k(inst, k)) / k;
  }
  return sum / instances.size();
}

double recall_at_k(const std::vector<EvalInstance>& instances, int k) {
  check_instances(instances, k);
  double sum = 0.0;
  for (const auto& inst : instances) {
    sum += static_cast<double>(hits_at_k(inst, k)) / inst.relevant.size();
  }
  return sum / instances.size();
}

double topk_accuracy(const std::vector<EvalInstance>& instances, int k) {
  check_instances(instances, k);
  double hits = 0.0;
  for (const auto& inst : instances) {
    if (hits_at_k(inst, k) >= 1) hits += 1.0;
  }
  return hits / instances.size();
}

double exactk_accuracy(const std::vector<EvalInstance>& instances, int k) {
  check_instances(instances, k);
  double hits = 0.0;
  for (const auto& inst : instances) {
    if (inst.relevant.count(inst.ranked[k - 1])) hits += 1.0;
  }
  return hits / instances.size();
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["q"] = q;
  auto fill = [](const std::map<int, double>& m) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : m) o[std::to_string(k)] = v;
    return o;
  };
  j["precision"] = fill(precision);
  j["recall"] = fill(recall);
  j["topk"] = fill(topk);
  j["exactk"] = fill(exactk);
  return j.dump(2);
}

MetricsReport evaluate(const Checkpoint& ckpt,
                       const std::vector<QuestionRecord>& test_records,
                       const std::vector<int>& ks, int max_len) {
  if (test_records.empty()) {
    throw std::invalid_argument("evaluate: empty test set");
  }
  const int k_max = *std::max_element(ks.begin(), ks.end());
  if (k_max > ckpt.tag_vocab.size()) {
    throw std::invalid_argument("evaluate: k exceeds tag vocabulary size");
  }
  std::vector<EvalInstance> instances;
  instances.reserve(test_records.size());
  for (const auto& rec : test_records) {
    const EncodedQuestion enc =
        encode_question(rec, ckpt.vocab, ckpt.tag_vocab, max_len);
    EvalInstance inst;
    for (Eigen::Index i = 0; i < enc.target.size(); ++i) {
      if (enc.target[i] > 0.5) inst.relevant.insert(static_cast<int>(i));
    }
    if (inst.relevant.empty()) continue;  // all tags out of vocabulary
    const Vector user_vec = ckpt.user_embeddings.get(rec.user_id);
    const Vector probs =
        predict(ckpt.model, enc, user_vec, ckpt.word_embeddings);
    inst.ranked = rank_tags(probs, k_max);
    instances.push_back(std::move(inst));
  }
  if (instances.empty()) {
    throw std::invalid_argument(
        "evaluate: no test record has an in-vocabulary tag");
  }
  MetricsReport report;
  report.q = static_cast<long>(instances.size());
  for (int k : ks) {
    report.precision[k] = precision_at_k(instances, k);
    report.recall[k] = recall_at_k(instances, k);
    report.topk[k] = topk_accuracy(instances, k);
    report.exactk[k] = exactk_accuracy(instances, k);
  }
  return report;
}

}  // namespace dtr
