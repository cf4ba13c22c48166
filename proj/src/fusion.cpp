#include "finprog/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace finprog {

double logistic_loss(const Matrix& features, const std::vector<int>& labels,
                     const std::vector<double>& weights, double bias,
                     double l2_lambda, std::vector<double>* grad_weights,
                     double* grad_bias) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (weights.size() != d || labels.size() != n)
    throw Error(ErrorKind::DimensionMismatch,
                "weights/labels do not match the feature matrix");

  double loss = 0.0;
  if (grad_weights) grad_weights->assign(d, 0.0);
  if (grad_bias) *grad_bias = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    double z = bias;
    for (std::size_t c = 0; c < d; ++c) z += row[c] * weights[c];
    loss += labels[i] ? softplus(-z) : softplus(z);
    if (grad_weights || grad_bias) {
      const double g = sigmoid(z) - static_cast<double>(labels[i]);
      if (grad_weights)
        for (std::size_t c = 0; c < d; ++c) (*grad_weights)[c] += g * row[c];
      if (grad_bias) *grad_bias += g;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  double penalty = 0.0;
  for (const double w : weights) penalty += w * w;
  loss += 0.5 * l2_lambda * penalty;
  if (grad_weights)
    for (std::size_t c = 0; c < d; ++c)
      (*grad_weights)[c] = (*grad_weights)[c] * inv_n + l2_lambda * weights[c];
  if (grad_bias) *grad_bias *= inv_n;
  return loss;
}

LRModel lr_train(const Matrix& features, const std::vector<int>& labels,
                 const LRHyper& hyper) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (labels.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "one label per feature row");
  if (n < 2 || d < 1)
    throw Error(ErrorKind::DimensionMismatch,
                "need at least two rows and one feature");
  for (const double v : features.data)
    if (!std::isfinite(v))
      throw Error(ErrorKind::NonFiniteFeature, "non-finite feature value");
  std::size_t positives = 0;
  for (const int label : labels) {
    if (label != 0 && label != 1)
      throw Error(ErrorKind::SchemaViolation, "labels must be 0 or 1");
    positives += label;
  }
  if (positives == 0 || positives == n)
    throw Error(ErrorKind::DegenerateLabels,
                "training labels contain a single class");

  // z-score each column; constant columns stay at zero after centering.
  std::vector<double> mean(d, 0.0), stddev(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
  }
  for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      const double delta = row[c] - mean[c];
      stddev[c] += delta * delta;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    stddev[c] = std::sqrt(stddev[c] / static_cast<double>(n));
    if (stddev[c] < 1e-12) stddev[c] = 1.0;
  }
  Matrix standardized(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = features.row(i);
    auto dst = standardized.row(i);
    for (std::size_t c = 0; c < d; ++c) dst[c] = (src[c] - mean[c]) / stddev[c];
  }

  std::vector<double> w(d, 0.0), grad_w(d, 0.0);
  double b = 0.0, grad_b = 0.0;
  LRModel model;
  model.meta.loss_history.reserve(hyper.iterations);
  for (std::size_t it = 0; it < hyper.iterations; ++it) {
    const double loss =
        logistic_loss(standardized, labels, w, b, hyper.l2_lambda, &grad_w,
                      &grad_b);
    model.meta.loss_history.push_back(loss);
    for (std::size_t c = 0; c < d; ++c) w[c] -= hyper.learning_rate * grad_w[c];
    b -= hyper.learning_rate * grad_b;
  }
  model.meta.final_loss =
      logistic_loss(standardized, labels, w, b, hyper.l2_lambda);
  model.meta.iterations = hyper.iterations;
  model.meta.l2_lambda = hyper.l2_lambda;
  model.meta.seed = hyper.seed;

  // Fold the standardization into the weights so prediction runs on raw
  // features: w.(x - mu)/sigma + b == (w/sigma).x + (b - w.mu/sigma).
  model.weights.resize(d);
  model.bias = b;
  for (std::size_t c = 0; c < d; ++c) {
    model.weights[c] = w[c] / stddev[c];
    model.bias -= w[c] * mean[c] / stddev[c];
  }
  return model;
}

double lr_predict_one(const LRModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size())
    throw Error(ErrorKind::DimensionMismatch,
                "feature dimension " + std::to_string(features.size()) +
                    " does not match model dimension " +
                    std::to_string(model.weights.size()));
  double z = model.bias;
  for (std::size_t c = 0; c < features.size(); ++c)
    z += features[c] * model.weights[c];
  return sigmoid(z);
}

std::vector<double> lr_predict(const LRModel& model, const Matrix& features) {
  if (features.cols != model.weights.size())
    throw Error(ErrorKind::DimensionMismatch,
                "feature dimension does not match model dimension");
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i)
    out[i] = lr_predict_one(model, features.row(i));
  return out;
}

namespace {

void check_scores_finite(const ScoreRecord& record) {
  for (const auto& [fact, entry] : record.fact_scores) {
    const bool ok = entry.has_start_end
                        ? std::isfinite(entry.start) && std::isfinite(entry.end)
                        : std::isfinite(entry.score);
    if (!ok)
      throw Error(ErrorKind::NonFiniteFeature,
                  "non-finite score for fact \"" + fact + "\" of example \"" +
                      record.example_id + "\"");
  }
}

}  // namespace

StackDataset build_stack_dataset(
    const std::vector<ScoreRecord>& records,
    const std::map<std::string, std::set<std::string>>& gold_ids) {
  StackDataset dataset;
  std::set<std::string> models;
  // example -> model -> record
  std::map<std::string, std::map<std::string, const ScoreRecord*>> by_example;
  for (const auto& record : records) {
    check_scores_finite(record);
    models.insert(record.model);
    auto& slot = by_example[record.example_id];
    if (!slot.emplace(record.model, &record).second)
      throw Error(ErrorKind::ModelSetMismatch,
                  "duplicate score record for example \"" + record.example_id +
                      "\" and model \"" + record.model + "\"");
  }
  dataset.model_names.assign(models.begin(), models.end());

  // Count rows first: one per (example, fact in any model's record).
  std::size_t rows = 0;
  for (const auto& [example_id, per_model] : by_example) {
    std::set<std::string> facts;
    for (const auto& [model, record] : per_model)
      for (const auto& [fact, entry] : record->fact_scores) facts.insert(fact);
    rows += facts.size();
  }
  dataset.features = Matrix(rows, dataset.model_names.size());
  dataset.labels.reserve(rows);
  dataset.keys.reserve(rows);

  std::size_t r = 0;
  for (const auto& [example_id, per_model] : by_example) {
    std::set<std::string> facts;
    for (const auto& [model, record] : per_model)
      for (const auto& [fact, entry] : record->fact_scores) facts.insert(fact);
    const auto gold_it = gold_ids.find(example_id);
    for (const auto& fact : facts) {
      auto row = dataset.features.row(r);
      for (std::size_t c = 0; c < dataset.model_names.size(); ++c) {
        const auto model_it = per_model.find(dataset.model_names[c]);
        const ScoreEntry* entry = nullptr;
        if (model_it != per_model.end()) {
          const auto fact_it = model_it->second->fact_scores.find(fact);
          if (fact_it != model_it->second->fact_scores.end())
            entry = &fact_it->second;
        }
        if (entry) {
          row[c] = entry->effective();
        } else {
          row[c] = 0.0;
          ++dataset.imputed;
        }
      }
      dataset.labels.push_back(
          gold_it != gold_ids.end() && gold_it->second.count(fact) ? 1 : 0);
      dataset.keys.emplace_back(example_id, fact);
      ++r;
    }
  }
  return dataset;
}

LRModel stack_train(const std::vector<ScoreRecord>& records,
                    const std::map<std::string, std::set<std::string>>& gold_ids,
                    const LRHyper& hyper) {
  StackDataset dataset = build_stack_dataset(records, gold_ids);
  LRModel model = lr_train(dataset.features, dataset.labels, hyper);
  model.meta.feature_names = dataset.model_names;
  model.meta.imputed_scores = dataset.imputed;
  return model;
}

FusedSelection stack_rank(const LRModel& model,
                          const std::vector<ScoreRecord>& records,
                          std::size_t k, bool positive_only, double threshold) {
  if (records.empty())
    throw Error(ErrorKind::SchemaViolation,
                "stack_rank needs at least one score record");
  FusedSelection selection;
  selection.example_id = records.front().example_id;
  std::map<std::string, const ScoreRecord*> per_model;
  std::set<std::string> facts;
  for (const auto& record : records) {
    if (record.example_id != selection.example_id)
      throw Error(ErrorKind::DatasetIdMismatch,
                  "stack_rank got records for more than one example");
    check_scores_finite(record);
    if (!per_model.emplace(record.model, &record).second)
      throw Error(ErrorKind::ModelSetMismatch,
                  "duplicate score record for model \"" + record.model + "\"");
    for (const auto& [fact, entry] : record.fact_scores) facts.insert(fact);
  }

  std::vector<std::string> columns = model.meta.feature_names;
  if (columns.empty())
    for (const auto& [name, record] : per_model) columns.push_back(name);
  if (columns.size() != model.weights.size())
    throw Error(ErrorKind::DimensionMismatch,
                "model expects " + std::to_string(model.weights.size()) +
                    " score columns, got " + std::to_string(columns.size()));

  std::vector<double> row(columns.size());
  for (const auto& fact : facts) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row[c] = 0.0;
      const auto model_it = per_model.find(columns[c]);
      if (model_it != per_model.end()) {
        const auto fact_it = model_it->second->fact_scores.find(fact);
        if (fact_it != model_it->second->fact_scores.end())
          row[c] = fact_it->second.effective();
      }
    }
    selection.fused_scores[fact] = lr_predict_one(model, row);
  }

  selection.ranked_fact_ids.assign(facts.begin(), facts.end());
  std::sort(selection.ranked_fact_ids.begin(), selection.ranked_fact_ids.end(),
            [&](const std::string& a, const std::string& b) {
              const double pa = selection.fused_scores.at(a);
              const double pb = selection.fused_scores.at(b);
              if (pa != pb) return pa > pb;
              return a < b;
            });

  const std::size_t limit = std::min(k, selection.ranked_fact_ids.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const std::string& fact = selection.ranked_fact_ids[i];
    if (positive_only && selection.fused_scores.at(fact) <= threshold) continue;
    selection.selected.push_back(fact);
  }
  if (positive_only && selection.selected.empty() &&
      !selection.ranked_fact_ids.empty())
    selection.selected.push_back(selection.ranked_fact_ids.front());
  return selection;
}

namespace {

struct VoteGroup {
  double total = 0.0;
  double max_weight = 0.0;
  std::size_t first_index = 0;
  std::string display;  // raw program of the group's first candidate
};

VoteResult pick_winner(const std::map<std::string, VoteGroup>& groups) {
  const VoteGroup* best = nullptr;
  for (const auto& [key, group] : groups) {
    if (!best) {
      best = &group;
      continue;
    }
    if (group.total != best->total) {
      if (group.total > best->total) best = &group;
      continue;
    }
    if (group.max_weight != best->max_weight) {
      if (group.max_weight > best->max_weight) best = &group;
      continue;
    }
    if (group.display != best->display) {
      if (group.display < best->display) best = &group;
      continue;
    }
    if (group.first_index < best->first_index) best = &group;
  }
  return {best->display, best->total};
}

void check_candidate(const VoteCandidate& candidate) {
  if (!std::isfinite(candidate.model_weight))
    throw Error(ErrorKind::NonFiniteFeature, "non-finite vote weight");
  if (candidate.model_weight <= 0.0)
    throw Error(ErrorKind::SchemaViolation,
                "vote weight must be positive, got " +
                    format_number(candidate.model_weight));
}

}  // namespace

VoteResult weighted_vote_detail(const std::vector<VoteCandidate>& candidates,
                                EquivalenceMode mode) {
  if (candidates.empty())
    throw Error(ErrorKind::NoCandidates, "no candidate programs to vote on");
  std::map<std::string, VoteGroup> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const VoteCandidate& candidate = candidates[i];
    check_candidate(candidate);
    std::string key;
    try {
      key = "P:" + serialize_program(canonicalize_program(
                       parse_program_text(candidate.program), mode));
    } catch (const Error&) {
      key = "I:" + candidate.program;  // invalid programs group by raw text
    }
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      it->second.first_index = i;
      it->second.display = candidate.program;
    }
    it->second.total += candidate.model_weight;
    it->second.max_weight = std::max(it->second.max_weight,
                                     candidate.model_weight);
  }
  return pick_winner(groups);
}

std::string weighted_vote(const std::vector<VoteCandidate>& candidates,
                          EquivalenceMode mode) {
  return weighted_vote_detail(candidates, mode).program;
}

VoteResult weighted_vote_by_answer(const std::vector<VoteCandidate>& candidates,
                                   const Environment& env) {
  if (candidates.empty())
    throw Error(ErrorKind::NoCandidates, "no candidate programs to vote on");
  std::map<std::string, VoteGroup> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const VoteCandidate& candidate = candidates[i];
    check_candidate(candidate);
    std::string key = "I:" + candidate.program;
    try {
      const Program program = parse_program_text(candidate.program);
      auto outcome = execute_checked(program, env);
      if (const auto* result = std::get_if<ExecutionResult>(&outcome))
        key = "A:" + result->value.to_string();
    } catch (const Error&) {
    }
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      it->second.first_index = i;
      it->second.display = candidate.program;
    }
    it->second.total += candidate.model_weight;
    it->second.max_weight = std::max(it->second.max_weight,
                                     candidate.model_weight);
  }
  return pick_winner(groups);
}

}  // namespace finprog
