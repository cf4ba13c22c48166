#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "finprog/executor.hpp"
#include "finprog/numeric.hpp"
#include "finprog/program.hpp"

namespace finprog {

// ---------------------------------------------------------------------------
// Logistic regression, trained by full-batch gradient descent.
// ---------------------------------------------------------------------------

struct LRHyper {
  double learning_rate = 0.1;
  std::size_t iterations = 2000;
  double l2_lambda = 1e-4;
  std::uint64_t seed = 42;
};

// Weights live in raw feature space: training standardizes features
// internally (z-score per column) and folds the scaling back into the
// returned weights and bias, so prediction needs no extra state.
struct LRModel {
  std::vector<double> weights;
  double bias = 0.0;

  struct TrainingMeta {
    std::size_t iterations = 0;
    double final_loss = 0.0;
    double l2_lambda = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;  // stacking: model column order
    std::vector<double> loss_history;        // loss before each update
    std::size_t imputed_scores = 0;          // stacking: gaps filled with 0.0
  } meta;
};

// Mean L2-regularized logistic loss (penalty on weights only, not bias)
// and, when requested, its analytic gradient.
double logistic_loss(const Matrix& features, const std::vector<int>& labels,
                     const std::vector<double>& weights, double bias,
                     double l2_lambda, std::vector<double>* grad_weights = nullptr,
                     double* grad_bias = nullptr);

// Deterministic gradient descent from zero weights on standardized
// features. Loss is non-increasing across iterations at the default step
// size. Errors: DegenerateLabels, NonFiniteFeature, DimensionMismatch.
LRModel lr_train(const Matrix& features, const std::vector<int>& labels,
                 const LRHyper& hyper = {});

// sigmoid(w.x + b) per row. Errors: DimensionMismatch.
std::vector<double> lr_predict(const LRModel& model, const Matrix& features);
double lr_predict_one(const LRModel& model, std::span<const double> features);

// ---------------------------------------------------------------------------
// Retriever score stacking.
// ---------------------------------------------------------------------------

// Per-fact score from one model: either a plain score or a start/end pair;
// the pair contributes start + end as the model's score.
struct ScoreEntry {
  bool has_start_end = false;
  double score = 0.0;
  double start = 0.0;
  double end = 0.0;
  double effective() const { return has_start_end ? start + end : score; }
};

struct ScoreRecord {
  std::string example_id;
  std::string model;
  std::map<std::string, ScoreEntry> fact_scores;
};

// One feature row per (example, fact): the m models' scores in sorted
// model-name order. Scores a model never produced are imputed as 0.0 and
// counted; a duplicate (example, model) record is a ModelSetMismatch.
struct StackDataset {
  std::vector<std::string> model_names;
  Matrix features;
  std::vector<int> labels;
  std::vector<std::pair<std::string, std::string>> keys;  // (example, fact)
  std::size_t imputed = 0;
};

StackDataset build_stack_dataset(
    const std::vector<ScoreRecord>& records,
    const std::map<std::string, std::set<std::string>>& gold_ids);

LRModel stack_train(const std::vector<ScoreRecord>& records,
                    const std::map<std::string, std::set<std::string>>& gold_ids,
                    const LRHyper& hyper = {});

struct FusedSelection {
  std::string example_id;
  std::vector<std::string> ranked_fact_ids;    // all facts, best first
  std::map<std::string, double> fused_scores;  // fact -> probability
  std::vector<std::string> selected;
};

// Ranks one example's facts by fused probability (ties by fact id).
// selected is the top-k; with positive_only it keeps only top-k facts
// whose probability exceeds the threshold, falling back to the single
// best fact when none do. Errors: DimensionMismatch, DatasetIdMismatch.
FusedSelection stack_rank(const LRModel& model,
                          const std::vector<ScoreRecord>& records,
                          std::size_t k, bool positive_only = false,
                          double threshold = 0.5);

// ---------------------------------------------------------------------------
// Generator program voting.
// ---------------------------------------------------------------------------

struct VoteCandidate {
  std::string example_id;
  std::string model;
  std::string program;
  double model_weight = 0.0;  // the model's validation execution accuracy
};

struct VoteResult {
  std::string program;  // raw text of the winning group's first candidate
  double score = 0.0;   // summed weights of the winning group
};

// Groups candidates by canonical program text (invalid programs group by
// their raw text) and sums each group's model weights. The heaviest group
// wins; ties prefer the group holding the highest single model weight,
// then the lexicographically smaller program. Errors: NoCandidates.
VoteResult weighted_vote_detail(const std::vector<VoteCandidate>& candidates,
                                EquivalenceMode mode);
std::string weighted_vote(const std::vector<VoteCandidate>& candidates,
                          EquivalenceMode mode = EquivalenceMode::commutative);

// Ablation variant: groups by executed answer instead of program text
// (candidates that fail to parse or execute group by raw text).
VoteResult weighted_vote_by_answer(const std::vector<VoteCandidate>& candidates,
                                   const Environment& env);

}  // namespace finprog
