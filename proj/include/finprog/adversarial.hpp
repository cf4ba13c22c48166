#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "finprog/fusion.hpp"
#include "finprog/numeric.hpp"

namespace finprog {

// Adversarial validation: train a classifier to tell where an example came
// from; a high held-out AUC means the two sources are distributed apart.
// The same scores drive the re-split that picks a test-like validation set.

struct NumericFeatureFlags {
  bool question_length = true;   // characters in the question
  bool fact_count = true;        // extracted facts in the report
  bool table_row_count = true;   // data rows in the table
  bool numeral_count = true;     // question tokens containing a digit
};

struct FeatureConfig {
  std::size_t hash_dim = 4096;  // power of two
  NumericFeatureFlags numeric;
  std::uint64_t seed = 42;
};

// Everything the featurizer needs from one example. origin: 0 for the
// train-like pool, 1 for the test set.
struct AuditExample {
  std::string id;
  std::string question;
  std::size_t fact_count = 0;
  std::size_t table_row_count = 0;
  int origin = 0;
};

std::size_t feature_dimension(const FeatureConfig& cfg);
std::size_t hash_token(const std::string& token, const FeatureConfig& cfg);

// Sparse (index, count) pairs: hashed bag-of-words over the lowercased
// question tokens plus the enabled numeric features. Raw counts; corpus
// z-scoring happens in featurize_corpus.
std::vector<std::pair<std::size_t, double>> featurize_example(
    const AuditExample& example, const FeatureConfig& cfg);

// Dense n x d matrix of featurize_example rows, every column z-scored
// over the corpus.
Matrix featurize_corpus(const std::vector<AuditExample>& examples,
                        const FeatureConfig& cfg);

struct AuditResult {
  std::map<std::string, double> per_example;  // id -> test-likeness (out-of-fold)
  double train_auc = 0.0;                     // mean in-fold AUC
  double heldout_auc = 0.0;                   // pooled out-of-fold AUC
  std::size_t fold_count = 0;
  std::map<std::string, std::size_t> fold_of;  // id -> held-out fold
};

// Stratified k-fold cross-fitting of lr_train on the origin labels. Every
// example's test-likeness comes from the fold that held it out.
// Errors: DegenerateLabels (an origin missing or has fewer than 2
// examples), SchemaViolation (folds < 2, duplicate ids, bad hash_dim).
AuditResult adversarial_audit(const std::vector<AuditExample>& pool,
                              const FeatureConfig& cfg, std::size_t folds = 5,
                              const LRHyper& hyper = {});

struct SplitAssignment {
  std::set<std::string> valid_ids;
  std::set<std::string> train_ids;
};

// Puts the valid_size most test-like pool examples into validation and the
// rest into training. Ties break by a seeded shuffle, then by id.
// Errors: PoolTooSmall, DatasetIdMismatch (id missing from the audit).
SplitAssignment resplit(const std::vector<std::string>& pool_ids,
                        const AuditResult& audit, std::size_t valid_size = 900,
                        std::uint64_t seed = 42);

}  // namespace finprog
