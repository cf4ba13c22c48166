#include "finprog/adversarial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "finprog/error.hpp"
#include "finprog/evaluation.hpp"

namespace finprog {

namespace {

void check_hash_dim(const FeatureConfig& cfg) {
  if (cfg.hash_dim == 0 || (cfg.hash_dim & (cfg.hash_dim - 1)) != 0)
    throw Error(ErrorKind::SchemaViolation,
                "hash_dim must be a power of two, got " +
                    std::to_string(cfg.hash_dim));
}

std::vector<std::string> question_tokens(const std::string& question) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : question) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

std::size_t feature_dimension(const FeatureConfig& cfg) {
  std::size_t d = cfg.hash_dim;
  d += cfg.numeric.question_length;
  d += cfg.numeric.fact_count;
  d += cfg.numeric.table_row_count;
  d += cfg.numeric.numeral_count;
  return d;
}

std::size_t hash_token(const std::string& token, const FeatureConfig& cfg) {
  // FNV-1a, seeded; multiplies by the FNV prime per character.
  std::uint64_t h = 1469598103934665603ull ^ (cfg.seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h & (cfg.hash_dim - 1));
}

std::vector<std::pair<std::size_t, double>> featurize_example(
    const AuditExample& example, const FeatureConfig& cfg) {
  check_hash_dim(cfg);
  std::map<std::size_t, double> buckets;
  const auto tokens = question_tokens(example.question);
  std::size_t numerals = 0;
  for (const auto& token : tokens) {
    buckets[hash_token(token, cfg)] += 1.0;
    if (std::any_of(token.begin(), token.end(),
                    [](unsigned char c) { return std::isdigit(c); }))
      ++numerals;
  }

  std::size_t next = cfg.hash_dim;
  if (cfg.numeric.question_length)
    buckets[next++] = static_cast<double>(example.question.size());
  if (cfg.numeric.fact_count)
    buckets[next++] = static_cast<double>(example.fact_count);
  if (cfg.numeric.table_row_count)
    buckets[next++] = static_cast<double>(example.table_row_count);
  if (cfg.numeric.numeral_count)
    buckets[next++] = static_cast<double>(numerals);

  return {buckets.begin(), buckets.end()};
}

Matrix featurize_corpus(const std::vector<AuditExample>& examples,
                        const FeatureConfig& cfg) {
  check_hash_dim(cfg);
  const std::size_t d = feature_dimension(cfg);
  Matrix features(examples.size(), d);
  for (std::size_t i = 0; i < examples.size(); ++i)
    for (const auto& [index, value] : featurize_example(examples[i], cfg))
      features.at(i, index) = value;

  // z-score every column over the corpus
  const std::size_t n = examples.size();
  if (n == 0) return features;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features.at(i, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = features.at(i, c) - mean;
      var += delta * delta;
    }
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd < 1e-12) sd = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      features.at(i, c) = (features.at(i, c) - mean) / sd;
  }
  return features;
}

AuditResult adversarial_audit(const std::vector<AuditExample>& pool,
                              const FeatureConfig& cfg, std::size_t folds,
                              const LRHyper& hyper) {
  if (folds < 2)
    throw Error(ErrorKind::SchemaViolation, "need at least 2 folds");
  std::vector<std::size_t> class_members[2];
  std::set<std::string> ids;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].origin != 0 && pool[i].origin != 1)
      throw Error(ErrorKind::SchemaViolation, "origin must be 0 or 1");
    if (!ids.insert(pool[i].id).second)
      throw Error(ErrorKind::SchemaViolation,
                  "duplicate example id \"" + pool[i].id + "\"");
    class_members[pool[i].origin].push_back(i);
  }
  if (class_members[0].size() < 2 || class_members[1].size() < 2)
    throw Error(ErrorKind::DegenerateLabels,
                "each origin needs at least two examples");

  // Stratified fold assignment: shuffle within each origin, deal round-robin.
  // Keeps both classes in every training partition.
  std::vector<std::size_t> fold_of_row(pool.size());
  std::mt19937_64 rng(hyper.seed ^ 0x5DEECE66Dull);
  for (auto& members : class_members) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of_row[members[i]] = i % folds;
  }

  const Matrix features = featurize_corpus(pool, cfg);
  AuditResult result;
  result.fold_count = folds;

  std::vector<double> oof_scores(pool.size(), 0.0);
  double train_auc_sum = 0.0;
  std::size_t trained_folds = 0;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < pool.size(); ++i)
      (fold_of_row[i] == fold ? held_rows : train_rows).push_back(i);
    if (held_rows.empty()) continue;

    Matrix train_features(train_rows.size(), features.cols);
    std::vector<int> train_labels(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      const auto src = features.row(train_rows[r]);
      std::copy(src.begin(), src.end(), train_features.row(r).begin());
      train_labels[r] = pool[train_rows[r]].origin;
    }
    const LRModel model = lr_train(train_features, train_labels, hyper);

    const std::vector<double> train_preds = lr_predict(model, train_features);
    train_auc_sum += auc(train_preds, train_labels);
    ++trained_folds;

    for (const std::size_t row : held_rows) {
      oof_scores[row] = lr_predict_one(model, features.row(row));
      result.per_example[pool[row].id] = oof_scores[row];
      result.fold_of[pool[row].id] = fold;
    }
  }

  std::vector<int> origins(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) origins[i] = pool[i].origin;
  result.train_auc = train_auc_sum / static_cast<double>(trained_folds);
  result.heldout_auc = auc(oof_scores, origins);
  return result;
}

SplitAssignment resplit(const std::vector<std::string>& pool_ids,
                        const AuditResult& audit, std::size_t valid_size,
                        std::uint64_t seed) {
  if (valid_size > pool_ids.size())
    throw Error(ErrorKind::PoolTooSmall,
                "pool of " + std::to_string(pool_ids.size()) +
                    " cannot give " + std::to_string(valid_size) +
                    " validation examples");

  // Canonical order first so the tie shuffle does not depend on input order.
  std::vector<std::string> ids = pool_ids;
  std::sort(ids.begin(), ids.end());
  std::vector<std::size_t> shuffle_pos(ids.size());
  {
    std::vector<std::size_t> perm(ids.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
      shuffle_pos[perm[pos]] = pos;
  }

  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> likeness(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = audit.per_example.find(ids[i]);
    if (it == audit.per_example.end())
      throw Error(ErrorKind::DatasetIdMismatch,
                  "no audit score for example \"" + ids[i] + "\"");
    likeness[i] = it->second;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (likeness[a] != likeness[b]) return likeness[a] > likeness[b];
    if (shuffle_pos[a] != shuffle_pos[b]) return shuffle_pos[a] < shuffle_pos[b];
    return ids[a] < ids[b];
  });

  SplitAssignment assignment;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < valid_size ? assignment.valid_ids : assignment.train_ids)
        .insert(ids[order[i]]);
  return assignment;
}

}  // namespace finprog
