#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>

#include "finprog/adversarial.hpp"
#include "finprog/evaluation.hpp"
#include "testutil.hpp"

using namespace finprog;

namespace {

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

const std::vector<std::string>& vocab_a() {
  static const std::vector<std::string> words = {
      "revenue", "growth",  "margin", "quarter", "income", "sales",
      "profit",  "decline", "ratio",  "change",  "total",  "percentage"};
  return words;
}

const std::vector<std::string>& vocab_b() {
  static const std::vector<std::string> words = {
      "derivative", "hedge",    "swap",     "notional", "collateral",
      "maturity",   "exposure", "leverage", "tranche",  "liquidity"};
  return words;
}

AuditExample synth_example(testutil::Rng& rng, const std::string& id,
                           const std::vector<std::string>& vocab,
                           int min_words, int max_words, int origin) {
  AuditExample example;
  example.id = id;
  const int words = rng.integer(min_words, max_words);
  for (int w = 0; w < words; ++w) {
    if (w) example.question += " ";
    example.question += rng.pick(vocab);
  }
  example.fact_count = 10 + rng.index(10);
  example.table_row_count = rng.index(6);
  example.origin = origin;
  return example;
}

LRHyper fast_hyper() {
  LRHyper hyper;
  hyper.iterations = 300;
  return hyper;
}

FeatureConfig small_features() {
  FeatureConfig cfg;
  cfg.hash_dim = 256;
  return cfg;
}

}  // namespace

TEST_CASE("featurize_example counts hashed question tokens") {
  FeatureConfig cfg;
  AuditExample example;
  example.id = "x";
  example.question = "a a b";
  example.fact_count = 3;
  example.table_row_count = 1;
  const auto sparse = featurize_example(example, cfg);

  const std::size_t bucket_a = hash_token("a", cfg);
  const std::size_t bucket_b = hash_token("b", cfg);
  REQUIRE(bucket_a != bucket_b);  // holds for this seed and hash_dim
  std::map<std::size_t, double> as_map(sparse.begin(), sparse.end());
  CHECK(as_map.at(bucket_a) == 2.0);
  CHECK(as_map.at(bucket_b) == 1.0);
  // numeric features sit after the hashed block
  CHECK(as_map.at(cfg.hash_dim + 0) == 5.0);  // question length in chars
  CHECK(as_map.at(cfg.hash_dim + 1) == 3.0);  // fact count
  CHECK(as_map.at(cfg.hash_dim + 2) == 1.0);  // table rows
  CHECK(as_map.at(cfg.hash_dim + 3) == 0.0);  // numerals
}

TEST_CASE("featurize_example is deterministic") {
  FeatureConfig cfg;
  AuditExample example;
  example.id = "x";
  example.question = "how much did net revenue change in 2009";
  example.fact_count = 12;
  const auto first = featurize_example(example, cfg);
  const auto second = featurize_example(example, cfg);
  CHECK(first == second);

  FeatureConfig other = cfg;
  other.seed = 43;
  CHECK(featurize_example(example, other) != first);
}

TEST_CASE("featurize rejects a non-power-of-two hash_dim") {
  FeatureConfig cfg;
  cfg.hash_dim = 1000;
  AuditExample example;
  example.question = "q";
  CHECK(thrown_kind([&] { featurize_example(example, cfg); }) ==
        ErrorKind::SchemaViolation);
}

TEST_CASE("numeral counting looks at digit-bearing tokens") {
  FeatureConfig cfg;
  AuditExample example;
  example.question = "change from 2008 to 2009 in q4";
  const auto sparse = featurize_example(example, cfg);
  std::map<std::size_t, double> as_map(sparse.begin(), sparse.end());
  CHECK(as_map.at(cfg.hash_dim + 3) == 3.0);  // 2008, 2009, q4
}

TEST_CASE("audit separates distinct distributions") {
  testutil::Rng rng(100);
  std::vector<AuditExample> pool;
  for (int i = 0; i < 300; ++i)
    pool.push_back(synth_example(rng, "a" + std::to_string(i), vocab_a(), 8,
                                 15, 0));
  for (int i = 0; i < 300; ++i)
    pool.push_back(synth_example(rng, "b" + std::to_string(i), vocab_b(), 14,
                                 25, 1));
  const AuditResult audit =
      adversarial_audit(pool, small_features(), 5, fast_hyper());
  CHECK(audit.heldout_auc >= 0.95);
  CHECK(audit.train_auc >= audit.heldout_auc - 0.05);
  CHECK(audit.per_example.size() == pool.size());
  CHECK(audit.fold_count == 5);
}

TEST_CASE("audit of identically distributed origins stays near 0.5") {
  testutil::Rng rng(200);
  std::vector<AuditExample> pool;
  for (int i = 0; i < 1000; ++i)
    pool.push_back(synth_example(rng, "p" + std::to_string(i), vocab_a(), 8,
                                 15, 0));
  for (int i = 0; i < 1000; ++i)
    pool.push_back(synth_example(rng, "q" + std::to_string(i), vocab_a(), 8,
                                 15, 1));
  const AuditResult audit =
      adversarial_audit(pool, small_features(), 5, fast_hyper());
  CHECK(audit.heldout_auc > 0.43);
  CHECK(audit.heldout_auc < 0.57);
}

TEST_CASE("a pure question-length shift is separable through the features") {
  testutil::Rng rng(300);
  std::vector<AuditExample> pool;
  for (int i = 0; i < 400; ++i) {
    AuditExample example = synth_example(
        rng, "s" + std::to_string(i), vocab_a(), 5, 10, 0);
    example.fact_count = 10;
    example.table_row_count = 2;
    pool.push_back(std::move(example));
  }
  for (int i = 0; i < 400; ++i) {
    AuditExample example = synth_example(
        rng, "l" + std::to_string(i), vocab_a(), 30, 50, 1);
    example.fact_count = 10;
    example.table_row_count = 2;
    pool.push_back(std::move(example));
  }
  const AuditResult audit =
      adversarial_audit(pool, small_features(), 5, fast_hyper());
  CHECK(audit.heldout_auc > 0.9);
}

TEST_CASE("audit is deterministic and keeps scores out of fold") {
  testutil::Rng rng(400);
  std::vector<AuditExample> pool;
  for (int i = 0; i < 60; ++i)
    pool.push_back(synth_example(rng, "a" + std::to_string(i), vocab_a(), 6,
                                 12, 0));
  for (int i = 0; i < 60; ++i)
    pool.push_back(synth_example(rng, "b" + std::to_string(i), vocab_b(), 6,
                                 12, 1));
  const FeatureConfig cfg = small_features();
  const LRHyper hyper = fast_hyper();
  const AuditResult first = adversarial_audit(pool, cfg, 4, hyper);
  const AuditResult second = adversarial_audit(pool, cfg, 4, hyper);
  CHECK(first.per_example == second.per_example);
  CHECK(first.heldout_auc == second.heldout_auc);
  CHECK(first.fold_of == second.fold_of);

  // Out-of-fold discipline: retraining by hand without fold 0 must
  // reproduce the audit's probabilities for every fold-0 example.
  const Matrix features = featurize_corpus(pool, cfg);
  std::vector<std::size_t> train_rows;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (first.fold_of.at(pool[i].id) != 0) train_rows.push_back(i);
  Matrix train_features(train_rows.size(), features.cols);
  std::vector<int> train_labels(train_rows.size());
  for (std::size_t r = 0; r < train_rows.size(); ++r) {
    const auto src = features.row(train_rows[r]);
    std::copy(src.begin(), src.end(), train_features.row(r).begin());
    train_labels[r] = pool[train_rows[r]].origin;
  }
  const LRModel model = lr_train(train_features, train_labels, hyper);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (first.fold_of.at(pool[i].id) != 0) continue;
    CHECK(first.per_example.at(pool[i].id) ==
          lr_predict_one(model, features.row(i)));
  }
}

TEST_CASE("audit input validation") {
  std::vector<AuditExample> pool;
  testutil::Rng rng(7);
  for (int i = 0; i < 10; ++i)
    pool.push_back(synth_example(rng, "x" + std::to_string(i), vocab_a(), 4,
                                 8, 0));
  CHECK(thrown_kind([&] {
          adversarial_audit(pool, small_features(), 5, fast_hyper());
        }) == ErrorKind::DegenerateLabels);
  pool.push_back(synth_example(rng, "y0", vocab_b(), 4, 8, 1));
  pool.push_back(synth_example(rng, "y1", vocab_b(), 4, 8, 1));
  CHECK(thrown_kind([&] {
          adversarial_audit(pool, small_features(), 1, fast_hyper());
        }) == ErrorKind::SchemaViolation);
  pool.push_back(pool.back());  // duplicate id
  CHECK(thrown_kind([&] {
          adversarial_audit(pool, small_features(), 5, fast_hyper());
        }) == ErrorKind::SchemaViolation);
}

TEST_CASE("resplit picks the most test-like examples") {
  AuditResult audit;
  std::vector<std::string> pool_ids;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "e" + std::to_string(i);
    pool_ids.push_back(id);
    audit.per_example[id] = i < 3 ? 0.9 : 0.1;  // e0..e2 clearly test-like
  }
  const SplitAssignment assignment = resplit(pool_ids, audit, 3, 42);
  CHECK(assignment.valid_ids == std::set<std::string>{"e0", "e1", "e2"});
  CHECK(assignment.train_ids.size() == 7);

  SUBCASE("partition covers the pool exactly") {
    std::set<std::string> all(pool_ids.begin(), pool_ids.end());
    std::set<std::string> combined = assignment.valid_ids;
    combined.insert(assignment.train_ids.begin(), assignment.train_ids.end());
    CHECK(combined == all);
  }
  SUBCASE("valid_size equal to the pool takes everything") {
    const SplitAssignment whole = resplit(pool_ids, audit, 10, 42);
    CHECK(whole.valid_ids.size() == 10);
    CHECK(whole.train_ids.empty());
  }
  SUBCASE("errors") {
    CHECK(thrown_kind([&] { resplit(pool_ids, audit, 11, 42); }) ==
          ErrorKind::PoolTooSmall);
    pool_ids.push_back("unaudited");
    CHECK(thrown_kind([&] { resplit(pool_ids, audit, 3, 42); }) ==
          ErrorKind::DatasetIdMismatch);
  }
}

TEST_CASE("resplit tie-breaking is seeded and reproducible") {
  AuditResult audit;
  std::vector<std::string> pool_ids;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "t" + std::to_string(i);
    pool_ids.push_back(id);
    audit.per_example[id] = 0.5;  // all tied
  }
  const SplitAssignment first = resplit(pool_ids, audit, 8, 7);
  const SplitAssignment second = resplit(pool_ids, audit, 8, 7);
  CHECK(first.valid_ids == second.valid_ids);
  CHECK(first.train_ids == second.train_ids);

  // input order must not matter
  std::reverse(pool_ids.begin(), pool_ids.end());
  const SplitAssignment reversed = resplit(pool_ids, audit, 8, 7);
  CHECK(reversed.valid_ids == first.valid_ids);

  const SplitAssignment other_seed = resplit(pool_ids, audit, 8, 8);
  CHECK(other_seed.valid_ids != first.valid_ids);  // holds for these seeds
}

TEST_CASE("default validation size is 900") {
  AuditResult audit;
  std::vector<std::string> pool_ids;
  for (int i = 0; i < 1000; ++i) {
    const std::string id = "d" + std::to_string(i);
    pool_ids.push_back(id);
    audit.per_example[id] = i / 1000.0;
  }
  const SplitAssignment assignment = resplit(pool_ids, audit);
  CHECK(assignment.valid_ids.size() == 900);
  CHECK(assignment.train_ids.size() == 100);
}

TEST_CASE("resplit reduces the measured gap on a two-cluster corpus") {
  testutil::Rng rng(12345);
  // pool: 320 cluster-A + 80 cluster-B; test: 120 cluster-B
  std::vector<AuditExample> pool;
  for (int i = 0; i < 320; ++i)
    pool.push_back(synth_example(rng, "pa" + std::to_string(i), vocab_a(), 8,
                                 14, 0));
  for (int i = 0; i < 80; ++i)
    pool.push_back(synth_example(rng, "pb" + std::to_string(i), vocab_b(), 16,
                                 24, 0));
  std::vector<AuditExample> test;
  for (int i = 0; i < 120; ++i)
    test.push_back(synth_example(rng, "tb" + std::to_string(i), vocab_b(), 16,
                                 24, 1));

  const FeatureConfig cfg = small_features();
  const LRHyper hyper = fast_hyper();

  auto audit_against_test = [&](const std::vector<AuditExample>& valid) {
    std::vector<AuditExample> mixed;
    for (AuditExample example : valid) {
      example.origin = 0;
      mixed.push_back(std::move(example));
    }
    for (AuditExample example : test) {
      example.origin = 1;
      mixed.push_back(std::move(example));
    }
    return adversarial_audit(mixed, cfg, 5, hyper).heldout_auc;
  };

  // "original" validation set: 80 cluster-A examples
  std::vector<AuditExample> original_valid(pool.begin(), pool.begin() + 80);
  const double before = audit_against_test(original_valid);

  std::vector<AuditExample> mixed_pool = pool;
  for (auto& example : mixed_pool) example.origin = 0;
  std::vector<AuditExample> scored = mixed_pool;
  scored.insert(scored.end(), test.begin(), test.end());
  const AuditResult audit = adversarial_audit(scored, cfg, 5, hyper);

  std::vector<std::string> pool_ids;
  for (const auto& example : pool) pool_ids.push_back(example.id);
  const SplitAssignment assignment = resplit(pool_ids, audit, 80, 42);

  std::vector<AuditExample> new_valid;
  for (const auto& example : pool)
    if (assignment.valid_ids.count(example.id)) new_valid.push_back(example);
  const double after = audit_against_test(new_valid);

  CAPTURE(before);
  CAPTURE(after);
  CHECK(before > 0.9);
  CHECK(after < before);
  CHECK(after < 0.65);
  // the re-split found the cluster-B pool members
  for (const auto& id : assignment.valid_ids) CHECK(id.rfind("pb", 0) == 0);
}
