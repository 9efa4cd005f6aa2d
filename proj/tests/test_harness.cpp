#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <map>

#include "knowra/harness/harness.hpp"
#include "knowra/harness/metrics.hpp"

using namespace knowra;
using namespace knowra::harness;

namespace {

// Two documents with controlled mention geometry:
//   docA: e0 in s0, e1 in s0 and s2, e2 in s1        names a0, a1, a2
//   docB: e0 in s0, e1 in s3                          names b0, a1
corpus::Corpus eval_corpus() {
  corpus::Corpus corpus;
  corpus::Document a;
  a.doc_id = "docA";
  a.sentences = {{"a0", "a1"}, {"a2", "x"}, {"a1", "y"}};
  a.entities = {{"a0", "PER", {{0, {0, 1}, "a0"}}},
                {"a1", "PER", {{0, {1, 2}, "a1"}, {2, {0, 1}, "a1"}}},
                {"a2", "LOC", {{1, {0, 1}, "a2"}}}};
  corpus.push_back(a);
  corpus::Document b;
  b.doc_id = "docB";
  b.sentences = {{"b0"}, {"u"}, {"v"}, {"a1"}};
  b.entities = {{"b0", "ORG", {{0, {0, 1}, "b0"}}}, {"a1", "PER", {{3, {0, 1}, "a1"}}}};
  corpus.push_back(b);
  return corpus;
}

double micro_f1(std::size_t correct, std::size_t n_pred, std::size_t n_gold) {
  if (n_pred == 0 || n_gold == 0) return 0.0;
  const double p = static_cast<double>(correct) / n_pred;
  const double r = static_cast<double>(correct) / n_gold;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace

TEST_CASE("fixture 1: one of two gold facts predicted") {
  corpus::Corpus corpus = eval_corpus();
  FactSet preds{{"docA", 0, 1, "P17"}};
  FactSet gold{{"docA", 0, 1, "P17"}, {"docA", 1, 2, "P131"}};
  MetricsReport r = evaluate(preds, gold, {}, corpus);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(0.5));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("fixture 2: perfect prediction scores one everywhere") {
  corpus::Corpus corpus = eval_corpus();
  FactSet gold{{"docA", 0, 1, "P17"}, {"docA", 0, 2, "P131"}, {"docB", 0, 1, "P17"}};
  MetricsReport r = evaluate(gold, gold, {}, corpus);
  CHECK(r.f1 == doctest::Approx(1.0));
  CHECK(r.ign_f1 == doctest::Approx(1.0));
  CHECK(r.intra_f1 == doctest::Approx(1.0));
  CHECK(r.inter_f1 == doctest::Approx(1.0));
}

TEST_CASE("fixture 3: train-set overlap drops from both sides of the ignore metric") {
  corpus::Corpus corpus = eval_corpus();
  // Gold: three facts; the (a0, a1, P17) name triple is also in training.
  FactSet gold{{"docA", 0, 1, "P17"}, {"docA", 1, 2, "P131"}, {"docB", 0, 1, "P17"}};
  FactSet preds{{"docA", 0, 1, "P17"}, {"docB", 0, 1, "P17"}};
  NamedFactSet train{{"a0", "a1", "P17"}};
  MetricsReport r = evaluate(preds, gold, train, corpus);
  // Overall: correct 2 of 2 predicted, 3 gold.
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  // Ignore view: docA(0,1) drops from preds and gold; 1 correct / 1 pred /
  // 2 gold.
  CHECK(r.ign_f1 == doctest::Approx(micro_f1(1, 1, 2)));
}

TEST_CASE("fixture 4: intra and inter splits attribute by mention distance") {
  corpus::Corpus corpus = eval_corpus();
  // docA (0,1): same sentence (interval 0). docA (1,2): s{0,2} vs s1 -> 1.
  // docB (0,1): s0 vs s3 -> 3.
  FactSet gold{{"docA", 0, 1, "P17"}, {"docA", 1, 2, "P131"}, {"docB", 0, 1, "P17"}};
  FactSet preds{{"docA", 0, 1, "P17"},   // intra, correct
                {"docA", 2, 1, "P17"},   // interval 1: inter, wrong
                {"docB", 0, 1, "P17"}};  // inter, correct
  MetricsReport r = evaluate(preds, gold, {}, corpus);
  CHECK(r.intra_f1 == doctest::Approx(micro_f1(1, 1, 1)));
  CHECK(r.inter_f1 == doctest::Approx(micro_f1(1, 2, 2)));
}

TEST_CASE("fixture 5: interval buckets carry per-distance f1 and supports") {
  corpus::Corpus corpus = eval_corpus();
  FactSet gold{{"docA", 0, 1, "P17"},   // interval 0
               {"docA", 0, 2, "P17"},   // interval 1
               {"docA", 1, 2, "P131"},  // interval 1
               {"docB", 0, 1, "P17"}};  // interval 3
  FactSet preds{{"docA", 0, 1, "P17"}, {"docA", 0, 2, "P17"}};
  MetricsReport r = evaluate(preds, gold, {}, corpus);
  REQUIRE(r.interval_buckets.count(0));
  REQUIRE(r.interval_buckets.count(1));
  REQUIRE(r.interval_buckets.count(3));
  CHECK(r.interval_buckets[0].first == doctest::Approx(1.0));
  CHECK(r.interval_buckets[0].second == 1);
  CHECK(r.interval_buckets[1].first == doctest::Approx(micro_f1(1, 1, 2)));
  CHECK(r.interval_buckets[1].second == 2);
  CHECK(r.interval_buckets[3].first == doctest::Approx(0.0));
  CHECK(r.interval_buckets[3].second == 1);
  std::size_t support = 0;
  for (const auto& [k, v] : r.interval_buckets) support += v.second;
  CHECK(support == gold.size());
}

TEST_CASE("unknown documents in predictions are an error") {
  corpus::Corpus corpus = eval_corpus();
  FactSet preds{{"ghost", 0, 1, "P17"}};
  CHECK_THROWS_AS(evaluate(preds, {}, {}, corpus), ValidationError);
}

TEST_CASE("property: evaluate equals brute-force set arithmetic on random sets") {
  corpus::Corpus corpus = eval_corpus();
  Rng rng(61);
  const std::vector<std::string> rels{"P17", "P131", "P9"};
  auto random_fact = [&]() -> Fact {
    const corpus::Document& doc = corpus[rng.uniform_int(corpus.size())];
    std::size_t h = rng.uniform_int(doc.entities.size());
    std::size_t t = rng.uniform_int(doc.entities.size());
    if (h == t) t = (t + 1) % doc.entities.size();
    return {doc.doc_id, h, t, rels[rng.uniform_int(rels.size())]};
  };
  for (int trial = 0; trial < 50; ++trial) {
    FactSet preds, gold;
    for (std::size_t i = 0; i < rng.uniform_int(6); ++i) preds.insert(random_fact());
    for (std::size_t i = 0; i < rng.uniform_int(6); ++i) gold.insert(random_fact());
    MetricsReport r = evaluate(preds, gold, {}, corpus);

    std::size_t correct = 0;
    for (const Fact& p : preds) {
      if (gold.count(p)) ++correct;
    }
    const double expect_p = preds.empty() ? 0.0 : static_cast<double>(correct) / preds.size();
    const double expect_r = gold.empty() ? 0.0 : static_cast<double>(correct) / gold.size();
    CHECK(r.precision == doctest::Approx(expect_p));
    CHECK(r.recall == doctest::Approx(expect_r));
    CHECK(r.f1 == doctest::Approx(micro_f1(correct, preds.size(), gold.size())));
  }
}

// ---------------------------------------------------------------------
// Configuration

TEST_CASE("config json round trip preserves every field") {
  TrainConfig cfg;
  cfg.seed = 77;
  cfg.epochs = 12;
  cfg.lr = 0.004;
  cfg.lambda = 0.35;
  cfg.model.enc.hidden = 24;
  cfg.model.use_axial = false;
  cfg.train_path = "/tmp/train.json";
  TrainConfig copy = TrainConfig::from_json_text(cfg.to_json_text());
  CHECK(copy.seed == 77);
  CHECK(copy.epochs == 12);
  CHECK(copy.lr == doctest::Approx(0.004));
  CHECK(copy.lambda == doctest::Approx(0.35));
  CHECK(copy.model.enc.hidden == 24);
  CHECK(copy.model.use_axial == false);
  CHECK(copy.train_path == "/tmp/train.json");
  CHECK(copy.to_json_text() == cfg.to_json_text());
  CHECK(copy.config_hash() == cfg.config_hash());
}

TEST_CASE("environment variables override every config field they name") {
  TrainConfig cfg;
  std::map<std::string, std::string> env{{"KNOWRA_SEED", "99"},
                                         {"KNOWRA_LAMBDA", "1.25"},
                                         {"KNOWRA_ENCODER_HIDDEN", "48"},
                                         {"KNOWRA_MODEL_USE_AXIAL", "false"},
                                         {"KNOWRA_TRAIN_PATH", "/data/t.json"}};
  cfg.apply_env_overrides([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(cfg.seed == 99);
  CHECK(cfg.lambda == doctest::Approx(1.25));
  CHECK(cfg.model.enc.hidden == 48);
  CHECK(cfg.model.use_axial == false);
  CHECK(cfg.train_path == "/data/t.json");
  // Untouched fields keep their defaults.
  CHECK(cfg.epochs == TrainConfig{}.epochs);
}

TEST_CASE("config validation rejects nonsense") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda = -0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
