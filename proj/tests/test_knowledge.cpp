#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "knowra/knowledge.hpp"
#include "support/gradcheck.hpp"

using namespace knowra;
using namespace knowra::knowledge;

namespace {

const char* kSnapshotJson = R"({
  "version": "test-1",
  "qids": {
    "Germany": ["Q183"],
    "Berlin": ["Q64"],
    "Georgia": ["Q230", "Q1428"]
  },
  "triples": [
    ["Q64", "P17", "Q183"],
    ["Q64", "P131", "Q183"],
    ["Q230", "P17", "Q183"]
  ]
})";

Tensor rand_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  Tensor t = Tensor::zeros({n});
  for (double& x : t.data) x = rng.normal(0, scale);
  return t;
}

}  // namespace

TEST_CASE("snapshot qid lookups round-trip the fixture") {
  SnapshotKB kb = SnapshotKB::from_json_text(kSnapshotJson);
  CHECK(kb.lookup_qids("Germany") == std::vector<std::string>{"Q183"});
  CHECK(kb.lookup_qids("Atlantis").empty());
  CHECK(kb.lookup_qids("Georgia") == std::vector<std::string>{"Q230", "Q1428"});
  CHECK_THROWS_AS(kb.lookup_qids(""), ValidationError);
}

TEST_CASE("snapshot relation lookups are directed") {
  SnapshotKB kb = SnapshotKB::from_json_text(kSnapshotJson);
  CHECK(kb.lookup_relations("Q64", "Q183") == std::vector<std::string>{"P17", "P131"});
  CHECK(kb.lookup_relations("Q183", "Q64").empty());
  CHECK(kb.lookup_relations("Q64", "Q999").empty());
  CHECK(kb.known_relation_ids() == std::vector<std::string>{"P131", "P17"});
}

TEST_CASE("live client serves lookups, caches, and degrades to empty on failure") {
  httplib::Server server;
  int qid_hits = 0;
  server.Get("/qids", [&](const httplib::Request& req, httplib::Response& res) {
    ++qid_hits;
    if (req.get_param_value("name") == "Berlin") {
      res.set_content(R"(["Q64"])", "application/json");
    } else {
      res.set_content("[]", "application/json");
    }
  });
  server.Get("/relations", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.get_param_value("h") == "Q64" && req.get_param_value("t") == "Q183") {
      res.set_content(R"(["P17"])", "application/json");
    } else {
      res.set_content("[]", "application/json");
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string cache_path = "/tmp/knowra_kb_cache_test.json";
  std::remove(cache_path.c_str());

  Counters counters;
  LiveKBConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
  cfg.max_retries = 1;
  cfg.backoff_ms = 1;
  cfg.cache_path = cache_path;
  {
    LiveKB kb(cfg, &counters);
    CHECK(kb.lookup_qids("Berlin") == std::vector<std::string>{"Q64"});
    CHECK(kb.lookup_qids("Berlin") == std::vector<std::string>{"Q64"});
    CHECK(qid_hits == 1);  // second lookup served from cache
    CHECK(kb.lookup_relations("Q64", "Q183") == std::vector<std::string>{"P17"});
    CHECK(counters.kb_lookup_failures == 0);
  }
  server.stop();
  server_thread.join();

  // The write-through cache answers without the network.
  SnapshotKB cached = SnapshotKB::load(cache_path);
  CHECK(cached.lookup_qids("Berlin") == std::vector<std::string>{"Q64"});
  CHECK(cached.lookup_relations("Q64", "Q183") == std::vector<std::string>{"P17"});

  // Server gone: retries exhaust, result is empty, counter bumps.
  LiveKB down(cfg, &counters);
  CHECK(down.lookup_qids("Munich").empty());
  CHECK(counters.kb_lookup_failures == 1);
}

// ---------------------------------------------------------------------
// Graph augmentation

namespace {

corpus::Document city_doc() {
  corpus::Document doc;
  doc.doc_id = "cities";
  doc.sentences = {{"Berlin", "in", "Germany"}};
  doc.entities = {{"Berlin", "LOC", {{0, {0, 1}, "Berlin"}}},
                  {"Germany", "LOC", {{0, {2, 3}, "Germany"}}}};
  return doc;
}

}  // namespace

TEST_CASE("empty KB leaves the graph unaugmented") {
  corpus::Document doc = city_doc();
  docgraph::MHDG g = docgraph::build_mhdg(doc);
  SnapshotKB kb = SnapshotKB::from_json_text(R"({"version": "empty"})");
  KMHDG kg = augment_graph(g, doc, kb);
  CHECK(kg.knowledge_edges.empty());
  CHECK(kg.base == &g);
}

TEST_CASE("retrieved triples become knowledge edges with provenance") {
  corpus::Document doc = city_doc();
  docgraph::MHDG g = docgraph::build_mhdg(doc);
  SnapshotKB kb = SnapshotKB::from_json_text(kSnapshotJson);
  KMHDG kg = augment_graph(g, doc, kb);

  // Brute force across entity pairs x qid pairs x triples.
  REQUIRE(kg.knowledge_edges.size() == 2);  // P17 and P131, Berlin -> Germany
  for (const KnowledgeEdge& e : kg.knowledge_edges) {
    CHECK(e.head == 0);
    CHECK(e.tail == 1);
    CHECK(e.qid_head == "Q64");
    CHECK(e.qid_tail == "Q183");
    CHECK(e.source == "test-1");
  }
  CHECK(kg.knowledge_edges[0].relation == "P17");
  CHECK(kg.knowledge_edges[1].relation == "P131");
}

TEST_CASE("duplicate qid routes deduplicate to one edge per triple") {
  corpus::Document doc = city_doc();
  doc.entities[0].name = "Georgia";  // two candidate qids
  doc.entities[0].mentions[0].surface = "Georgia";
  doc.sentences[0][0] = "Georgia";
  docgraph::MHDG g = docgraph::build_mhdg(doc);

  // Both Georgia qids map to the same relation id against Q183.
  SnapshotKB kb = SnapshotKB::from_json_text(R"({
    "version": "dup",
    "qids": {"Georgia": ["Q230", "Q1428"], "Germany": ["Q183"]},
    "triples": [["Q230", "P17", "Q183"], ["Q1428", "P17", "Q183"]]
  })");
  KMHDG kg = augment_graph(g, doc, kb);
  REQUIRE(kg.knowledge_edges.size() == 1);
  CHECK(kg.knowledge_edges[0].relation == "P17");

  // No duplicate (head, tail, relation) triples, ever.
  std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
  for (const KnowledgeEdge& e : kg.knowledge_edges) {
    CHECK(seen.insert({e.head, e.tail, e.relation}).second);
  }
}

TEST_CASE("gold flags ride along from synthetic snapshots") {
  corpus::Document doc = city_doc();
  docgraph::MHDG g = docgraph::build_mhdg(doc);
  SnapshotKB kb = SnapshotKB::from_json_text(R"({
    "version": "flags",
    "qids": {"Berlin": ["Q64"], "Germany": ["Q183"]},
    "triples": [["Q64", "P17", "Q183"], ["Q64", "P99", "Q183"]],
    "gold_flags": [true, false]
  })");
  KMHDG kg = augment_graph(g, doc, kb);
  REQUIRE(kg.knowledge_edges.size() == 2);
  CHECK(kg.knowledge_edges[0].gold_flag == std::optional<bool>(true));
  CHECK(kg.knowledge_edges[1].gold_flag == std::optional<bool>(false));
}

// ---------------------------------------------------------------------
// Entity embeddings

TEST_CASE("identical mention and pronoun vectors pass through the log-mean-exp") {
  Rng rng(41);
  const std::size_t d = 4;
  ad::Graph g;
  Tensor v = rand_vec(rng, d, 0.5);
  Tensor proj = Tensor::zeros({d, 2 * d});
  for (std::size_t i = 0; i < d; ++i) {
    proj(i, i) = 0.5;
    proj(i, d + i) = 0.5;  // averaging projection: proj(v ++ v) = v
  }
  ad::Var h = entity_embedding({g.input(v, false)}, {g.input(v, false)}, g.input(proj, false));
  for (std::size_t k = 0; k < d; ++k) {
    CHECK(h.val()(k) == doctest::Approx(v(k)).epsilon(1e-12));
  }
}

TEST_CASE("no pronouns duplicates the mention half") {
  Rng rng(42);
  const std::size_t d = 3;
  ad::Graph g;
  Tensor m1 = rand_vec(rng, d), m2 = rand_vec(rng, d);
  Tensor proj = Tensor::zeros({2 * d, 2 * d});
  for (std::size_t i = 0; i < 2 * d; ++i) proj(i, i) = 1.0;  // identity keeps both halves visible
  ad::Var h = entity_embedding({g.input(m1, false), g.input(m2, false)}, {}, g.input(proj, false));
  for (std::size_t k = 0; k < d; ++k) {
    const double lme = std::log(0.5 * (std::exp(m1(k)) + std::exp(m2(k))));
    CHECK(h.val()(k) == doctest::Approx(lme).epsilon(1e-12));
    CHECK(h.val()(d + k) == doctest::Approx(lme).epsilon(1e-12));
  }
}

TEST_CASE("random cases match the direct log-mean-exp oracle") {
  Rng rng(43);
  const std::size_t d = 5;
  for (int trial = 0; trial < 25; ++trial) {
    ad::Graph g;
    const std::size_t n_m = 1 + rng.uniform_int(3);
    const std::size_t n_c = rng.uniform_int(3);
    std::vector<Tensor> ms, cs;
    std::vector<ad::Var> mv, cv;
    for (std::size_t i = 0; i < n_m; ++i) {
      ms.push_back(rand_vec(rng, d));
      mv.push_back(g.input(ms.back(), false));
    }
    for (std::size_t i = 0; i < n_c; ++i) {
      cs.push_back(rand_vec(rng, d));
      cv.push_back(g.input(cs.back(), false));
    }
    Tensor proj = Tensor::zeros({d, 2 * d});
    for (double& x : proj.data) x = rng.normal(0, 0.3);
    ad::Var h = entity_embedding(mv, cv, g.input(proj, false));

    auto lme = [&](const std::vector<Tensor>& vs, std::size_t k) {
      double s = 0.0;
      for (const Tensor& t : vs) s += std::exp(t(k));
      return std::log(s / vs.size());
    };
    for (std::size_t k = 0; k < d; ++k) {
      double expected = 0.0;
      for (std::size_t j = 0; j < d; ++j) expected += proj(k, j) * lme(ms, j);
      for (std::size_t j = 0; j < d; ++j) {
        expected += proj(k, d + j) * (n_c ? lme(cs, j) : lme(ms, j));
      }
      CHECK(h.val()(k) == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

// ---------------------------------------------------------------------
// Confidence scores, fusion, filtration

TEST_CASE("confidence score basics") {
  ad::Graph g;
  Tensor ones = Tensor::zeros({8});
  for (double& x : ones.data) x = 1.0;
  ad::Var h = g.input(ones, false);
  CHECK(confidence_score(h, h, h).val()(0) == doctest::Approx(8.0));

  ad::Var zero_rel = g.input(Tensor::zeros({8}), false);
  const double tau = confidence_score(h, h, zero_rel).val()(0);
  CHECK(tau == 0.0);
  CHECK(1.0 / (1.0 + std::exp(-tau)) == doctest::Approx(0.5));
}

TEST_CASE("confidence score matches the elementwise product-sum oracle") {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    ad::Graph g;
    Tensor a = rand_vec(rng, 6), b = rand_vec(rng, 6), r = rand_vec(rng, 6);
    const double tau =
        confidence_score(g.input(a, false), g.input(b, false), g.input(r, false)).val()(0);
    double expected = 0.0;
    for (std::size_t k = 0; k < 6; ++k) expected += a(k) * r(k) * b(k);
    CHECK(tau == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("fusion falls back to the entity itself without edges") {
  Rng rng(45);
  ad::Graph g;
  Tensor h = rand_vec(rng, 4);
  ad::Var self = g.input(h, false);
  ad::Var fused = knowledge_fuse_entity(self, {}, {self}, false);
  CHECK(fused.val().data == h.data);
}

TEST_CASE("saturated confidence converges to the relation-gated neighbor") {
  Rng rng(46);
  ad::Graph g;
  Tensor hj = rand_vec(rng, 4), r = rand_vec(rng, 4);
  std::vector<ad::Var> ents = {g.input(rand_vec(rng, 4), false), g.input(hj, false)};
  ScoredEdge edge{1, g.input(r, false), g.input(Tensor::scalar(60.0), false)};
  ad::Var fused = knowledge_fuse_entity(ents[0], {edge}, ents, false);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(fused.val()(k) == doctest::Approx(hj(k) * r(k)).epsilon(1e-12));
  }
}

TEST_CASE("two hand-set edges match the fusion transcription oracle") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    ad::Graph g;
    Tensor h0 = rand_vec(rng, 3), h1 = rand_vec(rng, 3), h2 = rand_vec(rng, 3);
    Tensor r1 = rand_vec(rng, 3), r2 = rand_vec(rng, 3);
    const double t1 = rng.normal(), t2 = rng.normal();
    std::vector<ad::Var> ents = {g.input(h0, false), g.input(h1, false), g.input(h2, false)};
    std::vector<ScoredEdge> edges = {
        {1, g.input(r1, false), g.input(Tensor::scalar(t1), false)},
        {2, g.input(r2, false), g.input(Tensor::scalar(t2), false)}};
    ad::Var fused = knowledge_fuse_entity(ents[0], edges, ents, false);
    auto sigma = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    for (std::size_t k = 0; k < 3; ++k) {
      const double expected = sigma(t1) * h1(k) * r1(k) + sigma(t2) * h2(k) * r2(k);
      CHECK(fused.val()(k) == doctest::Approx(expected).epsilon(1e-12));
    }
    // Accept-all mode drops the sigmoid gates.
    ad::Var accept_all = knowledge_fuse_entity(ents[0], edges, ents, true);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(accept_all.val()(k) == doctest::Approx(h1(k) * r1(k) + h2(k) * r2(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("filtration loss singletons match hand-derived values") {
  ad::Graph g;
  auto loss1 = filtration_loss(g, {g.input(Tensor::scalar(0.0), false)}, {1});
  CHECK(loss1.val()(0) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));

  // For tau = 0 and y = 0 the term is -log(sigma(1)).
  auto loss0 = filtration_loss(g, {g.input(Tensor::scalar(0.0), false)}, {0});
  const double sigma1 = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(loss0.val()(0) == doctest::Approx(-std::log(sigma1)).epsilon(1e-12));
  CHECK(loss0.val()(0) == doctest::Approx(0.3132616875).epsilon(1e-9));

  CHECK(filtration_loss(g, {}, {}).val()(0) == 0.0);
}

TEST_CASE("filtration loss matches the direct summation oracle") {
  Rng rng(48);
  auto sigma = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  for (int trial = 0; trial < 30; ++trial) {
    ad::Graph g;
    std::vector<double> taus;
    std::vector<int> ys;
    std::vector<ad::Var> tau_vars;
    const std::size_t n = 3;
    for (std::size_t i = 0; i < n; ++i) {
      taus.push_back(rng.normal(0, 2));
      ys.push_back(rng.uniform() < 0.5 ? 1 : 0);
      tau_vars.push_back(g.input(Tensor::scalar(taus.back()), false));
    }
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      expected += ys[i] * std::log(sigma(taus[i])) + (1 - ys[i]) * std::log(sigma(1.0 - taus[i]));
    }
    expected = -expected / n;
    CHECK(filtration_loss(g, tau_vars, ys).val()(0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("per-edge loss is monotone in the stated directions") {
  auto edge_loss = [](double tau, int y) {
    ad::Graph g;
    return filtration_loss(g, {g.input(Tensor::scalar(tau), false)}, {y}).val()(0);
  };
  double prev1 = edge_loss(-4.0, 1);
  double prev0 = edge_loss(-4.0, 0);
  for (double tau = -3.5; tau <= 4.0; tau += 0.5) {
    const double cur1 = edge_loss(tau, 1);
    const double cur0 = edge_loss(tau, 0);
    CHECK(cur1 < prev1);  // y=1: strictly decreasing in tau
    CHECK(cur0 > prev0);  // y=0: strictly increasing in tau
    prev1 = cur1;
    prev0 = cur0;
  }
}

TEST_CASE("filtration labels follow annotated facts") {
  corpus::Document doc = city_doc();
  doc.facts.push_back({0, 1, "P17", {}});
  docgraph::MHDG g = docgraph::build_mhdg(doc);
  SnapshotKB kb = SnapshotKB::from_json_text(kSnapshotJson);
  KMHDG kg = augment_graph(g, doc, kb);
  const std::vector<int> labels = filtration_labels(kg, doc);
  REQUIRE(labels.size() == 2);
  CHECK(labels[0] == 1);  // P17 is annotated
  CHECK(labels[1] == 0);  // P131 is not
}

TEST_CASE("missing relation embedding is an error") {
  ParamStore params;
  Rng rng(49);
  RelationEmbeddingTable table({"P17"}, params, rng, 4);
  ad::Graph g;
  CHECK_THROWS_AS(table.bind(g, "P999", false, params), ValidationError);
  CHECK_NOTHROW(table.bind(g, "P17", false, params));
}

TEST_CASE("filtration loss gradients match finite differences") {
  Rng rng(50);
  const std::size_t d = 4;
  ParamStore params;
  params.add("h0", rand_vec(rng, d, 0.7));
  params.add("h1", rand_vec(rng, d, 0.7));
  params.add("r", rand_vec(rng, d, 0.7));

  auto loss_fn = [&](bool with_grad) {
    if (with_grad) params.zero_grads();
    ad::Graph g;
    ad::Var h0 = with_grad ? params.bind(g, "h0") : params.bind_const(g, "h0");
    ad::Var h1 = with_grad ? params.bind(g, "h1") : params.bind_const(g, "h1");
    ad::Var r = with_grad ? params.bind(g, "r") : params.bind_const(g, "r");
    ad::Var tau_fwd = confidence_score(h0, h1, r);
    ad::Var tau_rev = confidence_score(h1, h0, r);
    ad::Var loss = filtration_loss(g, {tau_fwd, tau_rev}, {1, 0});
    if (with_grad) {
      g.backward(loss);
      params.flush_grads();
    }
    return loss.val()(0);
  };
  auto res = testsupport::gradcheck_params(params, loss_fn, rng, 20);
  CHECK(res.max_rel_err < 1e-4);
}
