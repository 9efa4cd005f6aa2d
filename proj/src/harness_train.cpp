#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "knowra/harness/harness.hpp"

namespace knowra::harness {

using nlohmann::json;

Workbench Workbench::load(const TrainConfig& cfg) {
  Workbench bench;
  bench.vocab = corpus::RelationVocab::load(cfg.vocab_path);
  bench.train_docs = corpus::load_docred_json(cfg.train_path, bench.vocab);
  bench.dev_docs = cfg.dev_path.empty() || cfg.dev_path == cfg.train_path
                       ? bench.train_docs
                       : corpus::load_docred_json(cfg.dev_path, bench.vocab);
  if (!cfg.kb_path.empty()) {
    if (cfg.kb_path.rfind("http://", 0) == 0 || cfg.kb_path.rfind("https://", 0) == 0) {
      knowledge::LiveKBConfig live;
      live.endpoint = cfg.kb_path;
      if (const char* v = std::getenv("KNOWRA_KB_TIMEOUT_MS")) live.timeout_ms = std::atoi(v);
      if (const char* v = std::getenv("KNOWRA_KB_MAX_RETRIES")) live.max_retries = std::atoi(v);
      if (const char* v = std::getenv("KNOWRA_KB_CACHE")) live.cache_path = v;
      bench.kb = std::make_unique<knowledge::LiveKB>(live, nullptr);
    } else {
      bench.kb = std::make_unique<knowledge::SnapshotKB>(knowledge::SnapshotKB::load(cfg.kb_path));
    }
  }
  bench.token_vocab = corpus::Vocabulary::build(bench.train_docs);
  if (cfg.coref_provider != "none") {
    bench.coref_provider = coref::make_provider(cfg.coref_provider, cfg.coref_fixture);
  }
  return bench;
}

FactSet gold_facts(const corpus::Corpus& corpus) {
  FactSet out;
  for (const corpus::Document& doc : corpus) {
    for (const corpus::RelationFact& f : doc.facts) {
      out.insert({doc.doc_id, f.head, f.tail, f.relation});
    }
  }
  return out;
}

namespace {

std::vector<std::unique_ptr<model::PreparedDocument>> prepare_all(
    const corpus::Corpus& docs, const TrainConfig& cfg, Workbench& bench, Counters* counters) {
  std::vector<std::unique_ptr<model::PreparedDocument>> out;
  const corpus::SubwordMapper mapper = bench.token_vocab.mapper();
  for (const corpus::Document& doc : docs) {
    out.push_back(model::prepare_document(doc, mapper, cfg.model.enc.window,
                                          cfg.model.use_knowledge ? bench.kb.get() : nullptr,
                                          cfg.model.use_coref ? bench.coref_provider.get() : nullptr,
                                          counters));
  }
  return out;
}

FactSet decode_to_facts(model::Model& m, const std::vector<std::unique_ptr<model::PreparedDocument>>& docs) {
  FactSet out;
  for (const auto& pd : docs) {
    for (const objective::Prediction& p : m.predict(*pd)) {
      out.insert({pd->doc->doc_id, p.head, p.tail, m.vocab().id_at(p.relation)});
    }
  }
  return out;
}

std::vector<Tensor> snapshot_params(const ParamStore& params) {
  std::vector<Tensor> out;
  for (const auto& e : params.entries()) out.push_back(e.value);
  return out;
}

void restore_params(ParamStore& params, const std::vector<Tensor>& snap) {
  auto& entries = params.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].value = snap[i];
}

}  // namespace

TrainResult train(const TrainConfig& cfg, Workbench& bench) {
  cfg.validate();
  auto m = std::make_shared<model::Model>(
      cfg.model, cfg.seed, bench.vocab, bench.token_vocab.size(),
      bench.kb ? bench.kb->known_relation_ids() : std::vector<std::string>{});

  auto train_pd = prepare_all(bench.train_docs, cfg, bench, &m->counters());
  const bool dev_is_train = cfg.dev_path.empty() || cfg.dev_path == cfg.train_path;
  auto dev_pd = dev_is_train ? std::vector<std::unique_ptr<model::PreparedDocument>>{}
                             : prepare_all(bench.dev_docs, cfg, bench, &m->counters());
  const auto& eval_pd = dev_is_train ? train_pd : dev_pd;

  const FactSet dev_gold = gold_facts(bench.dev_docs);
  const NamedFactSet train_named = named_facts(bench.train_docs);

  const std::size_t n_docs = train_pd.size();
  if (n_docs == 0) throw ValidationError("train: empty corpus");
  const std::size_t n_batches = (n_docs + cfg.batch_size - 1) / cfg.batch_size;

  AdamOptimizer::Options aopt;
  aopt.lr = cfg.lr;
  aopt.warmup_fraction = cfg.warmup_fraction;
  aopt.total_steps = cfg.epochs * n_batches;
  aopt.clip_norm = cfg.clip_norm;
  AdamOptimizer optimizer(aopt);

  TrainResult result;
  double best_f1 = -1.0;
  std::vector<Tensor> best_params = snapshot_params(m->params());

  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;

  ad::Graph graph;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(cfg.seed * 1000003ull + epoch);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    bool diverged = false;
    for (std::size_t b = 0; b < n_batches && !diverged; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, n_docs);
      m->params().zero_grads();
      for (std::size_t i = lo; i < hi; ++i) {
        graph.clear();
        model::ForwardResult fr = m->forward(graph, *train_pd[order[i]], cfg.lambda, true);
        const double loss_val = fr.loss.val()(0);
        if (!std::isfinite(loss_val)) {
          diverged = true;
          break;
        }
        epoch_loss += loss_val;
        ad::Var scaled = ad::smul(fr.loss, 1.0 / static_cast<double>(hi - lo));
        graph.backward(scaled);
        m->params().flush_grads();
      }
      if (!diverged) optimizer.step(m->params());
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss / static_cast<double>(n_docs);

    if (diverged) {
      std::cerr << "[train] non-finite loss at epoch " << epoch << "; keeping best checkpoint\n";
      result.aborted_nan = true;
      result.log.push_back(std::move(log));
      break;
    }

    if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs) {
      FactSet preds = decode_to_facts(*m, eval_pd);
      MetricsReport report = evaluate(preds, dev_gold, train_named, bench.dev_docs);
      report.seed = cfg.seed;
      report.config_hash = cfg.config_hash();
      if (report.f1 > best_f1) {
        best_f1 = report.f1;
        best_params = snapshot_params(m->params());
        result.best_dev = report;
        result.best_epoch = epoch;
        result.best_predictions = preds;
      }
      log.dev = std::move(report);
    }
    result.log.push_back(std::move(log));
  }

  restore_params(m->params(), best_params);
  result.trained = m;
  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(cfg.checkpoint_path, *m, cfg, bench.train_docs);
  }
  if (!cfg.log_path.empty()) {
    json j = json::array();
    for (const EpochLog& l : result.log) {
      json rec{{"epoch", l.epoch}, {"train_loss", l.train_loss}};
      if (l.dev) rec["dev"] = json::parse(l.dev->to_json_text());
      j.push_back(std::move(rec));
    }
    std::ofstream out(cfg.log_path);
    out << j.dump(2) << '\n';
  }
  return result;
}

FactSet predictions_for(model::Model& m, const corpus::Corpus& docs, Workbench& bench,
                        std::vector<double>* scores) {
  TrainConfig shim;
  shim.model = m.config();
  auto prepared = prepare_all(docs, shim, bench, &m.counters());
  FactSet out;
  for (const auto& pd : prepared) {
    for (const objective::Prediction& p : m.predict(*pd)) {
      out.insert({pd->doc->doc_id, p.head, p.tail, m.vocab().id_at(p.relation)});
      if (scores) scores->push_back(p.score);
    }
  }
  return out;
}

std::string prediction_dump(model::Model& m, const corpus::Corpus& docs, Workbench& bench) {
  TrainConfig shim;
  shim.model = m.config();
  auto prepared = prepare_all(docs, shim, bench, &m.counters());
  std::ostringstream out;
  for (const auto& pd : prepared) {
    for (const objective::Prediction& p : m.predict(*pd)) {
      json line{{"doc_id", pd->doc->doc_id},
                {"h", p.head},
                {"t", p.tail},
                {"r", m.vocab().id_at(p.relation)},
                {"score", p.score}};
      out << line.dump() << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const std::string& path, const model::Model& m, const TrainConfig& cfg,
                     const corpus::Corpus& train_docs) {
  json j;
  j["format_version"] = 1;
  j["config"] = json::parse(cfg.to_json_text());
  j["config_hash"] = cfg.config_hash();
  j["token_vocab_words"] = corpus::Vocabulary::build(train_docs).words();
  j["kb_relation_ids"] = m.kb_relation_ids();
  json params = json::object();
  for (const auto& e : m.params().entries()) {
    params[e.name] = {{"shape", e.value.shape}, {"data", e.value.data}};
  }
  j["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (j.at("format_version").get<int>() != 1) {
    throw ConfigError("unsupported checkpoint format version");
  }
  LoadedCheckpoint out;
  out.cfg = TrainConfig::from_json_text(j.at("config").dump());
  out.bench = std::make_unique<Workbench>(Workbench::load(out.cfg));
  if (j.contains("token_vocab_words")) {
    out.bench->token_vocab =
        corpus::Vocabulary::from_words(j.at("token_vocab_words").get<std::vector<std::string>>());
  }
  const auto rel_ids = j.at("kb_relation_ids").get<std::vector<std::string>>();
  out.model = std::make_shared<model::Model>(out.cfg.model, out.cfg.seed, out.bench->vocab,
                                             out.bench->token_vocab.size(), rel_ids);
  for (auto& e : out.model->params().entries()) {
    const json& rec = j.at("params").at(e.name);
    const auto shape = rec.at("shape").get<std::vector<std::size_t>>();
    if (shape != e.value.shape) {
      throw ConfigError("checkpoint tensor shape mismatch for " + e.name);
    }
    e.value.data = rec.at("data").get<std::vector<double>>();
  }
  return out;
}

// ---------------------------------------------------------------------
// Sweeps

SweepResult sweep(const TrainConfig& cfg, const std::string& axis,
                  const std::vector<double>& values, const std::vector<std::uint64_t>& seeds) {
  if (values.empty()) throw ConfigError("sweep: values must be non-empty");
  if (axis != "lambda" && axis != "context_length") {
    throw ConfigError("sweep: unknown axis '" + axis + "'");
  }
  SweepResult result;
  result.axis = axis;
  Workbench bench = Workbench::load(cfg);
  for (double value : values) {
    for (std::uint64_t seed : seeds) {
      TrainConfig run = cfg;
      run.seed = seed;
      run.checkpoint_path.clear();
      run.log_path.clear();
      if (axis == "lambda") {
        run.lambda = value;
      } else {
        run.model.enc.window = static_cast<std::size_t>(value);
        run.model.enc.stride = std::max<std::size_t>(1, run.model.enc.window / 2);
      }
      SweepRow row;
      row.value = value;
      row.seed = seed;
      try {
        TrainResult tr = train(run, bench);
        row.dev = tr.best_dev;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "axis,value,seed,f1,ign_f1,intra_f1,inter_f1,precision,recall,failed,error\n";
  for (const SweepRow& r : rows) {
    out << axis << ',' << r.value << ',' << r.seed << ',' << r.dev.f1 << ',' << r.dev.ign_f1
        << ',' << r.dev.intra_f1 << ',' << r.dev.inter_f1 << ',' << r.dev.precision << ','
        << r.dev.recall << ',' << (r.failed ? 1 : 0) << ',' << r.error << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------
// Graph inspection

namespace {

json knowledge_edge_json(const knowledge::KnowledgeEdge& e, std::optional<double> tau) {
  json rec{{"head", e.head},     {"tail", e.tail},         {"relation", e.relation},
           {"qid_head", e.qid_head}, {"qid_tail", e.qid_tail}, {"source", e.source},
           {"style", "dashed"}};
  if (e.gold_flag) rec["gold_flag"] = *e.gold_flag;
  if (tau) {
    const double sigma = 1.0 / (1.0 + std::exp(-*tau));
    rec["tau"] = *tau;
    rec["sigma_tau"] = sigma;
    rec["accepted"] = sigma >= 0.5;
  }
  return rec;
}

json graph_json(const model::PreparedDocument& pd, const std::vector<double>* taus) {
  json j = json::parse(docgraph::to_json(pd.mhdg, *pd.doc));
  json label_edges = json::array();
  for (const corpus::RelationFact& f : pd.doc->facts) {
    label_edges.push_back({{"h", f.head}, {"t", f.tail}, {"r", f.relation}, {"style", "solid"}});
  }
  j["label_edges"] = std::move(label_edges);
  json know = json::array();
  for (std::size_t i = 0; i < pd.kmhdg.knowledge_edges.size(); ++i) {
    know.push_back(knowledge_edge_json(
        pd.kmhdg.knowledge_edges[i],
        taus ? std::optional<double>((*taus)[i]) : std::nullopt));
  }
  j["knowledge_edges"] = std::move(know);
  return j;
}

}  // namespace

std::string inspect_graph(model::Model& m, Workbench& bench, const std::string& doc_id) {
  const corpus::Document* doc = nullptr;
  for (const corpus::Document& d : bench.train_docs) {
    if (d.doc_id == doc_id) doc = &d;
  }
  for (const corpus::Document& d : bench.dev_docs) {
    if (d.doc_id == doc_id) doc = &d;
  }
  if (!doc) throw ValidationError("inspect_graph: unknown document '" + doc_id + "'");

  auto pd = model::prepare_document(*doc, bench.token_vocab.mapper(), m.config().enc.window,
                                    bench.kb.get(), bench.coref_provider.get(), &m.counters());
  ad::Graph g;
  model::ForwardResult fr = m.forward(g, *pd, 0.0, false);
  return graph_json(*pd, &fr.taus).dump(2);
}

std::string build_graph_json(const corpus::Corpus& docs, knowledge::KBClient& kb,
                             const corpus::RelationVocab&) {
  json out = json::array();
  for (const corpus::Document& doc : docs) {
    model::PreparedDocument pd;
    pd.doc = &doc;
    pd.mhdg = docgraph::build_mhdg(doc);
    pd.kmhdg = knowledge::augment_graph(pd.mhdg, doc, kb);
    out.push_back(graph_json(pd, nullptr));
  }
  return out.dump(2);
}

}  // namespace knowra::harness
