// Command-line front end: corpus generation, graph export, training,
// evaluation, sweeps and graph inspection.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "knowra/harness/harness.hpp"

namespace {

using namespace knowra;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowra: document-level relation extraction with knowledge retrieval"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate a deterministic synthetic corpus + KB snapshot");
  std::uint64_t gen_seed = 1;
  corpus::SyntheticSpec spec;
  std::string gen_out = "synthetic";
  gen->add_option("--seed", gen_seed);
  gen->add_option("--docs", spec.num_docs);
  gen->add_option("--entities", spec.entities_per_doc);
  gen->add_option("--relations", spec.num_relations);
  gen->add_option("--kb-only-fraction", spec.kb_only_fraction);
  gen->add_option("--wrong-triple-fraction", spec.wrong_triple_fraction);
  gen->add_option("--bridge-fraction", spec.bridge_fraction);
  gen->add_option("--out", gen_out, "output prefix (writes <out>.docs.json, <out>.kb.json, <out>.vocab.json)");

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "export knowledge-augmented document graphs as JSON");
  std::string bg_input, bg_kb, bg_out, bg_vocab;
  bg->add_option("--input", bg_input)->required();
  bg->add_option("--kb", bg_kb)->required();
  bg->add_option("--vocab", bg_vocab)->required();
  bg->add_option("--out", bg_out)->required();

  // train
  auto* tr = app.add_subcommand("train", "train a model from a JSON config");
  std::string tr_config;
  tr->add_option("--config", tr_config)->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  std::string ev_ckpt, ev_split = "dev", ev_out, ev_dump;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--split", ev_split)->check(CLI::IsMember({"dev", "test", "train"}));
  ev->add_option("--out", ev_out);
  ev->add_option("--dump", ev_dump, "also write a JSONL prediction dump");

  // sweep
  auto* sw = app.add_subcommand("sweep", "train/eval across an axis of values");
  std::string sw_config, sw_axis = "lambda", sw_values = "0,0.1,0.5,1.0", sw_seeds = "1", sw_out;
  sw->add_option("--config", sw_config)->required();
  sw->add_option("--axis", sw_axis)->check(CLI::IsMember({"lambda", "context_length"}));
  sw->add_option("--values", sw_values);
  sw->add_option("--seeds", sw_seeds);
  sw->add_option("--out", sw_out);

  // inspect-graph
  auto* ig = app.add_subcommand("inspect-graph", "export one document's graph with knowledge-edge confidences");
  std::string ig_ckpt, ig_doc, ig_out;
  ig->add_option("--checkpoint", ig_ckpt)->required();
  ig->add_option("--doc", ig_doc)->required();
  ig->add_option("--out", ig_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      corpus::SyntheticCorpus synth = corpus::generate_synthetic_corpus(gen_seed, spec);
      corpus::save_docred_json(synth.docs, gen_out + ".docs.json");
      corpus::save_kb_snapshot(synth, gen_out + ".kb.json");
      write_file(gen_out + ".vocab.json", corpus::serialize_relation_vocab(synth.vocab));
      std::cout << "wrote " << synth.docs.size() << " documents, " << synth.triples.size()
                << " KB triples to " << gen_out << ".*\n";
    } else if (*bg) {
      corpus::RelationVocab vocab = corpus::RelationVocab::load(bg_vocab);
      corpus::Corpus docs = corpus::load_docred_json(bg_input, vocab);
      auto kb = knowledge::make_kb_client(bg_kb);
      write_file(bg_out, harness::build_graph_json(docs, *kb, vocab));
      std::cout << "wrote graphs for " << docs.size() << " documents to " << bg_out << "\n";
    } else if (*tr) {
      harness::TrainConfig cfg = harness::TrainConfig::load(tr_config);
      harness::Workbench bench = harness::Workbench::load(cfg);
      harness::TrainResult result = harness::train(cfg, bench);
      std::cout << "best dev F1 " << result.best_dev.f1 << " at epoch " << result.best_epoch
                << (result.aborted_nan ? " (aborted: non-finite loss)" : "") << "\n";
      if (!cfg.checkpoint_path.empty()) std::cout << "checkpoint: " << cfg.checkpoint_path << "\n";
    } else if (*ev) {
      harness::LoadedCheckpoint ck = harness::load_checkpoint(ev_ckpt);
      const corpus::Corpus& docs =
          ev_split == "train" ? ck.bench->train_docs : ck.bench->dev_docs;
      harness::FactSet preds = harness::predictions_for(*ck.model, docs, *ck.bench);
      harness::MetricsReport report =
          harness::evaluate(preds, harness::gold_facts(docs),
                            harness::named_facts(ck.bench->train_docs), docs);
      report.seed = ck.cfg.seed;
      report.config_hash = ck.cfg.config_hash();
      const std::string text = report.to_json_text();
      if (ev_out.empty()) {
        std::cout << text << "\n";
      } else {
        write_file(ev_out, text);
      }
      if (!ev_dump.empty()) {
        write_file(ev_dump, harness::prediction_dump(*ck.model, docs, *ck.bench));
      }
    } else if (*sw) {
      harness::TrainConfig cfg = harness::TrainConfig::load(sw_config);
      std::vector<std::uint64_t> seeds;
      for (double s : parse_values(sw_seeds)) seeds.push_back(static_cast<std::uint64_t>(s));
      harness::SweepResult result = harness::sweep(cfg, sw_axis, parse_values(sw_values), seeds);
      const std::string csv = result.to_csv();
      if (sw_out.empty()) {
        std::cout << csv;
      } else {
        write_file(sw_out, csv);
      }
    } else if (*ig) {
      harness::LoadedCheckpoint ck = harness::load_checkpoint(ig_ckpt);
      const std::string text = harness::inspect_graph(*ck.model, *ck.bench, ig_doc);
      if (ig_out.empty()) {
        std::cout << text << "\n";
      } else {
        write_file(ig_out, text);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
