#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "knowra/harness/harness.hpp"

namespace knowra::harness {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("config: epochs must be positive");
  if (lr <= 0.0) throw ConfigError("config: learning rate must be positive");
  if (batch_size == 0) throw ConfigError("config: batch size must be positive");
  if (lambda < 0.0) throw ConfigError("config: lambda must be non-negative");
  model.enc.validate();
}

std::string TrainConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["epochs"] = epochs;
  j["lr"] = lr;
  j["batch_size"] = batch_size;
  j["lambda"] = lambda;
  j["warmup_fraction"] = warmup_fraction;
  j["clip_norm"] = clip_norm;
  j["eval_every"] = eval_every;
  j["train_path"] = train_path;
  j["dev_path"] = dev_path;
  j["kb_path"] = kb_path;
  j["vocab_path"] = vocab_path;
  j["coref_provider"] = coref_provider;
  j["coref_fixture"] = coref_fixture;
  j["checkpoint_path"] = checkpoint_path;
  j["log_path"] = log_path;
  j["encoder"] = {{"backend", model.enc.backend},
                  {"hidden", model.enc.hidden},
                  {"heads", model.enc.heads},
                  {"layers", model.enc.layers},
                  {"window", model.enc.window},
                  {"stride", model.enc.stride},
                  {"attention_source", model.enc.attention_source},
                  {"pretrained_dump", model.pretrained_dump}};
  j["model"] = {{"gat_layers", model.gat_layers},
                {"leaky_slope", model.leaky_slope},
                {"self_loops", model.self_loops},
                {"bilinear_group", model.bilinear_group},
                {"axial_scale", model.axial_scale},
                {"kra_full_backprop", model.kra_full_backprop},
                {"use_graph", model.use_graph},
                {"use_coref", model.use_coref},
                {"use_knowledge", model.use_knowledge},
                {"use_filtration", model.use_filtration},
                {"use_axial", model.use_axial}};
  return j.dump(2);
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  TrainConfig cfg;
  auto get = [&](const json& src, const char* key, auto& dst) {
    if (src.contains(key)) dst = src.at(key).get<std::decay_t<decltype(dst)>>();
  };
  get(j, "seed", cfg.seed);
  get(j, "epochs", cfg.epochs);
  get(j, "lr", cfg.lr);
  get(j, "batch_size", cfg.batch_size);
  get(j, "lambda", cfg.lambda);
  get(j, "warmup_fraction", cfg.warmup_fraction);
  get(j, "clip_norm", cfg.clip_norm);
  get(j, "eval_every", cfg.eval_every);
  get(j, "train_path", cfg.train_path);
  get(j, "dev_path", cfg.dev_path);
  get(j, "kb_path", cfg.kb_path);
  get(j, "vocab_path", cfg.vocab_path);
  get(j, "coref_provider", cfg.coref_provider);
  get(j, "coref_fixture", cfg.coref_fixture);
  get(j, "checkpoint_path", cfg.checkpoint_path);
  get(j, "log_path", cfg.log_path);
  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    get(e, "backend", cfg.model.enc.backend);
    get(e, "hidden", cfg.model.enc.hidden);
    get(e, "heads", cfg.model.enc.heads);
    get(e, "layers", cfg.model.enc.layers);
    get(e, "window", cfg.model.enc.window);
    get(e, "stride", cfg.model.enc.stride);
    get(e, "attention_source", cfg.model.enc.attention_source);
    get(e, "pretrained_dump", cfg.model.pretrained_dump);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    get(m, "gat_layers", cfg.model.gat_layers);
    get(m, "leaky_slope", cfg.model.leaky_slope);
    get(m, "self_loops", cfg.model.self_loops);
    get(m, "bilinear_group", cfg.model.bilinear_group);
    get(m, "axial_scale", cfg.model.axial_scale);
    get(m, "kra_full_backprop", cfg.model.kra_full_backprop);
    get(m, "use_graph", cfg.model.use_graph);
    get(m, "use_coref", cfg.model.use_coref);
    get(m, "use_knowledge", cfg.model.use_knowledge);
    get(m, "use_filtration", cfg.model.use_filtration);
    get(m, "use_axial", cfg.model.use_axial);
  }
  return cfg;
}

void TrainConfig::apply_env_overrides(const std::function<const char*(const char*)>& getenv_fn) {
  auto env = [&](const char* name) -> const char* { return getenv_fn(name); };
  auto set_u64 = [&](const char* name, auto& dst) {
    if (const char* v = env(name)) dst = std::stoull(v);
  };
  auto set_double = [&](const char* name, double& dst) {
    if (const char* v = env(name)) dst = std::stod(v);
  };
  auto set_string = [&](const char* name, std::string& dst) {
    if (const char* v = env(name)) dst = v;
  };
  auto set_bool = [&](const char* name, bool& dst) {
    if (const char* v = env(name)) dst = std::string(v) == "1" || std::string(v) == "true";
  };
  set_u64("KNOWRA_SEED", seed);
  set_u64("KNOWRA_EPOCHS", epochs);
  set_double("KNOWRA_LR", lr);
  set_u64("KNOWRA_BATCH_SIZE", batch_size);
  set_double("KNOWRA_LAMBDA", lambda);
  set_double("KNOWRA_WARMUP_FRACTION", warmup_fraction);
  set_double("KNOWRA_CLIP_NORM", clip_norm);
  set_u64("KNOWRA_EVAL_EVERY", eval_every);
  set_string("KNOWRA_TRAIN_PATH", train_path);
  set_string("KNOWRA_DEV_PATH", dev_path);
  set_string("KNOWRA_KB_PATH", kb_path);
  set_string("KNOWRA_VOCAB_PATH", vocab_path);
  set_string("KNOWRA_COREF_PROVIDER", coref_provider);
  set_string("KNOWRA_COREF_FIXTURE", coref_fixture);
  set_string("KNOWRA_CHECKPOINT_PATH", checkpoint_path);
  set_string("KNOWRA_LOG_PATH", log_path);
  set_string("KNOWRA_ENCODER_BACKEND", model.enc.backend);
  set_u64("KNOWRA_ENCODER_HIDDEN", model.enc.hidden);
  set_u64("KNOWRA_ENCODER_HEADS", model.enc.heads);
  set_u64("KNOWRA_ENCODER_LAYERS", model.enc.layers);
  set_u64("KNOWRA_ENCODER_WINDOW", model.enc.window);
  set_u64("KNOWRA_ENCODER_STRIDE", model.enc.stride);
  set_string("KNOWRA_ENCODER_ATTENTION_SOURCE", model.enc.attention_source);
  set_string("KNOWRA_ENCODER_PRETRAINED_DUMP", model.pretrained_dump);
  set_u64("KNOWRA_MODEL_GAT_LAYERS", model.gat_layers);
  set_double("KNOWRA_MODEL_LEAKY_SLOPE", model.leaky_slope);
  set_bool("KNOWRA_MODEL_SELF_LOOPS", model.self_loops);
  set_u64("KNOWRA_MODEL_BILINEAR_GROUP", model.bilinear_group);
  set_bool("KNOWRA_MODEL_AXIAL_SCALE", model.axial_scale);
  set_bool("KNOWRA_MODEL_KRA_FULL_BACKPROP", model.kra_full_backprop);
  set_bool("KNOWRA_MODEL_USE_GRAPH", model.use_graph);
  set_bool("KNOWRA_MODEL_USE_COREF", model.use_coref);
  set_bool("KNOWRA_MODEL_USE_KNOWLEDGE", model.use_knowledge);
  set_bool("KNOWRA_MODEL_USE_FILTRATION", model.use_filtration);
  set_bool("KNOWRA_MODEL_USE_AXIAL", model.use_axial);
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  TrainConfig cfg = from_json_text(ss.str());
  cfg.apply_env_overrides([](const char* name) { return std::getenv(name); });
  cfg.validate();
  return cfg;
}

std::string TrainConfig::config_hash() const {
  // FNV-1a over the canonical dump; stable across runs and platforms.
  const std::string text = to_json_text();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace knowra::harness
