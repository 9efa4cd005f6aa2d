#include "knowra/encoder.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace knowra::encoder {

using ad::Var;
using nlohmann::json;

void EncoderConfig::validate() const {
  if (hidden == 0 || heads == 0 || layers == 0) throw ConfigError("encoder: hidden, heads and layers must be positive");
  if (hidden % heads != 0) throw ConfigError("encoder: hidden size must be divisible by head count");
  if (stride >= window) throw ConfigError("encoder: stride must be smaller than window length");
  if (attention_source != "last_layer" && attention_source != "mean_all_layers") {
    throw ConfigError("encoder: unknown attention_source '" + attention_source + "'");
  }
}

EncodedDocument encode(Backend& backend, const corpus::TokenizedDocument& tdoc) {
  ad::Graph g;
  EncodedGraph eg = backend.encode_graph(g, tdoc, /*trainable=*/false);
  EncodedDocument out;
  out.H = eg.H.val();
  out.cls = eg.cls.val();
  for (const Var& a : eg.A) out.A.push_back(a.val());
  return out;
}

ToyBackend::ToyBackend(std::uint64_t seed, EncoderConfig cfg, std::size_t vocab_size,
                       ParamStore& params)
    : cfg_(std::move(cfg)), vocab_size_(vocab_size), params_(&params) {
  cfg_.validate();
  Rng rng(seed);
  const std::size_t d = cfg_.hidden;
  const std::size_t dh = d / cfg_.heads;
  params_->add("enc/tok_embed", init_normal(rng, {vocab_size_, d}, 0.02));
  params_->add("enc/pos_embed", init_normal(rng, {cfg_.window, d}, 0.02));
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string base = "enc/l" + std::to_string(l) + "/";
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const std::string hb = base + "h" + std::to_string(h) + "/";
      params_->add(hb + "Wq", init_xavier(rng, d, dh));
      params_->add(hb + "Wk", init_xavier(rng, d, dh));
      params_->add(hb + "Wv", init_xavier(rng, d, dh));
    }
    params_->add(base + "Wo", init_xavier(rng, d, d));
    params_->add(base + "ffn_W1", init_xavier(rng, d, d));
    params_->add(base + "ffn_W2", init_xavier(rng, d, d));
  }
}

EncodedGraph ToyBackend::encode_window(ad::Graph& g, const std::vector<int>& ids, bool trainable) {
  const std::size_t d = cfg_.hidden;
  const std::size_t dh = d / cfg_.heads;
  auto bind = [&](const std::string& name) {
    return trainable ? params_->bind(g, name) : params_->bind_const(g, name);
  };

  Var tok = bind("enc/tok_embed");
  Var pos = bind("enc/pos_embed");
  std::vector<Var> rows;
  rows.reserve(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= vocab_size_) {
      throw InternalError("token id out of vocabulary range");
    }
    rows.push_back(ad::add(ad::row(tok, static_cast<std::size_t>(ids[t])), ad::row(pos, t)));
  }
  Var E = ad::stack_rows(rows);

  std::vector<std::vector<Var>> layer_attn;  // [layer][head], each L x L
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string base = "enc/l" + std::to_string(l) + "/";
    std::vector<Var> heads_attn;
    std::vector<Var> heads_ctx;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const std::string hb = base + "h" + std::to_string(h) + "/";
      Var Q = ad::matmul(E, bind(hb + "Wq"));
      Var K = ad::matmul(E, bind(hb + "Wk"));
      Var V = ad::matmul(E, bind(hb + "Wv"));
      Var S = ad::smul(ad::matmul_nt(Q, K), 1.0 / std::sqrt(static_cast<double>(dh)));
      Var A = ad::rowwise_softmax(S);
      heads_attn.push_back(A);
      heads_ctx.push_back(ad::matmul(A, V));
    }
    Var ctx = cfg_.heads == 1 ? heads_ctx[0] : ad::hconcat(heads_ctx);
    E = ad::add(E, ad::matmul(ctx, bind(base + "Wo")));
    Var hid = ad::tanh(ad::matmul(E, bind(base + "ffn_W1")));
    E = ad::add(E, ad::matmul(hid, bind(base + "ffn_W2")));
    layer_attn.push_back(std::move(heads_attn));
  }

  EncodedGraph out;
  out.H = E;
  if (cfg_.attention_source == "last_layer") {
    out.A = layer_attn.back();
  } else {
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      std::vector<Var> per_layer;
      for (std::size_t l = 0; l < cfg_.layers; ++l) per_layer.push_back(layer_attn[l][h]);
      out.A.push_back(ad::smul(ad::add_n(per_layer), 1.0 / static_cast<double>(cfg_.layers)));
    }
  }
  out.cls = ad::row(out.H, 0);
  return out;
}

EncodedGraph ToyBackend::encode_graph(ad::Graph& g, const corpus::TokenizedDocument& tdoc,
                                      bool trainable) {
  const std::size_t L = tdoc.tokens.size();
  if (L == 0) throw ValidationError("cannot encode an empty token sequence");
  if (L <= cfg_.window) {
    return encode_window(g, tdoc.tokens, trainable);
  }

  // Sliding windows at `stride`, with a final window flushed to the end.
  std::vector<std::size_t> offsets;
  for (std::size_t off = 0; off + cfg_.window < L; off += cfg_.stride) offsets.push_back(off);
  offsets.push_back(L - cfg_.window);

  std::vector<EncodedGraph> windows;
  for (std::size_t off : offsets) {
    std::vector<int> ids(tdoc.tokens.begin() + off, tdoc.tokens.begin() + off + cfg_.window);
    windows.push_back(encode_window(g, ids, trainable));
  }

  auto covering = [&](std::size_t t) {
    std::vector<std::size_t> ws;
    for (std::size_t w = 0; w < offsets.size(); ++w) {
      if (t >= offsets[w] && t < offsets[w] + cfg_.window) ws.push_back(w);
    }
    return ws;
  };

  // Token embeddings: average over covering windows.
  std::vector<Var> hrows;
  hrows.reserve(L);
  for (std::size_t t = 0; t < L; ++t) {
    const auto ws = covering(t);
    std::vector<Var> parts;
    for (std::size_t w : ws) parts.push_back(ad::row(windows[w].H, t - offsets[w]));
    hrows.push_back(ad::smul(ad::add_n(parts), 1.0 / static_cast<double>(ws.size())));
  }

  EncodedGraph out;
  out.H = ad::stack_rows(hrows);
  out.cls = ad::row(out.H, 0);

  // Attention: average entries over windows covering both endpoints, then
  // renormalize each query row so it sums to 1 again.
  for (std::size_t h = 0; h < cfg_.heads; ++h) {
    std::vector<Var> arows;
    arows.reserve(L);
    for (std::size_t q = 0; q < L; ++q) {
      const auto ws = covering(q);
      std::vector<Var> padded;
      Tensor inv_counts = Tensor::zeros({L});
      for (std::size_t w : ws) {
        padded.push_back(ad::pad(ad::row(windows[w].A[h], q - offsets[w]), L, offsets[w]));
        for (std::size_t k = offsets[w]; k < offsets[w] + cfg_.window; ++k) inv_counts(k) += 1.0;
      }
      for (std::size_t k = 0; k < L; ++k) {
        inv_counts(k) = inv_counts(k) > 0.0 ? 1.0 / inv_counts(k) : 0.0;
      }
      Var summed = ad::mul_cvec(ad::add_n(padded), inv_counts);
      arows.push_back(ad::vdiv(summed, ad::sum(summed)));
    }
    out.A.push_back(ad::stack_rows(arows));
  }
  return out;
}

PrecomputedBackend::PrecomputedBackend(const std::string& path, EncoderConfig cfg)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::ifstream in(path);
  if (!in) throw ConfigError("pretrained backend: cannot open dump file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pretrained backend dump: ") + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    EncodedDocument enc;
    const auto& hm = it.value().at("H");
    const std::size_t L = hm.size();
    const std::size_t d = L ? hm.at(0).size() : 0;
    if (d != cfg_.hidden) throw ConfigError("pretrained backend: hidden size mismatch for " + it.key());
    enc.H = Tensor::zeros({L, d});
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t k = 0; k < d; ++k) enc.H(i, k) = hm.at(i).at(k).get<double>();
    const auto& am = it.value().at("A");
    if (am.size() != cfg_.heads) throw ConfigError("pretrained backend: head count mismatch for " + it.key());
    for (const auto& head : am) {
      Tensor A = Tensor::zeros({L, L});
      for (std::size_t q = 0; q < L; ++q) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
          A(q, k) = head.at(q).at(k).get<double>();
          row_sum += A(q, k);
        }
        if (std::abs(row_sum - 1.0) > 1e-5) {
          throw ValidationError("pretrained backend: attention row " + std::to_string(q) +
                                " of " + it.key() + " does not sum to 1");
        }
      }
      enc.A.push_back(std::move(A));
    }
    enc.cls = Tensor::zeros({d});
    for (std::size_t k = 0; k < d; ++k) enc.cls(k) = enc.H(0, k);
    docs_[it.key()] = std::move(enc);
  }
}

EncodedGraph PrecomputedBackend::encode_graph(ad::Graph& g, const corpus::TokenizedDocument& tdoc,
                                              bool) {
  auto it = docs_.find(tdoc.doc_id);
  if (it == docs_.end()) throw ValidationError("pretrained backend: no dump for document " + tdoc.doc_id);
  if (it->second.H.rows() != tdoc.tokens.size()) {
    throw ValidationError("pretrained backend: dump length mismatch for " + tdoc.doc_id);
  }
  EncodedGraph out;
  out.H = g.constant(it->second.H);
  out.cls = g.constant(it->second.cls);
  for (const Tensor& a : it->second.A) out.A.push_back(g.constant(a));
  return out;
}

std::unique_ptr<Backend> make_backend(const EncoderConfig& cfg, std::uint64_t seed,
                                      std::size_t vocab_size, ParamStore& params,
                                      const std::string& checkpoint_path) {
  if (cfg.backend == "toy") {
    return std::make_unique<ToyBackend>(seed, cfg, vocab_size, params);
  }
  if (cfg.backend == "pretrained") {
    return std::make_unique<PrecomputedBackend>(checkpoint_path, cfg);
  }
  throw ConfigError("unknown encoder backend '" + cfg.backend + "'");
}

}  // namespace knowra::encoder
