#ifndef KNOWRA_ENCODER_HPP
#define KNOWRA_ENCODER_HPP

#include <memory>
#include <string>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/corpus.hpp"
#include "knowra/params.hpp"
#include "knowra/tensor.hpp"

namespace knowra::encoder {

struct EncoderConfig {
  std::string backend = "toy";
  std::size_t hidden = 32;  // d
  std::size_t heads = 2;
  std::size_t layers = 1;
  std::size_t window = 64;
  std::size_t stride = 32;
  // which attention matrix downstream sees: "last_layer" | "mean_all_layers"
  std::string attention_source = "last_layer";

  void validate() const;
};

// Value-level encoding result. A holds one L x L matrix per head; every
// row sums to 1 (within 1e-5) after window reassembly.
struct EncodedDocument {
  Tensor H;                // L x d
  std::vector<Tensor> A;   // heads x (L x L)
  Tensor cls;              // d
};

// Graph-level encoding result used inside a training step.
struct EncodedGraph {
  ad::Var H;
  std::vector<ad::Var> A;
  ad::Var cls;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Builds the encoding into `g`. `trainable` controls whether parameters
  // are bound with gradient tracking.
  virtual EncodedGraph encode_graph(ad::Graph& g, const corpus::TokenizedDocument& tdoc,
                                    bool trainable) = 0;
  virtual const EncoderConfig& config() const = 0;
};

// Inference-mode encode: runs the backend on a scratch graph and copies out
// plain tensors. Deterministic for fixed weights.
EncodedDocument encode(Backend& backend, const corpus::TokenizedDocument& tdoc);

// Small trainable self-attention encoder: token + position embeddings and
// `layers` blocks of multi-head self-attention plus a two-matrix tanh
// feed-forward, both with residual connections. All parameters live in the
// shared store under "enc/...".
class ToyBackend : public Backend {
 public:
  ToyBackend(std::uint64_t seed, EncoderConfig cfg, std::size_t vocab_size, ParamStore& params);

  EncodedGraph encode_graph(ad::Graph& g, const corpus::TokenizedDocument& tdoc,
                            bool trainable) override;
  const EncoderConfig& config() const override { return cfg_; }

 private:
  EncodedGraph encode_window(ad::Graph& g, const std::vector<int>& ids, bool trainable);

  EncoderConfig cfg_;
  std::size_t vocab_size_;
  ParamStore* params_;
};

// Adapter over an externally produced dump of token embeddings and
// attention maps, keyed by doc_id. Stands in for a pretrained language
// model run out of process; contributes no trainable parameters.
class PrecomputedBackend : public Backend {
 public:
  PrecomputedBackend(const std::string& path, EncoderConfig cfg);

  EncodedGraph encode_graph(ad::Graph& g, const corpus::TokenizedDocument& tdoc,
                            bool trainable) override;
  const EncoderConfig& config() const override { return cfg_; }

 private:
  EncoderConfig cfg_;
  std::map<std::string, EncodedDocument> docs_;
};

std::unique_ptr<Backend> make_backend(const EncoderConfig& cfg, std::uint64_t seed,
                                      std::size_t vocab_size, ParamStore& params,
                                      const std::string& checkpoint_path = "");

}  // namespace knowra::encoder

#endif  // KNOWRA_ENCODER_HPP
