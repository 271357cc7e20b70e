#pragma once

#include "ntt/attention.hpp"
#include "ntt/decoder.hpp"
#include "ntt/grounding.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ntt {

struct ModelConfig {
  std::string kind;  // "twin" or "baseline"
  int vocab_size = 0;
  int textual_size = 0;  // leading block of the vocab emitted as plain words
  int embed_dim = 0;
  int hidden_dim = 0;
  int feat_dim = 0;
  std::vector<int> subcat_ids;  // vocab ids usable as slot word forms
};

using ModelState = std::vector<LstmState>;

struct StepOutput {
  ModelState next;
  GroundingOutput g;
  Tensor x_shared;
  Tensor h_top;
  Tensor c_top;
  Tensor query;
  std::vector<Tensor> alpha_v;     // per channel
  std::vector<Tensor> alpha_vbar;  // per channel
  GateSet gates;                   // twin only; tensors undefined otherwise
};

// A captioner stepped one token at a time. Implementations register their
// weights in the shared store at construction, so building a model over a
// store restored from disk binds instead of initializing.
class CaptionModel {
 public:
  virtual ~CaptionModel() = default;

  virtual const ModelConfig& config() const = 0;
  virtual ModelState initial_state() const = 0;
  virtual StepOutput step(const ModelState& state, const RegionSet& regions, int token_id,
                          Mode mode, Rng& rng) const = 0;

  // Word-form distributions for a region the step pointed at.
  virtual SlotFill fill_slot(const StepOutput& out, const RegionSet& regions,
                             int region) const = 0;
};

std::unique_ptr<CaptionModel> make_model(const ModelConfig& cfg, ParamStore& store, Rng& rng);

}  // namespace ntt
