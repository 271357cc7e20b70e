#pragma once

#include "ntt/attention.hpp"
#include "ntt/nn.hpp"

#include <string>
#include <vector>

namespace ntt {

// Head that decides, per step, between emitting a textual word and pointing
// at a region, and that resolves a pointed region into a concrete word form.
struct GroundingWeights {
  // Region pointing; Wz and wh also score the sentinel so both live in the
  // same comparison space.
  Tensor Wv;  // [inner x feat]
  Tensor Wz;  // [inner x hidden]
  Tensor wh;  // [inner]
  // Sentinel gate over the step input and previous top hidden.
  Tensor Wx;     // [hidden x x_dim]
  Tensor Wh;     // [hidden x hidden]
  Tensor Ws;     // [inner x hidden]
  Tensor Wq;     // [textual_vocab x query_dim]
  FfParams ffp;  // region+hidden -> plurality features
  Tensor Wp;     // [2 x inner]
  FfParams ffg;  // region+hidden -> subcategory features
  Tensor Wsc;    // [embed x inner]
};

GroundingWeights grounding_params(ParamStore& store, const std::string& prefix, int feat_dim,
                                  int hidden_dim, int inner_dim, int x_dim, int embed_dim,
                                  int query_dim, int textual_vocab, Rng& rng);

struct GroundingOutput {
  Tensor p_region;   // [K+1]; index K is the stay-textual sentinel
  Tensor p_textual;  // [textual_vocab]
  Tensor p_full;     // [textual_vocab + K]; textual block first, then regions
  Tensor sentinel;   // [hidden]
};

// x_t: the step input shared by both stacks. h_prev/h/c: top cell hidden
// before the step, and hidden/cell after it. query: vector the textual
// distribution is read from.
GroundingOutput grounding_step(const GroundingWeights& w, const RegionSet& regions,
                               const Tensor& x_t, const Tensor& h_prev, const Tensor& h,
                               const Tensor& c, const Tensor& query);

struct SlotFill {
  Tensor p_plural;  // [2]: singular, plural
  Tensor p_subcat;  // [n_subcat] over subcat_ids order
};

// Resolves a pointed region into word form. subcat_ids select embedding rows
// that act as the output layer, tying subcategory words to the main table.
SlotFill slot_fill(const GroundingWeights& w, const Tensor& embed_table,
                   const std::vector<int>& subcat_ids, const Tensor& v_region, const Tensor& h);

}  // namespace ntt
