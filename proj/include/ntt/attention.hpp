#pragma once

#include "ntt/nn.hpp"

#include <string>

namespace ntt {

// Per-scene visual input: region descriptors V and their context descriptors
// Vbar, both [count x feat_dim]. Region order is the scene's region order and
// is what grounded captions point into.
struct RegionSet {
  Tensor V;
  Tensor Vbar;
  int count = 0;
};

struct AttentionWeights {
  Tensor Wv;     // [inner x feat]
  Tensor Wh;     // [inner x hidden]
  Tensor wbeta;  // [inner]
};

AttentionWeights attention_params(ParamStore& store, const std::string& prefix, int feat_dim,
                                  int hidden_dim, int inner_dim, Rng& rng);

struct Attended {
  Tensor context;  // [feat] weighted sum of rows
  Tensor alpha;    // [rows] weights
};

// Additive attention without an inner nonlinearity: score_i is a learned
// projection of (Wv v_i + Wh h), normalized by softmax over rows.
Attended attend(const AttentionWeights& w, const Tensor& feats, const Tensor& h);

// Mean over the rows of a rank-2 tensor -> [cols].
Tensor mean_rows(const Tensor& m);

// One decoder channel: a two-layer stack where the first cell watches the
// visual summary and the second consumes what the attention picked out.
struct ChannelParams {
  LstmParams attn_lstm;  // input: token embedding + pooled context
  LstmParams lang_lstm;  // input: attended V + attended Vbar + attn hidden
  AttentionWeights att_v;
  AttentionWeights att_vbar;
};

struct ChannelState {
  LstmState attn;
  LstmState lang;
};

struct ChannelStepOut {
  LstmState attn;
  LstmState lang_raw;  // before any cell-state gating by the caller
  Tensor lang_in;
  Tensor alpha_v;
  Tensor alpha_vbar;
};

ChannelState channel_zero_state(int hidden_dim);

ChannelStepOut channel_step(const ChannelParams& p, const Tensor& x_shared,
                            const RegionSet& regions, const ChannelState& prev);

}  // namespace ntt
