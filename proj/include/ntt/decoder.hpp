#pragma once

#include "ntt/attention.hpp"
#include "ntt/nn.hpp"

#include <string>

namespace ntt {

// Cascaded step gates. Each gate folds in the one before it, so their ranges
// widen down the cascade: g1 in (0,1), g2 in (0,2), g3 in (0,3).
struct GateSet {
  Tensor g1;
  Tensor g2;
  Tensor g3;
};

struct GateWeights {
  Tensor Wa1;  // [hidden x 2*hidden]
  Tensor Wa2;  // [hidden x 2*hidden]
  Tensor Wa3;  // [hidden x 4*hidden]
};

GateWeights gate_params(ParamStore& store, const std::string& prefix, int hidden_dim, Rng& rng);

// Gates read the fresh post-step states, before any of them is scaled.
GateSet adaptive_gates(const GateWeights& w, const LstmState& attn1, const LstmState& attn2,
                       const LstmState& lang1, const LstmState& lang2);

// The fused state handed to the joint cell: hidden parts summed as-is, cell
// parts summed after their gates.
LstmState fuse_language_states(const LstmState& lang1, const Tensor& c1_gated,
                               const LstmState& lang2, const Tensor& c2_gated);

constexpr real kMhDropChannel1 = real(0.3);
constexpr real kMhDropChannel2 = real(0.7);
constexpr real kMhDropJoint = real(0.8);
constexpr real kMhDropOuter = real(0.5);

// Consensus readout over both language hiddens and the joint hidden. The
// element-wise sum survives eval unchanged; at train time each summand is
// independently thinned before a final thinning of the sum.
Tensor meta_hypothesis(const Tensor& h_lang1, const Tensor& h_lang2, const Tensor& h_joint,
                       Mode mode, Rng& rng);

}  // namespace ntt
