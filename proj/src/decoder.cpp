#include "ntt/decoder.hpp"

namespace ntt {

GateWeights gate_params(ParamStore& store, const std::string& prefix, int hidden_dim, Rng& rng) {
  auto u = init_uniform(-kWeightInitRange, kWeightInitRange);
  GateWeights w;
  w.Wa1 = store.get_or_create(prefix + ".Wa1", {hidden_dim, 2 * hidden_dim}, u, rng);
  w.Wa2 = store.get_or_create(prefix + ".Wa2", {hidden_dim, 2 * hidden_dim}, u, rng);
  w.Wa3 = store.get_or_create(prefix + ".Wa3", {hidden_dim, 4 * hidden_dim}, u, rng);
  return w;
}

GateSet adaptive_gates(const GateWeights& w, const LstmState& attn1, const LstmState& attn2,
                       const LstmState& lang1, const LstmState& lang2) {
  GateSet g;
  g.g1 = sigmoid(matmul(w.Wa1, concat({attn1.h, attn1.c})));
  g.g2 = add(sigmoid(matmul(w.Wa2, concat({attn2.h, attn2.c}))), g.g1);
  g.g3 = add(sigmoid(matmul(w.Wa3, concat({lang1.h, lang1.c, lang2.h, lang2.c}))), g.g2);
  return g;
}

LstmState fuse_language_states(const LstmState& lang1, const Tensor& c1_gated,
                               const LstmState& lang2, const Tensor& c2_gated) {
  return {add(lang1.h, lang2.h), add(c1_gated, c2_gated)};
}

Tensor meta_hypothesis(const Tensor& h_lang1, const Tensor& h_lang2, const Tensor& h_joint,
                       Mode mode, Rng& rng) {
  Tensor s = add(add(dropout_apply(h_lang1, kMhDropChannel1, mode, rng),
                     dropout_apply(h_lang2, kMhDropChannel2, mode, rng)),
                 dropout_apply(h_joint, kMhDropJoint, mode, rng));
  return dropout_apply(s, kMhDropOuter, mode, rng);
}

}  // namespace ntt
