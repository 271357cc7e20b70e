#include "ntt/grounding.hpp"

#include <stdexcept>

namespace ntt {

GroundingWeights grounding_params(ParamStore& store, const std::string& prefix, int feat_dim,
                                  int hidden_dim, int inner_dim, int x_dim, int embed_dim,
                                  int query_dim, int textual_vocab, Rng& rng) {
  auto u = init_uniform(-kWeightInitRange, kWeightInitRange);
  GroundingWeights w;
  w.Wv = store.get_or_create(prefix + ".point.Wv", {inner_dim, feat_dim}, u, rng);
  w.Wz = store.get_or_create(prefix + ".point.Wz", {inner_dim, hidden_dim}, u, rng);
  w.wh = store.get_or_create(prefix + ".point.wh", {inner_dim}, u, rng);
  w.Wx = store.get_or_create(prefix + ".sent.Wx", {hidden_dim, x_dim}, u, rng);
  w.Wh = store.get_or_create(prefix + ".sent.Wh", {hidden_dim, hidden_dim}, u, rng);
  w.Ws = store.get_or_create(prefix + ".sent.Ws", {inner_dim, hidden_dim}, u, rng);
  w.Wq = store.get_or_create(prefix + ".txt.Wq", {textual_vocab, query_dim}, u, rng);
  w.ffp = ff_params(store, prefix + ".plur.ff", feat_dim + hidden_dim, inner_dim, rng);
  w.Wp = store.get_or_create(prefix + ".plur.Wp", {2, inner_dim}, u, rng);
  w.ffg = ff_params(store, prefix + ".sub.ff", feat_dim + hidden_dim, inner_dim, rng);
  w.Wsc = store.get_or_create(prefix + ".sub.Wsc", {embed_dim, inner_dim}, u, rng);
  return w;
}

namespace {

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

}  // namespace

GroundingOutput grounding_step(const GroundingWeights& w, const RegionSet& regions,
                               const Tensor& x_t, const Tensor& h_prev, const Tensor& h,
                               const Tensor& c, const Tensor& query) {
  GroundingOutput out;

  Tensor zh = matmul(w.Wz, h);
  std::vector<Tensor> scores;
  scores.reserve(static_cast<std::size_t>(regions.count) + 1);
  for (int i = 0; i < regions.count; ++i)
    scores.push_back(dot(w.wh, tanh(add(matmul(w.Wv, row(regions.V, i)), zh))));

  Tensor gate = sigmoid(add(matmul(w.Wx, x_t), matmul(w.Wh, h_prev)));
  out.sentinel = mul(gate, tanh(c));
  scores.push_back(dot(w.wh, tanh(add(matmul(w.Ws, out.sentinel), zh))));

  out.p_region = softmax(concat(scores));
  out.p_textual = softmax(matmul(w.Wq, query));

  Tensor txt_mass = mul(out.p_textual, pick(out.p_region, regions.count));
  out.p_full = concat({txt_mass, slice(out.p_region, 0, regions.count)});
  return out;
}

SlotFill slot_fill(const GroundingWeights& w, const Tensor& embed_table,
                   const std::vector<int>& subcat_ids, const Tensor& v_region, const Tensor& h) {
  if (subcat_ids.empty()) throw std::runtime_error("slot_fill: empty subcategory id list");
  Tensor vh = concat({v_region, h});
  SlotFill out;
  out.p_plural = softmax(matmul(w.Wp, relu_ff(w.ffp, vh)));
  Tensor proj = matmul(w.Wsc, relu_ff(w.ffg, vh));
  std::vector<Tensor> scores;
  scores.reserve(subcat_ids.size());
  for (int id : subcat_ids) scores.push_back(dot(row(embed_table, id), proj));
  out.p_subcat = softmax(concat(scores));
  return out;
}

}  // namespace ntt
