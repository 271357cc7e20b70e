#include "ntt/attention.hpp"

#include <stdexcept>

namespace ntt {

AttentionWeights attention_params(ParamStore& store, const std::string& prefix, int feat_dim,
                                  int hidden_dim, int inner_dim, Rng& rng) {
  AttentionWeights w;
  w.Wv = store.get_or_create(prefix + ".Wv", {inner_dim, feat_dim},
                             init_uniform(-kWeightInitRange, kWeightInitRange), rng);
  w.Wh = store.get_or_create(prefix + ".Wh", {inner_dim, hidden_dim},
                             init_uniform(-kWeightInitRange, kWeightInitRange), rng);
  w.wbeta = store.get_or_create(prefix + ".wb", {inner_dim},
                                init_uniform(-kWeightInitRange, kWeightInitRange), rng);
  return w;
}

namespace {

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

}  // namespace

Attended attend(const AttentionWeights& w, const Tensor& feats, const Tensor& h) {
  if (feats.rank() != 2)
    throw std::runtime_error("attend: features must be rank 2, got " + shape_str(feats.shape()));
  int rows = feats.dim(0);
  Tensor hh = matmul(w.Wh, h);
  std::vector<Tensor> scores;
  scores.reserve(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i)
    scores.push_back(dot(w.wbeta, add(matmul(w.Wv, row(feats, i)), hh)));
  Attended out;
  out.alpha = softmax(concat(scores));
  Tensor ctx = mul(row(feats, 0), pick(out.alpha, 0));
  for (int i = 1; i < rows; ++i) ctx = add(ctx, mul(row(feats, i), pick(out.alpha, i)));
  out.context = ctx;
  return out;
}

Tensor mean_rows(const Tensor& m) {
  if (m.rank() != 2)
    throw std::runtime_error("mean_rows: expects rank 2, got " + shape_str(m.shape()));
  Tensor acc = row(m, 0);
  for (int i = 1; i < m.dim(0); ++i) acc = add(acc, row(m, i));
  return mul(acc, real(1) / static_cast<real>(m.dim(0)));
}

ChannelState channel_zero_state(int hidden_dim) {
  return {lstm_zero_state(hidden_dim), lstm_zero_state(hidden_dim)};
}

ChannelStepOut channel_step(const ChannelParams& p, const Tensor& x_shared,
                            const RegionSet& regions, const ChannelState& prev) {
  ChannelStepOut out;
  out.attn = lstm_step(p.attn_lstm, x_shared, prev.attn);
  Attended av = attend(p.att_v, regions.V, out.attn.h);
  Attended avb = attend(p.att_vbar, regions.Vbar, out.attn.h);
  out.alpha_v = av.alpha;
  out.alpha_vbar = avb.alpha;
  out.lang_in = concat({av.context, avb.context, out.attn.h});
  out.lang_raw = lstm_step(p.lang_lstm, out.lang_in, prev.lang);
  return out;
}

}  // namespace ntt
