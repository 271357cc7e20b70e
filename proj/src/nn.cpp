#include "ntt/nn.hpp"

#include <stdexcept>

namespace ntt {

LstmParams lstm_params(ParamStore& store, const std::string& prefix, int input_dim,
                       int hidden_dim, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.W = store.get_or_create(prefix + ".W", {4 * hidden_dim, input_dim + hidden_dim},
                            init_uniform(-kWeightInitRange, kWeightInitRange), rng);
  p.b = store.get_or_create(prefix + ".b", {4 * hidden_dim},
                            init_zeros_with_band(hidden_dim, hidden_dim, real(1)), rng);
  return p;
}

LstmState lstm_zero_state(int hidden_dim) {
  return {Tensor::zeros({hidden_dim}), Tensor::zeros({hidden_dim})};
}

LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& prev) {
  if (x.rank() != 1 || x.dim(0) != p.input_dim)
    throw std::runtime_error("lstm_step: input shape " + shape_str(x.shape()) +
                             ", cell expects [" + std::to_string(p.input_dim) + "]");
  int h = p.hidden_dim;
  Tensor gates = add(matmul(p.W, concat({x, prev.h})), p.b);
  Tensor i = sigmoid(slice(gates, 0, h));
  Tensor f = sigmoid(slice(gates, h, h));
  Tensor g = tanh(slice(gates, 2 * h, h));
  Tensor o = sigmoid(slice(gates, 3 * h, h));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor hn = mul(o, tanh(c));
  return {hn, c};
}

Tensor dropout_apply(const Tensor& t, real p, Mode mode, Rng& rng) {
  if (p < 0 || p >= 1)
    throw std::runtime_error("dropout_apply: rate " + std::to_string(p) + " outside [0, 1)");
  if (mode == Mode::kEval || p == 0) return t;
  real keep = real(1) - p;
  std::vector<real> mask(static_cast<std::size_t>(t.size()));
  for (auto& m : mask)
    m = rng.uniform01() < static_cast<double>(p) ? real(0) : real(1) / keep;
  return mul(t, Tensor::from(t.shape(), std::move(mask)));
}

Tensor embed_lookup(const Tensor& table, int id) {
  if (table.rank() != 2)
    throw std::runtime_error("embed_lookup: table shape " + shape_str(table.shape()) +
                             ", expected rank 2");
  return row(table, id);
}

FfParams ff_params(ParamStore& store, const std::string& prefix, int input_dim, int output_dim,
                   Rng& rng) {
  FfParams p;
  p.W = store.get_or_create(prefix + ".W", {output_dim, input_dim},
                            init_uniform(-kWeightInitRange, kWeightInitRange), rng);
  p.b = store.get_or_create(prefix + ".b", {output_dim}, init_zeros(), rng);
  return p;
}

Tensor relu_ff(const FfParams& p, const Tensor& x) { return relu(add(matmul(p.W, x), p.b)); }

}  // namespace ntt
