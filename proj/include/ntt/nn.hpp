#pragma once

#include "ntt/param_store.hpp"
#include "ntt/rng.hpp"
#include "ntt/tensor.hpp"

#include <string>

namespace ntt {

enum class Mode { kTrain, kEval };

// Weights of one LSTM cell. W multiplies concat(x, h_prev) and produces the
// four gate pre-activations stacked [input; forget; candidate; output].
struct LstmParams {
  Tensor W;  // [4h x (in + h)]
  Tensor b;  // [4h]
  int input_dim = 0;
  int hidden_dim = 0;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

// Creates (or binds) cell weights under `prefix`. Fresh weights are uniform
// in [-0.08, 0.08]; the forget-gate bias band starts at 1 so early training
// retains cell state.
LstmParams lstm_params(ParamStore& store, const std::string& prefix, int input_dim,
                       int hidden_dim, Rng& rng);

LstmState lstm_zero_state(int hidden_dim);

LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& prev);

// Inverted dropout: at train time zeroes each element with probability p and
// scales survivors by 1/(1-p); identity at eval. p must be in [0, 1).
Tensor dropout_apply(const Tensor& t, real p, Mode mode, Rng& rng);

// Row lookup into a learned embedding table.
Tensor embed_lookup(const Tensor& table, int id);

// Single feed-forward layer with relu: relu(W x + b).
struct FfParams {
  Tensor W;  // [out x in]
  Tensor b;  // [out]
};

FfParams ff_params(ParamStore& store, const std::string& prefix, int input_dim, int output_dim,
                   Rng& rng);

Tensor relu_ff(const FfParams& p, const Tensor& x);

constexpr real kWeightInitRange = real(0.08);

}  // namespace ntt
