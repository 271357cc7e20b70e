#include "ntt/attention.hpp"
#include "ntt/grad_check.hpp"

#include <doctest.h>

#include <cmath>

using namespace ntt;

namespace {

RegionSet random_regions(int k, int f, Rng& rng) {
  std::vector<real> v(static_cast<std::size_t>(k * f)), vb(static_cast<std::size_t>(k * f));
  for (auto& x : v) x = static_cast<real>(rng.uniform(-1, 1));
  for (auto& x : vb) x = static_cast<real>(rng.uniform(-1, 1));
  RegionSet r;
  r.V = Tensor::from({k, f}, std::move(v));
  r.Vbar = Tensor::from({k, f}, std::move(vb));
  r.count = k;
  return r;
}

}  // namespace

TEST_CASE("attention weights normalize and scores match manual computation") {
  Rng rng(23);
  ParamStore store;
  AttentionWeights w = attention_params(store, "att", 3, 2, 2, rng);
  Tensor feats = Tensor::from({2, 3}, {1, 0, -1, 0.5, 2, 0});
  Tensor h = Tensor::from({2}, {real(0.3), real(-0.7)});

  Attended a = attend(w, feats, h);
  CHECK(a.alpha.size() == 2);
  CHECK(a.alpha.value_at(0) + a.alpha.value_at(1) == doctest::Approx(1.0).epsilon(1e-12));

  // Manual scores: wbeta . (Wv v_i + Wh h), then softmax, then mixing.
  std::vector<double> beta(2, 0.0);
  for (int i = 0; i < 2; ++i)
    for (int r = 0; r < 2; ++r) {
      double acc = 0;
      for (int c = 0; c < 3; ++c) acc += w.Wv.value_at(r * 3 + c) * feats.value_at(i * 3 + c);
      for (int c = 0; c < 2; ++c) acc += w.Wh.value_at(r * 2 + c) * h.value_at(c);
      beta[static_cast<std::size_t>(i)] += w.wbeta.value_at(r) * acc;
    }
  double z = std::exp(beta[0]) + std::exp(beta[1]);
  for (int i = 0; i < 2; ++i)
    CHECK(a.alpha.value_at(i) ==
          doctest::Approx(std::exp(beta[static_cast<std::size_t>(i)]) / z).epsilon(1e-9));
  for (int c = 0; c < 3; ++c) {
    double mix = a.alpha.value_at(0) * feats.value_at(c) + a.alpha.value_at(1) * feats.value_at(3 + c);
    CHECK(a.context.value_at(c) == doctest::Approx(mix).epsilon(1e-9));
  }
}

TEST_CASE("mean_rows averages") {
  Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
  CHECK(mean_rows(m).values() == std::vector<real>{2, 3});
}

TEST_CASE("channel step produces consistent shapes and passes gradcheck") {
  Rng rng(31);
  ParamStore store;
  int f = 3, d = 2, e = 2;
  AttentionWeights att_v = attention_params(store, "att.v", f, d, d, rng);
  AttentionWeights att_c = attention_params(store, "att.c", f, d, d, rng);
  ChannelParams ch{lstm_params(store, "attn", e + f, d, rng),
                   lstm_params(store, "lang", 2 * f + d, d, rng), att_v, att_c};

  RegionSet regions = random_regions(3, f, rng);
  Tensor x = store.get_or_create("x", {e + f}, init_uniform(real(-1), real(1)), rng);

  ChannelStepOut out = channel_step(ch, x, regions, channel_zero_state(d));
  CHECK(out.attn.h.shape() == std::vector<int>{d});
  CHECK(out.lang_raw.h.shape() == std::vector<int>{d});
  CHECK(out.lang_in.shape() == std::vector<int>{2 * f + d});
  CHECK(out.alpha_v.size() == 3);
  CHECK(out.alpha_vbar.size() == 3);

  auto loss = [&]() {
    ChannelStepOut o = channel_step(ch, x, regions, channel_zero_state(d));
    ChannelStepOut o2 = channel_step(ch, x, regions, {o.attn, o.lang_raw});
    return add(sum(mul(o2.lang_raw.h, o2.lang_raw.h)), pick(o2.alpha_v, 0));
  };
  auto report = finite_diff_check(loss, store, real(1e-5), real(1e-5));
  INFO("max rel err " << report.max_rel_err << " at " << report.worst.param);
  CHECK(report.ok);
}

TEST_CASE("shared attention weights register once") {
  Rng rng(37);
  ParamStore store;
  attention_params(store, "att", 3, 2, 2, rng);
  attention_params(store, "att", 3, 2, 2, rng);  // rebinding, not duplicating
  CHECK(store.size() == 3);
  CHECK_THROWS(attention_params(store, "att", 4, 2, 2, rng));  // shape clash
}
