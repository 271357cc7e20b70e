#include "ntt/grad_check.hpp"
#include "ntt/grounding.hpp"

#include <doctest.h>

#include <cmath>

using namespace ntt;

namespace {

struct Setup {
  ParamStore store;
  GroundingWeights w;
  RegionSet regions;
  Tensor x, h_prev, h, c, query, embed;
  std::vector<int> subcat_ids{0, 2, 3};
  int k = 3, f = 4, d = 3, xd = 5, e = 2, S = 6;

  explicit Setup(std::uint64_t seed) {
    Rng rng(seed);
    w = grounding_params(store, "head", f, d, d, xd, e, d, S, rng);
    auto u = init_uniform(real(-1), real(1));
    embed = store.get_or_create("embed", {4, e}, u, rng);
    std::vector<real> v(static_cast<std::size_t>(k * f)), vb(static_cast<std::size_t>(k * f));
    for (auto& x_ : v) x_ = static_cast<real>(rng.uniform(-1, 1));
    for (auto& x_ : vb) x_ = static_cast<real>(rng.uniform(-1, 1));
    regions.V = Tensor::from({k, f}, std::move(v));
    regions.Vbar = Tensor::from({k, f}, std::move(vb));
    regions.count = k;
    x = store.get_or_create("x", {xd}, u, rng);
    h_prev = store.get_or_create("h_prev", {d}, u, rng);
    h = store.get_or_create("h", {d}, u, rng);
    c = store.get_or_create("c", {d}, u, rng);
    query = store.get_or_create("query", {d}, u, rng);
  }
};

double total(const Tensor& t) {
  double s = 0;
  for (real v : t.values()) s += static_cast<double>(v);
  return s;
}

}  // namespace

TEST_CASE("grounding step emits proper distributions with the agreed layout") {
  Setup s(101);
  GroundingOutput out = grounding_step(s.w, s.regions, s.x, s.h_prev, s.h, s.c, s.query);

  CHECK(out.p_region.size() == s.k + 1);
  CHECK(out.p_textual.size() == s.S);
  CHECK(out.p_full.size() == s.S + s.k);
  CHECK(total(out.p_region) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total(out.p_textual) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total(out.p_full) == doctest::Approx(1.0).epsilon(1e-12));

  // Textual block carries exactly the sentinel mass; region entries carry
  // the pointing mass unchanged.
  double txt = 0;
  for (int i = 0; i < s.S; ++i) txt += out.p_full.value_at(i);
  CHECK(txt == doctest::Approx(out.p_region.value_at(s.k)).epsilon(1e-12));
  for (int i = 0; i < s.k; ++i)
    CHECK(out.p_full.value_at(s.S + i) == doctest::Approx(out.p_region.value_at(i)).epsilon(1e-15));
  for (int i = 0; i < s.S; ++i)
    CHECK(out.p_full.value_at(i) ==
          doctest::Approx(out.p_textual.value_at(i) * out.p_region.value_at(s.k)).epsilon(1e-15));
}

TEST_CASE("sentinel gate mixes previous hidden and step input") {
  Setup s(102);
  GroundingOutput out = grounding_step(s.w, s.regions, s.x, s.h_prev, s.h, s.c, s.query);
  // Manual: sigmoid(Wx x + Wh h_prev) elementwise times tanh(c).
  for (int j = 0; j < s.d; ++j) {
    double pre = 0;
    for (int k2 = 0; k2 < s.xd; ++k2) pre += s.w.Wx.value_at(j * s.xd + k2) * s.x.value_at(k2);
    for (int k2 = 0; k2 < s.d; ++k2) pre += s.w.Wh.value_at(j * s.d + k2) * s.h_prev.value_at(k2);
    double g = 1.0 / (1.0 + std::exp(-pre));
    CHECK(out.sentinel.value_at(j) ==
          doctest::Approx(g * std::tanh(s.c.value_at(j))).epsilon(1e-9));
  }
}

TEST_CASE("slot filling produces word-form distributions tied to the embedding") {
  Setup s(103);
  SlotFill sf = slot_fill(s.w, s.embed, s.subcat_ids, row(s.regions.V, 1), s.h);
  CHECK(sf.p_plural.size() == 2);
  CHECK(sf.p_subcat.size() == 3);
  CHECK(total(sf.p_plural) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total(sf.p_subcat) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(slot_fill(s.w, s.embed, {}, row(s.regions.V, 0), s.h));

  // Embedding rows act as the output layer, so the subcat scores must move
  // with the embedding.
  GradSink sink = backward(pick(sf.p_subcat, 0));
  CHECK(sink.count(s.embed.node()) == 1);
}

TEST_CASE("grounding gradients pass finite differences") {
  Setup s(104);
  auto loss = [&]() {
    GroundingOutput out = grounding_step(s.w, s.regions, s.x, s.h_prev, s.h, s.c, s.query);
    SlotFill sf = slot_fill(s.w, s.embed, s.subcat_ids, row(s.regions.V, 0), s.h);
    Tensor nll = mul(log(pick(out.p_full, 2)), real(-1));
    nll = sub(nll, add(log(pick(sf.p_plural, 1)), log(pick(sf.p_subcat, 2))));
    return nll;
  };
  auto report = finite_diff_check(loss, s.store, real(1e-5), real(1e-5));
  INFO("max rel err " << report.max_rel_err << " at " << report.worst.param);
  CHECK(report.ok);
}
