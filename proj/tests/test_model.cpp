#include "ntt/decoder.hpp"
#include "ntt/grad_check.hpp"
#include "ntt/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace ntt;

namespace {

ModelConfig tiny_config(const std::string& kind) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.vocab_size = 10;
  cfg.textual_size = 6;
  cfg.embed_dim = 3;
  cfg.hidden_dim = 4;
  cfg.feat_dim = 5;
  cfg.subcat_ids = {6, 7, 8, 9};
  return cfg;
}

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

TEST_CASE("step gates stay inside their cascade ranges and sum at rest") {
  Rng rng(41);
  ParamStore store;
  GateWeights w = gate_params(store, "gate", 3, rng);

  LstmState zero = lstm_zero_state(3);
  GateSet g0 = adaptive_gates(w, zero, zero, zero, zero);
  for (int i = 0; i < 3; ++i) {
    CHECK(g0.g1.value_at(i) == real(0.5));
    CHECK(g0.g2.value_at(i) == real(1.0));
    CHECK(g0.g3.value_at(i) == real(1.5));
  }

  for (int trial = 0; trial < 50; ++trial) {
    auto rand_state = [&]() {
      std::vector<real> h(3), c(3);
      for (auto& x : h) x = static_cast<real>(rng.uniform(-3, 3));
      for (auto& x : c) x = static_cast<real>(rng.uniform(-3, 3));
      return LstmState{Tensor::from({3}, std::move(h)), Tensor::from({3}, std::move(c))};
    };
    GateSet g = adaptive_gates(w, rand_state(), rand_state(), rand_state(), rand_state());
    for (int i = 0; i < 3; ++i) {
      CHECK(g.g1.value_at(i) > 0);
      CHECK(g.g1.value_at(i) < 1);
      CHECK(g.g2.value_at(i) > 0);
      CHECK(g.g2.value_at(i) < 2);
      CHECK(g.g3.value_at(i) > 0);
      CHECK(g.g3.value_at(i) < 3);
      CHECK(g.g2.value_at(i) > g.g1.value_at(i));
      CHECK(g.g3.value_at(i) > g.g2.value_at(i));
    }
  }
}

TEST_CASE("consensus readout reduces to a plain sum at eval") {
  Rng rng(42);
  Tensor a = Tensor::from({3}, {real(0.1), real(-0.5), real(2)});
  Tensor b = Tensor::from({3}, {real(1), real(0.25), real(-1)});
  Tensor c = Tensor::from({3}, {real(-2), real(0), real(0.75)});
  Tensor mh = meta_hypothesis(a, b, c, Mode::kEval, rng);
  Tensor expect = add(add(a, b), c);
  CHECK(mh.values() == expect.values());
}

TEST_CASE("twin model step: shapes, state carry and distribution wiring") {
  Rng rng(43);
  ParamStore store;
  ModelConfig cfg = tiny_config("twin");
  auto model = make_model(cfg, store, rng);

  RegionSet regions = random_regions(3, cfg.feat_dim, rng);
  ModelState st = model->initial_state();
  REQUIRE(st.size() == 5);

  Rng step_rng(7);
  StepOutput out = model->step(st, regions, 0, Mode::kEval, step_rng);
  CHECK(out.g.p_full.size() == cfg.textual_size + regions.count);
  CHECK(out.next.size() == 5);
  CHECK(out.alpha_v.size() == 2);
  CHECK(out.h_top.shape() == std::vector<int>{cfg.hidden_dim});

  // Eval-mode readout is exactly the sum of the two language hiddens and the
  // joint hidden.
  Tensor expect = add(add(out.next[1].h, out.next[3].h), out.h_top);
  CHECK(out.query.values() == expect.values());

  // Language cell states in the carried state are the gated ones.
  StepOutput out2 = model->step(out.next, regions, 3, Mode::kEval, step_rng);
  CHECK(out2.next.size() == 5);
  for (int i = 0; i < cfg.hidden_dim; ++i) {
    CHECK(out.gates.g1.value_at(i) > 0);
    CHECK(out.gates.g2.value_at(i) < 2);
    CHECK(out.gates.g3.value_at(i) < 3);
  }

  CHECK_THROWS(model->step(ModelState{}, regions, 0, Mode::kEval, step_rng));
  CHECK_THROWS(model->step(st, regions, cfg.vocab_size, Mode::kEval, step_rng));
}

TEST_CASE("baseline model step mirrors the head over a single channel") {
  Rng rng(44);
  ParamStore store;
  ModelConfig cfg = tiny_config("baseline");
  auto model = make_model(cfg, store, rng);

  RegionSet regions = random_regions(4, cfg.feat_dim, rng);
  ModelState st = model->initial_state();
  REQUIRE(st.size() == 2);
  Rng step_rng(7);
  StepOutput out = model->step(st, regions, 0, Mode::kEval, step_rng);
  CHECK(out.g.p_full.size() == cfg.textual_size + regions.count);
  CHECK(out.alpha_v.size() == 1);
  CHECK(out.query.values() == out.h_top.values());
  CHECK_FALSE(out.gates.g1.defined());
}

TEST_CASE("same seed and inputs give identical steps") {
  for (const std::string kind : {"twin", "baseline"}) {
    ParamStore s1, s2;
    Rng r1(55), r2(55);
    ModelConfig cfg = tiny_config(kind);
    auto m1 = make_model(cfg, s1, r1);
    auto m2 = make_model(cfg, s2, r2);
    Rng fr(9);
    RegionSet regions = random_regions(3, cfg.feat_dim, fr);
    Rng sr1(3), sr2(3);
    StepOutput o1 = m1->step(m1->initial_state(), regions, 1, Mode::kTrain, sr1);
    StepOutput o2 = m2->step(m2->initial_state(), regions, 1, Mode::kTrain, sr2);
    CHECK(o1.g.p_full.values() == o2.g.p_full.values());
    CHECK(o1.query.values() == o2.query.values());
  }
}

TEST_CASE("models bind to a restored parameter store without reinitializing") {
  ParamStore store;
  Rng rng(66);
  ModelConfig cfg = tiny_config("twin");
  auto m1 = make_model(cfg, store, rng);
  std::size_t n = store.size();
  auto before = store.at("joint.W").values();

  Rng rng2(999);  // would produce different weights if creation re-ran
  auto m2 = make_model(cfg, store, rng2);
  CHECK(store.size() == n);
  CHECK(store.at("joint.W").values() == before);

  ModelConfig bad = cfg;
  bad.hidden_dim = 8;
  ParamStore store2 = store;
  Rng rng3(1);
  CHECK_THROWS(make_model(bad, store2, rng3));
}

TEST_CASE("full twin and baseline gradients pass finite differences at toy size") {
  for (const std::string kind : {"twin", "baseline"}) {
    ParamStore store;
    Rng rng(77);
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.vocab_size = 8;
    cfg.textual_size = 5;
    cfg.embed_dim = 2;
    cfg.hidden_dim = 2;
    cfg.feat_dim = 3;
    cfg.subcat_ids = {5, 6, 7};
    auto model = make_model(cfg, store, rng);
    RegionSet regions = random_regions(2, cfg.feat_dim, rng);

    auto loss = [&]() {
      Rng noise(0);
      ModelState st = model->initial_state();
      StepOutput o1 = model->step(st, regions, 0, Mode::kEval, noise);
      StepOutput o2 = model->step(o1.next, regions, 3, Mode::kEval, noise);
      Tensor nll = mul(log(pick(o1.g.p_full, 2)), real(-1));
      nll = sub(nll, log(pick(o2.g.p_full, cfg.textual_size + 1)));
      SlotFill sf = model->fill_slot(o2, regions, 1);
      nll = sub(nll, add(log(pick(sf.p_plural, 0)), log(pick(sf.p_subcat, 1))));
      return nll;
    };
    auto report = finite_diff_check(loss, store, real(1e-5), real(1e-4));
    INFO(kind << ": max rel err " << report.max_rel_err << " at " << report.worst.param);
    CHECK(report.ok);
  }
}
