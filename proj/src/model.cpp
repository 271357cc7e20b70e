#include "ntt/model.hpp"

#include <stdexcept>

namespace ntt {

namespace {

void check_config(const ModelConfig& cfg) {
  if (cfg.kind != "twin" && cfg.kind != "baseline")
    throw std::runtime_error("unknown model kind '" + cfg.kind + "'");
  if (cfg.vocab_size <= 0 || cfg.textual_size <= 0 || cfg.textual_size > cfg.vocab_size ||
      cfg.embed_dim <= 0 || cfg.hidden_dim <= 0 || cfg.feat_dim <= 0)
    throw std::runtime_error("model config has non-positive or inconsistent dimensions");
  for (int id : cfg.subcat_ids)
    if (id < 0 || id >= cfg.vocab_size)
      throw std::runtime_error("subcategory id " + std::to_string(id) + " outside vocab");
}

void check_regions(const RegionSet& r, const ModelConfig& cfg) {
  if (r.count <= 0 || r.V.rank() != 2 || r.V.dim(0) != r.count || r.V.dim(1) != cfg.feat_dim ||
      r.Vbar.shape() != r.V.shape())
    throw std::runtime_error("region set does not match model: V " + shape_str(r.V.shape()) +
                             ", Vbar " + shape_str(r.Vbar.shape()) + ", count " +
                             std::to_string(r.count));
}

void check_token(int token_id, const ModelConfig& cfg) {
  if (token_id < 0 || token_id >= cfg.vocab_size)
    throw std::runtime_error("token id " + std::to_string(token_id) + " outside vocab of " +
                             std::to_string(cfg.vocab_size));
}

class TwinModel final : public CaptionModel {
 public:
  TwinModel(const ModelConfig& cfg, ParamStore& store, Rng& rng) : cfg_(cfg) {
    check_config(cfg);
    int e = cfg.embed_dim, d = cfg.hidden_dim, f = cfg.feat_dim;
    int x_dim = e + f;
    int lang_in = 2 * f + d;
    embed_ = store.get_or_create("embed", {cfg.vocab_size, e},
                                 init_uniform(-kWeightInitRange, kWeightInitRange), rng);
    AttentionWeights att_v = attention_params(store, "att.v", f, d, d, rng);
    AttentionWeights att_c = attention_params(store, "att.c", f, d, d, rng);
    ch1_ = {lstm_params(store, "ch1.attn", x_dim, d, rng),
            lstm_params(store, "ch1.lang", lang_in, d, rng), att_v, att_c};
    ch2_ = {lstm_params(store, "ch2.attn", x_dim, d, rng),
            lstm_params(store, "ch2.lang", lang_in, d, rng), att_v, att_c};
    gates_ = gate_params(store, "gate", d, rng);
    joint_ = lstm_params(store, "joint", lang_in, d, rng);
    head_ = grounding_params(store, "head", f, d, d, x_dim, e, d,
                             cfg.textual_size, rng);
  }

  const ModelConfig& config() const override { return cfg_; }

  ModelState initial_state() const override {
    int d = cfg_.hidden_dim;
    ModelState s;
    for (int i = 0; i < 5; ++i) s.push_back(lstm_zero_state(d));
    return s;
  }

  StepOutput step(const ModelState& state, const RegionSet& regions, int token_id, Mode mode,
                  Rng& rng) const override {
    if (state.size() != 5) throw std::runtime_error("twin state must hold 5 cell states");
    check_regions(regions, cfg_);
    check_token(token_id, cfg_);

    StepOutput out;
    out.x_shared = concat({embed_lookup(embed_, token_id), mean_rows(regions.Vbar)});

    ChannelStepOut c1 = channel_step(ch1_, out.x_shared, regions, {state[0], state[1]});
    ChannelStepOut c2 = channel_step(ch2_, out.x_shared, regions, {state[2], state[3]});
    out.alpha_v = {c1.alpha_v, c2.alpha_v};
    out.alpha_vbar = {c1.alpha_vbar, c2.alpha_vbar};

    out.gates = adaptive_gates(gates_, c1.attn, c2.attn, c1.lang_raw, c2.lang_raw);
    Tensor c_lang1 = mul(out.gates.g1, c1.lang_raw.c);
    Tensor c_lang2 = mul(out.gates.g2, c2.lang_raw.c);

    LstmState fused = fuse_language_states(c1.lang_raw, c_lang1, c2.lang_raw, c_lang2);
    LstmState joint_raw = lstm_step(joint_, add(c1.lang_in, c2.lang_in), fused);
    out.h_top = joint_raw.h;
    out.c_top = mul(out.gates.g3, joint_raw.c);

    out.query = meta_hypothesis(c1.lang_raw.h, c2.lang_raw.h, out.h_top, mode, rng);
    out.g = grounding_step(head_, regions, out.x_shared, state[4].h, out.h_top, out.c_top,
                           out.query);

    out.next = {c1.attn,
                {c1.lang_raw.h, c_lang1},
                c2.attn,
                {c2.lang_raw.h, c_lang2},
                {out.h_top, out.c_top}};
    return out;
  }

  SlotFill fill_slot(const StepOutput& out, const RegionSet& regions, int region) const override {
    if (region < 0 || region >= regions.count)
      throw std::runtime_error("fill_slot: region " + std::to_string(region) + " out of range");
    return slot_fill(head_, embed_, cfg_.subcat_ids, row(regions.V, region), out.h_top);
  }

 private:
  ModelConfig cfg_;
  Tensor embed_;
  ChannelParams ch1_, ch2_;
  GateWeights gates_;
  LstmParams joint_;
  GroundingWeights head_;
};

class BaselineModel final : public CaptionModel {
 public:
  BaselineModel(const ModelConfig& cfg, ParamStore& store, Rng& rng) : cfg_(cfg) {
    check_config(cfg);
    int e = cfg.embed_dim, d = cfg.hidden_dim, f = cfg.feat_dim;
    int x_dim = e + f;
    int lang_in = 2 * f + d;
    embed_ = store.get_or_create("embed", {cfg.vocab_size, e},
                                 init_uniform(-kWeightInitRange, kWeightInitRange), rng);
    AttentionWeights att_v = attention_params(store, "att.v", f, d, d, rng);
    AttentionWeights att_c = attention_params(store, "att.c", f, d, d, rng);
    ch_ = {lstm_params(store, "ch1.attn", x_dim, d, rng),
           lstm_params(store, "ch1.lang", lang_in, d, rng), att_v, att_c};
    head_ = grounding_params(store, "head", f, d, d, x_dim, e, d, cfg.textual_size, rng);
  }

  const ModelConfig& config() const override { return cfg_; }

  ModelState initial_state() const override {
    return {lstm_zero_state(cfg_.hidden_dim), lstm_zero_state(cfg_.hidden_dim)};
  }

  StepOutput step(const ModelState& state, const RegionSet& regions, int token_id, Mode mode,
                  Rng& rng) const override {
    (void)mode;
    (void)rng;
    if (state.size() != 2) throw std::runtime_error("baseline state must hold 2 cell states");
    check_regions(regions, cfg_);
    check_token(token_id, cfg_);

    StepOutput out;
    out.x_shared = concat({embed_lookup(embed_, token_id), mean_rows(regions.Vbar)});
    ChannelStepOut c = channel_step(ch_, out.x_shared, regions, {state[0], state[1]});
    out.alpha_v = {c.alpha_v};
    out.alpha_vbar = {c.alpha_vbar};
    out.h_top = c.lang_raw.h;
    out.c_top = c.lang_raw.c;
    out.query = out.h_top;
    out.g = grounding_step(head_, regions, out.x_shared, state[1].h, out.h_top, out.c_top,
                           out.query);
    out.next = {c.attn, c.lang_raw};
    return out;
  }

  SlotFill fill_slot(const StepOutput& out, const RegionSet& regions, int region) const override {
    if (region < 0 || region >= regions.count)
      throw std::runtime_error("fill_slot: region " + std::to_string(region) + " out of range");
    return slot_fill(head_, embed_, cfg_.subcat_ids, row(regions.V, region), out.h_top);
  }

 private:
  ModelConfig cfg_;
  Tensor embed_;
  ChannelParams ch_;
  GroundingWeights head_;
};

}  // namespace

std::unique_ptr<CaptionModel> make_model(const ModelConfig& cfg, ParamStore& store, Rng& rng) {
  check_config(cfg);
  if (cfg.kind == "twin") return std::make_unique<TwinModel>(cfg, store, rng);
  return std::make_unique<BaselineModel>(cfg, store, rng);
}

}  // namespace ntt
