#include "ntt/inference.hpp"

#include "ntt/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ntt {

SurfaceForms make_surface_forms(const WorldDef& world, const Vocab& vocab) {
  SurfaceForms out;
  for (std::size_t c = 0; c < world.subcats.size(); ++c)
    for (std::size_t s = 0; s < world.subcats[c].size(); ++s)
      out.push_back({vocab.id(world.surface(static_cast<int>(c), static_cast<int>(s), false)),
                     vocab.id(world.surface(static_cast<int>(c), static_cast<int>(s), true))});
  return out;
}

namespace {

int argmax_lowest(const std::vector<real>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

GroundedToken resolve_slot(const CaptionModel& model, const StepOutput& out,
                           const RegionSet& regions, const SurfaceForms& surface, int region) {
  SlotFill sf = model.fill_slot(out, regions, region);
  int sc = argmax_lowest(sf.p_subcat.values());
  int pl = argmax_lowest(sf.p_plural.values());
  if (sc >= static_cast<int>(surface.size()))
    throw std::runtime_error("surface form table smaller than subcategory head");
  return {surface[static_cast<std::size_t>(sc)][static_cast<std::size_t>(pl)], region};
}

void check_decode_args(const SurfaceForms& surface, int max_len) {
  if (surface.empty()) throw std::runtime_error("decode: empty surface form table");
  if (max_len <= 0) throw std::runtime_error("decode: max_len must be positive");
}

}  // namespace

CaptionHypothesis greedy_decode(const CaptionModel& model, const RegionSet& regions,
                                const SurfaceForms& surface, int max_len) {
  check_decode_args(surface, max_len);
  Rng rng(0);
  int textual = model.config().textual_size;
  CaptionHypothesis hyp;
  ModelState state = model.initial_state();
  int prev = Vocab::kBos;
  for (int t = 0; t < max_len; ++t) {
    StepOutput out = model.step(state, regions, prev, Mode::kEval, rng);
    const auto& p = out.g.p_full.values();
    int idx = argmax_lowest(p);
    hyp.logprob += static_cast<real>(std::log(static_cast<double>(p[static_cast<std::size_t>(idx)])));
    if (idx == Vocab::kEos) {
      hyp.ended = true;
      break;
    }
    GroundedToken tok = idx < textual
                            ? GroundedToken{idx, -1}
                            : resolve_slot(model, out, regions, surface, idx - textual);
    hyp.tokens.push_back(tok);
    prev = tok.token;
    state = std::move(out.next);
  }
  return hyp;
}

namespace {

struct Beam {
  ModelState state;
  std::vector<GroundedToken> tokens;
  int prev = Vocab::kBos;
  real logprob = 0;
};

struct Candidate {
  real logprob;
  int beam;
  int idx;
};

}  // namespace

std::vector<CaptionHypothesis> beam_search(const CaptionModel& model, const RegionSet& regions,
                                           const SurfaceForms& surface, int beam_size,
                                           int max_len) {
  check_decode_args(surface, max_len);
  if (beam_size <= 0) throw std::runtime_error("beam_search: width must be positive");
  Rng rng(0);
  int textual = model.config().textual_size;

  std::vector<Beam> active;
  active.push_back({model.initial_state(), {}, Vocab::kBos, real(0)});
  std::vector<CaptionHypothesis> finished;

  for (int t = 0; t < max_len && !active.empty(); ++t) {
    std::vector<StepOutput> outs;
    outs.reserve(active.size());
    std::vector<Candidate> cands;
    for (int b = 0; b < static_cast<int>(active.size()); ++b) {
      outs.push_back(model.step(active[static_cast<std::size_t>(b)].state, regions,
                                active[static_cast<std::size_t>(b)].prev, Mode::kEval, rng));
      const auto& p = outs.back().g.p_full.values();
      for (int idx = 0; idx < static_cast<int>(p.size()); ++idx) {
        real pv = p[static_cast<std::size_t>(idx)];
        if (!(pv > 0)) continue;
        cands.push_back({active[static_cast<std::size_t>(b)].logprob +
                             static_cast<real>(std::log(static_cast<double>(pv))),
                         b, idx});
      }
    }
    // Enumeration order is (beam, idx) ascending, so a stable sort keeps the
    // required lowest-index preference among equal scores.
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });

    std::vector<Beam> next;
    for (const auto& c : cands) {
      if (static_cast<int>(next.size()) + static_cast<int>(finished.size()) >= beam_size) break;
      const Beam& src = active[static_cast<std::size_t>(c.beam)];
      StepOutput& out = outs[static_cast<std::size_t>(c.beam)];
      if (c.idx == Vocab::kEos) {
        CaptionHypothesis hyp;
        hyp.tokens = src.tokens;
        hyp.logprob = c.logprob;
        hyp.ended = true;
        finished.push_back(std::move(hyp));
        continue;
      }
      Beam nb;
      nb.state = out.next;
      nb.tokens = src.tokens;
      GroundedToken tok = c.idx < textual
                              ? GroundedToken{c.idx, -1}
                              : resolve_slot(model, out, regions, surface, c.idx - textual);
      nb.tokens.push_back(tok);
      nb.prev = tok.token;
      nb.logprob = c.logprob;
      next.push_back(std::move(nb));
    }
    active = std::move(next);
  }

  std::stable_sort(finished.begin(), finished.end(),
                   [](const CaptionHypothesis& a, const CaptionHypothesis& b) {
                     return a.logprob > b.logprob;
                   });
  if (finished.empty()) {
    std::stable_sort(active.begin(), active.end(),
                     [](const Beam& a, const Beam& b) { return a.logprob > b.logprob; });
    if (active.empty()) return {};
    CaptionHypothesis hyp;
    hyp.tokens = active[0].tokens;
    hyp.logprob = active[0].logprob;
    hyp.ended = false;
    return {hyp};
  }
  if (static_cast<int>(finished.size()) > beam_size) finished.resize(static_cast<std::size_t>(beam_size));
  return finished;
}

}  // namespace ntt
