#pragma once

#include "ntt/model.hpp"

#include <array>
#include <vector>

namespace ntt {

struct GroundedToken {
  int token = 0;
  int region = -1;  // -1 for plain words
};

struct CaptionHypothesis {
  std::vector<GroundedToken> tokens;  // without sentence markers
  real logprob = 0;  // sum of full-distribution log probs, end marker included
  bool ended = false;
};

// surface_forms[flat_subcat][plural] is the vocab id emitted when a pointed
// region resolves to that word form.
using SurfaceForms = std::vector<std::array<int, 2>>;

struct WorldDef;
struct Vocab;
SurfaceForms make_surface_forms(const WorldDef& world, const Vocab& vocab);

// Argmax decoding; ties resolve to the lowest index. A pointed region is
// resolved through the word-form head, and the resolved word is what feeds
// the next step.
CaptionHypothesis greedy_decode(const CaptionModel& model, const RegionSet& regions,
                                const SurfaceForms& surface, int max_len);

// Width-limited exact search over the step distribution, no length
// normalization. Candidates tie-break on higher logprob first, then lower
// expansion index; zero-probability expansions are dropped. With width 1
// this reduces to greedy_decode. Returns finished hypotheses sorted best
// first; if nothing finished within max_len, the best unfinished beam is
// returned marked ended=false.
std::vector<CaptionHypothesis> beam_search(const CaptionModel& model, const RegionSet& regions,
                                           const SurfaceForms& surface, int beam_size,
                                           int max_len);

}  // namespace ntt
