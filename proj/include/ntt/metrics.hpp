#pragma once

#include "ntt/precision.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ntt {

// Corpus-level n-gram precision score with brevity penalty, one reference
// per candidate, no smoothing: any order with zero matches (or no candidate
// n-grams at all) zeroes the whole score.
real bleu(const std::vector<std::vector<std::string>>& candidates,
          const std::vector<std::vector<std::string>>& references, int max_n);

// Consensus metric: tf-idf vectors per n-gram order 1..4, cosine similarity
// against the reference, averaged over orders, scaled by 10. Document
// frequencies come from the references, floored at one document. A zero
// vector on either side contributes zero similarity. Needs at least two
// items so the idf weights are meaningful.
real cider(const std::vector<std::vector<std::string>>& candidates,
           const std::vector<std::vector<std::string>>& references);

// Pointing agreement: the i-th grounded slot of a candidate must name the
// same region as the i-th grounded slot of the reference. Per item the score
// is matches / max(candidate slots, reference slots) (1 when both are
// empty); the corpus value is the mean over items.
real grounding_accuracy(const std::vector<std::vector<int>>& candidate_regions,
                        const std::vector<std::vector<int>>& reference_regions);

struct EvalReport {
  real bleu1 = 0;      // [0, 1]
  real bleu4 = 0;      // [0, 1]
  real cider = 0;      // [0, 10]
  real grounding = 0;  // [0, 1]
  int n_items = 0;
};

// Fixed-width table; scores are shown conventionally scaled (x100 for the
// n-gram columns and grounding, x10 for the consensus column).
std::string render_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

// One JSON object per row, raw (unscaled) values.
void write_report_jsonl(const std::string& path,
                        const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace ntt
