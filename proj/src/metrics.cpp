#include "ntt/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ntt {

namespace {

using Counts = std::map<std::vector<std::string>, long>;

Counts ngram_counts(const std::vector<std::string>& toks, int n) {
  Counts c;
  if (static_cast<int>(toks.size()) >= n)
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i)
      ++c[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  return c;
}

void check_paired(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::runtime_error(std::string(what) + ": candidate and reference counts differ (" +
                             std::to_string(a) + " vs " + std::to_string(b) + ")");
  if (a == 0) throw std::runtime_error(std::string(what) + ": empty corpus");
}

}  // namespace

real bleu(const std::vector<std::vector<std::string>>& candidates,
          const std::vector<std::vector<std::string>>& references, int max_n) {
  check_paired(candidates.size(), references.size(), "bleu");
  if (max_n <= 0) throw std::runtime_error("bleu: max_n must be positive");

  long cand_len = 0, ref_len = 0;
  for (const auto& c : candidates) cand_len += static_cast<long>(c.size());
  for (const auto& r : references) ref_len += static_cast<long>(r.size());

  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    long matched = 0, total = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      Counts cc = ngram_counts(candidates[i], n);
      Counts rc = ngram_counts(references[i], n);
      for (const auto& [gram, count] : cc) {
        total += count;
        auto it = rc.find(gram);
        if (it != rc.end()) matched += std::min(count, it->second);
      }
    }
    if (total == 0 || matched == 0) return 0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  double precision = std::exp(log_sum / max_n);
  double bp = cand_len > ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  if (cand_len == 0) return 0;
  return static_cast<real>(bp * precision);
}

real cider(const std::vector<std::vector<std::string>>& candidates,
           const std::vector<std::vector<std::string>>& references) {
  check_paired(candidates.size(), references.size(), "cider");
  std::size_t n_items = candidates.size();
  if (n_items < 2)
    throw std::runtime_error("cider: needs at least 2 items to form document frequencies");

  constexpr int kMaxN = 4;
  double total = 0;
  for (int n = 1; n <= kMaxN; ++n) {
    Counts df;
    for (const auto& ref : references)
      for (const auto& [gram, count] : ngram_counts(ref, n)) ++df[gram];

    auto idf = [&](const std::vector<std::string>& gram) {
      auto it = df.find(gram);
      long d = it == df.end() ? 0 : it->second;
      return std::log(static_cast<double>(n_items) / static_cast<double>(std::max(1L, d)));
    };

    double sim_sum = 0;
    for (std::size_t i = 0; i < n_items; ++i) {
      Counts cc = ngram_counts(candidates[i], n);
      Counts rc = ngram_counts(references[i], n);
      double dot = 0, nc = 0, nr = 0;
      for (const auto& [gram, count] : cc) {
        double w = static_cast<double>(count) * idf(gram);
        nc += w * w;
        auto it = rc.find(gram);
        if (it != rc.end()) dot += w * static_cast<double>(it->second) * idf(gram);
      }
      for (const auto& [gram, count] : rc) {
        double w = static_cast<double>(count) * idf(gram);
        nr += w * w;
      }
      if (nc > 0 && nr > 0) sim_sum += dot / (std::sqrt(nc) * std::sqrt(nr));
    }
    total += sim_sum / static_cast<double>(n_items);
  }
  return static_cast<real>(10.0 * total / kMaxN);
}

real grounding_accuracy(const std::vector<std::vector<int>>& candidate_regions,
                        const std::vector<std::vector<int>>& reference_regions) {
  check_paired(candidate_regions.size(), reference_regions.size(), "grounding_accuracy");
  double sum = 0;
  for (std::size_t i = 0; i < candidate_regions.size(); ++i) {
    const auto& c = candidate_regions[i];
    const auto& r = reference_regions[i];
    std::size_t lim = std::max(c.size(), r.size());
    if (lim == 0) {
      sum += 1;
      continue;
    }
    std::size_t hits = 0;
    for (std::size_t j = 0; j < std::min(c.size(), r.size()); ++j)
      if (c[j] == r[j]) ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(lim);
  }
  return static_cast<real>(sum / static_cast<double>(candidate_regions.size()));
}

std::string render_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "model" << std::right << std::setw(8) << "B-1"
     << std::setw(8) << "B-4" << std::setw(9) << "CIDEr" << std::setw(8) << "Grd"
     << std::setw(7) << "n" << "\n";
  os << std::string(56, '-') << "\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(16) << name << std::right << std::setw(8)
       << static_cast<double>(r.bleu1) * 100.0 << std::setw(8)
       << static_cast<double>(r.bleu4) * 100.0 << std::setw(9)
       << static_cast<double>(r.cider) * 10.0 << std::setw(8)
       << static_cast<double>(r.grounding) * 100.0 << std::setw(7) << r.n_items << "\n";
  }
  return os.str();
}

void write_report_jsonl(const std::string& path,
                        const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [name, r] : rows) {
    nlohmann::json j = {{"bleu1", r.bleu1},   {"bleu4", r.bleu4},         {"cider", r.cider},
                        {"grounding", r.grounding}, {"n_items", r.n_items}, {"name", name}};
    out << j.dump() << "\n";
  }
}

}  // namespace ntt
