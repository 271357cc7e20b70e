#include "ntt/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ntt;

namespace {

std::vector<std::string> toks(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("n-gram score: identity, clipping, brevity") {
  std::vector<std::vector<std::string>> refs = {toks("a tabby sits near a futon"),
                                                toks("the oaks stand alone today")};
  CHECK(bleu(refs, refs, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleu(refs, refs, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // Clipped unigram precision: "the" matches at most once.
  CHECK(bleu({toks("the the the the")}, {toks("the cat")}, 1) ==
        doctest::Approx(0.25).epsilon(1e-9));

  // Hand-computed brevity penalty: candidate shorter than reference.
  // p1 = 2/2, penalty = exp(1 - 4/2) = e^-1.
  CHECK(bleu({toks("a tabby")}, {toks("a tabby sits quietly")}, 1) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  // Zero matches at any order kill the score, no smoothing.
  CHECK(bleu({toks("x y z w")}, {toks("a b c d")}, 1) == 0.0);
  CHECK(bleu({toks("a b")}, {toks("a b c d")}, 4) == 0.0);  // no 4-grams in candidate

  // Corpus pooling: totals are summed before dividing.
  // Item 1: 1 of 2 unigrams match; item 2: 2 of 2 match -> p1 = 3/4.
  // Lengths: c = 4, r = 4 -> bp = 1.
  CHECK(bleu({toks("a x"), toks("b c")}, {toks("a y"), toks("b c")}, 1) ==
        doctest::Approx(0.75).epsilon(1e-9));

  CHECK_THROWS(bleu({}, {}, 4));
  CHECK_THROWS(bleu({toks("a")}, {}, 4));
  CHECK_THROWS(bleu({toks("a")}, {toks("a")}, 0));
}

TEST_CASE("consensus score: identity is exactly ten") {
  std::vector<std::vector<std::string>> refs = {toks("a tabby sits near a futon"),
                                                toks("the oaks stand alone today"),
                                                toks("a falcon waits under the willow")};
  CHECK(cider(refs, refs) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("consensus score: hand-computed two-item unigram-only overlap") {
  // Candidates and references share no 2-grams and each sentence is two
  // distinct words, so only n=1 contributes.
  std::vector<std::vector<std::string>> cands = {toks("a b"), toks("c d")};
  std::vector<std::vector<std::string>> refs = {toks("a x"), toks("c y")};
  // df: a:1, x:1, c:1, y:1 -> idf = log(2) each.
  // Item 1 vectors: cand {a,b}, ref {a,x}; b has df 0 -> idf log(2/1) = log 2.
  // cos = (log2*log2) / (sqrt(2)*log2 * sqrt(2)*log2) = 1/2. Same for item 2.
  // Mean over items = 1/2 for n=1, 0 for n=2..4 -> 10 * (1/2)/4 = 1.25.
  CHECK(cider(cands, refs) == doctest::Approx(1.25).epsilon(1e-9));

  CHECK_THROWS(cider({toks("a")}, {toks("a")}));  // needs two items

  // Disjoint texts score zero but stay finite.
  CHECK(cider({toks("p q"), toks("r s")}, {toks("a x"), toks("c y")}) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pointing agreement scores positional matches") {
  CHECK(grounding_accuracy({{1, 2}, {0}}, {{1, 2}, {0}}) == doctest::Approx(1.0));
  CHECK(grounding_accuracy({{1, 2}}, {{2, 1}}) == doctest::Approx(0.0));
  CHECK(grounding_accuracy({{1, 2}}, {{1}}) == doctest::Approx(0.5));  // extra slot penalized
  CHECK(grounding_accuracy({{}}, {{}}) == doctest::Approx(1.0));
  CHECK(grounding_accuracy({{}}, {{3}}) == doctest::Approx(0.0));
  CHECK(grounding_accuracy({{1}, {5}}, {{1}, {4}}) == doctest::Approx(0.5));
  CHECK_THROWS(grounding_accuracy({{1}}, {}));
}

TEST_CASE("report table uses conventional scaling") {
  EvalReport r;
  r.bleu1 = real(0.7384);
  r.bleu4 = real(0.3264);
  r.cider = real(10.071);
  r.grounding = real(0.5);
  r.n_items = 20;
  std::string table = render_report_table({{"baseline", r}});
  CHECK(table.find("73.84") != std::string::npos);
  CHECK(table.find("32.64") != std::string::npos);
  CHECK(table.find("100.71") != std::string::npos);
  CHECK(table.find("50.00") != std::string::npos);
  CHECK(table.find("baseline") != std::string::npos);
}

TEST_CASE("report lines serialize raw values") {
  EvalReport r;
  r.bleu1 = real(0.5);
  r.bleu4 = real(0.25);
  r.cider = real(10);
  r.grounding = real(1);
  r.n_items = 2;
  auto path = (std::filesystem::temp_directory_path() / "ntt_report.jsonl").string();
  write_report_jsonl(path, {{"twin", r}});
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.find("\"bleu1\":0.5") != std::string::npos);
  CHECK(line.find("\"cider\":10.0") != std::string::npos);
  CHECK(line.find("\"name\":\"twin\"") != std::string::npos);
}
