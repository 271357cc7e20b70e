#pragma once

#include "ntt/attention.hpp"
#include "ntt/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace ntt {

// Fixed word lists of the synthetic caption world. Six object categories,
// each with two fine-grained subcategories; plurals are formed with a
// trailing "s" so surface forms stay mechanical.
struct WorldDef {
  std::vector<std::string> categories;
  std::vector<std::vector<std::string>> subcats;  // per category
  std::vector<std::string> determiners;           // singular det, plural det
  std::vector<std::string> verbs;
  std::vector<std::string> preps;
  std::vector<std::string> adverbs;

  int n_subcats_flat() const;
  // Flat subcat index with category-major order.
  int flat_subcat(int category, int subcat) const;
  std::string surface(int category, int subcat, bool plural) const;
};

WorldDef default_world();

// Token table. Ids 0..2 are reserved; the textual block occupies
// [0, textual_size) and region-grounded word forms fill the rest.
struct Vocab {
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;

  std::vector<std::string> words;
  std::map<std::string, int> index;
  int textual_size = 0;

  int id(const std::string& w) const;  // errors on unknown words
  const std::string& word(int id) const;
  int size() const { return static_cast<int>(words.size()); }
  bool is_textual(int id) const { return id < textual_size; }
};

Vocab build_vocab(const WorldDef& world);

struct RegionInfo {
  int category = 0;
  int subcat = 0;
  bool plural = false;
  std::vector<real> v;
  std::vector<real> vbar;
};

// One synthetic scene: regions plus a reference caption. caption_regions
// holds, per caption position, the region a word points at, or -1 where the
// word is plain text.
struct SceneRecord {
  int id = 0;
  std::vector<RegionInfo> regions;
  std::vector<int> caption_tokens;
  std::vector<int> caption_regions;
};

struct CorpusMeta {
  std::string mode;  // "standard", "novel" or "robust"
  int feat_dim = 0;
  real noise_sigma = real(0);
  std::string held_out_category;              // novel mode
  std::vector<std::string> held_out_pair;     // robust mode
  WorldDef world;
};

struct GenConfig {
  std::string mode = "standard";
  int n_train = 0;
  int n_test = 0;  // may be 0
  std::uint64_t seed = 0;
  real noise_sigma = real(0.1);
  int min_objects = 1;
  int max_objects = 3;
  int max_regions = 6;
};

struct Corpus {
  std::vector<SceneRecord> train;
  std::vector<SceneRecord> test;
  CorpusMeta meta;
  Vocab vocab;
};

// Generates train and test scenes under the mode's constraint:
//  standard  no constraint,
//  novel     train captions never mention the held-out category, every
//            test caption mentions it,
//  robust    the held-out category pair never co-occurs in a train caption
//            and always co-occurs in test captions.
Corpus gen_corpus(const GenConfig& cfg);

// Tensor view of a scene's regions.
RegionSet to_region_set(const SceneRecord& scene);

// Caption as vocab words (no sentence markers).
std::vector<std::string> caption_words(const Vocab& vocab, const std::vector<int>& tokens);

// JSONL with one scene per line; writers are byte-deterministic so identical
// corpora serialize identically.
void write_dataset(const std::string& path, const std::vector<SceneRecord>& scenes);
std::vector<SceneRecord> read_dataset(const std::string& path);

void write_vocab(const std::string& path, const Vocab& vocab);
Vocab read_vocab(const std::string& path);

void write_meta(const std::string& path, const CorpusMeta& meta);
CorpusMeta read_meta(const std::string& path);

// Directory layout: train.jsonl, test.jsonl, vocab.txt, meta.json.
// Loading rebuilds the vocab from the stored world and errors if vocab.txt
// disagrees, so a corpus directory is self-describing.
void write_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(const std::string& dir);

// Vocab ids of the singular subcategory word forms, category-major. These
// rows of the embedding table double as the slot-word output layer.
std::vector<int> subcat_vocab_ids(const WorldDef& world, const Vocab& vocab);

}  // namespace ntt
