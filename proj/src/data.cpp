#include "ntt/data.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ntt {

using nlohmann::json;

int WorldDef::n_subcats_flat() const {
  int n = 0;
  for (const auto& s : subcats) n += static_cast<int>(s.size());
  return n;
}

int WorldDef::flat_subcat(int category, int subcat) const {
  int idx = 0;
  for (int c = 0; c < category; ++c) idx += static_cast<int>(subcats[static_cast<std::size_t>(c)].size());
  return idx + subcat;
}

std::string WorldDef::surface(int category, int subcat, bool plural) const {
  std::string w = subcats[static_cast<std::size_t>(category)][static_cast<std::size_t>(subcat)];
  if (plural) w += "s";
  return w;
}

WorldDef default_world() {
  WorldDef w;
  w.categories = {"bird", "bus", "cat", "couch", "tree", "zebra"};
  w.subcats = {{"falcon", "sparrow"}, {"shuttle", "trolley"}, {"siamese", "tabby"},
               {"futon", "settee"},   {"oak", "willow"},      {"grevy", "quagga"}};
  w.determiners = {"a", "the"};
  w.verbs = {"sits", "sleeps", "stands", "waits"};
  w.preps = {"behind", "beside", "near", "under"};
  w.adverbs = {"alone", "calmly", "quietly", "today"};
  return w;
}

int Vocab::id(const std::string& w) const {
  auto it = index.find(w);
  if (it == index.end()) throw std::runtime_error("word '" + w + "' not in vocab");
  return it->second;
}

const std::string& Vocab::word(int i) const {
  if (i < 0 || i >= size())
    throw std::runtime_error("vocab id " + std::to_string(i) + " out of range");
  return words[static_cast<std::size_t>(i)];
}

Vocab build_vocab(const WorldDef& world) {
  Vocab v;
  v.words = {"<s>", "</s>", "<unk>"};
  std::vector<std::string> textual;
  for (const auto& group : {world.determiners, world.verbs, world.preps, world.adverbs})
    textual.insert(textual.end(), group.begin(), group.end());
  std::sort(textual.begin(), textual.end());
  v.words.insert(v.words.end(), textual.begin(), textual.end());
  v.textual_size = static_cast<int>(v.words.size());

  std::vector<std::string> visual;
  for (std::size_t c = 0; c < world.subcats.size(); ++c)
    for (std::size_t s = 0; s < world.subcats[c].size(); ++s)
      for (bool plural : {false, true})
        visual.push_back(world.surface(static_cast<int>(c), static_cast<int>(s), plural));
  std::sort(visual.begin(), visual.end());
  v.words.insert(v.words.end(), visual.begin(), visual.end());

  for (std::size_t i = 0; i < v.words.size(); ++i) {
    if (!v.index.emplace(v.words[i], static_cast<int>(i)).second)
      throw std::runtime_error("duplicate vocab word '" + v.words[i] + "'");
  }
  return v;
}

std::vector<int> subcat_vocab_ids(const WorldDef& world, const Vocab& vocab) {
  std::vector<int> ids;
  for (std::size_t c = 0; c < world.subcats.size(); ++c)
    for (std::size_t s = 0; s < world.subcats[c].size(); ++s)
      ids.push_back(vocab.id(world.surface(static_cast<int>(c), static_cast<int>(s), false)));
  return ids;
}

namespace {

struct ObjDraw {
  int category;
  int subcat;
  bool plural;
};

constexpr int kMaxAttempts = 10000;

bool mentions_category(const std::vector<ObjDraw>& objs, int cat) {
  for (const auto& o : objs)
    if (o.category == cat) return true;
  return false;
}

// Samples n distinct (category, subcat) pairs, optionally avoiding pairs
// already in `taken`. Mentioned objects additionally get pairwise-distinct
// categories so a caption never names the same kind of thing twice.
std::vector<ObjDraw> draw_combos(const WorldDef& world, int n, Rng& rng,
                                 const std::set<std::pair<int, int>>& taken,
                                 bool distinct_categories) {
  std::set<std::pair<int, int>> used = taken;
  std::set<int> used_cats;
  std::vector<ObjDraw> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++guard > kMaxAttempts) throw std::runtime_error("could not sample distinct region kinds");
    int c = rng.uniform_int(0, static_cast<int>(world.categories.size()) - 1);
    int s = rng.uniform_int(0, static_cast<int>(world.subcats[static_cast<std::size_t>(c)].size()) - 1);
    if (distinct_categories && used_cats.count(c)) continue;
    if (!used.emplace(c, s).second) continue;
    used_cats.insert(c);
    out.push_back({c, s, rng.uniform01() < 0.5});
  }
  return out;
}

std::vector<real> noisy_feature(const WorldDef& world, const ObjDraw& o, real sigma, int feat_dim,
                                Rng& rng) {
  std::vector<real> f(static_cast<std::size_t>(feat_dim), real(0));
  f[static_cast<std::size_t>(o.category)] = 1;
  f[static_cast<std::size_t>(static_cast<int>(world.categories.size()) +
                             world.flat_subcat(o.category, o.subcat))] = 1;
  f[f.size() - 2] = o.plural ? real(1) : real(0);
  for (auto& x : f) x += static_cast<real>(rng.normal(0.0, static_cast<double>(sigma)));
  return f;
}

SceneRecord make_scene(const WorldDef& world, const Vocab& vocab, const GenConfig& cfg,
                       const std::string& role, int scene_id, Rng& rng) {
  int excluded_cat = -1;
  int pair_a = -1, pair_b = -1;
  if (cfg.mode == "novel") excluded_cat = 5;  // zebra
  if (cfg.mode == "robust") {
    pair_a = 2;  // cat
    pair_b = 3;  // couch
  }

  int min_obj = cfg.min_objects;
  if (cfg.mode == "robust" && role == "test") min_obj = std::max(min_obj, 2);

  std::vector<ObjDraw> objs;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= kMaxAttempts)
      throw std::runtime_error("could not satisfy mode '" + cfg.mode + "' constraints");
    int n_obj = rng.uniform_int(min_obj, cfg.max_objects);
    objs = draw_combos(world, n_obj, rng, {}, true);
    if (cfg.mode == "novel") {
      bool has = mentions_category(objs, excluded_cat);
      if (role == "train" ? has : !has) continue;
    } else if (cfg.mode == "robust") {
      bool both = mentions_category(objs, pair_a) && mentions_category(objs, pair_b);
      if (role == "train" ? both : !both) continue;
    }
    break;
  }
  std::sort(objs.begin(), objs.end(), [](const ObjDraw& a, const ObjDraw& b) {
    return a.category != b.category ? a.category < b.category : a.subcat < b.subcat;
  });

  int n_obj = static_cast<int>(objs.size());
  int k = rng.uniform_int(std::max(3, n_obj), cfg.max_regions);

  std::set<std::pair<int, int>> taken;
  for (const auto& o : objs) taken.emplace(o.category, o.subcat);
  std::vector<ObjDraw> extras = draw_combos(world, k - n_obj, rng, taken, false);

  // Region order is a shuffle of objects followed by distractors; track
  // where each mentioned object lands.
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);
  std::vector<int> region_of_obj(static_cast<std::size_t>(n_obj), -1);

  SceneRecord scene;
  scene.id = scene_id;
  scene.regions.resize(static_cast<std::size_t>(k));
  int feat_dim = static_cast<int>(world.categories.size()) + world.n_subcats_flat() + 2;
  for (int slot = 0; slot < k; ++slot) {
    int src = perm[static_cast<std::size_t>(slot)];
    const ObjDraw& o = src < n_obj ? objs[static_cast<std::size_t>(src)]
                                   : extras[static_cast<std::size_t>(src - n_obj)];
    if (src < n_obj) region_of_obj[static_cast<std::size_t>(src)] = slot;
    RegionInfo r;
    r.category = o.category;
    r.subcat = o.subcat;
    r.plural = o.plural;
    r.v = noisy_feature(world, o, cfg.noise_sigma, feat_dim, rng);
    r.vbar = noisy_feature(world, o, cfg.noise_sigma, feat_dim, rng);
    scene.regions[static_cast<std::size_t>(slot)] = std::move(r);
  }

  auto det = [&](const ObjDraw& o) { return vocab.id(world.determiners[o.plural ? 1 : 0]); };
  auto wordform = [&](const ObjDraw& o) {
    return vocab.id(world.surface(o.category, o.subcat, o.plural));
  };
  auto push_text = [&](int tok) {
    scene.caption_tokens.push_back(tok);
    scene.caption_regions.push_back(-1);
  };
  auto push_obj = [&](int i) {
    push_text(det(objs[static_cast<std::size_t>(i)]));
    scene.caption_tokens.push_back(wordform(objs[static_cast<std::size_t>(i)]));
    scene.caption_regions.push_back(region_of_obj[static_cast<std::size_t>(i)]);
  };

  int verb = vocab.id(world.verbs[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(world.verbs.size()) - 1))]);
  push_obj(0);
  push_text(verb);
  if (n_obj == 1) {
    push_text(vocab.id(world.adverbs[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(world.adverbs.size()) - 1))]));
  } else {
    int p1 = rng.uniform_int(0, static_cast<int>(world.preps.size()) - 1);
    push_text(vocab.id(world.preps[static_cast<std::size_t>(p1)]));
    push_obj(1);
    if (n_obj == 3) {
      int p2 = p1;
      while (p2 == p1) p2 = rng.uniform_int(0, static_cast<int>(world.preps.size()) - 1);
      push_text(vocab.id(world.preps[static_cast<std::size_t>(p2)]));
      push_obj(2);
    }
  }
  return scene;
}

}  // namespace

Corpus gen_corpus(const GenConfig& cfg) {
  if (cfg.mode != "standard" && cfg.mode != "novel" && cfg.mode != "robust")
    throw std::runtime_error("unknown corpus mode '" + cfg.mode + "'");
  if (cfg.n_train <= 0 || cfg.n_test < 0)
    throw std::runtime_error("corpus sizes must satisfy n_train > 0, n_test >= 0");
  if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects || cfg.max_objects > 3)
    throw std::runtime_error("object count bounds must satisfy 1 <= min <= max <= 3");
  if (cfg.max_regions < 3 || cfg.max_regions > 6)
    throw std::runtime_error("max_regions must be in [3, 6]");

  Corpus corpus;
  corpus.meta.mode = cfg.mode;
  corpus.meta.world = default_world();
  corpus.meta.noise_sigma = cfg.noise_sigma;
  corpus.meta.feat_dim = static_cast<int>(corpus.meta.world.categories.size()) +
                         corpus.meta.world.n_subcats_flat() + 2;
  if (cfg.mode == "novel") corpus.meta.held_out_category = "zebra";
  if (cfg.mode == "robust") corpus.meta.held_out_pair = {"cat", "couch"};
  corpus.vocab = build_vocab(corpus.meta.world);

  Rng rng(Rng::derive_seed(cfg.seed, "corpus:" + cfg.mode));
  for (int i = 0; i < cfg.n_train; ++i)
    corpus.train.push_back(
        make_scene(corpus.meta.world, corpus.vocab, cfg, "train", i, rng));
  for (int i = 0; i < cfg.n_test; ++i)
    corpus.test.push_back(
        make_scene(corpus.meta.world, corpus.vocab, cfg, "test", cfg.n_train + i, rng));
  return corpus;
}

RegionSet to_region_set(const SceneRecord& scene) {
  if (scene.regions.empty()) throw std::runtime_error("scene has no regions");
  int k = static_cast<int>(scene.regions.size());
  int f = static_cast<int>(scene.regions[0].v.size());
  std::vector<real> v, vbar;
  v.reserve(static_cast<std::size_t>(k) * f);
  vbar.reserve(static_cast<std::size_t>(k) * f);
  for (const auto& r : scene.regions) {
    if (static_cast<int>(r.v.size()) != f || static_cast<int>(r.vbar.size()) != f)
      throw std::runtime_error("inconsistent feature widths in scene");
    v.insert(v.end(), r.v.begin(), r.v.end());
    vbar.insert(vbar.end(), r.vbar.begin(), r.vbar.end());
  }
  RegionSet set;
  set.V = Tensor::from({k, f}, std::move(v));
  set.Vbar = Tensor::from({k, f}, std::move(vbar));
  set.count = k;
  return set;
}

std::vector<std::string> caption_words(const Vocab& vocab, const std::vector<int>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (int t : tokens) out.push_back(vocab.word(t));
  return out;
}

namespace {

json scene_to_json(const SceneRecord& s) {
  json regions = json::array();
  for (const auto& r : s.regions)
    regions.push_back({{"category", r.category},
                       {"plural", r.plural},
                       {"subcat", r.subcat},
                       {"v", r.v},
                       {"vbar", r.vbar}});
  return {{"caption_regions", s.caption_regions},
          {"caption_tokens", s.caption_tokens},
          {"id", s.id},
          {"regions", regions}};
}

SceneRecord scene_from_json(const json& j) {
  SceneRecord s;
  s.id = j.at("id").get<int>();
  s.caption_tokens = j.at("caption_tokens").get<std::vector<int>>();
  s.caption_regions = j.at("caption_regions").get<std::vector<int>>();
  for (const auto& rj : j.at("regions")) {
    RegionInfo r;
    r.category = rj.at("category").get<int>();
    r.subcat = rj.at("subcat").get<int>();
    r.plural = rj.at("plural").get<bool>();
    r.v = rj.at("v").get<std::vector<real>>();
    r.vbar = rj.at("vbar").get<std::vector<real>>();
    s.regions.push_back(std::move(r));
  }
  if (s.caption_tokens.size() != s.caption_regions.size())
    throw std::runtime_error("scene " + std::to_string(s.id) +
                             ": caption token and region lists differ in length");
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

}  // namespace

void write_dataset(const std::string& path, const std::vector<SceneRecord>& scenes) {
  auto out = open_out(path);
  for (const auto& s : scenes) out << scene_to_json(s).dump() << "\n";
}

std::vector<SceneRecord> read_dataset(const std::string& path) {
  auto in = open_in(path);
  std::vector<SceneRecord> scenes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      scenes.push_back(scene_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return scenes;
}

void write_vocab(const std::string& path, const Vocab& vocab) {
  auto out = open_out(path);
  for (const auto& w : vocab.words) out << w << "\n";
}

Vocab read_vocab(const std::string& path) {
  auto in = open_in(path);
  Vocab v;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) v.words.push_back(line);
  for (std::size_t i = 0; i < v.words.size(); ++i) v.index.emplace(v.words[i], static_cast<int>(i));
  v.textual_size = -1;  // unknown until cross-checked against the world
  return v;
}

namespace {

json world_to_json(const WorldDef& w) {
  return {{"adverbs", w.adverbs},     {"categories", w.categories},
          {"determiners", w.determiners}, {"preps", w.preps},
          {"subcats", w.subcats},     {"verbs", w.verbs}};
}

WorldDef world_from_json(const json& j) {
  WorldDef w;
  w.categories = j.at("categories").get<std::vector<std::string>>();
  w.subcats = j.at("subcats").get<std::vector<std::vector<std::string>>>();
  w.determiners = j.at("determiners").get<std::vector<std::string>>();
  w.verbs = j.at("verbs").get<std::vector<std::string>>();
  w.preps = j.at("preps").get<std::vector<std::string>>();
  w.adverbs = j.at("adverbs").get<std::vector<std::string>>();
  return w;
}

}  // namespace

void write_meta(const std::string& path, const CorpusMeta& meta) {
  json j = {{"feat_dim", meta.feat_dim},
            {"held_out_category", meta.held_out_category},
            {"held_out_pair", meta.held_out_pair},
            {"mode", meta.mode},
            {"noise_sigma", meta.noise_sigma},
            {"world", world_to_json(meta.world)}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

CorpusMeta read_meta(const std::string& path) {
  auto in = open_in(path);
  json j = json::parse(in);
  CorpusMeta m;
  m.mode = j.at("mode").get<std::string>();
  m.feat_dim = j.at("feat_dim").get<int>();
  m.noise_sigma = j.at("noise_sigma").get<real>();
  m.held_out_category = j.at("held_out_category").get<std::string>();
  m.held_out_pair = j.at("held_out_pair").get<std::vector<std::string>>();
  m.world = world_from_json(j.at("world"));
  return m;
}

void write_corpus(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  write_dataset(dir + "/train.jsonl", corpus.train);
  write_dataset(dir + "/test.jsonl", corpus.test);
  write_vocab(dir + "/vocab.txt", corpus.vocab);
  write_meta(dir + "/meta.json", corpus.meta);
}

Corpus load_corpus(const std::string& dir) {
  Corpus c;
  c.meta = read_meta(dir + "/meta.json");
  c.vocab = build_vocab(c.meta.world);
  Vocab on_disk = read_vocab(dir + "/vocab.txt");
  if (on_disk.words != c.vocab.words)
    throw std::runtime_error(dir + "/vocab.txt does not match the corpus world definition");
  c.train = read_dataset(dir + "/train.jsonl");
  c.test = read_dataset(dir + "/test.jsonl");
  return c;
}

}  // namespace ntt
