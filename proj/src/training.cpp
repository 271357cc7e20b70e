#include "ntt/training.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ntt {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

std::vector<StepTarget> scene_targets(const SceneRecord& scene, const WorldDef& world,
                                      int textual_size) {
  int n = static_cast<int>(scene.caption_tokens.size());
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(n) + 2);
  seq.push_back(Vocab::kBos);
  seq.insert(seq.end(), scene.caption_tokens.begin(), scene.caption_tokens.end());
  seq.push_back(Vocab::kEos);

  std::vector<StepTarget> steps;
  steps.reserve(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) {
    StepTarget st;
    st.input = seq[static_cast<std::size_t>(t)];
    int target_tok = seq[static_cast<std::size_t>(t) + 1];
    int region = t < n ? scene.caption_regions[static_cast<std::size_t>(t)] : -1;
    if (region >= 0) {
      const RegionInfo& r = scene.regions[static_cast<std::size_t>(region)];
      st.region = region;
      st.target = textual_size + region;
      st.subcat = world.flat_subcat(r.category, r.subcat);
      st.plural = r.plural ? 1 : 0;
    } else {
      if (target_tok >= textual_size)
        throw std::runtime_error("caption token " + std::to_string(target_tok) +
                                 " is a region word but carries no region");
      st.target = target_tok;
    }
    steps.push_back(st);
  }
  return steps;
}

Tensor sequence_loss(const CaptionModel& model, const RegionSet& regions,
                     const std::vector<StepTarget>& steps, Mode mode, Rng& rng) {
  if (steps.empty()) throw std::runtime_error("sequence_loss: empty step list");
  ModelState state = model.initial_state();
  Tensor total;
  for (const auto& st : steps) {
    StepOutput out = model.step(state, regions, st.input, mode, rng);
    Tensor term = mul(log(pick(out.g.p_full, st.target)), real(-1));
    if (st.region >= 0) {
      SlotFill sf = model.fill_slot(out, regions, st.region);
      term = sub(term, add(log(pick(sf.p_plural, st.plural)), log(pick(sf.p_subcat, st.subcat))));
    }
    total = total.defined() ? add(total, term) : term;
    state = std::move(out.next);
  }
  return mul(total, real(1) / static_cast<real>(steps.size()));
}

real dataset_loss(const CaptionModel& model, const std::vector<SceneRecord>& scenes,
                  const WorldDef& world) {
  if (scenes.empty()) throw std::runtime_error("dataset_loss: no scenes");
  Rng rng(0);  // eval mode draws nothing
  double sum = 0;
  long tokens = 0;
  int textual = model.config().textual_size;
  for (const auto& scene : scenes) {
    auto steps = scene_targets(scene, world, textual);
    Tensor loss = sequence_loss(model, to_region_set(scene), steps, Mode::kEval, rng);
    sum += static_cast<double>(loss.item()) * static_cast<double>(steps.size());
    tokens += static_cast<long>(steps.size());
  }
  return static_cast<real>(sum / static_cast<double>(tokens));
}

real lr_at_epoch(const TrainConfig& cfg, int epoch) {
  int steps = cfg.anneal_every > 0 ? epoch / cfg.anneal_every : 0;
  return cfg.lr * static_cast<real>(std::pow(static_cast<double>(cfg.anneal_factor), steps));
}

namespace {

struct AdamState {
  std::vector<std::vector<real>> m;
  std::vector<std::vector<real>> v;
  long t = 0;
};

constexpr real kAdamBeta1 = real(0.9);
constexpr real kAdamBeta2 = real(0.999);
constexpr real kAdamEps = real(1e-8);

void adam_step(std::vector<Tensor>& tensors, std::vector<std::vector<real>>& grads,
               AdamState& adam, real lr, real clip_norm) {
  double sq = 0;
  for (const auto& g : grads)
    for (real x : g) sq += static_cast<double>(x) * static_cast<double>(x);
  real norm = static_cast<real>(std::sqrt(sq));
  if (clip_norm > 0 && norm > clip_norm) {
    real scale = clip_norm / norm;
    for (auto& g : grads)
      for (auto& x : g) x *= scale;
  }

  adam.t += 1;
  real c1 = real(1) - static_cast<real>(std::pow(static_cast<double>(kAdamBeta1), adam.t));
  real c2 = real(1) - static_cast<real>(std::pow(static_cast<double>(kAdamBeta2), adam.t));
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    auto& vals = tensors[p].values();
    auto& m = adam.m[p];
    auto& v = adam.v[p];
    const auto& g = grads[p];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (real(1) - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (real(1) - kAdamBeta2) * g[i] * g[i];
      real mhat = m[i] / c1;
      real vhat = v[i] / c2;
      vals[i] -= lr * mhat / (static_cast<real>(std::sqrt(static_cast<double>(vhat))) + kAdamEps);
    }
  }
}

}  // namespace

TrainResult train(const CaptionModel& model, ParamStore& params,
                  const std::vector<SceneRecord>& scenes, const WorldDef& world,
                  const TrainConfig& cfg, std::ostream* console) {
  if (scenes.empty()) throw std::runtime_error("train: no scenes");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.workers <= 0)
    throw std::runtime_error("train: epochs, batch_size and workers must be positive");

  int textual = model.config().textual_size;
  std::vector<RegionSet> region_sets;
  std::vector<std::vector<StepTarget>> targets;
  region_sets.reserve(scenes.size());
  targets.reserve(scenes.size());
  for (const auto& s : scenes) {
    region_sets.push_back(to_region_set(s));
    targets.push_back(scene_targets(s, world, textual));
  }

  std::vector<Tensor> tensors;
  for (const auto& name : params.names()) tensors.push_back(params.at(name));
  AdamState adam;
  for (const auto& t : tensors) {
    adam.m.emplace_back(t.values().size(), real(0));
    adam.v.emplace_back(t.values().size(), real(0));
  }

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::binary);
    if (!log) throw std::runtime_error("cannot write " + cfg.log_path);
  }

  TrainResult result;
  int n = static_cast<int>(scenes.size());
  auto t0 = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    real lr = lr_at_epoch(cfg, epoch);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(Rng::derive_seed(cfg.seed, "shuffle:" + std::to_string(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0;
    for (int base = 0; base < n; base += cfg.batch_size) {
      int bn = std::min(cfg.batch_size, n - base);
      std::vector<GradSink> sinks(static_cast<std::size_t>(bn));
      std::vector<double> losses(static_cast<std::size_t>(bn), 0.0);

      auto run_items = [&](int lo, int hi, std::exception_ptr& err) {
        try {
          for (int i = lo; i < hi; ++i) {
            int idx = order[static_cast<std::size_t>(base + i)];
            Rng item_rng(Rng::derive_seed(
                cfg.seed, "item:" + std::to_string(epoch) + ":" +
                              std::to_string(scenes[static_cast<std::size_t>(idx)].id)));
            Tensor loss = sequence_loss(model, region_sets[static_cast<std::size_t>(idx)],
                                        targets[static_cast<std::size_t>(idx)], Mode::kTrain,
                                        item_rng);
            losses[static_cast<std::size_t>(i)] = static_cast<double>(loss.item());
            sinks[static_cast<std::size_t>(i)] = backward(loss);
          }
        } catch (...) {
          err = std::current_exception();
        }
      };

      int workers = std::min(cfg.workers, bn);
      std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
      if (workers <= 1) {
        run_items(0, bn, errs[0]);
      } else {
        std::vector<std::thread> pool;
        int chunk = (bn + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          int lo = w * chunk, hi = std::min(bn, lo + chunk);
          if (lo >= hi) break;
          pool.emplace_back(run_items, lo, hi, std::ref(errs[static_cast<std::size_t>(w)]));
        }
        for (auto& th : pool) th.join();
      }
      for (auto& e : errs)
        if (e) std::rethrow_exception(e);

      // Deterministic reduction: batch-index order, then mean.
      std::vector<std::vector<real>> grads;
      grads.reserve(tensors.size());
      for (const auto& t : tensors) grads.emplace_back(t.values().size(), real(0));
      for (int i = 0; i < bn; ++i) {
        const GradSink& sink = sinks[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < tensors.size(); ++p) {
          auto it = sink.find(tensors[p].node());
          if (it == sink.end()) continue;
          auto& acc = grads[p];
          const auto& g = it->second;
          for (std::size_t j = 0; j < g.size(); ++j) acc[j] += g[j];
        }
        epoch_loss += losses[static_cast<std::size_t>(i)];
      }
      real inv = real(1) / static_cast<real>(bn);
      for (auto& g : grads)
        for (auto& x : g) x *= inv;

      adam_step(tensors, grads, adam, lr, cfg.clip_norm);
    }

    EpochStat stat{epoch, lr, static_cast<real>(epoch_loss / n)};
    result.stats.push_back(stat);
    if (log) {
      log << "epoch=" << stat.epoch << " lr=" << std::setprecision(10) << stat.lr
          << " loss=" << std::setprecision(10) << stat.mean_loss << "\n";
    }
    if (console) {
      auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      *console << "epoch " << stat.epoch << "  lr " << stat.lr << "  loss " << stat.mean_loss
               << "  (" << dt << " ms)\n";
    }
    if (cfg.stop_loss > 0 && stat.mean_loss < cfg.stop_loss) break;
  }
  return result;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

constexpr char kMagic[4] = {'N', 'T', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const Vocab& vocab,
                     const ParamStore& params) {
  json config = {{"embed_dim", cfg.embed_dim},
                 {"feat_dim", cfg.feat_dim},
                 {"hidden_dim", cfg.hidden_dim},
                 {"kind", cfg.kind},
                 {"subcat_ids", cfg.subcat_ids},
                 {"textual_size", cfg.textual_size},
                 {"vocab_size", cfg.vocab_size}};
  json header = {{"config", config}, {"vocab", vocab.words}};
  std::string blob = header.dump();

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u64(out, blob.size());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    write_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& name : params.names()) {
      Tensor t = params.at(name);
      write_u64(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_u32(out, static_cast<std::uint32_t>(t.shape().size()));
      for (int d : t.shape()) write_u32(out, static_cast<std::uint32_t>(d));
      for (real v : t.values()) {
        float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
      }
    }
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + " is not a weight file");
  std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported weight file version " +
                             std::to_string(version));
  std::uint64_t blob_len = read_u64(in);
  std::string blob(blob_len, '\0');
  in.read(blob.data(), static_cast<std::streamsize>(blob_len));
  if (!in) throw std::runtime_error("checkpoint truncated");
  json header = json::parse(blob);

  CheckpointData data;
  const json& c = header.at("config");
  data.config.kind = c.at("kind").get<std::string>();
  data.config.vocab_size = c.at("vocab_size").get<int>();
  data.config.textual_size = c.at("textual_size").get<int>();
  data.config.embed_dim = c.at("embed_dim").get<int>();
  data.config.hidden_dim = c.at("hidden_dim").get<int>();
  data.config.feat_dim = c.at("feat_dim").get<int>();
  data.config.subcat_ids = c.at("subcat_ids").get<std::vector<int>>();
  data.vocab.words = header.at("vocab").get<std::vector<std::string>>();
  data.vocab.textual_size = data.config.textual_size;
  for (std::size_t i = 0; i < data.vocab.words.size(); ++i)
    data.vocab.index.emplace(data.vocab.words[i], static_cast<int>(i));

  std::uint32_t n_tensors = read_u32(in);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::uint64_t name_len = read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    std::uint32_t rank = read_u32(in);
    std::vector<int> shape;
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<int>(read_u32(in)));
      numel *= static_cast<std::size_t>(shape.back());
    }
    std::vector<real> vals(numel);
    for (auto& v : vals) {
      float f = 0;
      in.read(reinterpret_cast<char*>(&f), sizeof f);
      v = static_cast<real>(f);
    }
    if (!in) throw std::runtime_error("checkpoint truncated in tensor " + name);
    data.params.put(name, Tensor::from(std::move(shape), std::move(vals), true));
  }
  return data;
}

}  // namespace ntt
