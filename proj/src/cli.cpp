#include "ntt/cli.hpp"

#include "ntt/data.hpp"
#include "ntt/inference.hpp"
#include "ntt/metrics.hpp"
#include "ntt/model.hpp"
#include "ntt/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace ntt {

namespace {

ModelConfig config_for_corpus(const std::string& kind, const Corpus& corpus, int embed_dim,
                              int hidden_dim) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.vocab_size = corpus.vocab.size();
  cfg.textual_size = corpus.vocab.textual_size;
  cfg.embed_dim = embed_dim;
  cfg.hidden_dim = hidden_dim;
  cfg.feat_dim = corpus.meta.feat_dim;
  cfg.subcat_ids = subcat_vocab_ids(corpus.meta.world, corpus.vocab);
  return cfg;
}

const std::vector<SceneRecord>& pick_split(const Corpus& corpus, const std::string& split) {
  if (split == "train") return corpus.train;
  if (split == "test") return corpus.test;
  throw std::runtime_error("unknown split '" + split + "', expected train or test");
}

struct DecodedScene {
  int id = 0;
  CaptionHypothesis hyp;
};

std::vector<DecodedScene> decode_split(const CaptionModel& model, const Corpus& corpus,
                                       const std::vector<SceneRecord>& scenes, int beam,
                                       int max_len) {
  SurfaceForms surface = make_surface_forms(corpus.meta.world, corpus.vocab);
  std::vector<DecodedScene> out;
  out.reserve(scenes.size());
  for (const auto& scene : scenes) {
    RegionSet regions = to_region_set(scene);
    auto hyps = beam_search(model, regions, surface, beam, max_len);
    DecodedScene d;
    d.id = scene.id;
    if (!hyps.empty()) d.hyp = hyps[0];
    out.push_back(std::move(d));
  }
  return out;
}

int cmd_gen_data(const std::string& out_dir, const GenConfig& gen) {
  Corpus corpus = gen_corpus(gen);
  write_corpus(out_dir, corpus);
  std::cout << "wrote " << corpus.train.size() << " train and " << corpus.test.size()
            << " test scenes (mode " << corpus.meta.mode << ", vocab " << corpus.vocab.size()
            << ") to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_path, const std::string& kind,
              int embed_dim, int hidden_dim, TrainConfig tcfg, bool quiet) {
  Corpus corpus = load_corpus(data_dir);
  if (corpus.train.empty()) throw std::runtime_error("corpus at " + data_dir + " has no train scenes");
  ModelConfig mcfg = config_for_corpus(kind, corpus, embed_dim, hidden_dim);
  ParamStore params;
  Rng init_rng(Rng::derive_seed(tcfg.seed, "init"));
  auto model = make_model(mcfg, params, init_rng);
  train(*model, params, corpus.train, corpus.meta.world, tcfg, quiet ? nullptr : &std::cout);
  save_checkpoint(out_path, mcfg, corpus.vocab, params);
  std::cout << "saved " << kind << " weights (" << params.total_elements() << " values) to "
            << out_path << "\n";
  return 0;
}

int cmd_caption(const std::string& ckpt_path, const std::string& data_dir,
                const std::string& split, int beam, int max_len, const std::string& out_path) {
  CheckpointData ckpt = load_checkpoint(ckpt_path);
  Rng bind_rng(0);
  auto model = make_model(ckpt.config, ckpt.params, bind_rng);
  Corpus corpus = load_corpus(data_dir);
  const auto& scenes = pick_split(corpus, split);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  auto decoded = decode_split(*model, corpus, scenes, beam, max_len);
  for (const auto& d : decoded) {
    nlohmann::json words = nlohmann::json::array();
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& t : d.hyp.tokens) {
      words.push_back(ckpt.vocab.word(t.token));
      regions.push_back(t.region);
    }
    nlohmann::json j = {{"caption", words},
                        {"ended", d.hyp.ended},
                        {"id", d.id},
                        {"logprob", d.hyp.logprob},
                        {"regions", regions}};
    *out << j.dump() << "\n";
  }
  return 0;
}

int cmd_eval(const std::vector<std::string>& ckpt_paths, const std::string& data_dir,
             const std::string& split, int beam, int max_len, const std::string& out_path) {
  Corpus corpus = load_corpus(data_dir);
  const auto& scenes = pick_split(corpus, split);
  if (scenes.empty()) throw std::runtime_error("split '" + split + "' is empty");

  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const auto& path : ckpt_paths) {
    CheckpointData ckpt = load_checkpoint(path);
    Rng bind_rng(0);
    auto model = make_model(ckpt.config, ckpt.params, bind_rng);
    auto decoded = decode_split(*model, corpus, scenes, beam, max_len);

    std::vector<std::vector<std::string>> cands, refs;
    std::vector<std::vector<int>> cand_regions, ref_regions;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      std::vector<std::string> cw;
      std::vector<int> cr;
      for (const auto& t : decoded[i].hyp.tokens) {
        cw.push_back(ckpt.vocab.word(t.token));
        if (t.region >= 0) cr.push_back(t.region);
      }
      cands.push_back(std::move(cw));
      cand_regions.push_back(std::move(cr));
      refs.push_back(caption_words(corpus.vocab, scenes[i].caption_tokens));
      std::vector<int> rr;
      for (int r : scenes[i].caption_regions)
        if (r >= 0) rr.push_back(r);
      ref_regions.push_back(std::move(rr));
    }

    EvalReport rep;
    rep.bleu1 = bleu(cands, refs, 1);
    rep.bleu4 = bleu(cands, refs, 4);
    rep.cider = cider(cands, refs);
    rep.grounding = grounding_accuracy(cand_regions, ref_regions);
    rep.n_items = static_cast<int>(scenes.size());

    std::string name = ckpt.config.kind;
    for (const auto& [existing, _] : rows)
      if (existing == name) name += "'";
    rows.emplace_back(name, rep);
  }

  std::cout << render_report_table(rows);
  if (!out_path.empty()) write_report_jsonl(out_path, rows);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"grounded caption decoder toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic scene corpus");
  std::string gen_out;
  GenConfig gcfg;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--mode", gcfg.mode, "standard, novel or robust")
      ->check(CLI::IsMember({"standard", "novel", "robust"}));
  gen->add_option("--train", gcfg.n_train, "train scene count")->default_val(100);
  gen->add_option("--test", gcfg.n_test, "test scene count")->default_val(20);
  gen->add_option("--seed", gcfg.seed, "master seed")->default_val(0);
  gen->add_option("--noise", gcfg.noise_sigma, "feature noise sigma")->default_val(0.1);

  auto* tr = app.add_subcommand("train", "train a captioner on a corpus");
  std::string tr_data, tr_out, tr_kind = "twin";
  int tr_embed = 32, tr_hidden = 32;
  bool tr_quiet = false;
  TrainConfig tcfg;
  tr->add_option("--data", tr_data, "corpus directory")->required();
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr->add_option("--model", tr_kind, "twin or baseline")
      ->check(CLI::IsMember({"twin", "baseline"}));
  tr->add_option("--embed-dim", tr_embed)->default_val(32);
  tr->add_option("--hidden-dim", tr_hidden)->default_val(32);
  tr->add_option("--epochs", tcfg.epochs)->default_val(50);
  tr->add_option("--batch", tcfg.batch_size)->default_val(100);
  tr->add_option("--lr", tcfg.lr)->default_val(5e-3);
  tr->add_option("--anneal-every", tcfg.anneal_every)->default_val(3);
  tr->add_option("--anneal-factor", tcfg.anneal_factor)->default_val(0.8);
  tr->add_option("--clip", tcfg.clip_norm)->default_val(5.0);
  tr->add_option("--seed", tcfg.seed)->default_val(0);
  tr->add_option("--workers", tcfg.workers, "parallel gradient workers")
      ->envname("NTT_WORKERS")
      ->default_val(1);
  tr->add_option("--stop-loss", tcfg.stop_loss, "stop once epoch loss drops below")
      ->default_val(0.0);
  tr->add_option("--log", tcfg.log_path, "epoch log file");
  tr->add_flag("--quiet", tr_quiet, "suppress per-epoch console output");

  auto* cap = app.add_subcommand("caption", "decode captions for a corpus split");
  std::string cap_ckpt, cap_data, cap_split = "test", cap_out;
  int cap_beam = 3, cap_maxlen = 16;
  cap->add_option("--ckpt", cap_ckpt, "checkpoint path")->required();
  cap->add_option("--data", cap_data, "corpus directory")->required();
  cap->add_option("--split", cap_split)->check(CLI::IsMember({"train", "test"}));
  cap->add_option("--beam", cap_beam)->default_val(3);
  cap->add_option("--max-len", cap_maxlen)->default_val(16);
  cap->add_option("--out", cap_out, "write JSONL here instead of stdout");

  auto* ev = app.add_subcommand("eval", "score checkpoints against references");
  std::vector<std::string> ev_ckpts;
  std::string ev_data, ev_split = "test", ev_out;
  int ev_beam = 3, ev_maxlen = 16;
  ev->add_option("--ckpt", ev_ckpts, "checkpoint path (repeatable)")->required();
  ev->add_option("--data", ev_data, "corpus directory")->required();
  ev->add_option("--split", ev_split)->check(CLI::IsMember({"train", "test"}));
  ev->add_option("--beam", ev_beam)->default_val(3);
  ev->add_option("--max-len", ev_maxlen)->default_val(16);
  ev->add_option("--out", ev_out, "write a JSONL report here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_out, gcfg);
    if (tr->parsed())
      return cmd_train(tr_data, tr_out, tr_kind, tr_embed, tr_hidden, tcfg, tr_quiet);
    if (cap->parsed())
      return cmd_caption(cap_ckpt, cap_data, cap_split, cap_beam, cap_maxlen, cap_out);
    if (ev->parsed()) return cmd_eval(ev_ckpts, ev_data, ev_split, ev_beam, ev_maxlen, ev_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace ntt
