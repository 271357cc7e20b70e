#pragma once

#include "ntt/data.hpp"
#include "ntt/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ntt {

// One teacher-forced step: feed `input`, score `target` against the full
// word distribution. At pointing steps `region` is the grounded region and
// subcat/plural are the word-form targets (plural: 0 singular, 1 plural).
struct StepTarget {
  int input = 0;
  int target = 0;  // index into p_full
  int region = -1;
  int subcat = -1;
  int plural = -1;
};

// Sentence-marker wrapped targets for a scene.
std::vector<StepTarget> scene_targets(const SceneRecord& scene, const WorldDef& world,
                                      int textual_size);

// Mean over steps of the step penalty: -log p_full[target], plus at pointing
// steps -log p_plural[plural] - log p_subcat[subcat].
Tensor sequence_loss(const CaptionModel& model, const RegionSet& regions,
                     const std::vector<StepTarget>& steps, Mode mode, Rng& rng);

// Per-token mean of the same penalty across a whole dataset, eval mode.
real dataset_loss(const CaptionModel& model, const std::vector<SceneRecord>& scenes,
                  const WorldDef& world);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 100;
  real lr = real(5e-3);
  int anneal_every = 3;       // epochs per decay step
  real anneal_factor = real(0.8);
  real clip_norm = real(5);   // global gradient norm ceiling
  std::uint64_t seed = 0;
  int workers = 1;
  real stop_loss = real(0);   // >0: stop once an epoch's mean loss drops below
  std::string log_path;       // optional run log, deterministic content
};

real lr_at_epoch(const TrainConfig& cfg, int epoch);

struct EpochStat {
  int epoch = 0;
  real lr = 0;
  real mean_loss = 0;
};

struct TrainResult {
  std::vector<EpochStat> stats;
};

// Batched teacher-forced training with first-moment/second-moment adaptive
// updates. Gradients of a batch are averaged in batch-index order and the
// per-item rng streams depend only on (seed, epoch, scene id), so results do
// not change with the worker count. `console` may be null.
TrainResult train(const CaptionModel& model, ParamStore& params,
                  const std::vector<SceneRecord>& scenes, const WorldDef& world,
                  const TrainConfig& cfg, std::ostream* console);

// Weight file: magic "NTTC", version, a JSON config block (model config plus
// vocab), then named tensors stored as 32-bit floats. Saving quantizes to
// 32-bit, so save -> load -> save reproduces the file byte for byte.
void save_checkpoint(const std::string& path, const ModelConfig& cfg, const Vocab& vocab,
                     const ParamStore& params);

struct CheckpointData {
  ModelConfig config;
  Vocab vocab;
  ParamStore params;
};

CheckpointData load_checkpoint(const std::string& path);

}  // namespace ntt
