#pragma once

#include <string>

#include "seqssl/cli/toml.hpp"
#include "seqssl/data/io.hpp"
#include "seqssl/data/phantom.hpp"
#include "seqssl/report/report.hpp"
#include "seqssl/train/sweep.hpp"
#include "seqssl/train/trainer.hpp"

namespace seqssl {

// Everything a run needs, assembled from (in override order) struct
// defaults, the TOML config file, SEQSSL_<SECTION>_<KEY> environment
// variables, and command-line flags.
struct ExperimentConfig {
  // [run]
  std::string out_dir = "out";
  uint64_t seed = 7;
  int jobs = 1;

  // [phantom]
  PhantomSpec phantom{10, 34, 34, 34, 0.1, 0};

  // [data]
  std::string volumes_dir;
  std::string dataset_dir;
  IngestOptions ingest;

  // [model]
  ModelSpec model = ModelSpec::resnet_tiny();

  // [augment] — shared by pretrain and finetune
  AugmentConfig augment;

  // [pretrain]
  PretrainConfig pretrain;

  // [finetune]
  FinetuneConfig finetune;
  std::string finetune_checkpoint;

  // [sweep]
  SweepSpec sweep;

  // [embed]
  ProjectionMethod embed_method = ProjectionMethod::kPca;
  std::string embed_checkpoint;
  int embed_max_points = 2000;

  // Loads file (optional) then environment overrides, then wires shared
  // fields (seed, augment, model) into the nested configs.
  static ExperimentConfig load(const std::string& config_path, bool apply_env = true);

  std::string to_json() const;  // config snapshot for run metadata
};

}  // namespace seqssl
