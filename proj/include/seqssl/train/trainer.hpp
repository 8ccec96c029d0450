#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqssl/augment/augment.hpp"
#include "seqssl/data/io.hpp"
#include "seqssl/model/checkpoint.hpp"
#include "seqssl/train/optimizer.hpp"

namespace seqssl {

enum class Framework : int { kSimclr = 0, kSimsiam };

const char* to_string(Framework fw);
Framework framework_from_string(const std::string& s);

struct PretrainConfig {
  Framework framework = Framework::kSimsiam;
  int epochs = 50;
  int batch_size = 256;  // source slices per step; each yields two views
  int resolution = 84;
  OptimSettings optim;
  double temperature = 0.5;       // simclr only
  bool predictor_fixed_lr = true; // simsiam: predictor skips the cosine decay
  AugmentConfig augment;
  uint64_t seed = 0;

  void validate() const;
};

struct FinetuneConfig {
  double label_fraction = 1.0;
  bool from_checkpoint = true;  // false -> from_scratch (ignores any checkpoint)
  int epochs = 30;
  int patience = 10;  // early stop on validation plateau
  // Optional head-only warmup: for the first N epochs the backbone runs in
  // eval mode and only the classifier trains, shielding a loaded
  // representation from early random-head gradients. All parameters train
  // after the warmup. 0 disables.
  int head_warmup_epochs = 0;
  int batch_size = 32;
  int resolution = 84;
  OptimSettings optim;
  bool augment_train = true;
  AugmentConfig augment;
  uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;        // 1-based
  double mean_loss = 0.0;
  double val_metric = 0.0;  // pair loss (pretrain) or accuracy (finetune)
};

// CSV with header "epoch,mean_loss,val_metric", %.6f formatting.
void write_loss_log(const std::vector<EpochLog>& logs, const std::string& path);

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

// Contrastive pre-training on label-stripped slices. Deterministic given
// config.seed with single-threaded data order. Aborts with a diagnostic on a
// non-finite loss.
PretrainResult pretrain(const PretrainConfig& config,
                        const std::vector<UnlabeledSlice>& train_slices,
                        const std::vector<UnlabeledSlice>& val_slices,
                        const ModelSpec& model_spec);

// Stratified study-level label subsampling of the train split: per class,
// max(1, round(fraction * studies_of_class)) studies are kept with all their
// slices. Val/test entries pass through untouched.
SplitManifest subsample_labels(const SplitManifest& manifest, double fraction, uint64_t seed);

// Study-level subsampling on loaded slices, same rule as above.
std::vector<LabeledSlice> subsample_labeled_slices(const std::vector<LabeledSlice>& slices,
                                                   double fraction, uint64_t seed);

struct FinetuneResult {
  Checkpoint checkpoint;
  double test_accuracy = 0.0;
  int best_epoch = 0;  // 1-based, selected by validation accuracy
  std::vector<EpochLog> log;
};

// Supervised fine-tuning with a fresh 9-way classifier head. Trains on the
// subsampled train split, selects the best epoch by validation accuracy
// (ties to the earliest epoch), and reports test-split accuracy once.
FinetuneResult finetune(const std::optional<Checkpoint>& init_checkpoint,
                        const FinetuneConfig& config,
                        const std::vector<LabeledSlice>& train_slices,
                        const std::vector<LabeledSlice>& val_slices,
                        const std::vector<LabeledSlice>& test_slices,
                        const ModelSpec& model_spec);

// Slice-level accuracy of a model on labeled slices (eval mode).
double accuracy_on(Model& model, const std::vector<LabeledSlice>& slices, int resolution,
                   int batch_size = 64);

// Resamples every slice to resolution x resolution (no-op when they match).
std::vector<LabeledSlice> at_resolution(const std::vector<LabeledSlice>& slices, int resolution);
std::vector<UnlabeledSlice> at_resolution(const std::vector<UnlabeledSlice>& slices,
                                          int resolution);

}  // namespace seqssl
