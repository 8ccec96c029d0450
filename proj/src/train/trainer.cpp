#include "seqssl/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "seqssl/data/slices.hpp"
#include "seqssl/objectives/losses.hpp"

namespace seqssl {

namespace {

// sub-stream tags
constexpr uint64_t kInitTag = 0x696e6974ULL;
constexpr uint64_t kEpochTag = 0x65706f63ULL;
constexpr uint64_t kValTag = 0x76616cULL;
constexpr uint64_t kSubsampleTag = 0x737562ULL;
constexpr uint64_t kFtAugTag = 0x667461ULL;

Matrix64 to_double(const Matrix& m) {
  Matrix64 out(m.rows, m.cols);
  for (size_t i = 0; i < m.v.size(); ++i) out.v[i] = m.v[i];
  return out;
}

Matrix to_float(const Matrix64& m) {
  Matrix out(m.rows, m.cols);
  for (size_t i = 0; i < m.v.size(); ++i) out.v[i] = static_cast<float>(m.v[i]);
  return out;
}

// Parameter + state snapshot for best-epoch selection.
std::vector<std::vector<float>> save_state(const Registry& reg) {
  std::vector<std::vector<float>> out;
  out.reserve(reg.params.size() + reg.states.size());
  for (const auto& p : reg.params) out.push_back(*p.value);
  for (const auto& s : reg.states) out.push_back(*s.value);
  return out;
}

void restore_state(Registry& reg, const std::vector<std::vector<float>>& saved) {
  size_t i = 0;
  for (auto& p : reg.params) *p.value = saved[i++];
  for (auto& s : reg.states) *s.value = saved[i++];
}

// Pair batch laid out so rows 2k and 2k+1 hold the two views of source k.
Tensor make_pair_batch(const std::vector<ViewPair>& pairs) {
  std::vector<const Image*> views;
  views.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    views.push_back(&p.view_a);
    views.push_back(&p.view_b);
  }
  return make_batch(views);
}

struct PairLossOutcome {
  double loss = 0.0;
  Matrix dz;    // simclr: gradient into projections
  Matrix dp;    // simsiam: gradient into predictor outputs (interleaved)
};

PairLossOutcome pair_loss(Framework fw, const Matrix& z, const Matrix* p, double temperature) {
  PairLossOutcome out;
  if (fw == Framework::kSimclr) {
    NtXentResult res = nt_xent_loss(to_double(z), temperature);
    out.loss = res.loss;
    out.dz = to_float(res.grad);
    return out;
  }
  const int n_pairs = z.rows / 2;
  Matrix64 p1(n_pairs, z.cols), p2(n_pairs, z.cols);
  Matrix64 z1(n_pairs, z.cols), z2(n_pairs, z.cols);
  for (int k = 0; k < n_pairs; ++k) {
    for (int t = 0; t < z.cols; ++t) {
      p1.at(k, t) = p->at(2 * k, t);
      p2.at(k, t) = p->at(2 * k + 1, t);
      z1.at(k, t) = z.at(2 * k, t);
      z2.at(k, t) = z.at(2 * k + 1, t);
    }
  }
  SimSiamResult res = simsiam_loss(p1, p2, z1, z2);
  out.loss = res.loss;
  out.dp.resize(z.rows, z.cols);
  for (int k = 0; k < n_pairs; ++k) {
    for (int t = 0; t < z.cols; ++t) {
      out.dp.at(2 * k, t) = static_cast<float>(res.dp1.at(k, t));
      out.dp.at(2 * k + 1, t) = static_cast<float>(res.dp2.at(k, t));
    }
  }
  return out;
}

}  // namespace

const char* to_string(Framework fw) {
  switch (fw) {
    case Framework::kSimclr: return "simclr";
    case Framework::kSimsiam: return "simsiam";
  }
  throw ValidationError("framework: unknown enum value");
}

Framework framework_from_string(const std::string& s) {
  if (s == "simclr") return Framework::kSimclr;
  if (s == "simsiam") return Framework::kSimsiam;
  throw ValidationError("pretrain.framework: unknown framework '" + s + "'");
}

void PretrainConfig::validate() const {
  require(epochs >= 1, "pretrain.epochs: must be >= 1");
  require(batch_size >= 1, "pretrain.batch_size: must be >= 1");
  if (framework == Framework::kSimclr) {
    require(batch_size >= 2, "pretrain.batch_size: simclr requires >= 2 (negatives must exist)");
  }
  require(resolution >= kMinInputSize, "pretrain.resolution: must be >= 32");
  require(temperature > 0.0, "pretrain.temperature: must be > 0");
  optim.validate();
  augment.validate();
}

void FinetuneConfig::validate() const {
  require(label_fraction > 0.0 && label_fraction <= 1.0,
          "finetune.label_fraction: must be in (0, 1]");
  require(epochs >= 1, "finetune.epochs: must be >= 1");
  require(patience >= 1, "finetune.patience: must be >= 1");
  require(head_warmup_epochs >= 0 && head_warmup_epochs < epochs,
          "finetune.head_warmup_epochs: must be in [0, epochs)");
  require(batch_size >= 2, "finetune.batch_size: must be >= 2");
  require(resolution >= kMinInputSize, "finetune.resolution: must be >= 32");
  optim.validate();
  augment.validate();
}

void write_loss_log(const std::vector<EpochLog>& logs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "loss log: cannot open '" + path + "'");
  out << "epoch,mean_loss,val_metric\n";
  char buf[96];
  for (const auto& l : logs) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", l.epoch, l.mean_loss, l.val_metric);
    out << buf;
  }
}

std::vector<LabeledSlice> at_resolution(const std::vector<LabeledSlice>& slices, int resolution) {
  std::vector<LabeledSlice> out = slices;
  for (auto& s : out) {
    if (s.pixels.h != resolution || s.pixels.w != resolution) {
      s.pixels = resample_slice(s.pixels, resolution, resolution);
    }
  }
  return out;
}

std::vector<UnlabeledSlice> at_resolution(const std::vector<UnlabeledSlice>& slices,
                                          int resolution) {
  std::vector<UnlabeledSlice> out = slices;
  for (auto& s : out) {
    if (s.pixels.h != resolution || s.pixels.w != resolution) {
      s.pixels = resample_slice(s.pixels, resolution, resolution);
    }
  }
  return out;
}

PretrainResult pretrain(const PretrainConfig& config,
                        const std::vector<UnlabeledSlice>& train_slices,
                        const std::vector<UnlabeledSlice>& val_slices,
                        const ModelSpec& model_spec) {
  config.validate();
  model_spec.validate();
  require(!train_slices.empty(), "pretrain: train split must be nonempty");

  const auto train = at_resolution(train_slices, config.resolution);
  const auto val = at_resolution(val_slices, config.resolution);
  const AugmentConfig aug = config.augment.scaled_for(config.resolution, config.resolution);

  auto model = build_model(model_spec, mix64(config.seed, kInitTag));
  SgdMomentum opt(model->registry(), config.optim);
  const double base_lr = config.optim.resolve_lr(config.batch_size);

  // Fixed validation pairs so the metric is comparable across epochs.
  std::vector<ViewPair> val_pairs;
  val_pairs.reserve(val.size());
  for (size_t i = 0; i < val.size(); ++i) {
    val_pairs.push_back(make_view_pair(val[i].pixels, val[i].locator, aug,
                                       mix64(config.seed, kValTag, i)));
  }

  PretrainResult result;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(base_lr, epoch, config.epochs);
    Rng shuffle_rng(mix64(config.seed, kEpochTag, static_cast<uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    size_t n_pairs_seen = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      if (stop - start < 2) break;  // batch-norm needs at least two rows

      std::vector<ViewPair> pairs;
      pairs.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) {
        const uint64_t pair_seed =
            mix64(config.seed, static_cast<uint64_t>(epoch) * train.size() + order[i]);
        pairs.push_back(make_view_pair(train[order[i]].pixels, train[order[i]].locator, aug,
                                       pair_seed));
      }
      const Tensor batch = make_pair_batch(pairs);

      model->zero_grads();
      const Matrix& embed = model->forward_embed(batch, true);
      const Matrix& z = model->forward_project(embed, true);
      PairLossOutcome outcome;
      if (config.framework == Framework::kSimclr) {
        outcome = pair_loss(config.framework, z, nullptr, config.temperature);
        const Matrix& dembed = model->project_backward(outcome.dz);
        model->embed_backward(dembed);
      } else {
        const Matrix& p = model->forward_predict(z, true);
        outcome = pair_loss(config.framework, z, &p, config.temperature);
        // stop-gradient: projections receive gradient only through the predictor
        const Matrix& dz = model->predict_backward(outcome.dp);
        const Matrix& dembed = model->project_backward(dz);
        model->embed_backward(dembed);
      }
      if (!std::isfinite(outcome.loss)) {
        throw std::runtime_error("pretrain: non-finite loss at epoch " +
                                 std::to_string(epoch + 1));
      }
      const bool fixed_pred =
          config.framework == Framework::kSimsiam && config.predictor_fixed_lr;
      opt.step(model->registry(), lr, fixed_pred ? base_lr : lr);
      loss_sum += outcome.loss * static_cast<double>(stop - start);
      n_pairs_seen += stop - start;
    }

    // validation pair loss, eval mode
    double val_metric = 0.0;
    if (!val_pairs.empty()) {
      double vsum = 0.0;
      size_t vn = 0;
      for (size_t start = 0; start < val_pairs.size(); start += config.batch_size) {
        const size_t stop = std::min(val_pairs.size(), start + config.batch_size);
        if (stop - start < 2) break;
        std::vector<ViewPair> chunk(val_pairs.begin() + start, val_pairs.begin() + stop);
        const Tensor batch = make_pair_batch(chunk);
        const Matrix& embed = model->forward_embed(batch, false);
        const Matrix& z = model->forward_project(embed, false);
        PairLossOutcome outcome;
        if (config.framework == Framework::kSimclr) {
          outcome = pair_loss(config.framework, z, nullptr, config.temperature);
        } else {
          const Matrix& p = model->forward_predict(z, false);
          outcome = pair_loss(config.framework, z, &p, config.temperature);
        }
        vsum += outcome.loss * static_cast<double>(stop - start);
        vn += stop - start;
      }
      val_metric = vn > 0 ? vsum / static_cast<double>(vn) : 0.0;
    }

    result.log.push_back(
        {epoch + 1, n_pairs_seen > 0 ? loss_sum / static_cast<double>(n_pairs_seen) : 0.0,
         val_metric});
  }

  CheckpointMeta meta;
  meta.stage = "pretrained";
  meta.framework = to_string(config.framework);
  meta.epochs = config.epochs;
  meta.seed = config.seed;
  result.checkpoint = snapshot_model(*model, meta);
  return result;
}

namespace {

// class index -> sorted study ids -> kept study set, shared by the manifest
// and slice-level subsamplers
std::set<std::string> pick_studies(const std::map<int, std::set<std::string>>& by_class,
                                   double fraction, uint64_t seed) {
  for (int c = 0; c < kNumClasses; ++c) {
    require(by_class.count(c) > 0 && !by_class.at(c).empty(),
            std::string("subsample_labels: class '") +
                to_string(static_cast<SequenceLabel>(c)) + "' has no studies");
  }
  std::set<std::string> keep;
  for (const auto& [cls, studies] : by_class) {
    std::vector<std::string> ids(studies.begin(), studies.end());
    Rng rng(mix64(seed, kSubsampleTag, static_cast<uint64_t>(cls)));
    shuffle(ids, rng);
    const size_t m = static_cast<size_t>(
        std::max<long long>(1, std::llround(fraction * static_cast<double>(ids.size()))));
    for (size_t i = 0; i < std::min(m, ids.size()); ++i) keep.insert(ids[i]);
  }
  return keep;
}

}  // namespace

SplitManifest subsample_labels(const SplitManifest& manifest, double fraction, uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, "subsample_labels: fraction must be in (0, 1]");
  std::map<int, std::set<std::string>> by_class;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::kTrain) by_class[static_cast<int>(e.label)].insert(e.study_id);
  }
  const auto keep = pick_studies(by_class, fraction, seed);

  SplitManifest out;
  out.seed = manifest.seed;
  out.ratios = manifest.ratios;
  for (const auto& e : manifest.entries) {
    if (e.split != Split::kTrain || keep.count(e.study_id) > 0) out.entries.push_back(e);
  }
  return out;
}

std::vector<LabeledSlice> subsample_labeled_slices(const std::vector<LabeledSlice>& slices,
                                                   double fraction, uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, "subsample_labels: fraction must be in (0, 1]");
  std::map<int, std::set<std::string>> by_class;
  for (const auto& s : slices) by_class[static_cast<int>(s.label)].insert(s.study_id);
  const auto keep = pick_studies(by_class, fraction, seed);
  std::vector<LabeledSlice> out;
  for (const auto& s : slices) {
    if (keep.count(s.study_id) > 0) out.push_back(s);
  }
  return out;
}

double accuracy_on(Model& model, const std::vector<LabeledSlice>& slices, int resolution,
                   int batch_size) {
  require(!slices.empty(), "accuracy_on: empty evaluation set");
  const auto at_res = at_resolution(slices, resolution);
  size_t correct = 0;
  for (size_t start = 0; start < at_res.size(); start += batch_size) {
    const size_t stop = std::min(at_res.size(), start + batch_size);
    std::vector<const Image*> imgs;
    imgs.reserve(stop - start);
    for (size_t i = start; i < stop; ++i) imgs.push_back(&at_res[i].pixels);
    const Matrix& embed = model.forward_embed(make_batch(imgs), false);
    const Matrix& logits = model.forward_classify(embed);
    for (size_t i = start; i < stop; ++i) {
      int best = 0;
      for (int k = 1; k < kNumClasses; ++k) {
        if (logits.at(static_cast<int>(i - start), k) >
            logits.at(static_cast<int>(i - start), best)) {
          best = k;  // strict > keeps ties at the lowest class index
        }
      }
      correct += best == static_cast<int>(at_res[i].label) ? 1 : 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(at_res.size());
}

FinetuneResult finetune(const std::optional<Checkpoint>& init_checkpoint,
                        const FinetuneConfig& config,
                        const std::vector<LabeledSlice>& train_slices,
                        const std::vector<LabeledSlice>& val_slices,
                        const std::vector<LabeledSlice>& test_slices,
                        const ModelSpec& model_spec) {
  config.validate();
  model_spec.validate();
  require(!train_slices.empty(), "finetune: train split must be nonempty");
  require(!val_slices.empty(), "finetune: val split must be nonempty");
  require(!test_slices.empty(), "finetune: test split must be nonempty");

  std::unique_ptr<Model> model;
  if (config.from_checkpoint) {
    require(init_checkpoint.has_value(), "finetune.init: from_checkpoint requires a checkpoint");
    require(init_checkpoint->meta.stage == "pretrained",
            "finetune.init: checkpoint stage must be 'pretrained'");
    require(init_checkpoint->meta.spec == model_spec,
            "finetune.init: checkpoint model_spec does not match");
    model = model_from_checkpoint(*init_checkpoint);
    model->init_classifier(mix64(config.seed, kInitTag));
  } else {
    model = build_model(model_spec, mix64(config.seed, kInitTag));
  }

  auto train = at_resolution(
      subsample_labeled_slices(train_slices, config.label_fraction,
                               mix64(config.seed, kSubsampleTag)),
      config.resolution);
  const auto val = at_resolution(val_slices, config.resolution);
  const auto test = at_resolution(test_slices, config.resolution);
  require(train.size() >= 2, "finetune: subsampled train split has fewer than 2 slices");
  const AugmentConfig aug = config.augment.scaled_for(config.resolution, config.resolution);

  SgdMomentum opt(model->registry(), config.optim);
  const double base_lr = config.optim.resolve_lr(config.batch_size);

  FinetuneResult result;
  double best_val = -1.0;
  int best_epoch = 0;
  std::vector<std::vector<float>> best_state;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(base_lr, epoch, config.epochs);
    Rng shuffle_rng(mix64(config.seed, kEpochTag, static_cast<uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    size_t n_seen = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      if (stop - start < 2) break;

      std::vector<Image> augmented;
      std::vector<const Image*> imgs;
      std::vector<int> labels;
      augmented.reserve(stop - start);
      imgs.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) {
        const auto& slice = train[order[i]];
        if (config.augment_train) {
          Rng arng(mix64(config.seed, kFtAugTag,
                         static_cast<uint64_t>(epoch) * train.size() + order[i]));
          augmented.push_back(augment_chain(slice.pixels, aug, arng));
          imgs.push_back(&augmented.back());
        } else {
          imgs.push_back(&slice.pixels);
        }
        labels.push_back(static_cast<int>(slice.label));
      }

      const bool warmup = epoch < config.head_warmup_epochs;
      model->zero_grads();
      const Tensor batch = make_batch(imgs);
      // during warmup the backbone is frozen in eval mode
      const Matrix& embed = model->forward_embed(batch, !warmup);
      const Matrix& logits = model->forward_classify(embed);
      CrossEntropyResult ce = cross_entropy_9way(to_double(logits), labels);
      if (!std::isfinite(ce.loss)) {
        throw std::runtime_error("finetune: non-finite loss at epoch " +
                                 std::to_string(epoch + 1));
      }
      const Matrix& dembed = model->classify_backward(to_float(ce.dlogits));
      if (warmup) {
        opt.step_prefix(model->registry(), lr, "classifier.");
      } else {
        model->embed_backward(dembed);
        opt.step(model->registry(), lr);
      }
      loss_sum += ce.loss * static_cast<double>(stop - start);
      n_seen += stop - start;
    }

    const double val_acc = accuracy_on(*model, val, config.resolution);
    result.log.push_back(
        {epoch + 1, n_seen > 0 ? loss_sum / static_cast<double>(n_seen) : 0.0, val_acc});

    if (val_acc > best_val) {  // strict: ties break to the earliest epoch
      best_val = val_acc;
      best_epoch = epoch + 1;
      best_state = save_state(model->registry());
    } else if (epoch + 1 - best_epoch >= config.patience) {
      break;  // validation plateau
    }
  }

  restore_state(model->registry(), best_state);
  result.best_epoch = best_epoch;
  result.test_accuracy = accuracy_on(*model, test, config.resolution);

  CheckpointMeta meta;
  meta.stage = "finetuned";
  meta.framework = config.from_checkpoint && init_checkpoint.has_value()
                       ? init_checkpoint->meta.framework
                       : "supervised";
  meta.epochs = best_epoch;
  meta.seed = config.seed;
  result.checkpoint = snapshot_model(*model, meta);
  return result;
}

}  // namespace seqssl
