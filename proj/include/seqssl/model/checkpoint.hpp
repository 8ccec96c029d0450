#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seqssl/model/resnet.hpp"

namespace seqssl {

struct NamedArray {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;
};

struct CheckpointMeta {
  ModelSpec spec;
  std::string stage;  // "pretrained" | "finetuned"
  std::string framework;  // "simclr" | "simsiam" | "supervised"
  int epochs = 0;
  uint64_t seed = 0;
  std::string framework_version;
};

// Named float32 parameter arrays plus a JSON metadata sidecar ("<path>.json").
// Round-trips are bit-exact: payloads are written as raw little-endian
// float32 in registry order.
struct Checkpoint {
  std::vector<NamedArray> arrays;
  CheckpointMeta meta;

  void validate() const;  // names unique, arrays finite, stage/heads consistent
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

// Snapshots model parameters and running stats. The pretrained stage carries
// backbone + projection + predictor arrays; the finetuned stage carries
// backbone + classifier arrays.
Checkpoint snapshot_model(const Model& model, const CheckpointMeta& meta);

// Restores arrays into a freshly built model; the model spec comes from the
// checkpoint metadata. Array names and shapes are validated strictly.
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace seqssl
