#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seqssl/model/layers.hpp"

namespace seqssl {

enum class BackboneKind : int { kResnet18 = 0, kResnetTiny };

const char* to_string(BackboneKind kind);
BackboneKind backbone_kind_from_string(const std::string& s);

// Architecture contract for the backbone and its three heads. resnet_tiny
// keeps the 4-stage residual structure at reduced width/depth so the full
// pipeline runs in minutes on CPU.
struct ModelSpec {
  BackboneKind backbone = BackboneKind::kResnetTiny;
  int in_channels = 1;
  int proj_dim = 128;
  int pred_hidden_dim = 0;  // 0 -> ceil(proj_dim / 4)
  int n_classes = 9;

  int embed_dim() const { return backbone == BackboneKind::kResnet18 ? 512 : 128; }
  int pred_hidden() const { return pred_hidden_dim > 0 ? pred_hidden_dim : (proj_dim + 3) / 4; }
  void validate() const;

  // equality over resolved dimensions: 0 (auto) and its resolved value match
  bool operator==(const ModelSpec& o) const {
    return backbone == o.backbone && in_channels == o.in_channels && proj_dim == o.proj_dim &&
           pred_hidden() == o.pred_hidden() && n_classes == o.n_classes;
  }

  static ModelSpec resnet18() { return {BackboneKind::kResnet18, 1, 128, 0, 9}; }
  static ModelSpec resnet_tiny() { return {BackboneKind::kResnetTiny, 1, 128, 0, 9}; }
};

inline constexpr int kMinInputSize = 32;

// conv-bn-relu-conv-bn + identity (or 1x1 conv-bn downsample), then relu.
class BasicBlock {
 public:
  BasicBlock(int in_ch, int out_ch, int stride);

  void init(Rng& rng);
  void collect(const std::string& prefix, Registry& reg);
  const Tensor& forward(const Tensor& x, bool train);
  const Tensor& backward(const Tensor& dy);

 private:
  bool has_ds_;
  Conv2d conv1_, conv2_, ds_conv_;
  BatchNorm bn1_, bn2_, ds_bn_;
  Relu relu1_, relu2_;
  const Tensor* x_cache_ = nullptr;
  Tensor sum_, dsum_, dx_;
};

// Stem (conv-bn-relu-maxpool) + 4 residual stages + global average pooling.
class Backbone {
 public:
  Backbone(const ModelSpec& spec);

  void init(Rng& rng);
  void collect(Registry& reg);
  const Matrix& forward(const Tensor& x, bool train);  // (B, embed_dim)
  void backward(const Matrix& dembed);

  int embed_dim() const { return embed_dim_; }

 private:
  int embed_dim_;
  Conv2d stem_conv_;
  BatchNorm stem_bn_;
  Relu stem_relu_;
  MaxPool2d stem_pool_;
  std::vector<std::unique_ptr<BasicBlock>> blocks_;
  GlobalAvgPool gap_;
};

// 2-layer MLP head: fc -> bn -> relu -> fc [-> bn].
class MlpHead {
 public:
  MlpHead(int in_dim, int hidden_dim, int out_dim, bool out_bn);

  void init(Rng& rng);
  void collect(const std::string& prefix, Registry& reg);
  const Matrix& forward(const Matrix& x, bool train);
  const Matrix& backward(const Matrix& dy);

 private:
  bool out_bn_;
  Linear fc1_, fc2_;
  BatchNorm bn1_, bn2_;
  Relu relu_;
  Matrix b1_, out_, d1_, d2_;
};

// Backbone plus the projection, predictor and classifier heads, with a flat
// parameter registry for the optimizer and checkpointing.
class Model {
 public:
  Model(const ModelSpec& spec, uint64_t init_seed);

  const ModelSpec& spec() const { return spec_; }
  Registry& registry() { return registry_; }
  const Registry& registry() const { return registry_; }

  // Requires H, W >= kMinInputSize and finite inputs.
  const Matrix& forward_embed(const Tensor& batch, bool train);
  const Matrix& forward_project(const Matrix& embed, bool train);
  const Matrix& forward_predict(const Matrix& proj, bool train);
  const Matrix& forward_classify(const Matrix& embed);

  // Backward entry points; each consumes the gradient of its head output.
  const Matrix& project_backward(const Matrix& dproj);    // -> d embed
  const Matrix& predict_backward(const Matrix& dpred);    // -> d proj
  const Matrix& classify_backward(const Matrix& dlogits); // -> d embed
  void embed_backward(const Matrix& dembed);              // into the backbone

  void zero_grads();
  // Re-draws the classifier head only; fine-tuning seeds it per run while
  // keeping loaded backbone weights.
  void init_classifier(uint64_t seed);
  size_t param_count() const;           // learnable scalars, whole model
  size_t backbone_param_count() const;  // learnable scalars, backbone only

 private:
  ModelSpec spec_;
  Backbone backbone_;
  MlpHead proj_, pred_;
  Linear classifier_;
  Registry registry_;
  Tensor input_;  // owned copy of the current batch; layers cache pointers
};

// Builds a model with deterministic seed-derived initialization.
std::unique_ptr<Model> build_model(const ModelSpec& spec, uint64_t init_seed);

// Assembles a batch tensor (n, h, w, 1) from equally-shaped images.
Tensor make_batch(const std::vector<const Image*>& images);

}  // namespace seqssl
