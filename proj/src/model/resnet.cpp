#include "seqssl/model/resnet.hpp"

#include <cmath>

namespace seqssl {

const char* to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::kResnet18: return "resnet18";
    case BackboneKind::kResnetTiny: return "resnet_tiny";
  }
  throw ValidationError("backbone_kind: unknown enum value");
}

BackboneKind backbone_kind_from_string(const std::string& s) {
  if (s == "resnet18") return BackboneKind::kResnet18;
  if (s == "resnet_tiny") return BackboneKind::kResnetTiny;
  throw ValidationError("model.backbone: unknown kind '" + s + "'");
}

void ModelSpec::validate() const {
  require(in_channels == 1, "model.in_channels: must be 1");
  require(proj_dim >= 1, "model.proj_dim: must be >= 1");
  require(pred_hidden_dim >= 0, "model.pred_hidden_dim: must be >= 0");
  require(n_classes == 9, "model.n_classes: must be 9");
}

namespace {

struct StagePlan {
  int stem_kernel, stem_stride, stem_pad;
  std::vector<int> widths, blocks, strides;
};

StagePlan plan_for(const ModelSpec& spec) {
  if (spec.backbone == BackboneKind::kResnet18) {
    return {7, 2, 3, {64, 128, 256, 512}, {2, 2, 2, 2}, {1, 2, 2, 2}};
  }
  return {3, 2, 1, {16, 32, 64, 128}, {1, 1, 1, 1}, {1, 2, 2, 2}};
}

}  // namespace

// ------------------------------------------------------------- BasicBlock --

BasicBlock::BasicBlock(int in_ch, int out_ch, int stride)
    : has_ds_(stride != 1 || in_ch != out_ch),
      conv1_(in_ch, out_ch, 3, stride, 1),
      conv2_(out_ch, out_ch, 3, 1, 1),
      ds_conv_(in_ch, out_ch, 1, stride, 0),
      bn1_(out_ch),
      bn2_(out_ch),
      ds_bn_(out_ch) {}

void BasicBlock::init(Rng& rng) {
  conv1_.init(rng);
  conv2_.init(rng);
  if (has_ds_) ds_conv_.init(rng);
}

void BasicBlock::collect(const std::string& prefix, Registry& reg) {
  conv1_.collect(prefix + ".conv1", reg);
  bn1_.collect(prefix + ".bn1", reg);
  conv2_.collect(prefix + ".conv2", reg);
  bn2_.collect(prefix + ".bn2", reg);
  if (has_ds_) {
    ds_conv_.collect(prefix + ".downsample.conv", reg);
    ds_bn_.collect(prefix + ".downsample.bn", reg);
  }
}

const Tensor& BasicBlock::forward(const Tensor& x, bool train) {
  x_cache_ = &x;
  const Tensor& a = bn1_.forward(conv1_.forward(x), train);
  // bn outputs are private buffers; in-place relu is safe
  relu1_.forward_inplace(const_cast<Tensor&>(a).data(), a.size());
  const Tensor& b = bn2_.forward(conv2_.forward(a), train);

  const Tensor* skip = &x;
  if (has_ds_) skip = &ds_bn_.forward(ds_conv_.forward(x), train);

  sum_.resize(b.n, b.h, b.w, b.c);
  for (size_t i = 0; i < sum_.size(); ++i) sum_.v[i] = b.v[i] + skip->v[i];
  relu2_.forward_inplace(sum_.data(), sum_.size());
  return sum_;
}

const Tensor& BasicBlock::backward(const Tensor& dy) {
  dsum_ = dy;
  relu2_.backward_inplace(dsum_.data());

  // main path
  const Tensor& db = bn2_.backward(dsum_);
  const Tensor& da = conv2_.backward(db);
  relu1_.backward_inplace(const_cast<Tensor&>(da).data());
  const Tensor& dmain = conv1_.backward(bn1_.backward(da));

  dx_ = dmain;
  if (has_ds_) {
    const Tensor& dskip = ds_conv_.backward(ds_bn_.backward(dsum_));
    for (size_t i = 0; i < dx_.size(); ++i) dx_.v[i] += dskip.v[i];
  } else {
    for (size_t i = 0; i < dx_.size(); ++i) dx_.v[i] += dsum_.v[i];
  }
  return dx_;
}

// --------------------------------------------------------------- Backbone --

Backbone::Backbone(const ModelSpec& spec)
    : embed_dim_(spec.embed_dim()),
      stem_conv_(spec.in_channels, plan_for(spec).widths[0], plan_for(spec).stem_kernel,
                 plan_for(spec).stem_stride, plan_for(spec).stem_pad),
      stem_bn_(plan_for(spec).widths[0]) {
  const StagePlan plan = plan_for(spec);
  int in_ch = plan.widths[0];
  for (size_t stage = 0; stage < plan.widths.size(); ++stage) {
    for (int b = 0; b < plan.blocks[stage]; ++b) {
      const int stride = b == 0 ? plan.strides[stage] : 1;
      blocks_.push_back(std::make_unique<BasicBlock>(in_ch, plan.widths[stage], stride));
      in_ch = plan.widths[stage];
    }
  }
}

void Backbone::init(Rng& rng) {
  stem_conv_.init(rng);
  for (auto& b : blocks_) b->init(rng);
}

void Backbone::collect(Registry& reg) {
  stem_conv_.collect("backbone.stem.conv", reg);
  stem_bn_.collect("backbone.stem.bn", reg);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i]->collect("backbone.block" + std::to_string(i), reg);
  }
}

const Matrix& Backbone::forward(const Tensor& x, bool train) {
  const Tensor& s = stem_bn_.forward(stem_conv_.forward(x), train);
  stem_relu_.forward_inplace(const_cast<Tensor&>(s).data(), s.size());
  const Tensor* cur = &stem_pool_.forward(s);
  for (auto& b : blocks_) cur = &b->forward(*cur, train);
  return gap_.forward(*cur);
}

void Backbone::backward(const Matrix& dembed) {
  const Tensor* cur = &gap_.backward(dembed);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) cur = &(*it)->backward(*cur);
  const Tensor& ds = stem_pool_.backward(*cur);
  stem_relu_.backward_inplace(const_cast<Tensor&>(ds).data());
  stem_conv_.backward(stem_bn_.backward(ds));
}

// ---------------------------------------------------------------- MlpHead --

MlpHead::MlpHead(int in_dim, int hidden_dim, int out_dim, bool out_bn)
    : out_bn_(out_bn), fc1_(in_dim, hidden_dim), fc2_(hidden_dim, out_dim), bn1_(hidden_dim),
      bn2_(out_dim) {}

void MlpHead::init(Rng& rng) {
  fc1_.init(rng);
  fc2_.init(rng);
}

void MlpHead::collect(const std::string& prefix, Registry& reg) {
  fc1_.collect(prefix + ".fc1", reg);
  bn1_.collect(prefix + ".bn1", reg);
  fc2_.collect(prefix + ".fc2", reg);
  if (out_bn_) bn2_.collect(prefix + ".bn2", reg);
}

const Matrix& MlpHead::forward(const Matrix& x, bool train) {
  bn1_.forward(fc1_.forward(x), b1_, train);
  relu_.forward_inplace(b1_.data(), b1_.size());
  const Matrix& y = fc2_.forward(b1_);
  if (!out_bn_) return y;
  bn2_.forward(y, out_, train);
  return out_;
}

const Matrix& MlpHead::backward(const Matrix& dy) {
  const Matrix* cur = &dy;
  if (out_bn_) {
    bn2_.backward(dy, d2_);
    cur = &d2_;
  }
  d1_ = fc2_.backward(*cur);
  relu_.backward_inplace(d1_.data());
  Matrix db1;
  bn1_.backward(d1_, db1);
  return fc1_.backward(db1);
}

// ------------------------------------------------------------------ Model --

Model::Model(const ModelSpec& spec, uint64_t init_seed)
    : spec_(spec),
      backbone_(spec),
      proj_(spec.embed_dim(), spec.proj_dim, spec.proj_dim, true),
      pred_(spec.proj_dim, spec.pred_hidden(), spec.proj_dim, false),
      classifier_(spec.embed_dim(), spec.n_classes) {
  spec.validate();
  Rng rng(mix64(init_seed, 0x6d6f64656cULL));  // derived init stream
  backbone_.init(rng);
  proj_.init(rng);
  pred_.init(rng);
  classifier_.init(rng, 1.0);
  backbone_.collect(registry_);
  proj_.collect("proj", registry_);
  pred_.collect("pred", registry_);
  classifier_.collect("classifier", registry_);
}

const Matrix& Model::forward_embed(const Tensor& batch, bool train) {
  require(batch.n >= 1, "forward_embed: batch must be nonempty");
  require(batch.c == spec_.in_channels, "forward_embed: channel mismatch");
  require(batch.h >= kMinInputSize && batch.w >= kMinInputSize,
          "forward_embed: input below minimum supported size (32)");
  require(all_finite(batch.v), "forward_embed: inputs must be finite");
  input_ = batch;  // keep alive for the backward pass
  return backbone_.forward(input_, train);
}

const Matrix& Model::forward_project(const Matrix& embed, bool train) {
  require(embed.cols == spec_.embed_dim(), "forward_project: embedding dim mismatch");
  return proj_.forward(embed, train);
}

const Matrix& Model::forward_predict(const Matrix& proj, bool train) {
  require(proj.cols == spec_.proj_dim, "forward_predict: projection dim mismatch");
  return pred_.forward(proj, train);
}

const Matrix& Model::forward_classify(const Matrix& embed) {
  require(embed.cols == spec_.embed_dim(), "forward_classify: embedding dim mismatch");
  return classifier_.forward(embed);
}

const Matrix& Model::project_backward(const Matrix& dproj) { return proj_.backward(dproj); }
const Matrix& Model::predict_backward(const Matrix& dpred) { return pred_.backward(dpred); }
const Matrix& Model::classify_backward(const Matrix& dlogits) {
  return classifier_.backward(dlogits);
}
void Model::embed_backward(const Matrix& dembed) { backbone_.backward(dembed); }

void Model::zero_grads() {
  for (auto& p : registry_.params) std::fill(p.grad->begin(), p.grad->end(), 0.0f);
}

void Model::init_classifier(uint64_t seed) {
  Rng rng(mix64(seed, 0x636c73ULL));
  classifier_.init(rng, 1.0);
}

size_t Model::param_count() const {
  size_t n = 0;
  for (const auto& p : registry_.params) n += p.value->size();
  return n;
}

size_t Model::backbone_param_count() const {
  size_t n = 0;
  for (const auto& p : registry_.params) {
    if (p.name.rfind("backbone.", 0) == 0) n += p.value->size();
  }
  return n;
}

std::unique_ptr<Model> build_model(const ModelSpec& spec, uint64_t init_seed) {
  return std::make_unique<Model>(spec, init_seed);
}

Tensor make_batch(const std::vector<const Image*>& images) {
  require(!images.empty(), "make_batch: empty batch");
  const int h = images[0]->h;
  const int w = images[0]->w;
  Tensor t(static_cast<int>(images.size()), h, w, 1);
  for (size_t i = 0; i < images.size(); ++i) {
    require(images[i]->h == h && images[i]->w == w, "make_batch: mixed image shapes");
    std::copy(images[i]->v.begin(), images[i]->v.end(),
              t.v.begin() + static_cast<ptrdiff_t>(i * images[i]->size()));
  }
  return t;
}

}  // namespace seqssl
