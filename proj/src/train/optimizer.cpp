#include "seqssl/train/optimizer.hpp"

namespace seqssl {

void OptimSettings::validate() const {
  require(kind == "sgd", "optim.kind: only 'sgd' is supported");
  require(lr >= 0.0, "optim.lr: must be >= 0 (0 selects the scaling rule)");
  require(weight_decay >= 0.0, "optim.weight_decay: must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "optim.momentum: must be in [0, 1)");
}

SgdMomentum::SgdMomentum(const Registry& registry, const OptimSettings& settings)
    : momentum_(settings.momentum), weight_decay_(settings.weight_decay) {
  settings.validate();
  velocity_.reserve(registry.params.size());
  for (const auto& p : registry.params) {
    velocity_.emplace_back(p.value->size(), 0.0f);
    is_predictor_.push_back(p.name.rfind("pred.", 0) == 0);
  }
}

void SgdMomentum::apply(const ParamRef& p, std::vector<float>& vel, double lr) {
  float* w = p.value->data();
  const float* g = p.grad->data();
  const float wd = p.no_decay ? 0.0f : static_cast<float>(weight_decay_);
  const float mom = static_cast<float>(momentum_);
  const float step_lr = static_cast<float>(lr);
  for (size_t k = 0; k < vel.size(); ++k) {
    vel[k] = mom * vel[k] + g[k] + wd * w[k];
    w[k] -= step_lr * vel[k];
  }
}

void SgdMomentum::step(const Registry& registry, double lr, double predictor_lr) {
  require(velocity_.size() == registry.params.size(), "optimizer: registry changed size");
  for (size_t i = 0; i < registry.params.size(); ++i) {
    apply(registry.params[i], velocity_[i], is_predictor_[i] ? predictor_lr : lr);
  }
}

void SgdMomentum::step_prefix(const Registry& registry, double lr, const std::string& prefix) {
  require(velocity_.size() == registry.params.size(), "optimizer: registry changed size");
  for (size_t i = 0; i < registry.params.size(); ++i) {
    if (registry.params[i].name.rfind(prefix, 0) != 0) continue;
    apply(registry.params[i], velocity_[i], lr);
  }
}

}  // namespace seqssl
