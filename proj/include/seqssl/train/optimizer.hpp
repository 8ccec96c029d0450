#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "seqssl/model/layers.hpp"

namespace seqssl {

struct OptimSettings {
  std::string kind = "sgd";
  double lr = 0.0;  // 0 -> linear scaling rule, 0.03 * batch_size / 256
  double weight_decay = 1e-4;
  double momentum = 0.9;

  void validate() const;
  double resolve_lr(int batch_size) const {
    return lr > 0.0 ? lr : 0.03 * static_cast<double>(batch_size) / 256.0;
  }
};

// Half-period cosine decay over the run: base * 0.5 * (1 + cos(pi e / E)).
inline double cosine_lr(double base_lr, int epoch, int total_epochs) {
  if (total_epochs <= 1) return base_lr;
  return base_lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(epoch) / total_epochs));
}

// SGD with momentum. Weight decay is added to the gradient for parameters
// not flagged no_decay (biases and batch-norm affine terms are excluded).
// Parameters under the "pred." prefix can take their own learning rate:
// the stop-gradient frameworks keep the predictor's rate constant while the
// rest of the network follows the cosine schedule.
class SgdMomentum {
 public:
  SgdMomentum(const Registry& registry, const OptimSettings& settings);

  void step(const Registry& registry, double lr) { step(registry, lr, lr); }
  void step(const Registry& registry, double lr, double predictor_lr);

  // Updates only parameters whose name starts with prefix; everything else
  // keeps its value, velocity and decay untouched (head-warmup phases).
  void step_prefix(const Registry& registry, double lr, const std::string& prefix);

 private:
  void apply(const ParamRef& p, std::vector<float>& vel, double lr);

  double momentum_;
  double weight_decay_;
  std::vector<std::vector<float>> velocity_;
  std::vector<bool> is_predictor_;
};

}  // namespace seqssl
