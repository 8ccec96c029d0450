// Independent reference implementations used to pin expected values. These
// deliberately avoid the library's code paths: plain loops, direct softmax,
// no shared helpers beyond the container types.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "seqssl/objectives/losses.hpp"

namespace oracle {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<double> row(const seqssl::Matrix64& m, int i) {
  std::vector<double> out(m.cols);
  for (int k = 0; k < m.cols; ++k) out[k] = m.at(i, k);
  return out;
}

// Brute-force normalized-temperature cross entropy: enumerates every
// similarity term and evaluates the softmax ratio directly.
inline double nt_xent_brute_force(const seqssl::Matrix64& z, double tau) {
  const int m = z.rows;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const int j = (i % 2 == 0) ? i + 1 : i - 1;
    const double pos = std::exp(cosine(row(z, i), row(z, j)) / tau);
    double denom = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      denom += std::exp(cosine(row(z, i), row(z, k)) / tau);
    }
    total += -std::log(pos / denom);
  }
  return total / m;
}

// Direct normalized-dot-product evaluation of the symmetric stop-gradient
// loss.
inline double simsiam_direct(const seqssl::Matrix64& p1, const seqssl::Matrix64& p2,
                             const seqssl::Matrix64& z1, const seqssl::Matrix64& z2) {
  const int n = p1.rows;
  double d12 = 0.0, d21 = 0.0;
  for (int i = 0; i < n; ++i) {
    d12 += -cosine(row(p1, i), row(z2, i));
    d21 += -cosine(row(p2, i), row(z1, i));
  }
  return 0.5 * d12 / n + 0.5 * d21 / n;
}

// Direct softmax cross entropy without max subtraction.
inline double cross_entropy_direct(const seqssl::Matrix64& logits,
                                   const std::vector<int>& labels) {
  double total = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    double denom = 0.0;
    for (int k = 0; k < logits.cols; ++k) denom += std::exp(logits.at(i, k));
    total += -std::log(std::exp(logits.at(i, labels[i])) / denom);
  }
  return total / logits.rows;
}

// Central finite differences in float64.
inline std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Max elementwise deviation relative to the gradient scale.
inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, max_abs = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    scale = std::max({scale, std::fabs(a[i]), std::fabs(b[i])});
    max_abs = std::max(max_abs, std::fabs(a[i] - b[i]));
  }
  return max_abs / (scale + 1e-300);
}

}  // namespace oracle
