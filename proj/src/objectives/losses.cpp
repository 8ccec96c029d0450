#include "seqssl/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqssl {

namespace {

constexpr double kNormFloor = 1e-12;

// Row norms; zero-norm rows are an error rather than an epsilon patch, since
// a silent epsilon would mask upstream representation collapse.
std::vector<double> row_norms_checked(const Matrix64& m, const char* who) {
  std::vector<double> norms(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int k = 0; k < m.cols; ++k) s += m.at(i, k) * m.at(i, k);
    norms[i] = std::sqrt(s);
    require(std::isfinite(norms[i]), std::string(who) + ": non-finite row");
    require(norms[i] > kNormFloor, std::string(who) + ": zero-norm row (cosine undefined)");
  }
  return norms;
}

Matrix64 normalize_rows(const Matrix64& m, const std::vector<double>& norms) {
  Matrix64 out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int k = 0; k < m.cols; ++k) out.at(i, k) = m.at(i, k) / norms[i];
  return out;
}

// d cos / d raw row, given unit rows and the gradient w.r.t. the unit row:
// dz = (dhat - (dhat . zhat) zhat) / |z|
void unnormalize_grad_row(const double* dhat, const double* zhat, double norm, int d,
                          double* dz_out) {
  double dot = 0.0;
  for (int k = 0; k < d; ++k) dot += dhat[k] * zhat[k];
  for (int k = 0; k < d; ++k) dz_out[k] += (dhat[k] - dot * zhat[k]) / norm;
}

}  // namespace

NtXentResult nt_xent_loss(const Matrix64& projections, double temperature) {
  require(temperature > 0.0, "nt_xent: temperature must be > 0");
  require(projections.rows >= 2 && projections.rows % 2 == 0,
          "nt_xent: projections must have 2N rows, N >= 1");
  require(projections.cols >= 1, "nt_xent: dimension must be >= 1");
  require(all_finite(projections.v), "nt_xent: projections must be finite");

  const int m = projections.rows;  // 2N anchors
  const int d = projections.cols;
  const auto norms = row_norms_checked(projections, "nt_xent");
  const Matrix64 zh = normalize_rows(projections, norms);

  // similarity logits s(i,k) = cos(z_i, z_k) / tau
  Matrix64 sim(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      if (i == k) continue;
      double dot = 0.0;
      for (int t = 0; t < d; ++t) dot += zh.at(i, t) * zh.at(k, t);
      sim.at(i, k) = dot / temperature;
    }
  }

  // softmax over k != i per anchor; dL/ds(i,k) = (softmax - 1[k = positive]) / m
  double loss = 0.0;
  Matrix64 dsim(m, m);
  for (int i = 0; i < m; ++i) {
    const int j = i ^ 1;  // pair layout (2k, 2k+1)
    double max_s = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k)
      if (k != i) max_s = std::max(max_s, sim.at(i, k));
    double denom = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != i) denom += std::exp(sim.at(i, k) - max_s);
    loss += -(sim.at(i, j) - max_s) + std::log(denom);
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      const double p = std::exp(sim.at(i, k) - max_s) / denom;
      dsim.at(i, k) = (p - (k == j ? 1.0 : 0.0)) / m;
    }
  }
  loss /= m;

  // back through s = zh zh^T / tau, then through row normalization
  NtXentResult res;
  res.loss = loss;
  res.grad = Matrix64(m, d);
  Matrix64 dzh(m, d);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      if (i == k) continue;
      const double g = (dsim.at(i, k) + dsim.at(k, i)) / temperature;
      if (g == 0.0) continue;
      for (int t = 0; t < d; ++t) dzh.at(i, t) += g * zh.at(k, t);
    }
  }
  for (int i = 0; i < m; ++i) {
    unnormalize_grad_row(dzh.v.data() + static_cast<size_t>(i) * d,
                         zh.v.data() + static_cast<size_t>(i) * d, norms[i], d,
                         res.grad.v.data() + static_cast<size_t>(i) * d);
  }
  return res;
}

SimSiamResult simsiam_loss(const Matrix64& p1, const Matrix64& p2, const Matrix64& z1,
                           const Matrix64& z2) {
  const int n = p1.rows;
  const int d = p1.cols;
  require(n >= 1 && d >= 1, "simsiam: batch must be nonempty");
  for (const auto* m : {&p2, &z1, &z2}) {
    require(m->rows == n && m->cols == d, "simsiam: shape mismatch");
  }
  for (const auto* m : {&p1, &p2, &z1, &z2}) {
    require(all_finite(m->v), "simsiam: inputs must be finite");
  }

  const auto np1 = row_norms_checked(p1, "simsiam");
  const auto np2 = row_norms_checked(p2, "simsiam");
  const auto nz1 = row_norms_checked(z1, "simsiam");
  const auto nz2 = row_norms_checked(z2, "simsiam");
  const Matrix64 hp1 = normalize_rows(p1, np1);
  const Matrix64 hp2 = normalize_rows(p2, np2);
  const Matrix64 hz1 = normalize_rows(z1, nz1);
  const Matrix64 hz2 = normalize_rows(z2, nz2);

  SimSiamResult res;
  res.dp1 = Matrix64(n, d);
  res.dp2 = Matrix64(n, d);
  res.dz1 = Matrix64(n, d);  // stop-gradient: stays exactly zero
  res.dz2 = Matrix64(n, d);

  double loss = 0.0;
  std::vector<double> dhat(d);
  for (int i = 0; i < n; ++i) {
    double cos12 = 0.0, cos21 = 0.0;
    for (int k = 0; k < d; ++k) cos12 += hp1.at(i, k) * hz2.at(i, k);
    for (int k = 0; k < d; ++k) cos21 += hp2.at(i, k) * hz1.at(i, k);
    loss += -0.5 * (cos12 + cos21) / n;

    // d/d p1_i of -cos(p1_i, z2_i) / (2n), z2 constant
    for (int k = 0; k < d; ++k) dhat[k] = -0.5 * hz2.at(i, k) / n;
    unnormalize_grad_row(dhat.data(), hp1.v.data() + static_cast<size_t>(i) * d, np1[i], d,
                         res.dp1.v.data() + static_cast<size_t>(i) * d);
    for (int k = 0; k < d; ++k) dhat[k] = -0.5 * hz1.at(i, k) / n;
    unnormalize_grad_row(dhat.data(), hp2.v.data() + static_cast<size_t>(i) * d, np2[i], d,
                         res.dp2.v.data() + static_cast<size_t>(i) * d);
  }
  res.loss = loss;
  return res;
}

CrossEntropyResult cross_entropy_9way(const Matrix64& logits, const std::vector<int>& labels) {
  require(logits.cols == 9, "cross_entropy: logits must have 9 columns");
  require(logits.rows >= 1, "cross_entropy: batch must be nonempty");
  require(labels.size() == static_cast<size_t>(logits.rows),
          "cross_entropy: labels must match batch");
  require(all_finite(logits.v), "cross_entropy: logits must be finite");
  for (int y : labels) require(y >= 0 && y < 9, "cross_entropy: label out of range");

  const int b = logits.rows;
  CrossEntropyResult res;
  res.dlogits = Matrix64(b, 9);
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    double max_l = logits.at(i, 0);
    for (int k = 1; k < 9; ++k) max_l = std::max(max_l, logits.at(i, k));
    double denom = 0.0;
    for (int k = 0; k < 9; ++k) denom += std::exp(logits.at(i, k) - max_l);
    loss += -(logits.at(i, labels[i]) - max_l) + std::log(denom);
    for (int k = 0; k < 9; ++k) {
      const double p = std::exp(logits.at(i, k) - max_l) / denom;
      res.dlogits.at(i, k) = (p - (k == labels[i] ? 1.0 : 0.0)) / b;
    }
  }
  res.loss = loss / b;
  return res;
}

}  // namespace seqssl
