#include "seqssl/report/project2d.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "seqssl/rng.hpp"

namespace seqssl {

namespace {

EmbeddingSet project_pca(const EmbeddingSet& set) {
  const int m = set.vectors.rows;
  const int d = set.vectors.cols;
  Eigen::MatrixXd x(m, d);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) x(i, k) = set.vectors.at(i, k);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::MatrixXd cov = (x.transpose() * x) / std::max(1, m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, "pca: eigendecomposition failed");

  EmbeddingSet out = set;
  out.method = ProjectionMethod::kPca;
  out.coords2d.resize(m, 2);
  for (int comp = 0; comp < 2; ++comp) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - comp);  // descending variance
    // sign convention: the largest-magnitude loading is positive
    int arg = 0;
    for (int k = 1; k < d; ++k) {
      if (std::fabs(v(k)) > std::fabs(v(arg))) arg = k;
    }
    if (v(arg) < 0.0) v = -v;
    const Eigen::VectorXd proj = x * v;
    for (int i = 0; i < m; ++i) out.coords2d.at(i, comp) = static_cast<float>(proj(i));
  }
  return out;
}

}  // namespace

EmbeddingSet project_2d_tsne(const EmbeddingSet& set, uint64_t seed,
                             const TsneOptions& options) {
  const int m = set.vectors.rows;
  const int d = set.vectors.cols;
  require(m >= 2, "project_2d: need at least 2 points");

  // pairwise squared distances
  Eigen::MatrixXd dist2(m, m);
  for (int i = 0; i < m; ++i) {
    dist2(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = set.vectors.at(i, k) - set.vectors.at(j, k);
        s += diff * diff;
      }
      dist2(i, j) = s;
      dist2(j, i) = s;
    }
  }

  // per-point bandwidths by binary search on perplexity
  const double target_entropy = std::log(std::min<double>(options.perplexity, m - 1));
  Eigen::MatrixXd p(m, m);
  p.setZero();
  for (int i = 0; i < m; ++i) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd row(m);
    for (int iter = 0; iter < 50; ++iter) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * dist2(i, j));
        sum += row(j);
      }
      double entropy = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == i || row(j) <= 0.0) continue;
        const double pj = row(j) / sum;
        entropy -= pj * std::log(pj);
      }
      if (std::fabs(entropy - target_entropy) < 1e-5) break;
      if (entropy > target_entropy) {
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = 0.5 * (beta + beta_lo);
      }
    }
    double sum = row.sum();
    if (sum <= 0.0) sum = 1.0;
    for (int j = 0; j < m; ++j) p(i, j) = row(j) / sum;
  }
  // symmetrize
  Eigen::MatrixXd pj = (p + p.transpose()) / (2.0 * m);
  const double p_floor = 1e-12;
  pj = pj.cwiseMax(p_floor);

  // seeded init, plain gradient descent with momentum
  Rng rng(mix64(seed, 0x74736e65ULL));
  Eigen::MatrixXd y(m, 2), vel(m, 2);
  vel.setZero();
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < 2; ++k) y(i, k) = 1e-2 * rng.normal();

  Eigen::MatrixXd q(m, m), grad(m, 2);
  for (int iter = 0; iter < options.iterations; ++iter) {
    const double exaggeration = iter < 100 ? 4.0 : 1.0;
    double qsum = 0.0;
    for (int i = 0; i < m; ++i) {
      q(i, i) = 0.0;
      for (int j = i + 1; j < m; ++j) {
        const double dy0 = y(i, 0) - y(j, 0);
        const double dy1 = y(i, 1) - y(j, 1);
        const double t = 1.0 / (1.0 + dy0 * dy0 + dy1 * dy1);
        q(i, j) = t;
        q(j, i) = t;
        qsum += 2.0 * t;
      }
    }
    grad.setZero();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const double qij = std::max(q(i, j) / qsum, p_floor);
        const double mult = 4.0 * (exaggeration * pj(i, j) - qij) * q(i, j);
        grad(i, 0) += mult * (y(i, 0) - y(j, 0));
        grad(i, 1) += mult * (y(i, 1) - y(j, 1));
      }
    }
    const double momentum = iter < 250 ? 0.5 : 0.8;
    vel = momentum * vel - options.learning_rate * grad;
    y += vel;
    y.rowwise() -= y.colwise().mean();  // keep centered
  }

  EmbeddingSet out = set;
  out.method = ProjectionMethod::kTsne;
  out.coords2d.resize(m, 2);
  for (int i = 0; i < m; ++i) {
    out.coords2d.at(i, 0) = static_cast<float>(y(i, 0));
    out.coords2d.at(i, 1) = static_cast<float>(y(i, 1));
  }
  return out;
}

EmbeddingSet project_2d(const EmbeddingSet& set, ProjectionMethod method, uint64_t seed) {
  require(set.vectors.rows >= 2, "project_2d: need at least 2 points");
  require(set.vectors.cols >= 1, "project_2d: empty vectors");
  if (method == ProjectionMethod::kPca) return project_pca(set);
  return project_2d_tsne(set, seed, TsneOptions{});
}

}  // namespace seqssl
