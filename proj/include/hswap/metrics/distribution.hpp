#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "hswap/core/rng.hpp"
#include "hswap/image/ops.hpp"

namespace hswap::metrics {

// Image -> embedding vector. Model-dependent metrics (CSIM, FID, LPIPS) are
// computed over whatever provider is plugged in; the Frechet/cosine math is
// native.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const img::Image& image) const = 0;
  virtual std::string name() const = 0;
};

// Deterministic toy encoder: 8x8 downsample, fixed random projection, tanh.
class ToyEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit ToyEmbeddingProvider(int dim = 32, std::uint64_t seed = 4242) : dim_(dim) {
    Rng rng = Rng::seeded(seed);
    proj_.resize(static_cast<std::size_t>(dim_) * 192);
    for (double& v : proj_) v = rng.normal(0.0, 1.0 / std::sqrt(192.0));
  }

  std::vector<double> embed(const img::Image& image) const override {
    img::Image small = img::resize(image, 8, 8);
    std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
    for (int d = 0; d < dim_; ++d) {
      double acc = 0.0;
      for (int i = 0; i < 192; ++i)
        acc += proj_[static_cast<std::size_t>(d) * 192 + i] * small.data()[i];
      out[static_cast<std::size_t>(d)] = std::tanh(acc);
    }
    return out;
  }

  std::string name() const override { return "toy-embedding"; }

 private:
  int dim_;
  std::vector<double> proj_;
};

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  check_arg(a.size() == b.size() && !a.empty(), "cosine: size mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  return denom > 1e-12 ? dot / denom : 0.0;
}

// CSIM between two images under a provider.
inline double csim(const img::Image& a, const img::Image& b, const EmbeddingProvider& provider) {
  return cosine_similarity(provider.embed(a), provider.embed(b));
}

// Frechet distance between Gaussians fitted (population statistics) to two
// embedding sets: |mu1-mu2|^2 + Tr(S1 + S2 - 2 sqrtm(sqrtm(S1) S2 sqrtm(S1))).
inline double frechet_distance(const std::vector<std::vector<double>>& set_a,
                               const std::vector<std::vector<double>>& set_b) {
  check_arg(set_a.size() >= 2 && set_b.size() >= 2,
            "frechet: need at least two samples per set");
  const auto d = static_cast<Eigen::Index>(set_a[0].size());
  auto fit = [d](const std::vector<std::vector<double>>& set, Eigen::VectorXd& mu,
                 Eigen::MatrixXd& cov) {
    const auto n = static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = set[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    mu = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
    cov = (centered.transpose() * centered) / static_cast<double>(n);
    cov += 1e-10 * Eigen::MatrixXd::Identity(d, d);  // singular-covariance guard
  };
  Eigen::VectorXd mu1, mu2;
  Eigen::MatrixXd s1, s2;
  fit(set_a, mu1, s1);
  fit(set_b, mu2, s2);

  auto sqrtm = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
  };
  const Eigen::MatrixXd rs1 = sqrtm(s1);
  const Eigen::MatrixXd inner = sqrtm(rs1 * s2 * rs1);
  const double dist = (mu1 - mu2).squaredNorm() + (s1 + s2 - 2.0 * inner).trace();
  return std::max(0.0, dist);
}

inline double frechet_distance_images(const std::vector<img::Image>& set_a,
                                      const std::vector<img::Image>& set_b,
                                      const EmbeddingProvider& provider) {
  std::vector<std::vector<double>> ea, eb;
  ea.reserve(set_a.size());
  eb.reserve(set_b.size());
  for (const auto& im : set_a) ea.push_back(provider.embed(im));
  for (const auto& im : set_b) eb.push_back(provider.embed(im));
  return frechet_distance(ea, eb);
}

// Provider-space perceptual distance reported in the LPIPS column.
inline double lpips_like(const img::Image& a, const img::Image& b,
                         const EmbeddingProvider& provider) {
  auto ea = provider.embed(a);
  auto eb = provider.embed(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) acc += std::abs(ea[i] - eb[i]);
  return acc / static_cast<double>(ea.size());
}

}  // namespace hswap::metrics
