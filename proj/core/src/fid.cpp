#include "atelier/fid.hpp"

#include <cmath>

#include "atelier/error.hpp"

namespace atelier::eval {
namespace {

// Symmetric PSD square root with clamping of small negative eigenvalues.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw Error(std::string(what) + ": eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -kEigenClampTolerance * scale) {
      throw Error(std::string(what) + ": eigenvalue " + std::to_string(ev[i]) +
                  " is too negative for a covariance product");
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FeatureSet::FeatureSet(Eigen::MatrixXd features, std::string extractor_id)
    : features_(std::move(features)), extractor_id_(std::move(extractor_id)) {
  if (features_.rows() < 2) throw Error("a feature set needs at least 2 samples");
  if (features_.cols() < 1) throw Error("a feature set needs at least 1 dimension");
  if (!features_.allFinite()) throw Error("feature set contains NaN or Inf");
}

GaussianFit fit_gaussian(const FeatureSet& set) {
  const auto& x = set.features();
  GaussianFit g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
  return g;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  if (a.mean.size() != b.mean.size()) throw Error("feature dimension mismatch");
  // Tr((S_a S_b)^{1/2}) = Tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}); the inner product is symmetric.
  const Eigen::MatrixXd root_a = sqrt_psd(a.cov, "covariance");
  const Eigen::MatrixXd inner = root_a * b.cov * root_a;
  const double tr_cross = sqrt_psd(inner, "covariance product").trace();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_cross;
  if (!std::isfinite(d)) throw Error("fid is not finite");
  return d;
}

double fid(const FeatureSet& a, const FeatureSet& b, const LogSink& log) {
  if (a.extractor_id() != b.extractor_id()) {
    throw Error("extractor mismatch: " + a.extractor_id() + " vs " + b.extractor_id());
  }
  if (a.dim() != b.dim()) throw Error("feature dimension mismatch");
  for (const FeatureSet* s : {&a, &b}) {
    if (s->count() < s->dim() + 1) {
      log("fid: only " + std::to_string(s->count()) + " samples for " +
          std::to_string(s->dim()) + "-dimensional features; covariance is rank deficient");
    }
  }
  return frechet_distance(fit_gaussian(a), fit_gaussian(b));
}

}  // namespace atelier::eval
