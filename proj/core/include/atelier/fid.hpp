#pragma once

#include <string>

#include <Eigen/Dense>

#include "atelier/logging.hpp"

namespace atelier::eval {

/// N x D matrix of per-image features from one extractor. N >= 2, all finite.
class FeatureSet {
 public:
  FeatureSet(Eigen::MatrixXd features, std::string extractor_id);

  const Eigen::MatrixXd& features() const { return features_; }
  const std::string& extractor_id() const { return extractor_id_; }
  Eigen::Index count() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }

 private:
  Eigen::MatrixXd features_;
  std::string extractor_id_;
};

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased (N - 1) estimator
};

GaussianFit fit_gaussian(const FeatureSet& set);

/// Eigenvalues below this (relative to the largest magnitude) abort the
/// matrix square root; values between it and zero are clamped to zero.
inline constexpr double kEigenClampTolerance = 1e-6;

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

/// Frechet distance between Gaussian fits of two feature sets. Warns through
/// `log` when either set has fewer than D + 1 samples.
double fid(const FeatureSet& a, const FeatureSet& b, const LogSink& log = log_to_stderr);

}  // namespace atelier::eval
