#pragma once

#include "font/types.hpp"

#include <vector>

namespace font {

struct KMeansResult {
  ClusterModelParams params;
  LabelVector labels;   // 1-based, labels(i) == kmeans_assign(params, row i)
  double objective = 0.0;
  std::vector<double> objective_trace;  // per-iteration, winning restart
};

/// Nearest-center rule: argmin_k ||x - beta_k||^2, ties to the smallest k.
/// Returns a 1-based label.
int kmeans_assign(const ClusterModelParams& params, const Eigen::Ref<const Vector>& x);

/// Lloyd iterations over best-of-restarts k-means++ initializations.
/// Empty clusters are repaired by promoting the farthest point to a
/// singleton center; the objective is non-increasing across iterations
/// within each restart (checked, Error on violation).
KMeansResult kmeans_fit(const VectorDataset& data, int K, const FitConfig& cfg);

/// Weighted variant on raw points (weights >= 0 act as multiplicities).
/// Used by the consensus-distance clustering, where a point stands for all
/// subjects sharing a label profile. Accepts fewer distinct points than K;
/// surplus clusters stay empty and labels remain valid.
struct WeightedKMeansResult {
  Matrix centers;  // K x dim
  LabelVector labels;
  double objective = 0.0;
  std::vector<double> objective_trace;
};

WeightedKMeansResult weighted_kmeans(const Eigen::Ref<const Matrix>& points,
                                     const Eigen::Ref<const Vector>& weights, int K,
                                     const FitConfig& cfg);

}  // namespace font
