#pragma once

#include "font/types.hpp"

#include <string>
#include <vector>

namespace font {

enum class Method { font, local, consensus, kfed, pooled, best_local };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// pooled and best_local need information a federation cannot share.
bool is_oracle(Method m);

struct BenchmarkResult {
  Method method = Method::local;
  LabelVector labels;  // N subjects in site order (local: per-site labelings concatenated)
  std::vector<double> per_site_ari;  // local only
  int selected_site = -1;            // best_local only
  double ari = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
  bool oracle = false;
};

/// Per-site K-means; accuracy is the unweighted mean of per-site ARIs.
BenchmarkResult run_local(const MultiSiteDataset& sites, int K, const FitConfig& cfg);

/// Scaled top-K spectral coordinates U of the average connectivity matrix
/// S_bar (eigenvalues floored at zero), computed through the one-hot Gram
/// matrix so S_bar itself is never materialized; U U^T is the best rank-K
/// approximation of S_bar.
Matrix consensus_embedding(const Eigen::MatrixXi& label_matrix, int K);

/// Equal-weight consensus clustering: average connectivity matrix, spectral
/// factorization, K-means on the scaled eigenvector rows. label_matrix is
/// N x M with 1-based entries.
BenchmarkResult run_consensus(const Eigen::MatrixXi& label_matrix, int K, const FitConfig& cfg,
                              const LabelVector& truth = {},
                              const Eigen::Array<bool, Eigen::Dynamic, 1>& mask = {});

/// Landmark baseline: per-site K-means with k_local centers, K-means over
/// the pooled centers, nearest-global-center assignment for every subject.
BenchmarkResult run_kfed(const MultiSiteDataset& sites, int K, int k_local, const FitConfig& cfg);

/// Oracle: K-means on the pooled rows of all sites.
BenchmarkResult run_pooled(const MultiSiteDataset& sites, int K, const FitConfig& cfg);

/// Oracle: the site model with the best global ARI, applied to all subjects.
BenchmarkResult run_best_local(const MultiSiteDataset& sites, int K, const LabelVector& truth,
                               const FitConfig& cfg);

}  // namespace font
