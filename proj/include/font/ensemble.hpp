#pragma once

#include "font/types.hpp"

#include <functional>
#include <vector>

namespace font {

/// Distance between two parameter vectors; defaults to Euclidean.
using DistanceMetric =
    std::function<double(const Eigen::Ref<const Vector>&, const Eigen::Ref<const Vector>&)>;

double euclidean_metric(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Compressed subject-by-subject distance matrix of one model: the label
/// column plus the K x K inter-cluster distance table. Expanding gives
/// D_ij = table(label_i - 1, label_j - 1), which is invariant to how the
/// model numbered its clusters.
struct DistanceRep {
  int model_id = 0;
  LabelVector labels;       // N, entries in [1, K]
  Matrix table;             // K x K symmetric, zero diagonal, nonnegative
  Eigen::VectorXi counts;   // cluster sizes n_k
  double frob_norm = 0.0;   // ||D||_F, from counts and table
  bool degenerate = false;  // frob_norm == 0 (single-cluster prediction)

  int n() const { return static_cast<int>(labels.size()); }
  /// Dense N x N expansion (test/oracle use; quadratic in N).
  Matrix dense() const;
};

DistanceRep build_distance_rep(const ClusterModelParams& params, const LabelVector& labels,
                               const DistanceMetric& metric = euclidean_metric);

/// <vec(D_a), vec(D_b)> via the label contingency identity; never
/// materializes N^2 vectors. Throws SubjectCountMismatch.
double rep_inner(const DistanceRep& a, const DistanceRep& b);

/// Cosine similarity between vectorized distance matrices.
double rep_cosine(const DistanceRep& a, const DistanceRep& b);

/// Pairwise cosine agreement matrix G (unit diagonal). Inputs must not be
/// degenerate; the caller filters those out.
Matrix agreement_matrix(const std::vector<DistanceRep>& reps);

struct AgreementWeights {
  Matrix G;
  Vector leading_eigvec;  // unit eigenvector of the largest eigenvalue
  Vector weights;         // entrywise |leading_eigvec|, unit L2 norm
  bool positive_G = true; // all entries > 0: leading eigenvector single-signed
};

/// Leading eigenvector by power iteration (residual 1e-12, at most 10,000
/// steps) with a dense symmetric-eigensolver fallback for M <= 64.
AgreementWeights spectral_weights(const Matrix& G);

/// Weighted consensus distance, stored over distinct label profiles. Two
/// subjects with identical labels under every model share a profile and are
/// at consensus distance zero.
struct ConsensusDistance {
  Eigen::MatrixXi profiles;        // P x M distinct label profiles
  Eigen::VectorXi multiplicities;  // subjects per profile
  Eigen::VectorXi subject_index;   // N, 0-based profile of each subject
  Matrix rows;                     // P x P consensus distances between profiles

  int n() const { return static_cast<int>(subject_index.size()); }
  int n_profiles() const { return static_cast<int>(profiles.rows()); }
  Matrix dense() const;  // N x N expansion (test/oracle use)
};

/// D_tilde = sum_m w_m D_m / ||D_m||_F. Degenerate reps get weight zero and
/// the remaining weights are renormalized; throws AllDegenerate when none
/// survive.
ConsensusDistance ensemble_distance(const std::vector<DistanceRep>& reps, const Vector& weights);

/// K-means on the rows of the consensus distance, run over distinct profiles
/// weighted by multiplicity and mapped back to subjects. When there are at
/// most K distinct profiles each becomes its own cluster.
LabelVector final_cluster(const ConsensusDistance& cd, int K, const FitConfig& cfg);

/// Mode of locally selected cluster counts; ties to the smallest value.
int select_k_majority(const std::vector<int>& local_ks);

}  // namespace font
