#pragma once

#include "font/types.hpp"

#include <cstdint>
#include <vector>

namespace font {

/// Contingency counts between two labelings, with marginals.
struct ContingencyTable {
  Eigen::MatrixXi counts;  // K_a x K_b
  Eigen::VectorXi row_marginals;
  Eigen::VectorXi col_marginals;
  int n = 0;
};

ContingencyTable contingency_table(const LabelVector& a, const LabelVector& b);

/// Reduced fraction, den > 0.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

/// Adjusted Rand index under the permutation model. Both-degenerate inputs
/// (identical partitions whose pair-count denominator vanishes, e.g. two
/// single-cluster labelings) are defined as 1; a single-cluster partition
/// against a non-degenerate one evaluates to 0 through the formula itself.
double adjusted_rand_index(const LabelVector& a, const LabelVector& b);

/// Same index as an exact reduced fraction (integer arithmetic throughout).
Fraction adjusted_rand_index_exact(const LabelVector& a, const LabelVector& b);

struct Correlation {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;  // false when either input is constant
};

/// Pearson correlation between model weights and per-model accuracy.
/// Requires M >= 3.
Correlation weight_alignment(const Vector& weights, const Vector& per_model_ari);

/// Per-cluster empirical initial-state and transition estimates.
struct EmpiricalMarkovStats {
  int K = 0;
  int S = 0;
  Matrix initial;                  // K x S; row k = empirical u for cluster k
  std::vector<Matrix> transition;  // K matrices, S x S, rows renormalized
  std::vector<bool> empty_cluster;               // no member sequences
  std::vector<Eigen::VectorXi> unseen_row_flag;  // 1 where a row had no counts
};

EmpiricalMarkovStats empirical_markov_stats(const SequenceDataset& seqs,
                                            const LabelVector& labels, int K, int S);

struct TransitionDivergence {
  double mean_frob_T = 0.0;  // mean over clusters of ||T_A^k - T_B^k||_F
  double mean_norm_u = 0.0;  // mean over clusters of ||u_A^k - u_B^k||_2
};

/// Clusters must be index-matched by the caller (shared consensus labels, or
/// match_clusters_by_overlap for independently fitted models).
TransitionDivergence transition_divergence(const EmpiricalMarkovStats& a,
                                           const EmpiricalMarkovStats& b);

/// Maximum-overlap matching between cluster ids of two labelings over the
/// same subjects. Returns perm of size K with perm[k] = 0-based cluster of b
/// matched to 0-based cluster k of a. Exact search; K <= 10.
std::vector<int> match_clusters_by_overlap(const LabelVector& a, const LabelVector& b, int K);

}  // namespace font
