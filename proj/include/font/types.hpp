#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace font {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster memberships are 1-based: entries lie in [1, K].
using LabelVector = Eigen::VectorXi;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewPoints : Error { using Error::Error; };
struct TooFewSequences : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidState : Error { using Error::Error; };
struct SubjectCountMismatch : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };
struct AllDegenerate : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct TooFewModels : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct ProtocolViolation : Error { using Error::Error; };
struct TruthRequired : Error { using Error::Error; };
struct OracleGuard : Error { using Error::Error; };

enum class ModelKind { kmeans, markov_mixture };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Shared fit controls for the local clustering backends.
struct FitConfig {
  int restarts = 10;
  int max_iter = 300;
  double tol = 1e-6;         // relative objective change
  double smoothing = 1e-6;   // probability smoothing for Markov models
  std::uint64_t seed = 0;
};

/// A fitted local clustering model, reduced to what travels between sites:
/// K per-cluster parameter vectors plus model-kind metadata. For k-means,
/// beta_k is the cluster center in R^p. For a Markov mixture, beta_k is the
/// initial-state distribution u (length S) followed by the row-major
/// flattened transition matrix T (length S*S).
struct ClusterModelParams {
  ModelKind kind = ModelKind::kmeans;
  int K = 0;
  Matrix betas;    // K x L, row k = beta_k
  Vector mixing;   // Markov only: K class proportions (empty otherwise)
  int S = 0;       // Markov only: state count

  int beta_length() const { return static_cast<int>(betas.cols()); }

  Matrix transition(int k) const;  // S x S copy reconstructed from beta_k
  Vector initial(int k) const;     // length-S copy of u_k

  /// Throws on violated structural invariants (shape, simplex constraints).
  void validate() const;
};

struct VectorDataset {
  Matrix rows;             // N_m x p
  int site_id = 0;
  LabelVector true_labels; // empty if unknown; 0 marks subjects with no class
  Eigen::Array<bool, Eigen::Dynamic, 1> outlier_mask;  // empty if none
  int parent_site = -1;    // provenance for pseudo-sites
  int replica = -1;

  int n() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

struct SequenceDataset {
  std::vector<std::vector<int>> sequences;  // symbols in [1, S], length >= 2
  int site_id = 0;
  LabelVector true_labels;
  int parent_site = -1;
  int replica = -1;

  int n() const { return static_cast<int>(sequences.size()); }
};

/// Throws InvalidState when a symbol falls outside [1, S] or a sequence is
/// shorter than 2.
void validate_sequences(const SequenceDataset& data, int S);

/// Multi-site study: per-site data, ground truth when simulated, and seed
/// provenance.
struct MultiSiteDataset {
  ModelKind kind = ModelKind::kmeans;
  std::vector<VectorDataset> vector_sites;
  std::vector<SequenceDataset> sequence_sites;
  Matrix true_mus;                 // K x p (vector data), empty otherwise
  ClusterModelParams true_markov;  // generating chains (sequence data)
  std::uint64_t seed = 0;

  int n_sites() const {
    return kind == ModelKind::kmeans ? static_cast<int>(vector_sites.size())
                                     : static_cast<int>(sequence_sites.size());
  }
  int n_total() const;

  /// Concatenated per-site truth in site order (0 where unknown/outlier).
  LabelVector all_true_labels() const;
  /// Concatenated outlier mask (false where none recorded).
  Eigen::Array<bool, Eigen::Dynamic, 1> all_outlier_mask() const;
};

/// Drops positions where mask is true or either label is 0; used to exclude
/// unassigned outliers from accuracy metrics.
void filter_for_ari(const LabelVector& a, const LabelVector& b,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask,
                    LabelVector& a_out, LabelVector& b_out);

}  // namespace font
