#include "font/model_select.hpp"

#include "font/kmeans.hpp"
#include "font/markov.hpp"

#include <cmath>
#include <limits>

namespace font {

namespace {

double penalize(InfoCriterion criterion, double loglik, double n_params, double n) {
  if (criterion == InfoCriterion::bic) return n_params * std::log(n) - 2.0 * loglik;
  return 2.0 * n_params - 2.0 * loglik;
}

// Classification likelihood of hard-assigned spherical Gaussians with a
// pooled variance: ll = sum_k n_k log(n_k/N) - (Np/2) log(2 pi s2) - Np/2.
double kmeans_loglik(const KMeansResult& fit, int n, int p) {
  const int K = fit.params.K;
  Eigen::VectorXi sizes = Eigen::VectorXi::Zero(K);
  for (int i = 0; i < n; ++i) sizes(fit.labels(i) - 1) += 1;
  const double s2 = std::max(fit.objective / (static_cast<double>(n) * p), 1e-12);
  double ll = -0.5 * n * p * (std::log(2.0 * M_PI * s2) + 1.0);
  for (int k = 0; k < K; ++k) {
    if (sizes(k) > 0) ll += sizes(k) * std::log(static_cast<double>(sizes(k)) / n);
  }
  return ll;
}

}  // namespace

int select_k_local(const VectorDataset& data, const std::vector<int>& k_range,
                   InfoCriterion criterion, const FitConfig& cfg) {
  if (k_range.empty()) throw ConfigInvalid("select_k_local: empty K range");
  const int n = data.n();
  const int p = data.dim();
  int best_k = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k : k_range) {
    const KMeansResult fit = kmeans_fit(data, k, cfg);
    const double n_params = static_cast<double>(k) * p + (k - 1) + 1;  // centers, proportions, variance
    const double score = penalize(criterion, kmeans_loglik(fit, n, p), n_params, n);
    if (score < best_score || (score == best_score && k < best_k)) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

int select_k_local(const SequenceDataset& data, int S, const std::vector<int>& k_range,
                   InfoCriterion criterion, const FitConfig& cfg) {
  if (k_range.empty()) throw ConfigInvalid("select_k_local: empty K range");
  const int n = data.n();
  int best_k = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k : k_range) {
    const MarkovFitResult fit = markov_mixture_fit(data, k, S, cfg);
    const double n_params =
        static_cast<double>(k) * (S - 1) + static_cast<double>(k) * S * (S - 1) + (k - 1);
    const double score = penalize(criterion, fit.log_likelihood, n_params, n);
    if (score < best_score || (score == best_score && k < best_k)) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace font
