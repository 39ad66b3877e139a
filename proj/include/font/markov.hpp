#pragma once

#include "font/types.hpp"

#include <vector>

namespace font {

struct MarkovFitResult {
  ClusterModelParams params;  // kind = markov_mixture, probabilities smoothed
  LabelVector labels;         // posterior argmax under the returned params
  double log_likelihood = 0.0;          // observed-data, best restart
  std::vector<double> loglik_trace;     // per EM iteration, winning restart
  std::vector<int> degenerate_components;  // posterior mass below one subject
};

/// Log-likelihood of one sequence under component k of a Markov mixture:
/// log u[x_1] + sum_t log T[x_t, x_{t+1}]. Returns -inf on zero-probability
/// events. Throws InvalidState on symbols outside [1, S].
double markov_sequence_loglik(const ClusterModelParams& params, int k,
                              const std::vector<int>& seq);

/// Posterior argmax over components of mixing_k * P(seq | k), evaluated in
/// log space; ties go to the smallest component. Returns a 1-based label.
int markov_assign(const ClusterModelParams& params, const std::vector<int>& seq);

/// EM for the mixture of Markov chains. Random Dirichlet responsibilities
/// initialize each restart; observed-data log-likelihood is non-decreasing
/// per iteration (checked with 1e-8 slack, Error on violation). The winning
/// restart's probabilities receive additive smoothing (cfg.smoothing) and
/// renormalization before labels are drawn, so broadcast models never assign
/// -inf likelihood to unseen transitions.
MarkovFitResult markov_mixture_fit(const SequenceDataset& data, int K, int S,
                                   const FitConfig& cfg);

}  // namespace font
