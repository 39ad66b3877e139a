#pragma once

#include "font/types.hpp"

#include <vector>

namespace font {

enum class InfoCriterion { bic, aic };

/// Fits each K in k_range and returns the K minimizing the criterion; ties
/// resolve to the smallest K. K-means models are scored under a spherical
/// Gaussian with pooled variance; Markov mixtures use the observed-data
/// log-likelihood with K(S-1) + K*S*(S-1) + (K-1) free parameters.
int select_k_local(const VectorDataset& data, const std::vector<int>& k_range,
                   InfoCriterion criterion, const FitConfig& cfg);

int select_k_local(const SequenceDataset& data, int S, const std::vector<int>& k_range,
                   InfoCriterion criterion, const FitConfig& cfg);

}  // namespace font
