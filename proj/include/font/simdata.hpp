#pragma once

#include "font/types.hpp"

#include <cstdint>
#include <string>

namespace font {

enum class Regime { homogeneous, imbalanced, contaminated };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Gaussian multi-site study generator. Shared cluster means across sites;
/// per-site class proportions are equal (homogeneous) or Dirichlet(alpha)
/// draws. The contaminated regime appends ceil(outlier_data_frac * n_m)
/// unlabeled outlier rows at ceil(outlier_site_frac * M) sites, each row
/// centered at a fresh mean with entries uniform on the outlier range and
/// the same covariance as the signal.
struct SimulationConfig {
  int M = 10;
  int K = 5;
  int p = 10;
  double sigma2 = 0.05;  // per-coordinate variance
  int n_min = 50;
  int n_max = 500;
  Regime regime = Regime::homogeneous;
  double dirichlet_alpha = 1.0;
  double outlier_site_frac = 0.20;
  double outlier_data_frac = 0.20;
  double outlier_mean_min = -5.0;
  double outlier_mean_max = 5.0;
  bool mu_interval = false;  // false: mu entries from {-1,+1}; true: uniform on [-1,1]
  std::uint64_t seed = 0;

  void validate() const;
};

MultiSiteDataset gen_gaussian_sites(const SimulationConfig& cfg);

/// Mixture-Markov multi-site generator. Component k starts at state k and
/// follows a shift-by-k cyclic transition structure, blended with the
/// uniform chain: separation 1 gives deterministic, fully distinct chains.
struct MarkovSimConfig {
  int M = 2;
  int K = 4;
  int S = 5;
  int n_min = 100;
  int n_max = 200;
  int len_min = 8;
  int len_max = 20;
  double separation = 0.8;  // in (0, 1]
  double dirichlet_alpha = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

MultiSiteDataset gen_markov_sites(const MarkovSimConfig& cfg);

}  // namespace font
