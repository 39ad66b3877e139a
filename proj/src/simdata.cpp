#include "font/simdata.hpp"

#include "font/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace font {

namespace {

// Stream keys, kept apart so regimes sharing a master seed share the draws
// they have in common (the contaminated run reuses the imbalanced base data).
constexpr std::uint64_t kStudyKey = 0x01;
constexpr std::uint64_t kSiteBaseKey = 0x02;
constexpr std::uint64_t kSiteOutlierKey = 0x03;
constexpr std::uint64_t kOutlierPickKey = 0x04;

int ceil_frac(double frac, int n) {
  return static_cast<int>(std::ceil(frac * static_cast<double>(n)));
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::homogeneous: return "homogeneous";
    case Regime::imbalanced: return "imbalanced";
    case Regime::contaminated: return "contaminated";
  }
  return "homogeneous";
}

Regime regime_from_string(const std::string& s) {
  if (s == "homogeneous") return Regime::homogeneous;
  if (s == "imbalanced") return Regime::imbalanced;
  if (s == "contaminated") return Regime::contaminated;
  throw ConfigInvalid("unknown regime: " + s);
}

void SimulationConfig::validate() const {
  if (M < 1 || K < 1 || p < 1) throw ConfigInvalid("simulation: M, K, p must be positive");
  if (n_min < K || n_max < n_min) throw ConfigInvalid("simulation: need K <= n_min <= n_max");
  if (sigma2 <= 0.0) throw ConfigInvalid("simulation: sigma2 must be positive");
  if (dirichlet_alpha <= 0.0) throw ConfigInvalid("simulation: dirichlet_alpha must be positive");
  auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!frac_ok(outlier_site_frac) || !frac_ok(outlier_data_frac)) {
    throw ConfigInvalid("simulation: fractions must lie in [0, 1]");
  }
  if (outlier_mean_max < outlier_mean_min) throw ConfigInvalid("simulation: bad outlier range");
}

MultiSiteDataset gen_gaussian_sites(const SimulationConfig& cfg) {
  cfg.validate();
  const double sigma = std::sqrt(cfg.sigma2);

  MultiSiteDataset ds;
  ds.kind = ModelKind::kmeans;
  ds.seed = cfg.seed;

  Rng study = Rng::stream(cfg.seed, {kStudyKey});
  ds.true_mus = Matrix(cfg.K, cfg.p);
  for (int k = 0; k < cfg.K; ++k) {
    for (int j = 0; j < cfg.p; ++j) {
      ds.true_mus(k, j) = cfg.mu_interval ? study.uniform(-1.0, 1.0)
                                          : (study.uniform() < 0.5 ? -1.0 : 1.0);
    }
  }
  std::vector<int> sizes(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    sizes[m] = static_cast<int>(study.uniform_int(cfg.n_min, cfg.n_max));
  }

  // Contaminated sites, drawn from their own stream so the base data of a
  // matched-seed imbalanced run stays identical.
  std::vector<bool> contaminated(cfg.M, false);
  if (cfg.regime == Regime::contaminated) {
    Rng pick = Rng::stream(cfg.seed, {kOutlierPickKey});
    const int n_bad = std::min(cfg.M, ceil_frac(cfg.outlier_site_frac, cfg.M));
    std::vector<int> order(cfg.M);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < n_bad; ++i) {  // partial Fisher-Yates
      const int j = static_cast<int>(pick.uniform_int(i, cfg.M - 1));
      std::swap(order[i], order[j]);
      contaminated[order[i]] = true;
    }
  }

  for (int m = 0; m < cfg.M; ++m) {
    Rng rng = Rng::stream(cfg.seed, {kSiteBaseKey, static_cast<std::uint64_t>(m)});
    const int n = sizes[m];
    Vector props = cfg.regime == Regime::homogeneous
                       ? Vector::Constant(cfg.K, 1.0 / cfg.K)
                       : rng.dirichlet(cfg.K, cfg.dirichlet_alpha);

    const int n_out = contaminated[m] ? ceil_frac(cfg.outlier_data_frac, n) : 0;
    VectorDataset site;
    site.site_id = m;
    site.rows = Matrix(n + n_out, cfg.p);
    site.true_labels = LabelVector::Zero(n + n_out);
    site.outlier_mask = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n + n_out, false);

    for (int i = 0; i < n; ++i) {
      const int k = rng.categorical(props);
      site.true_labels(i) = k + 1;
      for (int j = 0; j < cfg.p; ++j) {
        site.rows(i, j) = ds.true_mus(k, j) + sigma * rng.normal();
      }
    }
    if (n_out > 0) {
      Rng orng = Rng::stream(cfg.seed, {kSiteOutlierKey, static_cast<std::uint64_t>(m)});
      for (int i = n; i < n + n_out; ++i) {
        site.outlier_mask(i) = true;  // no class: excluded from accuracy metrics
        for (int j = 0; j < cfg.p; ++j) {
          site.rows(i, j) =
              orng.uniform(cfg.outlier_mean_min, cfg.outlier_mean_max) + sigma * orng.normal();
        }
      }
    }
    ds.vector_sites.push_back(std::move(site));
  }
  return ds;
}

void MarkovSimConfig::validate() const {
  if (M < 1 || K < 1 || S < 2) throw ConfigInvalid("markov sim: M, K >= 1 and S >= 2 required");
  if (K > S) throw ConfigInvalid("markov sim: need K <= S for distinct chains");
  if (n_min < K || n_max < n_min) throw ConfigInvalid("markov sim: need K <= n_min <= n_max");
  if (len_min < 2 || len_max < len_min) throw ConfigInvalid("markov sim: need 2 <= len_min <= len_max");
  if (separation <= 0.0 || separation > 1.0) throw ConfigInvalid("markov sim: separation in (0, 1]");
  if (dirichlet_alpha <= 0.0) throw ConfigInvalid("markov sim: dirichlet_alpha must be positive");
}

MultiSiteDataset gen_markov_sites(const MarkovSimConfig& cfg) {
  cfg.validate();
  const int K = cfg.K;
  const int S = cfg.S;

  MultiSiteDataset ds;
  ds.kind = ModelKind::markov_mixture;
  ds.seed = cfg.seed;

  // Component k: starts at state k, shifts by k each step, blended with the
  // uniform chain by `separation`.
  Matrix u(K, S);
  std::vector<Matrix> T(K, Matrix::Zero(S, S));
  const double off = (1.0 - cfg.separation) / S;
  for (int k = 0; k < K; ++k) {
    u.row(k).setConstant(off);
    u(k, k % S) += cfg.separation;
    for (int s = 0; s < S; ++s) {
      T[k].row(s).setConstant(off);
      T[k](s, (s + k + 1) % S) += cfg.separation;
    }
  }

  ds.true_markov.kind = ModelKind::markov_mixture;
  ds.true_markov.K = K;
  ds.true_markov.S = S;
  ds.true_markov.betas = Matrix(K, S + S * S);
  for (int k = 0; k < K; ++k) {
    ds.true_markov.betas.row(k).segment(0, S) = u.row(k);
    for (int s = 0; s < S; ++s) {
      ds.true_markov.betas.row(k).segment(S + s * S, S) = T[k].row(s);
    }
  }
  ds.true_markov.mixing = Vector::Constant(K, 1.0 / K);

  Rng study = Rng::stream(cfg.seed, {kStudyKey});
  for (int m = 0; m < cfg.M; ++m) {
    const int n = static_cast<int>(study.uniform_int(cfg.n_min, cfg.n_max));
    Rng rng = Rng::stream(cfg.seed, {kSiteBaseKey, static_cast<std::uint64_t>(m)});
    const Vector props = rng.dirichlet(K, cfg.dirichlet_alpha);

    SequenceDataset site;
    site.site_id = m;
    site.true_labels = LabelVector(n);
    site.sequences.reserve(n);
    for (int i = 0; i < n; ++i) {
      const int k = rng.categorical(props);
      site.true_labels(i) = k + 1;
      const int len = static_cast<int>(rng.uniform_int(cfg.len_min, cfg.len_max));
      std::vector<int> seq(len);
      seq[0] = rng.categorical(u.row(k).transpose()) + 1;
      for (int t = 1; t < len; ++t) {
        seq[t] = rng.categorical(T[k].row(seq[t - 1] - 1).transpose()) + 1;
      }
      site.sequences.push_back(std::move(seq));
    }
    ds.sequence_sites.push_back(std::move(site));
  }
  return ds;
}

}  // namespace font
