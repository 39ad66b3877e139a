#include "font/kmeans.hpp"
#include "font/markov.hpp"
#include "font/metrics.hpp"
#include "font/model_select.hpp"
#include "font/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace font;

namespace {

FitConfig quick_cfg(std::uint64_t seed) {
  FitConfig cfg;
  cfg.seed = seed;
  return cfg;
}

VectorDataset two_cluster_fixture(Rng& rng, int per_cluster, int p, double sigma2) {
  VectorDataset data;
  data.rows = Matrix(2 * per_cluster, p);
  data.true_labels = LabelVector(2 * per_cluster);
  const double s = std::sqrt(sigma2);
  for (int i = 0; i < 2 * per_cluster; ++i) {
    const int k = i < per_cluster ? 0 : 1;
    data.true_labels(i) = k + 1;
    for (int j = 0; j < p; ++j) {
      data.rows(i, j) = (k == 0 ? -1.0 : 1.0) + s * rng.normal();
    }
  }
  return data;
}

}  // namespace

TEST_CASE("kmeans recovers the symmetric 4-point optimum") {
  VectorDataset data;
  data.rows = Matrix(4, 2);
  data.rows << 0, 0, 0, 1, 10, 0, 10, 1;
  const KMeansResult fit = kmeans_fit(data, 2, quick_cfg(1));
  CHECK(fit.labels(0) == fit.labels(1));
  CHECK(fit.labels(2) == fit.labels(3));
  CHECK(fit.labels(0) != fit.labels(2));
  // Centers are (0, 0.5) and (10, 0.5) up to label order.
  const int left = fit.labels(0) - 1;
  CHECK(fit.params.betas(left, 0) == doctest::Approx(0.0));
  CHECK(fit.params.betas(left, 1) == doctest::Approx(0.5));
  CHECK(fit.params.betas(1 - left, 0) == doctest::Approx(10.0));
  CHECK(fit.params.betas(1 - left, 1) == doctest::Approx(0.5));
}

TEST_CASE("kmeans with one point per cluster has zero objective") {
  VectorDataset data;
  data.rows = Matrix(3, 2);
  data.rows << 0, 0, 5, 5, -3, 4;
  const KMeansResult fit = kmeans_fit(data, 3, quick_cfg(2));
  CHECK(fit.objective == doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i) {
    CHECK((fit.params.betas.row(fit.labels(i) - 1).transpose() - data.rows.row(i).transpose()).norm() ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("kmeans labels well-separated Gaussian data perfectly") {
  Rng rng(31);
  const VectorDataset data = two_cluster_fixture(rng, 30, 10, 0.05);
  // Margin check: the fixture is only valid if the clusters are separated by
  // more than the worst within-cluster spread.
  double max_intra = 0.0, min_inter = 1e300;
  for (int i = 0; i < data.n(); ++i) {
    for (int j = i + 1; j < data.n(); ++j) {
      const double d = (data.rows.row(i) - data.rows.row(j)).norm();
      if (data.true_labels(i) == data.true_labels(j)) {
        max_intra = std::max(max_intra, d);
      } else {
        min_inter = std::min(min_inter, d);
      }
    }
  }
  REQUIRE(min_inter > max_intra);
  const KMeansResult fit = kmeans_fit(data, 2, quick_cfg(3));
  CHECK(adjusted_rand_index(fit.labels, data.true_labels) == doctest::Approx(1.0));
}

TEST_CASE("kmeans input guards") {
  VectorDataset data;
  data.rows = Matrix(2, 2);
  data.rows << 0, 0, 1, 1;
  CHECK_THROWS_AS(kmeans_fit(data, 3, quick_cfg(4)), TooFewPoints);
  data.rows(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kmeans_fit(data, 2, quick_cfg(4)), NonFinite);
}

TEST_CASE("kmeans objective trace is non-increasing") {
  Rng rng(5);
  VectorDataset data;
  data.rows = Matrix(120, 4);
  for (int i = 0; i < data.rows.size(); ++i) data.rows.data()[i] = rng.uniform(-2, 2);
  const KMeansResult fit = kmeans_fit(data, 5, quick_cfg(6));
  for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
    CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("kmeans_assign basics") {
  ClusterModelParams params;
  params.kind = ModelKind::kmeans;
  params.K = 2;
  params.betas = Matrix(2, 2);
  params.betas << 0, 0, 3, 4;
  Vector x(2);
  x << 1, 1;
  CHECK(kmeans_assign(params, x) == 1);  // sqrt(2) < sqrt(13)

  // Exact tie: equidistant point goes to the smaller index.
  Vector mid(2);
  mid << 1.5, 2.0;
  CHECK(kmeans_assign(params, mid) == 1);

  Vector bad(3);
  bad << 1, 1, 1;
  CHECK_THROWS_AS(kmeans_assign(params, bad), DimensionMismatch);
}

TEST_CASE("kmeans_assign matches an exhaustive scan") {
  Rng rng(8);
  ClusterModelParams params;
  params.kind = ModelKind::kmeans;
  params.K = 5;
  params.betas = Matrix(5, 3);
  for (int i = 0; i < params.betas.size(); ++i) params.betas.data()[i] = rng.uniform(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(3);
    for (int j = 0; j < 3; ++j) x(j) = rng.uniform(-1, 1);
    int best = 0;
    double best_d = 1e300;
    for (int k = 0; k < 5; ++k) {
      const double d = (x - params.betas.row(k).transpose()).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    CHECK(kmeans_assign(params, x) == best + 1);
    CHECK(kmeans_assign(params, x) == kmeans_assign(params, x));  // deterministic
  }
}

TEST_CASE("relabeling centers permutes assignments accordingly") {
  Rng rng(9);
  ClusterModelParams params;
  params.kind = ModelKind::kmeans;
  params.K = 4;
  params.betas = Matrix(4, 3);
  for (int i = 0; i < params.betas.size(); ++i) params.betas.data()[i] = rng.uniform(-1, 1);
  std::vector<int> perm = {0, 1, 2, 3};
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(perm.begin(), perm.end(),
                 std::mt19937(static_cast<unsigned>(rng.next_u64())));
    ClusterModelParams permuted = params;
    for (int k = 0; k < 4; ++k) permuted.betas.row(perm[k]) = params.betas.row(k);
    Vector x(3);
    for (int j = 0; j < 3; ++j) x(j) = rng.uniform(-1, 1);
    CHECK(kmeans_assign(permuted, x) == perm[kmeans_assign(params, x) - 1] + 1);
  }
}

TEST_CASE("single-component Markov MLE matches closed-form counts") {
  SequenceDataset data;
  data.sequences = {{1, 1}, {1, 2}};
  FitConfig cfg = quick_cfg(10);
  const MarkovFitResult fit = markov_mixture_fit(data, 1, 2, cfg);
  fit.params.validate();
  // Unsmoothed MLE is u = (1, 0), T row 1 = (0.5, 0.5); smoothing perturbs by
  // at most a few epsilon.
  const double tol = 4 * cfg.smoothing;
  CHECK(fit.params.betas(0, 0) == doctest::Approx(1.0).epsilon(tol));
  CHECK(fit.params.betas(0, 1) <= tol);
  CHECK(fit.params.betas(0, 2) == doctest::Approx(0.5).epsilon(tol));
  CHECK(fit.params.betas(0, 3) == doctest::Approx(0.5).epsilon(tol));
}

TEST_CASE("sequence log-likelihood follows the chain product") {
  ClusterModelParams params;
  params.kind = ModelKind::markov_mixture;
  params.K = 1;
  params.S = 2;
  params.betas = Matrix(1, 6);
  params.betas << 0.5, 0.5, 0.9, 0.1, 0.2, 0.8;  // u, then rows of T
  params.mixing = Vector::Ones(1);
  CHECK(markov_sequence_loglik(params, 0, {1, 2}) == doctest::Approx(std::log(0.05)));
  CHECK_THROWS_AS(markov_sequence_loglik(params, 0, {1, 3}), InvalidState);
}

TEST_CASE("EM separates two distinct chains") {
  Rng rng(12);
  const int per = 100, len = 20, S = 3;
  // Component 1 nearly stays put; component 2 nearly always cycles.
  Matrix t1 = Matrix::Constant(S, S, 0.025);
  Matrix t2 = t1;
  for (int s = 0; s < S; ++s) {
    t1(s, s) += 0.95;
    t2(s, (s + 1) % S) += 0.95;
  }
  SequenceDataset data;
  LabelVector truth(2 * per);
  for (int i = 0; i < 2 * per; ++i) {
    const Matrix& t = i < per ? t1 : t2;
    truth(i) = i < per ? 1 : 2;
    std::vector<int> seq(len);
    seq[0] = 1 + static_cast<int>(rng.uniform_int(0, S - 1));
    for (int j = 1; j < len; ++j) {
      seq[j] = 1 + rng.categorical(t.row(seq[j - 1] - 1).transpose());
    }
    data.sequences.push_back(std::move(seq));
  }
  const MarkovFitResult fit = markov_mixture_fit(data, 2, S, quick_cfg(13));
  fit.params.validate();
  CHECK(adjusted_rand_index(fit.labels, truth) >= 0.95);
  for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t) {
    CHECK(fit.loglik_trace[t] >= fit.loglik_trace[t - 1] - 1e-8);
  }
}

TEST_CASE("markov_assign follows the posterior argmax") {
  ClusterModelParams params;
  params.kind = ModelKind::markov_mixture;
  params.K = 2;
  params.S = 2;
  params.betas = Matrix(2, 6);
  // Component 1 starts at 1 and stays; component 2 starts at 2 and stays.
  params.betas.row(0) << 1, 0, 1, 0, 0, 1;
  params.betas.row(1) << 0, 1, 1, 0, 0, 1;
  params.mixing = Vector::Constant(2, 0.5);
  CHECK(markov_assign(params, {2, 2, 2}) == 2);
  // Identical components: tie resolves to the first.
  params.betas.row(1) = params.betas.row(0);
  CHECK(markov_assign(params, {1, 1}) == 1);
}

TEST_CASE("markov_assign matches a direct posterior evaluation") {
  Rng rng(14);
  const int K = 3, S = 4;
  ClusterModelParams params;
  params.kind = ModelKind::markov_mixture;
  params.K = K;
  params.S = S;
  params.betas = Matrix(K, S + S * S);
  for (int k = 0; k < K; ++k) {
    params.betas.row(k).segment(0, S) = rng.dirichlet(S, 1.0).transpose();
    for (int s = 0; s < S; ++s) {
      params.betas.row(k).segment(S + s * S, S) = rng.dirichlet(S, 1.0).transpose();
    }
  }
  params.mixing = rng.dirichlet(K, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> seq(2 + static_cast<int>(rng.uniform_int(0, 8)));
    for (auto& s : seq) s = 1 + static_cast<int>(rng.uniform_int(0, S - 1));
    int best = 0;
    double best_score = -1e300;
    for (int k = 0; k < K; ++k) {
      double ll = std::log(params.mixing(k)) + std::log(params.betas(k, seq[0] - 1));
      for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        ll += std::log(params.betas(k, S + (seq[t] - 1) * S + (seq[t + 1] - 1)));
      }
      if (ll > best_score) {
        best_score = ll;
        best = k;
      }
    }
    CHECK(markov_assign(params, seq) == best + 1);
  }
}

TEST_CASE("markov fit guards") {
  SequenceDataset data;
  data.sequences = {{1, 2}};
  CHECK_THROWS_AS(markov_mixture_fit(data, 2, 2, quick_cfg(15)), TooFewSequences);
  data.sequences = {{1, 5}, {1, 2}};
  CHECK_THROWS_AS(markov_mixture_fit(data, 1, 2, quick_cfg(15)), InvalidState);
}

TEST_CASE("singleton K range is returned unchanged") {
  Rng rng(16);
  const VectorDataset data = two_cluster_fixture(rng, 20, 4, 0.1);
  CHECK(select_k_local(data, {3}, InfoCriterion::bic, quick_cfg(17)) == 3);
}

TEST_CASE("AIC and BIC agree on clearly separated two-cluster data") {
  Rng rng(22);
  const VectorDataset data = two_cluster_fixture(rng, 40, 6, 0.05);
  CHECK(select_k_local(data, {1, 2, 3}, InfoCriterion::bic, quick_cfg(23)) == 2);
  CHECK(select_k_local(data, {1, 2, 3}, InfoCriterion::aic, quick_cfg(23)) == 2);
}

TEST_CASE("BIC finds one component in single-chain sequence data") {
  Rng rng(18);
  const int n = 120, len = 15, S = 3;
  Matrix t = Matrix::Constant(S, S, 0.1);
  for (int s = 0; s < S; ++s) t(s, (s + 1) % S) += 0.7;
  SequenceDataset data;
  for (int i = 0; i < n; ++i) {
    std::vector<int> seq(len);
    seq[0] = 1 + static_cast<int>(rng.uniform_int(0, S - 1));
    for (int j = 1; j < len; ++j) {
      seq[j] = 1 + rng.categorical(t.row(seq[j - 1] - 1).transpose());
    }
    data.sequences.push_back(std::move(seq));
  }
  CHECK(select_k_local(data, S, {1, 2, 3, 4}, InfoCriterion::bic, quick_cfg(19)) == 1);
}

TEST_CASE("BIC recovers four Gaussian components") {
  Rng rng(20);
  const int per = 50, p = 10;
  Matrix mus(4, p);
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < p; ++j) mus(k, j) = ((k >> (j % 2)) & 1) ? 1.0 : -1.0;
  }
  VectorDataset data;
  data.rows = Matrix(4 * per, p);
  const double s = std::sqrt(0.05);
  for (int i = 0; i < 4 * per; ++i) {
    const int k = i / per;
    for (int j = 0; j < p; ++j) data.rows(i, j) = mus(k, j) + s * rng.normal();
  }
  CHECK(select_k_local(data, {2, 3, 4, 5, 6}, InfoCriterion::bic, quick_cfg(21)) == 4);
}
