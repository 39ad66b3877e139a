#include "font/benchmarks.hpp"

#include "font/kmeans.hpp"
#include "font/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>

namespace font {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double masked_ari(const LabelVector& labels, const LabelVector& truth,
                  const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  if (truth.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  LabelVector a, b;
  filter_for_ari(labels, truth, mask, a, b);
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return adjusted_rand_index(a, b);
}

Matrix pooled_rows(const MultiSiteDataset& sites) {
  int n = 0;
  for (const auto& s : sites.vector_sites) n += s.n();
  if (n == 0) throw TooFewPoints("benchmarks: no vector data");
  Matrix all(n, sites.vector_sites.front().dim());
  int at = 0;
  for (const auto& s : sites.vector_sites) {
    all.middleRows(at, s.n()) = s.rows;
    at += s.n();
  }
  return all;
}

FitConfig method_cfg(const FitConfig& cfg, std::uint64_t salt) {
  FitConfig c = cfg;
  c.seed = cfg.seed ^ (salt * 0x9e3779b97f4a7c15ull);
  return c;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::font: return "font";
    case Method::local: return "local";
    case Method::consensus: return "consensus";
    case Method::kfed: return "kfed";
    case Method::pooled: return "pooled";
    case Method::best_local: return "best_local";
  }
  return "font";
}

Method method_from_string(const std::string& s) {
  if (s == "font") return Method::font;
  if (s == "local") return Method::local;
  if (s == "consensus") return Method::consensus;
  if (s == "kfed") return Method::kfed;
  if (s == "pooled") return Method::pooled;
  if (s == "best_local") return Method::best_local;
  throw ConfigInvalid("unknown method: " + s);
}

bool is_oracle(Method m) { return m == Method::pooled || m == Method::best_local; }

BenchmarkResult run_local(const MultiSiteDataset& sites, int K, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  BenchmarkResult out;
  out.method = Method::local;
  out.labels = LabelVector(sites.n_total());
  int at = 0;
  double ari_sum = 0.0;
  int ari_count = 0;
  for (std::size_t m = 0; m < sites.vector_sites.size(); ++m) {
    const auto& site = sites.vector_sites[m];
    const KMeansResult fit = kmeans_fit(site, K, method_cfg(cfg, m + 1));
    out.labels.segment(at, site.n()) = fit.labels;
    at += site.n();
    const double a = masked_ari(fit.labels, site.true_labels, site.outlier_mask);
    if (std::isfinite(a)) {
      ari_sum += a;
      ari_count += 1;
      out.per_site_ari.push_back(a);
    }
  }
  if (ari_count > 0) out.ari = ari_sum / ari_count;
  out.wall_time = seconds_since(t0);
  return out;
}

Matrix consensus_embedding(const Eigen::MatrixXi& label_matrix, int K) {
  const int n = static_cast<int>(label_matrix.rows());
  const int m = static_cast<int>(label_matrix.cols());
  if (m < 2) throw TooFewModels("consensus_embedding: need M >= 2 labelings");

  // S_bar = B B^T / M for the one-hot label indicator B (N x q). Top-K
  // eigenpairs of S_bar come from the small Gram matrix B^T B: if its
  // eigenpair is (lambda, u), then S_bar has eigenvalue lambda / M with unit
  // eigenvector B u / sqrt(lambda), and the scaled coordinates are
  // sqrt(lambda / M) * that = B u / sqrt(M).
  std::vector<int> offset(m, 0);
  int q = 0;
  for (int j = 0; j < m; ++j) {
    offset[j] = q;
    q += label_matrix.col(j).maxCoeff();
  }
  auto column_of = [&](int i, int j) { return offset[j] + label_matrix(i, j) - 1; };

  Matrix gram = Matrix::Zero(q, q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const int cj = column_of(i, j);
      for (int l = 0; l < m; ++l) gram(cj, column_of(i, l)) += 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw EigenFailure("consensus_embedding: eigensolver failed");

  const int top = std::min(K, q);
  Matrix embed = Matrix::Zero(n, top);
  for (int c = 0; c < top; ++c) {
    const int idx = q - 1 - c;  // eigenvalues ascending in Eigen
    if (es.eigenvalues()(idx) <= 0.0) continue;  // floored at zero
    const Vector& u = es.eigenvectors().col(idx);
    for (int i = 0; i < n; ++i) {
      double coord = 0.0;
      for (int j = 0; j < m; ++j) coord += u(column_of(i, j));
      embed(i, c) = coord / std::sqrt(static_cast<double>(m));
    }
  }
  return embed;
}

BenchmarkResult run_consensus(const Eigen::MatrixXi& label_matrix, int K, const FitConfig& cfg,
                              const LabelVector& truth,
                              const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  const auto t0 = Clock::now();
  const int n = static_cast<int>(label_matrix.rows());
  const Matrix embed = consensus_embedding(label_matrix, K);
  const WeightedKMeansResult km = weighted_kmeans(embed, Vector::Ones(n), K, cfg);
  BenchmarkResult out;
  out.method = Method::consensus;
  out.labels = km.labels;
  out.ari = masked_ari(out.labels, truth, mask);
  out.wall_time = seconds_since(t0);
  return out;
}

BenchmarkResult run_kfed(const MultiSiteDataset& sites, int K, int k_local, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  if (k_local < K) throw ConfigInvalid("run_kfed: k_local must be >= K");
  const int m = static_cast<int>(sites.vector_sites.size());
  const int p = sites.vector_sites.front().dim();

  Matrix landmarks(m * k_local, p);
  for (int j = 0; j < m; ++j) {
    const KMeansResult fit = kmeans_fit(sites.vector_sites[j], k_local, method_cfg(cfg, j + 1));
    landmarks.middleRows(j * k_local, k_local) = fit.params.betas;
  }
  const WeightedKMeansResult global =
      weighted_kmeans(landmarks, Vector::Ones(m * k_local), K, method_cfg(cfg, 0x77));

  ClusterModelParams params;
  params.kind = ModelKind::kmeans;
  params.K = K;
  params.betas = global.centers;

  BenchmarkResult out;
  out.method = Method::kfed;
  out.labels = LabelVector(sites.n_total());
  int at = 0;
  for (const auto& site : sites.vector_sites) {
    for (int i = 0; i < site.n(); ++i) {
      out.labels(at++) = kmeans_assign(params, site.rows.row(i).transpose());
    }
  }
  out.ari = masked_ari(out.labels, sites.all_true_labels(), sites.all_outlier_mask());
  out.wall_time = seconds_since(t0);
  return out;
}

BenchmarkResult run_pooled(const MultiSiteDataset& sites, int K, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  VectorDataset pooled;
  pooled.rows = pooled_rows(sites);
  pooled.site_id = -1;
  const KMeansResult fit = kmeans_fit(pooled, K, cfg);
  BenchmarkResult out;
  out.method = Method::pooled;
  out.oracle = true;
  out.labels = fit.labels;
  out.ari = masked_ari(out.labels, sites.all_true_labels(), sites.all_outlier_mask());
  out.wall_time = seconds_since(t0);
  return out;
}

BenchmarkResult run_best_local(const MultiSiteDataset& sites, int K, const LabelVector& truth,
                               const FitConfig& cfg) {
  const auto t0 = Clock::now();
  if (truth.size() == 0) throw TruthRequired("run_best_local: ground truth required");
  const Matrix all = pooled_rows(sites);
  const auto mask = sites.all_outlier_mask();

  BenchmarkResult out;
  out.method = Method::best_local;
  out.oracle = true;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sites.vector_sites.size(); ++j) {
    const KMeansResult fit = kmeans_fit(sites.vector_sites[j], K, method_cfg(cfg, j + 1));
    LabelVector labels(all.rows());
    for (int i = 0; i < all.rows(); ++i) {
      labels(i) = kmeans_assign(fit.params, all.row(i).transpose());
    }
    const double a = masked_ari(labels, truth, mask);
    if (a > best) {
      best = a;
      out.labels = labels;
      out.ari = a;
      out.selected_site = static_cast<int>(j);
    }
  }
  out.wall_time = seconds_since(t0);
  return out;
}

}  // namespace font
