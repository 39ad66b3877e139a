#include "font/kmeans.hpp"

#include "font/rng.hpp"

#include <cmath>
#include <limits>

namespace font {

namespace {

// Single source of truth for the assignment rule so batch fits and
// kmeans_assign agree bit-for-bit, ties included.
int nearest_center(const Eigen::Ref<const Matrix>& centers, const Eigen::Ref<const Vector>& x,
                   double* dist2_out = nullptr) {
  int best = 0;
  double best_d = (centers.row(0).transpose() - x).squaredNorm();
  for (int k = 1; k < centers.rows(); ++k) {
    const double d = (centers.row(k).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (dist2_out) *dist2_out = best_d;
  return best;
}

// k-means++ seeding with point weights. Falls back to the smallest unused
// index when all remaining D^2 mass is zero (fewer distinct points than K).
Matrix kmeanspp_init(const Eigen::Ref<const Matrix>& points,
                     const Eigen::Ref<const Vector>& weights, int K, Rng& rng) {
  const int n = static_cast<int>(points.rows());
  Matrix centers(K, points.cols());
  std::vector<bool> used(n, false);

  auto sample_index = [&](const Vector& mass) {
    const double total = mass.sum();
    if (total <= 0.0) {
      for (int i = 0; i < n; ++i) {
        if (!used[i]) return i;
      }
      return 0;
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += mass(i);
      if (u < acc) return i;
    }
    return n - 1;
  };

  int c0 = sample_index(weights);
  centers.row(0) = points.row(c0);
  used[c0] = true;

  Vector d2(n);
  for (int i = 0; i < n; ++i) d2(i) = (points.row(i) - centers.row(0)).squaredNorm();

  for (int k = 1; k < K; ++k) {
    const int c = sample_index(weights.cwiseProduct(d2));
    centers.row(k) = points.row(c);
    used[c] = true;
    for (int i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (points.row(i) - centers.row(k)).squaredNorm());
    }
  }
  return centers;
}

struct LloydState {
  Matrix centers;
  LabelVector labels;  // 0-based during iteration
  double objective = 0.0;
  std::vector<double> trace;
};

LloydState lloyd_once(const Eigen::Ref<const Matrix>& points,
                      const Eigen::Ref<const Vector>& weights, int K, const FitConfig& cfg,
                      Rng& rng) {
  const int n = static_cast<int>(points.rows());
  LloydState st;
  st.centers = kmeanspp_init(points, weights, K, rng);
  st.labels = LabelVector::Zero(n);
  Vector d2(n);

  double prev_obj = std::numeric_limits<double>::infinity();
  LabelVector prev_labels = LabelVector::Constant(n, -1);

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    // Assignment step.
    for (int i = 0; i < n; ++i) st.labels(i) = nearest_center(st.centers, points.row(i).transpose(), &d2(i));

    // Repair empty clusters: promote the heaviest-cost point whose donor
    // cluster keeps at least one member.
    Eigen::VectorXi sizes = Eigen::VectorXi::Zero(K);
    for (int i = 0; i < n; ++i) {
      if (weights(i) > 0.0) sizes(st.labels(i)) += 1;
    }
    for (int k = 0; k < K; ++k) {
      if (sizes(k) > 0) continue;
      int take = -1;
      double take_cost = 0.0;
      for (int i = 0; i < n; ++i) {
        if (weights(i) <= 0.0 || sizes(st.labels(i)) <= 1) continue;
        const double cost = weights(i) * d2(i);
        if (cost > take_cost) {
          take_cost = cost;
          take = i;
        }
      }
      if (take < 0) break;  // duplicate points; empty cluster is unavoidable
      sizes(st.labels(take)) -= 1;
      st.centers.row(k) = points.row(take);
      st.labels(take) = k;
      sizes(k) = 1;
      d2(take) = 0.0;
    }

    // Update step.
    Matrix sums = Matrix::Zero(K, points.cols());
    Vector mass = Vector::Zero(K);
    for (int i = 0; i < n; ++i) {
      sums.row(st.labels(i)) += weights(i) * points.row(i);
      mass(st.labels(i)) += weights(i);
    }
    for (int k = 0; k < K; ++k) {
      if (mass(k) > 0.0) st.centers.row(k) = sums.row(k) / mass(k);
    }

    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      obj += weights(i) * (points.row(i) - st.centers.row(st.labels(i))).squaredNorm();
    }
    if (obj > prev_obj * (1.0 + 1e-9) + 1e-12) {
      throw Error("k-means objective increased within a restart");
    }
    st.trace.push_back(obj);
    st.objective = obj;

    const bool labels_stable = (st.labels == prev_labels);
    const bool obj_stable =
        std::isfinite(prev_obj) && std::abs(prev_obj - obj) <= cfg.tol * std::max(1.0, prev_obj);
    prev_obj = obj;
    prev_labels = st.labels;
    if (labels_stable || obj_stable) break;
  }
  return st;
}

WeightedKMeansResult run_restarts(const Eigen::Ref<const Matrix>& points,
                                  const Eigen::Ref<const Vector>& weights, int K,
                                  const FitConfig& cfg) {
  WeightedKMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(cfg.seed, {0x6b6d6561u, static_cast<std::uint64_t>(r)});
    LloydState st = lloyd_once(points, weights, K, cfg, rng);
    if (st.objective < best.objective) {
      best.centers = st.centers;
      best.labels = st.labels;
      best.objective = st.objective;
      best.objective_trace = st.trace;
    }
  }
  // Final assignment under the returned centers, so labels satisfy the
  // nearest-center rule exactly (including ties).
  for (int i = 0; i < points.rows(); ++i) {
    best.labels(i) = nearest_center(best.centers, points.row(i).transpose()) + 1;
  }
  return best;
}

}  // namespace

int kmeans_assign(const ClusterModelParams& params, const Eigen::Ref<const Vector>& x) {
  if (params.kind != ModelKind::kmeans) {
    throw InvalidState("kmeans_assign: params are not a k-means model");
  }
  if (x.size() != params.betas.cols()) {
    throw DimensionMismatch("kmeans_assign: point dimension != center dimension");
  }
  return nearest_center(params.betas, x) + 1;
}

KMeansResult kmeans_fit(const VectorDataset& data, int K, const FitConfig& cfg) {
  const int n = data.n();
  if (K < 1) throw ConfigInvalid("kmeans_fit: K must be >= 1");
  if (n < K) throw TooFewPoints("kmeans_fit: fewer points than clusters");
  if (!data.rows.allFinite()) throw NonFinite("kmeans_fit: non-finite data");

  const Vector unit = Vector::Ones(n);
  WeightedKMeansResult w = run_restarts(data.rows, unit, K, cfg);

  KMeansResult out;
  out.params.kind = ModelKind::kmeans;
  out.params.K = K;
  out.params.betas = std::move(w.centers);
  out.labels = std::move(w.labels);
  out.objective = w.objective;
  out.objective_trace = std::move(w.objective_trace);
  return out;
}

WeightedKMeansResult weighted_kmeans(const Eigen::Ref<const Matrix>& points,
                                     const Eigen::Ref<const Vector>& weights, int K,
                                     const FitConfig& cfg) {
  if (points.rows() != weights.size()) {
    throw LengthMismatch("weighted_kmeans: points/weights mismatch");
  }
  if (points.rows() == 0) throw TooFewPoints("weighted_kmeans: empty input");
  if (weights.minCoeff() < 0.0) throw ConfigInvalid("weighted_kmeans: negative weight");
  return run_restarts(points, weights, K, cfg);
}

}  // namespace font
