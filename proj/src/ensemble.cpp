#include "font/ensemble.hpp"

#include "font/kmeans.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>

namespace font {

double euclidean_metric(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("euclidean_metric: length mismatch");
  return (a - b).norm();
}

Matrix DistanceRep::dense() const {
  Matrix d(n(), n());
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < n(); ++j) d(i, j) = table(labels(i) - 1, labels(j) - 1);
  }
  return d;
}

DistanceRep build_distance_rep(const ClusterModelParams& params, const LabelVector& labels,
                               const DistanceMetric& metric) {
  const int K = params.K;
  DistanceRep rep;
  rep.labels = labels;
  rep.table = Matrix::Zero(K, K);
  rep.counts = Eigen::VectorXi::Zero(K);
  for (int i = 0; i < labels.size(); ++i) {
    if (labels(i) < 1 || labels(i) > K) {
      throw InvalidState("build_distance_rep: label outside [1, K]");
    }
    rep.counts(labels(i) - 1) += 1;
  }
  for (int k = 0; k < K; ++k) {
    for (int l = k + 1; l < K; ++l) {
      const double d = metric(params.betas.row(k).transpose(), params.betas.row(l).transpose());
      rep.table(k, l) = d;
      rep.table(l, k) = d;
    }
  }
  double frob2 = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      frob2 += static_cast<double>(rep.counts(k)) * rep.counts(l) * rep.table(k, l) * rep.table(k, l);
    }
  }
  rep.frob_norm = std::sqrt(frob2);
  rep.degenerate = (rep.frob_norm == 0.0);
  return rep;
}

double rep_inner(const DistanceRep& a, const DistanceRep& b) {
  if (a.n() != b.n()) throw SubjectCountMismatch("rep_inner: subject counts differ");
  const int ka = static_cast<int>(a.table.rows());
  const int kb = static_cast<int>(b.table.rows());
  Matrix joint = Matrix::Zero(ka, kb);  // c_{kk'}: subjects labeled k by a, k' by b
  for (int i = 0; i < a.n(); ++i) joint(a.labels(i) - 1, b.labels(i) - 1) += 1.0;
  // <vec(D_a), vec(D_b)> = sum_{k,l} A(k,l) * (C B C^T)(k,l)
  return a.table.cwiseProduct(joint * b.table * joint.transpose()).sum();
}

double rep_cosine(const DistanceRep& a, const DistanceRep& b) {
  if (a.frob_norm == 0.0 || b.frob_norm == 0.0) {
    throw AllDegenerate("rep_cosine: degenerate representation");
  }
  return rep_inner(a, b) / (a.frob_norm * b.frob_norm);
}

Matrix agreement_matrix(const std::vector<DistanceRep>& reps) {
  const int m = static_cast<int>(reps.size());
  if (m < 1) throw ConfigInvalid("agreement_matrix: no representations");
  for (const auto& r : reps) {
    if (r.n() != reps.front().n()) {
      throw SubjectCountMismatch("agreement_matrix: subject counts differ");
    }
    if (r.degenerate) throw AllDegenerate("agreement_matrix: degenerate input; filter first");
  }
  Matrix g = Matrix::Identity(m, m);
  for (int t = 0; t < m; ++t) {
    for (int s = t + 1; s < m; ++s) {
      const double c = rep_cosine(reps[t], reps[s]);
      g(t, s) = c;
      g(s, t) = c;
    }
  }
  return g;
}

AgreementWeights spectral_weights(const Matrix& G) {
  const int m = static_cast<int>(G.rows());
  if (m < 2 || G.cols() != m) throw ConfigInvalid("spectral_weights: need a square M >= 2 matrix");
  if (!G.isApprox(G.transpose(), 1e-10)) throw ConfigInvalid("spectral_weights: G not symmetric");

  AgreementWeights out;
  out.G = G;
  out.positive_G = (G.minCoeff() > 0.0);

  Vector v = Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    Vector w = G * v;
    const double lambda = v.dot(w);
    const double resid = (w - lambda * v).norm();
    const double wn = w.norm();
    if (wn == 0.0) break;  // fall through to the dense solver
    v = w / wn;
    if (resid <= 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if (m > 64) throw EigenFailure("spectral_weights: power iteration did not converge");
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.info() != Eigen::Success) throw EigenFailure("spectral_weights: eigensolver failed");
    v = es.eigenvectors().col(m - 1);  // eigenvalues ascending
  }
  out.leading_eigvec = v;
  out.weights = v.cwiseAbs();
  return out;
}

Matrix ConsensusDistance::dense() const {
  Matrix d(n(), n());
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < n(); ++j) d(i, j) = rows(subject_index(i), subject_index(j));
  }
  return d;
}

ConsensusDistance ensemble_distance(const std::vector<DistanceRep>& reps, const Vector& weights) {
  const int m = static_cast<int>(reps.size());
  if (m == 0 || weights.size() != m) {
    throw LengthMismatch("ensemble_distance: reps/weights mismatch");
  }
  const int n = reps.front().n();
  for (const auto& r : reps) {
    if (r.n() != n) throw SubjectCountMismatch("ensemble_distance: subject counts differ");
  }

  Vector w = weights;
  for (int j = 0; j < m; ++j) {
    if (reps[j].degenerate) w(j) = 0.0;
  }
  const double norm = w.norm();
  if (norm == 0.0) throw AllDegenerate("ensemble_distance: every representation is degenerate");
  w /= norm;

  ConsensusDistance cd;
  cd.subject_index = Eigen::VectorXi(n);
  std::map<std::vector<int>, int> seen;  // profile -> index, first-appearance order
  std::vector<std::vector<int>> profile_list;
  std::vector<int> mult;
  std::vector<int> key(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) key[j] = reps[j].labels(i);
    auto [it, inserted] = seen.try_emplace(key, static_cast<int>(profile_list.size()));
    if (inserted) {
      profile_list.push_back(key);
      mult.push_back(0);
    }
    cd.subject_index(i) = it->second;
    mult[it->second] += 1;
  }

  const int np = static_cast<int>(profile_list.size());
  cd.profiles = Eigen::MatrixXi(np, m);
  cd.multiplicities = Eigen::VectorXi(np);
  for (int a = 0; a < np; ++a) {
    for (int j = 0; j < m; ++j) cd.profiles(a, j) = profile_list[a][j];
    cd.multiplicities(a) = mult[a];
  }

  cd.rows = Matrix::Zero(np, np);
  for (int j = 0; j < m; ++j) {
    if (w(j) == 0.0) continue;
    const double scale = w(j) / reps[j].frob_norm;
    for (int a = 0; a < np; ++a) {
      for (int b = a + 1; b < np; ++b) {
        const double d = scale * reps[j].table(cd.profiles(a, j) - 1, cd.profiles(b, j) - 1);
        cd.rows(a, b) += d;
        cd.rows(b, a) += d;
      }
    }
  }
  return cd;
}

LabelVector final_cluster(const ConsensusDistance& cd, int K, const FitConfig& cfg) {
  if (K < 1) throw ConfigInvalid("final_cluster: K must be >= 1");
  const int np = cd.n_profiles();
  LabelVector labels(cd.n());
  if (np <= K) {
    // Every distinct consensus row is its own cluster.
    for (int i = 0; i < cd.n(); ++i) labels(i) = cd.subject_index(i) + 1;
    return labels;
  }
  // Row r of the dense matrix repeats coordinate c once per subject sharing
  // profile c, so scaling column c by sqrt(mult_c) makes distances between
  // compressed rows equal to distances between dense rows; row weights make
  // the Lloyd updates match.
  Matrix points = cd.rows;
  for (int c = 0; c < np; ++c) {
    points.col(c) *= std::sqrt(static_cast<double>(cd.multiplicities(c)));
  }
  const WeightedKMeansResult km =
      weighted_kmeans(points, cd.multiplicities.cast<double>(), K, cfg);
  for (int i = 0; i < cd.n(); ++i) labels(i) = km.labels(cd.subject_index(i));
  return labels;
}

int select_k_majority(const std::vector<int>& local_ks) {
  if (local_ks.empty()) throw ConfigInvalid("select_k_majority: empty input");
  std::map<int, int> votes;
  for (int k : local_ks) votes[k] += 1;
  int best_k = local_ks.front();
  int best_votes = 0;
  for (const auto& [k, v] : votes) {  // ascending keys: ties keep the smallest K
    if (v > best_votes) {
      best_votes = v;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace font
