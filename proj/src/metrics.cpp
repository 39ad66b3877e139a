#include "font/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace font {

namespace {

using int128 = __int128;

std::int64_t to_int64(int128 v) {
  return static_cast<std::int64_t>(v);
}

int128 gcd128(int128 a, int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int128 choose2(int128 n) { return n * (n - 1) / 2; }

struct AriTerms {
  int128 pairs_joint = 0;   // sum_ij C(n_ij, 2)
  int128 pairs_a = 0;       // sum_i C(a_i, 2)
  int128 pairs_b = 0;       // sum_j C(b_j, 2)
  int128 pairs_total = 0;   // C(n, 2)
};

AriTerms ari_terms(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw LengthMismatch("adjusted_rand_index: length mismatch");
  if (a.size() < 2) throw LengthMismatch("adjusted_rand_index: need at least 2 subjects");
  const ContingencyTable ct = contingency_table(a, b);
  AriTerms t;
  for (int i = 0; i < ct.counts.rows(); ++i) {
    for (int j = 0; j < ct.counts.cols(); ++j) t.pairs_joint += choose2(ct.counts(i, j));
  }
  for (int i = 0; i < ct.row_marginals.size(); ++i) t.pairs_a += choose2(ct.row_marginals(i));
  for (int j = 0; j < ct.col_marginals.size(); ++j) t.pairs_b += choose2(ct.col_marginals(j));
  t.pairs_total = choose2(ct.n);
  return t;
}

}  // namespace

ContingencyTable contingency_table(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw LengthMismatch("contingency_table: length mismatch");
  const int ka = a.size() > 0 ? a.maxCoeff() : 0;
  const int kb = b.size() > 0 ? b.maxCoeff() : 0;
  ContingencyTable ct;
  ct.counts = Eigen::MatrixXi::Zero(std::max(ka, 1), std::max(kb, 1));
  ct.n = static_cast<int>(a.size());
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < 1 || b(i) < 1) throw InvalidState("contingency_table: labels must be >= 1");
    ct.counts(a(i) - 1, b(i) - 1) += 1;
  }
  ct.row_marginals = ct.counts.rowwise().sum();
  ct.col_marginals = ct.counts.colwise().sum().transpose();
  return ct;
}

Fraction adjusted_rand_index_exact(const LabelVector& a, const LabelVector& b) {
  const AriTerms t = ari_terms(a, b);
  // ARI = (I - AB/C) / ((A+B)/2 - AB/C), cleared to integers:
  int128 num = 2 * (t.pairs_joint * t.pairs_total - t.pairs_a * t.pairs_b);
  int128 den = (t.pairs_a + t.pairs_b) * t.pairs_total - 2 * t.pairs_a * t.pairs_b;
  if (den == 0) return Fraction{1, 1};  // identical degenerate partitions
  const int128 g = gcd128(num, den);
  if (g != 0) {
    num /= g;
    den /= g;
  }
  return Fraction{to_int64(num), to_int64(den)};
}

double adjusted_rand_index(const LabelVector& a, const LabelVector& b) {
  const AriTerms t = ari_terms(a, b);
  const double index = static_cast<double>(t.pairs_joint);
  const double ea = static_cast<double>(t.pairs_a);
  const double eb = static_cast<double>(t.pairs_b);
  const double total = static_cast<double>(t.pairs_total);
  const double expected = ea * eb / total;
  const double max_index = 0.5 * (ea + eb);
  if (max_index == expected) return 1.0;  // identical degenerate partitions
  return (index - expected) / (max_index - expected);
}

Correlation weight_alignment(const Vector& weights, const Vector& per_model_ari) {
  if (weights.size() != per_model_ari.size()) {
    throw LengthMismatch("weight_alignment: length mismatch");
  }
  if (weights.size() < 3) throw TooFewModels("weight_alignment: need M >= 3");
  const double mw = weights.mean();
  const double ma = per_model_ari.mean();
  const Vector dw = weights.array() - mw;
  const Vector da = per_model_ari.array() - ma;
  const double sw = dw.squaredNorm();
  const double sa = da.squaredNorm();
  if (sw == 0.0 || sa == 0.0) return Correlation{};
  return Correlation{dw.dot(da) / std::sqrt(sw * sa), true};
}

EmpiricalMarkovStats empirical_markov_stats(const SequenceDataset& seqs,
                                            const LabelVector& labels, int K, int S) {
  if (labels.size() != seqs.n()) {
    throw LengthMismatch("empirical_markov_stats: labels/sequences mismatch");
  }
  validate_sequences(seqs, S);
  EmpiricalMarkovStats st;
  st.K = K;
  st.S = S;
  st.initial = Matrix::Zero(K, S);
  st.transition.assign(K, Matrix::Zero(S, S));
  st.empty_cluster.assign(K, true);
  st.unseen_row_flag.assign(K, Eigen::VectorXi::Zero(S));

  for (int i = 0; i < seqs.n(); ++i) {
    const int k = labels(i) - 1;
    if (k < 0 || k >= K) throw InvalidState("empirical_markov_stats: label outside [1, K]");
    st.empty_cluster[k] = false;
    const auto& x = seqs.sequences[i];
    st.initial(k, x.front() - 1) += 1.0;
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
      st.transition[k](x[t] - 1, x[t + 1] - 1) += 1.0;
    }
  }

  for (int k = 0; k < K; ++k) {
    const double tot = st.initial.row(k).sum();
    if (tot > 0.0) {
      st.initial.row(k) /= tot;
    } else {
      st.initial.row(k).setConstant(1.0 / S);
    }
    for (int s = 0; s < S; ++s) {
      const double row = st.transition[k].row(s).sum();
      if (row > 0.0) {
        st.transition[k].row(s) /= row;
      } else {
        st.transition[k].row(s).setConstant(1.0 / S);
        st.unseen_row_flag[k](s) = 1;
      }
    }
  }
  return st;
}

TransitionDivergence transition_divergence(const EmpiricalMarkovStats& a,
                                           const EmpiricalMarkovStats& b) {
  if (a.K != b.K || a.S != b.S) throw ShapeMismatch("transition_divergence: K/S mismatch");
  TransitionDivergence d;
  for (int k = 0; k < a.K; ++k) {
    d.mean_frob_T += (a.transition[k] - b.transition[k]).norm();
    d.mean_norm_u += (a.initial.row(k) - b.initial.row(k)).norm();
  }
  d.mean_frob_T /= a.K;
  d.mean_norm_u /= a.K;
  return d;
}

std::vector<int> match_clusters_by_overlap(const LabelVector& a, const LabelVector& b, int K) {
  if (K > 10) throw ConfigInvalid("match_clusters_by_overlap: K > 10 unsupported");
  Eigen::MatrixXi overlap = Eigen::MatrixXi::Zero(K, K);
  if (a.size() != b.size()) throw LengthMismatch("match_clusters_by_overlap: length mismatch");
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < 1 || a(i) > K || b(i) < 1 || b(i) > K) {
      throw InvalidState("match_clusters_by_overlap: label outside [1, K]");
    }
    overlap(a(i) - 1, b(i) - 1) += 1;
  }
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  long best_score = -1;
  do {
    long score = 0;
    for (int k = 0; k < K; ++k) score += overlap(k, perm[k]);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace font
