#pragma once

// Independent reference implementations used only to cross-check the library:
// quadratic-cost pair counting for the adjusted Rand index, dense N x N
// distance-matrix construction, dense agreement/consensus computation, and a
// cyclic Jacobi eigensolver. None of them share code with the library paths
// they verify.

#include "font/ensemble.hpp"
#include "font/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

struct PairCounts {
  std::int64_t both_together = 0;   // same cluster in a and in b
  std::int64_t only_a = 0;          // same in a, apart in b
  std::int64_t only_b = 0;          // apart in a, same in b
  std::int64_t both_apart = 0;
};

inline PairCounts count_pairs(const font::LabelVector& a, const font::LabelVector& b) {
  PairCounts c;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = i + 1; j < a.size(); ++j) {
      const bool sa = a(i) == a(j);
      const bool sb = b(i) == b(j);
      if (sa && sb) c.both_together += 1;
      else if (sa) c.only_a += 1;
      else if (sb) c.only_b += 1;
      else c.both_apart += 1;
    }
  }
  return c;
}

// ARI from pair counts: 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
// Zero denominator means identical degenerate partitions; defined as 1.
inline font::Fraction ari_pair_counting_exact(const font::LabelVector& a,
                                              const font::LabelVector& b) {
  const PairCounts c = count_pairs(a, b);
  __int128 num = 2 * (static_cast<__int128>(c.both_together) * c.both_apart -
                      static_cast<__int128>(c.only_a) * c.only_b);
  __int128 den = static_cast<__int128>(c.both_together + c.only_a) * (c.only_a + c.both_apart) +
                 static_cast<__int128>(c.both_together + c.only_b) * (c.only_b + c.both_apart);
  if (den == 0) return font::Fraction{1, 1};
  __int128 g = num < 0 ? -num : num;
  __int128 h = den;
  while (h != 0) {
    __int128 t = g % h;
    g = h;
    h = t;
  }
  if (g != 0) {
    num /= g;
    den /= g;
  }
  return font::Fraction{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

inline double ari_pair_counting(const font::LabelVector& a, const font::LabelVector& b) {
  const font::Fraction f = ari_pair_counting_exact(a, b);
  return static_cast<double>(f.num) / static_cast<double>(f.den);
}

// Direct dense construction: D_ij = d(beta_{y_i}, beta_{y_j}).
inline font::Matrix dense_distance_matrix(const font::Matrix& betas,
                                          const font::LabelVector& labels) {
  const int n = static_cast<int>(labels.size());
  font::Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = (betas.row(labels(i) - 1) - betas.row(labels(j) - 1)).norm();
    }
  }
  return d;
}

inline font::Vector vectorize(const font::Matrix& m) {
  return Eigen::Map<const font::Vector>(m.data(), m.size());
}

// Dense agreement: cosine of the vectorized N x N matrices.
inline font::Matrix dense_agreement(const std::vector<font::Matrix>& dense_mats) {
  const int m = static_cast<int>(dense_mats.size());
  font::Matrix g(m, m);
  for (int t = 0; t < m; ++t) {
    for (int s = 0; s < m; ++s) {
      const font::Vector ft = vectorize(dense_mats[t]);
      const font::Vector fs = vectorize(dense_mats[s]);
      g(t, s) = ft.dot(fs) / (ft.norm() * fs.norm());
    }
  }
  return g;
}

// Dense weighted consensus: sum_m w_m D_m / ||D_m||_F.
inline font::Matrix dense_consensus(const std::vector<font::Matrix>& dense_mats,
                                    const font::Vector& weights) {
  font::Matrix d = font::Matrix::Zero(dense_mats.front().rows(), dense_mats.front().cols());
  for (std::size_t m = 0; m < dense_mats.size(); ++m) {
    const double norm = dense_mats[m].norm();
    if (norm > 0.0) d += weights(static_cast<int>(m)) * dense_mats[m] / norm;
  }
  return d;
}

// Cyclic Jacobi for symmetric matrices; returns eigenvalues (descending) and
// eigenvectors in matching columns.
inline void jacobi_eigen(font::Matrix a, font::Vector& values, font::Matrix& vectors) {
  const int n = static_cast<int>(a.rows());
  vectors = font::Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        font::Matrix rot = font::Matrix::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        vectors = vectors * rot;
      }
    }
  }
  values = a.diagonal();
  // Sort descending by eigenvalue.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return values(x) > values(y); });
  font::Vector sv(n);
  font::Matrix sm(n, n);
  for (int i = 0; i < n; ++i) {
    sv(i) = values(order[i]);
    sm.col(i) = vectors.col(order[i]);
  }
  values = sv;
  vectors = sm;
}

}  // namespace oracle
