#include "font/types.hpp"

namespace font {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kmeans ? "kmeans" : "markov_mixture";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "kmeans") return ModelKind::kmeans;
  if (s == "markov_mixture") return ModelKind::markov_mixture;
  throw ConfigInvalid("unknown model kind: " + s);
}

Matrix ClusterModelParams::transition(int k) const {
  if (kind != ModelKind::markov_mixture) {
    throw InvalidState("transition(): not a Markov mixture model");
  }
  Matrix T(S, S);
  for (int r = 0; r < S; ++r) {
    T.row(r) = betas.row(k).segment(S + r * S, S);
  }
  return T;
}

Vector ClusterModelParams::initial(int k) const {
  if (kind != ModelKind::markov_mixture) {
    throw InvalidState("initial(): not a Markov mixture model");
  }
  return betas.row(k).segment(0, S).transpose();
}

void ClusterModelParams::validate() const {
  if (K <= 0) throw ConfigInvalid("ClusterModelParams: K must be positive");
  if (betas.rows() != K) throw ShapeMismatch("ClusterModelParams: betas must have K rows");
  if (!betas.allFinite()) throw NonFinite("ClusterModelParams: non-finite beta");
  if (kind == ModelKind::markov_mixture) {
    if (S <= 0) throw ConfigInvalid("ClusterModelParams: S must be positive");
    if (betas.cols() != S + S * S) {
      throw ShapeMismatch("ClusterModelParams: Markov beta length must be S + S^2");
    }
    const double tol = 1e-9;
    for (int k = 0; k < K; ++k) {
      if (betas.row(k).minCoeff() < 0.0) {
        throw ConfigInvalid("ClusterModelParams: negative probability entry");
      }
      if (std::abs(betas.row(k).segment(0, S).sum() - 1.0) > tol) {
        throw ConfigInvalid("ClusterModelParams: initial probabilities must sum to 1");
      }
      for (int s = 0; s < S; ++s) {
        if (std::abs(betas.row(k).segment(S + s * S, S).sum() - 1.0) > tol) {
          throw ConfigInvalid("ClusterModelParams: transition row must sum to 1");
        }
      }
    }
    if (mixing.size() != K) throw ShapeMismatch("ClusterModelParams: mixing must have K entries");
    if (std::abs(mixing.sum() - 1.0) > tol || mixing.minCoeff() < 0.0) {
      throw ConfigInvalid("ClusterModelParams: mixing must be a probability vector");
    }
  }
}

void validate_sequences(const SequenceDataset& data, int S) {
  for (const auto& seq : data.sequences) {
    if (seq.size() < 2) throw InvalidState("sequence shorter than 2");
    for (int sym : seq) {
      if (sym < 1 || sym > S) {
        throw InvalidState("sequence symbol outside [1, S]");
      }
    }
  }
}

int MultiSiteDataset::n_total() const {
  int n = 0;
  if (kind == ModelKind::kmeans) {
    for (const auto& s : vector_sites) n += s.n();
  } else {
    for (const auto& s : sequence_sites) n += s.n();
  }
  return n;
}

LabelVector MultiSiteDataset::all_true_labels() const {
  LabelVector out(n_total());
  int at = 0;
  auto append = [&](const LabelVector& t, int n) {
    for (int i = 0; i < n; ++i) out(at++) = t.size() > 0 ? t(i) : 0;
  };
  if (kind == ModelKind::kmeans) {
    for (const auto& s : vector_sites) append(s.true_labels, s.n());
  } else {
    for (const auto& s : sequence_sites) append(s.true_labels, s.n());
  }
  return out;
}

Eigen::Array<bool, Eigen::Dynamic, 1> MultiSiteDataset::all_outlier_mask() const {
  Eigen::Array<bool, Eigen::Dynamic, 1> out(n_total());
  out.setConstant(false);
  if (kind != ModelKind::kmeans) return out;
  int at = 0;
  for (const auto& s : vector_sites) {
    for (int i = 0; i < s.n(); ++i) {
      out(at++) = s.outlier_mask.size() > 0 && s.outlier_mask(i);
    }
  }
  return out;
}

void filter_for_ari(const LabelVector& a, const LabelVector& b,
                    const Eigen::Array<bool, Eigen::Dynamic, 1>& mask,
                    LabelVector& a_out, LabelVector& b_out) {
  if (a.size() != b.size()) throw LengthMismatch("filter_for_ari: length mismatch");
  std::vector<int> av, bv;
  av.reserve(a.size());
  bv.reserve(b.size());
  for (int i = 0; i < a.size(); ++i) {
    const bool masked = mask.size() > 0 && mask(i);
    if (masked || a(i) == 0 || b(i) == 0) continue;
    av.push_back(a(i));
    bv.push_back(b(i));
  }
  a_out = Eigen::Map<const LabelVector>(av.data(), static_cast<int>(av.size()));
  b_out = Eigen::Map<const LabelVector>(bv.data(), static_cast<int>(bv.size()));
}

}  // namespace font
