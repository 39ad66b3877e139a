#include "font/markov.hpp"

#include "font/rng.hpp"

#include <cmath>
#include <limits>

namespace font {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

struct MarkovModel {
  Matrix initial;                  // K x S
  std::vector<Matrix> transition;  // K of S x S
  Vector mixing;                   // K
};

double component_loglik(const MarkovModel& m, int k, const std::vector<int>& seq) {
  double ll = safe_log(m.initial(k, seq.front() - 1));
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    ll += safe_log(m.transition[k](seq[t] - 1, seq[t + 1] - 1));
  }
  return ll;
}

// log(sum exp(a_k)) with -inf handling.
double logsumexp(const Vector& a) {
  const double mx = a.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (int k = 0; k < a.size(); ++k) s += std::exp(a(k) - mx);
  return mx + std::log(s);
}

MarkovModel pack_to_model(const ClusterModelParams& p) {
  MarkovModel m;
  m.initial = Matrix(p.K, p.S);
  m.transition.reserve(p.K);
  for (int k = 0; k < p.K; ++k) {
    m.initial.row(k) = p.betas.row(k).segment(0, p.S);
    m.transition.push_back(p.transition(k));
  }
  m.mixing = p.mixing;
  return m;
}

ClusterModelParams model_to_params(const MarkovModel& m, int K, int S) {
  ClusterModelParams p;
  p.kind = ModelKind::markov_mixture;
  p.K = K;
  p.S = S;
  p.betas = Matrix(K, S + S * S);
  for (int k = 0; k < K; ++k) {
    p.betas.row(k).segment(0, S) = m.initial.row(k);
    for (int s = 0; s < S; ++s) {
      p.betas.row(k).segment(S + s * S, S) = m.transition[k].row(s);
    }
  }
  p.mixing = m.mixing;
  return p;
}

void smooth_and_renormalize(MarkovModel& m, double eps) {
  const int K = static_cast<int>(m.mixing.size());
  for (int k = 0; k < K; ++k) {
    m.initial.row(k) = (m.initial.row(k).array() + eps) / (m.initial.row(k).sum() + eps * m.initial.cols());
    for (int s = 0; s < m.transition[k].rows(); ++s) {
      const double tot = m.transition[k].row(s).sum() + eps * m.transition[k].cols();
      m.transition[k].row(s) = (m.transition[k].row(s).array() + eps) / tot;
    }
  }
  m.mixing = (m.mixing.array() + eps) / (m.mixing.sum() + eps * K);
}

struct EmState {
  MarkovModel model;
  Matrix resp;  // N x K posterior responsibilities
  double loglik = kNegInf;
  std::vector<double> trace;
};

// M-step from responsibilities: exact maximum-likelihood counts, no
// smoothing inside the loop so EM monotonicity holds exactly.
MarkovModel m_step(const SequenceDataset& data, const Matrix& resp, int K, int S) {
  const int n = data.n();
  MarkovModel m;
  m.initial = Matrix::Zero(K, S);
  m.transition.assign(K, Matrix::Zero(S, S));
  m.mixing = Vector::Zero(K);
  for (int i = 0; i < n; ++i) {
    const auto& x = data.sequences[i];
    for (int k = 0; k < K; ++k) {
      const double r = resp(i, k);
      m.mixing(k) += r;
      m.initial(k, x.front() - 1) += r;
      for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        m.transition[k](x[t] - 1, x[t + 1] - 1) += r;
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const double mass = m.initial.row(k).sum();
    if (mass > 0.0) {
      m.initial.row(k) /= mass;
    } else {
      m.initial.row(k).setConstant(1.0 / S);
    }
    for (int s = 0; s < S; ++s) {
      const double row = m.transition[k].row(s).sum();
      if (row > 0.0) {
        m.transition[k].row(s) /= row;
      } else {
        m.transition[k].row(s).setConstant(1.0 / S);
      }
    }
  }
  m.mixing /= m.mixing.sum();
  return m;
}

// E-step: responsibilities and observed-data log-likelihood.
double e_step(const SequenceDataset& data, const MarkovModel& m, int K, Matrix& resp) {
  const int n = data.n();
  double total = 0.0;
  Vector a(K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      a(k) = safe_log(m.mixing(k)) + component_loglik(m, k, data.sequences[i]);
    }
    const double lse = logsumexp(a);
    total += lse;
    if (std::isfinite(lse)) {
      for (int k = 0; k < K; ++k) resp(i, k) = std::exp(a(k) - lse);
    } else {
      resp.row(i).setConstant(1.0 / K);
    }
  }
  return total;
}

EmState em_once(const SequenceDataset& data, int K, int S, const FitConfig& cfg, Rng& rng) {
  const int n = data.n();
  EmState st;
  st.resp = Matrix(n, K);
  for (int i = 0; i < n; ++i) st.resp.row(i) = rng.dirichlet(K, 1.0).transpose();

  st.model = m_step(data, st.resp, K, S);
  double prev = kNegInf;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const double ll = e_step(data, st.model, K, st.resp);
    if (std::isfinite(prev) && ll < prev - 1e-8) {
      throw Error("EM log-likelihood decreased within a restart");
    }
    st.trace.push_back(ll);
    st.loglik = ll;
    const bool converged =
        std::isfinite(prev) && std::abs(ll - prev) <= cfg.tol * std::max(1.0, std::abs(prev));
    prev = ll;
    if (converged) break;
    st.model = m_step(data, st.resp, K, S);
  }
  return st;
}

}  // namespace

double markov_sequence_loglik(const ClusterModelParams& params, int k,
                              const std::vector<int>& seq) {
  if (params.kind != ModelKind::markov_mixture) {
    throw InvalidState("markov_sequence_loglik: not a Markov mixture model");
  }
  if (seq.size() < 2) throw InvalidState("markov_sequence_loglik: sequence shorter than 2");
  for (int sym : seq) {
    if (sym < 1 || sym > params.S) throw InvalidState("markov_sequence_loglik: symbol outside [1, S]");
  }
  double ll = safe_log(params.betas(k, seq.front() - 1));
  const int S = params.S;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    ll += safe_log(params.betas(k, S + (seq[t] - 1) * S + (seq[t + 1] - 1)));
  }
  return ll;
}

int markov_assign(const ClusterModelParams& params, const std::vector<int>& seq) {
  if (params.kind != ModelKind::markov_mixture) {
    throw InvalidState("markov_assign: not a Markov mixture model");
  }
  int best = 0;
  double best_score = kNegInf;
  for (int k = 0; k < params.K; ++k) {
    const double score = safe_log(params.mixing(k)) + markov_sequence_loglik(params, k, seq);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best + 1;
}

MarkovFitResult markov_mixture_fit(const SequenceDataset& data, int K, int S,
                                   const FitConfig& cfg) {
  const int n = data.n();
  if (K < 1) throw ConfigInvalid("markov_mixture_fit: K must be >= 1");
  if (n < K) throw TooFewSequences("markov_mixture_fit: fewer sequences than clusters");
  validate_sequences(data, S);

  EmState best;
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(cfg.seed, {0x6d6b6f76u, static_cast<std::uint64_t>(r)});
    EmState st = em_once(data, K, S, cfg, rng);
    if (st.loglik > best.loglik || best.trace.empty()) {
      best = std::move(st);
    }
  }

  smooth_and_renormalize(best.model, cfg.smoothing);
  MarkovFitResult out;
  out.params = model_to_params(best.model, K, S);
  out.log_likelihood = best.loglik;
  out.loglik_trace = std::move(best.trace);

  // Labels and degeneracy under the returned (smoothed) parameters, so that
  // labels(i) == markov_assign(params, seq_i) holds exactly.
  out.labels = LabelVector(n);
  Matrix resp(n, K);
  MarkovModel smoothed = pack_to_model(out.params);
  e_step(data, smoothed, K, resp);
  for (int i = 0; i < n; ++i) out.labels(i) = markov_assign(out.params, data.sequences[i]);
  for (int k = 0; k < K; ++k) {
    if (resp.col(k).sum() < 1.0) out.degenerate_components.push_back(k + 1);
  }
  return out;
}

}  // namespace font
