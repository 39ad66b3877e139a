// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier statistical cells run replicates in parallel;
// every random quantity is derived from fixed seeds, so reruns are
// identical.

#include "font/benchmarks.hpp"
#include "font/federation.hpp"
#include "font/io.hpp"
#include "font/kmeans.hpp"
#include "font/markov.hpp"
#include "font/metrics.hpp"
#include "font/rng.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>
#include <functional>
#include <thread>
#include <vector>

using namespace font;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
            << std::endl;
  if (!pass) g_failures += 1;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void parallel_replicates(int reps, const std::function<void(int)>& body) {
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      body(r);
    }
  };
  const int threads =
      std::min(reps, std::max(1, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs.empty() ? std::numeric_limits<double>::quiet_NaN() : xs[xs.size() / 2];
}

double masked_ari(const LabelVector& labels, const LabelVector& truth,
                  const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  LabelVector a, b;
  filter_for_ari(labels, truth, mask, a, b);
  return adjusted_rand_index(a, b);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: contingency-identity agreement equals the dense N^2 route.

void criterion_1() {
  const auto t0 = Clock::now();
  Rng rng(0xC1);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = 20 + static_cast<int>(rng.uniform_int(0, 180));
    const int m = 2 + static_cast<int>(rng.uniform_int(0, 6));
    std::vector<DistanceRep> reps;
    std::vector<Matrix> dense;
    for (int j = 0; j < m; ++j) {
      const int k = 2 + static_cast<int>(rng.uniform_int(0, 3));
      ClusterModelParams params;
      params.kind = ModelKind::kmeans;
      params.K = k;
      params.betas = Matrix(k, 4);
      for (int i = 0; i < params.betas.size(); ++i) params.betas.data()[i] = rng.uniform(-2, 2);
      LabelVector labels(n);
      for (int i = 0; i < n; ++i) {
        labels(i) = i < k ? i + 1 : 1 + static_cast<int>(rng.uniform_int(0, k - 1));
      }
      reps.push_back(build_distance_rep(params, labels));
      dense.push_back(reps.back().dense());
    }
    const Matrix g = agreement_matrix(reps);
    const Matrix g_dense = oracle::dense_agreement(dense);
    worst = std::max(worst, (g - g_dense).cwiseAbs().maxCoeff());
  }
  const double secs = elapsed(t0);
  report(1, worst < 1e-10 && secs < 30.0,
         "agreement identity vs dense oracle, 100 instances: max |diff| = " + fmt(worst) +
             ", " + fmt(secs) + " s (< 30 s)");
}

// ---------------------------------------------------------------------------
// Criterion 2: ARI equals brute-force pair counting.

void criterion_2() {
  bool exact_ok = true;
  double worst_float = 0.0;
  long checked = 0;

  // Exhaustive over all label-vector pairs for N <= 5, K <= 3.
  for (int n = 2; n <= 5 && exact_ok; ++n) {
    std::vector<LabelVector> all;
    LabelVector v(n);
    const long total = static_cast<long>(std::pow(3, n));
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < n; ++i) {
        v(i) = static_cast<int>(c % 3) + 1;
        c /= 3;
      }
      all.push_back(v);
    }
    for (const auto& a : all) {
      for (const auto& b : all) {
        const Fraction lib = adjusted_rand_index_exact(a, b);
        const Fraction ref = oracle::ari_pair_counting_exact(a, b);
        exact_ok = exact_ok && lib == ref;
        worst_float =
            std::max(worst_float, std::abs(adjusted_rand_index(a, b) - ref.value()));
        checked += 1;
      }
    }
  }
  // Plus 1,000 random pairs at N = 8, K <= 3.
  Rng rng(0xC2);
  for (int trial = 0; trial < 1000; ++trial) {
    LabelVector a(8), b(8);
    for (int i = 0; i < 8; ++i) {
      a(i) = 1 + static_cast<int>(rng.uniform_int(0, 2));
      b(i) = 1 + static_cast<int>(rng.uniform_int(0, 2));
    }
    const Fraction lib = adjusted_rand_index_exact(a, b);
    const Fraction ref = oracle::ari_pair_counting_exact(a, b);
    exact_ok = exact_ok && lib == ref;
    worst_float = std::max(worst_float, std::abs(adjusted_rand_index(a, b) - ref.value()));
    checked += 1;
  }
  report(2, exact_ok && worst_float < 1e-12,
         "ARI vs pair-counting oracle over " + std::to_string(checked) +
             " pairs: exact path identical, float |diff| max = " + fmt(worst_float));
}

// ---------------------------------------------------------------------------
// Criteria 3/4/5/7: simulation cells. One replicate computes every method on
// shared data and local models; matched seeds across cells reuse the same
// replicate seed derivation.

struct CellReplicate {
  double font = 0, consensus = 0, local = 0, kfed = 0;
  double ortho_font = 0;        // criterion 7 variant
  double ortho_bad_weight = 0;  // mean weight of noninformative models
  double ortho_good_weight = 0;
  bool valid = true;
};

SimulationConfig cell_config(Regime regime, int m_sites, double sigma2, std::uint64_t seed) {
  SimulationConfig sim;
  sim.M = m_sites;
  sim.K = 5;
  sim.p = 10;
  sim.sigma2 = sigma2;
  sim.regime = regime;
  sim.seed = seed;
  return sim;
}

// Orthogonalized noninformative representation: random split of each true
// cluster into two halves, with distance mass only between the halves. Its
// vectorized distance matrix is exactly orthogonal to the oracle's.
DistanceRep noninformative_rep(const LabelVector& truth, int k, Rng& rng) {
  DistanceRep rep;
  rep.labels = LabelVector(truth.size());
  for (int i = 0; i < truth.size(); ++i) {
    rep.labels(i) = 2 * truth(i) - static_cast<int>(rng.uniform_int(0, 1));
  }
  rep.table = Matrix::Zero(2 * k, 2 * k);
  for (int c = 0; c < k; ++c) {
    rep.table(2 * c, 2 * c + 1) = 1.0;
    rep.table(2 * c + 1, 2 * c) = 1.0;
  }
  rep.counts = Eigen::VectorXi::Zero(2 * k);
  for (int i = 0; i < rep.labels.size(); ++i) rep.counts(rep.labels(i) - 1) += 1;
  double frob2 = 0.0;
  for (int a = 0; a < 2 * k; ++a) {
    for (int b = 0; b < 2 * k; ++b) {
      frob2 += double(rep.counts(a)) * rep.counts(b) * rep.table(a, b) * rep.table(a, b);
    }
  }
  rep.frob_norm = std::sqrt(frob2);
  rep.degenerate = rep.frob_norm == 0.0;
  return rep;
}

std::vector<CellReplicate> run_cell(Regime regime, int m_sites, double sigma2, int replicates,
                                    std::uint64_t master, bool with_kfed, bool with_orthogonal_models) {
  std::vector<CellReplicate> out(replicates);
  parallel_replicates(replicates, [&](int r) {
    const std::uint64_t data_seed =
        Rng::stream(master, {0xDA7A, static_cast<std::uint64_t>(r)}).next_u64();
    const std::uint64_t fit_seed =
        Rng::stream(master, {0xF17, static_cast<std::uint64_t>(r)}).next_u64();
    const MultiSiteDataset ds = gen_gaussian_sites(cell_config(regime, m_sites, sigma2, data_seed));
    const LabelVector truth = ds.all_true_labels();
    const auto mask = ds.all_outlier_mask();
    const int k = 5;

    FontOptions opt;
    opt.K = k;
    opt.fit.seed = fit_seed;
    const LocalModels lm = fit_local_models(ds, opt);
    CellReplicate& rep = out[r];

    const CenterResult center = center_ensemble(lm.params, lm.label_matrix, k, opt.fit);
    rep.font = masked_ari(center.labels, truth, mask);

    FitConfig method_cfg = opt.fit;
    method_cfg.seed = Rng::stream(fit_seed, {0xBA5E}).next_u64();
    rep.consensus = run_consensus(lm.label_matrix, k, method_cfg, truth, mask).ari;
    rep.local = run_local(ds, k, method_cfg).ari;
    if (with_kfed) rep.kfed = run_kfed(ds, k, k, method_cfg).ari;

    if (with_orthogonal_models) {
      // Replace ceil(20%) of the models with orthogonal random-label reps.
      const int m_eff = static_cast<int>(lm.params.size());
      const int n_bad = static_cast<int>(std::ceil(0.2 * m_eff));
      Rng pick = Rng::stream(fit_seed, {0xBAD});
      std::vector<int> order(m_eff);
      for (int j = 0; j < m_eff; ++j) order[j] = j;
      for (int i = 0; i < n_bad; ++i) {
        const int j = static_cast<int>(pick.uniform_int(i, m_eff - 1));
        std::swap(order[i], order[j]);
      }
      std::vector<bool> is_bad(m_eff, false);
      for (int i = 0; i < n_bad; ++i) is_bad[order[i]] = true;

      std::vector<DistanceRep> reps;
      for (int j = 0; j < m_eff; ++j) {
        if (is_bad[j]) {
          reps.push_back(noninformative_rep(truth, k, pick));
        } else {
          reps.push_back(build_distance_rep(lm.params[j], lm.label_matrix.col(j)));
        }
        reps.back().model_id = j;
      }
      const CenterResult ortho = center_ensemble_reps(reps, lm.label_matrix, k, opt.fit);
      rep.ortho_font = masked_ari(ortho.labels, truth, mask);
      double bad_sum = 0, good_sum = 0;
      for (int j = 0; j < m_eff; ++j) {
        (is_bad[j] ? bad_sum : good_sum) += ortho.weights_full(j);
      }
      rep.ortho_bad_weight = bad_sum / n_bad;
      rep.ortho_good_weight = good_sum / (m_eff - n_bad);
    }
  });
  return out;
}

std::vector<double> column(const std::vector<CellReplicate>& reps, double CellReplicate::*field) {
  std::vector<double> xs;
  for (const auto& r : reps) xs.push_back(r.*field);
  return xs;
}

// ---------------------------------------------------------------------------

void criterion_6() {
  const int m_sites = 50;
  struct NoiseCell {
    double sigma2;
    int replicates;
    std::vector<double> cosines;
    std::vector<double> corrs;
  };
  std::vector<NoiseCell> cells = {{0.05, 50, {}, {}}, {0.1, 50, {}, {}}, {0.3, 50, {}, {}}};
  for (auto& cell : cells) {
    cell.cosines.resize(cell.replicates);
    cell.corrs.resize(cell.replicates,
                      std::numeric_limits<double>::quiet_NaN());
    parallel_replicates(cell.replicates, [&](int r) {
      const std::uint64_t data_seed =
          Rng::stream(0xC6, {static_cast<std::uint64_t>(cell.sigma2 * 1000),
                             static_cast<std::uint64_t>(r)})
              .next_u64();
      SimulationConfig sim = cell_config(Regime::imbalanced, m_sites, cell.sigma2, data_seed);
      const MultiSiteDataset ds = gen_gaussian_sites(sim);
      const LabelVector truth = ds.all_true_labels();

      FontOptions opt;
      opt.K = sim.K;
      opt.fit.seed = Rng::stream(data_seed, {0xF17}).next_u64();
      const LocalModels lm = fit_local_models(ds, opt);

      ClusterModelParams oracle_params;
      oracle_params.kind = ModelKind::kmeans;
      oracle_params.K = sim.K;
      oracle_params.betas = ds.true_mus;
      const DistanceRep oracle_rep = build_distance_rep(oracle_params, truth);

      std::vector<DistanceRep> kept;
      std::vector<int> kept_idx;
      for (int j = 0; j < m_sites; ++j) {
        DistanceRep rep = build_distance_rep(lm.params[j], lm.label_matrix.col(j));
        if (!rep.degenerate) {
          kept.push_back(std::move(rep));
          kept_idx.push_back(j);
        }
      }
      const AgreementWeights w = spectral_weights(agreement_matrix(kept));
      Vector truth_cos(static_cast<int>(kept.size()));
      Vector per_ari(static_cast<int>(kept.size()));
      for (std::size_t i = 0; i < kept.size(); ++i) {
        truth_cos(static_cast<int>(i)) = rep_cosine(kept[i], oracle_rep);
        per_ari(static_cast<int>(i)) =
            adjusted_rand_index(lm.label_matrix.col(kept_idx[i]), truth);
      }
      cell.cosines[r] = w.weights.dot(truth_cos) / truth_cos.norm();
      const Correlation c = weight_alignment(w.weights, per_ari);
      if (c.defined) cell.corrs[r] = c.value;
    });
  }

  int cos_ok = 0;
  for (double c : cells[0].cosines) cos_ok += c >= 0.95 ? 1 : 0;
  std::vector<double> medians;
  for (auto& cell : cells) {
    std::vector<double> defined;
    for (double c : cell.corrs) {
      if (std::isfinite(c)) defined.push_back(c);
    }
    medians.push_back(median_of(defined));
  }
  const bool part_cos = cos_ok >= 45;
  const bool part_median = medians[0] >= 0.5;
  const bool part_trend = medians[0] >= medians[2];  // higher at low noise than at high
  report(6, part_cos && part_median && part_trend,
         "spectral weights track the oracle cosines: cos(w_hat, w) >= 0.95 in " +
             std::to_string(cos_ok) + "/50 (need 45); alignment medians by sigma2 " +
             fmt(medians[0]) + " / " + fmt(medians[1]) + " / " + fmt(medians[2]) +
             " (need first >= 0.5 and >= last)");
}

// ---------------------------------------------------------------------------

void criterion_8() {
  const int replicates = 50;
  std::vector<int> font_wins(replicates, 0);
  std::vector<double> font_div(replicates), local_div(replicates);
  parallel_replicates(replicates, [&](int r) {
    // Two sites, four shared chains over five states, sized so that the two
    // sites' independent fits land in genuinely different local structure.
    MarkovSimConfig sim;
    sim.M = 2;
    sim.K = 4;
    sim.S = 5;
    sim.n_min = 60;
    sim.n_max = 100;
    sim.len_min = 6;
    sim.len_max = 12;
    sim.separation = 0.5;
    sim.seed = Rng::stream(0xC8, {static_cast<std::uint64_t>(r)}).next_u64();
    const MultiSiteDataset ds = gen_markov_sites(sim);
    const int k = sim.K, S = sim.S;

    FontOptions opt;
    opt.K = k;
    opt.fit.seed = Rng::stream(sim.seed, {0xF17}).next_u64();
    opt.pseudo.enabled = true;
    opt.pseudo.replicas = 4;
    opt.pseudo.frac = 0.8;
    const FontRun run = run_font(ds, opt);

    const int n0 = ds.sequence_sites[0].n();
    const auto stats_a =
        empirical_markov_stats(ds.sequence_sites[0], run.labels.head(n0), k, S);
    const auto stats_b = empirical_markov_stats(
        ds.sequence_sites[1], run.labels.tail(ds.sequence_sites[1].n()), k, S);
    font_div[r] = transition_divergence(stats_a, stats_b).mean_frob_T;

    // Independent local fits, index-matched by maximum overlap of the two
    // models' labels over all subjects.
    FitConfig local_cfg = opt.fit;
    local_cfg.seed = Rng::stream(sim.seed, {0x10CA1}).next_u64();
    const MarkovFitResult fit_a = markov_mixture_fit(ds.sequence_sites[0], k, S, local_cfg);
    local_cfg.seed = Rng::stream(sim.seed, {0x10CA2}).next_u64();
    const MarkovFitResult fit_b = markov_mixture_fit(ds.sequence_sites[1], k, S, local_cfg);
    LabelVector a_all(ds.n_total()), b_all(ds.n_total());
    int at = 0;
    for (const auto& site : ds.sequence_sites) {
      for (const auto& seq : site.sequences) {
        a_all(at) = markov_assign(fit_a.params, seq);
        b_all(at) = markov_assign(fit_b.params, seq);
        at += 1;
      }
    }
    const std::vector<int> perm = match_clusters_by_overlap(a_all, b_all, k);
    LabelVector b_local(fit_b.labels.size());
    std::vector<int> inverse(k);
    for (int c = 0; c < k; ++c) inverse[perm[c]] = c;
    for (int i = 0; i < fit_b.labels.size(); ++i) {
      b_local(i) = inverse[fit_b.labels(i) - 1] + 1;
    }
    const auto local_a = empirical_markov_stats(ds.sequence_sites[0], fit_a.labels, k, S);
    const auto local_b = empirical_markov_stats(ds.sequence_sites[1], b_local, k, S);
    local_div[r] = transition_divergence(local_a, local_b).mean_frob_T;
    font_wins[r] = font_div[r] <= local_div[r] ? 1 : 0;
  });
  int wins = 0;
  for (int w : font_wins) wins += w;
  report(8, wins >= 40,
         "cross-site transition divergence, consensus vs local strata: consensus no worse in " +
             std::to_string(wins) + "/50 (need 40); mean Frobenius gap " +
             fmt(mean_of(font_div)) + " vs " + fmt(mean_of(local_div)));
}

// ---------------------------------------------------------------------------

void criterion_9() {
  bool ok = true;
  std::string detail;

  // Vector pipeline, no pseudo-sites.
  {
    SimulationConfig sim = cell_config(Regime::imbalanced, 4, 0.1, 0x91);
    const MultiSiteDataset ds = gen_gaussian_sites(sim);
    FontOptions opt;
    opt.K = 5;
    opt.fit.seed = 0x91F;
    const FontRun in_proc = run_font(ds, opt);
    opt.json_roundtrip = true;
    const FontRun wire = run_font(ds, opt);
    const bool count_ok = in_proc.messages_round1 + in_proc.messages_round2 == 2 * 4;
    const bool labels_ok = (in_proc.labels - wire.labels).cwiseAbs().maxCoeff() == 0;
    ok = ok && count_ok && labels_ok;
    detail += "vector: 2M messages " + std::string(count_ok ? "ok" : "VIOLATED") +
              ", wire labels " + (labels_ok ? "identical" : "DIFFER");
  }

  // Sequence pipeline with pseudo-sites (M_eff = 8).
  {
    MarkovSimConfig sim;
    sim.M = 2;
    sim.K = 3;
    sim.S = 5;
    sim.n_min = 80;
    sim.n_max = 120;
    sim.separation = 0.7;
    sim.seed = 0x92;
    const MultiSiteDataset ds = gen_markov_sites(sim);
    FontOptions opt;
    opt.K = 3;
    opt.fit.seed = 0x92F;
    opt.pseudo.enabled = true;
    opt.pseudo.replicas = 4;
    opt.pseudo.frac = 0.8;
    const FontRun in_proc = run_font(ds, opt);
    opt.json_roundtrip = true;
    const FontRun wire = run_font(ds, opt);
    const bool count_ok = in_proc.messages_round1 + in_proc.messages_round2 == 2 * 8;
    const bool labels_ok = (in_proc.labels - wire.labels).cwiseAbs().maxCoeff() == 0;
    ok = ok && count_ok && labels_ok;
    detail += "; sequence+pseudo: 2M messages " + std::string(count_ok ? "ok" : "VIOLATED") +
              ", wire labels " + (labels_ok ? "identical" : "DIFFER");
  }

  // The schema check rejects feature payloads.
  {
    nlohmann::json r1 = {{"v", 1}, {"site_id", 0}, {"kind", "kmeans"}, {"K", 1},
                         {"betas", {{0.0}}}, {"n_local", 3}};
    bool rejected = false;
    r1["rows"] = {{1.0, 2.0}, {3.0, 4.0}};
    try {
      validate_round1_json(r1);
    } catch (const ProtocolViolation&) {
      rejected = true;
    }
    ok = ok && rejected;
    detail += std::string("; schema rejects raw rows: ") + (rejected ? "yes" : "NO");
  }
  report(9, ok, detail);
}

// ---------------------------------------------------------------------------

void criterion_10() {
  bool kmeans_ok = true, em_ok = true;
  Rng rng(0xCA);
  for (int f = 0; f < 6; ++f) {
    VectorDataset data;
    const int n = 80 + static_cast<int>(rng.uniform_int(0, 80));
    data.rows = Matrix(n, 5);
    for (int i = 0; i < data.rows.size(); ++i) data.rows.data()[i] = rng.uniform(-3, 3);
    FitConfig cfg;
    cfg.seed = rng.next_u64();
    const KMeansResult fit = kmeans_fit(data, 4, cfg);
    for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
      kmeans_ok = kmeans_ok &&
                  fit.objective_trace[t] <= fit.objective_trace[t - 1] * (1 + 1e-9) + 1e-12;
    }
  }
  for (int f = 0; f < 6; ++f) {
    MarkovSimConfig sim;
    sim.M = 1;
    sim.K = 2;
    sim.S = 4;
    sim.n_min = 60;
    sim.n_max = 90;
    sim.separation = 0.4 + 0.1 * f;
    sim.seed = rng.next_u64();
    const MultiSiteDataset ds = gen_markov_sites(sim);
    FitConfig cfg;
    cfg.seed = rng.next_u64();
    const MarkovFitResult fit = markov_mixture_fit(ds.sequence_sites[0], 2, 4, cfg);
    for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t) {
      em_ok = em_ok && fit.loglik_trace[t] >= fit.loglik_trace[t - 1] - 1e-8;
    }
  }
  // Both fits also enforce these bounds internally and throw on violation,
  // so every fixture in criteria 3-8 re-asserted them implicitly.
  report(10, kmeans_ok && em_ok,
         std::string("per-iteration monotonicity on explicit fixtures: k-means ") +
             (kmeans_ok ? "non-increasing" : "VIOLATED") + ", EM " +
             (em_ok ? "non-decreasing" : "VIOLATED") + " (also enforced inside every fit)");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion_1();
  criterion_2();

  // Cell A: homogeneous, M=10, sigma2=0.05, 50 replicates (criteria 3 and 7).
  const auto cell_a_t0 = Clock::now();
  const auto cell_a = run_cell(Regime::homogeneous, 10, 0.05, 50, 0xA3, false, true);
  const double cell_a_secs = elapsed(cell_a_t0);
  {
    const double font = mean_of(column(cell_a, &CellReplicate::font));
    const double consensus = mean_of(column(cell_a, &CellReplicate::consensus));
    const double local = mean_of(column(cell_a, &CellReplicate::local));
    const bool pass = std::abs(font - consensus) <= 0.03 && font >= local - 0.01 &&
                      cell_a_secs < 300.0;
    report(3, pass,
           "homogeneous M=10 sigma2=0.05 x50: mean ARI font=" + fmt(font) +
               " consensus=" + fmt(consensus) + " (|diff| <= 0.03), local=" + fmt(local) +
               " (font >= local - 0.01), " + fmt(cell_a_secs) + " s (< 300 s)");
  }

  // Cell B: imbalanced, M=5, sigma2=0.05 (criterion 4).
  const auto cell_b = run_cell(Regime::imbalanced, 5, 0.05, 50, 0xB4, true, false);
  {
    const double font = mean_of(column(cell_b, &CellReplicate::font));
    const double consensus = mean_of(column(cell_b, &CellReplicate::consensus));
    const double kfed = mean_of(column(cell_b, &CellReplicate::kfed));
    const bool pass = font >= consensus + 0.02 && font >= kfed + 0.02;
    report(4, pass,
           "imbalanced M=5 sigma2=0.05 x50: mean ARI font=" + fmt(font) + " vs consensus=" +
               fmt(consensus) + " and kfed=" + fmt(kfed) + " (needs +0.02 margins)");
  }

  // Cell C: contaminated, M=5, sigma2=0.05, matched seeds with cell B
  // (criterion 5).
  const auto cell_c = run_cell(Regime::contaminated, 5, 0.05, 50, 0xB4, true, false);
  {
    const double font = mean_of(column(cell_c, &CellReplicate::font));
    const double consensus = mean_of(column(cell_c, &CellReplicate::consensus));
    const double kfed = mean_of(column(cell_c, &CellReplicate::kfed));
    const double font_clean = mean_of(column(cell_b, &CellReplicate::font));
    const bool margins = font >= consensus + 0.02 && font >= kfed + 0.02;
    const bool degradation = font >= font_clean - 0.05;
    report(5, margins && degradation,
           "contaminated M=5 sigma2=0.05 x50 (seeds matched to criterion 4): mean ARI font=" +
               fmt(font) + " vs consensus=" + fmt(consensus) + ", kfed=" + fmt(kfed) +
               " (needs +0.02 margins); degradation vs imbalanced " +
               fmt(font_clean - font) + " (<= 0.05)");
  }

  criterion_6();

  // Criterion 7 from cell A's matched replicates.
  {
    const double clean = mean_of(column(cell_a, &CellReplicate::font));
    const double noisy = mean_of(column(cell_a, &CellReplicate::ortho_font));
    const double bad_w = mean_of(column(cell_a, &CellReplicate::ortho_bad_weight));
    const double good_w = mean_of(column(cell_a, &CellReplicate::ortho_good_weight));
    const bool pass = bad_w < 0.5 * good_w && noisy >= clean - 0.05;
    report(7, pass,
           "20% orthogonal random-label models: mean weight " + fmt(bad_w) +
               " vs informative " + fmt(good_w) + " (need < half); ARI drop " +
               fmt(clean - noisy) + " (<= 0.05) at matched seeds");
  }

  criterion_8();
  criterion_9();
  criterion_10();

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(g_failures) +
                " CRITERIA FAILED")
            << " (" << fmt(elapsed(t0)) << " s total)" << std::endl;
  return g_failures == 0 ? 0 : 1;
}
