#include "font/federation.hpp"

#include "font/benchmarks.hpp"
#include "font/kmeans.hpp"
#include "font/markov.hpp"
#include "font/metrics.hpp"
#include "font/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

namespace font {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kFitKey = 0x10;
constexpr std::uint64_t kPseudoKey = 0x11;
constexpr std::uint64_t kNoninfLabelKey = 0x12;
constexpr std::uint64_t kFinalKey = 0x13;
constexpr std::uint64_t kNoninfPickKey = 0x14;
constexpr std::uint64_t kReplicateKey = 0x20;

void require_fields(const nlohmann::json& j, const std::set<std::string>& required,
                    const std::set<std::string>& optional, const char* what) {
  for (const auto& f : required) {
    if (!j.contains(f)) throw ProtocolViolation(std::string(what) + ": missing field " + f);
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!required.contains(it.key()) && !optional.contains(it.key())) {
      throw ProtocolViolation(std::string(what) + ": unexpected field " + it.key());
    }
  }
}

std::vector<int> resample_indices(int n, const PseudoSiteOptions& opt, Rng& rng) {
  const int size = static_cast<int>(std::ceil(opt.frac * n));
  std::vector<int> idx(size);
  if (opt.with_replacement) {
    for (int i = 0; i < size; ++i) idx[i] = static_cast<int>(rng.uniform_int(0, n - 1));
  } else {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < size; ++i) {
      const int j = static_cast<int>(rng.uniform_int(i, n - 1));
      std::swap(order[i], order[j]);
      idx[i] = order[i];
    }
  }
  return idx;
}

}  // namespace

nlohmann::json to_json(const SiteMessageRound1& msg) {
  nlohmann::json j;
  j["v"] = msg.v;
  j["site_id"] = msg.site_id;
  j["kind"] = to_string(msg.params.kind);
  j["K"] = msg.fitted_k;
  auto betas = nlohmann::json::array();
  for (int k = 0; k < msg.params.betas.rows(); ++k) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < msg.params.betas.cols(); ++c) row.push_back(msg.params.betas(k, c));
    betas.push_back(std::move(row));
  }
  j["betas"] = std::move(betas);
  if (msg.params.kind == ModelKind::markov_mixture) {
    j["S"] = msg.params.S;
    auto mixing = nlohmann::json::array();
    for (int k = 0; k < msg.params.mixing.size(); ++k) mixing.push_back(msg.params.mixing(k));
    j["mixing"] = std::move(mixing);
  }
  j["n_local"] = msg.n_local;
  return j;
}

nlohmann::json to_json(const SiteMessageRound2& msg) {
  nlohmann::json j;
  j["v"] = msg.v;
  j["site_id"] = msg.site_id;
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [model_id, vec] : msg.labels_by_model) {
    auto arr = nlohmann::json::array();
    for (int i = 0; i < vec.size(); ++i) arr.push_back(vec(i));
    labels[std::to_string(model_id)] = std::move(arr);
  }
  j["labels"] = std::move(labels);
  j["pseudo_ids"] = msg.pseudo_ids;
  return j;
}

void validate_round1_json(const nlohmann::json& j) {
  require_fields(j, {"v", "site_id", "kind", "K", "betas", "n_local"}, {"S", "mixing"},
                 "round1");
  if (!j["betas"].is_array()) throw ProtocolViolation("round1: betas must be an array");
  const auto& betas = j["betas"];
  const int k = j["K"].get<int>();
  if (static_cast<int>(betas.size()) != k) {
    throw ProtocolViolation("round1: betas must hold exactly K parameter vectors");
  }
  std::size_t len = 0;
  for (const auto& row : betas) {
    if (!row.is_array()) throw ProtocolViolation("round1: beta entry must be an array");
    if (len == 0) len = row.size();
    if (row.size() != len) throw ProtocolViolation("round1: beta vectors differ in length");
    for (const auto& x : row) {
      if (!x.is_number()) throw ProtocolViolation("round1: beta entry must be numeric");
    }
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "markov_mixture") {
    if (!j.contains("S") || !j.contains("mixing")) {
      throw ProtocolViolation("round1: markov_mixture requires S and mixing");
    }
    const int s = j["S"].get<int>();
    if (static_cast<int>(len) != s + s * s) {
      throw ProtocolViolation("round1: markov beta length must be S + S^2");
    }
    if (static_cast<int>(j["mixing"].size()) != k) {
      throw ProtocolViolation("round1: mixing must have K entries");
    }
  } else if (kind != "kmeans") {
    throw ProtocolViolation("round1: unknown model kind");
  }
}

void validate_round2_json(const nlohmann::json& j) {
  require_fields(j, {"v", "site_id", "labels", "pseudo_ids"}, {}, "round2");
  if (!j["labels"].is_object()) throw ProtocolViolation("round2: labels must map model -> ints");
  const std::size_t n = j["pseudo_ids"].size();
  for (const auto& id : j["pseudo_ids"]) {
    if (!id.is_number_integer()) throw ProtocolViolation("round2: pseudo_ids must be integers");
  }
  for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it) {
    if (!it.value().is_array() || it.value().size() != n) {
      throw ProtocolViolation("round2: each label vector must cover the site's subjects");
    }
    for (const auto& l : it.value()) {
      if (!l.is_number_integer() || l.get<int>() < 1) {
        throw ProtocolViolation("round2: labels must be integers >= 1");
      }
    }
  }
}

SiteMessageRound1 round1_from_json(const nlohmann::json& j) {
  validate_round1_json(j);
  SiteMessageRound1 msg;
  msg.v = j["v"].get<int>();
  msg.site_id = j["site_id"].get<int>();
  msg.fitted_k = j["K"].get<int>();
  msg.n_local = j["n_local"].get<int>();
  msg.params.kind = model_kind_from_string(j["kind"].get<std::string>());
  msg.params.K = msg.fitted_k;
  const auto& betas = j["betas"];
  const int rows = static_cast<int>(betas.size());
  const int cols = rows > 0 ? static_cast<int>(betas[0].size()) : 0;
  msg.params.betas = Matrix(rows, cols);
  for (int k = 0; k < rows; ++k) {
    for (int c = 0; c < cols; ++c) msg.params.betas(k, c) = betas[k][c].get<double>();
  }
  if (msg.params.kind == ModelKind::markov_mixture) {
    msg.params.S = j["S"].get<int>();
    msg.params.mixing = Vector(rows);
    for (int k = 0; k < rows; ++k) msg.params.mixing(k) = j["mixing"][k].get<double>();
  }
  return msg;
}

SiteMessageRound2 round2_from_json(const nlohmann::json& j) {
  validate_round2_json(j);
  SiteMessageRound2 msg;
  msg.v = j["v"].get<int>();
  msg.site_id = j["site_id"].get<int>();
  msg.pseudo_ids = j["pseudo_ids"].get<std::vector<int>>();
  std::vector<int> model_ids;
  for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it) {
    model_ids.push_back(std::stoi(it.key()));
  }
  std::sort(model_ids.begin(), model_ids.end());
  for (int id : model_ids) {
    const auto& arr = j["labels"][std::to_string(id)];
    LabelVector v(static_cast<int>(arr.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = arr[i].get<int>();
    msg.labels_by_model.emplace_back(id, std::move(v));
  }
  return msg;
}

std::vector<VectorDataset> make_pseudo_sites(const VectorDataset& site,
                                             const PseudoSiteOptions& opt, std::uint64_t seed) {
  if (opt.replicas < 1) throw ConfigInvalid("make_pseudo_sites: replicas must be >= 1");
  if (opt.frac <= 0.0 || opt.frac > 1.0) throw ConfigInvalid("make_pseudo_sites: frac in (0, 1]");
  std::vector<VectorDataset> out;
  for (int b = 0; b < opt.replicas; ++b) {
    Rng rng = Rng::stream(seed, {kPseudoKey, static_cast<std::uint64_t>(site.site_id),
                                 static_cast<std::uint64_t>(b)});
    const std::vector<int> idx = resample_indices(site.n(), opt, rng);
    VectorDataset ps;
    ps.site_id = site.site_id;
    ps.parent_site = site.site_id;
    ps.replica = b;
    ps.rows = Matrix(static_cast<int>(idx.size()), site.dim());
    if (site.true_labels.size() > 0) ps.true_labels = LabelVector(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ps.rows.row(static_cast<int>(i)) = site.rows.row(idx[i]);
      if (site.true_labels.size() > 0) ps.true_labels(static_cast<int>(i)) = site.true_labels(idx[i]);
    }
    out.push_back(std::move(ps));
  }
  return out;
}

std::vector<SequenceDataset> make_pseudo_sites(const SequenceDataset& site,
                                               const PseudoSiteOptions& opt, std::uint64_t seed) {
  if (opt.replicas < 1) throw ConfigInvalid("make_pseudo_sites: replicas must be >= 1");
  if (opt.frac <= 0.0 || opt.frac > 1.0) throw ConfigInvalid("make_pseudo_sites: frac in (0, 1]");
  std::vector<SequenceDataset> out;
  for (int b = 0; b < opt.replicas; ++b) {
    Rng rng = Rng::stream(seed, {kPseudoKey, static_cast<std::uint64_t>(site.site_id),
                                 static_cast<std::uint64_t>(b)});
    const std::vector<int> idx = resample_indices(site.n(), opt, rng);
    SequenceDataset ps;
    ps.site_id = site.site_id;
    ps.parent_site = site.site_id;
    ps.replica = b;
    if (site.true_labels.size() > 0) ps.true_labels = LabelVector(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ps.sequences.push_back(site.sequences[idx[i]]);
      if (site.true_labels.size() > 0) ps.true_labels(static_cast<int>(i)) = site.true_labels(idx[i]);
    }
    out.push_back(std::move(ps));
  }
  return out;
}

namespace {

struct EffectiveSite {
  int parent = 0;
  int replica = 0;
  VectorDataset vec;  // fitting data, one of the two populated
  SequenceDataset seq;
};

std::vector<EffectiveSite> expand_sites(const MultiSiteDataset& sites, const FontOptions& opt) {
  std::vector<EffectiveSite> eff;
  const bool markov = sites.kind == ModelKind::markov_mixture;
  const int n_sites = sites.n_sites();
  for (int m = 0; m < n_sites; ++m) {
    if (opt.pseudo.enabled) {
      if (markov) {
        auto reps = make_pseudo_sites(sites.sequence_sites[m], opt.pseudo, opt.fit.seed);
        for (int b = 0; b < static_cast<int>(reps.size()); ++b) {
          eff.push_back({m, b, {}, std::move(reps[b])});
        }
      } else {
        auto reps = make_pseudo_sites(sites.vector_sites[m], opt.pseudo, opt.fit.seed);
        for (int b = 0; b < static_cast<int>(reps.size()); ++b) {
          eff.push_back({m, b, std::move(reps[b]), {}});
        }
      }
    } else {
      if (markov) {
        eff.push_back({m, 0, {}, sites.sequence_sites[m]});
      } else {
        eff.push_back({m, 0, sites.vector_sites[m], {}});
      }
    }
  }
  return eff;
}

int markov_state_count(const MultiSiteDataset& sites) {
  int S = 0;
  for (const auto& site : sites.sequence_sites) {
    for (const auto& seq : site.sequences) {
      for (int sym : seq) S = std::max(S, sym);
    }
  }
  return S;
}

struct FittedModel {
  ClusterModelParams params;
  int fitted_k = 0;
};

FittedModel fit_one(const EffectiveSite& site, bool markov, int S, const FontOptions& opt,
                    int model_id) {
  FitConfig cfg = opt.fit;
  cfg.seed = Rng::stream(opt.fit.seed, {kFitKey, static_cast<std::uint64_t>(model_id)}).next_u64();
  FittedModel out;
  if (opt.auto_k) {
    if (opt.k_range.empty()) throw ConfigInvalid("run_font: auto K needs a K range");
    out.fitted_k = markov
                       ? select_k_local(site.seq, S, opt.k_range, opt.criterion, cfg)
                       : select_k_local(site.vec, opt.k_range, opt.criterion, cfg);
  } else {
    out.fitted_k = opt.K;
  }
  if (markov) {
    out.params = markov_mixture_fit(site.seq, out.fitted_k, S, cfg).params;
  } else {
    out.params = kmeans_fit(site.vec, out.fitted_k, cfg).params;
  }
  return out;
}

// Labels of one original site's subjects under one model; noninformative
// models draw uniform labels from a stream shared by all replicas of the
// site, so duplicated Round-2 payloads agree.
LabelVector apply_model(const MultiSiteDataset& sites, int site_idx,
                        const ClusterModelParams& params, bool noninformative, int model_id,
                        std::uint64_t seed) {
  const bool markov = sites.kind == ModelKind::markov_mixture;
  const int n = markov ? sites.sequence_sites[site_idx].n() : sites.vector_sites[site_idx].n();
  LabelVector labels(n);
  if (noninformative) {
    Rng rng = Rng::stream(seed, {kNoninfLabelKey, static_cast<std::uint64_t>(model_id),
                                 static_cast<std::uint64_t>(site_idx)});
    for (int i = 0; i < n; ++i) labels(i) = 1 + static_cast<int>(rng.uniform_int(0, params.K - 1));
    return labels;
  }
  if (markov) {
    for (int i = 0; i < n; ++i) {
      labels(i) = markov_assign(params, sites.sequence_sites[site_idx].sequences[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      labels(i) = kmeans_assign(params, sites.vector_sites[site_idx].rows.row(i).transpose());
    }
  }
  return labels;
}

std::vector<bool> pick_noninformative(int m_eff, double frac, std::uint64_t seed) {
  std::vector<bool> flag(m_eff, false);
  if (frac <= 0.0) return flag;
  const int n_bad = std::min(m_eff, static_cast<int>(std::ceil(frac * m_eff)));
  Rng rng = Rng::stream(seed, {kNoninfPickKey});
  std::vector<int> order(m_eff);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n_bad; ++i) {
    const int j = static_cast<int>(rng.uniform_int(i, m_eff - 1));
    std::swap(order[i], order[j]);
    flag[order[i]] = true;
  }
  return flag;
}

}  // namespace

LocalModels fit_local_models(const MultiSiteDataset& sites, const FontOptions& opt) {
  const bool markov = sites.kind == ModelKind::markov_mixture;
  const int S = markov ? markov_state_count(sites) : 0;
  const auto eff = expand_sites(sites, opt);
  const int m_eff = static_cast<int>(eff.size());
  const int n = sites.n_total();

  LocalModels out;
  out.label_matrix = Eigen::MatrixXi(n, m_eff);
  const auto noninf = pick_noninformative(m_eff, opt.noninformative_frac, opt.fit.seed);
  for (int j = 0; j < m_eff; ++j) {
    FittedModel fm = fit_one(eff[j], markov, S, opt, j);
    out.fitted_k.push_back(fm.fitted_k);
    out.parent_site.push_back(eff[j].parent);
    out.replica.push_back(eff[j].replica);
    out.params.push_back(std::move(fm.params));
  }
  int at = 0;
  for (int m = 0; m < sites.n_sites(); ++m) {
    const int n_m = markov ? sites.sequence_sites[m].n() : sites.vector_sites[m].n();
    for (int j = 0; j < m_eff; ++j) {
      out.label_matrix.col(j).segment(at, n_m) =
          apply_model(sites, m, out.params[j], noninf[j], j, opt.fit.seed);
    }
    at += n_m;
  }
  return out;
}

FontRun run_font(const MultiSiteDataset& sites, const FontOptions& opt) {
  const auto t0 = Clock::now();
  const bool markov = sites.kind == ModelKind::markov_mixture;
  if (!markov) {
    for (const auto& site : sites.vector_sites) {
      if (site.dim() != sites.vector_sites.front().dim()) {
        throw DimensionMismatch("run_font: sites disagree on the feature dimension");
      }
    }
  }
  const int S = markov ? markov_state_count(sites) : 0;
  const int n = sites.n_total();
  const int n_sites = sites.n_sites();

  const auto eff = expand_sites(sites, opt);
  const int m_eff = static_cast<int>(eff.size());
  if (m_eff < 2) {
    throw Error("run_font: need at least 2 effective models; enable pseudo-sites");
  }
  const auto noninf = pick_noninformative(m_eff, opt.noninformative_frac, opt.fit.seed);

  FontRun run;
  run.models.resize(m_eff);

  // Subject pseudo-ids: global index in site order.
  std::vector<int> site_offset(n_sites, 0);
  {
    int at = 0;
    for (int m = 0; m < n_sites; ++m) {
      site_offset[m] = at;
      at += markov ? sites.sequence_sites[m].n() : sites.vector_sites[m].n();
    }
  }

  // Round 1: every effective site fits locally and broadcasts its model.
  std::vector<SiteMessageRound1> round1(m_eff);
  for (int j = 0; j < m_eff; ++j) {
    FittedModel fm = fit_one(eff[j], markov, S, opt, j);
    SiteMessageRound1 msg;
    msg.site_id = j;
    msg.params = std::move(fm.params);
    msg.fitted_k = fm.fitted_k;
    msg.n_local = markov ? eff[j].seq.n() : eff[j].vec.n();
    nlohmann::json wire = to_json(msg);
    validate_round1_json(wire);
    run.bytes_round1 += wire.dump().size();
    round1[j] = opt.json_roundtrip ? round1_from_json(wire) : std::move(msg);
    run.messages_round1 += 1;

    run.models[j].model_id = j;
    run.models[j].parent_site = eff[j].parent;
    run.models[j].replica = eff[j].replica;
    run.models[j].fitted_k = round1[j].fitted_k;
    run.models[j].noninformative = noninf[j];
  }

  // Round 2: every effective site labels its parent's original subjects
  // under every broadcast model and uploads only those labels.
  run.label_matrix = Eigen::MatrixXi(n, m_eff);
  for (int j = 0; j < m_eff; ++j) {
    const int parent = eff[j].parent;
    const int n_m = markov ? sites.sequence_sites[parent].n() : sites.vector_sites[parent].n();
    SiteMessageRound2 msg;
    msg.site_id = j;
    msg.pseudo_ids.resize(n_m);
    for (int i = 0; i < n_m; ++i) msg.pseudo_ids[i] = site_offset[parent] + i;
    for (int m = 0; m < m_eff; ++m) {
      msg.labels_by_model.emplace_back(
          m, apply_model(sites, parent, round1[m].params, noninf[m], m, opt.fit.seed));
    }
    nlohmann::json wire = to_json(msg);
    validate_round2_json(wire);
    run.bytes_round2 += wire.dump().size();
    const SiteMessageRound2 recv = opt.json_roundtrip ? round2_from_json(wire) : std::move(msg);
    run.messages_round2 += 1;

    // Center: assemble in pseudo-id order. Replicas of one site upload the
    // same deterministic labels, so overwrites are no-ops.
    for (const auto& [model_id, labels] : recv.labels_by_model) {
      for (std::size_t i = 0; i < recv.pseudo_ids.size(); ++i) {
        run.label_matrix(recv.pseudo_ids[i], model_id) = labels(static_cast<int>(i));
      }
    }
  }
  if (run.messages_round1 + run.messages_round2 != 2 * m_eff) {
    throw ProtocolViolation("run_font: message count != 2 * M");
  }

  int k_used = opt.K;
  if (opt.auto_k) {
    std::vector<int> fitted;
    for (const auto& mi : run.models) fitted.push_back(mi.fitted_k);
    k_used = select_k_majority(fitted);
  }

  std::vector<ClusterModelParams> params;
  params.reserve(m_eff);
  for (int j = 0; j < m_eff; ++j) params.push_back(round1[j].params);
  CenterResult center = center_ensemble(params, run.label_matrix, k_used, opt.fit);
  run.labels = std::move(center.labels);
  run.reps = std::move(center.reps);
  run.agreement = std::move(center.agreement);
  run.weights_full = std::move(center.weights_full);
  run.K_used = center.K_used;
  for (int j = 0; j < m_eff; ++j) {
    run.models[j].degenerate = run.reps[j].degenerate;
    run.models[j].weight = run.weights_full(j);
  }
  run.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return run;
}

CenterResult center_ensemble(const std::vector<ClusterModelParams>& params,
                             const Eigen::MatrixXi& label_matrix, int K, const FitConfig& fit) {
  std::vector<DistanceRep> reps;
  reps.reserve(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    reps.push_back(build_distance_rep(params[j], label_matrix.col(static_cast<int>(j))));
    reps.back().model_id = static_cast<int>(j);
  }
  return center_ensemble_reps(std::move(reps), label_matrix, K, fit);
}

CenterResult center_ensemble_reps(std::vector<DistanceRep> reps,
                                  const Eigen::MatrixXi& label_matrix, int K,
                                  const FitConfig& fit) {
  const int m_eff = static_cast<int>(reps.size());
  if (m_eff < 1 || label_matrix.cols() != m_eff) {
    throw LengthMismatch("center_ensemble: reps/label matrix mismatch");
  }
  CenterResult out;
  out.K_used = K;
  out.reps = std::move(reps);

  std::vector<DistanceRep> kept;
  std::vector<int> kept_idx;
  for (int j = 0; j < m_eff; ++j) {
    if (!out.reps[j].degenerate) {
      kept.push_back(out.reps[j]);
      kept_idx.push_back(j);
    }
  }
  if (kept.empty()) throw AllDegenerate("center_ensemble: every model predicted a single cluster");

  out.weights_full = Vector::Zero(m_eff);
  if (kept.size() == 1) {
    out.agreement.G = Matrix::Ones(1, 1);
    out.agreement.leading_eigvec = Vector::Ones(1);
    out.agreement.weights = Vector::Ones(1);
    out.weights_full(kept_idx[0]) = 1.0;
  } else {
    out.agreement = spectral_weights(agreement_matrix(kept));
    for (std::size_t i = 0; i < kept_idx.size(); ++i) {
      out.weights_full(kept_idx[i]) = out.agreement.weights(static_cast<int>(i));
    }
  }

  const ConsensusDistance cd = ensemble_distance(out.reps, out.weights_full);
  FitConfig final_cfg = fit;
  final_cfg.seed = Rng::stream(fit.seed, {kFinalKey}).next_u64();
  out.labels = final_cluster(cd, K, final_cfg);
  return out;
}

bool RunReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed; });
}

namespace {

ResultRow base_row(const SuiteConfig& cfg, int replicate, Method method) {
  ResultRow row;
  if (cfg.sim) {
    row.setting = to_string(cfg.sim->regime);
    row.M = cfg.sim->M;
    row.sigma2 = cfg.sim->sigma2;
    row.n_min = cfg.sim->n_min;
    row.n_max = cfg.sim->n_max;
  } else if (cfg.markov_sim) {
    row.setting = "markov";
    row.M = cfg.markov_sim->M;
    row.n_min = cfg.markov_sim->n_min;
    row.n_max = cfg.markov_sim->n_max;
  } else {
    row.setting = cfg.fixed_label.setting;
    row.M = cfg.fixed_data ? cfg.fixed_data->n_sites() : 0;
    row.sigma2 = cfg.fixed_label.sigma2;
    row.n_min = cfg.fixed_label.n_min;
    row.n_max = cfg.fixed_label.n_max;
  }
  row.method = to_string(method);
  row.replicate = replicate;
  return row;
}

void run_replicate(const SuiteConfig& cfg, int replicate, std::vector<ResultRow>& rows) {
  const std::uint64_t rep_seed =
      Rng::stream(cfg.seed, {kReplicateKey, static_cast<std::uint64_t>(replicate)}).next_u64();

  MultiSiteDataset generated;
  const MultiSiteDataset* data = cfg.fixed_data;
  if (cfg.sim) {
    SimulationConfig sim = *cfg.sim;
    sim.seed = rep_seed;
    generated = gen_gaussian_sites(sim);
    data = &generated;
  } else if (cfg.markov_sim) {
    MarkovSimConfig sim = *cfg.markov_sim;
    sim.seed = rep_seed;
    generated = gen_markov_sites(sim);
    data = &generated;
  }
  if (data == nullptr) throw ConfigInvalid("run_benchmark_suite: no data source");

  const LabelVector truth = data->all_true_labels();
  const auto mask = data->all_outlier_mask();
  const bool have_truth = truth.size() > 0 && (truth.array() > 0).any();

  auto ari_of = [&](const LabelVector& labels) {
    if (!have_truth) return std::numeric_limits<double>::quiet_NaN();
    LabelVector a, b;
    filter_for_ari(labels, truth, mask, a, b);
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return adjusted_rand_index(a, b);
  };

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method method = cfg.methods[mi];
    ResultRow row = base_row(cfg, replicate, method);
    const auto t0 = Clock::now();
    try {
      FitConfig fit = cfg.font.fit;
      fit.seed = Rng::stream(rep_seed, {static_cast<std::uint64_t>(mi) + 1}).next_u64();
      switch (method) {
        case Method::font: {
          FontOptions opt = cfg.font;
          opt.fit.seed = Rng::stream(rep_seed, {0xF0}).next_u64();
          const FontRun fr = run_font(*data, opt);
          row.ari = ari_of(fr.labels);
          row.weights.assign(fr.weights_full.data(), fr.weights_full.data() + fr.weights_full.size());
          if (have_truth && fr.weights_full.size() >= 3) {
            Vector per_model(fr.label_matrix.cols());
            for (int j = 0; j < fr.label_matrix.cols(); ++j) {
              per_model(j) = ari_of(fr.label_matrix.col(j));
            }
            const Correlation c = weight_alignment(fr.weights_full, per_model);
            if (c.defined) row.weight_corr = c.value;
          }
          break;
        }
        case Method::local: {
          row.ari = run_local(*data, cfg.font.K, fit).ari;
          break;
        }
        case Method::consensus: {
          FontOptions opt = cfg.font;
          opt.fit.seed = Rng::stream(rep_seed, {0xF0}).next_u64();  // same local models as font
          opt.noninformative_frac = 0.0;
          const LocalModels lm = fit_local_models(*data, opt);
          row.ari = run_consensus(lm.label_matrix, cfg.font.K, fit, truth, mask).ari;
          break;
        }
        case Method::kfed: {
          const int k_local = cfg.kfed_k_local > 0 ? cfg.kfed_k_local : cfg.font.K;
          row.ari = run_kfed(*data, cfg.font.K, k_local, fit).ari;
          break;
        }
        case Method::pooled: {
          row.ari = run_pooled(*data, cfg.font.K, fit).ari;
          break;
        }
        case Method::best_local: {
          row.ari = run_best_local(*data, cfg.font.K, truth, fit).ari;
          break;
        }
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
}

}  // namespace

RunReport run_benchmark_suite(const SuiteConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigInvalid("run_benchmark_suite: no methods requested");
  for (Method m : cfg.methods) {
    if (is_oracle(m) && !cfg.allow_oracle) {
      throw OracleGuard("oracle method " + to_string(m) + " requires --allow-oracle");
    }
  }

  RunReport report;
  report.master_seed = cfg.seed;

  const int reps = std::max(1, cfg.replicates);
  std::vector<std::vector<ResultRow>> per_replicate(reps);

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, reps));

  std::atomic<int> next{0};
  std::vector<std::string> worker_errors(reps);
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        run_replicate(cfg, r, per_replicate[r]);
      } catch (const std::exception& e) {
        worker_errors[r] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int r = 0; r < reps; ++r) {
    if (!worker_errors[r].empty()) {
      for (Method m : cfg.methods) {
        ResultRow row = base_row(cfg, r, m);
        row.failed = true;
        row.error = worker_errors[r];
        report.rows.push_back(std::move(row));
      }
      continue;
    }
    for (auto& row : per_replicate[r]) report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace font
