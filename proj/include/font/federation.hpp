#pragma once

#include "font/benchmarks.hpp"
#include "font/ensemble.hpp"
#include "font/model_select.hpp"
#include "font/simdata.hpp"
#include "font/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace font {

/// Round 1: a site shares its fitted model, nothing else. The schema admits
/// only parameter-level fields; no per-subject data can be expressed.
struct SiteMessageRound1 {
  int v = 1;
  int site_id = 0;
  ClusterModelParams params;
  int fitted_k = 0;
  int n_local = 0;
};

/// Round 2: predicted labels of the site's own subjects under every model,
/// keyed by model id, plus opaque subject pseudo-ids.
struct SiteMessageRound2 {
  int v = 1;
  int site_id = 0;
  std::vector<std::pair<int, LabelVector>> labels_by_model;
  std::vector<int> pseudo_ids;
};

nlohmann::json to_json(const SiteMessageRound1& msg);
nlohmann::json to_json(const SiteMessageRound2& msg);
SiteMessageRound1 round1_from_json(const nlohmann::json& j);
SiteMessageRound2 round2_from_json(const nlohmann::json& j);

/// Structural privacy checks: unknown fields, malformed shapes, or anything
/// resembling per-subject feature payloads raise ProtocolViolation.
void validate_round1_json(const nlohmann::json& j);
void validate_round2_json(const nlohmann::json& j);

struct PseudoSiteOptions {
  bool enabled = false;
  int replicas = 4;
  double frac = 0.8;
  bool with_replacement = true;
};

/// B resampled copies of one site (frac of its size, with replacement by
/// default); used only for fitting, never as a label target.
std::vector<VectorDataset> make_pseudo_sites(const VectorDataset& site,
                                             const PseudoSiteOptions& opt, std::uint64_t seed);
std::vector<SequenceDataset> make_pseudo_sites(const SequenceDataset& site,
                                               const PseudoSiteOptions& opt, std::uint64_t seed);

struct FontOptions {
  int K = 5;
  bool auto_k = false;
  std::vector<int> k_range;  // candidates when auto_k
  InfoCriterion criterion = InfoCriterion::bic;
  FitConfig fit;
  PseudoSiteOptions pseudo;
  bool json_roundtrip = false;       // serialize/parse every message
  double noninformative_frac = 0.0;  // replace this share of models by random labelers
};

struct ModelInfo {
  int model_id = 0;
  int parent_site = 0;
  int replica = 0;
  int fitted_k = 0;
  double weight = 0.0;
  bool degenerate = false;
  bool noninformative = false;
};

struct FontRun {
  LabelVector labels;            // consensus labels, subjects in site order
  Eigen::MatrixXi label_matrix;  // N x M_eff
  std::vector<DistanceRep> reps;
  AgreementWeights agreement;    // over the non-degenerate models
  Vector weights_full;           // M_eff entries, zero at degenerate models
  std::vector<ModelInfo> models;
  int K_used = 0;
  int messages_round1 = 0;
  int messages_round2 = 0;
  std::size_t bytes_round1 = 0;  // serialized payload sizes
  std::size_t bytes_round2 = 0;
  double seconds = 0.0;
};

/// Algorithm: fit locally, broadcast parameters, apply every model at every
/// site, collect labels centrally, weight by spectral agreement, cluster the
/// consensus distance. Exactly one Round-1 and one Round-2 message per
/// effective model; every message passes the privacy schema check.
FontRun run_font(const MultiSiteDataset& sites, const FontOptions& opt);

/// Per-effective-site fits plus the cross-site label matrix, without the
/// message layer; shared with baselines that consume the same local models.
struct LocalModels {
  std::vector<ClusterModelParams> params;
  std::vector<int> fitted_k;
  std::vector<int> parent_site;
  std::vector<int> replica;
  Eigen::MatrixXi label_matrix;  // N x M_eff
};

LocalModels fit_local_models(const MultiSiteDataset& sites, const FontOptions& opt);

/// Analysis-center half of the pipeline: distance representations from the
/// collected labels and parameters, spectral weights over the non-degenerate
/// models, weighted consensus distance, final clustering. run_font delegates
/// here after the message exchange.
struct CenterResult {
  LabelVector labels;
  std::vector<DistanceRep> reps;
  AgreementWeights agreement;
  Vector weights_full;
  int K_used = 0;
};

CenterResult center_ensemble(const std::vector<ClusterModelParams>& params,
                             const Eigen::MatrixXi& label_matrix, int K, const FitConfig& fit);

/// The same ensemble over caller-supplied representations (fixture hook for
/// robustness studies that modify individual models' reps).
CenterResult center_ensemble_reps(std::vector<DistanceRep> reps,
                                  const Eigen::MatrixXi& label_matrix, int K,
                                  const FitConfig& fit);

struct ResultRow {
  std::string setting;
  int M = 0;
  double sigma2 = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::string method;
  int replicate = 0;
  double ari = std::numeric_limits<double>::quiet_NaN();
  double weight_corr = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  bool failed = false;
  std::string error;
  std::vector<double> weights;  // font only
};

struct RunReport {
  std::string tool_version;
  std::uint64_t master_seed = 0;
  nlohmann::json config_echo;
  std::vector<ResultRow> rows;

  bool any_failed() const;
};

/// Cell identity stamped on rows from a fixed dataset (e.g. read from disk).
struct CellLabel {
  std::string setting = "fixed";
  double sigma2 = 0.0;
  int n_min = 0;
  int n_max = 0;
};

struct SuiteConfig {
  std::optional<SimulationConfig> sim;          // generate vector data per replicate
  std::optional<MarkovSimConfig> markov_sim;    // generate sequence data per replicate
  const MultiSiteDataset* fixed_data = nullptr; // or run on one fixed dataset
  CellLabel fixed_label;
  std::vector<Method> methods;
  int replicates = 1;
  FontOptions font;
  int kfed_k_local = 0;  // 0: use K
  bool allow_oracle = false;
  int threads = 0;  // 0: hardware concurrency
  std::uint64_t seed = 0;
};

/// Runs every requested method on every replicate; a failed replicate is
/// recorded in its rows, not fatal. Oracle methods require allow_oracle
/// (OracleGuard otherwise). Deterministic for fixed seed and any thread
/// count.
RunReport run_benchmark_suite(const SuiteConfig& cfg);

}  // namespace font
