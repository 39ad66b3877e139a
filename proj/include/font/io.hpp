#pragma once

#include "font/federation.hpp"
#include "font/simdata.hpp"
#include "font/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace font {

inline constexpr const char* kToolVersion = "0.1.0";

/// Locale-independent shortest round-trip formatting for doubles.
std::string format_double(double x);

/// FNV-1a 64-bit digest of a file, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

/// Writes site_<id>.csv per site (columns x1..xp or seq, plus true_label,
/// is_outlier) and manifest.json echoing the generating config, seeds, and
/// per-file digests.
void write_dataset(const MultiSiteDataset& ds, const nlohmann::json& config_echo,
                   const std::filesystem::path& dir);

/// Reads a dataset directory written by write_dataset.
MultiSiteDataset read_dataset(const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);

nlohmann::json distance_rep_to_json(const DistanceRep& rep);
DistanceRep distance_rep_from_json(const nlohmann::json& j);
nlohmann::json agreement_weights_to_json(const AgreementWeights& w);

/// Dense consensus distance as CSV behind a '#' metadata banner. Refuses
/// N > 10,000 (quadratic output); callers opt in explicitly via the CLI flag.
void write_consensus_csv(const ConsensusDistance& cd, const std::filesystem::path& path,
                         std::uint64_t seed, const nlohmann::json& config_echo);

nlohmann::json report_to_json(const RunReport& report);

/// report.json plus the flat results.csv
/// (setting,M,sigma2,n_range,method,ari,weight_corr,seconds).
void write_report(const RunReport& report, const std::filesystem::path& dir);

RunReport report_from_json(const nlohmann::json& j);

/// Aggregates rows of one or more reports into the plot-ready table
/// (regime,M,sigma2,method,mean_ari,sd_ari,mean_weight_corr), pooled over
/// replicates per cell.
std::string aggregate_reports(const std::vector<RunReport>& reports);

}  // namespace font
