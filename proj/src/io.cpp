#include "font/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace font {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file_digest: cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

std::string site_filename(int site_id) { return "site_" + std::to_string(site_id) + ".csv"; }

std::string join_sequence(const std::vector<int>& seq) {
  std::string s;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) s += '-';
    s += std::to_string(seq[i]);
  }
  return s;
}

std::vector<int> split_sequence(const std::string& s) {
  std::vector<int> seq;
  std::size_t at = 0;
  while (at < s.size()) {
    std::size_t end = s.find('-', at);
    if (end == std::string::npos) end = s.size();
    seq.push_back(std::stoi(s.substr(at, end - at)));
    at = end + 1;
  }
  return seq;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (true) {
    std::size_t end = line.find(',', at);
    if (end == std::string::npos) {
      out.push_back(line.substr(at));
      break;
    }
    out.push_back(line.substr(at, end - at));
    at = end + 1;
  }
  return out;
}

void write_vector_site(const VectorDataset& site, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_dataset: cannot write " + path.string());
  for (int j = 0; j < site.dim(); ++j) out << "x" << (j + 1) << ",";
  out << "true_label,is_outlier\n";
  for (int i = 0; i < site.n(); ++i) {
    for (int j = 0; j < site.dim(); ++j) out << format_double(site.rows(i, j)) << ",";
    const int label = site.true_labels.size() > 0 ? site.true_labels(i) : 0;
    const bool outl = site.outlier_mask.size() > 0 && site.outlier_mask(i);
    out << label << "," << (outl ? 1 : 0) << "\n";
  }
}

void write_sequence_site(const SequenceDataset& site, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_dataset: cannot write " + path.string());
  out << "seq,true_label,is_outlier\n";
  for (int i = 0; i < site.n(); ++i) {
    const int label = site.true_labels.size() > 0 ? site.true_labels(i) : 0;
    out << join_sequence(site.sequences[i]) << "," << label << ",0\n";
  }
}

}  // namespace

void write_dataset(const MultiSiteDataset& ds, const nlohmann::json& config_echo,
                   const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["kind"] = to_string(ds.kind);
  manifest["seed"] = ds.seed;
  manifest["config"] = config_echo;
  manifest["n_sites"] = ds.n_sites();

  auto files = nlohmann::json::array();
  if (ds.kind == ModelKind::kmeans) {
    auto contaminated = nlohmann::json::array();
    for (const auto& site : ds.vector_sites) {
      const fs::path f = dir / site_filename(site.site_id);
      write_vector_site(site, f);
      files.push_back({{"file", f.filename().string()},
                       {"site_id", site.site_id},
                       {"n", site.n()},
                       {"digest", file_digest(f)}});
      if (site.outlier_mask.size() > 0 && site.outlier_mask.any()) {
        contaminated.push_back(site.site_id);
      }
    }
    manifest["contaminated_sites"] = std::move(contaminated);
    if (ds.true_mus.size() > 0) {
      auto mus = nlohmann::json::array();
      for (int k = 0; k < ds.true_mus.rows(); ++k) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < ds.true_mus.cols(); ++j) row.push_back(ds.true_mus(k, j));
        mus.push_back(std::move(row));
      }
      manifest["true_mus"] = std::move(mus);
    }
  } else {
    for (const auto& site : ds.sequence_sites) {
      const fs::path f = dir / site_filename(site.site_id);
      write_sequence_site(site, f);
      files.push_back({{"file", f.filename().string()},
                       {"site_id", site.site_id},
                       {"n", site.n()},
                       {"digest", file_digest(f)}});
    }
    if (ds.true_markov.K > 0) {
      manifest["true_markov"] = to_json(SiteMessageRound1{
          1, -1, ds.true_markov, ds.true_markov.K, 0});
    }
  }
  manifest["files"] = std::move(files);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

nlohmann::json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("read_dataset: missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  in >> manifest;
  return manifest;
}

MultiSiteDataset read_dataset(const fs::path& dir) {
  const nlohmann::json manifest = read_manifest(dir);
  MultiSiteDataset ds;
  ds.kind = model_kind_from_string(manifest["kind"].get<std::string>());
  ds.seed = manifest["seed"].get<std::uint64_t>();

  if (manifest.contains("true_mus")) {
    const auto& mus = manifest["true_mus"];
    ds.true_mus = Matrix(mus.size(), mus[0].size());
    for (int k = 0; k < ds.true_mus.rows(); ++k) {
      for (int j = 0; j < ds.true_mus.cols(); ++j) ds.true_mus(k, j) = mus[k][j].get<double>();
    }
  }
  if (manifest.contains("true_markov")) {
    ds.true_markov = round1_from_json(manifest["true_markov"]).params;
  }

  for (const auto& entry : manifest["files"]) {
    const fs::path f = dir / entry["file"].get<std::string>();
    std::ifstream in(f);
    if (!in) throw Error("read_dataset: missing " + f.string());
    std::string header;
    std::getline(in, header);
    const auto cols = split_csv_line(header);

    if (ds.kind == ModelKind::kmeans) {
      const int p = static_cast<int>(cols.size()) - 2;
      std::vector<std::vector<double>> rows;
      std::vector<int> labels;
      std::vector<bool> outliers;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        std::vector<double> row(p);
        for (int j = 0; j < p; ++j) row[j] = std::stod(parts[j]);
        rows.push_back(std::move(row));
        labels.push_back(std::stoi(parts[p]));
        outliers.push_back(std::stoi(parts[p + 1]) != 0);
      }
      VectorDataset site;
      site.site_id = entry["site_id"].get<int>();
      site.rows = Matrix(static_cast<int>(rows.size()), p);
      site.true_labels = LabelVector(static_cast<int>(rows.size()));
      site.outlier_mask =
          Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(static_cast<int>(rows.size()), false);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < p; ++j) site.rows(static_cast<int>(i), j) = rows[i][j];
        site.true_labels(static_cast<int>(i)) = labels[i];
        site.outlier_mask(static_cast<int>(i)) = outliers[i];
      }
      ds.vector_sites.push_back(std::move(site));
    } else {
      SequenceDataset site;
      site.site_id = entry["site_id"].get<int>();
      std::vector<int> labels;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        site.sequences.push_back(split_sequence(parts[0]));
        labels.push_back(std::stoi(parts[1]));
      }
      site.true_labels = Eigen::Map<const LabelVector>(labels.data(), static_cast<int>(labels.size()));
      ds.sequence_sites.push_back(std::move(site));
    }
  }
  return ds;
}

nlohmann::json distance_rep_to_json(const DistanceRep& rep) {
  nlohmann::json j;
  j["v"] = 1;
  j["model_id"] = rep.model_id;
  j["labels"] = std::vector<int>(rep.labels.data(), rep.labels.data() + rep.labels.size());
  auto table = nlohmann::json::array();
  for (int r = 0; r < rep.table.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < rep.table.cols(); ++c) row.push_back(rep.table(r, c));
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  j["frob_norm"] = rep.frob_norm;
  j["degenerate"] = rep.degenerate;
  return j;
}

DistanceRep distance_rep_from_json(const nlohmann::json& j) {
  DistanceRep rep;
  rep.model_id = j["model_id"].get<int>();
  const auto labels = j["labels"].get<std::vector<int>>();
  rep.labels = Eigen::Map<const LabelVector>(labels.data(), static_cast<int>(labels.size()));
  const auto& table = j["table"];
  const int k = static_cast<int>(table.size());
  rep.table = Matrix(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) rep.table(r, c) = table[r][c].get<double>();
  }
  rep.counts = Eigen::VectorXi::Zero(k);
  for (int i = 0; i < rep.labels.size(); ++i) rep.counts(rep.labels(i) - 1) += 1;
  rep.frob_norm = j["frob_norm"].get<double>();
  rep.degenerate = j["degenerate"].get<bool>();
  return rep;
}

nlohmann::json agreement_weights_to_json(const AgreementWeights& w) {
  nlohmann::json j;
  j["v"] = 1;
  auto g = nlohmann::json::array();
  for (int r = 0; r < w.G.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < w.G.cols(); ++c) row.push_back(w.G(r, c));
    g.push_back(std::move(row));
  }
  j["G"] = std::move(g);
  j["leading_eigvec"] = std::vector<double>(
      w.leading_eigvec.data(), w.leading_eigvec.data() + w.leading_eigvec.size());
  j["weights"] = std::vector<double>(w.weights.data(), w.weights.data() + w.weights.size());
  j["positive_G"] = w.positive_G;
  return j;
}

void write_consensus_csv(const ConsensusDistance& cd, const fs::path& path,
                         std::uint64_t seed, const nlohmann::json& config_echo) {
  if (cd.n() > 10000) {
    throw ConfigInvalid("write_consensus_csv: dense export limited to N <= 10,000");
  }
  std::ofstream out(path);
  if (!out) throw Error("write_consensus_csv: cannot write " + path.string());
  out << "# font " << kToolVersion << " seed=" << seed << " config=" << config_echo.dump()
      << "\n";
  for (int i = 0; i < cd.n(); ++i) {
    for (int j = 0; j < cd.n(); ++j) {
      if (j > 0) out << ",";
      out << format_double(cd.rows(cd.subject_index(i), cd.subject_index(j)));
    }
    out << "\n";
  }
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["tool_version"] = report.tool_version.empty() ? kToolVersion : report.tool_version;
  j["master_seed"] = report.master_seed;
  j["config"] = report.config_echo;
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row;
    row["setting"] = r.setting;
    row["M"] = r.M;
    row["sigma2"] = r.sigma2;
    row["n_min"] = r.n_min;
    row["n_max"] = r.n_max;
    row["method"] = r.method;
    row["replicate"] = r.replicate;
    row["ari"] = r.ari;
    row["weight_corr"] = r.weight_corr;
    row["seconds"] = r.seconds;
    row["failed"] = r.failed;
    if (!r.error.empty()) row["error"] = r.error;
    if (!r.weights.empty()) row["weights"] = r.weights;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport report;
  report.tool_version = j.value("tool_version", "");
  report.master_seed = j.value("master_seed", std::uint64_t{0});
  report.config_echo = j.value("config", nlohmann::json::object());
  for (const auto& row : j["rows"]) {
    ResultRow r;
    r.setting = row.value("setting", "");
    r.M = row.value("M", 0);
    r.sigma2 = row.value("sigma2", 0.0);
    r.n_min = row.value("n_min", 0);
    r.n_max = row.value("n_max", 0);
    r.method = row.value("method", "");
    r.replicate = row.value("replicate", 0);
    r.ari = row["ari"].is_number() ? row["ari"].get<double>()
                                   : std::numeric_limits<double>::quiet_NaN();
    r.weight_corr = row["weight_corr"].is_number()
                        ? row["weight_corr"].get<double>()
                        : std::numeric_limits<double>::quiet_NaN();
    r.seconds = row.value("seconds", 0.0);
    r.failed = row.value("failed", false);
    r.error = row.value("error", "");
    if (row.contains("weights")) r.weights = row["weights"].get<std::vector<double>>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

void write_report(const RunReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report_to_json(report).dump(2) << "\n";
  }
  std::ofstream csv(dir / "results.csv");
  csv << "# font " << (report.tool_version.empty() ? kToolVersion : report.tool_version)
      << " seed=" << report.master_seed << " config=" << report.config_echo.dump() << "\n";
  csv << "setting,M,sigma2,n_range,method,ari,weight_corr,seconds\n";
  for (const auto& r : report.rows) {
    csv << r.setting << "," << r.M << "," << format_double(r.sigma2) << "," << r.n_min << "-"
        << r.n_max << "," << r.method << ","
        << (std::isfinite(r.ari) ? format_double(r.ari) : "") << ","
        << (std::isfinite(r.weight_corr) ? format_double(r.weight_corr) : "") << ","
        << format_double(r.seconds) << "\n";
  }
}

std::string aggregate_reports(const std::vector<RunReport>& reports) {
  struct Cell {
    std::vector<double> aris;
    std::vector<double> corrs;
  };
  std::map<std::tuple<std::string, int, double, std::string>, Cell> cells;
  for (const auto& report : reports) {
    for (const auto& r : report.rows) {
      if (r.failed) continue;
      auto& cell = cells[{r.setting, r.M, r.sigma2, r.method}];
      if (std::isfinite(r.ari)) cell.aris.push_back(r.ari);
      if (std::isfinite(r.weight_corr)) cell.corrs.push_back(r.weight_corr);
    }
  }
  std::ostringstream out;
  out << "regime,M,sigma2,method,mean_ari,sd_ari,mean_weight_corr\n";
  for (const auto& [key, cell] : cells) {
    const auto& [setting, m, sigma2, method] = key;
    double mean = 0.0, sd = 0.0;
    if (!cell.aris.empty()) {
      for (double a : cell.aris) mean += a;
      mean /= static_cast<double>(cell.aris.size());
      for (double a : cell.aris) sd += (a - mean) * (a - mean);
      sd = cell.aris.size() > 1 ? std::sqrt(sd / (static_cast<double>(cell.aris.size()) - 1)) : 0.0;
    }
    double corr = std::numeric_limits<double>::quiet_NaN();
    if (!cell.corrs.empty()) {
      corr = 0.0;
      for (double c : cell.corrs) corr += c;
      corr /= static_cast<double>(cell.corrs.size());
    }
    out << setting << "," << m << "," << format_double(sigma2) << "," << method << ","
        << (cell.aris.empty() ? "" : format_double(mean)) << ","
        << (cell.aris.empty() ? "" : format_double(sd)) << ","
        << (std::isfinite(corr) ? format_double(corr) : "") << "\n";
  }
  return out.str();
}

}  // namespace font
