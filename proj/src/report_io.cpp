#include "avgspde/report_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace avgspde::io {
namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

namespace {

class Csv {
 public:
  explicit Csv(std::string header) : text_(std::move(header) + "\n") {}
  Csv& operator<<(double x) { return cell(format_double(x)); }
  Csv& operator<<(std::size_t x) { return cell(std::to_string(x)); }
  Csv& operator<<(bool x) { return cell(x ? "1" : "0"); }
  Csv& operator<<(const std::string& s) { return cell(s); }
  void end_row() {
    text_ += '\n';
    fresh_ = true;
  }
  const std::string& str() const { return text_; }

 private:
  Csv& cell(const std::string& s) {
    if (!fresh_) text_ += ',';
    text_ += s;
    fresh_ = false;
    return *this;
  }
  std::string text_;
  bool fresh_ = true;
};

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string trajectory_csv(const Trajectory& tr, std::size_t coeffs) {
  std::string header = "t,u_mid,v_mid,u_h_norm,v_h_norm";
  for (std::size_t k = 1; k <= coeffs; ++k) header += ",c_" + std::to_string(k);
  Csv csv(header);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    csv << tr.times[i] << tr.u_mid[i] << tr.v_mid[i] << tr.u_norm[i] << tr.v_norm[i];
    for (std::size_t k = 0; k < coeffs; ++k) csv << (k < tr.u[i].size() ? tr.u[i][k] : 0.0);
    csv.end_row();
  }
  return csv.str();
}

std::string convergence_csv(const ConvergenceReport& r) {
  Csv csv("epsilon,replica,sup_error");
  for (const auto& row : r.rows) {
    csv << row.epsilon << row.replica << row.sup_error;
    csv.end_row();
  }
  return csv.str();
}

std::string bifurcation_csv(const BifurcationReport& r) {
  Csv csv("L,rms_direct,amp_averaged");
  for (const auto& row : r.rows) {
    csv << row.L << row.rms_direct << row.amp_averaged;
    csv.end_row();
  }
  return csv.str();
}

std::string variance_csv(const ScalingReport& r) {
  Csv csv("epsilon,var_direct,var_surrogate");
  for (const auto& row : r.rows) {
    csv << row.epsilon << row.var_direct << row.var_surrogate;
    csv.end_row();
  }
  return csv.str();
}

std::string mixing_csv(const MixingReport& r) {
  Csv csv("mode,measured,exact,bound,satisfied");
  for (const auto& row : r.rows) {
    csv << row.mode << row.measured << row.exact << row.bound << row.satisfied;
    csv.end_row();
  }
  return csv.str();
}

std::string bench_csv(const BenchReport& r) {
  Csv csv("epsilon,t_direct_s,t_surrogate_s,ratio");
  for (const auto& row : r.rows) {
    csv << row.epsilon << row.t_direct_s << row.t_surrogate_s << row.ratio;
    csv.end_row();
  }
  return csv.str();
}

std::string gaussianity_csv(const GaussianityReport& r) {
  Csv csv("source,epsilon,replicas,sample_variance,oracle_variance,ks_statistic,p_value,degenerate");
  for (const auto& row : r.rows) {
    csv << row.source << row.epsilon << row.replicas << row.sample_variance << row.oracle_variance
        << row.ks_statistic << row.p_value << row.degenerate;
    csv.end_row();
  }
  return csv.str();
}

std::string audit_csv(const AuditReport& r) {
  Csv csv("hypothesis,check,pass,detail");
  for (const auto& item : r.items) {
    csv << quote(item.hypothesis) << quote(item.check) << item.pass << quote(item.detail);
    csv.end_row();
  }
  return csv.str();
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "avg_spde";
  j["version"] = m.version;
  j["subcommand"] = m.subcommand;
  j["base_seed"] = m.config.seed;
  j["config_hash"] = config_hash(m.config);
  j["kernel"] = m.kernel;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& k : config_keys()) cfg[k] = get_config_value(m.config, k);
  j["config"] = cfg;
  j["files"] = m.files;
  j["audit_warnings"] = m.audit_warnings;
  j["summary"] = m.summary;
  j["exit_status"] = m.exit_status;
  if (m.timestamps) j["timestamps"] = {{"started", m.timestamps->first}, {"finished", m.timestamps->second}};
  return j.dump(2) + "\n";
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files, RunManifest manifest) {
  const fs::path root(dir);
  fs::create_directories(root);
  manifest.files.clear();
  for (const auto& f : files) {
    write_atomic(root / f.name, f.content);
    manifest.files.push_back(f.name);
  }
  write_atomic(root / "manifest.json", manifest_json(manifest));
}

}  // namespace avgspde::io
