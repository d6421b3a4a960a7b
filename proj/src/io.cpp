#include "nht/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nht {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  fs::rename(tmp, p);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string csv_preamble(std::uint64_t config_hash, const std::string& header) {
  return std::string("# ") + kCsvSchema + " config_hash=" + hex64(config_hash) + "\n" + header + "\n";
}

std::string dataset_csv(const FssDataset& data, std::uint64_t config_hash) {
  std::string s = csv_preamble(config_hash, "L,W,gamma_obs,sigma");
  s.insert(s.find('\n') + 1, "# observable=" + to_string(data.observable) + "\n");
  for (const auto& p : data.points)
    s += std::to_string(p.L) + "," + fmt17(p.W) + "," + fmt17(p.gamma) + "," + fmt17(p.sigma) + "\n";
  return s;
}

FssDataset read_dataset_csv(const std::string& path, std::uint64_t* hash) {
  std::istringstream in(read_file(path));
  FssDataset d;
  if (hash) *hash = 0;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto k = line.find("config_hash="); k != std::string::npos && hash)
        *hash = std::stoull(line.substr(k + 12, 16), nullptr, 16);
      if (auto k = line.find("observable="); k != std::string::npos)
        d.observable = observable_from_string(line.substr(k + 11));
      continue;
    }
    if (!header) {
      if (line != "L,W,gamma_obs,sigma") throw std::runtime_error(path + ": unexpected header " + line);
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell[4];
    for (auto& c : cell)
      if (!std::getline(row, c, ',')) throw std::runtime_error(path + ": short row " + line);
    d.points.push_back({std::stoi(cell[0]), std::stod(cell[1]), std::stod(cell[2]), std::stod(cell[3])});
  }
  return d;
}

namespace {

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

std::string fit_json(const FitResult& f, std::uint64_t config_hash) {
  json j;
  j["schema"] = kJsonSchema;
  j["config_hash"] = hex64(config_hash);
  j["order"] = json::array({f.order.m1, f.order.n1, f.order.m2, f.order.n2});
  j["chi2"] = f.chi2;
  j["n_points"] = f.n_points;
  j["n_dof"] = f.n_dof;
  j["gof"] = f.gof;
  j["converged"] = f.converged;
  j["degenerate"] = f.degenerate;
  j["starts"] = f.starts;
  j["starts_converged"] = f.starts_converged;
  j["Wc"] = f.params.wc;
  j["nu"] = f.params.nu;
  if (f.order.irrelevant()) j["y"] = f.params.y;
  j["Lambda_c"] = f.lambda_c;
  const auto names = f.params.names(f.order);
  const Eigen::VectorXd v = f.params.pack(f.order);
  json coeffs = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) coeffs[names[i]] = v[static_cast<Eigen::Index>(i)];
  j["params"] = coeffs;
  if (!f.ci_params.empty()) {
    json ci = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) ci[names[i]] = interval(f.ci_params[i]);
    ci["Lambda_c"] = interval(f.ci_lambda_c);
    j["ci95"] = ci;
    j["ci_reliable"] = f.ci_reliable;
    j["ci_failed"] = f.ci_failed;
  }
  return j.dump(2) + "\n";
}

std::string histogram_json(const Histogram& h, const GaussianFit* gauss, std::uint64_t config_hash) {
  json j;
  j["schema"] = kJsonSchema;
  j["config_hash"] = hex64(config_hash);
  j["edges"] = h.edges;
  j["counts"] = h.counts;
  j["underflow"] = h.underflow;
  j["overflow"] = h.overflow;
  if (gauss) j["gaussian"] = {{"mean", gauss->mean}, {"sigma", gauss->sigma}};
  return j.dump(2) + "\n";
}

std::string report_json_line(const SymmetryReport& r, std::uint64_t config_hash) {
  json j;
  j["relation"] = to_string(r.relation);
  j["model"] = r.model;
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["expect_pass"] = r.expect_pass;
  j["spec_hash"] = hex64(r.spec_hash);
  j["seed"] = r.seed;
  j["config_hash"] = hex64(config_hash);
  return j.dump() + "\n";
}

}  // namespace nht
