#include "nht/job.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nht/io.hpp"
#include "nht/rng.hpp"
#include "nht/scatter.hpp"
#include "nht/stats.hpp"
#include "nht/symmetry.hpp"

namespace nht {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::lyapunov: return "lyapunov";
    case JobKind::conductance: return "conductance";
    case JobKind::histogram: return "histogram";
    case JobKind::fss: return "fss";
    case JobKind::collapse: return "collapse";
    case JobKind::verify: return "verify";
  }
  return "?";
}

JobKind job_kind_from_string(const std::string& s) {
  for (auto k : {JobKind::lyapunov, JobKind::conductance, JobKind::histogram, JobKind::fss, JobKind::collapse,
                 JobKind::verify})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown job kind: " + s);
}

namespace {

std::vector<double> parse_sweep(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_number()) return {j.get<double>()};
  const double from = j.at("from"), to = j.at("to"), step = j.at("step");
  if (!(step > 0.0) || to < from) throw std::invalid_argument("bad disorder range");
  const int count = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::round((from + i * step) * 1e12) / 1e12);
  return out;
}

ModelSpec parse_model(const json& j) {
  ModelSpec m;
  m.kind = model_kind_from_string(j.value("kind", "anderson"));
  m.lz = j.value("lz", 1);
  if (j.contains("energy")) {
    const auto& e = j["energy"];
    m.energy = e.is_array() ? cd{e.at(0).get<double>(), e.at(1).get<double>()} : cd{e.get<double>(), 0.0};
  }
  m.wr = j.value("wr", 0.0);
  m.wi = j.value("wi", 0.0);
  m.bc = boundary_from_string(j.value("bc", "periodic"));
  if (j.contains("flux")) m.flux = {j["flux"].at(0).get<std::int64_t>(), j["flux"].at(1).get<std::int64_t>()};
  m.g = j.value("g", 0.0);
  return m;
}

}  // namespace

JobConfig JobConfig::from_json_text(const std::string& text, const std::uint64_t* seed_override) {
  json j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  if (seed_override) j["seed"] = *seed_override;
  JobConfig c;
  c.kind = job_kind_from_string(j.at("job"));
  if (j.contains("model")) c.model = parse_model(j["model"]);
  const std::string mode = j.value("disorder", "both");
  if (mode == "both") c.disorder = DisorderMode::both;
  else if (mode == "real") c.disorder = DisorderMode::real;
  else if (mode == "imag") c.disorder = DisorderMode::imag;
  else throw std::invalid_argument("disorder must be both, real or imag");
  if (j.contains("L")) c.sizes = j["L"].is_array() ? j["L"].get<std::vector<int>>() : std::vector<int>{j["L"].get<int>()};
  if (j.contains("W")) c.disorders = parse_sweep(j["W"]);
  c.seed = j.value("seed", std::uint64_t{1});
  c.samples = j.value("samples", 1);
  c.target_rel_se = j.value("target_rel_se", 0.0);
  c.q_interval = j.value("q_interval", 4);
  const std::string ch = j.value("channels", "half");
  if (ch != "half" && ch != "full") throw std::invalid_argument("channels must be half or full");
  c.channels = ch == "full" ? Channels::full : Channels::half;
  c.observable = observable_from_string(j.value("observable", "Lambda"));
  c.output = j.value("output", "out");
  c.workers = j.value("workers", 0);
  if (j.contains("datasets")) c.datasets = j["datasets"].get<std::vector<std::string>>();
  if (j.contains("orders"))
    for (const auto& o : j["orders"]) c.orders.push_back({o.at(0), o.at(1), o.at(2), o.at(3)});
  c.fit_starts = j.value("fit_starts", 16);
  c.ci_samples = j.value("ci_samples", 0);
  c.min_gof = j.value("min_gof", 0.1);
  c.bins = j.value("bins", 60);
  c.deficits = j.value("deficits", false);
  // The hash identifies the numerical content, so placement and parallelism are left out.
  json canon = j;
  canon.erase("workers");
  canon.erase("output");
  c.hash = fnv1a(canon.dump());
  c.validate();
  return c;
}

void JobConfig::validate() const {
  const bool sweep = kind == JobKind::lyapunov || kind == JobKind::conductance || kind == JobKind::histogram ||
                     kind == JobKind::verify;
  if (sweep) {
    if (sizes.empty() || disorders.empty()) throw std::invalid_argument("sweep lists must be non-empty");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (q_interval < 1) throw std::invalid_argument("q_interval must be >= 1");
    for (int L : sizes) point_spec(*this, L, disorders.front()).validate();
  } else {
    if (datasets.empty()) throw std::invalid_argument("fss and collapse jobs need datasets");
    if (orders.empty()) throw std::invalid_argument("fss and collapse jobs need orders");
    for (const auto& o : orders) o.validate();
    if (kind == JobKind::collapse && orders.size() != 1 && orders.size() != datasets.size())
      throw std::invalid_argument("collapse needs one order, or one per dataset");
  }
  if (output.empty()) throw std::invalid_argument("output path must be set");
}

int JobConfig::resolved_workers() const { return workers > 0 ? workers : default_workers(); }

std::uint64_t point_seed(std::uint64_t seed, int L, double W, std::uint64_t sample) {
  return hash_words({seed, static_cast<std::uint64_t>(L), std::bit_cast<std::uint64_t>(W), sample});
}

ModelSpec point_spec(const JobConfig& c, int L, double W, std::uint64_t sample) {
  ModelSpec s = c.model;
  if (s.kind == ModelKind::hatano_nelson) {
    s.lx = s.ly = 1;
  } else {
    s.lx = s.ly = L;
  }
  switch (c.disorder) {
    case DisorderMode::both: s.wr = s.wi = W; break;
    case DisorderMode::real: s.wr = W; s.wi = 0.0; break;
    case DisorderMode::imag: s.wr = 0.0; s.wi = W; break;
  }
  s.seed = point_seed(c.seed, L, W, sample);
  return s;
}

namespace {

struct Point {
  int L;
  double W;
};

std::vector<Point> sweep_points(const JobConfig& c) {
  std::vector<Point> pts;
  for (int L : c.sizes)
    for (double W : c.disorders) pts.push_back({L, W});
  return pts;
}

std::string path_in(const JobConfig& c, const std::string& name) { return (fs::path(c.output) / name).string(); }

std::string point_tag(const Point& p) {
  std::ostringstream os;
  os << "L" << p.L << "_W" << fmt17(p.W);
  return os.str();
}

// ---- lyapunov -------------------------------------------------------------

struct LyapunovRow {
  bool ok = false;
  std::string error;
  std::uint64_t seed = 0;
  LyapunovSpectrum s;
};

// Completed points are cached one file per point so an interrupted sweep resumes.
std::string lyapunov_cache_line(const LyapunovRow& r) {
  std::string s = std::to_string(r.seed) + "," + fmt17(r.s.Lambda) + "," + fmt17(r.s.Lambda_se) + "," +
                  fmt17(r.s.gamma1) + "," + fmt17(r.s.gamma1_se) + "," + std::to_string(r.s.lz_used) + "," +
                  std::to_string(r.s.q_used) + "," + (r.s.converged ? "1" : "0");
  for (double g : r.s.gammas) s += "," + fmt17(g);
  return s + "\n";
}

bool read_cache_line(const std::string& path, LyapunovRow& r) {
  if (!fs::exists(path)) return false;
  std::istringstream in(read_file(path));
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (cells.size() < 8) return false;
  r.seed = std::stoull(cells[0]);
  r.s.Lambda = std::stod(cells[1]);
  r.s.Lambda_se = std::stod(cells[2]);
  r.s.gamma1 = std::stod(cells[3]);
  r.s.gamma1_se = std::stod(cells[4]);
  r.s.lz_used = std::stol(cells[5]);
  r.s.q_used = std::stoi(cells[6]);
  r.s.converged = cells[7] == "1";
  for (std::size_t i = 8; i < cells.size(); ++i) r.s.gammas.push_back(std::stod(cells[i]));
  r.ok = true;
  return true;
}

int run_lyapunov(const JobConfig& c) {
  const auto pts = sweep_points(c);
  std::vector<LyapunovRow> rows(pts.size());
  const std::string cache = path_in(c, "points");
  parallel_for(pts.size(), c.resolved_workers(), [&](std::size_t i) {
    LyapunovRow& r = rows[i];
    const std::string file = (fs::path(cache) / (hex64(c.hash) + "_" + point_tag(pts[i]) + ".csv")).string();
    if (read_cache_line(file, r)) return;
    try {
      const ModelSpec spec = point_spec(c, pts[i].L, pts[i].W);
      r.seed = spec.seed;
      LyapunovOptions opt;
      opt.q_interval = c.q_interval;
      opt.channels = c.channels;
      opt.target_rel_se = c.target_rel_se;
      r.s = lyapunov_spectrum(spec, opt);
      r.ok = true;
      write_atomic(file, lyapunov_cache_line(r));
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  std::string csv = csv_preamble(
      c.hash, "L,W,seed,Lambda,Lambda_se,gamma1,gamma1_se,lz_used,q_used,converged,status");
  FssDataset data;
  data.observable = c.observable;
  int failed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& r = rows[i];
    csv += std::to_string(pts[i].L) + "," + fmt17(pts[i].W) + ",";
    if (!r.ok) {
      ++failed;
      csv += ",,,,,,,,failed: " + r.error + "\n";
      continue;
    }
    csv += std::to_string(r.seed) + "," + fmt17(r.s.Lambda) + "," + fmt17(r.s.Lambda_se) + "," +
           fmt17(r.s.gamma1) + "," + fmt17(r.s.gamma1_se) + "," + std::to_string(r.s.lz_used) + "," +
           std::to_string(r.s.q_used) + "," + (r.s.converged ? "1" : "0") + ",ok\n";
    FssPoint p{pts[i].L, pts[i].W, r.s.Lambda, r.s.Lambda_se};
    if (c.observable == Observable::ln_Lambda) {
      p.gamma = std::log(r.s.Lambda);
      p.sigma = r.s.Lambda_se / r.s.Lambda;
    }
    data.points.push_back(p);
  }
  write_atomic(path_in(c, "lyapunov.csv"), csv);
  write_atomic(path_in(c, "dataset.csv"), dataset_csv(data, c.hash));
  std::cout << "lyapunov: " << pts.size() - failed << "/" << pts.size() << " points -> " << c.output << "\n";
  return failed ? 1 : 0;
}

// ---- conductance ----------------------------------------------------------

int run_conductance(const JobConfig& c) {
  const auto pts = sweep_points(c);
  std::string samples = csv_preamble(
      c.hash, "L,W,sample,seed,g_left,g_right,ln_g,symmetry_deficit,unitarity_deficit,paired_deficit");
  std::string summary = csv_preamble(
      c.hash, "L,W,samples,mean_ln_g,se_ln_g,mean_g,skewness_g,max_g,tail_fraction,status");
  int failed = 0;
  for (const auto& pt : pts) {
    try {
      const ModelSpec spec = point_spec(c, pt.L, pt.W);
      const auto ens = conductance_ensemble(spec, c.samples, c.resolved_workers(), {},
                                            static_cast<std::size_t>(c.bins), c.deficits);
      for (std::size_t i = 0; i < ens.samples.size(); ++i) {
        const auto& s = ens.samples[i];
        samples += std::to_string(pt.L) + "," + fmt17(pt.W) + "," + std::to_string(i) + "," +
                   std::to_string(ens.seeds[i]) + "," + fmt17(s.g_left) + "," + fmt17(s.g_right) + "," +
                   fmt17(s.ln_g) + "," + fmt17(s.symmetry_deficit) + "," + fmt17(s.unitarity_deficit) + "," +
                   fmt17(s.paired_deficit) + "\n";
      }
      summary += std::to_string(pt.L) + "," + fmt17(pt.W) + "," + std::to_string(c.samples) + "," +
                 fmt17(ens.mean_ln_g) + "," + fmt17(ens.se_ln_g) + "," + fmt17(ens.mean_g) + "," +
                 fmt17(ens.skewness_g) + "," + fmt17(ens.max_g) + "," + fmt17(ens.tail_fraction) + ",ok\n";
      write_atomic(path_in(c, "histogram_" + point_tag(pt) + ".json"), histogram_json(ens.histogram, nullptr, c.hash));
    } catch (const std::exception& e) {
      ++failed;
      summary += std::to_string(pt.L) + "," + fmt17(pt.W) + ",,,,,,,,failed: " + e.what() + "\n";
    }
  }
  write_atomic(path_in(c, "conductance_samples.csv"), samples);
  write_atomic(path_in(c, "conductance_summary.csv"), summary);
  std::cout << "conductance: " << pts.size() - failed << "/" << pts.size() << " points -> " << c.output << "\n";
  return failed ? 1 : 0;
}

// ---- histogram ------------------------------------------------------------

Histogram spread_histogram(const std::vector<double>& x, std::size_t bins) {
  double lo = x.front(), hi = x.front();
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = 1e-9 * std::max(1.0, std::abs(hi - lo)) + 1e-12;
  return Histogram::linear(lo - pad, hi + pad, bins);
}

int run_histogram(const JobConfig& c) {
  const auto pts = sweep_points(c);
  std::string csv = csv_preamble(c.hash, "L,W,sample,seed,gamma_plus,gamma_minus");
  std::string summary = csv_preamble(
      c.hash, "L,W,samples,mean_plus,sigma_plus,normality_p_plus,mean_minus,sigma_minus,normality_p_minus,status");
  int failed = 0;
  for (const auto& pt : pts) {
    const std::size_t ns = static_cast<std::size_t>(c.samples);
    std::vector<double> plus(ns), minus(ns);
    std::vector<std::uint64_t> seeds(ns);
    std::vector<std::string> errors(ns);
    parallel_for(ns, c.resolved_workers(), [&](std::size_t i) {
      try {
        const ModelSpec spec = point_spec(c, pt.L, pt.W, i);
        seeds[i] = spec.seed;
        LyapunovOptions opt;
        opt.q_interval = c.q_interval;
        opt.channels = Channels::full;
        const auto s = lyapunov_spectrum(spec, opt);
        const std::size_t n = static_cast<std::size_t>(spec.n());
        plus[i] = s.gammas[n - 1];
        minus[i] = s.gammas[n];
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    std::string err;
    for (const auto& e : errors)
      if (!e.empty()) err = e;
    if (!err.empty()) {
      ++failed;
      summary += std::to_string(pt.L) + "," + fmt17(pt.W) + ",,,,,,,,failed: " + err + "\n";
      continue;
    }
    for (std::size_t i = 0; i < ns; ++i)
      csv += std::to_string(pt.L) + "," + fmt17(pt.W) + "," + std::to_string(i) + "," + std::to_string(seeds[i]) +
             "," + fmt17(plus[i]) + "," + fmt17(minus[i]) + "\n";
    const GaussianFit gp = fit_gaussian(plus), gm = fit_gaussian(minus);
    const double pp = ns >= 20 ? normality_pvalue(plus) : std::nan("");
    const double pm = ns >= 20 ? normality_pvalue(minus) : std::nan("");
    summary += std::to_string(pt.L) + "," + fmt17(pt.W) + "," + std::to_string(ns) + "," + fmt17(gp.mean) + "," +
               fmt17(gp.sigma) + "," + fmt17(pp) + "," + fmt17(gm.mean) + "," + fmt17(gm.sigma) + "," + fmt17(pm) +
               ",ok\n";
    Histogram hp = spread_histogram(plus, static_cast<std::size_t>(c.bins));
    Histogram hm = spread_histogram(minus, static_cast<std::size_t>(c.bins));
    for (std::size_t i = 0; i < ns; ++i) {
      hp.add(plus[i]);
      hm.add(minus[i]);
    }
    write_atomic(path_in(c, "gamma_plus_" + point_tag(pt) + ".json"), histogram_json(hp, &gp, c.hash));
    write_atomic(path_in(c, "gamma_minus_" + point_tag(pt) + ".json"), histogram_json(hm, &gm, c.hash));
  }
  write_atomic(path_in(c, "gamma_samples.csv"), csv);
  write_atomic(path_in(c, "gamma_summary.csv"), summary);
  std::cout << "histogram: " << pts.size() - failed << "/" << pts.size() << " points -> " << c.output << "\n";
  return failed ? 1 : 0;
}

// ---- fss / collapse -------------------------------------------------------

std::vector<FssDataset> load_datasets(const JobConfig& c) {
  std::vector<FssDataset> out;
  std::uint64_t first = 0;
  for (std::size_t i = 0; i < c.datasets.size(); ++i) {
    std::uint64_t h = 0;
    out.push_back(read_dataset_csv(c.datasets[i], &h));
    if (i == 0) first = h;
    else if (h != first && c.kind == JobKind::fss)
      std::cerr << "warning: " << c.datasets[i] << " has config hash " << hex64(h) << ", expected "
                << hex64(first) << "\n";
  }
  return out;
}

FitResult fit_order(const JobConfig& c, const FssDataset& d, const ExpansionOrder& o) {
  FitOptions opt;
  opt.starts = c.fit_starts;
  opt.seed = c.seed;
  FitResult f = fit(d, o, opt);
  if (c.ci_samples > 0 && f.converged) {
    CiOptions ci;
    ci.n_synthetic = c.ci_samples;
    ci.seed = hash_words({c.seed, 0x6369});
    ci.workers = c.resolved_workers();
    confidence_intervals(f, d, ci);
  }
  return f;
}

int run_fss(const JobConfig& c) {
  const auto data = load_datasets(c);
  json report;
  report["schema"] = kJsonSchema;
  report["config_hash"] = hex64(c.hash);
  report["min_gof"] = c.min_gof;
  report["accepted"] = json::array();
  report["flagged"] = json::array();
  int converged = 0;
  for (std::size_t d = 0; d < data.size(); ++d) {
    for (const auto& o : c.orders) {
      json entry;
      entry["dataset"] = c.datasets[d];
      entry["order"] = json::array({o.m1, o.n1, o.m2, o.n2});
      try {
        const FitResult f = fit_order(c, data[d], o);
        entry["fit"] = json::parse(fit_json(f, c.hash));
        const std::string name = "fit_" + std::to_string(d) + "_" + std::to_string(o.m1) + std::to_string(o.n1) +
                                 std::to_string(o.m2) + std::to_string(o.n2) + ".json";
        write_atomic(path_in(c, name), fit_json(f, c.hash));
        if (f.converged) ++converged;
        const bool ok = f.converged && !f.degenerate && f.gof > c.min_gof;
        if (!ok) {
          entry["reason"] = !f.converged ? "not converged" : (f.degenerate ? "degenerate" : "gof below threshold");
          report["flagged"].push_back(entry);
        } else {
          report["accepted"].push_back(entry);
        }
        std::cout << c.datasets[d] << " " << o.str() << " Wc=" << f.params.wc << " nu=" << f.params.nu
                  << " Lambda_c=" << f.lambda_c << " chi2=" << f.chi2 << "/" << f.n_dof << " gof=" << f.gof
                  << (ok ? "" : "  [flagged]") << "\n";
      } catch (const std::exception& e) {
        entry["reason"] = std::string("error: ") + e.what();
        report["flagged"].push_back(entry);
      }
    }
  }
  write_atomic(path_in(c, "fss_report.json"), report.dump(2) + "\n");
  return converged > 0 ? 0 : 1;
}

int run_collapse(const JobConfig& c) {
  const auto data = load_datasets(c);
  std::vector<FitResult> fits;
  for (std::size_t d = 0; d < data.size(); ++d) {
    const ExpansionOrder& o = c.orders.size() == 1 ? c.orders[0] : c.orders[d];
    FitOptions opt;
    opt.starts = c.fit_starts;
    opt.seed = c.seed;
    fits.push_back(fit(data[d], o, opt));
    if (!fits.back().converged) {
      std::cerr << "collapse: fit of " << c.datasets[d] << " did not converge\n";
      return 1;
    }
  }
  const CollapseResult ref = scaling_collapse(fits[0], data[0], 1.0);
  std::vector<CollapseResult> all{ref};
  json summary;
  summary["schema"] = kJsonSchema;
  summary["config_hash"] = hex64(c.hash);
  summary["curves"] = json::array();
  for (std::size_t d = 0; d < data.size(); ++d) {
    if (d > 0) all.push_back(scaling_collapse(fits[d], data[d], match_xi(ref, fits[d], data[d])));
    json e;
    e["dataset"] = c.datasets[d];
    e["xi_scale"] = all[d].xi_scale;
    e["Wc"] = fits[d].params.wc;
    e["nu"] = fits[d].params.nu;
    if (d > 0) {
      const auto dist = collapse_distance(ref, all[d]);
      e["rms"] = dist.rms;
      e["pooled_sigma"] = dist.pooled_sigma;
      e["compared"] = dist.compared;
    }
    summary["curves"].push_back(e);
  }
  std::string csv = csv_preamble(c.hash, "dataset,L,W,branch,x,corrected,sigma");
  for (std::size_t d = 0; d < all.size(); ++d)
    for (const auto& p : all[d].points)
      csv += std::to_string(d) + "," + std::to_string(p.L) + "," + fmt17(p.W) + "," + std::to_string(p.branch) +
             "," + fmt17(p.x) + "," + fmt17(p.corrected) + "," + fmt17(p.sigma) + "\n";
  write_atomic(path_in(c, "collapse.csv"), csv);
  write_atomic(path_in(c, "collapse.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---- verify ---------------------------------------------------------------

int run_verify(const JobConfig& c) {
  const auto pts = sweep_points(c);
  std::vector<std::pair<Point, std::uint64_t>> work;
  for (const auto& p : pts)
    for (int s = 0; s < c.samples; ++s) work.push_back({p, static_cast<std::uint64_t>(s)});
  std::vector<std::vector<SymmetryReport>> out(work.size());
  std::vector<std::string> errors(work.size());
  parallel_for(work.size(), c.resolved_workers(), [&](std::size_t i) {
    try {
      out[i] = verify_all(point_spec(c, work[i].first.L, work[i].first.W, work[i].second));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::string lines;
  std::map<std::string, std::pair<int, int>> tally;
  int bad = 0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!errors[i].empty()) {
      ++bad;
      std::cerr << "verify " << point_tag(work[i].first) << ": " << errors[i] << "\n";
    }
    for (const auto& r : out[i]) {
      lines += report_json_line(r, c.hash);
      auto& t = tally[to_string(r.relation)];
      ++t.second;
      if (r.pass == r.expect_pass) ++t.first;
      else ++bad;
    }
  }
  write_atomic(path_in(c, "verify.jsonl"), lines);
  for (const auto& [name, t] : tally)
    std::cout << (t.first == t.second ? "PASS " : "FAIL ") << name << " " << t.first << "/" << t.second << "\n";
  return bad ? 1 : 0;
}

}  // namespace

int run_job(const JobConfig& c) {
  c.validate();
  fs::create_directories(c.output);
  switch (c.kind) {
    case JobKind::lyapunov: return run_lyapunov(c);
    case JobKind::conductance: return run_conductance(c);
    case JobKind::histogram: return run_histogram(c);
    case JobKind::fss: return run_fss(c);
    case JobKind::collapse: return run_collapse(c);
    case JobKind::verify: return run_verify(c);
  }
  return 2;
}

}  // namespace nht
