#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nht/fss.hpp"
#include "nht/model.hpp"
#include "nht/transfer.hpp"

namespace nht {

enum class JobKind { lyapunov, conductance, histogram, fss, collapse, verify };
std::string to_string(JobKind k);
JobKind job_kind_from_string(const std::string& s);

/// How a swept disorder value W maps onto the model widths.
enum class DisorderMode { both, real, imag };

struct JobConfig {
  JobKind kind = JobKind::lyapunov;
  ModelSpec model;  // template; lx, ly, wr, wi and seed are set per point
  DisorderMode disorder = DisorderMode::both;
  std::vector<int> sizes;
  std::vector<double> disorders;
  std::uint64_t seed = 1;
  int samples = 1;
  double target_rel_se = 0.0;
  int q_interval = 4;
  Channels channels = Channels::half;
  Observable observable = Observable::Lambda;
  std::string output = "out";
  int workers = 0;  // 0 means default_workers()
  // fss / collapse
  std::vector<std::string> datasets;
  std::vector<ExpansionOrder> orders;
  int fit_starts = 16;
  int ci_samples = 0;
  double min_gof = 0.1;
  // histogram / conductance
  int bins = 60;
  bool deficits = false;  // per-sample symmetry and unitarity deficits (doubles the cost)
  std::uint64_t hash = 0;  // FNV-1a of the canonical config text

  /// Parses and validates; the hash covers the canonical (sorted-key) form after overrides.
  static JobConfig from_json_text(const std::string& text, const std::uint64_t* seed_override = nullptr);
  void validate() const;
  int resolved_workers() const;
};

/// Seed of sample `sample` at sweep point (L, W).
std::uint64_t point_seed(std::uint64_t seed, int L, double W, std::uint64_t sample);

/// Model at sweep point (L, W).
ModelSpec point_spec(const JobConfig& c, int L, double W, std::uint64_t sample = 0);

/// Runs the job and writes its artifacts under c.output. Returns the process exit status:
/// nonzero if any sweep point failed (or, for fss, no order converged; for verify, a relation failed).
int run_job(const JobConfig& c);

}  // namespace nht
