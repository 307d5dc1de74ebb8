#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcflab/flow.hpp"
#include "mcflab/io.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Protocol constants
// ---------------------------------------------------------------------------
//
// The fixed constants of the standing neck hypotheses.  Defaults are the
// protocol values; a config may override them, and whatever is in effect is
// surfaced in every result file.

struct LabConstants {
  double C1 = 10.0;     // inner radius scale of the far region
  double C2 = 10.0;     // vanishing-time envelope coefficient
  double eps0 = 0.04;   // slope slack in the rr_z upper bound
  double K = 10.0;      // axial offset of the barrier family
  double delta = 0.05;  // defect in the rr_z lower bound
};
LabConstants lab_constants(const Config& cfg);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------
//
// Each experiment is a named, seeded, self-contained run that writes its
// data files, a result.json with every check it performed, and a
// manifest.json with digests, into its own subdirectory.  Each registered
// check appears exactly once per run.

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string relation;  // how value compares against bound: "<=", ">=", "info"
  std::string note;
};

struct ExperimentResult {
  std::string id;
  bool pass = false;          // conjunction of the checks, false on error
  double wall_seconds = 0.0;  // recorded in the manifest only
  std::vector<CheckResult> checks;
  std::vector<std::string> outputs;  // file names relative to the directory
  std::string error;  // nonempty when the run aborted; partial outputs and a
                      // failure marker are left in place
};

const std::vector<std::string>& experiment_ids();
bool is_experiment_id(const std::string& id);

// Runs one experiment into <out_dir>/<id>/.  Unknown ids throw
// std::invalid_argument before anything is written.  Solver failures are
// captured into the result instead of propagating.
ExperimentResult run_experiment(const std::string& id, const Config& cfg,
                                const std::filesystem::path& out_dir,
                                std::uint64_t seed);

// Dispatches the listed experiments (all registered ones when the list is
// empty) across up to `jobs` worker threads.  Experiments only ever write
// inside their own subdirectory, so concurrent runs do not share files.
std::vector<ExperimentResult> run_suite(const std::vector<std::string>& ids,
                                        const Config& cfg,
                                        const std::filesystem::path& out_dir,
                                        std::uint64_t seed, int jobs);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

// Pure formatters (pinned by golden tests).
std::string format_report_text(const std::vector<ExperimentResult>& results);
std::string format_report_json(const std::vector<ExperimentResult>& results);

// Loads every <out_dir>/<id>/result.json back in.  A subdirectory that has a
// manifest but lost its result file raises std::runtime_error; an out_dir
// without any recorded experiment yields an empty list.
std::vector<ExperimentResult> load_results(const std::filesystem::path& out_dir);

// load_results + write report.txt / report.json into out_dir.
std::vector<ExperimentResult> emit_report(const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Trajectory checks (building blocks of the experiments, exposed for tests)
// ---------------------------------------------------------------------------

// Far-field slope invariant r r_z -> (n-1)/c of a translating flank in the
// radial gauge.  `level` is the reference value (n-1)/c_ref; samples with
// r >= r_far form the far region.  A trajectory whose r r_z never gets near
// the level (the round cylinder: r r_z = 0) is flagged degenerate and the
// far-value comparison is waived by callers.
struct RrzReport {
  double level = 0.0;      // (n-1) / c_ref
  double far_value = 0.0;  // r r_z at the last centered node, final snapshot
  double sup_all = 0.0;    // sup of r r_z over all centered samples
  double inf_far = 0.0;    // inf over the far region
  bool degenerate = false;
  std::size_t samples = 0;
};
RrzReport check_rr_z_limits(const FlowTrajectory& tr, double c_ref,
                            double r_far);

// Half-line heat barrier under r r_z.  With zeta >= 0 the distance from the
// left end of the grid,
//   barrier(zeta, t) = (n-1) (1/c - 2 delta - (1/c) erfc(zeta / sqrt(t - s)))
// (the doubled-argument half-line heat solution started at time s), and the
// ordering r r_z > barrier must hold at every sample with t > s.
struct BarrierReport {
  double min_gap = 0.0;  // min of r r_z - barrier
  std::size_t samples = 0;
  bool ordered = false;
};
BarrierReport check_half_line_barrier(const FlowTrajectory& tr, double c_ref,
                                      double delta, double s);

// Speed bounds of a translating graph trajectory: the pointwise identity
// f_t = sqrt(1+f_r^2) H (two independent evaluation routes), the lower
// bound f_t >= c_ref - tol, and the straight-line fit of the tip height.
// Inapplicable gauges (no axis, or not a height graph) are flagged, not
// failed.
struct TipSpeedReport {
  bool applicable = false;
  double min_speed = 0.0;         // min of f_t over interior samples
  double max_identity_gap = 0.0;  // max |f_t - sqrt(1+f_r^2) H|
  double tip_slope = 0.0;         // least-squares slope of f(0, t)
  double sup_dev_first = 0.0;     // sup_{r <= r0} |f_t - c_ref|, first time
  double sup_dev_last = 0.0;      // same at the final time
  std::string note;
};
TipSpeedReport check_tip_speed(const FlowTrajectory& tr, double c_ref,
                               double r0);

}  // namespace mcflab
