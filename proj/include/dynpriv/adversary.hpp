#pragma once

// Reconstruction attacks on masked consensus logs.
//
// Attacks see only public data: the sample instants, the masked outputs y
// and the Laplacian. ObservationLog has no field for true states or mask
// parameters, so an attack cannot reach them; ground truth enters only
// through score_against_truth, after the attack has produced its estimates.
// A verdict other than Recovered certifies indiscernibility against this
// attack family only, never against every possible reconstruction.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynpriv/dynamics.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/masks.hpp"

namespace dynpriv {

inline constexpr double kSignalFloor = 1e-10;
inline constexpr double kFitResidualThreshold = 1e-3;
inline constexpr double kAmbiguityBand = 0.10;
inline constexpr double kRecoveryTolerance = 0.01;

struct ObservationLog {
  std::vector<double> times;
  SampleMatrix y;
  BalancedLaplacian laplacian;
  // The mask structure the attacker assumes is in use.
  std::optional<MaskFamily> known_family;
  // Nodes under attack; empty means all.
  std::vector<std::size_t> target_nodes;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t dim() const noexcept { return y.cols(); }
  std::vector<std::size_t> targets() const;
};

// Copies only the public half of a trajectory.
ObservationLog public_log(const Trajectory& traj, const BalancedLaplacian& L,
                          std::optional<MaskFamily> assumed_family = std::nullopt);

// Uniform sample spacing; throws NonUniformGrid / TooFewSamples.
double uniform_spacing(std::span<const double> times);

// dy/dt per sample: fourth-order central differences inside, fourth-order
// one-sided five-point formulas at the two first and two last samples.
SampleMatrix estimate_ydot(const ObservationLog& log);

// r(t) ~ A e^{-delta t} fitted by least squares on log|r| over samples with
// |r| > floor. amplitude is signed and refers to t = 0.
struct ExponentialFit {
  double delta = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // RMS misfit in log space; DBL_MAX if the sign flips
  std::size_t used = 0;
};

std::optional<ExponentialFit> fit_exponential(std::span<const double> times,
                                              std::span<const double> signal,
                                              double floor = kSignalFloor);

enum class Outcome { Recovered, Ambiguous, Failed };

std::string_view to_string(Outcome o);

struct Candidate {
  double c = 1.0;
  double delta = 0.0;
  double gamma = 0.0;
  double x0 = 0.0;
  double residual = 0.0;
};

struct NodeVerdict {
  std::size_t node = 0;
  Outcome outcome = Outcome::Failed;
  std::optional<double> x0_estimate;
  std::optional<double> relative_error;
  std::vector<Candidate> candidates;
  double residual = 0.0;
  std::string reason;
  // The residual signal never rose above the floor: there was no mask
  // offset to strip, so y(t0) is taken as x(t0) directly.
  bool below_floor = false;
};

struct AttackReport {
  std::string attack;
  std::optional<std::size_t> attacker;
  std::vector<NodeVerdict> nodes;
};

// Fills relative_error = |estimate - truth| / max(|truth|, 1) for every node
// that produced an estimate.
void score_against_truth(AttackReport& report, std::span<const double> x0_truth);

// Breached: Recovered with a truth-scored relative error below 1%.
bool breached(const NodeVerdict& v);

// Additive structure assumed: r_i = f_i(y) - y_i' = delta_i gamma_i
// e^{-delta_i t}. Requires log.known_family == Additive.
AttackReport attack_additive(const ObservationLog& log);

// Affine structure assumed: for each candidate gain c, r_i = f_i(y) - y_i'/c
// is fitted as above. Candidates within 10% of the best residual survive;
// two or more survivors whose implied x_i(0) differ by more than 1% of the
// state scale make the node Ambiguous. Requires log.known_family == Affine
// and a nonempty grid of positive gains.
AttackReport attack_affine(const ObservationLog& log, std::span<const double> c_grid);

// The attacker sees y_k for k in its closed in-neighbourhood. When that set
// contains the victim's closed in-neighbourhood, it integrates
// f_victim(y) = -(L y)_victim by composite Simpson and estimates
// x_victim(t0) = y_victim(T) - integral. Throws PreconditionUnmet when the
// neighbourhoods do not nest and HorizonTooShort when the attacker's
// visible outputs have not settled (spread >= 1e-6 at T).
AttackReport attack_integral(const ObservationLog& log, std::size_t victim, std::size_t attacker,
                             const WeightedDigraph& graph);

// Composite Simpson on a uniform grid; an odd interval count closes with
// the 3/8 rule over the last three intervals.
double simpson(std::span<const double> values, double spacing);

struct AttackSuite {
  bool additive = true;
  std::vector<double> affine_c_grid{1.5, 2.0, 3.0};
  bool integral = true;
};

struct Scenario {
  WeightedDigraph graph;
  MaskSpec mask;
  std::vector<double> x0;
  IntegrationSettings integration;
  AttackSuite attacks;
};

struct DiscernibilityRow {
  MaskFamily family = MaskFamily::Identity;
  std::string attack;
  std::optional<std::size_t> attacker;
  bool assumption1_holds = true;
  std::size_t node = 0;
  Outcome outcome = Outcome::Failed;
  std::optional<double> relative_error;
  bool breached = false;
};

struct DiscernibilitySummary {
  std::vector<DiscernibilityRow> rows;
  std::vector<AttackReport> reports;
  std::vector<std::size_t> breached_nodes;
  bool assumption1_holds = true;
  bool dynamically_private_empirical = false;
  std::string label;
};

// Simulates the scenario, publishes the public log, runs the configured
// attacks (integral attacks for every nested pair) and tabulates the
// outcomes against the true initial state.
DiscernibilitySummary discernibility_report(const Scenario& scenario);

// Runs the configured attacks against an existing public log, each under
// its own structural hypothesis; integral attacks run for every nested pair.
std::vector<AttackReport> run_attack_suite(const ObservationLog& log, const WeightedDigraph& graph,
                                           const AttackSuite& suite);

}  // namespace dynpriv
