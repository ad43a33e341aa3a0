#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/ibm.hpp"
#include "popdyn/population.hpp"
#include "popdyn/random.hpp"

namespace popdyn {

using LabelId = std::uint32_t;
inline constexpr LabelId kNoLabel = static_cast<LabelId>(-1);

/// Ulam-Harris labels kept as a forest: roots are 1, 2, ...; the j-th child of a is a.j.
class LabelTable {
 public:
  LabelId add_root(double birth_time);
  LabelId add_child(LabelId parent, double birth_time);

  LabelId parent(LabelId id) const { return nodes_[id].parent; }
  double birth_time(LabelId id) const { return nodes_[id].birth_time; }
  std::size_t size() const { return nodes_.size(); }
  std::vector<std::uint32_t> sequence(LabelId id) const;
  /// Dotted form, e.g. "3.1.2".
  std::string to_string(LabelId id) const;

 private:
  struct Node {
    LabelId parent = kNoLabel;
    std::uint32_t index = 0;
    std::uint32_t children = 0;
    double birth_time = 0.0;
  };
  std::vector<Node> nodes_;
  std::uint32_t roots_ = 0;
};

struct LevelledIndividual {
  Point position;
  double level = 0.0;
  LabelId label = kNoLabel;
  double birth_time = 0.0;
};

enum class LogEvent { birth, death };

/// One row of the append-only event log. For births `swap` means the parent's label moved to
/// the offspring's location and the new label took the parent's location with the new level.
struct EventRecord {
  double t = 0.0;
  LogEvent event = LogEvent::birth;
  LabelId parent = kNoLabel;
  LabelId child = kNoLabel;
  bool swap = false;
  Point x_parent;
  Point x_child;
  double new_level = 0.0;
};

struct LevelledPopulation {
  std::vector<LevelledIndividual> individuals;
  double N = 1.0;
  double theta = 1.0;
  double time = 0.0;
  Box domain = Box::interval(0.0, 1.0);
  LabelTable labels;
  std::vector<EventRecord> log;
  /// Earliest time covered by the log.
  double log_start = 0.0;

  const LevelledIndividual* find(LabelId label) const;
};

/// Attach i.i.d. Uniform[0, N] levels and root labels to a point population.
LevelledPopulation make_levelled(const PointPopulation& pop, double theta, Rng& rng);

/// Spatial projection: drop levels, mass 1/N per individual.
PointPopulation project(const LevelledPopulation& pop);

struct LevelCoefficients {
  double b = 0.0;  // b_theta: local net growth
  double c = 0.0;  // c_theta: rate of production of successful offspring
  double expected_r = 0.0;
};

/// Expectation of g(Y), Y ~ q_theta(x, .), by the 3-point-per-axis Gauss-Hermite rule.
double expect_dispersal(const DispersalLaw& law, const Point& x, const std::function<double(const Point&)>& g);

LevelCoefficients level_coefficients(const DemographyModel& model, const DensityField& field, const Point& x,
                                     double N);
LevelCoefficients level_coefficients(const DemographyModel& model, const Point& x, const PointPopulation& pop);

struct LevelUpdate {
  double level = 0.0;
  /// Level blew up within dt (it crossed every finite bound).
  bool exploded = false;
};

/// Exact solution of du/dt = c u^2 - b u over dt with frozen coefficients.
LevelUpdate evolve_level(double u0, double b, double c, double dt);

/// One step: births at rate 2 theta (1 - u/N) gamma with uniform new level on [u, N] and a fair swap,
/// then every level follows the level ODE; individuals whose level passes N die.
void lookdown_step(LevelledPopulation& pop, const DemographyModel& model, double dt, Rng& rng);

struct LineagePath {
  /// Backward times s_k (s_0 = 0) at which the position changes; x[k] holds on [s_k, s_{k+1}).
  std::vector<double> s;
  std::vector<Point> x;

  /// Position at backward time s.
  const Point& at(double s_query) const;
};

/// Per-label index over an event log for fast backward tracing.
class LineageIndex {
 public:
  explicit LineageIndex(const LevelledPopulation& pop);

  /// Ancestral path of `label` (alive at pop.time at `position`) back to time `back_to`.
  LineagePath trace(LabelId label, const Point& position, double back_to) const;

 private:
  const LevelledPopulation* pop_;
  std::vector<std::int64_t> birth_record_;           // label -> index of the record that created it
  std::vector<std::vector<std::uint32_t>> swaps_;   // label -> swap records where it was the parent
};

LineagePath trace_lineage(const LevelledPopulation& pop, LabelId label, double back_to);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sided one-sample KS test against Uniform[0, upper].
KsResult ks_uniform(std::vector<double> sample, double upper);
/// KS test of the current levels against Uniform[0, N]; needs at least 20 individuals.
KsResult levels_uniformity_stat(const LevelledPopulation& pop);

struct LookdownRun {
  std::vector<PointPopulation> snapshots;
  std::vector<KsResult> level_ks;  // one per snapshot with >= 20 individuals, else p = NaN
  LevelledPopulation final_state;
};

LookdownRun run_lookdown(const DemographyModel& model, const PointPopulation& initial, double horizon,
                         double snapshot_every, double dt, Rng& rng);

}  // namespace popdyn
