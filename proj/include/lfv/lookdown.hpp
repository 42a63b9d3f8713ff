#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfv/measures.hpp"
#include "lfv/partition.hpp"

namespace lfv {

enum class BirthKind {
  Single,  // pairwise lookdown driven by the atom at 0
  Multi,   // several levels driven by the rest of the measure
};

// One reproduction event. Levels are 1-based and sorted; the lowest involved
// level is the parent and every other involved level receives its position.
struct BirthEvent {
  double time = 0.0;
  BirthKind kind = BirthKind::Single;
  std::vector<int> levels;
  int parent_level = 0;
  std::vector<double> parent_position;  // X_parent(t-)
};

// Level of the ancestor just before `event` of the particle that is at
// `level` right after it.
int level_before(const BirthEvent& event, int level);

struct InitialCondition {
  // Empty means every particle starts at the origin; otherwise n*d
  // coordinates, level-major.
  std::vector<double> points;

  static InitialCondition at_origin() { return {}; }
  bool is_origin() const noexcept { return points.empty(); }
};

struct LookdownConfig {
  int n = 1;
  int d = 1;
  double horizon = 1.0;
  InitialCondition init;
  // Times at which all positions and ancestor maps are recorded. 0 and the
  // horizon are always added.
  std::vector<double> observation_times;
  bool record_events = true;
  // Re-derive every shifted level from the pre-event configuration and
  // compare (slow; meant for tests).
  bool verify_shifts = false;
  // Refuse runs whose expected event count lambda_n * T exceeds this.
  double max_expected_events = 5e7;
};

// Finished realization of the n-level lookdown particle system. Immutable.
class LookdownTrajectory {
 public:
  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  double horizon() const noexcept { return horizon_; }
  bool started_at_origin() const noexcept { return started_at_origin_; }
  bool has_event_log() const noexcept { return has_event_log_; }
  std::uint64_t event_count() const noexcept { return event_count_; }
  const std::vector<BirthEvent>& events() const noexcept { return events_; }

  const std::vector<double>& observation_times() const noexcept { return obs_times_; }
  // Index of an observation time; throws OutOfRange if t was not observed.
  std::size_t observation_index(double t) const;

  // Positions of all levels at observation k, level-major (n*d values).
  std::span<const double> positions(std::size_t k) const;
  std::span<const double> position(std::size_t k, int level) const;
  // For k >= 1: entry j-1 is the level at observation k-1 of the ancestor of
  // level j at observation k.
  std::span<const int> ancestor_map(std::size_t k) const;

 private:
  friend LookdownTrajectory simulate_lookdown(const LambdaMeasure&, const LookdownConfig&,
                                              std::uint64_t, std::uint64_t);
  int n_ = 0;
  int d_ = 0;
  double horizon_ = 0.0;
  bool started_at_origin_ = true;
  bool has_event_log_ = false;
  std::uint64_t event_count_ = 0;
  std::vector<BirthEvent> events_;
  std::vector<double> obs_times_;
  std::vector<std::vector<double>> positions_;
  std::vector<std::vector<int>> ancestor_maps_;
};

// Exact event-driven simulation on the first n levels. Each k-subset of
// levels reproduces at rate lambda[n][k] (single births for the atom at 0,
// multiple births otherwise); between events every level follows an
// independent standard Brownian motion in R^d. Throws RateOverflow.
LookdownTrajectory simulate_lookdown(const LambdaMeasure& measure,
                                     const LookdownConfig& config, std::uint64_t seed,
                                     std::uint64_t replicate = 0);

// Left-continuous, nondecreasing step function t -> L_i^s(t) on [0, s].
struct Lineage {
  int level = 0;
  double observed_at = 0.0;
  // (u, l): for t <= u, back to the next earlier breakpoint, the ancestor
  // sits at level l. Sorted by decreasing u.
  std::vector<std::pair<double, int>> breakpoints;
  // Ancestor positions X_{L(t)}(t-) at each observation time t <= s.
  std::vector<double> times;
  std::vector<std::vector<double>> positions;

  int level_at(double t) const;
};

// Replays the event log backwards from s. Throws OutOfRange.
Lineage genealogy(const LookdownTrajectory& traj, int level, double s);

// Partition path of {1..n} with i ~ j at time t iff the level-i and level-j
// particles at T share an ancestor at T - t.
struct RecoveredPartitionPath {
  double horizon = 0.0;
  // (t, partition from t on); the first entry is (0, singletons).
  std::vector<std::pair<double, OrderedPartition>> steps;

  const OrderedPartition& at(double t) const;
};

RecoveredPartitionPath recovered_coalescent(const LookdownTrajectory& traj);

// Level at observation `from` of the ancestor of each level at observation
// `to` (from <= to), by composing the recorded ancestor maps.
std::vector<int> ancestor_levels(const LookdownTrajectory& traj, std::size_t from,
                                 std::size_t to);

// Number of distinct ancestors at observation `from` of the particles at
// observation `to`.
int ancestor_count(const LookdownTrajectory& traj, std::size_t from, std::size_t to);

// Maximal distance between a particle at s and its ancestor at r (both
// observation times); zero when r == s.
double dislocation(const LookdownTrajectory& traj, double r, double s);

struct PointCloud {
  int d = 1;
  std::vector<double> coords;  // point-major
  std::uint64_t replicate = 0;
  double time = 0.0;

  std::size_t size() const noexcept {
    return d > 0 ? coords.size() / static_cast<std::size_t>(d) : 0;
  }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
};

// Level positions at an observation time; the finite-n proxy of the support.
PointCloud empirical_support(const LookdownTrajectory& traj, double t,
                             std::uint64_t replicate = 0);

}  // namespace lfv
