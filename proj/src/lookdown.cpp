#include "lfv/lookdown.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "lfv/coalescent.hpp"
#include "lfv/errors.hpp"
#include "lfv/rng.hpp"

namespace lfv {

int level_before(const BirthEvent& event, int level) {
  const auto& J = event.levels;
  const int lowest = J.front();
  if (level <= lowest) return level;
  int below_or_at = 0;
  for (int member : J) {
    if (member == level) return lowest;
    if (member < level) ++below_or_at;
  }
  return level - (below_or_at - 1);
}

std::size_t LookdownTrajectory::observation_index(double t) const {
  auto it = std::lower_bound(obs_times_.begin(), obs_times_.end(), t - 1e-12);
  if (it == obs_times_.end() || std::abs(*it - t) > 1e-12) {
    std::ostringstream os;
    os << "time " << t << " is not an observation time of this trajectory";
    throw OutOfRange(os.str());
  }
  return static_cast<std::size_t>(it - obs_times_.begin());
}

std::span<const double> LookdownTrajectory::positions(std::size_t k) const {
  return positions_.at(k);
}

std::span<const double> LookdownTrajectory::position(std::size_t k, int level) const {
  if (level < 1 || level > n_) throw OutOfRange("level out of range");
  return positions(k).subspan(static_cast<std::size_t>(level - 1) * d_,
                              static_cast<std::size_t>(d_));
}

std::span<const int> LookdownTrajectory::ancestor_map(std::size_t k) const {
  if (k == 0 || k >= ancestor_maps_.size()) {
    throw OutOfRange("ancestor maps exist for observations 1..K-1");
  }
  return ancestor_maps_[k];
}

namespace {

// Particle pool: levels hold particle ids; a particle carries its position at
// `last_time` and the level of its ancestor at the previous observation.
class ParticlePool {
 public:
  explicit ParticlePool(int d) : d_(d) {}

  int create(std::span<const double> pos, double time, int label) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<int>(last_time_.size());
      last_time_.push_back(0.0);
      label_.push_back(0);
      pos_.resize(pos_.size() + static_cast<std::size_t>(d_));
    }
    std::copy(pos.begin(), pos.end(), pos_.begin() + static_cast<std::ptrdiff_t>(id) * d_);
    last_time_[id] = time;
    label_[id] = label;
    return id;
  }

  void release(int id) { free_.push_back(id); }

  template <class Normal>
  void advance(int id, double t, Stream& rng, Normal& normal) {
    const double dt = t - last_time_[id];
    if (dt > 0.0) {
      const double sd = std::sqrt(dt);
      double* p = &pos_[static_cast<std::size_t>(id) * d_];
      for (int c = 0; c < d_; ++c) p[c] += sd * normal(rng);
      last_time_[id] = t;
    }
  }

  std::span<const double> pos(int id) const {
    return {pos_.data() + static_cast<std::size_t>(id) * d_, static_cast<std::size_t>(d_)};
  }
  int label(int id) const { return label_[id]; }
  void set_label(int id, int label) { label_[id] = label; }

 private:
  int d_;
  std::vector<double> pos_;
  std::vector<double> last_time_;
  std::vector<int> label_;
  std::vector<int> free_;
};

}  // namespace

LookdownTrajectory simulate_lookdown(const LambdaMeasure& measure,
                                     const LookdownConfig& config, std::uint64_t seed,
                                     std::uint64_t replicate) {
  const int n = config.n;
  const int d = config.d;
  const double T = config.horizon;
  if (n < 1) throw DomainError("lookdown needs n >= 1");
  if (d < 1) throw DomainError("lookdown needs d >= 1");
  if (!(T > 0.0)) throw DomainError("lookdown needs a positive horizon");
  if (!config.init.is_origin() &&
      config.init.points.size() != static_cast<std::size_t>(n) * d) {
    throw DomainError("initial positions must hold n*d coordinates");
  }

  // Event rates among the first n levels: k-subset size distribution.
  std::vector<double> cumulative;  // over k = 2..n
  double total = 0.0;
  double single_share = 0.0;       // P(single birth | k = 2)
  if (n >= 2) {
    const std::vector<double> row = rate_row(measure, n);
    cumulative.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 2; k <= n; ++k) {
      total += weighted_binomial(n, k, row[k]);
      cumulative[k] = total;
    }
    if (total > 0.0) {
      for (double& c : cumulative) c /= total;
      cumulative[n] = 1.0;
    }
    single_share = row[2] > 0.0 ? measure.atom0() / row[2] : 0.0;
  }
  if (total * T > config.max_expected_events) {
    std::ostringstream os;
    os << "expected " << total * T << " events exceeds the budget of "
       << config.max_expected_events;
    throw RateOverflow(os.str());
  }

  LookdownTrajectory traj;
  traj.n_ = n;
  traj.d_ = d;
  traj.horizon_ = T;
  traj.started_at_origin_ = config.init.is_origin();
  traj.has_event_log_ = config.record_events;

  std::vector<double> obs = config.observation_times;
  obs.push_back(0.0);
  obs.push_back(T);
  for (double t : obs) {
    if (!(t >= 0.0 && t <= T)) throw OutOfRange("observation time outside [0, T]");
  }
  std::sort(obs.begin(), obs.end());
  obs.erase(std::unique(obs.begin(), obs.end()), obs.end());
  traj.obs_times_ = obs;
  traj.positions_.reserve(obs.size());
  traj.ancestor_maps_.reserve(obs.size());

  Stream clock = stream_for(seed, replicate, StreamRole::CoalescentClock);
  Stream choice = stream_for(seed, replicate, StreamRole::SubsetChoice);
  Stream motion = stream_for(seed, replicate, StreamRole::BrownianIncrement);
  std::normal_distribution<double> normal(0.0, 1.0);

  ParticlePool pool(d);
  std::vector<int> levels(static_cast<std::size_t>(n));
  {
    std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
    for (int l = 0; l < n; ++l) {
      std::span<const double> p =
          config.init.is_origin()
              ? std::span<const double>(origin)
              : std::span<const double>(config.init.points.data() +
                                            static_cast<std::size_t>(l) * d,
                                        static_cast<std::size_t>(d));
      levels[l] = pool.create(p, 0.0, l);
    }
  }

  auto record_observation = [&](double t) {
    std::vector<double> snapshot(static_cast<std::size_t>(n) * d);
    std::vector<int> map(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
      const int id = levels[l];
      pool.advance(id, t, motion, normal);
      const auto p = pool.pos(id);
      std::copy(p.begin(), p.end(), snapshot.begin() + static_cast<std::ptrdiff_t>(l) * d);
      map[l] = pool.label(id) + 1;
      pool.set_label(id, l);
    }
    traj.positions_.push_back(std::move(snapshot));
    if (traj.ancestor_maps_.empty()) map.clear();
    traj.ancestor_maps_.push_back(std::move(map));
  };

  std::vector<int> subset;
  std::vector<char> marked(static_cast<std::size_t>(n), 0);
  std::vector<int> before;
  std::size_t next_obs = 0;
  double t = 0.0;
  for (;;) {
    const double t_event =
        total > 0.0 ? t + exponential(clock, total) : std::numeric_limits<double>::infinity();
    while (next_obs < obs.size() && obs[next_obs] < t_event) {
      record_observation(obs[next_obs]);
      ++next_obs;
    }
    if (t_event > T) break;
    t = t_event;

    // Choose the subset size, then a uniform subset of levels (0-based).
    const double u = choice.uniform_open();
    int k = static_cast<int>(
        std::lower_bound(cumulative.begin() + 2, cumulative.end(), u) - cumulative.begin());
    k = std::min(k, n);
    while (k > 2 && cumulative[k] == cumulative[k - 1]) --k;
    BirthKind kind = BirthKind::Multi;
    if (k == 2 && single_share > 0.0 &&
        (single_share >= 1.0 || choice.uniform_open() < single_share)) {
      kind = BirthKind::Single;
    }
    subset.clear();
    for (int j = n - k; j < n; ++j) {
      int r = static_cast<int>(uniform_index(choice, static_cast<std::uint64_t>(j) + 1));
      if (marked[r]) r = j;
      marked[r] = 1;
      subset.push_back(r);
    }
    for (int r : subset) marked[r] = 0;
    std::sort(subset.begin(), subset.end());

    const int lowest = subset.front();
    const int parent = levels[lowest];
    pool.advance(parent, t, motion, normal);
    if (config.verify_shifts) before = levels;

    // Levels pushed above n are lost.
    for (int l = n - k + 1; l < n; ++l) pool.release(levels[l]);
    // Between subset members i and i+1 the old particles move up by i levels.
    // Working from the top keeps every source below what has been written.
    for (int i = k - 1; i >= 1; --i) {
      const int lo = subset[i] + 1;
      const int hi = i + 1 < k ? subset[i + 1] : n;
      if (hi > lo) {
        std::memmove(&levels[lo], &levels[lo - i],
                     static_cast<std::size_t>(hi - lo) * sizeof(int));
      }
    }
    const auto parent_pos = pool.pos(parent);
    const std::vector<double> parent_copy(parent_pos.begin(), parent_pos.end());
    for (int i = 1; i < k; ++i) {
      levels[subset[i]] = pool.create(parent_copy, t, pool.label(parent));
    }

    if (config.verify_shifts) {
      for (int l = 0; l < n; ++l) {
        const bool in_subset = std::binary_search(subset.begin(), subset.end(), l);
        bool ok;
        if (l <= lowest) {
          ok = levels[l] == before[l];
        } else if (in_subset) {
          const auto p = pool.pos(levels[l]);
          ok = std::equal(p.begin(), p.end(), parent_copy.begin());
        } else {
          const int below = static_cast<int>(
              std::lower_bound(subset.begin(), subset.end(), l) - subset.begin());
          ok = levels[l] == before[l - (below - 1)];
        }
        if (!ok) {
          throw InvariantViolation("level shift rule violated at level " +
                                   std::to_string(l + 1));
        }
      }
    }

    ++traj.event_count_;
    if (config.record_events) {
      BirthEvent e;
      e.time = t;
      e.kind = kind;
      e.levels.reserve(subset.size());
      for (int l : subset) e.levels.push_back(l + 1);
      e.parent_level = lowest + 1;
      e.parent_position = parent_copy;
      traj.events_.push_back(std::move(e));
    }
  }
  while (next_obs < obs.size()) {
    record_observation(obs[next_obs]);
    ++next_obs;
  }
  return traj;
}

int Lineage::level_at(double t) const {
  int l = level;
  for (const auto& [u, value] : breakpoints) {
    if (u < t) break;
    l = value;
  }
  return l;
}

Lineage genealogy(const LookdownTrajectory& traj, int level, double s) {
  if (level < 1 || level > traj.n()) throw OutOfRange("level out of range");
  if (!(s >= 0.0 && s <= traj.horizon())) throw OutOfRange("time outside [0, T]");
  if (!traj.has_event_log()) throw OutOfRange("trajectory was simulated without an event log");
  Lineage lineage;
  lineage.level = level;
  lineage.observed_at = s;
  const auto& events = traj.events();
  auto end = std::upper_bound(events.begin(), events.end(), s,
                              [](double value, const BirthEvent& e) { return value < e.time; });
  int current = level;
  for (auto it = std::make_reverse_iterator(end); it != events.rend(); ++it) {
    const int prev = level_before(*it, current);
    if (prev != current) {
      lineage.breakpoints.emplace_back(it->time, prev);
      current = prev;
    }
  }
  const auto& times = traj.observation_times();
  for (std::size_t k = 0; k < times.size() && times[k] <= s; ++k) {
    const auto p = traj.position(k, lineage.level_at(times[k]));
    lineage.times.push_back(times[k]);
    lineage.positions.emplace_back(p.begin(), p.end());
  }
  return lineage;
}

const OrderedPartition& RecoveredPartitionPath::at(double t) const {
  const OrderedPartition* p = &steps.front().second;
  for (const auto& [time, partition] : steps) {
    if (time > t) break;
    p = &partition;
  }
  return *p;
}

namespace {

OrderedPartition partition_from_ancestors(const std::vector<int>& ancestor) {
  const int n = static_cast<int>(ancestor.size());
  std::vector<std::vector<int>> by_level(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) by_level[ancestor[i]].push_back(i + 1);
  std::vector<OrderedPartition::Block> blocks;
  for (auto& b : by_level) {
    if (!b.empty()) blocks.push_back(std::move(b));
  }
  OrderedPartition partition(n, std::move(blocks));
  // Members of the l-th block (least-element order) descend from level l.
  for (int l = 0; l < partition.block_count(); ++l) {
    for (int member : partition.block(l)) {
      if (ancestor[member - 1] != l + 1) {
        throw InvariantViolation("recovered partition blocks do not match ancestor levels");
      }
    }
  }
  return partition;
}

}  // namespace

RecoveredPartitionPath recovered_coalescent(const LookdownTrajectory& traj) {
  if (!traj.has_event_log()) throw OutOfRange("trajectory was simulated without an event log");
  const int n = traj.n();
  const double T = traj.horizon();
  RecoveredPartitionPath path;
  path.horizon = T;
  std::vector<int> ancestor(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ancestor[i] = i + 1;
  path.steps.emplace_back(0.0, OrderedPartition::singletons(n));
  int distinct = n;
  const auto& events = traj.events();
  std::vector<char> seen(static_cast<std::size_t>(n) + 1);
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    for (int& a : ancestor) a = level_before(*it, a);
    std::fill(seen.begin(), seen.end(), 0);
    int count = 0;
    for (int a : ancestor) {
      if (!seen[a]) {
        seen[a] = 1;
        ++count;
      }
    }
    if (count < distinct) {
      distinct = count;
      path.steps.emplace_back(T - it->time, partition_from_ancestors(ancestor));
    }
  }
  return path;
}

std::vector<int> ancestor_levels(const LookdownTrajectory& traj, std::size_t from,
                                 std::size_t to) {
  if (from > to || to >= traj.observation_times().size()) {
    throw OutOfRange("observation indices must satisfy from <= to < K");
  }
  std::vector<int> anc(static_cast<std::size_t>(traj.n()));
  for (int j = 0; j < traj.n(); ++j) anc[j] = j + 1;
  for (std::size_t k = to; k > from; --k) {
    const auto map = traj.ancestor_map(k);
    for (int& a : anc) a = map[a - 1];
  }
  return anc;
}

int ancestor_count(const LookdownTrajectory& traj, std::size_t from, std::size_t to) {
  auto anc = ancestor_levels(traj, from, to);
  std::sort(anc.begin(), anc.end());
  return static_cast<int>(std::unique(anc.begin(), anc.end()) - anc.begin());
}

double dislocation(const LookdownTrajectory& traj, double r, double s) {
  if (!(r <= s)) throw OutOfRange("dislocation needs r <= s");
  const std::size_t kr = traj.observation_index(r);
  const std::size_t ks = traj.observation_index(s);
  if (kr == ks) return 0.0;
  const auto anc = ancestor_levels(traj, kr, ks);
  double worst = 0.0;
  for (int j = 1; j <= traj.n(); ++j) {
    const auto now = traj.position(ks, j);
    const auto then = traj.position(kr, anc[j - 1]);
    double sq = 0.0;
    for (int c = 0; c < traj.d(); ++c) {
      const double diff = now[c] - then[c];
      sq += diff * diff;
    }
    worst = std::max(worst, sq);
  }
  return std::sqrt(worst);
}

PointCloud empirical_support(const LookdownTrajectory& traj, double t,
                             std::uint64_t replicate) {
  const std::size_t k = traj.observation_index(t);
  PointCloud cloud;
  cloud.d = traj.d();
  const auto p = traj.positions(k);
  cloud.coords.assign(p.begin(), p.end());
  cloud.replicate = replicate;
  cloud.time = traj.observation_times()[k];
  return cloud;
}

}  // namespace lfv
