#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ais/boost.hpp"
#include "ais/metrics.hpp"
#include "ais/partition.hpp"
#include "ais/rng.hpp"
#include "ais/targets.hpp"

namespace ais {

/// (sum y)^2 / sum y^2 of an arm's localized weights; n when every weight
/// is zero. Requires n >= 1.
double ess(const ArmState& state);

/// Split a leaf once it holds n_min samples and its ESS drops below
/// ess_ratio * N.
struct SplitPolicy {
  std::uint64_t n_min = 10;
  double ess_ratio = 0.5;

  void validate() const;
  bool should_split(const ArmState& state) const;

  bool operator==(const SplitPolicy&) const = default;
};

/// How a child's tau follows from its parent's on a split.
enum class TauRule { halve, constant };

std::string_view to_string(TauRule rule);
TauRule tau_rule_from_string(std::string_view name);

struct TreeNode {
  std::size_t id = 0;
  Rectangle cell;
  std::optional<std::size_t> parent, left, right;
  std::size_t depth = 0;
  std::size_t split_dim = 0;  ///< meaningful for internal nodes
  /// Proposal mass of the subtree. In exact mode these are probabilities;
  /// in lazy mode they are unnormalized numerators and q = mass / root mass.
  double mass = 0.0;

  // Leaf-only data.
  ArmState state;
  std::vector<WeightedSample> samples;
  double tau = 0.0;
  /// Numerator parts handed down at a split, used while n = 0:
  /// (parent z_hat + boost(parent tau, t, parent n)) / 2.
  double inherited_z_hat = 0.0;
  double inherited_tau = 0.0;
  std::uint64_t inherited_n = 0;

  bool is_leaf() const noexcept { return !left; }
};

/// Binary tree of axis-aligned cells. Node 0 is the root; ids are stable.
class ProposalTree {
 public:
  ProposalTree(Rectangle root, double root_tau);

  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  TreeNode& node(std::size_t id) { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaf_count_; }
  /// Leaf ids in left-to-right (in-order) order.
  const std::vector<std::size_t>& leaves() const noexcept { return leaf_order_; }
  std::size_t depth() const;

  /// Normalized mass q of a node.
  double q(std::size_t id) const;
  /// Probability of descending left from an internal node.
  double left_probability(std::size_t id) const;

  struct Traversal {
    std::size_t leaf = 0;
    std::vector<std::size_t> path;  ///< root ... leaf
  };
  /// Walks from the root choosing each child with probability proportional to
  /// its mass; one uniform variate per level.
  Traversal traverse_sample(Rng& rng) const;

  /// Splits leaf `id` along depth mod dim into equal halves, routes the
  /// archived samples by cell membership with weights f_val / g_child and
  /// rebuilds the child states. Child masses are left at zero. Returns the
  /// child ids.
  std::pair<std::size_t, std::size_t> split_leaf(std::size_t id, TauRule rule);

  /// Sets leaf masses (missing leaves keep their mass) and re-aggregates.
  void set_leaf_masses(const std::map<std::size_t, double>& masses);
  /// Recomputes every internal mass as the sum of its children.
  void aggregate();
  /// Recomputes internal masses on the path from `id` to the root.
  void aggregate_path(std::size_t id);

  /// Throws PreconditionError if the structure or mass aggregation is broken:
  /// children must be the exact halves of their parent, internal masses the
  /// sum of their children within `mass_tol` (relative to the root), and
  /// leaf counts must match their archives.
  void check_invariants(double mass_tol = 1e-12) const;
  /// Throws PreconditionError unless every archived sample of the leaf lies
  /// in its cell and carries y = f_val * volume(cell) within 1e-12.
  void check_leaf_samples(std::size_t id) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> leaf_order_{0};
  std::size_t leaf_count_ = 1;
};

struct HiDaiseeOptions {
  BoostSpec boost;
  SplitPolicy split;
  /// Root tau. Absent selects the auto rule (M/2) * volume, which also forces
  /// the halve rule on splits.
  std::optional<double> root_tau;
  TauRule tau_rule = TauRule::halve;
  /// Refresh only the sampled path (stale boosts elsewhere) instead of every
  /// leaf on every iteration.
  bool lazy_masses = false;
};

/// Snapshot of the leaf partition, safe to hand to other threads.
struct TreeSnapshot {
  struct Leaf {
    std::vector<double> lo, hi;
    double q = 0.0;
    std::uint64_t n = 0;
    double ess = 0.0;
  };
  std::uint64_t t = 0;
  std::vector<Leaf> leaves;
};

nlohmann::json to_json(const TreeSnapshot& snapshot);

/// Iterations at which snapshots are taken: 1, 2, 5, 10, 20, 50, ...
bool is_snapshot_time(std::uint64_t t);

/// Tree-structured adaptive sampler: single-owner, not thread-safe.
class HiDaisee {
 public:
  HiDaisee(const TargetDensity& target, HiDaiseeOptions options, std::uint64_t seed);

  struct Step {
    WeightedSample sample;      ///< arm holds the leaf id at draw time
    double q_leaf = 0.0;        ///< leaf mass that produced the draw
    double proposal_density = 0.0;
    std::size_t nodes_touched = 0;
    std::optional<std::pair<std::size_t, std::size_t>> split;
  };
  Step step();

  std::uint64_t t() const noexcept { return t_; }
  const ProposalTree& tree() const noexcept { return tree_; }
  const HiDaiseeOptions& options() const noexcept { return options_; }
  const TargetDensity& target() const noexcept { return *target_; }

  /// Unnormalized proposal numerator (z_hat + boost) of a leaf at the current t.
  double leaf_numerator(std::size_t id) const;
  /// Leaf ids in order with their normalized masses.
  std::vector<std::pair<std::size_t, double>> leaf_proposal() const;
  TreeSnapshot snapshot() const;

 private:
  double leaf_numerator(std::size_t id, double log_t) const;
  void refresh_all();
  void refresh_path(std::size_t leaf);

  const TargetDensity* target_;
  HiDaiseeOptions options_;
  ProposalTree tree_;
  Rng rng_;
  std::uint64_t t_ = 0;
  std::vector<double> numerators_;
};

/// Caches per-cell oracle quantities (mass and within-cell KL term) so the
/// full KL of a leaf partition can be tracked every iteration.
class LeafOracle {
 public:
  explicit LeafOracle(const TargetDensity& target, double tol = 0.0);

  struct CellTerms {
    double pi = 0.0;      ///< pi(cell)
    double within = 0.0;  ///< integral over the cell of pi log(pi / g)
  };

  double z() const noexcept { return z_; }
  /// Computed once per distinct cell; references stay valid.
  const CellTerms& terms(const Rectangle& cell);
  /// Full KL(pi || q) for the tree's current leaves and masses.
  double full_kl(const ProposalTree& tree);

 private:

  const TargetDensity* target_;
  double tol_;
  double z_;
  std::map<std::pair<std::vector<double>, std::vector<double>>, CellTerms> cache_;
};

struct HiDaiseeRun {
  std::vector<RunRecord> trace;
  std::vector<TreeSnapshot> snapshots;
};

/// Runs `iterations` steps. With an oracle each record carries the full KL of
/// the proposal that produced it. Snapshots follow is_snapshot_time plus the
/// final iteration.
HiDaiseeRun run_hidaisee(HiDaisee& engine, std::uint64_t iterations, LeafOracle* oracle = nullptr);

}  // namespace ais
