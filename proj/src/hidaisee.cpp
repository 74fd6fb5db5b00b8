#include "ais/hidaisee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ais/errors.hpp"
#include "ais/oracle.hpp"

namespace ais {

double ess(const ArmState& state) {
  if (state.n() == 0) throw PreconditionError("ess: no samples");
  const double s2 = state.sum_y2();
  if (!(s2 > 0.0)) return static_cast<double>(state.n());
  const double s = state.sum_y();
  return s * s / s2;
}

void SplitPolicy::validate() const {
  if (n_min == 0) throw ConfigError("split policy: n_min must be positive");
  if (!(ess_ratio > 0.0 && ess_ratio < 1.0)) throw ConfigError("split policy: ess_ratio must lie in (0, 1)");
}

bool SplitPolicy::should_split(const ArmState& state) const {
  return state.n() >= n_min && ess(state) < ess_ratio * static_cast<double>(state.n());
}

std::string_view to_string(TauRule rule) { return rule == TauRule::halve ? "halve" : "constant"; }

TauRule tau_rule_from_string(std::string_view name) {
  if (name == "halve") return TauRule::halve;
  if (name == "constant") return TauRule::constant;
  throw ConfigError("unknown tau rule '" + std::string(name) + "' (expected halve or constant)");
}

ProposalTree::ProposalTree(Rectangle root, double root_tau) {
  if (!(root_tau > 0.0)) throw ConfigError("tree: root tau must be positive");
  TreeNode n;
  n.cell = std::move(root);
  n.mass = 1.0;
  n.tau = root_tau;
  nodes_.push_back(std::move(n));
}

std::size_t ProposalTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

double ProposalTree::q(std::size_t id) const {
  if (leaf_count_ == 1) return 1.0;
  return nodes_.at(id).mass / nodes_[0].mass;
}

double ProposalTree::left_probability(std::size_t id) const {
  const auto& n = nodes_.at(id);
  if (n.is_leaf()) throw PreconditionError("tree: node " + std::to_string(id) + " is a leaf");
  const double l = nodes_[*n.left].mass;
  const double total = l + nodes_[*n.right].mass;
  if (!(total > 0.0)) {
    throw PreconditionError("tree: both children of node " + std::to_string(id) + " have zero mass");
  }
  return l / total;
}

ProposalTree::Traversal ProposalTree::traverse_sample(Rng& rng) const {
  Traversal out;
  std::size_t id = 0;
  out.path.push_back(id);
  while (!nodes_[id].is_leaf()) {
    const double p_left = left_probability(id);
    id = rng.uniform() < p_left ? *nodes_[id].left : *nodes_[id].right;
    out.path.push_back(id);
  }
  out.leaf = id;
  return out;
}

std::pair<std::size_t, std::size_t> ProposalTree::split_leaf(std::size_t id, TauRule rule) {
  if (!nodes_.at(id).is_leaf()) throw PreconditionError("tree: node " + std::to_string(id) + " is not a leaf");
  const std::size_t dim = nodes_[id].cell.dim();
  const std::size_t d = nodes_[id].depth % dim;
  auto [left_cell, right_cell] = nodes_[id].cell.halve(d);
  const double child_tau = rule == TauRule::halve ? 0.5 * nodes_[id].tau : nodes_[id].tau;

  std::size_t child_ids[2];
  Rectangle cells[2] = {std::move(left_cell), std::move(right_cell)};
  for (int c = 0; c < 2; ++c) {
    TreeNode child;
    child.id = nodes_.size();
    child.cell = std::move(cells[c]);
    child.parent = id;
    child.depth = nodes_[id].depth + 1;
    child.tau = child_tau;
    if (nodes_[id].state.n() > 0) child.inherited_z_hat = nodes_[id].state.z_hat();
    child.inherited_tau = nodes_[id].tau;
    child.inherited_n = nodes_[id].state.n();
    child_ids[c] = child.id;
    nodes_.push_back(std::move(child));
  }

  TreeNode& parent = nodes_[id];
  const double mid = parent.cell.midpoint(d);
  for (auto& s : parent.samples) {
    TreeNode& child = nodes_[s.x[d] < mid ? child_ids[0] : child_ids[1]];
    s.y = s.f_val * child.cell.volume();
    s.arm = child.id;
    child.state = record_pull(child.state, s.y, child.id, s.t);
    child.samples.push_back(std::move(s));
  }
  parent.samples.clear();
  parent.samples.shrink_to_fit();
  parent.state = ArmState{};
  parent.split_dim = d;
  parent.left = child_ids[0];
  parent.right = child_ids[1];
  const auto pos = std::find(leaf_order_.begin(), leaf_order_.end(), id);
  *pos = child_ids[1];
  leaf_order_.insert(pos, child_ids[0]);
  ++leaf_count_;
  return {child_ids[0], child_ids[1]};
}

void ProposalTree::set_leaf_masses(const std::map<std::size_t, double>& masses) {
  for (const auto& [id, m] : masses) {
    if (!nodes_.at(id).is_leaf()) throw PreconditionError("tree: node " + std::to_string(id) + " is not a leaf");
    if (!(m >= 0.0) || !std::isfinite(m)) throw PreconditionError("tree: leaf mass must be finite and nonnegative");
    nodes_[id].mass = m;
  }
  aggregate();
}

void ProposalTree::aggregate() {
  // Children always have larger ids than their parent.
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.is_leaf()) n.mass = nodes_[*n.left].mass + nodes_[*n.right].mass;
  }
}

void ProposalTree::aggregate_path(std::size_t id) {
  auto parent = nodes_.at(id).parent;
  while (parent) {
    auto& n = nodes_[*parent];
    n.mass = nodes_[*n.left].mass + nodes_[*n.right].mass;
    parent = n.parent;
  }
}

void ProposalTree::check_invariants(double mass_tol) const {
  auto fail = [](std::size_t id, const std::string& what) {
    throw PreconditionError("tree invariant violated at node " + std::to_string(id) + ": " + what);
  };
  const double root_mass = nodes_[0].mass;
  std::size_t leaves = 0;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) {
      ++leaves;
      if (n.state.n() != n.samples.size()) fail(n.id, "pull count differs from archive size");
      continue;
    }
    if (!n.right) fail(n.id, "internal node with one child");
    const auto& l = nodes_[*n.left];
    const auto& r = nodes_[*n.right];
    if (l.parent != n.id || r.parent != n.id) fail(n.id, "child parent link");
    const auto halves = n.cell.halve(n.split_dim);
    if (!(l.cell == halves.first) || !(r.cell == halves.second)) fail(n.id, "children are not its halves");
    if (!n.samples.empty() || n.state.n() != 0) fail(n.id, "internal node keeps leaf data");
    if (std::abs(n.mass - (l.mass + r.mass)) > mass_tol * root_mass) fail(n.id, "mass is not the sum of its children");
  }
  if (leaves != leaf_count_) fail(0, "leaf count");
  std::vector<std::size_t> walk, stack{0};
  while (!stack.empty()) {
    const auto& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.is_leaf()) {
      walk.push_back(n.id);
    } else {
      stack.push_back(*n.right);
      stack.push_back(*n.left);
    }
  }
  if (walk != leaf_order_) fail(0, "cached leaf order differs from the tree");
}

void ProposalTree::check_leaf_samples(std::size_t id) const {
  const auto& n = nodes_.at(id);
  const auto& root = nodes_[0].cell;
  const double volume = n.cell.volume();
  for (const auto& s : n.samples) {
    bool inside = n.cell.contains_closed(s.x);
    for (std::size_t d = 0; inside && d < s.x.size(); ++d) {
      if (s.x[d] >= n.cell.hi(d) && n.cell.hi(d) != root.hi(d)) inside = false;
    }
    if (!inside) throw PreconditionError("tree: sample outside leaf " + std::to_string(id));
    const double expected = s.f_val * volume;
    if (std::abs(s.y - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
      throw PreconditionError("tree: stale localized weight in leaf " + std::to_string(id));
    }
    if (s.arm != id) throw PreconditionError("tree: sample owner mismatch in leaf " + std::to_string(id));
  }
}

nlohmann::json to_json(const TreeSnapshot& snapshot) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& l : snapshot.leaves) {
    leaves.push_back({{"lo", l.lo}, {"hi", l.hi}, {"q", l.q}, {"n", l.n}, {"ess", l.ess}});
  }
  return {{"t", snapshot.t}, {"leaves", std::move(leaves)}};
}

bool is_snapshot_time(std::uint64_t t) {
  if (t == 0) return false;
  while (t % 10 == 0) t /= 10;
  return t == 1 || t == 2 || t == 5;
}

namespace {

double resolve_root_tau(const TargetDensity& target, const HiDaiseeOptions& options) {
  if (options.root_tau) {
    if (!(*options.root_tau > 0.0)) throw ConfigError("hidaisee: tau must be positive");
    return *options.root_tau;
  }
  const auto m = target.sup_bound();
  if (!m) throw ConfigError("hidaisee: auto tau needs a target with a known sup_bound");
  return 0.5 * *m * target.domain().volume();
}

}  // namespace

HiDaisee::HiDaisee(const TargetDensity& target, HiDaiseeOptions options, std::uint64_t seed)
    : target_(&target),
      options_(options),
      tree_(target.domain(), resolve_root_tau(target, options)),
      rng_(seed) {
  validate(options_.boost);
  options_.split.validate();
  if (!options_.root_tau) options_.tau_rule = TauRule::halve;
}

double HiDaisee::leaf_numerator(std::size_t id) const {
  if (t_ == 0) throw PreconditionError("boost: iteration counter must be >= 1");
  return leaf_numerator(id, std::log(static_cast<double>(t_)));
}

double HiDaisee::leaf_numerator(std::size_t id, double log_t) const {
  const auto& n = tree_.node(id);
  if (n.state.n() > 0) return n.state.z_hat() + boost_from_log(options_.boost, n.tau, log_t, n.state.n());
  if (n.inherited_n > 0) {
    return 0.5 * (n.inherited_z_hat + boost_from_log(options_.boost, n.inherited_tau, log_t, n.inherited_n));
  }
  return 1.0;
}

void HiDaisee::refresh_all() {
  if (tree_.leaf_count() == 1) {
    tree_.node(0).mass = 1.0;
    return;
  }
  const auto& ids = tree_.leaves();
  const double log_t = std::log(static_cast<double>(t_));
  numerators_.resize(ids.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    numerators_[i] = leaf_numerator(ids[i], log_t);
    total += numerators_[i];
  }
  if (!(total > 0.0)) {
    throw DegenerateProposalError(
        "proposal: every numerator is zero (all estimates vanish and no boost); use a nonzero boost");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) tree_.node(ids[i]).mass = numerators_[i] / total;
  tree_.aggregate();
}

void HiDaisee::refresh_path(std::size_t leaf) {
  if (tree_.leaf_count() == 1) {
    tree_.node(0).mass = 1.0;
    return;
  }
  tree_.node(leaf).mass = leaf_numerator(leaf);
  tree_.aggregate_path(leaf);
  if (!(tree_.node(0).mass > 0.0)) {
    throw DegenerateProposalError("hidaisee: every leaf numerator is zero; use a nonzero boost");
  }
}

HiDaisee::Step HiDaisee::step() {
  const auto walk = tree_.traverse_sample(rng_);
  const std::size_t id = walk.leaf;
  Step out;
  out.nodes_touched = walk.path.size();
  out.q_leaf = tree_.q(id);

  auto& leaf = tree_.node(id);
  const double volume = leaf.cell.volume();
  WeightedSample s;
  s.x = leaf.cell.sample_uniform(rng_);
  s.f_val = (*target_)(s.x);
  if (!std::isfinite(s.f_val) || s.f_val < 0.0) {
    std::ostringstream msg;
    msg << "target '" << target_->family() << "' returned " << s.f_val << " at x = (";
    for (std::size_t d = 0; d < s.x.size(); ++d) msg << (d ? ", " : "") << s.x[d];
    msg << ")";
    throw SamplingError(msg.str());
  }
  if (const auto sup = target_->sup_bound(); sup && s.f_val > *sup * (1.0 + 1e-12)) {
    throw SamplingError("target '" + target_->family() + "' exceeded its declared sup_bound");
  }
  s.y = s.f_val * volume;
  s.arm = id;
  s.t = ++t_;
  out.proposal_density = out.q_leaf / volume;
  leaf.state = record_pull(leaf.state, s.y, id, t_);
  leaf.samples.push_back(s);
  out.sample = std::move(s);

  const bool split = options_.split.should_split(tree_.node(id).state);
  if (split) out.split = tree_.split_leaf(id, options_.tau_rule);

  if (options_.lazy_masses) {
    if (split) {
      refresh_path(out.split->first);
      refresh_path(out.split->second);
    } else {
      refresh_path(id);
    }
  } else {
    refresh_all();
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> HiDaisee::leaf_proposal() const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t id : tree_.leaves()) out.emplace_back(id, tree_.q(id));
  return out;
}

TreeSnapshot HiDaisee::snapshot() const {
  TreeSnapshot snap;
  snap.t = t_;
  for (std::size_t id : tree_.leaves()) {
    const auto& n = tree_.node(id);
    TreeSnapshot::Leaf l;
    l.lo = n.cell.lo();
    l.hi = n.cell.hi();
    l.q = tree_.q(id);
    l.n = n.state.n();
    l.ess = n.state.n() > 0 ? ess(n.state) : 0.0;
    snap.leaves.push_back(std::move(l));
  }
  return snap;
}

LeafOracle::LeafOracle(const TargetDensity& target, double tol)
    : target_(&target), tol_(tol > 0.0 ? tol : default_tolerance(target.dim())) {
  z_ = integrate_cell(target, target.domain(), tol_);
  if (!(z_ > 0.0)) throw PreconditionError("leaf oracle: target integrates to zero");
}

const LeafOracle::CellTerms& LeafOracle::terms(const Rectangle& cell) {
  auto key = std::make_pair(cell.lo(), cell.hi());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  CellTerms terms;
  terms.pi = integrate_cell(*target_, cell, tol_) / z_;
  if (terms.pi > 0.0) terms.within = within_cell_kl(*target_, cell, z_, tol_);
  return cache_.emplace(std::move(key), terms).first->second;
}

double LeafOracle::full_kl(const ProposalTree& tree) {
  double total = 0.0;
  for (std::size_t id : tree.leaves()) {
    const auto& c = terms(tree.node(id).cell);
    if (c.pi <= 0.0) continue;
    const double q = tree.q(id);
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    total += c.within - c.pi * std::log(q);
  }
  return total;
}

HiDaiseeRun run_hidaisee(HiDaisee& engine, std::uint64_t iterations, LeafOracle* oracle) {
  HiDaiseeRun run;
  run.trace.reserve(iterations);
  double weight_sum = 0.0;
  RegretAccumulator cumulative;
  // Cell terms by node id; node cells never change.
  std::vector<const LeafOracle::CellTerms*> terms;

  auto current_kl = [&]() {
    const auto& tree = engine.tree();
    if (terms.size() < tree.size()) terms.resize(tree.size(), nullptr);
    double total = 0.0;
    for (std::size_t id : tree.leaves()) {
      if (!terms[id]) terms[id] = &oracle->terms(tree.node(id).cell);
      const auto& c = *terms[id];
      if (c.pi <= 0.0) continue;
      const double q = tree.q(id);
      if (q <= 0.0) return std::numeric_limits<double>::infinity();
      total += c.within - c.pi * std::log(q);
    }
    return total;
  };

  for (std::uint64_t i = 0; i < iterations; ++i) {
    std::optional<double> kl;
    if (oracle) kl = current_kl();
    auto st = engine.step();
    RunRecord r;
    r.t = st.sample.t;
    r.arm = st.sample.arm;
    r.y = st.sample.y;
    r.proposal_density = st.proposal_density;
    weight_sum += st.sample.f_val / st.proposal_density;
    r.z_hat_total = weight_sum / static_cast<double>(r.t);
    r.x = std::move(st.sample.x);
    if (kl) {
      r.instant_regret = *kl;
      r.cum_regret = cumulative.add(*kl);
    }
    r.partition_count = engine.tree().leaf_count();
    run.trace.push_back(std::move(r));
    if (is_snapshot_time(engine.t()) || i + 1 == iterations) run.snapshots.push_back(engine.snapshot());
  }
  return run;
}

}  // namespace ais
