#include "evprice/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "evprice/errors.hpp"

namespace evprice {

MctsParams MctsParams::standard() { return MctsParams{}; }

MctsParams MctsParams::light() {
  MctsParams p;
  p.exploration = 1.0;
  p.max_depth = 3;
  p.iterations = 800;
  return p;
}

void MctsParams::validate() const {
  if (!(exploration >= 0.0) || !std::isfinite(exploration))
    throw ConfigError("MCTS exploration constant must be >= 0");
  if (max_depth < 1) throw ConfigError("MCTS depth limit must be >= 1");
  if (iterations < 1) throw ConfigError("MCTS iteration count must be >= 1");
  if (ucb_sign != 1 && ucb_sign != -1) throw ConfigError("ucb_sign must be +1 or -1");
}

std::optional<SearchTree::NodeId> SearchTree::find(const State& s) const {
  if (auto it = lookup_.find(s); it != lookup_.end()) return it->second;
  return std::nullopt;
}

SearchTree::NodeId SearchTree::expand(const TransitionModel& model, const State& s) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Node node;
  node.state = s;
  const auto actions = model.legal_actions(s);
  node.edges.reserve(actions.size());
  for (Action a : actions) node.edges.push_back(Edge{a, 0, 0.0, {}});
  nodes_.push_back(std::move(node));
  lookup_.emplace(s, id);
  return id;
}

SearchTree reroot(const SearchTree& tree, const State& next) {
  SearchTree out;
  const auto start = tree.find(next);
  if (!start) return out;

  // breadth-first over child links; the new ids follow visiting order
  std::unordered_map<SearchTree::NodeId, SearchTree::NodeId> remap{{*start, 0}};
  std::vector<SearchTree::NodeId> order;
  std::deque<SearchTree::NodeId> queue{*start};
  while (!queue.empty()) {
    const auto id = queue.front();
    queue.pop_front();
    order.push_back(id);
    for (const auto& e : tree.node(id).edges)
      for (auto child : e.children)
        if (remap.emplace(child, static_cast<SearchTree::NodeId>(remap.size())).second)
          queue.push_back(child);
  }

  out.nodes_.reserve(order.size());
  for (auto id : order) {
    SearchTree::Node copy = tree.node(id);
    for (auto& e : copy.edges)
      for (auto& c : e.children) c = remap.at(c);
    out.lookup_.emplace(copy.state, static_cast<SearchTree::NodeId>(out.nodes_.size()));
    out.nodes_.push_back(std::move(copy));
  }
  return out;
}

double rollout(const TransitionModel& model, const State& state, Rng& rng) {
  if (model.terminal(state)) return 0.0;
  const auto& demand = model.demand();
  const std::size_t n_prices = model.prices().size();
  State s = state;
  double total = 0.0;
  for (;;) {
    if (model.pending_feasible(s)) {
      // uniform over the priced actions and Reject
      std::uniform_int_distribution<std::size_t> pick(0, n_prices);
      const std::size_t choice = pick(rng);
      if (choice < n_prices) {
        const Action a(static_cast<int>(choice));
        if (uniform01(rng) < model.acceptance_probability(*s.pending, a)) {
          total += model.total_price(*s.pending, a);
          s.capacity.reserve(model.products()[*s.pending]);
        }
      }
    }
    // state t holds die roll t + 1; the next arrival lands on roll t + 1 + delta
    const auto delta = demand.sample_interarrival(s.t + 1, rng);
    if (!delta) return total;
    s.t += *delta;
    s.pending = demand.sample_product(rng);
  }
}

namespace {

struct PathStep {
  SearchTree::NodeId node;
  std::size_t edge;
  double reward_before;  // cumulative reward above this level
};

std::size_t select_edge(const SearchTree::Node& node, const MctsParams& params) {
  for (std::size_t i = 0; i < node.edges.size(); ++i)
    if (node.edges[i].visits == 0) return i;
  const double log_n = std::log(static_cast<double>(node.visits));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.edges.size(); ++i) {
    const auto& e = node.edges[i];
    const double bonus = params.exploration * std::sqrt(log_n / e.visits);
    const double score = e.q + params.ucb_sign * bonus;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

void link_child(SearchTree::Edge& edge, SearchTree::NodeId child) {
  if (std::find(edge.children.begin(), edge.children.end(), child) == edge.children.end())
    edge.children.push_back(child);
}

}  // namespace

Action mcts_plan(const TransitionModel& model, SearchTree& tree, const State& state,
                 const MctsParams& params, Rng& rng) {
  params.validate();
  if (model.terminal(state)) throw ContractViolation("MCTS called on a terminal state");
  if (!model.pending_feasible(state)) return Action::reject();
  if (tree.empty()) tree.expand(model, state);
  else if (!(tree.node(tree.root()).state == state))
    throw ContractViolation("search tree is rooted at a different state");

  std::vector<PathStep> path;
  path.reserve(static_cast<std::size_t>(params.max_depth));
  for (int iter = 0; iter < params.iterations; ++iter) {
    path.clear();
    State s = state;
    double cumulative = 0.0;
    std::optional<PathStep> parent;
    for (int depth = 0; depth < params.max_depth; ++depth) {
      auto id = tree.find(s);
      if (!id) id = tree.expand(model, s);
      if (parent) link_child(tree.node(parent->node).edges[parent->edge], *id);

      const std::size_t e = select_edge(tree.node(*id), params);
      const Action a = tree.node(*id).edges[e].action;
      const bool untried = tree.node(*id).edges[e].visits == 0;
      Transition tr = sample_transition(model, s, a, rng);
      path.push_back(PathStep{*id, e, cumulative});
      parent = path.back();
      cumulative += tr.reward;
      s = std::move(tr.next);
      if (model.terminal(s) || untried) break;
    }
    cumulative += rollout(model, s, rng);

    for (const auto& step : path) {
      auto& node = tree.node(step.node);
      auto& edge = node.edges[step.edge];
      edge.q = (edge.visits * edge.q + (cumulative - step.reward_before)) / (edge.visits + 1);
      ++node.visits;
      ++edge.visits;
    }
  }

  const auto& root = tree.node(tree.root());
  std::size_t best = 0;
  for (std::size_t i = 1; i < root.edges.size(); ++i)
    if (root.edges[i].q > root.edges[best].q) best = i;
  return root.edges[best].action;
}

Action mcts_plan(const TransitionModel& model, const State& state, const MctsParams& params) {
  SearchTree tree;
  Rng rng = make_rng(params.seed);
  return mcts_plan(model, tree, state, params, rng);
}

MctsPricer::MctsPricer(const TransitionModel& model, MctsParams params)
    : model_(model), params_(params), rng_(make_rng(params.seed)) {
  params_.validate();
}

void MctsPricer::begin_sequence(const RequestSequence&, std::uint64_t seed) {
  tree_ = SearchTree{};
  rng_ = make_rng(seed);
  reused_ = 0;
}

Action MctsPricer::decide(const State& state, std::size_t) {
  if (params_.reuse_tree && !tree_.empty()) {
    tree_ = reroot(tree_, state);
    if (!tree_.empty()) ++reused_;
  } else {
    tree_ = SearchTree{};
  }
  return mcts_plan(model_, tree_, state, params_, rng_);
}

}  // namespace evprice
