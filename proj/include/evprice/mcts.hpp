#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "evprice/pricer.hpp"
#include "evprice/pricing_mdp.hpp"

namespace evprice {

struct MctsParams {
  double exploration = 3.0;   ///< UCB constant c
  int max_depth = 10;         ///< tree depth limit d
  int iterations = 10000;     ///< iterations per decision
  std::uint64_t seed = 0;
  /// +1 adds the exploration bonus (UCB1); -1 subtracts it as printed in
  /// some write-ups of the algorithm.
  int ucb_sign = +1;
  bool reuse_tree = true;

  /// 10000 iterations, depth 10, c = 3 (grid-search winners).
  static MctsParams standard();
  /// 800 iterations, depth 3, c = 1.
  static MctsParams light();

  void validate() const;
};

/// Search statistics keyed by MDP state. Transpositions share a node, which
/// is harmless here because t is part of the state.
class SearchTree {
 public:
  using NodeId = std::uint32_t;

  struct Edge {
    Action action;
    std::uint32_t visits = 0;
    double q = 0.0;
    std::vector<NodeId> children;
  };

  struct Node {
    State state;
    std::uint32_t visits = 0;
    std::vector<Edge> edges;   // legal actions, ascending price then Reject
  };

  SearchTree() = default;

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::optional<NodeId> find(const State& s) const;
  const Node& node(NodeId id) const { return nodes_[id]; }
  Node& node(NodeId id) { return nodes_[id]; }
  NodeId root() const { return 0; }

  /// Adds a node with zeroed statistics for every legal action.
  NodeId expand(const TransitionModel& model, const State& s);

 private:
  friend SearchTree reroot(const SearchTree& tree, const State& next);

  std::vector<Node> nodes_;
  std::unordered_map<State, NodeId, StateHash> lookup_;
};

/// Keeps the subtree below `next` with its statistics; returns an empty tree
/// when `next` was never expanded.
SearchTree reroot(const SearchTree& tree, const State& next);

/// Uniformly random rollout to the horizon, jumping between arrivals with
/// geometric inter-arrival draws. Returns the collected revenue.
double rollout(const TransitionModel& model, const State& state, Rng& rng);

/// Runs `params.iterations` UCT iterations from `state` on top of `tree`
/// (which must be empty or rooted at `state`) and returns the root action
/// with the highest mean value (lowest price on ties).
Action mcts_plan(const TransitionModel& model, SearchTree& tree, const State& state,
                 const MctsParams& params, Rng& rng);

/// Fresh-tree convenience overload seeded from `params.seed`.
Action mcts_plan(const TransitionModel& model, const State& state, const MctsParams& params);

class MctsPricer final : public Pricer {
 public:
  MctsPricer(const TransitionModel& model, MctsParams params);

  std::string name() const override { return "mcts"; }
  void begin_sequence(const RequestSequence& sequence, std::uint64_t seed) override;
  Action decide(const State& state, std::size_t request_index) override;

  const SearchTree& tree() const { return tree_; }
  std::size_t reused_decisions() const { return reused_; }

 private:
  const TransitionModel& model_;
  MctsParams params_;
  SearchTree tree_;
  Rng rng_;
  std::size_t reused_ = 0;
};

}  // namespace evprice
