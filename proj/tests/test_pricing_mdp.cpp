#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <unordered_set>

#include "evprice/errors.hpp"
#include "evprice/pricing_mdp.hpp"
#include "support.hpp"

using namespace evprice;

namespace {

TransitionModel default_model() { return TransitionModel::from_instance(InstanceConfig{}); }

}  // namespace

TEST(Acceptance, MedianGivesOneHalf) {
  const TransitionModel m = default_model();
  const std::size_t p = m.products().index_of(Product(4, 1, 8));
  // numeric median of the truncated rate distribution, by bisection
  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (evtest::trunc_normal_cdf(mid, 1.0, 0.5, 0.0) < 0.5 ? lo : hi) = mid;
  }
  const double hours = 3.0;
  EXPECT_NEAR(m.acceptance_probability_at(p, lo * hours), 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(m.acceptance_probability_at(p, 1e-300), 1.0);
}

TEST(Acceptance, MatchesMonteCarloBudgets) {
  InstanceConfig cfg;
  cfg.prices = PriceGrid({1.0});
  const TransitionModel m = TransitionModel::from_instance(cfg);
  const std::size_t p = m.products().index_of(Product(3, 1, 8));  // 3 hours
  Rng rng = make_rng(12);
  const int n = 1'000'000;
  int accepted = 0;
  for (int i = 0; i < n; ++i)
    if (m.total_price(p, Action(0)) <= cfg.budget.sample(rng) * 3.0) ++accepted;
  const double pa = m.acceptance_probability(p, Action(0));
  EXPECT_NEAR(accepted / double(n), pa, 3 * std::sqrt(pa * (1 - pa) / n));
}

TEST(Acceptance, MonotoneInPriceAndZeroForReject) {
  const TransitionModel m = default_model();
  for (std::size_t p = 0; p < m.products().size(); ++p) {
    double prev = 1.0;
    for (std::size_t a = 0; a < m.prices().size(); ++a) {
      const double pa = m.acceptance_probability(p, Action(static_cast<int>(a)));
      EXPECT_LE(pa, prev);
      prev = pa;
    }
    EXPECT_EQ(m.acceptance_probability(p, Action::reject()), 0.0);
  }
}

TEST(Reward, Examples) {
  evtest::SmallSpec sp;
  sp.rates = {0.25};
  const TransitionModel m = evtest::build_model(sp);
  const State s{m.initial_capacity(), 0, m.products().index_of(Product(1, 1, 2))};
  const double price = m.total_price(*s.pending, Action(0));  // 3.0
  EXPECT_DOUBLE_EQ(price, 3.0);
  EXPECT_DOUBLE_EQ(reward(m, s, Action(0), price <= 5.0), 3.0);
  EXPECT_DOUBLE_EQ(reward(m, s, Action(0), price <= 2.0), 0.0);
  EXPECT_DOUBLE_EQ(reward(m, s, Action::reject(), true), 0.0);
}

TEST(Transitions, RejectOnEmptyPending) {
  const evtest::SmallSpec sp;
  const TransitionModel m = evtest::build_model(sp);
  const State s{m.initial_capacity(), 2, std::nullopt};
  const auto dist = transition_distribution(m, s, Action::reject());
  EXPECT_EQ(dist.size(), m.products().size() + 1);
  for (const auto& o : dist) {
    EXPECT_EQ(o.next.capacity, s.capacity);
    EXPECT_EQ(o.next.t, 3);
    EXPECT_EQ(o.reward, 0.0);
  }
  Rng rng = make_rng(1);
  EXPECT_THROW(sample_transition(m, s, Action(0), rng), ContractViolation);
  EXPECT_THROW(transition_distribution(m, State{m.initial_capacity(), 6, std::nullopt},
                                       Action::reject()),
               ContractViolation);
}

TEST(Transitions, CertainAcceptanceAlwaysReserves) {
  evtest::SmallSpec sp;
  sp.b_floor = 0.5;
  sp.rates = {0.5, 1.0, 1.5};
  const TransitionModel m = evtest::build_model(sp);
  const State s{m.initial_capacity(), 0, m.products().index_of(Product(1, 1, 2))};
  EXPECT_DOUBLE_EQ(m.acceptance_probability(*s.pending, Action(0)), 1.0);
  Rng rng = make_rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto tr = sample_transition(m, s, Action(0), rng);
    EXPECT_TRUE(tr.accepted);
    EXPECT_EQ(tr.next.capacity, CapacityVector(std::vector<int>{1, 0}));
  }
}

TEST(Transitions, ExpiredProductIsInfeasible) {
  const evtest::SmallSpec sp;
  const TransitionModel m = evtest::build_model(sp);
  const std::size_t late = m.products().index_of(Product(1, 1, 2));  // deadline t = 3
  EXPECT_TRUE(m.pending_feasible(State{m.initial_capacity(), 2, late}));
  EXPECT_FALSE(m.pending_feasible(State{m.initial_capacity(), 3, late}));
  const std::size_t first = m.products().index_of(Product(0, 1, 2));  // deadline t = 0
  EXPECT_FALSE(m.pending_feasible(State{m.initial_capacity(), 0, first}));
  EXPECT_EQ(m.legal_actions(State{m.initial_capacity(), 3, late}).size(), 1u);
}

TEST(Transitions, JointLawIsProductOfIndependentCoins) {
  const evtest::SmallSpec sp;
  const TransitionModel m = evtest::build_model(sp);
  const std::size_t p = m.products().index_of(Product(1, 1, 2));
  const State s{m.initial_capacity(), 1, p};
  const Action a(1);
  const double pa = evtest::Expectimax(sp).p_acc(1.0);
  Rng rng = make_rng(3);
  const int n = 1'000'000;
  std::map<std::pair<bool, int>, int> hits;
  for (int i = 0; i < n; ++i) {
    const auto tr = sample_transition(m, s, a, rng);
    ++hits[{tr.accepted, tr.next.pending ? static_cast<int>(*tr.next.pending) : -1}];
  }
  double none = 1.0;
  for (double l : sp.lambdas) none -= l / sp.k;
  for (int acc = 0; acc < 2; ++acc) {
    for (int q = -1; q < 3; ++q) {
      const double pq = q < 0 ? none : sp.lambdas[static_cast<std::size_t>(q)] / sp.k;
      const double expected = (acc ? pa : 1 - pa) * pq;
      const double se = std::sqrt(expected * (1 - expected) / n);
      EXPECT_NEAR(hits[std::make_pair(acc == 1, q)] / double(n), expected, 3 * se) << acc << " " << q;
    }
  }
}

TEST(Transitions, ClosureOnEveryStateOfSmallModel) {
  const evtest::SmallSpec sp;
  const TransitionModel m = evtest::build_model(sp);
  for (const State& s : enumerate_states(m, 10000)) {
    for (Action a : m.legal_actions(s)) {
      const auto dist = transition_distribution(m, s, a);
      EXPECT_LE(dist.size(), 2 * (m.products().size() + 1));
      double sum = 0.0;
      for (const auto& o : dist) {
        sum += o.probability;
        EXPECT_EQ(o.next.t, s.t + 1);
        for (std::size_t j = 0; j < o.next.capacity.size(); ++j)
          EXPECT_LE(o.next.capacity[j], s.capacity[j]);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Transitions, EpisodesLastExactlyKSteps) {
  const TransitionModel m = default_model();
  Rng rng = make_rng(4);
  for (int ep = 0; ep < 50; ++ep) {
    State s = m.initial_state(rng);
    int steps = 0;
    while (!m.terminal(s)) {
      const auto actions = m.legal_actions(s);
      const Action a = actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
      const auto tr = sample_transition(m, s, a, rng);
      if (tr.accepted) {
        // never sells a slot whose selling period is over
        const auto& prod = m.products()[*s.pending];
        EXPECT_LT(s.t, m.slots().deadline_step(prod.first_slot(), m.horizon()));
      }
      s = tr.next;
      ++steps;
    }
    EXPECT_EQ(steps, m.horizon());
    EXPECT_FALSE(s.pending.has_value());
  }
}

TEST(StateSpace, CountsAndIndexing) {
  EXPECT_EQ(state_count_formula(2, 1, 1), 8u);
  EXPECT_EQ(state_count_formula(4, 2, 2), 144u);
  EXPECT_DOUBLE_EQ(state_count_paper(192, 3, 8), 192.0 * 6561.0 * 36.0);
  EXPECT_EQ(state_count(default_model()), state_count_formula(192, 3, 8));

  const evtest::SmallSpec sp;
  const TransitionModel m = evtest::build_model(sp);
  const StateIndexer idx(m);
  const auto states = enumerate_states(m, 10000);
  ASSERT_EQ(states.size(), idx.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_EQ(idx.index(states[i]), i);
    EXPECT_EQ(idx.state_at(i), states[i]);
  }
  EXPECT_THROW(enumerate_states(m, 10), ResourceGuard);
}

TEST(StateSpace, InitialStateDrawsFromFirstStep) {
  const TransitionModel m = default_model();
  const auto law = m.pending_distribution(0);
  double sum = 0.0;
  for (const auto& [p, pr] : law) sum += pr;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  const auto end = m.pending_distribution(m.horizon());
  ASSERT_EQ(end.size(), 1u);
  EXPECT_FALSE(end[0].first.has_value());
}
