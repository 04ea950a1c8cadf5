#include "granbench/planner.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <unordered_map>

namespace granbench {

namespace {

std::uint64_t atom_hash(int index, int value) {
    return splitmix64((static_cast<std::uint64_t>(index) << 32) ^
                      static_cast<std::uint32_t>(value));
}

// Enumerates all m-subsets of the vector's atoms in index order, calling fn
// with the combined tuple hash. Returns true if fn returned true for any.
template <typename Fn>
bool for_each_tuple(const FeatureVector &v, int m, Fn &&fn) {
    const int n = static_cast<int>(v.values.size());
    if (m > n) return false;
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::uint64_t h = 0x9ae16a3b2f90404fULL;
        for (int i : idx) h = splitmix64(h ^ atom_hash(i, v.values[static_cast<std::size_t>(i)].value));
        if (fn(h)) return true;
        int pos = m - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - m + pos) --pos;
        if (pos < 0) return false;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < m; ++i)
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
}

}  // namespace

int novelty(const FeatureVector &v, const NoveltySeen &seen, int k) {
    for (int m = 1; m <= k; ++m) {
        bool fresh = for_each_tuple(v, m, [&](std::uint64_t h) { return !seen.contains(h); });
        if (fresh) return m;
    }
    return k + 1;
}

void record_tuples(const FeatureVector &v, NoveltySeen &seen, int k) {
    for (int m = 1; m <= k; ++m)
        for_each_tuple(v, m, [&](std::uint64_t h) {
            seen.insert(h);
            return false;
        });
}

Subproblem make_rule_subproblem(const WorldState &start, const Rule &rule,
                                const Roster &roster, long budget) {
    Subproblem sub;
    sub.start = start;
    sub.roster = roster;
    sub.budget = budget;
    sub.activation_vector = eval_vector(start, roster);
    FeatureVector v0 = sub.activation_vector;
    Rule r = rule;
    Roster ros = roster;
    std::vector<Constraint> ctx = maintained_context(rule);
    sub.target = [r, ros, v0, ctx](const FeatureVector &v) {
        for (const auto &c : ctx)
            if (!constraint_holds(c, v)) return false;
        return rule_complete(r, ros, v0, v);
    };
    sub.unsat_count = [r, ros, v0, ctx](const FeatureVector &v) {
        int unsat = goal_count_heuristic(v0, v, r, ros);
        for (const auto &c : ctx)
            if (!constraint_holds(c, v)) ++unsat;
        return unsat;
    };
    return sub;
}

Subproblem make_goal_subproblem(const WorldState &start, const Roster &roster,
                                long budget) {
    Subproblem sub;
    sub.start = start;
    sub.roster = roster;
    sub.budget = budget;
    sub.activation_vector = eval_vector(start, roster);
    GoalSpec goal = start.goal;
    sub.target = [goal](const FeatureVector &v) { return goal_holds(goal, v); };
    sub.unsat_count = [goal](const FeatureVector &v) {
        return goal_count_heuristic(v, goal);
    };
    return sub;
}

int goal_count_heuristic(const FeatureVector &v_activation, const FeatureVector &v_now,
                         const Rule &rule, const Roster &roster) {
    int unsat = 0;
    for (const auto &e : rule.effect) {
        Rule single;
        single.effect = {e};
        if (!rule_complete(single, roster, v_activation, v_now)) ++unsat;
    }
    return unsat;
}

int goal_count_heuristic(const FeatureVector &v_now, const GoalSpec &goal) {
    int unsat = 0;
    for (const auto &c : goal.conjuncts)
        if (!constraint_holds(c, v_now)) ++unsat;
    return unsat;
}

namespace {

struct Node {
    WorldState state;
    FeatureVector vector;
    int parent = -1;
    Action action_in{ActionKind::MoveNorth, std::nullopt};
    int g = 0;
};

Plan reconstruct(const std::vector<Node> &arena, int leaf, const Plan::Stats &stats) {
    Plan plan;
    plan.stats = stats;
    int i = leaf;
    while (i > 0) {
        plan.actions.push_back(arena[static_cast<std::size_t>(i)].action_in);
        i = arena[static_cast<std::size_t>(i)].parent;
    }
    std::reverse(plan.actions.begin(), plan.actions.end());
    plan.length = static_cast<int>(plan.actions.size());
    plan.solved = true;
    return plan;
}

void check_replay(const Subproblem &sub, const Plan &plan) {
    WorldState s = sub.start;
    for (const auto &a : plan.actions) s = step(s, a);
    if (!sub.target(eval_vector(s, sub.roster)))
        throw SchemaError("internal: returned plan does not replay to a target state");
}

}  // namespace

Plan iw_search(const Subproblem &sub, int k) {
    NoveltySeen seen;
    std::vector<Node> arena;
    std::deque<int> frontier;
    Plan::Stats stats;

    arena.push_back({sub.start, eval_vector(sub.start, sub.roster), -1, {}, 0});
    if (sub.target(arena[0].vector)) {
        Plan plan;
        plan.solved = true;
        plan.stats = stats;
        return plan;  // zero-step case
    }
    record_tuples(arena[0].vector, seen, k);
    frontier.push_back(0);

    while (!frontier.empty()) {
        if (stats.expanded >= sub.budget)
            throw BudgetExceeded("iw_search expanded " + std::to_string(stats.expanded) +
                                 " nodes");
        int cur = frontier.front();
        frontier.pop_front();
        ++stats.expanded;
        WorldState cur_state = arena[static_cast<std::size_t>(cur)].state;
        int cur_g = arena[static_cast<std::size_t>(cur)].g;
        for (const auto &a : legal_actions(cur_state)) {
            WorldState next = step(cur_state, a);
            FeatureVector v = eval_vector(next, sub.roster);
            ++stats.generated;
            if (sub.target(v)) {
                arena.push_back({std::move(next), std::move(v), cur, a, cur_g + 1});
                Plan plan = reconstruct(arena, static_cast<int>(arena.size()) - 1, stats);
                check_replay(sub, plan);
                return plan;
            }
            int w = novelty(v, seen, k);
            if (w > k) continue;  // pruned
            stats.max_novelty = std::max(stats.max_novelty, w);
            record_tuples(v, seen, k);
            arena.push_back({std::move(next), std::move(v), cur, a, cur_g + 1});
            frontier.push_back(static_cast<int>(arena.size()) - 1);
        }
    }
    Plan plan;
    plan.solved = false;
    plan.stats = stats;
    return plan;  // frontier exhausted
}

Plan bfws_solve(const Subproblem &sub) {
    constexpr int kNoveltyMax = 2;
    NoveltySeen seen;
    std::vector<Node> arena;
    Plan::Stats stats;

    struct Entry {
        int novelty;
        int unsat;
        int g;
        long seq;
        int node;
        bool operator>(const Entry &o) const {
            if (novelty != o.novelty) return novelty > o.novelty;
            if (unsat != o.unsat) return unsat > o.unsat;
            if (g != o.g) return g > o.g;
            return seq > o.seq;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::unordered_map<std::uint64_t, std::vector<int>> closed;

    auto is_duplicate = [&](const WorldState &s) {
        auto it = closed.find(state_hash(s));
        if (it == closed.end()) return false;
        for (int i : it->second)
            if (arena[static_cast<std::size_t>(i)].state == s) return true;
        return false;
    };
    auto mark = [&](const WorldState &s, int idx) {
        closed[state_hash(s)].push_back(idx);
    };

    arena.push_back({sub.start, eval_vector(sub.start, sub.roster), -1, {}, 0});
    if (sub.target(arena[0].vector)) {
        Plan plan;
        plan.solved = true;
        plan.stats = stats;
        return plan;
    }
    record_tuples(arena[0].vector, seen, kNoveltyMax);
    mark(sub.start, 0);
    long seq = 0;
    open.push({1, sub.unsat_count(arena[0].vector), 0, seq++, 0});

    while (!open.empty()) {
        if (stats.expanded >= sub.budget)
            throw BudgetExceeded("bfws_solve expanded " + std::to_string(stats.expanded) +
                                 " nodes");
        Entry e = open.top();
        open.pop();
        ++stats.expanded;
        WorldState cur_state = arena[static_cast<std::size_t>(e.node)].state;
        int cur_g = arena[static_cast<std::size_t>(e.node)].g;
        for (const auto &a : legal_actions(cur_state)) {
            WorldState next = step(cur_state, a);
            if (is_duplicate(next)) continue;
            FeatureVector v = eval_vector(next, sub.roster);
            ++stats.generated;
            arena.push_back({std::move(next), v, e.node, a, cur_g + 1});
            int idx = static_cast<int>(arena.size()) - 1;
            mark(arena[static_cast<std::size_t>(idx)].state, idx);
            if (sub.target(v)) {
                Plan plan = reconstruct(arena, idx, stats);
                check_replay(sub, plan);
                return plan;
            }
            int w = novelty(v, seen, kNoveltyMax);
            record_tuples(v, seen, kNoveltyMax);
            stats.max_novelty = std::max(stats.max_novelty, w);
            open.push({w, sub.unsat_count(v), cur_g + 1, seq++, idx});
        }
    }
    Plan plan;
    plan.solved = false;
    plan.stats = stats;
    return plan;
}

int rule_width(const Rule &rule, const WorldState &start, const Roster &roster,
               int k_max, long budget) {
    Subproblem sub = make_rule_subproblem(start, rule, roster, budget);
    if (!is_applicable(rule, sub.activation_vector))
        throw std::invalid_argument("rule_width: rule not applicable at start");
    // Zero or one step: width 0.
    if (sub.target(sub.activation_vector)) return 0;
    for (const auto &a : legal_actions(start)) {
        WorldState next = step(start, a);
        if (sub.target(eval_vector(next, roster))) return 0;
    }
    for (int k = 1; k <= k_max; ++k) {
        Plan plan = iw_search(sub, k);
        if (plan.solved) return k;
    }
    throw WidthExceeded(k_max, "rule " + rule.id + " exceeds width " + std::to_string(k_max));
}

}  // namespace granbench
