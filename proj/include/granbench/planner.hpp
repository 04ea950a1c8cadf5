#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "granbench/rules.hpp"

namespace granbench {

struct Plan {
    std::vector<Action> actions;
    int length = 0;
    bool solved = false;
    struct Stats {
        long expanded = 0;
        long generated = 0;
        int max_novelty = 0;
    } stats;
};

// Target test decidable on (activation_vector, current vector) pairs.
using TargetTest = std::function<bool(const FeatureVector &)>;

struct Subproblem {
    WorldState start;
    FeatureVector activation_vector;
    TargetTest target;
    std::function<int(const FeatureVector &)> unsat_count;  // goal-count atoms
    Roster roster;
    long budget = 200000;  // expanded-node limit per search
};

// Convenience constructors for the two target shapes.
Subproblem make_rule_subproblem(const WorldState &start, const Rule &rule,
                                const Roster &roster, long budget = 200000);
Subproblem make_goal_subproblem(const WorldState &start, const Roster &roster,
                                long budget = 200000);

// --- Novelty ---
//
// The novelty alphabet is (feature, exact value) atoms over the roster, with
// kInf a distinct value. Tuples are hashed order-canonically.

class NoveltySeen {
public:
    bool contains(std::uint64_t h) const { return seen_.count(h) != 0; }
    void insert(std::uint64_t h) { seen_.insert(h); }
    std::size_t size() const { return seen_.size(); }

private:
    std::unordered_set<std::uint64_t> seen_;
};

// Smallest m <= k such that the vector contains an m-tuple of atoms never in
// seen; k+1 if none. The caller inserts the node's tuples up to size k
// afterward via record_tuples.
int novelty(const FeatureVector &v, const NoveltySeen &seen, int k);
void record_tuples(const FeatureVector &v, NoveltySeen &seen, int k);

// --- Searches ---

// Breadth-first search pruning nodes with novelty > k. Deterministic given
// the fixed legal-action ordering. Returns solved=false on frontier
// exhaustion; throws BudgetExceeded when the node budget hits.
Plan iw_search(const Subproblem &sub, int k);

// Best-first search ordered lexicographically by (novelty w.r.t. k_max=2,
// goal-count-remaining, g) with FIFO tie-break. Plan validity is checked by
// replay before return.
Plan bfws_solve(const Subproblem &sub);

// Number of unsatisfied target atoms (rule effect atoms or goal conjuncts).
int goal_count_heuristic(const FeatureVector &v_activation, const FeatureVector &v_now,
                         const Rule &rule, const Roster &roster);
int goal_count_heuristic(const FeatureVector &v_now, const GoalSpec &goal);

// Minimal k <= k_max such that IW(k) solves the rule's run-to-rest subproblem
// from `start`; 0 when the target is satisfiable in <= 1 step. Throws
// WidthExceeded beyond k_max. Precondition: rule applicable at start.
int rule_width(const Rule &rule, const WorldState &start, const Roster &roster,
               int k_max = 5, long budget = 200000);

}  // namespace granbench
