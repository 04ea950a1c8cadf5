#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "granbench/instructor.hpp"
#include "granbench/planner.hpp"

namespace granbench {

// One activation of a rule: trace steps [start_t, end_t).
struct ActivationSpan {
    std::string rule_id;
    int start_t = 0;
    int end_t = 0;
    FeatureVector activation_vector;
    bool interrupted = false;
};

struct Trace {
    std::vector<WorldState> states;    // length T+1
    std::vector<Action> actions;       // length T
    std::vector<FeatureVector> vectors;  // length T+1
    std::vector<ActivationSpan> activations;
    bool reached_goal = false;
    bool stuck = false;
    int stuck_step = -1;

    int length() const { return static_cast<int>(actions.size()); }
};

// Action source driven by the instructor loop. `activation_ordinal` increments
// per fresh activation so policies can cache per-activation plans.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action choose(const WorldState &state, const Rule &active_rule,
                          const FeatureVector &activation_vector,
                          const Roster &roster, int activation_ordinal) = 0;
};

struct RunConfig {
    int max_steps = 400;
    long node_budget = 200000;
    bool throw_on_stuck = true;  // harness mode records the defect instead
};

// The dynamic-instructor loop: per timestep evaluate the vector, select the
// active rule (sticky until run-to-rest complete), let the policy act.
Trace run_instructed(const WorldState &instance, const RuleSet &rs,
                     const Roster &roster, Policy &policy, const RunConfig &cfg);

// Plans each activation's run-to-rest target with bfws_solve.
class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(long node_budget = 200000) : budget_(node_budget) {}
    Action choose(const WorldState &state, const Rule &active_rule,
                  const FeatureVector &activation_vector, const Roster &roster,
                  int activation_ordinal) override;

private:
    long budget_;
    int cached_ordinal_ = -1;
    std::vector<Action> plan_;
    std::size_t cursor_ = 0;
    std::uint64_t expected_hash_ = 0;
};

}  // namespace granbench
