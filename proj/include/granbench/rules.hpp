#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granbench/features.hpp"

namespace granbench {

enum class EffectOp { SetTrue, SetFalse, AnyBool, Decrease, Increase, AnyChange };

const char *effect_op_name(EffectOp op);
EffectOp effect_op_from_name(const std::string &name);

struct EffectAtom {
    std::string feature;
    EffectOp op;
};

struct Rule {
    std::string id;
    std::vector<Constraint> condition;
    std::vector<EffectAtom> effect;
    std::string template_hint;
};

struct Lineage {
    std::string coarse_id;
    std::vector<std::string> parents;  // constituent finer-rule ids, contiguous
};

struct RuleSet {
    std::string task_id;
    int rank = 0;  // 0 = finest
    std::vector<Rule> rules;
    std::vector<Lineage> lineage;

    const Rule *find(const std::string &id) const;
};

// True iff every condition constraint holds. Throws UnknownFeature when a
// condition names a feature outside v's domain.
bool is_applicable(const Rule &rule, const FeatureVector &v);

// Point fulfillment: booleans judged on v_now alone; numeric decrease/increase
// strict vs the activation vector (kInf treated as +infinity); any-atoms
// vacuous.
bool is_fulfilled(const Rule &rule, const FeatureVector &v_activation,
                  const FeatureVector &v_now);

// Run-to-rest completion used by the instructor and the planner's subgoal
// targets: distance-kind decreases complete at 0, count-kind decreases at the
// first strict drop, boolean atoms when established.
bool rule_complete(const Rule &rule, const Roster &roster,
                   const FeatureVector &v_activation, const FeatureVector &v_now);

// Zero-step rule: complete at its own activation vector.
bool zero_step(const Rule &rule, const Roster &roster, const FeatureVector &v);

// Boolean condition conjuncts the subgoal solver maintains while delivering
// the effect (features the effect itself changes are exempt). Without this
// discipline the planner can game run-to-rest targets, e.g. dropping a
// carried sheet to zero the distance-to-nearest-wood feature, or un-laying a
// placed sheet to conjure a nearby isolated one.
std::vector<Constraint> maintained_context(const Rule &rule);

// --- Merging ---

struct MergeGroup {
    std::string id;
    std::vector<std::string> parents;  // contiguous run of parent rule ids
    std::vector<Constraint> condition;
    std::vector<EffectAtom> effect;
    std::string template_hint;
};

// Builds the rank+1 set from explicitly authored segment interfaces. Parent
// rules not covered by any group are carried over unchanged, in order.
// Throws NonContiguousSegment / InterfaceReferencesUnknownFeature.
RuleSet merge_rules(const RuleSet &parent, const std::vector<MergeGroup> &groups,
                    const Roster &roster);

// --- Validation ---

struct ActivationFailure {
    int step = 0;
    std::string rule_id;  // empty when no rule was applicable
    std::string reason;
    std::string state_json;
};

struct ValidationReport {
    std::string task_id;
    int rank = 0;
    bool reachable = false;
    bool terminating = false;
    int steps = 0;
    int rule_calls = 0;
    std::map<std::string, int> activation_counts;
    std::optional<ActivationFailure> failure;
};

// Runs the instructor policy with the planning oracle from the instance's
// initial state: reachable = some rule always applicable before the goal,
// terminating = goal reached within `budget` world steps. Throws
// PlannerTimeout only when a subgoal solve exhausts its node budget (distinct
// from a terminating=false verdict).
ValidationReport validate_ruleset(const RuleSet &rs, const WorldState &instance,
                                  int budget);

}  // namespace granbench
