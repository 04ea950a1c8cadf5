#pragma once

#include "granbench/exec.hpp"

namespace granbench {

// Instruction width per the tracked-feature definition: the width of an
// activation is the maximum, over its steps, of the number of features that
// must be simultaneously maintained for the remainder of the episode to stay
// valid — boolean roster features pinned true (action requirements plus goal
// conjuncts not re-established later) plus one slot for the distance being
// actively progressed. Zero-step activations have width 0.

struct ActivationWidth {
    std::string rule_id;
    int start_t = 0;
    int end_t = 0;
    int width = 0;
};

struct WidthAnalysis {
    std::vector<int> tracked_per_step;  // length T
    std::vector<ActivationWidth> activations;
    int instruction_width = 0;
};

WidthAnalysis analyze_widths(const Trace &trace, const Roster &roster,
                             const GoalSpec &goal);

// Executes the validated instructor loop with the planning oracle and returns
// the maximum activation width. Throws ValidationRequired when the rule set
// does not validate on the instance; propagates WidthExceeded past k_max.
int instruction_width(const RuleSet &rs, const WorldState &instance, int k_max = 5);

}  // namespace granbench
