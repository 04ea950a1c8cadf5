#pragma once

#include <map>
#include <string>
#include <vector>

#include "granbench/features.hpp"
#include "granbench/rules.hpp"

namespace granbench {

// Task registry: rosters (size-dependent), goal construction, shipped rule
// sets, and static goal descriptions.

struct TaskInfo {
    std::string id;
    std::string primary_size_key;  // the count the CLI's --k maps to
    SizeParams default_sizes;
    SizeParams min_sizes;
    SizeParams max_sizes;
    std::string goal_text;  // static goal description for the goal_only ablation
    bool pddl_supported = false;
    std::vector<int> ranks;  // shipped rule-set ranks
};

const TaskInfo &task_info(const std::string &task_id);

// Feature roster for a task at given size parameters (per-instance features
// like C_1..C_k depend on the counts).
Roster make_roster(const std::string &task_id, const SizeParams &sizes);

// Roster derived from an instance's object population.
Roster roster_for_instance(const WorldState &instance);

// Goal conjuncts over that roster.
GoalSpec make_goal(const std::string &task_id, const SizeParams &sizes);

// Where the shipped data files live. Resolution order: explicit set_data_dir,
// GRANBENCH_DATA env var, ./data, compiled-in source path.
std::string data_dir();
void set_data_dir(const std::string &dir);

// Loads data/rules/<task>.<rank>.json.
RuleSet load_ruleset(const std::string &task_id, int rank);
RuleSet ruleset_from_json_text(const std::string &text);
std::string ruleset_to_json_text(const RuleSet &rs);

Roster roster_from_json_text(const std::string &text);
std::string roster_to_json_text(const std::string &task_id, const Roster &roster);

SizeParams resolve_sizes(const std::string &task_id, const SizeParams &overrides);

}  // namespace granbench
