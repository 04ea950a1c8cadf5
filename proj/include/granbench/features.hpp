#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granbench/world.hpp"

namespace granbench {

enum class FeatureKind { BooleanPredicate, DistanceToNearest, Count };

const char *feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string &name);

// Declarative definition of one feature in the shared space.
//
// boolean_predicate: `predicate` is a flag name or "holding"; binds to
//   `instance_index`-th instance of object_type (id order) when set, else to
//   the carried instance if any, else the nearest.
// distance_to_nearest: steps-to-adjacency to the nearest instance passing
//   `filter`; kInf when none qualifies.
// count: `count_fn` applied over instances of object_type. Functions taking a
//   target type carry it as a ":<type>" suffix (count_not_inside_target:box).
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::BooleanPredicate;
    std::string object_type;
    std::optional<std::string> predicate;
    std::optional<std::string> filter;
    std::optional<std::string> count_fn;
    std::optional<int> instance_index;
};

using Roster = std::vector<FeatureSpec>;

struct FeatureValue {
    bool is_bool = false;
    int value = 0;  // bools as 0/1; numerics >= 0 or kInf

    friend bool operator==(const FeatureValue &a, const FeatureValue &b) {
        return a.is_bool == b.is_bool && a.value == b.value;
    }
};

// Evaluated vector over a roster; ordered by roster order.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<FeatureValue> values;

    int index_of(const std::string &name) const;  // -1 when absent
    const FeatureValue &at(const std::string &name) const;  // throws UnknownFeature
    friend bool operator==(const FeatureVector &a, const FeatureVector &b) {
        return a.names == b.names && a.values == b.values;
    }
};

FeatureValue eval_feature(const WorldState &state, const FeatureSpec &spec);
FeatureVector eval_vector(const WorldState &state, const Roster &roster);

int count(const WorldState &state, const std::string &object_type,
          const std::string &count_fn);
int distance_to_nearest(const WorldState &state, const std::string &object_type,
                        const std::string &filter);

bool count_fn_registered(const std::string &count_fn);
const std::vector<std::string> &registered_count_fns();

// Goal conjunct check against a vector (same grammar as rule conditions;
// numeric constraints against kInf are false).
bool constraint_holds(const Constraint &c, const FeatureVector &v);
bool goal_holds(const GoalSpec &goal, const FeatureVector &v);

}  // namespace granbench
