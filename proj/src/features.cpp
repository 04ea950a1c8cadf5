#include "granbench/features.hpp"

#include <algorithm>

namespace granbench {

const char *feature_kind_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::BooleanPredicate: return "boolean_predicate";
    case FeatureKind::DistanceToNearest: return "distance_to_nearest";
    case FeatureKind::Count: return "count";
    }
    return "?";
}

FeatureKind feature_kind_from_name(const std::string &name) {
    if (name == "boolean_predicate") return FeatureKind::BooleanPredicate;
    if (name == "distance_to_nearest") return FeatureKind::DistanceToNearest;
    if (name == "count") return FeatureKind::Count;
    throw SchemaError("unknown feature kind '" + name + "'");
}

int FeatureVector::index_of(const std::string &name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

const FeatureValue &FeatureVector::at(const std::string &name) const {
    int i = index_of(name);
    if (i < 0) throw UnknownFeature("feature '" + name + "' not in vector domain");
    return values[static_cast<std::size_t>(i)];
}

namespace {

bool placed(const WorldState &s, const ObjectInstance &o) {
    return !s.carrying(o.id);
}

bool has_same_type_neighbor(const WorldState &s, const ObjectInstance &o) {
    for (const auto &x : s.objects) {
        if (x.id == o.id || x.type != o.type) continue;
        if (!placed(s, x)) continue;
        if (manhattan(x.pos, o.pos) == 1) return true;
    }
    return false;
}

// An isolated object is carried (not yet laid) or placed with no same-type
// 4-neighbor.
bool isolated(const WorldState &s, const ObjectInstance &o) {
    if (!placed(s, o)) return true;
    return !has_same_type_neighbor(s, o);
}

bool inside_type(const WorldState &s, const ObjectInstance &o, const std::string &type) {
    if (!o.container) return false;
    const auto *c = s.find(*o.container);
    return c && c->type == type;
}

bool near_type(const WorldState &s, const ObjectInstance &o, const std::string &type) {
    for (const auto &x : s.objects)
        if (x.type == type && manhattan(x.pos, o.pos) <= 1) return true;
    return false;
}

struct CountFn {
    std::string name;
    bool takes_target = false;
};

const std::vector<CountFn> &count_fn_table() {
    static const std::vector<CountFn> table = {
        {"count_not_cleaned", false},
        {"count_not_soaked", false},
        {"count_not_toggled", false},
        {"count_closed", false},
        {"count_not_sliced", false},
        {"count_not_onfloor", false},
        {"count_isolated", false},
        {"count_not_inside_target", true},
        {"count_not_ontop", true},
        {"count_not_near_target", true},
        {"count_incomplete_salad", false},
        {"count_not_complete_tables", false},
    };
    return table;
}

std::pair<std::string, std::string> split_count_fn(const std::string &token) {
    auto pos = token.find(':');
    if (pos == std::string::npos) return {token, ""};
    return {token.substr(0, pos), token.substr(pos + 1)};
}

bool passes_filter(const WorldState &s, const ObjectInstance &o, const std::string &filter) {
    if (filter.empty() || filter == "any") return true;
    if (filter == "not_cleaned") return !o.flag(Flag::Cleaned);
    if (filter == "unopened") return !o.flag(Flag::Opened);
    if (filter == "not_soaked") return !o.flag(Flag::Soaked);
    // Distance targets are objects lying isolated; a carried one is "in hand",
    // not somewhere to walk to.
    if (filter == "isolated") return placed(s, o) && !has_same_type_neighbor(s, o);
    if (filter == "not_carried") return placed(s, o);
    if (filter == "loose") return !o.container;
    auto pos = filter.find(':');
    if (pos != std::string::npos) {
        std::string head = filter.substr(0, pos);
        std::string arg = filter.substr(pos + 1);
        if (head == "not_inside") return !inside_type(s, o, arg);
    }
    throw UnknownPredicate("unknown object filter '" + filter + "'");
}

}  // namespace

bool count_fn_registered(const std::string &count_fn) {
    auto [head, arg] = split_count_fn(count_fn);
    for (const auto &fn : count_fn_table())
        if (fn.name == head) return !fn.takes_target || !arg.empty();
    return false;
}

const std::vector<std::string> &registered_count_fns() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &fn : count_fn_table()) v.push_back(fn.name);
        return v;
    }();
    return names;
}

int count(const WorldState &state, const std::string &object_type_name,
          const std::string &count_fn) {
    auto [head, arg] = split_count_fn(count_fn);
    if (!count_fn_registered(count_fn))
        throw UnknownCountFunction("'" + count_fn + "' is not registered");
    int n = 0;
    for (const auto &o : state.objects) {
        if (o.type != object_type_name) continue;
        bool hit = false;
        if (head == "count_not_cleaned")
            hit = !o.flag(Flag::Cleaned);
        else if (head == "count_not_soaked")
            hit = !o.flag(Flag::Soaked);
        else if (head == "count_not_toggled")
            hit = !o.flag(Flag::Toggled);
        else if (head == "count_closed")
            hit = !o.flag(Flag::Opened);
        else if (head == "count_not_sliced")
            hit = !o.flag(Flag::Sliced);
        else if (head == "count_not_onfloor")
            hit = !o.flag(Flag::OnFloor);
        else if (head == "count_isolated")
            hit = isolated(state, o);
        else if (head == "count_not_inside_target")
            hit = !inside_type(state, o, arg);
        else if (head == "count_not_ontop")
            hit = !inside_type(state, o, arg);
        else if (head == "count_not_near_target")
            hit = !near_type(state, o, arg);
        else if (head == "count_incomplete_salad") {
            // Plates lacking a contained sliced item.
            bool complete = false;
            for (const auto &x : state.objects)
                if (x.container && *x.container == o.id && x.flag(Flag::Sliced))
                    complete = true;
            hit = !complete;
        } else if (head == "count_not_complete_tables") {
            // Tables holding fewer than three items.
            int held = 0;
            for (const auto &x : state.objects)
                if (x.container && *x.container == o.id) ++held;
            hit = held < 3;
        }
        if (hit) ++n;
    }
    return n;
}

int distance_to_nearest(const WorldState &state, const std::string &object_type_name,
                        const std::string &filter) {
    int best = kInf;
    for (const auto &o : state.objects) {
        if (o.type != object_type_name) continue;
        if (!passes_filter(state, o, filter)) continue;
        best = std::min(best, adjacency_distance(state.agent_pos, o.pos));
    }
    return best;
}

FeatureValue eval_feature(const WorldState &state, const FeatureSpec &spec) {
    switch (spec.kind) {
    case FeatureKind::BooleanPredicate: {
        if (!spec.predicate) throw SchemaError("boolean feature '" + spec.name + "' lacks predicate");
        const std::string &pred = *spec.predicate;
        if (pred == "holding") {
            for (const auto &id : state.carried) {
                const auto *o = state.find(id);
                if (o && o->type == spec.object_type) return {true, 1};
            }
            return {true, 0};
        }
        Flag f = flag_from_name(pred);
        // Instance binding: explicit ordinal, else carried, else nearest.
        const ObjectInstance *bound = nullptr;
        if (spec.instance_index) {
            int idx = 0;
            for (const auto &o : state.objects) {
                if (o.type != spec.object_type) continue;
                if (idx == *spec.instance_index) {
                    bound = &o;
                    break;
                }
                ++idx;
            }
        } else {
            for (const auto &id : state.carried) {
                const auto *o = state.find(id);
                if (o && o->type == spec.object_type) bound = o;
            }
            if (!bound) {
                int best = kInf;
                for (const auto &o : state.objects) {
                    if (o.type != spec.object_type) continue;
                    int d = adjacency_distance(state.agent_pos, o.pos);
                    if (d < best) {
                        best = d;
                        bound = &o;
                    }
                }
            }
        }
        if (!bound) return {true, 0};
        if (!flag_applicable(bound->type, f))
            throw UnknownPredicate("flag '" + pred + "' not applicable to " + bound->type);
        return {true, bound->flag(f) ? 1 : 0};
    }
    case FeatureKind::DistanceToNearest:
        return {false, distance_to_nearest(state, spec.object_type,
                                           spec.filter.value_or(""))};
    case FeatureKind::Count: {
        if (!spec.count_fn) throw SchemaError("count feature '" + spec.name + "' lacks count_fn");
        return {false, count(state, spec.object_type, *spec.count_fn)};
    }
    }
    throw SchemaError("bad feature kind");
}

FeatureVector eval_vector(const WorldState &state, const Roster &roster) {
    FeatureVector v;
    v.names.reserve(roster.size());
    v.values.reserve(roster.size());
    for (const auto &spec : roster) {
        v.names.push_back(spec.name);
        v.values.push_back(eval_feature(state, spec));
    }
    return v;
}

bool constraint_holds(const Constraint &c, const FeatureVector &v) {
    const FeatureValue &fv = v.at(c.feature);
    switch (c.op) {
    case ConstraintOp::IsTrue: return fv.is_bool && fv.value != 0;
    case ConstraintOp::IsFalse: return fv.is_bool && fv.value == 0;
    case ConstraintOp::EqZero: return !fv.is_bool && fv.value == 0;  // kInf fails
    case ConstraintOp::GtZero: return !fv.is_bool && fv.value > 0 && fv.value != kInf;
    }
    return false;
}

bool goal_holds(const GoalSpec &goal, const FeatureVector &v) {
    for (const auto &c : goal.conjuncts)
        if (!constraint_holds(c, v)) return false;
    return true;
}

}  // namespace granbench
