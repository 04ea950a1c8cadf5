#include "granbench/width.hpp"

#include <algorithm>
#include <set>

#include "granbench/tasks.hpp"

namespace granbench {

namespace {

// World-level positive requirements of an action, mapped onto roster boolean
// features: (object_type, predicate[, concrete instance]) triples such as
// "a rag must be held and soaked" for clean.
struct Requirement {
    std::string object_type;
    std::string predicate;  // flag name or "holding"
    std::optional<std::string> object_id;
};

std::vector<Requirement> action_requirements(const WorldState &s, const Action &a) {
    std::vector<Requirement> reqs;
    auto carried_obj = [&]() -> const ObjectInstance * {
        if (s.carried.empty()) return nullptr;
        return s.find(s.carried.front());
    };
    switch (a.kind) {
    case ActionKind::Clean: {
        for (const auto &id : s.carried) {
            const auto *tool = s.find(id);
            if (tool && flag_applicable(tool->type, Flag::Soaked) && tool->flag(Flag::Soaked)) {
                reqs.push_back({tool->type, "holding", tool->id});
                reqs.push_back({tool->type, "soaked", tool->id});
                break;
            }
        }
        break;
    }
    case ActionKind::Soak: {
        if (a.target) {
            const auto *o = s.find(*a.target);
            if (o) reqs.push_back({o->type, "holding", o->id});
        }
        for (const auto &x : s.objects) {
            if (flag_applicable(x.type, Flag::Toggled) && x.flag(Flag::Toggled) &&
                adjacency_distance(s.agent_pos, x.pos) == 0) {
                reqs.push_back({x.type, "toggled", x.id});
                break;
            }
        }
        break;
    }
    case ActionKind::Place: {
        if (const auto *c = carried_obj()) reqs.push_back({c->type, "holding", c->id});
        if (a.target) {
            const auto *o = s.find(*a.target);
            if (o && flag_applicable(o->type, Flag::Opened))
                reqs.push_back({o->type, "opened", o->id});
        }
        break;
    }
    case ActionKind::Drop: {
        if (const auto *c = carried_obj()) reqs.push_back({c->type, "holding", c->id});
        break;
    }
    default:
        break;  // moves, pickup, toggle, open, close, slice need no true flags
    }
    return reqs;
}

int instance_ordinal(const WorldState &s, const std::string &id, const std::string &type) {
    int idx = 0;
    for (const auto &o : s.objects) {
        if (o.type != type) continue;
        if (o.id == id) return idx;
        ++idx;
    }
    return -1;
}

// Roster boolean features matching one requirement.
std::vector<std::string> matching_features(const WorldState &s, const Roster &roster,
                                           const Requirement &req) {
    std::vector<std::string> out;
    for (const auto &f : roster) {
        if (f.kind != FeatureKind::BooleanPredicate) continue;
        if (f.object_type != req.object_type) continue;
        if (!f.predicate || *f.predicate != req.predicate) continue;
        if (f.instance_index && req.object_id &&
            *f.instance_index != instance_ordinal(s, *req.object_id, req.object_type))
            continue;
        out.push_back(f.name);
    }
    return out;
}

}  // namespace

WidthAnalysis analyze_widths(const Trace &trace, const Roster &roster,
                             const GoalSpec &goal) {
    WidthAnalysis wa;
    const int T = trace.length();
    wa.tracked_per_step.assign(static_cast<std::size_t>(T), 0);

    // Goal pins: boolean conjuncts satisfied at the end of the trace.
    std::set<std::string> live;
    const FeatureVector &final_v = trace.vectors.back();
    for (const auto &c : goal.conjuncts) {
        if (c.op != ConstraintOp::IsTrue) continue;
        int i = final_v.index_of(c.feature);
        if (i >= 0 && final_v.values[static_cast<std::size_t>(i)].is_bool &&
            final_v.values[static_cast<std::size_t>(i)].value != 0)
            live.insert(c.feature);
    }

    for (int t = T - 1; t >= 0; --t) {
        const FeatureVector &before = trace.vectors[static_cast<std::size_t>(t)];
        const FeatureVector &after = trace.vectors[static_cast<std::size_t>(t + 1)];
        // Pins established by this step no longer constrain earlier steps.
        for (std::size_t i = 0; i < before.names.size(); ++i) {
            if (!before.values[i].is_bool) continue;
            if (before.values[i].value == 0 && after.values[i].value != 0)
                live.erase(before.names[i]);
        }
        const Action &a = trace.actions[static_cast<std::size_t>(t)];
        const WorldState &s = trace.states[static_cast<std::size_t>(t)];
        for (const auto &req : action_requirements(s, a))
            for (const auto &name : matching_features(s, roster, req)) live.insert(name);
        int dist_slot = (is_move(a.kind) || requires_adjacency(a.kind)) ? 1 : 0;
        wa.tracked_per_step[static_cast<std::size_t>(t)] =
            static_cast<int>(live.size()) + dist_slot;
    }

    for (const auto &span : trace.activations) {
        ActivationWidth aw;
        aw.rule_id = span.rule_id;
        aw.start_t = span.start_t;
        aw.end_t = span.end_t;
        aw.width = 0;  // zero-step spans
        for (int t = span.start_t; t < span.end_t; ++t)
            aw.width = std::max(aw.width, wa.tracked_per_step[static_cast<std::size_t>(t)]);
        wa.activations.push_back(aw);
        wa.instruction_width = std::max(wa.instruction_width, aw.width);
    }
    return wa;
}

int instruction_width(const RuleSet &rs, const WorldState &instance, int k_max) {
    Roster roster = roster_for_instance(instance);
    ValidationReport report = validate_ruleset(rs, instance, 400);
    if (!report.reachable || !report.terminating)
        throw ValidationRequired("rule set " + rs.task_id + " rank " +
                                 std::to_string(rs.rank) + " does not validate: " +
                                 (report.failure ? report.failure->reason : ""));
    OraclePolicy oracle;
    RunConfig cfg;
    cfg.max_steps = 400;
    Trace tr = run_instructed(instance, rs, roster, oracle, cfg);
    WidthAnalysis wa = analyze_widths(tr, roster, instance.goal);
    if (wa.instruction_width > k_max)
        throw WidthExceeded(k_max, "instruction width " +
                                       std::to_string(wa.instruction_width) +
                                       " exceeds k_max");
    return wa.instruction_width;
}

}  // namespace granbench
