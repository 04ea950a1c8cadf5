#include "granbench/rules.hpp"

#include <algorithm>

namespace granbench {

const char *effect_op_name(EffectOp op) {
    switch (op) {
    case EffectOp::SetTrue: return "set_true";
    case EffectOp::SetFalse: return "set_false";
    case EffectOp::AnyBool: return "any";
    case EffectOp::Decrease: return "decrease";
    case EffectOp::Increase: return "increase";
    case EffectOp::AnyChange: return "any_change";
    }
    return "?";
}

EffectOp effect_op_from_name(const std::string &name) {
    if (name == "set_true") return EffectOp::SetTrue;
    if (name == "set_false") return EffectOp::SetFalse;
    if (name == "any") return EffectOp::AnyBool;
    if (name == "decrease") return EffectOp::Decrease;
    if (name == "increase") return EffectOp::Increase;
    if (name == "any_change") return EffectOp::AnyChange;
    throw SchemaError("unknown effect op '" + name + "'");
}

const Rule *RuleSet::find(const std::string &id) const {
    for (const auto &r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

bool is_applicable(const Rule &rule, const FeatureVector &v) {
    for (const auto &c : rule.condition)
        if (!constraint_holds(c, v)) return false;
    return true;
}

namespace {

// kInf-aware comparison: kInf acts as +infinity.
bool strictly_less(int a, int b) {
    if (a == kInf) return false;
    if (b == kInf) return true;
    return a < b;
}

}  // namespace

bool is_fulfilled(const Rule &rule, const FeatureVector &v_activation,
                  const FeatureVector &v_now) {
    for (const auto &e : rule.effect) {
        const FeatureValue &now = v_now.at(e.feature);
        switch (e.op) {
        case EffectOp::SetTrue:
            if (!(now.is_bool && now.value != 0)) return false;
            break;
        case EffectOp::SetFalse:
            if (!(now.is_bool && now.value == 0)) return false;
            break;
        case EffectOp::Decrease: {
            const FeatureValue &act = v_activation.at(e.feature);
            if (!strictly_less(now.value, act.value)) return false;
            break;
        }
        case EffectOp::Increase: {
            const FeatureValue &act = v_activation.at(e.feature);
            if (!strictly_less(act.value, now.value)) return false;
            break;
        }
        case EffectOp::AnyBool:
        case EffectOp::AnyChange:
            break;  // vacuously satisfied
        }
    }
    return true;
}

namespace {

FeatureKind kind_of(const Roster &roster, const std::string &feature) {
    for (const auto &f : roster)
        if (f.name == feature) return f.kind;
    throw UnknownFeature("feature '" + feature + "' not in roster");
}

}  // namespace

bool rule_complete(const Rule &rule, const Roster &roster,
                   const FeatureVector &v_activation, const FeatureVector &v_now) {
    for (const auto &e : rule.effect) {
        const FeatureValue &now = v_now.at(e.feature);
        switch (e.op) {
        case EffectOp::SetTrue:
            if (!(now.is_bool && now.value != 0)) return false;
            break;
        case EffectOp::SetFalse:
            if (!(now.is_bool && now.value == 0)) return false;
            break;
        case EffectOp::Decrease: {
            if (kind_of(roster, e.feature) == FeatureKind::DistanceToNearest) {
                // "Approach" runs to adjacency.
                if (now.value != 0) return false;
            } else {
                const FeatureValue &act = v_activation.at(e.feature);
                if (!strictly_less(now.value, act.value)) return false;
            }
            break;
        }
        case EffectOp::Increase: {
            const FeatureValue &act = v_activation.at(e.feature);
            if (!strictly_less(act.value, now.value)) return false;
            break;
        }
        case EffectOp::AnyBool:
        case EffectOp::AnyChange:
            break;
        }
    }
    return true;
}

bool zero_step(const Rule &rule, const Roster &roster, const FeatureVector &v) {
    return rule_complete(rule, roster, v, v);
}

std::vector<Constraint> maintained_context(const Rule &rule) {
    std::vector<Constraint> out;
    for (const auto &c : rule.condition) {
        if (c.op != ConstraintOp::IsTrue && c.op != ConstraintOp::IsFalse) continue;
        bool in_effect = false;
        for (const auto &e : rule.effect)
            if (e.feature == c.feature) in_effect = true;
        if (!in_effect) out.push_back(c);
    }
    return out;
}

RuleSet merge_rules(const RuleSet &parent, const std::vector<MergeGroup> &groups,
                    const Roster &roster) {
    auto roster_has = [&](const std::string &name) {
        for (const auto &f : roster)
            if (f.name == name) return true;
        return false;
    };
    auto parent_index = [&](const std::string &id) -> int {
        for (std::size_t i = 0; i < parent.rules.size(); ++i)
            if (parent.rules[i].id == id) return static_cast<int>(i);
        return -1;
    };

    std::vector<bool> covered(parent.rules.size(), false);
    std::vector<std::pair<int, const MergeGroup *>> placed;  // (first parent idx, group)
    for (const auto &g : groups) {
        if (g.parents.empty()) throw NonContiguousSegment("group " + g.id + " is empty");
        int first = parent_index(g.parents.front());
        if (first < 0)
            throw NonContiguousSegment("group " + g.id + " names unknown rule " +
                                       g.parents.front());
        for (std::size_t i = 0; i < g.parents.size(); ++i) {
            int idx = parent_index(g.parents[i]);
            if (idx != first + static_cast<int>(i))
                throw NonContiguousSegment("group " + g.id +
                                           " is not a contiguous run of parent rules");
            if (covered[static_cast<std::size_t>(idx)])
                throw NonContiguousSegment("rule " + g.parents[i] + " covered twice");
            covered[static_cast<std::size_t>(idx)] = true;
        }
        for (const auto &c : g.condition)
            if (!roster_has(c.feature))
                throw InterfaceReferencesUnknownFeature(g.id + " condition: " + c.feature);
        for (const auto &e : g.effect)
            if (!roster_has(e.feature))
                throw InterfaceReferencesUnknownFeature(g.id + " effect: " + e.feature);
        if (g.effect.empty()) throw SchemaError("group " + g.id + " has empty effect");
        placed.push_back({first, &g});
    }
    std::sort(placed.begin(), placed.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });

    RuleSet child;
    child.task_id = parent.task_id;
    child.rank = parent.rank + 1;
    std::size_t i = 0;
    auto next_group = placed.begin();
    while (i < parent.rules.size()) {
        if (next_group != placed.end() &&
            next_group->first == static_cast<int>(i)) {
            const MergeGroup &g = *next_group->second;
            Rule macro;
            macro.id = g.id;
            macro.condition = g.condition;
            macro.effect = g.effect;
            macro.template_hint = g.template_hint;
            child.rules.push_back(macro);
            child.lineage.push_back({g.id, g.parents});
            i += g.parents.size();
            ++next_group;
        } else {
            // Uncovered parent rules carry over (identity merge).
            const Rule &r = parent.rules[i];
            child.rules.push_back(r);
            child.lineage.push_back({r.id, {r.id}});
            ++i;
        }
    }
    return child;
}

}  // namespace granbench
