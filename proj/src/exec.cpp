#include "granbench/exec.hpp"

#include <json.hpp>

#include "granbench/tasks.hpp"

namespace granbench {

Trace run_instructed(const WorldState &instance, const RuleSet &rs,
                     const Roster &roster, Policy &policy, const RunConfig &cfg) {
    Trace tr;
    WorldState s = instance;
    tr.states.push_back(s);
    tr.vectors.push_back(eval_vector(s, roster));
    InstructorState ist;

    for (int t = 0; t < cfg.max_steps; ++t) {
        const FeatureVector &v = tr.vectors.back();
        if (goal_holds(s.goal, v)) {
            tr.reached_goal = true;
            break;
        }
        InstructorState next;
        try {
            next = select_active(rs, roster, v, ist);
        } catch (const Stuck &) {
            tr.stuck = true;
            tr.stuck_step = t;
            if (cfg.throw_on_stuck) throw;
            break;
        }
        if (next.rule_calls != ist.rule_calls) {
            if (!tr.activations.empty()) tr.activations.back().end_t = t;
            ActivationSpan span;
            span.rule_id = *next.active_rule;
            span.start_t = t;
            span.end_t = t;
            span.activation_vector = v;
            span.interrupted = next.interrupted;
            tr.activations.push_back(span);
        }
        ist = next;
        const Rule *rule = rs.find(*ist.active_rule);
        Action a = policy.choose(s, *rule, ist.activation_vector, roster, ist.rule_calls);
        s = step(s, a);
        tr.actions.push_back(a);
        tr.states.push_back(s);
        tr.vectors.push_back(eval_vector(s, roster));
        tr.activations.back().end_t = t + 1;
    }
    if (!tr.reached_goal && !tr.stuck)
        tr.reached_goal = goal_holds(s.goal, tr.vectors.back());
    return tr;
}

Action OraclePolicy::choose(const WorldState &state, const Rule &active_rule,
                            const FeatureVector &activation_vector, const Roster &roster,
                            int activation_ordinal) {
    bool need_plan = activation_ordinal != cached_ordinal_ || cursor_ >= plan_.size() ||
                     state_hash(state) != expected_hash_;
    if (need_plan) {
        Subproblem sub = make_rule_subproblem(state, active_rule, roster, budget_);
        // The fulfillment baseline stays the activation-time vector even when
        // replanning mid-activation (e.g. after a noisy action).
        Rule r = active_rule;
        Roster ros = roster;
        FeatureVector v0 = activation_vector;
        std::vector<Constraint> ctx = maintained_context(active_rule);
        sub.activation_vector = v0;
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
        Plan plan = bfws_solve(sub);
        if (!plan.solved)
            throw Stuck("oracle: effect of rule " + active_rule.id +
                        " unreachable from the current state");
        plan_ = plan.actions;
        cursor_ = 0;
        cached_ordinal_ = activation_ordinal;
    }
    Action a = plan_[cursor_++];
    expected_hash_ = state_hash(step(state, a));
    return a;
}

namespace {

std::string brief_state_json(const WorldState &s) {
    nlohmann::ordered_json j;
    j["step"] = s.step;
    j["agent"] = {s.agent_pos.col, s.agent_pos.row};
    nlohmann::ordered_json objs = nlohmann::ordered_json::array();
    for (const auto &o : s.objects) {
        nlohmann::ordered_json jo;
        jo["id"] = o.id;
        jo["pos"] = {o.pos.col, o.pos.row};
        jo["flags"] = o.flags;
        objs.push_back(jo);
    }
    j["objects"] = objs;
    return j.dump();
}

}  // namespace

ValidationReport validate_ruleset(const RuleSet &rs, const WorldState &instance,
                                  int budget) {
    ValidationReport report;
    report.task_id = rs.task_id;
    report.rank = rs.rank;
    Roster roster = roster_for_instance(instance);
    OraclePolicy oracle;
    RunConfig cfg;
    cfg.max_steps = budget;
    cfg.throw_on_stuck = false;

    Trace tr;
    try {
        tr = run_instructed(instance, rs, roster, oracle, cfg);
    } catch (const BudgetExceeded &e) {
        // Budget exhausted inside a subgoal solve: distinct from a
        // terminating=false verdict.
        throw PlannerTimeout(e.what());
    } catch (const Stuck &e) {
        // Oracle-unreachable effect surfaces as Stuck from the policy.
        report.reachable = false;
        report.terminating = false;
        report.failure = ActivationFailure{0, "", e.what(), ""};
        return report;
    }

    report.steps = tr.length();
    report.rule_calls = static_cast<int>(tr.activations.size());
    for (const auto &span : tr.activations) report.activation_counts[span.rule_id]++;
    report.reachable = !tr.stuck;
    report.terminating = tr.reached_goal;
    if (tr.stuck) {
        ActivationFailure f;
        f.step = tr.stuck_step;
        f.rule_id = tr.activations.empty() ? "" : tr.activations.back().rule_id;
        f.reason = "no applicable rule before goal";
        f.state_json = brief_state_json(tr.states[static_cast<std::size_t>(tr.stuck_step)]);
        report.failure = f;
    } else if (!tr.reached_goal) {
        ActivationFailure f;
        f.step = tr.length();
        f.rule_id = tr.activations.empty() ? "" : tr.activations.back().rule_id;
        f.reason = "step budget exhausted before goal";
        f.state_json = brief_state_json(tr.states.back());
        report.failure = f;
    }
    return report;
}

}  // namespace granbench
