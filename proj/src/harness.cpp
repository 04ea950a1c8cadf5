#include "granbench/harness.hpp"

#include <algorithm>
#include <cmath>

#include "granbench/stats_math.hpp"
#include "granbench/tasks.hpp"

namespace granbench {

const char *agent_kind_name(AgentKind k) {
    switch (k) {
    case AgentKind::Oracle: return "oracle";
    case AgentKind::RuleGreedy: return "rule_greedy";
    case AgentKind::EpsilonNoisy: return "epsilon_noisy";
    case AgentKind::Random: return "random";
    }
    return "?";
}

Agent agent_from_spec(const std::string &spec, std::uint64_t seed) {
    Agent a;
    a.seed = seed;
    if (spec == "oracle") {
        a.kind = AgentKind::Oracle;
    } else if (spec == "rule_greedy") {
        a.kind = AgentKind::RuleGreedy;
    } else if (spec == "random") {
        a.kind = AgentKind::Random;
    } else if (spec.rfind("noisy:", 0) == 0) {
        a.kind = AgentKind::EpsilonNoisy;
        a.epsilon = std::stod(spec.substr(6));
        if (a.epsilon < 0.0 || a.epsilon > 1.0)
            throw SchemaError("epsilon must lie in [0,1]");
    } else {
        throw SchemaError("unknown agent spec '" + spec + "'");
    }
    return a;
}

const char *outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Regression: return "regression";
    case Outcome::Stagnation: return "stagnation";
    case Outcome::Timeout: return "timeout";
    }
    return "?";
}

const char *failure_kind_name(FailureKind k) {
    switch (k) {
    case FailureKind::Regression: return "regression";
    case FailureKind::Stagnation: return "stagnation";
    case FailureKind::TimeoutOther: return "timeout_other";
    }
    return "?";
}

const char *horizon_bin_name(HorizonBin b) {
    switch (b) {
    case HorizonBin::H1to5: return "1-5";
    case HorizonBin::H6to10: return "6-10";
    case HorizonBin::H11to20: return "11-20";
    case HorizonBin::H21plus: return "21+";
    }
    return "?";
}

HorizonBin horizon_bin_of(int rule_calls) {
    if (rule_calls <= 5) return HorizonBin::H1to5;
    if (rule_calls <= 10) return HorizonBin::H6to10;
    if (rule_calls <= 20) return HorizonBin::H11to20;
    return HorizonBin::H21plus;
}

// --- Agent policies ---

namespace {

class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    Action choose(const WorldState &state, const Rule &, const FeatureVector &,
                  const Roster &, int) override {
        auto actions = legal_actions(state);
        return actions[static_cast<std::size_t>(rng_int(rng_, 0, static_cast<int>(actions.size()) - 1))];
    }

private:
    Rng rng_;
};

// One-step lookahead maximizing effect progress; deterministic tie-break on
// action order.
class RuleGreedyPolicy : public Policy {
public:
    Action choose(const WorldState &state, const Rule &rule,
                  const FeatureVector &activation_vector, const Roster &roster,
                  int) override {
        auto actions = legal_actions(state);
        FeatureVector now = eval_vector(state, roster);
        int base = progress_score(rule, roster, activation_vector, now);
        int best_score = base;
        Action best = actions.front();
        bool improved = false;
        for (const auto &a : actions) {
            FeatureVector v = eval_vector(step(state, a), roster);
            int sc = progress_score(rule, roster, activation_vector, v);
            if (sc > best_score) {
                best_score = sc;
                best = a;
                improved = true;
            }
        }
        return improved ? best : actions.front();
    }

private:
    static int progress_score(const Rule &rule, const Roster &roster,
                              const FeatureVector &v0, const FeatureVector &v) {
        int score = 0;
        for (const auto &e : rule.effect) {
            const FeatureValue &now = v.at(e.feature);
            switch (e.op) {
            case EffectOp::SetTrue: score += now.value != 0 ? 10 : 0; break;
            case EffectOp::SetFalse: score += now.value == 0 ? 10 : 0; break;
            case EffectOp::Decrease: {
                const FeatureValue &act = v0.at(e.feature);
                if (act.value != kInf && now.value != kInf)
                    score += act.value - now.value;
                break;
            }
            case EffectOp::Increase: {
                const FeatureValue &act = v0.at(e.feature);
                if (act.value != kInf && now.value != kInf)
                    score += now.value - act.value;
                break;
            }
            default: break;
            }
        }
        (void)roster;
        return score;
    }
};

class EpsilonNoisyPolicy : public Policy {
public:
    EpsilonNoisyPolicy(double eps, std::uint64_t seed, long budget)
        : eps_(eps), rng_(seed), oracle_(budget) {}
    Action choose(const WorldState &state, const Rule &rule,
                  const FeatureVector &activation_vector, const Roster &roster,
                  int ordinal) override {
        if (rng_unit(rng_) < eps_) {
            auto actions = legal_actions(state);
            return actions[static_cast<std::size_t>(rng_int(rng_, 0, static_cast<int>(actions.size()) - 1))];
        }
        // The oracle replans when the state diverges from its cached plan.
        return oracle_.choose(state, rule, activation_vector, roster, ordinal);
    }

private:
    double eps_;
    Rng rng_;
    OraclePolicy oracle_;
};

std::unique_ptr<Policy> make_policy(const Agent &agent) {
    switch (agent.kind) {
    case AgentKind::Oracle: return std::make_unique<OraclePolicy>();
    case AgentKind::RuleGreedy: return std::make_unique<RuleGreedyPolicy>();
    case AgentKind::EpsilonNoisy:
        return std::make_unique<EpsilonNoisyPolicy>(agent.epsilon, agent.seed, 200000L);
    case AgentKind::Random: return std::make_unique<RandomPolicy>(agent.seed);
    }
    throw SchemaError("bad agent kind");
}

std::string agent_label(const Agent &a) {
    if (a.kind == AgentKind::EpsilonNoisy)
        return "noisy:" + std::to_string(a.epsilon);
    return agent_kind_name(a.kind);
}

}  // namespace

Episode record_episode(const WorldState &instance, const RuleSet &rs,
                       const Agent &agent, int max_steps, AblationMode ablation) {
    Roster roster = roster_for_instance(instance);
    auto policy = make_policy(agent);
    RunConfig cfg;
    cfg.max_steps = max_steps;
    cfg.throw_on_stuck = false;  // harness mode: defects are recorded

    Episode ep;
    ep.task_id = instance.task_id;
    ep.rank = rs.rank;
    ep.agent = agent_label(agent);
    ep.seed = agent.seed;
    ep.goal = instance.goal;

    Trace tr;
    bool stuck_policy = false;
    try {
        tr = run_instructed(instance, rs, roster, *policy, cfg);
    } catch (const Stuck &) {
        stuck_policy = true;
    }
    if (stuck_policy) {
        ep.defect = true;
        ep.outcome = Outcome::Timeout;
        ep.rule_calls = 1;
        return ep;
    }
    ep.defect = tr.stuck;
    ep.rule_calls = std::max<std::size_t>(1, tr.activations.size());

    const TaskInfo &info = task_info(instance.task_id);
    const Lexicon &lex = default_lexicon();
    for (int t = 0; t < tr.length(); ++t) {
        // Locate the activation covering step t.
        const ActivationSpan *span = nullptr;
        for (const auto &sp : tr.activations)
            if (sp.start_t <= t && t < sp.end_t) span = &sp;
        EpisodeStep st;
        st.t = t;
        st.observation = render_observation(tr.states[static_cast<std::size_t>(t)]);
        st.vector = tr.vectors[static_cast<std::size_t>(t)];
        if (span) {
            const Rule *rule = rs.find(span->rule_id);
            Instruction ins = realize(*rule, t, instance.task_id, rs.rank, lex);
            st.instruction = ablate(ins, ablation, info.goal_text);
        }
        st.action = tr.actions[static_cast<std::size_t>(t)];
        ep.steps.push_back(std::move(st));
    }

    WidthAnalysis wa = analyze_widths(tr, roster, instance.goal);
    for (const auto &aw : wa.activations) ep.widths_seen.push_back(aw.width);

    if (tr.reached_goal) {
        ep.outcome = Outcome::Success;
    } else {
        ep.outcome = Outcome::Timeout;
        FailureKind fk = classify_failure(ep);
        if (fk == FailureKind::Regression) ep.outcome = Outcome::Regression;
        else if (fk == FailureKind::Stagnation) ep.outcome = Outcome::Stagnation;
    }
    return ep;
}

FailureKind classify_failure(const Episode &episode, int t_stall) {
    if (episode.steps.empty()) return FailureKind::TimeoutOther;
    // Regression: a previously satisfied goal conjunct becomes unsatisfied
    // later in the trace.
    for (const auto &c : episode.goal.conjuncts) {
        bool was_sat = false;
        for (const auto &st : episode.steps) {
            if (st.vector.index_of(c.feature) < 0) break;
            bool sat = constraint_holds(c, st.vector);
            if (was_sat && !sat) return FailureKind::Regression;
            was_sat = was_sat || sat;
        }
    }
    // Stagnation: identical feature vector over the trailing window.
    int n = static_cast<int>(episode.steps.size());
    if (n >= t_stall) {
        bool frozen = true;
        const FeatureVector &last = episode.steps[static_cast<std::size_t>(n - 1)].vector;
        for (int i = n - t_stall; i < n; ++i)
            if (!(episode.steps[static_cast<std::size_t>(i)].vector == last)) {
                frozen = false;
                break;
            }
        if (frozen) return FailureKind::Stagnation;
    }
    return FailureKind::TimeoutOther;
}

EvalResult run_eval(const Agent &agent, const std::vector<WorldState> &instances,
                    const RuleSet &rs, int max_steps, AblationMode ablation) {
    EvalResult res;
    const Lexicon &lex = default_lexicon();
    int successes = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        Agent a = agent;
        a.seed = derive_seed(agent.seed, i);  // per-episode seed split
        Episode ep = record_episode(instances[i], rs, a, max_steps, ablation);
        ep.instance_ref = rs.task_id + "#" + std::to_string(i);

        EvalRecord rec;
        rec.episode_ref = ep.instance_ref + "@rank" + std::to_string(rs.rank);
        rec.success = ep.outcome == Outcome::Success;
        rec.rule_calls = ep.rule_calls;
        rec.horizon_bin = horizon_bin_of(ep.rule_calls);
        double tok = 0, ent = 0, vrb = 0;
        int cnt = 0;
        for (const auto &st : ep.steps) {
            SurfaceMetrics m = surface_metrics(st.instruction, lex);
            tok += m.tokens;
            ent += m.entities;
            vrb += m.verbs;
            ++cnt;
        }
        if (cnt > 0) {
            rec.tokens = tok / cnt;
            rec.entities = ent / cnt;
            rec.verbs = vrb / cnt;
        }
        int wmax = 0;
        for (int w : ep.widths_seen) wmax = std::max(wmax, w);
        rec.width = wmax;
        if (!rec.success) rec.failure = classify_failure(ep);
        if (rec.success) ++successes;
        res.records.push_back(rec);
        res.episodes.push_back(std::move(ep));
    }
    res.sr = instances.empty() ? 0.0 : static_cast<double>(successes) / instances.size();
    return res;
}

// --- Statistics ---

double pearson(const std::vector<double> &xs, const std::vector<double> &ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DegenerateInput("pearson needs two series of equal length >= 2");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("constant series");
    return sxy / std::sqrt(sxx * syy);
}

std::map<HorizonBin, BinCorrelation> horizon_binned_correlation(
    const std::vector<EvalRecord> &records, const std::string &metric) {
    auto metric_of = [&](const EvalRecord &r) -> double {
        if (metric == "tokens") return r.tokens;
        if (metric == "entities") return r.entities;
        if (metric == "verbs") return r.verbs;
        if (metric == "width") return r.width;
        throw SchemaError("unknown metric '" + metric + "'");
    };
    std::map<HorizonBin, std::pair<std::vector<double>, std::vector<double>>> grouped;
    for (const auto &r : records) {
        grouped[r.horizon_bin].first.push_back(metric_of(r));
        grouped[r.horizon_bin].second.push_back(r.success ? 1.0 : 0.0);
    }
    std::map<HorizonBin, BinCorrelation> out;
    for (const auto &[bin, data] : grouped) {
        try {
            BinCorrelation bc;
            bc.r = pearson(data.first, data.second);
            bc.n = static_cast<int>(data.first.size());
            double t = bc.r * std::sqrt((bc.n - 2) / (1.0 - bc.r * bc.r));
            bc.p = student_t_two_sided(t, bc.n - 2);
            out[bin] = bc;
        } catch (const DegenerateInput &) {
            // degenerate bins are absent
        }
    }
    return out;
}

double binomial_test_one_sided(int k, int n, double p0) {
    if (k < 0 || k > n || p0 <= 0.0 || p0 >= 1.0)
        throw DegenerateInput("binomial_test_one_sided: bad arguments");
    long double tail = 0.0L;
    for (int i = k; i <= n; ++i) {
        long double lp = static_cast<long double>(log_choose(n, i)) +
                         static_cast<long double>(i) * std::log(static_cast<long double>(p0)) +
                         static_cast<long double>(n - i) *
                             std::log(static_cast<long double>(1.0 - p0));
        tail += std::exp(lp);
    }
    return static_cast<double>(std::min(tail, 1.0L));
}

std::pair<double, double> clopper_pearson(int k, int n, double alpha) {
    if (k < 0 || k > n || alpha <= 0.0 || alpha >= 1.0)
        throw DegenerateInput("clopper_pearson: bad arguments");
    double lo = 0.0, hi = 1.0;
    if (k > 0) lo = beta_quantile(alpha / 2.0, k, n - k + 1);
    if (k < n) hi = beta_quantile(1.0 - alpha / 2.0, k + 1, n - k);
    return {lo, hi};
}

}  // namespace granbench
