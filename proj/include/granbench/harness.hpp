#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granbench/exec.hpp"
#include "granbench/width.hpp"

namespace granbench {

enum class AgentKind { Oracle, RuleGreedy, EpsilonNoisy, Random };

const char *agent_kind_name(AgentKind k);

struct Agent {
    AgentKind kind = AgentKind::Oracle;
    double epsilon = 0.0;  // EpsilonNoisy only
    std::uint64_t seed = 0;
};

Agent agent_from_spec(const std::string &spec, std::uint64_t seed);  // "oracle", "noisy:0.3", ...

enum class Outcome { Success, Regression, Stagnation, Timeout };
const char *outcome_name(Outcome o);

struct EpisodeStep {
    int t = 0;
    ObservationGrid observation;
    FeatureVector vector;
    Instruction instruction;
    Action action;
};

struct Episode {
    std::string instance_ref;
    std::string task_id;
    int rank = 0;
    std::string agent;
    std::uint64_t seed = 0;
    std::vector<EpisodeStep> steps;
    int rule_calls = 0;
    Outcome outcome = Outcome::Timeout;
    std::vector<int> widths_seen;  // per-activation widths
    GoalSpec goal;
    bool defect = false;  // instructor got Stuck under harness mode
};

// --- Failure taxonomy ---

enum class FailureKind { Regression, Stagnation, TimeoutOther };
const char *failure_kind_name(FailureKind k);

// Precondition: episode.outcome != Success. Regression when a previously
// satisfied goal conjunct becomes unsatisfied later in the trace; else
// stagnation when the feature vector is unchanged over the final t_stall
// steps; else timeout_other.
FailureKind classify_failure(const Episode &episode, int t_stall = 10);

// --- Evaluation ---

enum class HorizonBin { H1to5, H6to10, H11to20, H21plus };
const char *horizon_bin_name(HorizonBin b);
HorizonBin horizon_bin_of(int rule_calls);

struct EvalRecord {
    std::string episode_ref;
    bool success = false;
    HorizonBin horizon_bin = HorizonBin::H1to5;
    double tokens = 0;    // per-episode means
    double entities = 0;
    double verbs = 0;
    double width = 0;     // per-episode max
    int rule_calls = 0;
    std::optional<FailureKind> failure;
};

struct EvalResult {
    double sr = 0.0;
    std::vector<EvalRecord> records;
    std::vector<Episode> episodes;
};

EvalResult run_eval(const Agent &agent, const std::vector<WorldState> &instances,
                    const RuleSet &rs, int max_steps,
                    AblationMode ablation = AblationMode::Full);

// Single-episode recording with an arbitrary agent (harness mode: a Stuck
// instructor is recorded as an episode defect, not a crash).
Episode record_episode(const WorldState &instance, const RuleSet &rs,
                       const Agent &agent, int max_steps,
                       AblationMode ablation = AblationMode::Full);

// --- Statistics ---

// Standard sample Pearson r. Throws DegenerateInput on constant series or
// length < 2.
double pearson(const std::vector<double> &xs, const std::vector<double> &ys);

struct BinCorrelation {
    double r = 0.0;
    int n = 0;
    double p = 0.0;  // two-sided t-test p-value
};

// Per-bin point-biserial Pearson between the metric and success; degenerate
// bins are absent from the map.
std::map<HorizonBin, BinCorrelation> horizon_binned_correlation(
    const std::vector<EvalRecord> &records, const std::string &metric);

// Exact upper-tail P(X >= k | n, p0) by summation.
double binomial_test_one_sided(int k, int n, double p0);

// Exact two-sided (1 - alpha) interval via the Beta-quantile characterization.
std::pair<double, double> clopper_pearson(int k, int n, double alpha);

}  // namespace granbench
