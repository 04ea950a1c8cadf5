#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granbench/rules.hpp"

namespace granbench {

enum class AblationMode { Full, GoalOnly, None };

const char *ablation_name(AblationMode m);
AblationMode ablation_from_name(const std::string &name);

struct Instruction {
    std::string text;
    std::string rule_id;
    int step_index = 0;  // env timestep of issue
    int rank = 0;
    AblationMode ablation = AblationMode::Full;
};

struct InstructorState {
    std::optional<std::string> active_rule;
    FeatureVector activation_vector;
    int rule_calls = 0;
    bool interrupted = false;  // last re-selection was a condition break
};

// --- Phrase lexicon ---
//
// Data-driven NLG: per feature, clauses for each condition polarity and
// phrases for each determinate effect op; any-atoms are not verbalized.
struct PhraseEntry {
    std::string cond_true;    // "you are holding the rag"
    std::string cond_false;   // "the rag is not yet soaked"
    std::string cond_zero;    // "you are at the rag"
    std::string cond_pos;     // "the count of ... is above 0"
    std::string eff_true;     // "soak the rag"
    std::string eff_false;    // "put the rag on the floor"
    std::string eff_decrease; // "move toward the rag" / "reduce the count of ..."
    std::string eff_increase;
};

struct Lexicon {
    // key: task_id + "/" + feature name
    std::map<std::string, PhraseEntry> phrases;
    std::vector<std::string> entity_terms;
    std::vector<std::string> verb_terms;

    const PhraseEntry &entry(const std::string &task_id,
                             const std::string &feature) const;  // throws MissingPhrase
};

Lexicon load_lexicon(const std::string &path);
const Lexicon &default_lexicon();  // loaded from the shipped data directory

enum class RealizeTemplate { AtStep, IfYou };

// --- Operations ---

std::vector<Rule> applicable_rules(const RuleSet &rs, const FeatureVector &v);

// Sticky-first-applicable selection with fresh activation per completed rule.
// Throws Stuck when no rule applies at a non-goal vector.
InstructorState select_active(const RuleSet &rs, const Roster &roster,
                              const FeatureVector &v, const InstructorState &prev);

// Deterministic template realization. AtStep (Table-10 form, default):
// "At step {i}: When {conds}, please {effects}." IfYou:
// "If {conds}, {effects}." Adjacent condition clauses of opposite polarity
// join with " but ", otherwise with commas and a final " and ".
Instruction realize(const Rule &rule, int step_index, const std::string &task_id,
                    int rank, const Lexicon &lex,
                    RealizeTemplate tmpl = RealizeTemplate::AtStep);

struct SurfaceMetrics {
    int tokens = 0;
    int entities = 0;
    int verbs = 0;
};

SurfaceMetrics surface_metrics(const Instruction &instr, const Lexicon &lex);

Instruction ablate(const Instruction &instr, AblationMode mode,
                   const std::string &task_goal_text);

}  // namespace granbench
