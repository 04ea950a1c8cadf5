#include "granbench/instructor.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "granbench/tasks.hpp"

namespace granbench {

using ordered_json = nlohmann::ordered_json;

const char *ablation_name(AblationMode m) {
    switch (m) {
    case AblationMode::Full: return "full";
    case AblationMode::GoalOnly: return "goal_only";
    case AblationMode::None: return "none";
    }
    return "?";
}

AblationMode ablation_from_name(const std::string &name) {
    if (name == "full") return AblationMode::Full;
    if (name == "goal_only" || name == "goal") return AblationMode::GoalOnly;
    if (name == "none") return AblationMode::None;
    throw SchemaError("unknown ablation mode '" + name + "'");
}

const PhraseEntry &Lexicon::entry(const std::string &task_id,
                                  const std::string &feature) const {
    auto it = phrases.find(task_id + "/" + feature);
    if (it == phrases.end())
        throw MissingPhrase("no phrase entry for " + task_id + "/" + feature);
    return it->second;
}

Lexicon load_lexicon(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open lexicon " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ordered_json j = ordered_json::parse(buf.str());
    if (!j.contains("v") || j["v"].get<int>() != 1)
        throw SchemaError("unsupported lexicon schema version");
    Lexicon lex;
    for (const auto &t : j.at("entities")) lex.entity_terms.push_back(t.get<std::string>());
    for (const auto &t : j.at("verbs")) lex.verb_terms.push_back(t.get<std::string>());
    for (auto it = j.at("phrases").begin(); it != j.at("phrases").end(); ++it) {
        PhraseEntry e;
        const auto &v = it.value();
        e.cond_true = v.value("cond_true", "");
        e.cond_false = v.value("cond_false", "");
        e.cond_zero = v.value("cond_zero", "");
        e.cond_pos = v.value("cond_pos", "");
        e.eff_true = v.value("eff_true", "");
        e.eff_false = v.value("eff_false", "");
        e.eff_decrease = v.value("eff_decrease", "");
        e.eff_increase = v.value("eff_increase", "");
        lex.phrases[it.key()] = e;
    }
    return lex;
}

const Lexicon &default_lexicon() {
    static const Lexicon lex = load_lexicon(data_dir() + "/lexicon.json");
    return lex;
}

std::vector<Rule> applicable_rules(const RuleSet &rs, const FeatureVector &v) {
    std::vector<Rule> out;
    for (const auto &r : rs.rules)
        if (is_applicable(r, v)) out.push_back(r);
    return out;
}

InstructorState select_active(const RuleSet &rs, const Roster &roster,
                              const FeatureVector &v, const InstructorState &prev) {
    if (prev.active_rule) {
        const Rule *r = rs.find(*prev.active_rule);
        if (r && is_applicable(*r, v) &&
            !rule_complete(*r, roster, prev.activation_vector, v))
            return prev;  // sticky
    }
    bool interrupted = false;
    if (prev.active_rule) {
        const Rule *r = rs.find(*prev.active_rule);
        if (r && !is_applicable(*r, v) &&
            !rule_complete(*r, roster, prev.activation_vector, v))
            interrupted = true;  // condition broke before the effect held
    }
    for (const auto &rule : rs.rules) {
        if (!is_applicable(rule, v)) continue;
        if (zero_step(rule, roster, v)) continue;  // must immediately re-select
        InstructorState next;
        next.active_rule = rule.id;
        next.activation_vector = v;
        next.rule_calls = prev.rule_calls + 1;
        next.interrupted = interrupted;
        return next;
    }
    throw Stuck("no applicable rule with pending progress");
}

// --- NLG ---

namespace {

bool positive_polarity(ConstraintOp op) { return op != ConstraintOp::IsFalse; }

std::string condition_clause(const PhraseEntry &e, ConstraintOp op,
                             const std::string &task_feature) {
    std::string s;
    switch (op) {
    case ConstraintOp::IsTrue: s = e.cond_true; break;
    case ConstraintOp::IsFalse: s = e.cond_false; break;
    case ConstraintOp::EqZero: s = e.cond_zero; break;
    case ConstraintOp::GtZero: s = e.cond_pos; break;
    }
    if (s.empty()) throw MissingPhrase("no clause for " + task_feature);
    return s;
}

std::string effect_clause(const PhraseEntry &e, EffectOp op, const std::string &task_feature) {
    std::string s;
    switch (op) {
    case EffectOp::SetTrue: s = e.eff_true; break;
    case EffectOp::SetFalse: s = e.eff_false; break;
    case EffectOp::Decrease: s = e.eff_decrease; break;
    case EffectOp::Increase: s = e.eff_increase; break;
    case EffectOp::AnyBool:
    case EffectOp::AnyChange: return "";  // not verbalized
    }
    if (s.empty()) throw MissingPhrase("no effect phrase for " + task_feature);
    return s;
}

}  // namespace

Instruction realize(const Rule &rule, int step_index, const std::string &task_id,
                    int rank, const Lexicon &lex, RealizeTemplate tmpl) {
    std::vector<std::string> conds;
    std::vector<bool> polarity;
    for (const auto &c : rule.condition) {
        conds.push_back(condition_clause(lex.entry(task_id, c.feature), c.op,
                                         task_id + "/" + c.feature));
        polarity.push_back(positive_polarity(c.op));
    }
    std::vector<std::string> effects;
    for (const auto &e : rule.effect) {
        std::string s = effect_clause(lex.entry(task_id, e.feature), e.op,
                                      task_id + "/" + e.feature);
        if (!s.empty()) effects.push_back(s);
    }
    if (effects.empty())
        throw MissingPhrase("rule " + rule.id + " has no verbalizable effect");

    std::string cond_text;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (i > 0) {
            if (tmpl == RealizeTemplate::IfYou && polarity[i] != polarity[i - 1])
                cond_text += " but ";
            else if (i + 1 == conds.size())
                cond_text += " and ";
            else
                cond_text += ", ";
        }
        cond_text += conds[i];
    }
    std::string eff_text;
    for (std::size_t i = 0; i < effects.size(); ++i) {
        if (i > 0) eff_text += ", then ";
        eff_text += effects[i];
    }

    Instruction out;
    out.rule_id = rule.id;
    out.step_index = step_index;
    out.rank = rank;
    out.ablation = AblationMode::Full;
    if (tmpl == RealizeTemplate::AtStep) {
        out.text = "At step " + std::to_string(step_index) + ": When " + cond_text +
                   ", please " + eff_text + ".";
    } else {
        out.text = "If " + cond_text + ", " + eff_text + ".";
    }
    return out;
}

SurfaceMetrics surface_metrics(const Instruction &instr, const Lexicon &lex) {
    SurfaceMetrics m;
    if (instr.text.empty()) return m;
    // Token count: whitespace-separated words.
    {
        std::istringstream ss(instr.text);
        std::string w;
        while (ss >> w) ++m.tokens;
    }
    // Entity/verb counts: lowercase alpha words, matched exactly or with a
    // plural -s against the lexicon terms.
    std::vector<std::string> words;
    std::string cur;
    for (char c : instr.text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    auto matches = [](const std::string &word, const std::string &term) {
        return word == term || word == term + "s";
    };
    for (const auto &w : words) {
        for (const auto &t : lex.entity_terms)
            if (matches(w, t)) {
                ++m.entities;
                break;
            }
        for (const auto &t : lex.verb_terms)
            if (matches(w, t)) {
                ++m.verbs;
                break;
            }
    }
    return m;
}

Instruction ablate(const Instruction &instr, AblationMode mode,
                   const std::string &task_goal_text) {
    Instruction out = instr;
    out.ablation = mode;
    switch (mode) {
    case AblationMode::Full: break;
    case AblationMode::GoalOnly: out.text = task_goal_text; break;
    case AblationMode::None: out.text.clear(); break;
    }
    return out;
}

}  // namespace granbench
