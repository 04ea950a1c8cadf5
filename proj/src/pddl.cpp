#include "granbench/pddl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <sstream>

namespace granbench {

namespace {

std::string cell_name(const Cell &c) {
    return "c_" + std::to_string(c.col) + "_" + std::to_string(c.row);
}

std::string lit(const std::string &pred, std::initializer_list<std::string> args) {
    std::string s = "(" + pred;
    for (const auto &a : args) s += " " + a;
    return s + ")";
}

// Positive predicates that belong to the boolean projection; complements and
// static geometry are export plumbing.
bool projected(const std::string &pred) {
    return pred == "at-agent" || pred == "at" || pred == "opened" || pred == "toggled" ||
           pred == "soaked" || pred == "cleaned" || pred == "onfloor" ||
           pred == "carrying" || pred == "inside";
}

std::vector<Constraint> goal_literals(const WorldState &s,
                                      std::vector<std::string> &out) {
    // Returns via `out` the canonical goal literal strings.
    const std::string &task = s.task_id;
    auto ids_of = [&](const std::string &type) {
        std::vector<std::string> ids;
        for (const auto &o : s.objects)
            if (o.type == type) ids.push_back(o.id);
        return ids;
    };
    if (task == "opening_packages") {
        for (const auto &id : ids_of("package")) out.push_back(lit("opened", {id}));
    } else if (task == "cleaning_shoes") {
        for (const auto &id : ids_of("shoe")) out.push_back(lit("cleaned", {id}));
        for (const auto &id : ids_of("rag")) out.push_back(lit("onfloor", {id}));
    } else if (task == "throwing_away_leftovers") {
        auto cans = ids_of("ashcan");
        if (cans.size() != 1)
            throw UnsupportedConstruct(
                "goal 'every hamburger inside some ashcan' needs a disjunction unless the "
                "instance has exactly one ashcan");
        for (const auto &id : ids_of("hamburger")) out.push_back(lit("inside", {id, cans[0]}));
    } else if (task == "putting_away_dishes") {
        auto cabs = ids_of("cabinet");
        if (cabs.size() != 1)
            throw UnsupportedConstruct(
                "goal 'every plate inside some cabinet' needs a disjunction unless the "
                "instance has exactly one cabinet");
        for (const auto &id : ids_of("plate")) out.push_back(lit("inside", {id, cabs[0]}));
    } else if (task == "laying_wood_floors") {
        throw UnsupportedConstruct(
            "goal counts adjacency between sheets (count_isolated = 0); count-based goals "
            "are outside the STRIPS boolean fragment");
    } else {
        throw UnsupportedConstruct("no PDDL goal translation for task " + task);
    }
    return {};
}

}  // namespace

PddlModel model_of_instance(const WorldState &s) {
    PddlModel m;
    for (const auto &o : s.objects) m.object_types[o.id] = o.type;
    m.init.insert(lit("at-agent", {cell_name(s.agent_pos)}));
    for (const auto &o : s.objects) {
        if (s.carrying(o.id)) {
            m.init.insert(lit("carrying", {o.id}));
        } else if (o.container) {
            m.init.insert(lit("inside", {o.id, *o.container}));
        } else {
            m.init.insert(lit("at", {o.id, cell_name(o.pos)}));
        }
        if (o.flag(Flag::Opened)) m.init.insert(lit("opened", {o.id}));
        if (o.flag(Flag::Toggled)) m.init.insert(lit("toggled", {o.id}));
        if (o.flag(Flag::Soaked)) m.init.insert(lit("soaked", {o.id}));
        if (o.flag(Flag::Cleaned)) m.init.insert(lit("cleaned", {o.id}));
        if (o.flag(Flag::OnFloor) && !s.carrying(o.id) && !o.container)
            m.init.insert(lit("onfloor", {o.id}));
    }
    std::vector<std::string> goals;
    goal_literals(s, goals);
    for (const auto &g : goals) m.goal.insert(g);
    return m;
}

PddlExport export_pddl(const WorldState &s) {
    // Goal translation first: unsupported goals must fail before any text is
    // produced.
    std::vector<std::string> goals;
    goal_literals(s, goals);

    PddlExport out;
    std::string task_dashed = s.task_id;
    std::replace(task_dashed.begin(), task_dashed.end(), '_', '-');
    out.domain_name = "granbench-" + task_dashed;
    out.problem_name = task_dashed + "-instance";

    bool uses_items = false, uses_furniture = false;
    for (const auto &o : s.objects)
        (object_type(o.type).furniture ? uses_furniture : uses_items) = true;

    // --- Domain ---
    std::ostringstream d;
    d << "(define (domain " << out.domain_name << ")\n";
    d << "  (:requirements :strips :typing)\n";
    d << "  (:types cell locatable - object item furniture - locatable)\n";
    d << "  (:predicates\n"
         "    (at-agent ?c - cell)\n"
         "    (passable ?c - cell)\n"
         "    (adjacent ?a - cell ?b - cell)\n"
         "    (reachable ?a - cell ?b - cell)\n"
         "    (at ?o - locatable ?c - cell)\n"
         "    (carrying ?o - item)\n"
         "    (handempty)\n"
         "    (loose ?o - item)\n"
         "    (inside ?o - item ?f - furniture)\n"
         "    (opened ?o - locatable)\n"
         "    (closed ?o - locatable)\n"
         "    (toggled ?o - locatable)\n"
         "    (off ?o - locatable)\n"
         "    (soaked ?o - locatable)\n"
         "    (dry ?o - locatable)\n"
         "    (cleaned ?o - locatable)\n"
         "    (stained ?o - locatable)\n"
         "    (onfloor ?o - locatable))\n";
    d << "  (:action move\n"
         "    :parameters (?from - cell ?to - cell)\n"
         "    :precondition (and (at-agent ?from) (adjacent ?from ?to) (passable ?to))\n"
         "    :effect (and (at-agent ?to) (not (at-agent ?from))))\n";
    if (uses_items) {
        d << "  (:action pickup\n"
             "    :parameters (?o - item ?a - cell ?b - cell)\n"
             "    :precondition (and (handempty) (loose ?o) (at-agent ?a) (at ?o ?b) "
             "(reachable ?a ?b))\n"
             "    :effect (and (carrying ?o) (not (handempty)) (not (at ?o ?b)) "
             "(not (onfloor ?o))))\n";
        d << "  (:action drop\n"
             "    :parameters (?o - item ?c - cell)\n"
             "    :precondition (and (carrying ?o) (at-agent ?c))\n"
             "    :effect (and (at ?o ?c) (onfloor ?o) (handempty) (not (carrying ?o))))\n";
    }
    if (s.task_id == "opening_packages" || s.task_id == "putting_away_dishes") {
        d << "  (:action open\n"
             "    :parameters (?o - locatable ?a - cell ?b - cell)\n"
             "    :precondition (and (closed ?o) (at-agent ?a) (at ?o ?b) (reachable ?a ?b))\n"
             "    :effect (and (opened ?o) (not (closed ?o))))\n";
    }
    if (s.task_id == "cleaning_shoes") {
        d << "  (:action toggle-on\n"
             "    :parameters (?o - furniture ?a - cell ?b - cell)\n"
             "    :precondition (and (off ?o) (at-agent ?a) (at ?o ?b) (reachable ?a ?b))\n"
             "    :effect (and (toggled ?o) (not (off ?o))))\n";
        d << "  (:action soak\n"
             "    :parameters (?r - item ?s - furniture ?a - cell ?b - cell)\n"
             "    :precondition (and (carrying ?r) (dry ?r) (toggled ?s) (at-agent ?a) "
             "(at ?s ?b) (reachable ?a ?b))\n"
             "    :effect (and (soaked ?r) (not (dry ?r))))\n";
        d << "  (:action clean\n"
             "    :parameters (?x - item ?r - item ?a - cell ?b - cell)\n"
             "    :precondition (and (carrying ?r) (soaked ?r) (stained ?x) (at-agent ?a) "
             "(at ?x ?b) (reachable ?a ?b))\n"
             "    :effect (and (cleaned ?x) (not (stained ?x))))\n";
    }
    if (s.task_id == "throwing_away_leftovers") {
        d << "  (:action put-inside\n"
             "    :parameters (?o - item ?f - furniture ?a - cell ?b - cell)\n"
             "    :precondition (and (carrying ?o) (at-agent ?a) (at ?f ?b) (reachable ?a ?b))\n"
             "    :effect (and (inside ?o ?f) (handempty) (not (carrying ?o)) "
             "(not (loose ?o))))\n";
    }
    if (s.task_id == "putting_away_dishes") {
        d << "  (:action put-inside-open\n"
             "    :parameters (?o - item ?f - furniture ?a - cell ?b - cell)\n"
             "    :precondition (and (carrying ?o) (opened ?f) (at-agent ?a) (at ?f ?b) "
             "(reachable ?a ?b))\n"
             "    :effect (and (inside ?o ?f) (handempty) (not (carrying ?o)) "
             "(not (loose ?o))))\n";
    }
    (void)uses_furniture;
    d << ")\n";
    out.domain = d.str();

    // --- Problem ---
    std::ostringstream p;
    p << "(define (problem " << out.problem_name << ")\n";
    p << "  (:domain " << out.domain_name << ")\n";
    p << "  (:objects\n";
    p << "   ";
    for (int r = 0; r < s.grid_height; ++r)
        for (int c = 0; c < s.grid_width; ++c) p << " " << cell_name({c, r});
    p << " - cell\n";
    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto &o : s.objects) by_type[o.type].push_back(o.id);
    for (const auto &[type, ids] : by_type) {
        p << "   ";
        for (const auto &id : ids) p << " " << id;
        p << " - " << (object_type(type).furniture ? "furniture" : "item") << "\n";
    }
    p << "  )\n";
    p << "  (:init\n";
    PddlModel m = model_of_instance(s);
    for (const auto &l : m.init) p << "    " << l << "\n";
    // Complements and statics.
    for (const auto &o : s.objects) {
        if (flag_applicable(o.type, Flag::Opened) && !o.flag(Flag::Opened))
            p << "    " << lit("closed", {o.id}) << "\n";
        if (flag_applicable(o.type, Flag::Toggled) && !o.flag(Flag::Toggled))
            p << "    " << lit("off", {o.id}) << "\n";
        if (flag_applicable(o.type, Flag::Soaked) && !o.flag(Flag::Soaked))
            p << "    " << lit("dry", {o.id}) << "\n";
        if (flag_applicable(o.type, Flag::Cleaned) && !o.flag(Flag::Cleaned))
            p << "    " << lit("stained", {o.id}) << "\n";
        if (!object_type(o.type).furniture && !o.container && !s.carrying(o.id))
            p << "    " << lit("loose", {o.id}) << "\n";
    }
    if (s.carried.empty()) p << "    (handempty)\n";
    for (int r = 0; r < s.grid_height; ++r)
        for (int c = 0; c < s.grid_width; ++c) {
            Cell cc{c, r};
            if (!s.furniture_at(cc)) p << "    " << lit("passable", {cell_name(cc)}) << "\n";
            const std::array<Cell, 4> nbrs = {Cell{c, r - 1}, Cell{c + 1, r}, Cell{c, r + 1},
                                              Cell{c - 1, r}};
            for (const auto &nb : nbrs)
                if (s.in_bounds(nb))
                    p << "    " << lit("adjacent", {cell_name(cc), cell_name(nb)}) << "\n";
            p << "    " << lit("reachable", {cell_name(cc), cell_name(cc)}) << "\n";
            for (const auto &nb : nbrs)
                if (s.in_bounds(nb))
                    p << "    " << lit("reachable", {cell_name(cc), cell_name(nb)}) << "\n";
        }
    p << "  )\n";
    p << "  (:goal (and";
    for (const auto &g : goals) p << " " << g;
    p << "))\n";
    p << ")\n";
    out.problem = p.str();
    return out;
}

// --- Parser (s-expression subset, enough to round-trip our own output) ---

namespace {

struct Sexp {
    std::string atom;
    std::vector<Sexp> children;
    bool is_atom() const { return children.empty() && !atom.empty(); }
};

struct Tokenizer {
    const std::string &text;
    std::size_t pos = 0;

    std::string next() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) return "";
        if (text[pos] == '(' || text[pos] == ')') return std::string(1, text[pos++]);
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        return text.substr(start, pos - start);
    }
};

Sexp parse_sexp(Tokenizer &tz) {
    std::string tok = tz.next();
    if (tok.empty()) throw SchemaError("pddl: unexpected end of input");
    if (tok == "(") {
        Sexp node;
        while (true) {
            std::size_t save = tz.pos;
            std::string peek = tz.next();
            if (peek.empty()) throw SchemaError("pddl: unbalanced parenthesis");
            if (peek == ")") break;
            tz.pos = save;
            node.children.push_back(parse_sexp(tz));
        }
        return node;
    }
    if (tok == ")") throw SchemaError("pddl: stray ')'");
    Sexp leaf;
    leaf.atom = tok;
    return leaf;
}

std::string literal_string(const Sexp &s) {
    std::string out = "(" + s.children[0].atom;
    for (std::size_t i = 1; i < s.children.size(); ++i) out += " " + s.children[i].atom;
    return out + ")";
}

}  // namespace

PddlModel parse_pddl_problem(const std::string &text) {
    Tokenizer tz{text};
    Sexp root = parse_sexp(tz);
    if (root.children.empty() || root.children[0].atom != "define")
        throw SchemaError("pddl: expected (define ...)");
    PddlModel m;
    for (const auto &section : root.children) {
        if (section.children.empty()) continue;
        const std::string &head = section.children[0].atom;
        if (head == ":objects") {
            std::vector<std::string> pending;
            for (std::size_t i = 1; i < section.children.size(); ++i) {
                const std::string &tok = section.children[i].atom;
                if (tok == "-") {
                    const std::string &type = section.children[++i].atom;
                    if (type != "cell")
                        for (const auto &id : pending) m.object_types[id] = type;
                    pending.clear();
                } else {
                    pending.push_back(tok);
                }
            }
        } else if (head == ":init") {
            for (std::size_t i = 1; i < section.children.size(); ++i) {
                const Sexp &l = section.children[i];
                if (!l.children.empty() && projected(l.children[0].atom))
                    m.init.insert(literal_string(l));
            }
        } else if (head == ":goal") {
            const Sexp &g = section.children[1];
            if (!g.children.empty() && g.children[0].atom == "and") {
                for (std::size_t i = 1; i < g.children.size(); ++i)
                    m.goal.insert(literal_string(g.children[i]));
            } else {
                m.goal.insert(literal_string(g));
            }
        }
    }
    // Item/furniture markers collapse to the concrete types recorded by the
    // exporter's object sections; resolve through the instance's naming
    // convention (<type><index>).
    for (auto &[id, type] : m.object_types) {
        if (type == "item" || type == "furniture") {
            std::string base = id;
            while (!base.empty() && std::isdigit(static_cast<unsigned char>(base.back())))
                base.pop_back();
            type = base;
        }
    }
    return m;
}

}  // namespace granbench
