#include "granbench/tasks.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "granbench/rules.hpp"

#ifndef GRANBENCH_DATA_DIR
#define GRANBENCH_DATA_DIR "data"
#endif

namespace granbench {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string g_data_dir;

const std::vector<TaskInfo> &task_table() {
    static const std::vector<TaskInfo> table = {
        {"opening_packages", "n_packages", {{"n_packages", 2}}, {{"n_packages", 1}},
         {{"n_packages", 6}}, "Open every package.", true, {0, 1}},
        {"cleaning_shoes", "k", {{"k", 2}}, {{"k", 1}}, {{"k", 4}},
         "Make every shoe clean and leave the rag on the floor.", true, {0, 1, 2, 3}},
        {"laying_wood_floors", "n_sheets", {{"n_sheets", 3}}, {{"n_sheets", 2}},
         {{"n_sheets", 5}},
         "Lay every plywood sheet on the floor, each touching at least one other sheet.",
         false, {0, 1, 2}},
        {"throwing_away_leftovers", "n_burgers", {{"n_burgers", 2}}, {{"n_burgers", 1}},
         {{"n_burgers", 4}}, "Throw away every hamburger by placing it in a trash can.",
         true, {0, 1, 2}},
        {"putting_away_dishes", "n_plates", {{"n_plates", 2}}, {{"n_plates", 1}},
         {{"n_plates", 4}}, "Put every plate inside a cabinet.", true, {0, 1, 2}},
    };
    return table;
}

FeatureSpec boolf(const std::string &name, const std::string &type,
                  const std::string &pred, std::optional<int> idx = std::nullopt) {
    FeatureSpec s;
    s.name = name;
    s.kind = FeatureKind::BooleanPredicate;
    s.object_type = type;
    s.predicate = pred;
    s.instance_index = idx;
    return s;
}

FeatureSpec distf(const std::string &name, const std::string &type,
                  const std::string &filter = "") {
    FeatureSpec s;
    s.name = name;
    s.kind = FeatureKind::DistanceToNearest;
    s.object_type = type;
    if (!filter.empty()) s.filter = filter;
    return s;
}

FeatureSpec countf(const std::string &name, const std::string &type,
                   const std::string &fn) {
    FeatureSpec s;
    s.name = name;
    s.kind = FeatureKind::Count;
    s.object_type = type;
    s.count_fn = fn;
    return s;
}

// --- Layout sampling ---

struct Placement {
    Cell agent;
    std::vector<Cell> cells;  // one per object in task order
};

using ConstraintFn = std::function<bool(const Placement &)>;

Cell sample_cell(Rng &rng, int w, int h) {
    return {rng_int(rng, 0, w - 1), rng_int(rng, 0, h - 1)};
}

bool all_distinct(const Placement &p) {
    std::vector<Cell> all = p.cells;
    all.push_back(p.agent);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i] == all[j]) return false;
    return true;
}

Placement sample_placement(Rng &rng, int w, int h, std::size_t n_objects,
                           const ConstraintFn &ok) {
    for (int attempt = 0; attempt < 4000; ++attempt) {
        Placement p;
        p.agent = sample_cell(rng, w, h);
        for (std::size_t i = 0; i < n_objects; ++i) p.cells.push_back(sample_cell(rng, w, h));
        if (all_distinct(p) && ok(p)) return p;
    }
    throw InfeasibleLayout("placement sampler exhausted retries");
}

ObjectInstance make_object(const std::string &type, int index, const Cell &pos) {
    ObjectInstance o;
    o.id = type + std::to_string(index);
    o.type = type;
    o.pos = pos;
    if (flag_applicable(type, Flag::OnFloor)) o.set_flag(Flag::OnFloor, true);
    return o;
}

int size_of(const SizeParams &sizes, const std::string &key) {
    auto it = sizes.find(key);
    if (it == sizes.end()) throw SchemaError("missing size param '" + key + "'");
    return it->second;
}

}  // namespace

const TaskInfo &task_info(const std::string &task_id) {
    for (const auto &t : task_table())
        if (t.id == task_id) return t;
    throw UnknownTask("'" + task_id + "' is not in the implemented subset");
}

const std::vector<std::string> &implemented_tasks() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto &t : task_table()) v.push_back(t.id);
        return v;
    }();
    return ids;
}

SizeParams resolve_sizes(const std::string &task_id, const SizeParams &overrides) {
    const TaskInfo &info = task_info(task_id);
    SizeParams sizes = info.default_sizes;
    for (const auto &[k, v] : overrides) {
        if (k == "grid_width" || k == "grid_height") {
            sizes[k] = v;
            continue;
        }
        if (info.default_sizes.find(k) == info.default_sizes.end())
            throw SchemaError("task " + task_id + " has no size param '" + k + "'");
        int lo = info.min_sizes.at(k);
        int hi = info.max_sizes.at(k);
        if (v < lo || v > hi)
            throw SchemaError("size param " + k + "=" + std::to_string(v) +
                              " outside documented range [" + std::to_string(lo) + "," +
                              std::to_string(hi) + "]");
        sizes[k] = v;
    }
    return sizes;
}

Roster make_roster(const std::string &task_id, const SizeParams &sizes_in) {
    SizeParams sizes = resolve_sizes(task_id, sizes_in);
    Roster r;
    if (task_id == "opening_packages") {
        r.push_back(distf("p", "package", "unopened"));
        r.push_back(countf("N", "package", "count_closed"));
    } else if (task_id == "cleaning_shoes") {
        int k = size_of(sizes, "k");
        r.push_back(boolf("H_r", "rag", "holding"));
        r.push_back(distf("p_r", "rag"));
        r.push_back(distf("p_s", "sink"));
        r.push_back(distf("p_f", "shoe", "not_cleaned"));
        r.push_back(countf("N_f", "shoe", "count_not_cleaned"));
        r.push_back(boolf("T_s", "sink", "toggled"));
        r.push_back(boolf("S_r", "rag", "soaked"));
        for (int i = 0; i < k; ++i)
            r.push_back(boolf("C_" + std::to_string(i + 1), "shoe", "cleaned", i));
        r.push_back(boolf("O_r", "rag", "onfloor"));
    } else if (task_id == "laying_wood_floors") {
        r.push_back(boolf("H", "plywood", "holding"));
        r.push_back(distf("p", "plywood", "isolated"));
        r.push_back(distf("t", "plywood", "not_carried"));
        r.push_back(countf("n", "plywood", "count_isolated"));
    } else if (task_id == "throwing_away_leftovers") {
        r.push_back(boolf("H_h", "hamburger", "holding"));
        r.push_back(distf("p_h", "hamburger", "not_inside:ashcan"));
        r.push_back(distf("p_a", "ashcan"));
        r.push_back(countf("N_h", "hamburger", "count_not_inside_target:ashcan"));
    } else if (task_id == "putting_away_dishes") {
        r.push_back(boolf("H_p", "plate", "holding"));
        r.push_back(distf("p_p", "plate", "not_inside:cabinet"));
        r.push_back(distf("p_c", "cabinet"));
        r.push_back(countf("N_p", "plate", "count_not_inside_target:cabinet"));
        r.push_back(boolf("O_c", "cabinet", "opened"));
    } else {
        throw UnknownTask("'" + task_id + "'");
    }
    return r;
}

GoalSpec make_goal(const std::string &task_id, const SizeParams &sizes_in) {
    SizeParams sizes = resolve_sizes(task_id, sizes_in);
    GoalSpec g;
    if (task_id == "opening_packages") {
        g.conjuncts.push_back({"N", ConstraintOp::EqZero});
    } else if (task_id == "cleaning_shoes") {
        int k = size_of(sizes, "k");
        for (int i = 0; i < k; ++i)
            g.conjuncts.push_back({"C_" + std::to_string(i + 1), ConstraintOp::IsTrue});
        g.conjuncts.push_back({"O_r", ConstraintOp::IsTrue});
    } else if (task_id == "laying_wood_floors") {
        g.conjuncts.push_back({"n", ConstraintOp::EqZero});
    } else if (task_id == "throwing_away_leftovers") {
        g.conjuncts.push_back({"N_h", ConstraintOp::EqZero});
    } else if (task_id == "putting_away_dishes") {
        g.conjuncts.push_back({"N_p", ConstraintOp::EqZero});
    } else {
        throw UnknownTask("'" + task_id + "'");
    }
    return g;
}

Roster roster_for_instance(const WorldState &instance) {
    const TaskInfo &info = task_info(instance.task_id);
    SizeParams sizes = info.default_sizes;
    // Recover the primary count from the object population.
    std::string counted_type;
    if (instance.task_id == "opening_packages") counted_type = "package";
    else if (instance.task_id == "cleaning_shoes") counted_type = "shoe";
    else if (instance.task_id == "laying_wood_floors") counted_type = "plywood";
    else if (instance.task_id == "throwing_away_leftovers") counted_type = "hamburger";
    else counted_type = "plate";
    int n = 0;
    for (const auto &o : instance.objects)
        if (o.type == counted_type) ++n;
    sizes[info.primary_size_key] = n;
    return make_roster(instance.task_id, sizes);
}

WorldState init_instance(const std::string &task_id, std::uint64_t layout_seed,
                         const SizeParams &size_overrides) {
    const TaskInfo &info = task_info(task_id);
    SizeParams sizes = resolve_sizes(task_id, size_overrides);
    WorldState s;
    s.task_id = task_id;
    s.grid_width = sizes.count("grid_width") ? sizes.at("grid_width") : 10;
    s.grid_height = sizes.count("grid_height") ? sizes.at("grid_height") : 10;
    s.goal = make_goal(task_id, sizes);
    Rng rng(derive_seed(std::hash<std::string>{}(task_id), layout_seed));

    const int W = s.grid_width;
    const int H = s.grid_height;

    if (task_id == "opening_packages") {
        int n = size_of(sizes, info.primary_size_key);
        Placement p = sample_placement(rng, W, H, static_cast<std::size_t>(n), [&](const Placement &pl) {
            for (const auto &c : pl.cells)
                if (manhattan(pl.agent, c) < 3) return false;
            return true;
        });
        s.agent_pos = p.agent;
        for (int i = 0; i < n; ++i) s.objects.push_back(make_object("package", i, p.cells[i]));
    } else if (task_id == "cleaning_shoes") {
        int k = size_of(sizes, "k");
        // Order: sink, rag, shoes. Separations keep every navigation leg at
        // least two steps long so activation widths match the analysis.
        Placement p = sample_placement(rng, W, H, static_cast<std::size_t>(2 + k), [&](const Placement &pl) {
            const Cell &sink = pl.cells[0];
            const Cell &rag = pl.cells[1];
            if (manhattan(rag, sink) < 4) return false;
            if (manhattan(pl.agent, rag) < 3) return false;
            for (int i = 0; i < k; ++i) {
                const Cell &shoe = pl.cells[static_cast<std::size_t>(2 + i)];
                if (manhattan(shoe, sink) < 4) return false;
                if (manhattan(shoe, rag) < 2) return false;
                for (int j = 0; j < i; ++j)
                    if (manhattan(shoe, pl.cells[static_cast<std::size_t>(2 + j)]) < 4) return false;
            }
            return true;
        });
        s.agent_pos = p.agent;
        s.objects.push_back(make_object("sink", 0, p.cells[0]));
        s.objects.push_back(make_object("rag", 0, p.cells[1]));
        for (int i = 0; i < k; ++i)
            s.objects.push_back(make_object("shoe", i, p.cells[static_cast<std::size_t>(2 + i)]));
    } else if (task_id == "laying_wood_floors") {
        int n = size_of(sizes, "n_sheets");
        Placement p = sample_placement(rng, W, H, static_cast<std::size_t>(n), [&](const Placement &pl) {
            for (std::size_t i = 0; i < pl.cells.size(); ++i) {
                if (manhattan(pl.agent, pl.cells[i]) < 3) return false;
                for (std::size_t j = i + 1; j < pl.cells.size(); ++j)
                    if (manhattan(pl.cells[i], pl.cells[j]) < 3) return false;
            }
            return true;
        });
        s.agent_pos = p.agent;
        for (int i = 0; i < n; ++i) s.objects.push_back(make_object("plywood", i, p.cells[static_cast<std::size_t>(i)]));
    } else if (task_id == "throwing_away_leftovers") {
        int n = size_of(sizes, "n_burgers");
        Placement p = sample_placement(rng, W, H, static_cast<std::size_t>(1 + n), [&](const Placement &pl) {
            const Cell &ashcan = pl.cells[0];
            for (int i = 0; i < n; ++i) {
                const Cell &b = pl.cells[static_cast<std::size_t>(1 + i)];
                if (manhattan(b, ashcan) < 4) return false;
                if (manhattan(pl.agent, b) < 3) return false;
            }
            return true;
        });
        s.agent_pos = p.agent;
        s.objects.push_back(make_object("ashcan", 0, p.cells[0]));
        for (int i = 0; i < n; ++i)
            s.objects.push_back(make_object("hamburger", i, p.cells[static_cast<std::size_t>(1 + i)]));
    } else if (task_id == "putting_away_dishes") {
        int n = size_of(sizes, "n_plates");
        Placement p = sample_placement(rng, W, H, static_cast<std::size_t>(1 + n), [&](const Placement &pl) {
            const Cell &cab = pl.cells[0];
            if (manhattan(pl.agent, cab) < 3) return false;
            for (int i = 0; i < n; ++i) {
                const Cell &plate = pl.cells[static_cast<std::size_t>(1 + i)];
                if (manhattan(plate, cab) < 4) return false;
                if (manhattan(pl.agent, plate) < 3) return false;
            }
            return true;
        });
        s.agent_pos = p.agent;
        s.objects.push_back(make_object("cabinet", 0, p.cells[0]));
        for (int i = 0; i < n; ++i)
            s.objects.push_back(make_object("plate", i, p.cells[static_cast<std::size_t>(1 + i)]));
    } else {
        throw UnknownTask("'" + task_id + "'");
    }
    std::sort(s.objects.begin(), s.objects.end(),
              [](const ObjectInstance &a, const ObjectInstance &b) { return a.id < b.id; });
    return s;
}

// --- Data directory ---

std::string data_dir() {
    if (!g_data_dir.empty()) return g_data_dir;
    if (const char *env = std::getenv("GRANBENCH_DATA")) {
        if (std::filesystem::exists(env)) return env;
    }
    if (std::filesystem::exists("data/rules")) return "data";
    return GRANBENCH_DATA_DIR;
}

void set_data_dir(const std::string &dir) { g_data_dir = dir; }

// --- Rule set / roster serialization ---

namespace {

ordered_json constraint_to_json(const Constraint &c) {
    return ordered_json{{"feature", c.feature}, {"op", constraint_op_name(c.op)}};
}

ordered_json effect_to_json(const EffectAtom &e) {
    return ordered_json{{"feature", e.feature}, {"op", effect_op_name(e.op)}};
}

}  // namespace

std::string ruleset_to_json_text(const RuleSet &rs) {
    ordered_json j;
    j["v"] = 1;
    j["task_id"] = rs.task_id;
    j["rank"] = rs.rank;
    j["rules"] = ordered_json::array();
    for (const auto &r : rs.rules) {
        ordered_json jr;
        jr["id"] = r.id;
        jr["condition"] = ordered_json::array();
        for (const auto &c : r.condition) jr["condition"].push_back(constraint_to_json(c));
        jr["effect"] = ordered_json::array();
        for (const auto &e : r.effect) jr["effect"].push_back(effect_to_json(e));
        jr["template_hint"] = r.template_hint;
        j["rules"].push_back(jr);
    }
    j["lineage"] = ordered_json::array();
    for (const auto &l : rs.lineage) {
        ordered_json jl;
        jl["id"] = l.coarse_id;
        jl["parents"] = l.parents;
        j["lineage"].push_back(jl);
    }
    return j.dump(2) + "\n";
}

RuleSet ruleset_from_json_text(const std::string &text) {
    ordered_json j = ordered_json::parse(text);
    if (!j.contains("v") || j["v"].get<int>() != 1)
        throw SchemaError("unsupported rule file schema version");
    RuleSet rs;
    rs.task_id = j.at("task_id").get<std::string>();
    rs.rank = j.at("rank").get<int>();
    for (const auto &jr : j.at("rules")) {
        Rule r;
        r.id = jr.at("id").get<std::string>();
        for (const auto &jc : jr.at("condition"))
            r.condition.push_back({jc.at("feature").get<std::string>(),
                                   constraint_op_from_name(jc.at("op").get<std::string>())});
        for (const auto &je : jr.at("effect"))
            r.effect.push_back({je.at("feature").get<std::string>(),
                                effect_op_from_name(je.at("op").get<std::string>())});
        r.template_hint = jr.value("template_hint", "");
        if (r.effect.empty()) throw SchemaError("rule " + r.id + " has empty effect");
        auto dup = [](const auto &atoms) {
            for (std::size_t i = 0; i < atoms.size(); ++i)
                for (std::size_t j2 = i + 1; j2 < atoms.size(); ++j2)
                    if (atoms[i].feature == atoms[j2].feature) return true;
            return false;
        };
        if (dup(r.condition) || dup(r.effect))
            throw SchemaError("rule " + r.id + " repeats a feature");
        rs.rules.push_back(std::move(r));
    }
    if (j.contains("lineage"))
        for (const auto &jl : j["lineage"]) {
            Lineage l;
            l.coarse_id = jl.at("id").get<std::string>();
            for (const auto &p : jl.at("parents")) l.parents.push_back(p.get<std::string>());
            rs.lineage.push_back(std::move(l));
        }
    // Rule ids unique.
    for (std::size_t i = 0; i < rs.rules.size(); ++i)
        for (std::size_t k = i + 1; k < rs.rules.size(); ++k)
            if (rs.rules[i].id == rs.rules[k].id)
                throw SchemaError("duplicate rule id " + rs.rules[i].id);
    return rs;
}

RuleSet load_ruleset(const std::string &task_id, int rank) {
    std::string path = data_dir() + "/rules/" + task_id + "." + std::to_string(rank) + ".json";
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open rule file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    RuleSet rs = ruleset_from_json_text(buf.str());
    if (rs.task_id != task_id || rs.rank != rank)
        throw SchemaError("rule file " + path + " does not match its name");
    // Ops must match feature kinds on the default roster; per-instance features
    // (C_i) never appear in shipped rules.
    Roster roster = make_roster(task_id, {});
    FeatureVector probe;
    for (const auto &spec : roster) {
        probe.names.push_back(spec.name);
        probe.values.push_back({spec.kind == FeatureKind::BooleanPredicate, 0});
    }
    for (const auto &r : rs.rules) {
        for (const auto &c : r.condition) {
            const FeatureValue &fv = probe.at(c.feature);
            bool bool_op = c.op == ConstraintOp::IsTrue || c.op == ConstraintOp::IsFalse;
            if (bool_op != fv.is_bool)
                throw SchemaError("rule " + r.id + ": op/kind mismatch on " + c.feature);
        }
        for (const auto &e : r.effect) {
            const FeatureValue &fv = probe.at(e.feature);
            bool bool_op = e.op == EffectOp::SetTrue || e.op == EffectOp::SetFalse ||
                           e.op == EffectOp::AnyBool;
            if (bool_op != fv.is_bool)
                throw SchemaError("rule " + r.id + ": op/kind mismatch on " + e.feature);
        }
    }
    return rs;
}

std::string roster_to_json_text(const std::string &task_id, const Roster &roster) {
    ordered_json j;
    j["v"] = 1;
    j["task_id"] = task_id;
    j["features"] = ordered_json::array();
    for (const auto &f : roster) {
        ordered_json jf;
        jf["name"] = f.name;
        jf["kind"] = feature_kind_name(f.kind);
        jf["object_type"] = f.object_type;
        if (f.predicate) jf["predicate"] = *f.predicate;
        if (f.filter) jf["filter"] = *f.filter;
        if (f.count_fn) jf["count_fn"] = *f.count_fn;
        if (f.instance_index) jf["instance_index"] = *f.instance_index;
        j["features"].push_back(jf);
    }
    return j.dump(2) + "\n";
}

Roster roster_from_json_text(const std::string &text) {
    ordered_json j = ordered_json::parse(text);
    if (!j.contains("v") || j["v"].get<int>() != 1)
        throw SchemaError("unsupported roster schema version");
    Roster roster;
    for (const auto &jf : j.at("features")) {
        FeatureSpec f;
        f.name = jf.at("name").get<std::string>();
        f.kind = feature_kind_from_name(jf.at("kind").get<std::string>());
        f.object_type = jf.at("object_type").get<std::string>();
        if (jf.contains("predicate")) f.predicate = jf["predicate"].get<std::string>();
        if (jf.contains("filter")) f.filter = jf["filter"].get<std::string>();
        if (jf.contains("count_fn")) {
            f.count_fn = jf["count_fn"].get<std::string>();
            if (!count_fn_registered(*f.count_fn))
                throw UnknownCountFunction("'" + *f.count_fn + "'");
        }
        if (jf.contains("instance_index")) f.instance_index = jf["instance_index"].get<int>();
        bool needs_pred = f.kind == FeatureKind::BooleanPredicate;
        bool needs_fn = f.kind == FeatureKind::Count;
        if (needs_pred != f.predicate.has_value() || needs_fn != f.count_fn.has_value())
            throw SchemaError("feature " + f.name + ": kind-specific fields mismatch");
        roster.push_back(std::move(f));
    }
    return roster;
}

}  // namespace granbench
