#include "granbench/world.hpp"

#include <algorithm>
#include <array>

#include "granbench/features.hpp"
#include "granbench/tasks.hpp"

namespace granbench {

const char *dir_name(Dir d) {
    switch (d) {
    case Dir::N: return "N";
    case Dir::E: return "E";
    case Dir::S: return "S";
    case Dir::W: return "W";
    }
    return "N";
}

Dir dir_from_name(const std::string &name) {
    if (name == "N") return Dir::N;
    if (name == "E") return Dir::E;
    if (name == "S") return Dir::S;
    if (name == "W") return Dir::W;
    throw SchemaError("unknown direction '" + name + "'");
}

const char *flag_name(Flag f) {
    switch (f) {
    case Flag::Opened: return "opened";
    case Flag::Toggled: return "toggled";
    case Flag::Soaked: return "soaked";
    case Flag::Cleaned: return "cleaned";
    case Flag::DustFree: return "dustfree";
    case Flag::Sliced: return "sliced";
    case Flag::OnFloor: return "onfloor";
    }
    return "?";
}

Flag flag_from_name(const std::string &name) {
    for (int i = 0; i < kNumFlags; ++i) {
        Flag f = static_cast<Flag>(i);
        if (name == flag_name(f)) return f;
    }
    throw UnknownPredicate("no flag named '" + name + "'");
}

namespace {

constexpr std::uint8_t fbit(Flag f) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(f));
}

const std::vector<ObjectTypeInfo> &type_table() {
    static const std::vector<ObjectTypeInfo> table = {
        {"rag", 1, false, false, static_cast<std::uint8_t>(fbit(Flag::Soaked) | fbit(Flag::OnFloor))},
        {"sink", 2, true, false, fbit(Flag::Toggled)},
        {"shoe", 3, false, false, static_cast<std::uint8_t>(fbit(Flag::Cleaned) | fbit(Flag::OnFloor))},
        {"package", 4, false, false, static_cast<std::uint8_t>(fbit(Flag::Opened) | fbit(Flag::OnFloor))},
        {"plywood", 5, false, false, fbit(Flag::OnFloor), true},
        {"hamburger", 6, false, false, static_cast<std::uint8_t>(fbit(Flag::Sliced) | fbit(Flag::OnFloor))},
        {"ashcan", 7, true, true, 0},
        {"plate", 8, false, false, static_cast<std::uint8_t>(fbit(Flag::Cleaned) | fbit(Flag::OnFloor))},
        {"cabinet", 9, true, true, static_cast<std::uint8_t>(fbit(Flag::Opened) | fbit(Flag::DustFree))},
        {"book", 10, false, false, fbit(Flag::OnFloor)},
        {"box", 11, true, true, fbit(Flag::Opened)},
        {"table", 12, true, true, fbit(Flag::DustFree)},
    };
    return table;
}

}  // namespace

const ObjectTypeInfo &object_type(const std::string &name) {
    for (const auto &t : type_table())
        if (t.name == name) return t;
    throw SchemaError("unknown object type '" + name + "'");
}

bool flag_applicable(const std::string &type, Flag f) {
    return (object_type(type).applicable_flags & fbit(f)) != 0;
}

const char *constraint_op_name(ConstraintOp op) {
    switch (op) {
    case ConstraintOp::IsTrue: return "is_true";
    case ConstraintOp::IsFalse: return "is_false";
    case ConstraintOp::EqZero: return "eq_zero";
    case ConstraintOp::GtZero: return "gt_zero";
    }
    return "?";
}

ConstraintOp constraint_op_from_name(const std::string &name) {
    if (name == "is_true") return ConstraintOp::IsTrue;
    if (name == "is_false") return ConstraintOp::IsFalse;
    if (name == "eq_zero") return ConstraintOp::EqZero;
    if (name == "gt_zero") return ConstraintOp::GtZero;
    throw SchemaError("unknown constraint op '" + name + "'");
}

const char *action_kind_name(ActionKind k) {
    switch (k) {
    case ActionKind::MoveNorth: return "move_north";
    case ActionKind::MoveEast: return "move_east";
    case ActionKind::MoveSouth: return "move_south";
    case ActionKind::MoveWest: return "move_west";
    case ActionKind::Pickup: return "pickup";
    case ActionKind::Drop: return "drop";
    case ActionKind::Toggle: return "toggle";
    case ActionKind::Open: return "open";
    case ActionKind::Close: return "close";
    case ActionKind::Clean: return "clean";
    case ActionKind::Soak: return "soak";
    case ActionKind::Slice: return "slice";
    case ActionKind::Place: return "place";
    }
    return "?";
}

ActionKind action_kind_from_name(const std::string &name) {
    for (int i = 0; i <= static_cast<int>(ActionKind::Place); ++i) {
        ActionKind k = static_cast<ActionKind>(i);
        if (name == action_kind_name(k)) return k;
    }
    throw SchemaError("unknown action kind '" + name + "'");
}

bool is_move(ActionKind k) {
    return k == ActionKind::MoveNorth || k == ActionKind::MoveEast ||
           k == ActionKind::MoveSouth || k == ActionKind::MoveWest;
}

bool requires_adjacency(ActionKind k) {
    return !is_move(k) && k != ActionKind::Drop;
}

// --- WorldState ---

const ObjectInstance *WorldState::find(const std::string &id) const {
    for (const auto &o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

ObjectInstance *WorldState::find(const std::string &id) {
    for (auto &o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

bool WorldState::furniture_at(const Cell &c) const {
    for (const auto &o : objects)
        if (o.pos == c && object_type(o.type).furniture) return true;
    return false;
}

bool WorldState::loose_item_at(const Cell &c) const {
    for (const auto &o : objects) {
        if (o.pos == c && !object_type(o.type).furniture && !o.container &&
            !carrying(o.id))
            return true;
    }
    return false;
}

bool WorldState::carrying(const std::string &id) const {
    return std::find(carried.begin(), carried.end(), id) != carried.end();
}

bool operator==(const WorldState &a, const WorldState &b) {
    if (a.grid_width != b.grid_width || a.grid_height != b.grid_height ||
        !(a.agent_pos == b.agent_pos) || a.agent_dir != b.agent_dir ||
        a.carried != b.carried || a.task_id != b.task_id ||
        a.objects.size() != b.objects.size())
        return false;
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
        const auto &x = a.objects[i];
        const auto &y = b.objects[i];
        if (x.id != y.id || x.type != y.type || !(x.pos == y.pos) ||
            x.flags != y.flags || x.container != y.container)
            return false;
    }
    return true;
}

std::uint64_t state_hash(const WorldState &s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    mix(static_cast<std::uint64_t>(s.agent_pos.col) << 32 |
        static_cast<std::uint32_t>(s.agent_pos.row));
    for (const auto &id : s.carried)
        for (char c : id) mix(static_cast<unsigned char>(c));
    for (const auto &o : s.objects) {
        mix(static_cast<std::uint64_t>(o.pos.col) << 32 |
            static_cast<std::uint32_t>(o.pos.row));
        mix(o.flags);
        mix(o.container ? 1 + std::hash<std::string>{}(*o.container) : 0);
    }
    return h;
}

// --- Transitions ---

namespace {

Cell move_dest(const Cell &c, ActionKind k) {
    switch (k) {
    case ActionKind::MoveNorth: return {c.col, c.row - 1};
    case ActionKind::MoveEast: return {c.col + 1, c.row};
    case ActionKind::MoveSouth: return {c.col, c.row + 1};
    case ActionKind::MoveWest: return {c.col - 1, c.row};
    default: return c;
    }
}

Dir move_dir(ActionKind k) {
    switch (k) {
    case ActionKind::MoveNorth: return Dir::N;
    case ActionKind::MoveEast: return Dir::E;
    case ActionKind::MoveSouth: return Dir::S;
    default: return Dir::W;
    }
}

bool adjacent(const WorldState &s, const ObjectInstance &o) {
    return adjacency_distance(s.agent_pos, o.pos) == 0;
}

const ObjectInstance &resolve_target(const WorldState &s, const Action &a) {
    if (!a.target) throw IllegalAction(std::string(action_kind_name(a.kind)) + " needs a target");
    const ObjectInstance *o = s.find(*a.target);
    if (!o) throw IllegalAction("no object '" + *a.target + "'");
    return *o;
}

// Precondition checks shared by step() and legal_actions(). Throws on failure.
void check_action(const WorldState &s, const Action &a) {
    switch (a.kind) {
    case ActionKind::MoveNorth:
    case ActionKind::MoveEast:
    case ActionKind::MoveSouth:
    case ActionKind::MoveWest: {
        Cell d = move_dest(s.agent_pos, a.kind);
        if (!s.in_bounds(d)) throw IllegalAction("move out of bounds");
        if (s.furniture_at(d)) throw IllegalAction("cell blocked by furniture");
        return;
    }
    case ActionKind::Pickup: {
        const auto &o = resolve_target(s, a);
        if (!s.carried.empty()) throw IllegalAction("hands full");
        if (object_type(o.type).furniture) throw IllegalAction("cannot pick up furniture");
        if (o.container) throw IllegalAction("object is contained");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        if (object_type(o.type).anchors) {
            for (const auto &x : s.objects)
                if (x.id != o.id && x.type == o.type && !s.carrying(x.id) &&
                    manhattan(x.pos, o.pos) == 1)
                    throw IllegalAction("object is laid into place");
        }
        return;
    }
    case ActionKind::Drop: {
        if (s.carried.empty()) throw IllegalAction("nothing carried");
        if (s.loose_item_at(s.agent_pos)) throw IllegalAction("cell already holds an item");
        return;
    }
    case ActionKind::Toggle: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Toggled)) throw IllegalAction("not toggleable");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        return;
    }
    case ActionKind::Open: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Opened)) throw IllegalAction("not openable");
        if (o.flag(Flag::Opened)) throw IllegalAction("already open");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        return;
    }
    case ActionKind::Close: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Opened)) throw IllegalAction("not openable");
        // Opening a package tears it; only containers close again.
        if (!object_type(o.type).container) throw IllegalAction("cannot be closed again");
        if (!o.flag(Flag::Opened)) throw IllegalAction("already closed");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        return;
    }
    case ActionKind::Clean: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Cleaned)) throw IllegalAction("not cleanable");
        if (o.flag(Flag::Cleaned)) throw IllegalAction("already clean");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        bool wet_tool = false;
        for (const auto &id : s.carried) {
            const auto *c = s.find(id);
            if (c && flag_applicable(c->type, Flag::Soaked) && c->flag(Flag::Soaked))
                wet_tool = true;
        }
        if (!wet_tool) throw IllegalAction("needs a carried soaked tool");
        return;
    }
    case ActionKind::Soak: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Soaked)) throw IllegalAction("not soakable");
        if (!s.carrying(o.id)) throw IllegalAction("soak target must be carried");
        if (o.flag(Flag::Soaked)) throw IllegalAction("already soaked");
        bool tap = false;
        for (const auto &x : s.objects)
            if (flag_applicable(x.type, Flag::Toggled) && x.flag(Flag::Toggled) &&
                adjacent(s, x))
                tap = true;
        if (!tap) throw IllegalAction("no running sink adjacent");
        return;
    }
    case ActionKind::Slice: {
        const auto &o = resolve_target(s, a);
        if (!flag_applicable(o.type, Flag::Sliced)) throw IllegalAction("not sliceable");
        if (o.flag(Flag::Sliced)) throw IllegalAction("already sliced");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        return;
    }
    case ActionKind::Place: {
        const auto &o = resolve_target(s, a);
        if (!object_type(o.type).container) throw IllegalAction("target is not a container");
        if (s.carried.empty()) throw IllegalAction("nothing carried");
        if (!adjacent(s, o)) throw IllegalAction("target not adjacent");
        if (flag_applicable(o.type, Flag::Opened) && !o.flag(Flag::Opened))
            throw IllegalAction("container is closed");
        return;
    }
    }
    throw IllegalAction("unknown action");
}

}  // namespace

WorldState step(const WorldState &state, const Action &action) {
    check_action(state, action);
    WorldState s = state;
    s.step += 1;
    switch (action.kind) {
    case ActionKind::MoveNorth:
    case ActionKind::MoveEast:
    case ActionKind::MoveSouth:
    case ActionKind::MoveWest: {
        s.agent_pos = move_dest(s.agent_pos, action.kind);
        s.agent_dir = move_dir(action.kind);
        for (const auto &id : s.carried) s.find(id)->pos = s.agent_pos;
        break;
    }
    case ActionKind::Pickup: {
        auto *o = s.find(*action.target);
        s.carried.push_back(o->id);
        o->pos = s.agent_pos;
        if (flag_applicable(o->type, Flag::OnFloor)) o->set_flag(Flag::OnFloor, false);
        break;
    }
    case ActionKind::Drop: {
        auto *o = s.find(s.carried.front());
        s.carried.clear();
        o->pos = s.agent_pos;
        if (flag_applicable(o->type, Flag::OnFloor)) o->set_flag(Flag::OnFloor, true);
        break;
    }
    case ActionKind::Toggle: {
        auto *o = s.find(*action.target);
        o->set_flag(Flag::Toggled, !o->flag(Flag::Toggled));
        break;
    }
    case ActionKind::Open:
        s.find(*action.target)->set_flag(Flag::Opened, true);
        break;
    case ActionKind::Close:
        s.find(*action.target)->set_flag(Flag::Opened, false);
        break;
    case ActionKind::Clean:
        s.find(*action.target)->set_flag(Flag::Cleaned, true);
        break;
    case ActionKind::Soak:
        s.find(*action.target)->set_flag(Flag::Soaked, true);
        break;
    case ActionKind::Slice:
        s.find(*action.target)->set_flag(Flag::Sliced, true);
        break;
    case ActionKind::Place: {
        auto *container = s.find(*action.target);
        auto *item = s.find(s.carried.front());
        s.carried.clear();
        item->container = container->id;
        item->pos = container->pos;
        if (flag_applicable(item->type, Flag::OnFloor)) item->set_flag(Flag::OnFloor, false);
        break;
    }
    }
    return s;
}

std::vector<Action> legal_actions(const WorldState &state) {
    std::vector<Action> out;
    auto try_add = [&](const Action &a) {
        try {
            check_action(state, a);
            out.push_back(a);
        } catch (const IllegalAction &) {
        }
    };
    try_add({ActionKind::MoveNorth, std::nullopt});
    try_add({ActionKind::MoveEast, std::nullopt});
    try_add({ActionKind::MoveSouth, std::nullopt});
    try_add({ActionKind::MoveWest, std::nullopt});
    try_add({ActionKind::Drop, std::nullopt});
    static const std::array<ActionKind, 7> kTargeted = {
        ActionKind::Pickup, ActionKind::Toggle, ActionKind::Open, ActionKind::Close,
        ActionKind::Clean,  ActionKind::Soak,   ActionKind::Place};
    for (ActionKind k : kTargeted)
        for (const auto &o : state.objects) try_add({k, o.id});
    return out;
}

bool is_goal(const WorldState &state) {
    // Goal features are drawn from the task roster; evaluate them identically
    // to rule evaluation.
    FeatureVector v = eval_vector(state, roster_for_instance(state));
    return goal_holds(state.goal, v);
}

ObservationGrid render_observation(const WorldState &state) {
    ObservationGrid g;
    g.width = state.grid_width;
    g.height = state.grid_height;
    g.data.assign(static_cast<std::size_t>(3) * g.width * g.height, 0);
    auto put = [&](int ch, const Cell &c, int val) {
        g.data[(static_cast<std::size_t>(ch) * g.height + c.row) * g.width + c.col] = val;
    };
    // Furniture renders over items; carried objects are not cell content.
    for (bool furniture_pass : {false, true}) {
        for (const auto &o : state.objects) {
            if (state.carrying(o.id)) continue;
            if (object_type(o.type).furniture != furniture_pass) continue;
            put(0, o.pos, object_type(o.type).type_id);
            put(1, o.pos, o.flags);
        }
    }
    put(2, state.agent_pos, 1 + static_cast<int>(state.agent_dir));
    return g;
}

}  // namespace granbench
