#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "granbench/core.hpp"

namespace granbench {

// --- Object model ---

enum class Flag : std::uint8_t {
    Opened = 0,
    Toggled,
    Soaked,
    Cleaned,
    DustFree,
    Sliced,
    OnFloor,
};
inline constexpr int kNumFlags = 7;

const char *flag_name(Flag f);
Flag flag_from_name(const std::string &name);

struct ObjectTypeInfo {
    std::string name;
    int type_id = 0;          // observation channel 0 encoding
    bool furniture = false;   // blocks movement, can hold items
    bool container = false;   // valid `place` target
    std::uint8_t applicable_flags = 0;  // bitmask over Flag
    bool anchors = false;     // once placed touching a same-type object it stays
};

// Registry of the object types used by the shipped tasks.
const ObjectTypeInfo &object_type(const std::string &name);
bool flag_applicable(const std::string &type, Flag f);

struct ObjectInstance {
    std::string id;
    std::string type;
    Cell pos;
    std::uint8_t flags = 0;                // bitmask, only applicable flags may be set
    std::optional<std::string> container;  // id of the furniture it is inside/on

    bool flag(Flag f) const { return (flags >> static_cast<int>(f)) & 1; }
    void set_flag(Flag f, bool v) {
        if (v)
            flags |= static_cast<std::uint8_t>(1u << static_cast<int>(f));
        else
            flags &= static_cast<std::uint8_t>(~(1u << static_cast<int>(f)));
    }
};

// --- Goals ---
//
// Goal conjuncts use the same constraint grammar as rule conditions; the
// feature names refer to the task's roster (module features).

enum class ConstraintOp { IsTrue, IsFalse, EqZero, GtZero };

const char *constraint_op_name(ConstraintOp op);
ConstraintOp constraint_op_from_name(const std::string &name);

struct Constraint {
    std::string feature;
    ConstraintOp op;
};

struct GoalSpec {
    std::vector<Constraint> conjuncts;
};

// --- Actions ---

enum class ActionKind : std::uint8_t {
    MoveNorth = 0,
    MoveEast,
    MoveSouth,
    MoveWest,
    Pickup,
    Drop,
    Toggle,
    Open,
    Close,
    Clean,
    Soak,
    Slice,
    Place,
};

const char *action_kind_name(ActionKind k);
ActionKind action_kind_from_name(const std::string &name);

struct Action {
    ActionKind kind;
    std::optional<std::string> target;  // object id for manipulation kinds

    friend bool operator==(const Action &a, const Action &b) {
        return a.kind == b.kind && a.target == b.target;
    }
};

bool is_move(ActionKind k);
// Manipulations performed on an adjacent object (everything except moves and drop).
bool requires_adjacency(ActionKind k);

// --- World state ---

struct WorldState {
    int grid_width = 10;
    int grid_height = 10;
    std::vector<ObjectInstance> objects;  // sorted by id
    Cell agent_pos;
    Dir agent_dir = Dir::N;
    std::vector<std::string> carried;  // at most one item (hand capacity 1)
    int step = 0;
    std::string task_id;
    GoalSpec goal;

    const ObjectInstance *find(const std::string &id) const;
    ObjectInstance *find(const std::string &id);
    bool in_bounds(const Cell &c) const {
        return c.col >= 0 && c.row >= 0 && c.col < grid_width && c.row < grid_height;
    }
    bool furniture_at(const Cell &c) const;
    bool loose_item_at(const Cell &c) const;  // item on floor, not contained
    bool carrying(const std::string &id) const;

    friend bool operator==(const WorldState &a, const WorldState &b);
};

std::uint64_t state_hash(const WorldState &s);

// --- Core operations ---

// Pure transition: returns a new state, step counter +1. Throws IllegalAction
// when a precondition fails (callers wanting no-op semantics catch it).
WorldState step(const WorldState &state, const Action &action);

// Exactly the actions for which step() would not throw.
std::vector<Action> legal_actions(const WorldState &state);

bool is_goal(const WorldState &state);

// width x height x 3 integer grid; channel 0 = object-type id, channel 1 =
// packed flag bits, channel 2 = agent marker (1 + direction index).
struct ObservationGrid {
    int width = 0;
    int height = 0;
    std::vector<int> data;  // indexed [channel][row][col] flattened

    int at(int channel, int row, int col) const {
        return data[(channel * height + row) * width + col];
    }
};

ObservationGrid render_observation(const WorldState &state);

// --- Instance construction ---

using SizeParams = std::map<std::string, int>;

// Deterministic in (task_id, layout_seed, size_params). Throws UnknownTask or
// InfeasibleLayout (placement sampler exhausted its retries).
WorldState init_instance(const std::string &task_id, std::uint64_t layout_seed,
                         const SizeParams &size_params);

const std::vector<std::string> &implemented_tasks();

}  // namespace granbench
