#pragma once

#include <set>
#include <string>
#include <vector>

#include "granbench/world.hpp"

namespace granbench {

struct PddlExport {
    std::string domain;
    std::string problem;
    std::string domain_name;
    std::string problem_name;
};

// STRIPS-subset export (:strips :typing; complementary predicates instead of
// negative preconditions). Throws UnsupportedConstruct for goals outside the
// boolean fragment, with an explanation.
PddlExport export_pddl(const WorldState &instance);

// Boolean projection used for round-trip equivalence.
struct PddlModel {
    std::map<std::string, std::string> object_types;  // id -> type
    std::set<std::string> init;                       // canonical literal strings
    std::set<std::string> goal;

    friend bool operator==(const PddlModel &a, const PddlModel &b) {
        return a.object_types == b.object_types && a.init == b.init && a.goal == b.goal;
    }
};

PddlModel parse_pddl_problem(const std::string &text);
PddlModel model_of_instance(const WorldState &instance);

}  // namespace granbench
