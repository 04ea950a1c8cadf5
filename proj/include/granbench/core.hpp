#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace granbench {

// Numeric features use kInf as the "no qualifying object" sentinel. It fails
// both eq_zero and gt_zero constraints.
inline constexpr int kInf = std::numeric_limits<int>::max();

struct Cell {
    int col = 0;
    int row = 0;

    friend bool operator==(const Cell &a, const Cell &b) {
        return a.col == b.col && a.row == b.row;
    }
    friend bool operator!=(const Cell &a, const Cell &b) { return !(a == b); }
};

inline int manhattan(const Cell &a, const Cell &b) {
    return std::abs(a.col - b.col) + std::abs(a.row - b.row);
}

// Distance convention: 0 means adjacent (or same cell); manipulation happens
// from adjacent cells, so the value is steps-to-adjacency on an open grid.
inline int adjacency_distance(const Cell &a, const Cell &b) {
    int m = manhattan(a, b);
    return m <= 1 ? 0 : m - 1;
}

enum class Dir : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

const char *dir_name(Dir d);
Dir dir_from_name(const std::string &name);

// --- Errors ---
//
// Every domain error carries a stable machine-readable code; the CLI maps
// them to exit code 1 with a single-line diagnostic.

class DomainError : public std::runtime_error {
public:
    DomainError(std::string code, const std::string &msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string &code() const { return code_; }

private:
    std::string code_;
};

#define GRANBENCH_ERROR(NAME)                                              \
    class NAME : public DomainError {                                      \
    public:                                                                \
        explicit NAME(const std::string &msg) : DomainError(#NAME, msg) {} \
    }

GRANBENCH_ERROR(UnknownTask);
GRANBENCH_ERROR(InfeasibleLayout);
GRANBENCH_ERROR(IllegalAction);
GRANBENCH_ERROR(UnknownCountFunction);
GRANBENCH_ERROR(UnknownPredicate);
GRANBENCH_ERROR(UnknownFeature);
GRANBENCH_ERROR(NonContiguousSegment);
GRANBENCH_ERROR(InterfaceReferencesUnknownFeature);
GRANBENCH_ERROR(PlannerTimeout);
GRANBENCH_ERROR(BudgetExceeded);
GRANBENCH_ERROR(Stuck);
GRANBENCH_ERROR(ValidationRequired);
GRANBENCH_ERROR(MissingPhrase);
GRANBENCH_ERROR(DegenerateInput);
GRANBENCH_ERROR(EmptyClass);
GRANBENCH_ERROR(UnsupportedConstruct);
GRANBENCH_ERROR(SchemaError);

#undef GRANBENCH_ERROR

class WidthExceeded : public DomainError {
public:
    WidthExceeded(int k_max, const std::string &msg)
        : DomainError("WidthExceeded", msg), k_max_(k_max) {}
    int k_max() const { return k_max_; }

private:
    int k_max_;
};

// --- Deterministic RNG helpers ---

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Documented seed-splitting scheme: stream i of root seed s is
// splitmix64(s ^ splitmix64(i + 1)).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return splitmix64(root ^ splitmix64(stream + 1));
}

using Rng = std::mt19937_64;

// Bounded draw independent of std::uniform_int_distribution internals.
inline int rng_int(Rng &rng, int lo, int hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(rng() % span);
}

inline double rng_unit(Rng &rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace granbench
