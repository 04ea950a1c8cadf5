#pragma once

#include <map>
#include <string>
#include <vector>

#include "granbench/harness.hpp"

namespace granbench {

// --- Instance generation ---

struct InstanceSet {
    std::string task_id;
    SizeParams sizes;
    std::uint64_t seed = 0;
    std::vector<WorldState> train;
    std::vector<WorldState> eval;
};

// n distinct solvable instances, deterministic in seed; 5:1 train/eval split.
InstanceSet generate_instances(const std::string &task_id, int n, std::uint64_t seed,
                               const SizeParams &size_overrides = {});

std::string instance_to_json_text(const WorldState &state, std::uint64_t layout_seed,
                                  const SizeParams &sizes);
WorldState instance_from_json_text(const std::string &text);
std::string instance_set_to_json_text(const InstanceSet &set);

// --- Granularity binning ---

enum class GranClass { F, M, C };
const char *gran_class_name(GranClass c);

struct GranularityBinning {
    std::string task_id;
    std::map<int, GranClass> class_of;  // rank -> class
    std::map<int, int> widths;          // rank -> instruction width
    bool degenerate = false;            // fewer than 3 distinct widths
};

GranularityBinning bin_granularity(const std::string &task_id,
                                   const std::map<int, int> &widths_by_rank);
std::string binning_to_json_text(const GranularityBinning &b);

// --- Mixture sampling ---

struct MixtureRatio {
    int f = 1;
    int m = 1;
    int c = 1;
};

// Deterministic stream of episode indices: per window of (f+m+c) draws the
// class counts match the ratio exactly; within a class, passes are seeded
// shuffles without replacement.
std::vector<std::pair<GranClass, int>> sample_mixture(
    const std::map<GranClass, std::vector<int>> &episodes_by_class,
    const MixtureRatio &ratio, std::uint64_t seed, int total_draws);

// --- Statistics table (the paper's per-rank schema) ---

struct StatsRow {
    int rank = 0;
    long n_instructions = 0;
    double len_mean = 0, len_sd = 0;
    long unique_tokens = 0;
    double plan_mean = 0, plan_sd = 0;
};

std::vector<StatsRow> dataset_stats(const std::vector<Episode> &episodes);
std::string stats_to_csv(const std::vector<StatsRow> &rows);

// --- Episode serialization (JSON lines, canonical key order) ---

std::string episode_to_jsonl(const Episode &e);
Episode episode_from_jsonl(const std::string &line);

}  // namespace granbench
