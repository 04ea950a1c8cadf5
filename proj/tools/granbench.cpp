// granbench: benchmark generation and analysis for instruction granularity in
// grid-world tasks. Every generating subcommand is deterministic in
// (flags, seed); outputs are files plus single-line summaries on stdout.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "granbench/dataset.hpp"
#include "granbench/pddl.hpp"
#include "granbench/planner.hpp"
#include "granbench/tasks.hpp"
#include "granbench/width.hpp"

namespace fs = std::filesystem;
using namespace granbench;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string task;
    int rank = 0;
    std::int64_t seed = -1;
    std::string out = "out";
    int jobs = 0;
    int max_steps = 400;
    int n = 60;
    bool pretty = false;
    std::vector<std::string> size_kv;
    int k = -1;
};

std::uint64_t resolve_seed(std::int64_t flag_seed) {
    if (flag_seed >= 0) return static_cast<std::uint64_t>(flag_seed);
    if (const char *env = std::getenv("GRANBENCH_SEED"))
        return static_cast<std::uint64_t>(std::stoull(env));
    throw SchemaError("a seed is required (--seed or GRANBENCH_SEED)");
}

SizeParams parse_sizes(const CommonOpts &o) {
    SizeParams sizes;
    for (const auto &kv : o.size_kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw SchemaError("--size expects key=value");
        sizes[kv.substr(0, eq)] = std::stoi(kv.substr(eq + 1));
    }
    if (o.k >= 0) sizes[task_info(o.task).primary_size_key] = o.k;
    return sizes;
}

void write_file(const fs::path &path, const std::string &content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    out << content;
}

std::vector<std::string> task_list(const std::string &flag) {
    if (flag == "all") return implemented_tasks();
    return {flag};
}

// Deterministic parallel map: results land by index regardless of scheduling.
template <typename Fn>
void parallel_for(int n, int jobs, Fn &&fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            while (true) {
                int i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    for (auto &t : workers) t.join();
}

int cmd_gen_instances(const CommonOpts &o) {
    std::uint64_t seed = resolve_seed(o.seed);
    for (const auto &task : task_list(o.task)) {
        InstanceSet set = generate_instances(task, o.n, seed, parse_sizes(o));
        write_file(fs::path(o.out) / ("instances." + task + ".json"),
                   instance_set_to_json_text(set));
        Roster roster = make_roster(task, set.sizes);
        write_file(fs::path(o.out) / ("roster." + task + ".json"),
                   roster_to_json_text(task, roster));
        std::cout << "gen-instances task=" << task << " n=" << o.n
                  << " train=" << set.train.size() << " eval=" << set.eval.size()
                  << " out=" << o.out << "\n";
    }
    return 0;
}

int cmd_validate_rules(const CommonOpts &o) {
    std::uint64_t seed = resolve_seed(o.seed);
    bool all_ok = true;
    for (const auto &task : task_list(o.task)) {
        std::vector<int> ranks = o.rank >= 0 ? std::vector<int>{o.rank} : task_info(task).ranks;
        InstanceSet set = generate_instances(task, o.n, seed, parse_sizes(o));
        std::vector<WorldState> all = set.train;
        all.insert(all.end(), set.eval.begin(), set.eval.end());
        for (int rank : ranks) {
            RuleSet rs = load_ruleset(task, rank);
            std::vector<ValidationReport> reports(all.size());
            parallel_for(static_cast<int>(all.size()), o.jobs, [&](int i) {
                reports[static_cast<std::size_t>(i)] =
                    validate_ruleset(rs, all[static_cast<std::size_t>(i)], o.max_steps);
            });
            int pass = 0;
            ordered_json jr = ordered_json::array();
            for (const auto &rep : reports) {
                if (rep.reachable && rep.terminating) ++pass;
                ordered_json j;
                j["reachable"] = rep.reachable;
                j["terminating"] = rep.terminating;
                j["steps"] = rep.steps;
                j["rule_calls"] = rep.rule_calls;
                ordered_json counts = ordered_json::object();
                for (const auto &[id, c] : rep.activation_counts) counts[id] = c;
                j["activation_counts"] = counts;
                if (rep.failure)
                    j["failure"] = {{"step", rep.failure->step},
                                    {"rule_id", rep.failure->rule_id},
                                    {"reason", rep.failure->reason}};
                jr.push_back(j);
            }
            ordered_json top;
            top["v"] = 1;
            top["task_id"] = task;
            top["rank"] = rank;
            top["pass"] = pass;
            top["total"] = all.size();
            top["reports"] = jr;
            write_file(fs::path(o.out) /
                           ("validation." + task + "." + std::to_string(rank) + ".json"),
                       top.dump(2) + "\n");
            std::cout << "validate-rules task=" << task << " rank=" << rank << " pass="
                      << pass << "/" << all.size() << "\n";
            if (pass != static_cast<int>(all.size())) all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_solve(const CommonOpts &o, int index) {
    std::uint64_t seed = resolve_seed(o.seed);
    InstanceSet set = generate_instances(o.task, o.n, seed, parse_sizes(o));
    const auto &inst = index < static_cast<int>(set.train.size())
                           ? set.train[static_cast<std::size_t>(index)]
                           : set.eval[static_cast<std::size_t>(index - set.train.size())];
    Subproblem sub = make_goal_subproblem(inst, roster_for_instance(inst));
    Plan plan = bfws_solve(sub);
    ordered_json j;
    j["v"] = 1;
    j["instance_ref"] = o.task + "#" + std::to_string(index);
    ordered_json acts = ordered_json::array();
    for (const auto &a : plan.actions) {
        ordered_json ja;
        ja["kind"] = action_kind_name(a.kind);
        ja["target"] = a.target ? ordered_json(*a.target) : ordered_json(nullptr);
        acts.push_back(ja);
    }
    j["actions"] = acts;
    j["length"] = plan.length;
    j["solved"] = plan.solved;
    j["stats"] = {{"expanded", plan.stats.expanded},
                  {"generated", plan.stats.generated},
                  {"max_novelty", plan.stats.max_novelty}};
    write_file(fs::path(o.out) / ("plan." + o.task + "." + std::to_string(index) + ".json"),
               j.dump(2) + "\n");
    std::cout << "solve task=" << o.task << " index=" << index << " solved="
              << (plan.solved ? "true" : "false") << " length=" << plan.length << "\n";
    return plan.solved ? 0 : 1;
}

int cmd_width(const CommonOpts &o) {
    std::uint64_t seed = resolve_seed(o.seed);
    WorldState inst = init_instance(o.task, seed, parse_sizes(o));
    RuleSet rs = load_ruleset(o.task, o.rank);
    int w = instruction_width(rs, inst);
    std::cout << w << "\n";
    return 0;
}

int cmd_instruct(const CommonOpts &o, const std::string &ablation) {
    std::uint64_t seed = resolve_seed(o.seed);
    WorldState inst = init_instance(o.task, seed, parse_sizes(o));
    RuleSet rs = load_ruleset(o.task, o.rank);
    Agent agent;  // oracle
    agent.seed = seed;
    Episode ep = record_episode(inst, rs, agent, o.max_steps, ablation_from_name(ablation));
    std::string prev;
    for (const auto &st : ep.steps) {
        if (st.instruction.text != prev || o.pretty) {
            std::cout << "t=" << st.t << "  " << st.instruction.text << "\n";
            prev = st.instruction.text;
        }
    }
    std::cout << "instruct task=" << o.task << " rank=" << o.rank << " outcome="
              << outcome_name(ep.outcome) << " rule_calls=" << ep.rule_calls << "\n";
    return 0;
}

int cmd_gen_dataset(const CommonOpts &o, const std::string &ablation) {
    std::uint64_t seed = resolve_seed(o.seed);
    fs::create_directories(o.out);
    AblationMode mode = ablation_from_name(ablation);
    std::vector<std::string> lines;
    for (const auto &task : task_list(o.task)) {
        InstanceSet set = generate_instances(task, o.n, seed, parse_sizes(o));
        write_file(fs::path(o.out) / ("instances." + task + ".json"),
                   instance_set_to_json_text(set));
        write_file(fs::path(o.out) / ("roster." + task + ".json"),
                   roster_to_json_text(task, make_roster(task, set.sizes)));
        std::vector<WorldState> all = set.train;
        all.insert(all.end(), set.eval.begin(), set.eval.end());
        std::map<int, int> widths_by_rank;
        std::vector<Episode> task_episodes;
        for (int rank : task_info(task).ranks) {
            RuleSet rs = load_ruleset(task, rank);
            write_file(fs::path(o.out) / ("rules." + task + "." + std::to_string(rank) + ".json"),
                       ruleset_to_json_text(rs));
            // Instruction width per rank: max over the eval split.
            int w = 0;
            for (const auto &inst : set.eval) w = std::max(w, instruction_width(rs, inst));
            widths_by_rank[rank] = w;
            std::vector<Episode> eps(all.size());
            parallel_for(static_cast<int>(all.size()), o.jobs, [&](int i) {
                Agent agent;
                agent.seed = derive_seed(seed, static_cast<std::uint64_t>(i) * 131 +
                                                   static_cast<std::uint64_t>(rank));
                eps[static_cast<std::size_t>(i)] = record_episode(
                    all[static_cast<std::size_t>(i)], rs, agent, o.max_steps, mode);
                eps[static_cast<std::size_t>(i)].instance_ref =
                    task + "#" + std::to_string(i);
            });
            for (auto &e : eps) task_episodes.push_back(std::move(e));
        }
        GranularityBinning binning = bin_granularity(task, widths_by_rank);
        write_file(fs::path(o.out) / ("binning." + task + ".json"),
                   binning_to_json_text(binning));
        for (const auto &e : task_episodes) lines.push_back(episode_to_jsonl(e));
        std::vector<StatsRow> rows = dataset_stats(task_episodes);
        write_file(fs::path(o.out) / ("stats." + task + ".csv"), stats_to_csv(rows));
        std::cout << "gen-dataset task=" << task << " episodes=" << task_episodes.size()
                  << " ranks=" << task_info(task).ranks.size() << "\n";
    }
    std::string joined;
    for (const auto &l : lines) joined += l + "\n";
    write_file(fs::path(o.out) / "episodes.jsonl", joined);
    std::cout << "gen-dataset episodes_total=" << lines.size() << " out=" << o.out << "\n";
    return 0;
}

int cmd_eval(const CommonOpts &o, const std::string &agent_spec, const std::string &ablation) {
    std::uint64_t seed = resolve_seed(o.seed);
    Agent agent = agent_from_spec(agent_spec, seed);
    fs::create_directories(o.out);
    std::ostringstream grid, failures;
    grid << "task,rank,agent,sr,width_0,width_1,width_2,width_3,width_ge4\n";
    failures << "task,rank,width,regression,stagnation,timeout_other\n";
    bool any = false;
    for (const auto &task : task_list(o.task)) {
        std::vector<int> ranks = o.rank >= 0 ? std::vector<int>{o.rank} : task_info(task).ranks;
        InstanceSet set = generate_instances(task, o.n, seed, parse_sizes(o));
        for (int rank : ranks) {
            RuleSet rs = load_ruleset(task, rank);
            EvalResult res = run_eval(agent, set.eval, rs, o.max_steps,
                                      ablation_from_name(ablation));
            any = true;
            // SR per episode-width bucket (the Table-5 grid shape).
            double sr_bucket[5] = {0, 0, 0, 0, 0};
            int n_bucket[5] = {0, 0, 0, 0, 0};
            std::map<int, std::map<FailureKind, int>> fail_by_width;
            for (const auto &rec : res.records) {
                int b = std::min(4, static_cast<int>(rec.width));
                sr_bucket[b] += rec.success ? 1 : 0;
                n_bucket[b] += 1;
                if (rec.failure)
                    fail_by_width[static_cast<int>(rec.width)][*rec.failure] += 1;
            }
            grid << task << ',' << rank << ',' << agent_spec << ',' << res.sr;
            for (int b = 0; b < 5; ++b) {
                grid << ',';
                if (n_bucket[b] > 0) grid << sr_bucket[b] / n_bucket[b];
            }
            grid << "\n";
            for (const auto &[w, fk] : fail_by_width) {
                auto get = [&](FailureKind k) {
                    auto it = fk.find(k);
                    return it == fk.end() ? 0 : it->second;
                };
                failures << task << ',' << rank << ',' << w << ','
                         << get(FailureKind::Regression) << ','
                         << get(FailureKind::Stagnation) << ','
                         << get(FailureKind::TimeoutOther) << "\n";
            }
            std::cout << "eval task=" << task << " rank=" << rank << " agent=" << agent_spec
                      << " SR=" << res.sr << "\n";
        }
    }
    if (!any) throw SchemaError("nothing evaluated");
    write_file(fs::path(o.out) / "sr_grid.csv", grid.str());
    write_file(fs::path(o.out) / "failures.csv", failures.str());
    return 0;
}

std::vector<Episode> load_episodes(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open episodes file " + path);
    std::vector<Episode> eps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        eps.push_back(episode_from_jsonl(line));
    }
    return eps;
}

int cmd_stats(const CommonOpts &o, const std::string &episodes_path) {
    std::vector<Episode> eps = load_episodes(episodes_path);
    if (eps.empty()) throw DegenerateInput("no episodes");
    std::vector<StatsRow> rows = dataset_stats(eps);
    write_file(fs::path(o.out) / "stats.csv", stats_to_csv(rows));
    if (o.pretty) {
        std::cout << "rank  N      len(mean+-sd)    U_tok  plan(mean+-sd)\n";
        for (const auto &r : rows)
            std::cout << r.rank << "     " << r.n_instructions << "   " << r.len_mean
                      << " +- " << r.len_sd << "   " << r.unique_tokens << "    "
                      << r.plan_mean << " +- " << r.plan_sd << "\n";
    }
    std::cout << "stats ranks=" << rows.size() << " episodes=" << eps.size()
              << " out=" << o.out << "\n";
    return 0;
}

int cmd_correlate(const CommonOpts &o, const std::string &episodes_path,
                  const std::string &metric) {
    std::vector<Episode> eps = load_episodes(episodes_path);
    if (eps.empty()) throw DegenerateInput("no episodes");
    const Lexicon &lex = default_lexicon();
    std::vector<EvalRecord> records;
    for (const auto &ep : eps) {
        EvalRecord rec;
        rec.episode_ref = ep.instance_ref;
        rec.success = ep.outcome == Outcome::Success;
        rec.rule_calls = ep.rule_calls;
        rec.horizon_bin = horizon_bin_of(ep.rule_calls);
        double tok = 0, ent = 0, vrb = 0;
        for (const auto &st : ep.steps) {
            SurfaceMetrics m = surface_metrics(st.instruction, lex);
            tok += m.tokens;
            ent += m.entities;
            vrb += m.verbs;
        }
        if (!ep.steps.empty()) {
            rec.tokens = tok / static_cast<double>(ep.steps.size());
            rec.entities = ent / static_cast<double>(ep.steps.size());
            rec.verbs = vrb / static_cast<double>(ep.steps.size());
        }
        int wmax = 0;
        for (int w : ep.widths_seen) wmax = std::max(wmax, w);
        rec.width = wmax;
        records.push_back(rec);
    }
    auto bins = horizon_binned_correlation(records, metric);
    std::ostringstream csv;
    csv << "bin,r,n,p\n";
    for (const auto &[bin, bc] : bins)
        csv << horizon_bin_name(bin) << ',' << bc.r << ',' << bc.n << ',' << bc.p << "\n";
    write_file(fs::path(o.out) / ("correlation." + metric + ".csv"), csv.str());
    std::cout << "correlate metric=" << metric << " bins=" << bins.size()
              << " out=" << o.out << "\n";
    return 0;
}

int cmd_export_pddl(const CommonOpts &o) {
    std::uint64_t seed = resolve_seed(o.seed);
    WorldState inst = init_instance(o.task, seed, parse_sizes(o));
    PddlExport ex = export_pddl(inst);
    write_file(fs::path(o.out) / (o.task + ".pddl"), ex.problem);
    write_file(fs::path(o.out) / (o.task + "-domain.pddl"), ex.domain);
    std::cout << "export-pddl task=" << o.task << " out=" << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"granbench: instruction-granularity benchmark engine"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string agent_spec = "oracle";
    std::string ablation = "full";
    std::string episodes_path;
    std::string metric = "width";
    int solve_index = 0;

    auto add_common = [&](CLI::App *cmd, bool needs_task = true) {
        if (needs_task) cmd->add_option("--task", o.task, "task id or 'all'")->required();
        cmd->add_option("--seed", o.seed, "root seed (fallback: GRANBENCH_SEED)");
        cmd->add_option("--out", o.out, "output directory");
        cmd->add_option("--jobs", o.jobs, "parallel workers (default: cores)");
        cmd->add_option("--max-steps", o.max_steps, "episode step budget");
        cmd->add_option("--n", o.n, "instances per task");
        cmd->add_option("--size", o.size_kv, "size param key=value (repeatable)");
        cmd->add_option("--k", o.k, "primary size count shorthand");
        cmd->add_flag("--pretty", o.pretty, "human-readable output");
    };

    auto *gen = app.add_subcommand("gen-instances", "generate solvable instances");
    add_common(gen);
    auto *val = app.add_subcommand("validate-rules", "validate shipped rule sets");
    add_common(val);
    o.rank = -1;
    val->add_option("--rank", o.rank, "rank (default: all shipped ranks)");
    auto *solve = app.add_subcommand("solve", "reference plan for one instance");
    add_common(solve);
    solve->add_option("--index", solve_index, "instance index");
    auto *width = app.add_subcommand("width", "instruction width of a rule set");
    add_common(width);
    width->add_option("--rank", o.rank, "granularity rank")->required();
    auto *instruct = app.add_subcommand("instruct", "print the dynamic instruction stream");
    add_common(instruct);
    instruct->add_option("--rank", o.rank, "granularity rank")->required();
    instruct->add_option("--ablation", ablation, "full|goal|none");
    auto *gd = app.add_subcommand("gen-dataset", "generate the episode dataset");
    add_common(gd);
    gd->add_option("--ablation", ablation, "full|goal|none");
    auto *ev = app.add_subcommand("eval", "evaluate a scripted agent");
    add_common(ev);
    ev->add_option("--rank", o.rank, "rank (default: all shipped ranks)");
    ev->add_option("--agent", agent_spec, "oracle|rule_greedy|noisy:eps|random");
    ev->add_option("--ablation", ablation, "full|goal|none");
    auto *st = app.add_subcommand("stats", "per-rank instruction statistics");
    add_common(st, false);
    st->add_option("--episodes", episodes_path, "episodes.jsonl path")->required();
    auto *corr = app.add_subcommand("correlate", "horizon-binned metric-SR correlation");
    add_common(corr, false);
    corr->add_option("--episodes", episodes_path, "episodes.jsonl path")->required();
    corr->add_option("--metric", metric, "tokens|entities|verbs|width");
    auto *px = app.add_subcommand("export-pddl", "STRIPS-subset export of an instance");
    add_common(px);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_instances(o);
        if (val->parsed()) return cmd_validate_rules(o);
        if (solve->parsed()) return cmd_solve(o, solve_index);
        if (width->parsed()) return cmd_width(o);
        if (instruct->parsed()) return cmd_instruct(o, ablation);
        if (gd->parsed()) return cmd_gen_dataset(o, ablation);
        if (ev->parsed()) return cmd_eval(o, agent_spec, ablation);
        if (st->parsed()) return cmd_stats(o, episodes_path);
        if (corr->parsed()) return cmd_correlate(o, episodes_path, metric);
        if (px->parsed()) return cmd_export_pddl(o);
    } catch (const DomainError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
