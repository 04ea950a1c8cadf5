#include "granbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "granbench/planner.hpp"
#include "granbench/tasks.hpp"

namespace granbench {

using ordered_json = nlohmann::ordered_json;

// --- Instances ---

InstanceSet generate_instances(const std::string &task_id, int n, std::uint64_t seed,
                               const SizeParams &size_overrides) {
    if (n < 1) throw SchemaError("generate_instances: n must be >= 1");
    InstanceSet set;
    set.task_id = task_id;
    set.sizes = resolve_sizes(task_id, size_overrides);
    set.seed = seed;
    std::set<std::string> seen;
    std::vector<WorldState> all;
    std::uint64_t sub = 0;
    while (static_cast<int>(all.size()) < n) {
        std::uint64_t layout_seed = derive_seed(seed, sub++);
        WorldState s = init_instance(task_id, layout_seed, size_overrides);
        std::string key = instance_to_json_text(s, layout_seed, set.sizes);
        if (!seen.insert(key).second) continue;  // distinctness
        all.push_back(std::move(s));
        if (sub > static_cast<std::uint64_t>(n) * 1000)
            throw InfeasibleLayout("could not generate enough distinct instances");
    }
    // 5:1 train/eval split.
    int n_eval = std::max(1, n / 6);
    int n_train = n - n_eval;
    set.train.assign(all.begin(), all.begin() + n_train);
    set.eval.assign(all.begin() + n_train, all.end());
    return set;
}

namespace {

ordered_json instance_json(const WorldState &s, std::uint64_t layout_seed,
                           const SizeParams &sizes) {
    ordered_json j;
    j["v"] = 1;
    j["task_id"] = s.task_id;
    j["layout_seed"] = layout_seed;
    ordered_json js = ordered_json::object();
    for (const auto &[k, v] : sizes) js[k] = v;
    j["size_params"] = js;
    j["grid"] = {{"width", s.grid_width}, {"height", s.grid_height}};
    ordered_json objs = ordered_json::array();
    for (const auto &o : s.objects) {
        ordered_json jo;
        jo["id"] = o.id;
        jo["type"] = o.type;
        jo["pos"] = {o.pos.col, o.pos.row};
        ordered_json fl = ordered_json::object();
        for (int i = 0; i < kNumFlags; ++i) {
            Flag f = static_cast<Flag>(i);
            if (flag_applicable(o.type, f)) fl[flag_name(f)] = o.flag(f);
        }
        jo["flags"] = fl;
        jo["container"] = o.container ? ordered_json(*o.container) : ordered_json(nullptr);
        objs.push_back(jo);
    }
    j["objects"] = objs;
    j["agent"] = {{"pos", {s.agent_pos.col, s.agent_pos.row}}, {"dir", dir_name(s.agent_dir)}};
    ordered_json goal = ordered_json::array();
    for (const auto &c : s.goal.conjuncts)
        goal.push_back({{"feature", c.feature}, {"op", constraint_op_name(c.op)}});
    j["goal"] = goal;
    return j;
}

}  // namespace

std::string instance_to_json_text(const WorldState &s, std::uint64_t layout_seed,
                                  const SizeParams &sizes) {
    return instance_json(s, layout_seed, sizes).dump();
}

WorldState instance_from_json_text(const std::string &text) {
    ordered_json j = ordered_json::parse(text);
    if (!j.contains("v") || j["v"].get<int>() != 1)
        throw SchemaError("unsupported instance schema version");
    WorldState s;
    s.task_id = j.at("task_id").get<std::string>();
    s.grid_width = j.at("grid").at("width").get<int>();
    s.grid_height = j.at("grid").at("height").get<int>();
    for (const auto &jo : j.at("objects")) {
        ObjectInstance o;
        o.id = jo.at("id").get<std::string>();
        o.type = jo.at("type").get<std::string>();
        o.pos = {jo.at("pos")[0].get<int>(), jo.at("pos")[1].get<int>()};
        for (auto it = jo.at("flags").begin(); it != jo.at("flags").end(); ++it)
            o.set_flag(flag_from_name(it.key()), it.value().get<bool>());
        if (!jo.at("container").is_null()) o.container = jo.at("container").get<std::string>();
        s.objects.push_back(std::move(o));
    }
    s.agent_pos = {j.at("agent").at("pos")[0].get<int>(), j.at("agent").at("pos")[1].get<int>()};
    s.agent_dir = dir_from_name(j.at("agent").at("dir").get<std::string>());
    for (const auto &jc : j.at("goal"))
        s.goal.conjuncts.push_back({jc.at("feature").get<std::string>(),
                                    constraint_op_from_name(jc.at("op").get<std::string>())});
    return s;
}

std::string instance_set_to_json_text(const InstanceSet &set) {
    ordered_json j;
    j["v"] = 1;
    j["task_id"] = set.task_id;
    j["seed"] = set.seed;
    ordered_json sizes = ordered_json::object();
    for (const auto &[k, v] : set.sizes) sizes[k] = v;
    j["size_params"] = sizes;
    j["split"] = {{"train", set.train.size()}, {"eval", set.eval.size()}};
    auto dump_side = [&](const std::vector<WorldState> &side) {
        ordered_json arr = ordered_json::array();
        for (const auto &s : side) arr.push_back(instance_json(s, set.seed, set.sizes));
        return arr;
    };
    j["train"] = dump_side(set.train);
    j["eval"] = dump_side(set.eval);
    return j.dump(2) + "\n";
}

// --- Binning ---

const char *gran_class_name(GranClass c) {
    switch (c) {
    case GranClass::F: return "F";
    case GranClass::M: return "M";
    case GranClass::C: return "C";
    }
    return "?";
}

GranularityBinning bin_granularity(const std::string &task_id,
                                   const std::map<int, int> &widths_by_rank) {
    if (widths_by_rank.empty())
        throw SchemaError("bin_granularity: at least one rank required");
    GranularityBinning b;
    b.task_id = task_id;
    b.widths = widths_by_rank;

    std::vector<int> distinct;
    for (const auto &[rank, w] : widths_by_rank) distinct.push_back(w);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::map<int, GranClass> class_of_width;
    int d = static_cast<int>(distinct.size());
    if (d >= 3) {
        // Three contiguous groups, as even as possible, extras to the front.
        int base = d / 3, rem = d % 3;
        int sizes[3] = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
        int idx = 0;
        for (int g = 0; g < 3; ++g)
            for (int i = 0; i < sizes[g]; ++i)
                class_of_width[distinct[static_cast<std::size_t>(idx++)]] =
                    g == 0 ? GranClass::F : (g == 1 ? GranClass::M : GranClass::C);
    } else {
        // Priority-fill: F gets the minimum, C the maximum, M duplicates C.
        b.degenerate = true;
        class_of_width[distinct.front()] = GranClass::F;
        class_of_width[distinct.back()] = d == 1 ? GranClass::F : GranClass::C;
        // With one distinct width every class is that width; with two, M
        // duplicates C. The per-rank map below resolves via width lookup.
    }

    for (const auto &[rank, w] : widths_by_rank) {
        if (d >= 3) {
            b.class_of[rank] = class_of_width.at(w);
        } else if (d == 1) {
            b.class_of[rank] = GranClass::F;  // F=M=C, represented as F
        } else {
            b.class_of[rank] = (w == distinct.front()) ? GranClass::F : GranClass::C;
        }
    }
    return b;
}

std::string binning_to_json_text(const GranularityBinning &b) {
    ordered_json j;
    j["v"] = 1;
    j["task_id"] = b.task_id;
    ordered_json cls = ordered_json::object();
    for (const auto &[rank, c] : b.class_of) cls[std::to_string(rank)] = gran_class_name(c);
    j["class_of"] = cls;
    ordered_json ws = ordered_json::object();
    for (const auto &[rank, w] : b.widths) ws[std::to_string(rank)] = w;
    j["widths"] = ws;
    j["degenerate"] = b.degenerate;
    return j.dump(2) + "\n";
}

// --- Mixture sampling ---

std::vector<std::pair<GranClass, int>> sample_mixture(
    const std::map<GranClass, std::vector<int>> &episodes_by_class,
    const MixtureRatio &ratio, std::uint64_t seed, int total_draws) {
    if (ratio.f < 0 || ratio.m < 0 || ratio.c < 0 || ratio.f + ratio.m + ratio.c == 0)
        throw SchemaError("bad mixture ratio");
    struct ClassState {
        GranClass cls;
        int weight;
        std::vector<int> pool;
        std::vector<int> order;  // current pass, consumed from the back
        Rng rng;
    };
    std::vector<ClassState> classes;
    auto add_class = [&](GranClass c, int w, std::uint64_t stream) {
        if (w == 0) return;
        auto it = episodes_by_class.find(c);
        if (it == episodes_by_class.end() || it->second.empty())
            throw EmptyClass(std::string("class ") + gran_class_name(c) +
                             " has nonzero ratio but no episodes");
        classes.push_back({c, w, it->second, {}, Rng(derive_seed(seed, stream))});
    };
    add_class(GranClass::F, ratio.f, 0);
    add_class(GranClass::M, ratio.m, 1);
    add_class(GranClass::C, ratio.c, 2);

    auto refill = [](ClassState &cs) {
        cs.order = cs.pool;
        // Fisher-Yates; draws without replacement within each pass.
        for (int i = static_cast<int>(cs.order.size()) - 1; i > 0; --i) {
            int j = rng_int(cs.rng, 0, i);
            std::swap(cs.order[static_cast<std::size_t>(i)], cs.order[static_cast<std::size_t>(j)]);
        }
    };

    // Window pattern: weights interleaved by largest-remainder so each window
    // of (f+m+c) draws matches the ratio exactly.
    std::vector<GranClass> window;
    {
        std::vector<double> err(classes.size(), 0.0);
        int window_len = 0;
        for (const auto &cs : classes) window_len += cs.weight;
        for (int i = 0; i < window_len; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 0; c < classes.size(); ++c) {
                err[c] += static_cast<double>(classes[c].weight) / window_len;
                if (err[c] > err[best]) best = c;
            }
            err[best] -= 1.0;
            window.push_back(classes[best].cls);
        }
    }

    std::vector<std::pair<GranClass, int>> stream;
    stream.reserve(static_cast<std::size_t>(total_draws));
    std::size_t wpos = 0;
    while (static_cast<int>(stream.size()) < total_draws) {
        GranClass c = window[wpos];
        wpos = (wpos + 1) % window.size();
        for (auto &cs : classes) {
            if (cs.cls != c) continue;
            if (cs.order.empty()) refill(cs);
            stream.push_back({c, cs.order.back()});
            cs.order.pop_back();
            break;
        }
    }
    return stream;
}

// --- Stats table ---

std::vector<StatsRow> dataset_stats(const std::vector<Episode> &episodes) {
    struct Acc {
        std::vector<double> lens;
        std::set<std::string> tokens;
        std::vector<double> plans;
    };
    std::map<int, Acc> by_rank;
    for (const auto &e : episodes) {
        Acc &acc = by_rank[e.rank];
        acc.plans.push_back(static_cast<double>(e.steps.size()));
        // One instruction instance per activation: count distinct issues (the
        // sticky repeats differ only in the step prefix).
        std::string prev_rule;
        for (const auto &st : e.steps) {
            if (st.instruction.text.empty()) continue;
            if (st.instruction.rule_id != prev_rule) {
                int words = 0;
                std::istringstream ss(st.instruction.text);
                std::string w;
                while (ss >> w) {
                    ++words;
                    acc.tokens.insert(w);
                }
                acc.lens.push_back(words);
                prev_rule = st.instruction.rule_id;
            } else {
                std::istringstream ss(st.instruction.text);
                std::string w;
                while (ss >> w) acc.tokens.insert(w);
            }
        }
    }
    auto mean_sd = [](const std::vector<double> &xs) {
        if (xs.empty()) return std::pair<double, double>{0.0, 0.0};
        double m = 0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double v = 0;
        for (double x : xs) v += (x - m) * (x - m);
        v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
        return std::pair<double, double>{m, std::sqrt(v)};
    };
    std::vector<StatsRow> rows;
    for (const auto &[rank, acc] : by_rank) {
        StatsRow r;
        r.rank = rank;
        r.n_instructions = static_cast<long>(acc.lens.size());
        auto [lm, lsd] = mean_sd(acc.lens);
        r.len_mean = lm;
        r.len_sd = lsd;
        r.unique_tokens = static_cast<long>(acc.tokens.size());
        auto [pm, psd] = mean_sd(acc.plans);
        r.plan_mean = pm;
        r.plan_sd = psd;
        rows.push_back(r);
    }
    return rows;
}

std::string stats_to_csv(const std::vector<StatsRow> &rows) {
    std::ostringstream out;
    out << "rank,n_instructions,len_mean,len_sd,unique_tokens,plan_mean,plan_sd\n";
    out.setf(std::ios::fixed);
    out.precision(2);
    for (const auto &r : rows)
        out << r.rank << ',' << r.n_instructions << ',' << r.len_mean << ',' << r.len_sd
            << ',' << r.unique_tokens << ',' << r.plan_mean << ',' << r.plan_sd << '\n';
    return out.str();
}

// --- Episode JSONL ---

namespace {

ordered_json vector_json(const FeatureVector &v) {
    ordered_json j = ordered_json::object();
    for (std::size_t i = 0; i < v.names.size(); ++i) {
        const FeatureValue &fv = v.values[i];
        if (fv.is_bool)
            j[v.names[i]] = fv.value != 0;
        else if (fv.value == kInf)
            j[v.names[i]] = "INF";
        else
            j[v.names[i]] = fv.value;
    }
    return j;
}

FeatureVector vector_from_json(const ordered_json &j) {
    FeatureVector v;
    for (auto it = j.begin(); it != j.end(); ++it) {
        v.names.push_back(it.key());
        if (it.value().is_boolean())
            v.values.push_back({true, it.value().get<bool>() ? 1 : 0});
        else if (it.value().is_string())
            v.values.push_back({false, kInf});
        else
            v.values.push_back({false, it.value().get<int>()});
    }
    return v;
}

}  // namespace

std::string episode_to_jsonl(const Episode &e) {
    ordered_json j;
    j["v"] = 1;
    j["instance_ref"] = e.instance_ref;
    j["task_id"] = e.task_id;
    j["rank"] = e.rank;
    j["agent"] = e.agent;
    j["seed"] = e.seed;
    j["rule_calls"] = e.rule_calls;
    j["outcome"] = outcome_name(e.outcome);
    j["widths_seen"] = e.widths_seen;
    j["defect"] = e.defect;
    ordered_json goal = ordered_json::array();
    for (const auto &c : e.goal.conjuncts)
        goal.push_back({{"feature", c.feature}, {"op", constraint_op_name(c.op)}});
    j["goal"] = goal;
    ordered_json steps = ordered_json::array();
    for (const auto &st : e.steps) {
        ordered_json js;
        js["t"] = st.t;
        js["observation"] = {{"width", st.observation.width},
                             {"height", st.observation.height},
                             {"data", st.observation.data}};
        js["vector"] = vector_json(st.vector);
        js["instruction"] = {{"text", st.instruction.text},
                             {"rule_id", st.instruction.rule_id},
                             {"step_index", st.instruction.step_index},
                             {"rank", st.instruction.rank},
                             {"ablation", ablation_name(st.instruction.ablation)}};
        js["action"] = {{"kind", action_kind_name(st.action.kind)},
                        {"target", st.action.target ? ordered_json(*st.action.target)
                                                    : ordered_json(nullptr)}};
        steps.push_back(js);
    }
    j["steps"] = steps;
    return j.dump();
}

Episode episode_from_jsonl(const std::string &line) {
    ordered_json j = ordered_json::parse(line);
    Episode e;
    e.instance_ref = j.at("instance_ref").get<std::string>();
    e.task_id = j.at("task_id").get<std::string>();
    e.rank = j.at("rank").get<int>();
    e.agent = j.at("agent").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.rule_calls = j.at("rule_calls").get<int>();
    std::string oc = j.at("outcome").get<std::string>();
    if (oc == "success") e.outcome = Outcome::Success;
    else if (oc == "regression") e.outcome = Outcome::Regression;
    else if (oc == "stagnation") e.outcome = Outcome::Stagnation;
    else e.outcome = Outcome::Timeout;
    for (const auto &w : j.at("widths_seen")) e.widths_seen.push_back(w.get<int>());
    e.defect = j.value("defect", false);
    for (const auto &jc : j.at("goal"))
        e.goal.conjuncts.push_back({jc.at("feature").get<std::string>(),
                                    constraint_op_from_name(jc.at("op").get<std::string>())});
    for (const auto &js : j.at("steps")) {
        EpisodeStep st;
        st.t = js.at("t").get<int>();
        st.observation.width = js.at("observation").at("width").get<int>();
        st.observation.height = js.at("observation").at("height").get<int>();
        for (const auto &d : js.at("observation").at("data"))
            st.observation.data.push_back(d.get<int>());
        st.vector = vector_from_json(js.at("vector"));
        st.instruction.text = js.at("instruction").at("text").get<std::string>();
        st.instruction.rule_id = js.at("instruction").at("rule_id").get<std::string>();
        st.instruction.step_index = js.at("instruction").at("step_index").get<int>();
        st.instruction.rank = js.at("instruction").at("rank").get<int>();
        st.instruction.ablation =
            ablation_from_name(js.at("instruction").at("ablation").get<std::string>());
        st.action.kind = action_kind_from_name(js.at("action").at("kind").get<std::string>());
        if (!js.at("action").at("target").is_null())
            st.action.target = js.at("action").at("target").get<std::string>();
        e.steps.push_back(std::move(st));
    }
    return e;
}

}  // namespace granbench
