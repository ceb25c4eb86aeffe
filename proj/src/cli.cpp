#include "flowlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "flowlab/bessel.hpp"
#include "flowlab/harness.hpp"
#include "flowlab/occupation.hpp"
#include "flowlab/parallel.hpp"
#include "flowlab/pathcover.hpp"
#include "flowlab/regime.hpp"
#include "flowlab/serialize.hpp"

namespace flowlab {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum class ParamType { Int, UInt, Double, Bool, String, DoubleList, IntList, Tree };

struct ParamSpec {
    const char* key;
    ParamType type;
    json def;
    const char* help;
};

const std::vector<ParamSpec>& command_schema(const std::string& command) {
    static const json default_drift = {{"kind", "constant"}, {"value", 0.0}};
    static const json default_region = {{"kind", "half_space"},
                                        {"level", 1.0},
                                        {"lateral_radius", 8.0}};
    static const std::vector<ParamSpec> flow = {
        {"dimension", ParamType::Int, 2, "ambient dimension n"},
        {"drift", ParamType::Tree, default_drift, "drift field spec (JSON)"},
        {"region", ParamType::Tree, default_region, "initial region spec (JSON)"},
        {"truncation", ParamType::Double, 100.0, "truncation level N; hit threshold 1/N"},
        {"horizon", ParamType::Double, 10.0, "time horizon T"},
        {"dt", ParamType::Double, 1e-4, "outer step size"},
        {"tracer_budget", ParamType::UInt, 128, "boundary tracers"},
        {"path_index", ParamType::UInt, 0, "noise path index"},
        {"dump_path", ParamType::Bool, false, "also dump the driving path (binary)"},
        {"series_points", ParamType::UInt, 2000, "max stored min-distance samples"},
    };
    static const std::vector<ParamSpec> hitprob = {
        {"dimension", ParamType::Int, 2, "ambient dimension n"},
        {"drift", ParamType::Tree, default_drift, "drift field spec (JSON)"},
        {"region", ParamType::Tree, default_region, "initial region spec (JSON)"},
        {"truncation", ParamType::Double, 100.0, "truncation level N"},
        {"horizon", ParamType::Double, 10.0, "time horizon T"},
        {"dt", ParamType::Double, 1e-4, "outer step size"},
        {"tracer_budget", ParamType::UInt, 128, "boundary tracers"},
        {"paths", ParamType::UInt, 1000, "Monte Carlo realizations"},
        {"refine_factor", ParamType::Int, 8, "near-miss refinement factor"},
    };
    static const std::vector<ParamSpec> sweep = {
        {"n_list", ParamType::IntList, json::array({2, 4, 8}), "dimensions"},
        {"c_list", ParamType::DoubleList, json::array({0.0, 0.1, 1.0}), "drift prefactors"},
        {"alpha_list", ParamType::DoubleList, json::array({0.75, 1.0}), "drift exponents"},
        {"paths", ParamType::UInt, 200, "paths per cell"},
        {"region", ParamType::Tree, default_region, "region template"},
        {"truncation", ParamType::Double, 100.0, "truncation level N"},
        {"horizon", ParamType::Double, 10.0, "time horizon T"},
        {"dt", ParamType::Double, 1e-4, "outer step size"},
        {"tracer_budget", ParamType::UInt, 128, "boundary tracers"},
    };
    static const std::vector<ParamSpec> ladder = {
        {"kind", ParamType::String, "hitting", "hitting | not_hitting"},
        {"dimension", ParamType::Int, 2, "ambient dimension n"},
        {"drift", ParamType::Tree, default_drift, "drift field spec (JSON)"},
        {"rho0", ParamType::Double, 1.0, "initial distance"},
        {"max_stages", ParamType::Int, 1, "ladder stages per path"},
        {"paths", ParamType::UInt, 1000, "ladder realizations"},
        {"lateral_radius", ParamType::Double, 8.0, "half-space disc truncation m"},
        {"dt", ParamType::Double, 1e-4, "outer step size"},
        {"stage_horizon", ParamType::Double, 100.0, "per-stage cap, diffusive units"},
        {"budget", ParamType::UInt, 0, "boundary tracers (0: 64*n)"},
        {"absorb_rho", ParamType::Double, 0.0, "hitting: stop once rho <= this"},
    };
    static const std::vector<ParamSpec> bessel = {
        {"nu", ParamType::Double, 2.0, "Bessel dimension (fractional allowed)"},
        {"start", ParamType::Double, 1.0, "starting radius"},
        {"horizon", ParamType::Double, 10.0, "time horizon T"},
        {"dt", ParamType::Double, 1e-4, "step size"},
        {"floor", ParamType::Double, 1e-3, "absorption level"},
        {"paths", ParamType::UInt, 10000, "Monte Carlo paths"},
    };
    static const std::vector<ParamSpec> ct_check = {
        {"n", ParamType::Int, 2, "ball dimension for the exit time"},
        {"samples", ParamType::UInt, 10000, "samples per side"},
        {"dt", ParamType::Double, 1e-4, "step size"},
    };
    static const std::vector<ParamSpec> cover = {
        {"n_list", ParamType::IntList, json::array({4, 16, 64}), "ambient dimensions"},
        {"horizon", ParamType::Double, 60.0, "path horizon T"},
        {"radii", ParamType::DoubleList,
         json::array({std::exp(1.0), std::exp(2.0)}), "ball radii (e^k)"},
        {"paths", ParamType::UInt, 30, "paths per cell"},
        {"dt", ParamType::Double, 1e-4, "step size"},
    };
    static const std::vector<ParamSpec> occupation = {
        {"n", ParamType::Int, 4, "flow dimension (occupation runs in n-1)"},
        {"r", ParamType::Double, 1.0, "ball radius"},
        {"s_grid", ParamType::DoubleList, json::array({2.2, 2.6, 3.0, 3.4}),
         "thresholds; survival of L > s*r^2"},
        {"trials", ParamType::UInt, 4000, "occupation samples"},
        {"dt", ParamType::Double, 1e-4, "step size"},
    };
    static const std::vector<ParamSpec> drift_accum = {
        {"n", ParamType::Int, 16, "ambient dimension"},
        {"c_star", ParamType::Double, 0.05, "drift prefactor"},
        {"alpha", ParamType::Double, 0.75, "drift exponent; F = c_star * n^alpha"},
        {"paths", ParamType::UInt, 1000, "first-stage trajectories"},
        {"lateral_radius", ParamType::Double, 8.0, "half-space disc truncation m"},
        {"dt", ParamType::Double, 1e-4, "step size"},
        {"budget", ParamType::UInt, 256, "boundary tracers"},
        {"test_point", ParamType::DoubleList, json::array(), "point p (default (1,0,...))"},
    };
    static const std::vector<ParamSpec> empty;
    if (command == "flow") return flow;
    if (command == "hitprob") return hitprob;
    if (command == "sweep") return sweep;
    if (command == "ladder") return ladder;
    if (command == "bessel") return bessel;
    if (command == "ct-check") return ct_check;
    if (command == "cover") return cover;
    if (command == "occupation") return occupation;
    if (command == "drift-accum") return drift_accum;
    return empty;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {
        "flow", "hitprob", "sweep",      "ladder",     "bessel",
        "ct-check", "cover",   "occupation", "drift-accum"};
    return names;
}

std::string type_name(ParamType t) {
    switch (t) {
        case ParamType::Int: return "integer";
        case ParamType::UInt: return "nonnegative integer";
        case ParamType::Double: return "number";
        case ParamType::Bool: return "bool";
        case ParamType::String: return "string";
        case ParamType::DoubleList: return "number list";
        case ParamType::IntList: return "integer list";
        case ParamType::Tree: return "JSON object";
    }
    return "?";
}

bool type_matches(ParamType t, const json& v) {
    switch (t) {
        case ParamType::Int: return v.is_number_integer();
        case ParamType::UInt: return v.is_number_unsigned() ||
                                     (v.is_number_integer() && v.get<long long>() >= 0);
        case ParamType::Double: return v.is_number();
        case ParamType::Bool: return v.is_boolean();
        case ParamType::String: return v.is_string();
        case ParamType::DoubleList: {
            if (!v.is_array()) return false;
            for (const auto& x : v)
                if (!x.is_number()) return false;
            return true;
        }
        case ParamType::IntList: {
            if (!v.is_array()) return false;
            for (const auto& x : v)
                if (!x.is_number_integer()) return false;
            return true;
        }
        case ParamType::Tree: return v.is_object();
    }
    return false;
}

json parse_flag_value(ParamType t, const std::string& text, const std::string& key) {
    try {
        switch (t) {
            case ParamType::Int: return std::stoll(text);
            case ParamType::UInt: {
                if (!text.empty() && text[0] == '-')
                    throw UsageError("params." + key + ": expected nonnegative integer");
                return std::stoull(text);
            }
            case ParamType::Double: return std::stod(text);
            case ParamType::Bool: {
                if (text == "true" || text == "1") return true;
                if (text == "false" || text == "0") return false;
                throw UsageError("params." + key + ": expected bool (true/false)");
            }
            case ParamType::String: return text;
            case ParamType::DoubleList: {
                json arr = json::array();
                std::stringstream ss(text);
                std::string item;
                while (std::getline(ss, item, ',')) arr.push_back(std::stod(item));
                return arr;
            }
            case ParamType::IntList: {
                json arr = json::array();
                std::stringstream ss(text);
                std::string item;
                while (std::getline(ss, item, ',')) arr.push_back(std::stoll(item));
                return arr;
            }
            case ParamType::Tree: return parse_json_strict(text);
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("params." + key + ": cannot parse '" + text + "' as " + type_name(t));
    }
    return {};
}

// Allowed keys inside nested drift/region trees; everything else is a typo.
const std::set<std::string>& tree_key_whitelist(const std::string& key) {
    static const std::set<std::string> drift_keys = {
        "kind", "value", "radii", "values", "bound", "lipschitz", "family", "params", "scale"};
    static const std::set<std::string> region_keys = {
        "kind", "dimension", "level", "lateral_radius", "lateral_center", "center",
        "radius", "delta"};
    static const std::set<std::string> none;
    if (key == "drift") return drift_keys;
    if (key == "region") return region_keys;
    return none;
}

void validate_tree_keys(const std::string& key, const json& tree) {
    const auto& allowed = tree_key_whitelist(key);
    for (auto it = tree.begin(); it != tree.end(); ++it)
        if (!allowed.count(it.key()))
            throw UsageError("params." + key + "." + it.key() + ": unknown key");
}

} // namespace

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

json parse_json_strict(const std::string& text) {
    std::vector<std::set<std::string>> stack;
    json::parser_callback_t cb = [&stack](int, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start:
                stack.emplace_back();
                break;
            case json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                if (!stack.back().insert(key).second)
                    throw UsageError("duplicate key '" + key + "'");
                break;
            }
            case json::parse_event_t::object_end:
                stack.pop_back();
                break;
            default:
                break;
        }
        return true;
    };
    try {
        return json::parse(text, cb);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("invalid JSON: ") + e.what());
    }
}

std::string usage_text() {
    std::ostringstream os;
    os << "usage: flowlab <command> [--config FILE] [--seed N] [--out DIR] [--workers N]\n"
          "               [--emit-config] [--<param> VALUE ...]\n\ncommands:\n";
    for (const auto& name : command_names()) os << "  " << name << '\n';
    os << "\n'flowlab <command> --help' lists the command's parameters.\n"
          "FLOWLAB_OUT sets the default output directory.\n";
    return os.str();
}

std::string command_help(const std::string& command) {
    std::ostringstream os;
    os << "parameters of '" << command << "' (defaults in brackets):\n";
    for (const auto& spec : command_schema(command))
        os << "  --" << spec.key << " <" << type_name(spec.type) << ">  " << spec.help
           << "  [" << spec.def.dump() << "]\n";
    os << "common flags: --config FILE, --seed N [1], --out DIR [.], --workers N [1],"
          " --emit-config\n";
    return os.str();
}

RunConfig parse_config(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError(usage_text());
    RunConfig cfg;
    cfg.command = args[0];
    if (cfg.command == "--help" || cfg.command == "-h") throw UsageError(usage_text());
    const auto& schema = command_schema(cfg.command);
    if (schema.empty()) throw UsageError("unknown command '" + cfg.command + "'\n" + usage_text());

    if (const char* env = std::getenv("FLOWLAB_OUT")) cfg.output_dir = env;

    // defaults first, then config file, then flags
    for (const auto& spec : schema) cfg.params[spec.key] = spec.def;

    auto apply_file = [&](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open config file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const json file = parse_json_strict(buf.str());
        if (!file.is_object()) throw UsageError("config file: expected a JSON object");
        for (auto it = file.begin(); it != file.end(); ++it) {
            const std::string& key = it.key();
            if (key == "command") {
                if (it.value() != cfg.command)
                    throw UsageError("command: config file says '" +
                                     it.value().get<std::string>() + "', command line says '" +
                                     cfg.command + "'");
            } else if (key == "seed") {
                if (!it.value().is_number_unsigned() && !it.value().is_number_integer())
                    throw UsageError("seed: expected integer");
                cfg.seed = it.value().get<std::uint64_t>();
            } else if (key == "output_dir") {
                cfg.output_dir = it.value().get<std::string>();
            } else if (key == "workers") {
                cfg.workers = it.value().get<unsigned>();
            } else if (key == "params") {
                if (!it.value().is_object()) throw UsageError("params: expected object");
                for (auto p = it.value().begin(); p != it.value().end(); ++p) {
                    const ParamSpec* found = nullptr;
                    for (const auto& spec : schema)
                        if (p.key() == spec.key) found = &spec;
                    if (!found) throw UsageError("params." + p.key() + ": unknown key");
                    if (!type_matches(found->type, p.value()))
                        throw UsageError("params." + p.key() + ": expected " +
                                         type_name(found->type));
                    if (found->type == ParamType::Tree) validate_tree_keys(p.key(), p.value());
                    cfg.params[p.key()] = p.value();
                }
            } else {
                throw UsageError(key + ": unknown key");
            }
        }
    };

    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg == "--help" || arg == "-h") throw UsageError(command_help(cfg.command));
        if (arg == "--emit-config") {
            cfg.emit_config_only = true;
            continue;
        }
        if (arg.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + arg + "'");
        const std::string key = arg.substr(2);
        if (i + 1 >= args.size()) throw UsageError("--" + key + ": missing value");
        const std::string value = args[++i];
        if (key == "config") {
            apply_file(value);
        } else if (key == "seed") {
            cfg.seed = parse_flag_value(ParamType::UInt, value, "seed").get<std::uint64_t>();
        } else if (key == "out") {
            cfg.output_dir = value;
        } else if (key == "workers") {
            cfg.workers = static_cast<unsigned>(
                parse_flag_value(ParamType::UInt, value, "workers").get<std::uint64_t>());
        } else {
            const ParamSpec* found = nullptr;
            for (const auto& spec : schema)
                if (key == spec.key) found = &spec;
            if (!found) throw UsageError("params." + key + ": unknown key");
            json v = parse_flag_value(found->type, value, key);
            if (!type_matches(found->type, v))
                throw UsageError("params." + key + ": expected " + type_name(found->type));
            if (found->type == ParamType::Tree) validate_tree_keys(key, v);
            cfg.params[key] = std::move(v);
        }
    }
    return cfg;
}

json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["workers"] = workers;
    j["params"] = params;
    return j;
}

bool RunConfig::operator==(const RunConfig& other) const {
    return command == other.command && seed == other.seed && output_dir == other.output_dir &&
           workers == other.workers && params == other.params;
}

// ---------------------------------------------------------------------------
// dispatch

namespace {

class OutputWriter {
public:
    explicit OutputWriter(std::string dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }
    ~OutputWriter() {
        for (const auto& [final_name, tmp] : pending_)
            if (std::filesystem::exists(tmp)) std::filesystem::remove(tmp);
    }
    void write_text(const std::string& name, const std::string& content) {
        const auto tmp = std::filesystem::path(dir_) / (name + ".tmp");
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.close();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
        pending_.emplace_back(name, tmp.string());
    }
    std::vector<std::string> commit() {
        std::vector<std::string> names;
        for (const auto& [final_name, tmp] : pending_) {
            std::filesystem::rename(tmp, std::filesystem::path(dir_) / final_name);
            names.push_back(final_name);
        }
        pending_.clear();
        return names;
    }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> pending_;
};

FlowConfig flow_config_from_params(const RunConfig& cfg) {
    FlowConfig fc;
    fc.dimension = cfg.params.at("dimension").get<int>();
    fc.drift = drift_from_json(cfg.params.at("drift"));
    json region = cfg.params.at("region");
    if (!region.contains("dimension")) region["dimension"] = fc.dimension;
    fc.region = region_from_json(region);
    fc.truncation = cfg.params.at("truncation").get<double>();
    fc.horizon = cfg.params.at("horizon").get<double>();
    fc.dt = cfg.params.at("dt").get<double>();
    fc.tracer_budget = cfg.params.at("tracer_budget").get<std::size_t>();
    fc.seed = cfg.seed;
    if (cfg.params.contains("path_index"))
        fc.path_index = cfg.params.at("path_index").get<std::uint64_t>();
    return fc;
}

void run_flow_command(const RunConfig& cfg, OutputWriter& out) {
    FlowConfig fc = flow_config_from_params(cfg);
    NoiseStream stream(fc.seed, fc.path_index, fc.dimension);
    const FlowResult res = run_flow(fc, stream);
    out.write_text("flow_result.json",
                   flow_result_to_json(res, cfg.params.at("series_points").get<std::size_t>()));
    if (cfg.params.at("dump_path").get<bool>()) {
        const std::vector<double> schedule(res.steps_run, fc.dt);
        const BrownianPath path = generate_path(stream, schedule);
        const auto file = std::filesystem::path(out.dir()) / "flow_path.bin";
        path.save(file.string());
    }
}

void run_hitprob_command(const RunConfig& cfg, OutputWriter& out) {
    FlowConfig fc = flow_config_from_params(cfg);
    const auto est = estimate_hitting_probability(
        fc, cfg.params.at("paths").get<std::size_t>(),
        cfg.params.at("refine_factor").get<int>(), cfg.workers);
    out.write_text("hitprob.json", est.to_json_string());
}

void run_sweep_command(const RunConfig& cfg, OutputWriter& out) {
    FlowConfig base;
    base.drift = DriftField::constant(0.0);
    json region = cfg.params.at("region");
    const auto n_list = cfg.params.at("n_list").get<std::vector<int>>();
    if (n_list.empty()) throw std::runtime_error("sweep: empty n_list");
    if (!region.contains("dimension")) region["dimension"] = n_list.front();
    base.dimension = region.at("dimension").get<int>();
    base.region = region_from_json(region);
    base.truncation = cfg.params.at("truncation").get<double>();
    base.horizon = cfg.params.at("horizon").get<double>();
    base.dt = cfg.params.at("dt").get<double>();
    base.tracer_budget = cfg.params.at("tracer_budget").get<std::size_t>();
    base.seed = cfg.seed;
    const auto table = phase_sweep(n_list, cfg.params.at("c_list").get<std::vector<double>>(),
                                   cfg.params.at("alpha_list").get<std::vector<double>>(),
                                   cfg.params.at("paths").get<std::size_t>(), base, cfg.workers);
    out.write_text("sweep.csv", table.to_csv());
    out.write_text("sweep_summary.txt", table.monotone_summary());
}

void run_ladder_command(const RunConfig& cfg, OutputWriter& out) {
    LadderParams lp;
    lp.dimension = cfg.params.at("dimension").get<int>();
    lp.drift = drift_from_json(cfg.params.at("drift"));
    lp.rho0 = cfg.params.at("rho0").get<double>();
    lp.max_stages = cfg.params.at("max_stages").get<int>();
    lp.dt = cfg.params.at("dt").get<double>();
    lp.stage_horizon = cfg.params.at("stage_horizon").get<double>();
    lp.budget = cfg.params.at("budget").get<std::size_t>();
    lp.lateral_radius = cfg.params.at("lateral_radius").get<double>();
    lp.absorb_rho = cfg.params.at("absorb_rho").get<double>();
    lp.seed = cfg.seed;
    const std::string kind_name = cfg.params.at("kind").get<std::string>();
    RegimeLadder::Kind kind;
    if (kind_name == "hitting")
        kind = RegimeLadder::Kind::Hitting;
    else if (kind_name == "not_hitting")
        kind = RegimeLadder::Kind::NotHitting;
    else
        throw std::runtime_error("ladder: kind must be 'hitting' or 'not_hitting'");

    const auto ensemble = run_ladder_ensemble(
        kind, lp, cfg.params.at("paths").get<std::size_t>(), cfg.workers);
    out.write_text("ladders.jsonl", ladders_to_jsonl(ensemble));

    json summary;
    std::size_t resolved = 0;
    for (const auto& l : ensemble)
        if (l.first_stage_resolved()) ++resolved;
    summary["paths"] = ensemble.size();
    summary["first_stage_resolved"] = resolved;
    if (resolved >= 30) {
        const auto sp = step_probability(ensemble);
        summary["p_up"] = sp.interval.p_hat;
        summary["p_up_lo"] = sp.interval.lo;
        summary["p_up_hi"] = sp.interval.hi;
        summary["verdict"] = sp.verdict;
        const auto pooled = pooled_step_probability(ensemble);
        summary["pooled_p_up"] = pooled.interval.p_hat;
        summary["pooled_stages"] = pooled.resolved;
        summary["mean_step"] = 2.0 * pooled.interval.p_hat - 1.0;
    }
    out.write_text("ladder_summary.json", summary.dump(2));
}

void run_bessel_command(const RunConfig& cfg, OutputWriter& out) {
    BesselSpec spec;
    spec.nu = cfg.params.at("nu").get<double>();
    spec.start = cfg.params.at("start").get<double>();
    spec.horizon = cfg.params.at("horizon").get<double>();
    spec.dt = cfg.params.at("dt").get<double>();
    spec.floor_level = cfg.params.at("floor").get<double>();
    const auto paths = cfg.params.at("paths").get<std::size_t>();

    std::vector<unsigned char> hits(paths, 0);
    std::vector<double> hit_times(paths, 0.0);
    parallel_for_indexed(paths, cfg.workers, [&](std::size_t p) {
        NoiseStream stream(cfg.seed, p, 1);
        const auto res = simulate_bessel(spec, stream);
        hits[p] = res.hit ? 1 : 0;
        hit_times[p] = res.hit ? res.hit_time : -1.0;
    });
    std::size_t hit_count = 0;
    double mean_hit_time = 0.0;
    for (std::size_t p = 0; p < paths; ++p)
        if (hits[p]) {
            ++hit_count;
            mean_hit_time += hit_times[p];
        }
    if (hit_count) mean_hit_time /= static_cast<double>(hit_count);
    const auto w = wilson_interval(hit_count, paths);
    json j;
    j["nu"] = spec.nu;
    j["start"] = spec.start;
    j["horizon"] = spec.horizon;
    j["dt"] = spec.dt;
    j["floor"] = spec.floor_level;
    j["paths"] = paths;
    j["hits"] = hit_count;
    j["p_hat"] = w.p_hat;
    j["wilson_lo"] = w.lo;
    j["wilson_hi"] = w.hi;
    j["mean_hit_time"] = mean_hit_time;
    out.write_text("bessel.json", j.dump(2));
}

void run_ct_command(const RunConfig& cfg, OutputWriter& out) {
    const auto res = ct_identity_check(cfg.params.at("n").get<int>(),
                                       cfg.params.at("samples").get<std::size_t>(),
                                       cfg.params.at("dt").get<double>(), cfg.seed, cfg.workers);
    json j;
    j["n"] = res.n;
    j["samples"] = res.samples;
    j["ks"] = res.ks;
    j["mean_exit"] = res.mean_exit;
    j["mean_occupation"] = res.mean_occupation;
    j["expected_mean"] = 1.0 / static_cast<double>(res.n);
    j["nonconverged"] = res.nonconverged;
    out.write_text("ct_check.json", j.dump(2));

    std::ostringstream csv;
    csv.precision(17);
    csv << "index,exit_time,occupation\n";
    for (std::size_t i = 0; i < res.samples; ++i)
        csv << i << ',' << res.exit_samples[i] << ',' << res.occupation_samples[i] << '\n';
    out.write_text("ct_samples.csv", csv.str());
}

void run_cover_command(const RunConfig& cfg, OutputWriter& out) {
    const auto table = cover_scaling_study(
        cfg.params.at("n_list").get<std::vector<int>>(), cfg.params.at("horizon").get<double>(),
        cfg.params.at("radii").get<std::vector<double>>(),
        cfg.params.at("paths").get<std::size_t>(), cfg.seed,
        cfg.params.at("dt").get<double>(), cfg.workers);
    out.write_text("cover.csv", table.to_csv());
    json j;
    json slopes = json::array();
    for (const auto& [n, slope] : table.slope_by_n)
        slopes.push_back({{"n", n}, {"loglog_slope", slope}});
    j["slopes"] = slopes;
    json coeffs = json::array();
    for (const auto& [r, coeff] : table.count_vs_n_coeff)
        coeffs.push_back({{"r", r}, {"count_vs_n", coeff}});
    j["count_vs_n"] = coeffs;
    out.write_text("cover_summary.json", j.dump(2));
}

void run_occupation_command(const RunConfig& cfg, OutputWriter& out) {
    const auto curve = occupation_tail(
        cfg.params.at("n").get<int>(), cfg.params.at("r").get<double>(),
        cfg.params.at("s_grid").get<std::vector<double>>(),
        cfg.params.at("trials").get<std::size_t>(), cfg.seed,
        cfg.params.at("dt").get<double>(), cfg.workers);
    out.write_text("occupation_tail.csv", curve.to_csv());
    json j;
    j["n"] = curve.n;
    j["r"] = curve.radius;
    j["trials"] = curve.trials;
    j["fitted_rate"] = curve.fitted_rate;
    j["rate_valid"] = curve.rate_valid;
    j["nonconverged"] = curve.nonconverged;
    out.write_text("occupation_summary.json", j.dump(2));
}

void run_drift_accum_command(const RunConfig& cfg, OutputWriter& out) {
    LadderParams lp;
    lp.dimension = cfg.params.at("n").get<int>();
    const double c_star = cfg.params.at("c_star").get<double>();
    const double alpha = cfg.params.at("alpha").get<double>();
    lp.drift = DriftField::constant(
        c_star * std::pow(static_cast<double>(lp.dimension), alpha));
    lp.dt = cfg.params.at("dt").get<double>();
    lp.budget = cfg.params.at("budget").get<std::size_t>();
    lp.lateral_radius = cfg.params.at("lateral_radius").get<double>();
    lp.seed = cfg.seed;
    PointN p = cfg.params.at("test_point").get<PointN>();
    if (p.empty()) {
        p.assign(static_cast<std::size_t>(lp.dimension), 0.0);
        p[0] = 1.0;
    }
    if (static_cast<int>(p.size()) != lp.dimension)
        throw std::runtime_error("drift-accum: test_point dimension mismatch");
    const auto paths = cfg.params.at("paths").get<std::size_t>();

    std::vector<DriftAccumulator> acc(paths);
    parallel_for_indexed(paths, cfg.workers, [&](std::size_t i) {
        LadderParams local = lp;
        local.path_index = i;
        acc[i] = drift_accumulators(local, p);
    });

    std::ostringstream csv;
    csv.precision(17);
    csv << "path,resolved,x1,tau1,lateral_total,vertical_total";
    const int kinf = acc.empty() ? 1 : acc.front().k_infinity;
    for (int k = 1; k <= kinf; ++k) csv << ",lateral_A" << k << ",vertical_A" << k;
    csv << ",lateral_far,vertical_far\n";
    std::size_t vertical_ok = 0, resolved = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        const auto& a = acc[i];
        csv << i << ',' << (a.stage_resolved ? 1 : 0) << ',' << a.x1 << ',' << a.tau1 << ','
            << a.lateral_total << ',' << a.vertical_total;
        for (std::size_t k = 0; k < a.lateral_by_annulus.size(); ++k)
            csv << ',' << a.lateral_by_annulus[k] << ',' << a.vertical_by_annulus[k];
        csv << '\n';
        if (a.stage_resolved) {
            ++resolved;
            if (a.vertical_total <= 0.125) ++vertical_ok;
        }
    }
    out.write_text("accumulators.csv", csv.str());
    json j;
    j["paths"] = paths;
    j["resolved"] = resolved;
    j["F"] = lp.drift.bound();
    j["vertical_leq_eighth_fraction"] =
        resolved ? static_cast<double>(vertical_ok) / static_cast<double>(resolved) : 0.0;
    out.write_text("drift_accum_summary.json", j.dump(2));
}

} // namespace

int dispatch(const RunConfig& cfg) {
    if (cfg.emit_config_only) {
        std::cout << cfg.to_json().dump(2) << std::endl;
        return 0;
    }
    const auto started = std::chrono::steady_clock::now();
    OutputWriter out(cfg.output_dir);
    try {
        if (cfg.command == "flow")
            run_flow_command(cfg, out);
        else if (cfg.command == "hitprob")
            run_hitprob_command(cfg, out);
        else if (cfg.command == "sweep")
            run_sweep_command(cfg, out);
        else if (cfg.command == "ladder")
            run_ladder_command(cfg, out);
        else if (cfg.command == "bessel")
            run_bessel_command(cfg, out);
        else if (cfg.command == "ct-check")
            run_ct_command(cfg, out);
        else if (cfg.command == "cover")
            run_cover_command(cfg, out);
        else if (cfg.command == "occupation")
            run_occupation_command(cfg, out);
        else if (cfg.command == "drift-accum")
            run_drift_accum_command(cfg, out);
        else
            throw UsageError("unknown command '" + cfg.command + "'");

        json manifest;
        manifest["command"] = cfg.command;
        manifest["config"] = cfg.to_json();
        manifest["config_hash"] = fnv1a64(cfg.to_json().dump());
        manifest["versions"] = {{"flowlab", kVersion}};
        // outputs committed after the manifest is written alongside them
        out.write_text("manifest.json", manifest.dump(2));
        const auto names = out.commit();
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        std::cerr << cfg.command << ": wrote";
        for (const auto& n : names) std::cerr << ' ' << n;
        std::cerr << " in " << cfg.output_dir << " (wall_time_ms=" << elapsed << ")\n";
        return 0;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << cfg.command << ": error: " << e.what() << "\n";
        return 1;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const RunConfig cfg = parse_config(args);
        return dispatch(cfg);
    } catch (const UsageError& e) {
        const std::string msg = e.what();
        std::cerr << msg;
        if (!msg.empty() && msg.back() != '\n') std::cerr << '\n';
        // --help goes through here as well; treat explicit help as success
        for (const auto& a : args)
            if (a == "--help" || a == "-h") return 0;
        return 2;
    }
}

} // namespace flowlab
