// bigprob command-line tool: validate, build, check and simulate models.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bigprob/analysis.hpp"
#include "bigprob/export.hpp"
#include "bigprob/model.hpp"

namespace {

using namespace bigprob;

constexpr int kModelError = 1;
constexpr int kUsageError = 2;

struct Common {
    std::string model;
    std::vector<std::string> defines;
    std::size_t max_states = BuildOptions{}.max_states;
};

ElaborateOptions elaborate_options(const Common& c) {
    ElaborateOptions opts;
    for (const auto& d : c.defines) {
        auto eq = d.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--define", "expected NAME=VALUE, got " + d);
        opts.defines[d.substr(0, eq)] = d.substr(eq + 1);
    }
    return opts;
}

void add_common(CLI::App* cmd, Common& c, bool with_cap) {
    cmd->add_option("model", c.model, "model file (.big)")->required();
    cmd->add_option("-D,--define", c.defines, "override a constant, NAME=VALUE");
    if (with_cap) cmd->add_option("--max-states", c.max_states, "state cap")->check(CLI::PositiveNumber);
}

TransitionSystem build(const SystemSpec& spec, const Common& c) {
    BuildOptions opts;
    opts.max_states = c.max_states;
    return build_transition_system(spec, opts);
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
    auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + path);
    std::cout << path << '\n';
}

int run_validate(const Common& c) {
    auto spec = load_model(c.model, elaborate_options(c));
    std::cout << "ok: " << to_string(spec.kind) << ", " << spec.rules.size() << " rule(s), " << spec.actions.size()
              << " action(s), " << spec.predicates.size() << " predicate(s)\n";
    return 0;
}

int run_full(const Common& c, const std::string& out_dir, const std::string& format, bool rewards_as_states) {
    auto spec = load_model(c.model, elaborate_options(c));
    auto ts = build(spec, c);
    std::string stem = std::filesystem::path(c.model).stem().string();
    if (format == "prism") {
        PrismOptions opts;
        opts.rewards_as_states = rewards_as_states;
        for (const auto& [role, path] : write_bundle(export_prism(ts, opts), out_dir, stem)) std::cout << path << '\n';
    } else if (format == "dot") {
        write_text(out_dir, stem + ".dot", export_dot(ts));
    } else {
        write_text(out_dir, stem + ".json", export_json(ts));
    }
    std::cerr << to_string(ts.kind) << ": " << ts.size() << " states, " << ts.transition_count() << " transitions";
    if (ts.kind == ModelKind::Mdp) std::cerr << ", " << ts.choice_count() << " choices";
    std::cerr << '\n';
    return 0;
}

int run_check(const Common& c, const std::string& query_text, const SolverOptions& solver) {
    Query query;
    try {
        query = parse_query(query_text);
    } catch (const AnalysisError& e) {
        throw CLI::ValidationError("--query", e.what());
    }
    auto spec = load_model(c.model, elaborate_options(c));
    auto ts = build(spec, c);
    auto result = evaluate(ts, query, solver);
    std::cout << format_shortest(result.value.value()) << '\n';
    if (result.value.exact() && result.value.exact()->den() != 1)
        std::cerr << "exact: " << result.value.exact()->str() << '\n';
    if (result.iterations) std::cerr << "iterations: " << *result.iterations << '\n';
    return 0;
}

int run_sim(const Common& c, std::size_t steps, std::uint64_t seed) {
    auto spec = load_model(c.model, elaborate_options(c));
    const bool timed = spec.kind == SystemKind::Sbrs;
    for (const auto& s : simulate(spec, steps, seed)) {
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(s.state)));
        std::cout << s.step << ' ' << hash << ' ' << s.via;
        if (timed) std::cout << ' ' << format_shortest(s.time);
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Build, check and export probabilistic bigraphical reactive systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bigprob 0.1.0");

    Common validate_args, full_args, check_args, sim_args;

    auto* validate = app.add_subcommand("validate", "parse and elaborate a model");
    add_common(validate, validate_args, false);

    auto* full = app.add_subcommand("full", "build the transition system and export it");
    add_common(full, full_args, true);
    const char* env_out = std::getenv("BIGPROB_OUT_DIR");
    std::string out_dir = env_out && *env_out ? env_out : ".";
    std::string format = "prism";
    bool rewards_as_states = false;
    full->add_option("-o,--out", out_dir, "output directory (default $BIGPROB_OUT_DIR or .)");
    full->add_option("-f,--format", format, "prism, dot or json")->check(CLI::IsMember({"prism", "dot", "json"}));
    full->add_flag("--rewards-as-states", rewards_as_states, "fold action rewards into state rewards");

    auto* check = app.add_subcommand("check", "build and evaluate a query");
    add_common(check, check_args, true);
    std::string query;
    SolverOptions solver;
    check->add_option("-q,--query", query, "e.g. \"P=? [ F<=10 goal ]\"")->required();
    check->add_option("--tolerance", solver.tolerance, "value-iteration tolerance")->check(CLI::PositiveNumber);
    check->add_option("--max-iterations", solver.max_iterations, "value-iteration limit")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("sim", "print a random trace");
    add_common(sim, sim_args, false);
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    sim->add_option("-n,--steps", steps, "number of reactions")->required();
    sim->add_option("-s,--seed", seed, "random seed")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*validate) return run_validate(validate_args);
        if (*full) return run_full(full_args, out_dir, format, rewards_as_states);
        if (*check) return run_check(check_args, query, solver);
        if (*sim) return run_sim(sim_args, steps, seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kModelError;
    }
    return kUsageError;
}
