#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tgr/dsl.hpp"
#include "tgr/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTier = 1;
constexpr int kExitBudget = 2;
constexpr int kExitParse = 3;
constexpr int kExitUsage = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tgr::ParseError(0, 0, "cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

tgr::TermPtr input_term(const tgr::ProgramFile& prog, const std::string& text,
                        const tgr::SymbolTable& syms) {
    auto it = prog.term_constants.find(text);
    try {
        return tgr::parse_term(it != prog.term_constants.end() ? it->second : text, syms);
    } catch (const std::invalid_argument& e) {
        throw tgr::ParseError(0, 0, e.what());
    }
}

struct Loaded {
    tgr::ProgramFile prog;
    tgr::CompiledProgram compiled;
    std::vector<tgr::TermPtr> args;
};

Loaded load(const std::string& file, const std::string& fn_name,
            const std::vector<std::string>& term_texts, bool check_arity = true) {
    Loaded l{tgr::parse_program(slurp(file)), {}, {}};
    l.compiled = tgr::compile(l.prog.fn(fn_name), l.prog.sig);
    for (const auto& t : term_texts) l.args.push_back(input_term(l.prog, t, *l.compiled.symbols));
    if (check_arity && l.args.size() != l.compiled.tiersig.inputs.size())
        throw tgr::TierError(tgr::TierError::Kind::Structure, {},
                             fn_name + " expects " +
                                 std::to_string(l.compiled.tiersig.inputs.size()) +
                                 " arguments, got " + std::to_string(l.args.size()));
    return l;
}

nlohmann::json stats_json(const tgr::Metrics& m, const tgr::TermGraph& final_graph) {
    nlohmann::json j;
    j["steps"] = m.steps;
    j["max_size"] = m.max_size;
    j["final_size"] = tgr::size(final_graph);
    j["tier_sizes"] = nlohmann::json::object();
    for (auto [tier, n] : m.tier_sizes_final) j["tier_sizes"][std::to_string(tier)] = n;
    return j;
}

int cmd_check(const std::string& file) {
    tgr::ProgramFile prog = tgr::parse_program(slurp(file));
    for (const auto& [name, fn] : prog.fns) {
        tgr::check_tiers(fn, prog.sig);
        std::cout << name << " @ " << tgr::to_string(fn->sig) << " ok\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& file, const std::string& fn, const std::vector<std::string>& terms,
            bool want_unfold, std::uint64_t unfold_cap) {
    Loaded l = load(file, fn, terms);
    tgr::RunResult r = tgr::run(l.compiled, l.args);
    nlohmann::json j = stats_json(r.metrics, r.graph);
    if (want_unfold) {
        tgr::TermPtr t = tgr::unfold(r.graph, unfold_cap);
        j["unfold_size"] = t->tree_size;
        std::cout << tgr::to_string(tgr::erase_tiers(t, *l.compiled.symbols), *l.compiled.symbols)
                  << "\n";
    }
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int cmd_trace(const std::string& file, const std::string& fn,
              const std::vector<std::string>& terms) {
    Loaded l = load(file, fn, terms);
    tgr::TraceSink sink = [](std::uint64_t step, const std::string& rule, tgr::VertexId root,
                             std::uint64_t size_after) {
        nlohmann::json j;
        j["step"] = step;
        j["rule"] = rule;
        j["root"] = root;
        j["size"] = size_after;
        std::cout << j.dump() << "\n";
    };
    tgr::RunResult r = tgr::run(l.compiled, l.args, {}, sink);
    std::cout << stats_json(r.metrics, r.graph).dump() << "\n";
    return kExitOk;
}

int cmd_dot(const std::string& file, const std::string& fn, const std::vector<std::string>& terms,
            bool final_only) {
    Loaded l = load(file, fn, terms);
    tgr::TermGraph g = tgr::build_call_graph(l.compiled, l.args);
    if (!final_only) std::cout << tgr::to_dot(g, "initial");
    tgr::RunResult r = tgr::run(l.compiled, l.args);
    std::cout << tgr::to_dot(r.graph, "final");
    return kExitOk;
}

int cmd_bench(const std::string& file, const std::string& fn, const std::string& sizes_spec,
              std::uint64_t stride) {
    auto dots = sizes_spec.find("..");
    if (dots == std::string::npos)
        throw CLI::ValidationError("--sizes", "expected a..b, got " + sizes_spec);
    std::uint64_t a = std::stoull(sizes_spec.substr(0, dots));
    std::uint64_t b = std::stoull(sizes_spec.substr(dots + 2));
    if (a == 0 || b < a) throw CLI::ValidationError("--sizes", "need 1 <= a <= b");
    std::vector<std::uint64_t> sizes;
    for (std::uint64_t s = a; s <= b; s += stride) sizes.push_back(s);
    Loaded l = load(file, fn, {}, false);
    std::cout << tgr::grid_to_csv(tgr::measure_grid(l.compiled, sizes));
    return kExitOk;
}

int cmd_confluence(const std::string& file, const std::string& fn,
                   const std::vector<std::string>& terms, unsigned trials, std::uint64_t seed) {
    Loaded l = load(file, fn, terms);
    tgr::TermGraph g = tgr::build_call_graph(l.compiled, l.args);
    tgr::ConfluenceReport rep = tgr::confluence_experiment(g, l.compiled.ruleset, trials, seed);
    std::cout << tgr::report_to_json(rep) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tiered-recursion graph rewriting toolkit"};
    app.require_subcommand(1);

    std::string file, fn, sizes_spec = "1..20", unfold_arg;
    std::vector<std::string> terms;
    bool final_only = false;
    std::uint64_t stride = 1, seed = 0;
    unsigned trials = 16;

    auto* check = app.add_subcommand("check", "tier-check every function in a program");
    check->add_option("file", file)->required();

    auto* run = app.add_subcommand("run", "normalize a call and print stats");
    run->add_option("file", file)->required();
    run->add_option("fn", fn)->required();
    run->add_option("terms", terms);
    auto* unfold_opt = run->add_option("--unfold", unfold_arg, "print the unfolded result term")
                           ->expected(0, 1);

    auto* trace = app.add_subcommand("trace", "normalize, logging one JSON line per step");
    trace->add_option("file", file)->required();
    trace->add_option("fn", fn)->required();
    trace->add_option("terms", terms);

    auto* dot = app.add_subcommand("dot", "emit DOT for the initial and final graphs");
    dot->add_option("file", file)->required();
    dot->add_option("fn", fn)->required();
    dot->add_option("terms", terms);
    dot->add_flag("--final-only", final_only);

    auto* bench = app.add_subcommand("bench", "measure a bound grid, CSV on stdout");
    bench->add_option("file", file)->required();
    bench->add_option("fn", fn)->required();
    bench->add_option("--sizes", sizes_spec, "input sizes a..b");
    bench->add_option("--stride", stride);

    auto* confl = app.add_subcommand("confluence", "strategy comparison report");
    confl->add_option("file", file)->required();
    confl->add_option("fn", fn)->required();
    confl->add_option("terms", terms);
    confl->add_option("--trials", trials);
    confl->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_check(file);
        if (run->parsed()) {
            std::uint64_t cap = unfold_arg.empty() ? 1'000'000 : std::stoull(unfold_arg);
            return cmd_run(file, fn, terms, unfold_opt->count() > 0, cap);
        }
        if (trace->parsed()) return cmd_trace(file, fn, terms);
        if (dot->parsed()) return cmd_dot(file, fn, terms, final_only);
        if (bench->parsed()) return cmd_bench(file, fn, sizes_spec, stride);
        if (confl->parsed()) return cmd_confluence(file, fn, terms, trials, seed);
    } catch (const tgr::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitParse;
    } catch (const tgr::TierError& e) {
        std::cerr << "tier error: " << e.what() << "\n";
        return kExitTier;
    } catch (const tgr::CapExceeded& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
    } catch (const tgr::LimitExceeded& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
    } catch (const tgr::BudgetExceeded& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
