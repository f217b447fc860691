#pragma once

#include <array>

#include "tgr/compile.hpp"

namespace tgr {

// A context is a term graph whose unlabelled vertices are the holes.
struct Context {
    TermGraph graph;
};

std::vector<VertexId> holes(const TermGraph& g);

// Substitution of a plug graph for a subset of a context's holes.
struct Substitution {
    std::map<VertexId, VertexId> xi;  // hole of C -> vertex of G
};

struct SubstituteResult {
    TermGraph graph;
    std::map<VertexId, VertexId> from_context;  // surviving C vertices -> result
    std::map<VertexId, VertexId> from_plug;     // G vertices -> result
};

// The five-clause plugging construction; the plug's root must be in the range
// of xi. Vertex sets are kept disjoint by re-numbering into a fresh arena.
SubstituteResult substitute(const Context& C, const Substitution& xi, const TermGraph& G);

// Performs one innermost step inside the plugged-in G and checks that every
// redex-free multi-rooted subgraph of G designated by xi-image roots is
// iso-preserved. `fault` injects a firing defect for mutation testing.
bool check_context_preservation(const Context& C, const Substitution& xi, const TermGraph& G,
                                const RuleSet& rs, FireFault fault = FireFault::None);

// ---------------------------------------------------------------------------
// Strategy / confluence experiments.

struct StrategyRun {
    std::string strategy;
    std::uint64_t steps = 0;
    std::uint64_t max_size = 0;
    CanonicalKey final_key;
    bool completed = true;  // false when a budget was exceeded
};

struct ConfluenceReport {
    std::vector<StrategyRun> runs;  // outermost, innermost, then the random trials
    bool all_normal_forms_agree = false;
    bool ordering_holds = false;  // outermost <= every random <= innermost
    std::uint64_t outermost_steps = 0;
    std::uint64_t innermost_steps = 0;
};

ConfluenceReport confluence_experiment(const TermGraph& g, const RuleSet& rs, unsigned trials,
                                       std::uint64_t seed, const Limits& limits = {});

std::string report_to_json(const ConfluenceReport& r);

// ---------------------------------------------------------------------------
// Polynomial bound fitting.

struct NoFit : std::runtime_error {
    explicit NoFit(const std::string& msg) : std::runtime_error(msg) {}
};

struct BoundFit {
    unsigned degree = 0;
    std::uint64_t coeff = 0;     // leading coefficient of c * x^degree + offset
    std::uint64_t offset = 0;
    // (input size, measured, bound) triples over the whole grid
    std::vector<std::array<std::uint64_t, 3>> residuals;

    std::uint64_t eval(std::uint64_t x) const;
};

// Fits the minimal-degree natural-coefficient bound c * x^d + c0 dominating
// the lower half of the grid, then validates dominance on the upper half.
BoundFit bound_fit(std::vector<std::pair<std::uint64_t, std::uint64_t>> points,
                   unsigned degree_max);

// One bound-grid measurement row for a compiled program.
struct GridPoint {
    std::uint64_t input_size = 0;  // |G|
    std::uint64_t steps = 0;       // m
    std::uint64_t max_size = 0;    // max |H_j|
    std::uint64_t final_size = 0;  // |H_m|
    std::map<unsigned, std::uint64_t> tier_in;   // |G|_i
    std::map<unsigned, std::uint64_t> tier_out;  // |H_m|_i
};

// Deterministic input family: per-argument left-spine terms of the requested
// size over the program's signature.
std::vector<TermPtr> spine_args(const Signature& sig, const TierSig& tiers, std::uint64_t per_arg,
                                const SymbolTable& syms);

std::vector<GridPoint> measure_grid(const CompiledProgram& p, const std::vector<std::uint64_t>& sizes,
                                    const Limits& limits = {});

std::string grid_to_csv(const std::vector<GridPoint>& grid);

}  // namespace tgr
