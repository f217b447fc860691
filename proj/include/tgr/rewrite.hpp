#pragma once

#include <functional>
#include <map>
#include <random>

#include "tgr/graph.hpp"

namespace tgr {

struct LimitExceeded : std::runtime_error {
    explicit LimitExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct Rule {
    std::string name;
    LabelledGraph body;
    VertexId left_root = 0;
    VertexId right_root = 0;
};

using RulePtr = std::shared_ptr<const Rule>;

struct Redex {
    RulePtr rule;
    VertexMap map;  // from the rule body's left subgraph into the host

    VertexId matched_root() const { return map.at(rule->left_root); }
};

// A generative family of unfolding rules for one recursion: one rule is
// synthesized per concrete recurrence-argument DAG.
struct UnfoldingFamily {
    SymbolId head;                        // f, arity n_params + 1
    unsigned slice_tier = 0;              // the recurrence slice
    std::vector<SymbolId> step_symbols;   // per constructor, signature order; arity 2*sigma + n
    unsigned n_params = 0;
};

struct OverlapCounterexample {
    std::string first, second;
    std::string reason;
};

class RuleSet {
public:
    void add_rule(Rule rule);
    void add_family(UnfoldingFamily family);

    const std::vector<RulePtr>& rules() const { return rules_; }
    const std::vector<UnfoldingFamily>& families() const { return families_; }

    std::vector<RulePtr> rules_for_head(SymbolId head) const;
    const UnfoldingFamily* family_for_head(SymbolId head) const;

    void merge(const RuleSet& other);

private:
    std::vector<RulePtr> rules_;
    std::vector<UnfoldingFamily> families_;
};

struct Metrics {
    std::uint64_t steps = 0;
    std::vector<std::uint64_t> size_trace;  // |H_j| after each step
    std::map<unsigned, std::uint64_t> tier_sizes_final;
    std::uint64_t max_size = 0;
};

enum class Strategy { Innermost, Outermost, Any };

struct Limits {
    std::uint64_t max_steps = 10'000'000;
    std::uint64_t max_vertices = 10'000'000;
};

// Test hook: deliberately corrupted firing phases, for mutation testing of
// the preservation checks. Production paths always pass None.
enum class FireFault { None, OverRedirect };

// The three-phase firing semantics: build, redirection, garbage collection.
TermGraph fire(const TermGraph& g, const Redex& redex, FireFault fault = FireFault::None);

// In-place variant used by the reduction driver; surviving vertex ids are
// stable across the call.
void fire_inplace(TermGraph& g, const Redex& redex, FireFault fault = FireFault::None);

// Snapshots of the three phases. after_build keeps the original root and the
// fresh right-portion copy (rooted at copy_root); after_redirect is the graph
// before garbage collection.
struct FirePhases {
    TermGraph after_build;
    VertexId copy_root = 0;
    TermGraph after_redirect;
    VertexId redirected = 0;  // the old image of the left root
    TermGraph result;
};

FirePhases fire_phases(const TermGraph& g, const Redex& redex);

// All redexes of g under rs, in matched-root creation order. Family heads are
// matched generatively: the first argument's subgraph must be fully labelled
// with slice-tier constructors, and then exactly one synthesized redex is
// reported for that vertex.
std::vector<Redex> find_redexes(const TermGraph& g, const RuleSet& rs);

const Redex& select_innermost(const std::vector<Redex>& redexes, const TermGraph& g);
const Redex& select_outermost(const std::vector<Redex>& redexes, const TermGraph& g);

// Synthesizes the unfolding rule for the given recurrence-argument subgraph
// (arg_root within host). Vertex layout: v_1..v_m copy the argument DAG
// preserving sharing, w_i carry the step symbols, x_1..x_n are parameter
// holes, y is the matched head. Throws if the argument subgraph leaves the
// slice.
Rule synth_unfolding_rule(const UnfoldingFamily& family, const LabelledGraph& host,
                          VertexId arg_root, SymbolTablePtr syms);

struct StepOutcome {
    bool stepped = false;
    TermGraph graph;
};

StepOutcome step(const TermGraph& g, const RuleSet& rs, Strategy strategy,
                 std::uint64_t rng_seed = 0);

using TraceSink =
    std::function<void(std::uint64_t step_index, const std::string& rule_name, VertexId root,
                       std::uint64_t size_after)>;

std::pair<TermGraph, Metrics> normalize(const TermGraph& g, const RuleSet& rs, Strategy strategy,
                                        const Limits& limits = {}, std::uint64_t rng_seed = 0,
                                        const TraceSink& trace = nullptr);

// Structural sufficient check: non-overlap by head symbol / first-argument
// constructor discrimination.
std::optional<OverlapCounterexample> check_non_overlapping(const RuleSet& rs);

// The discriminating first-argument constructor of a finite rule's left side,
// if its left root's first child is a labelled constructor.
std::optional<SymbolId> first_arg_discriminator(const Rule& rule);

}  // namespace tgr
