#pragma once

#include <map>

#include "tgr/rewrite.hpp"

namespace tgr {

struct CompiledProgram {
    SymbolTablePtr symbols;
    RuleSet ruleset;
    SymbolId entry = 0;
    TierSig tiersig;
    std::map<std::string, SymbolId> generated;  // AST path -> generated symbol
};

// Translates a tier-checked tiered function into a graph rewriting system.
// Runs check_tiers first; propagates TierError.
CompiledProgram compile(const FnPtr& f, const Signature& sig);

// Root labelled with the entry symbol over hash-consed, tier-annotated
// argument graphs. Equal same-tier arguments share vertices across positions
// unless share_args is false.
TermGraph build_call_graph(const CompiledProgram& p, const std::vector<TermPtr>& args,
                           bool share_args = true);

struct RunResult {
    TermGraph graph;
    Metrics metrics;
};

// Innermost normalization of the call graph.
RunResult run(const CompiledProgram& p, const std::vector<TermPtr>& args, const Limits& limits = {},
              const TraceSink& trace = nullptr, bool share_args = true);

}  // namespace tgr
