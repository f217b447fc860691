#include "tgr/compile.hpp"

#include <cassert>

namespace tgr {

namespace {

struct Compiler {
    SymbolTablePtr syms;
    RuleSet rules;
    std::map<std::string, SymbolId> generated;

    SymbolId fresh(const std::string& path, const char* comb, const TierSig& sig, unsigned arity) {
        std::string name = path;
        name += '#';
        name += comb;
        name += '@';
        name += to_string(sig);
        SymbolId id = syms->fresh_function(name, arity);
        generated.emplace(path, id);
        return id;
    }

    SymbolId emit(const FnPtr& f, const std::string& path) {
        const TierSig& sig = f->sig;
        const unsigned arity = static_cast<unsigned>(sig.inputs.size());
        return std::visit(
            [&](const auto& node) -> SymbolId {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, FnId>) {
                    SymbolId head = fresh(path, "id", sig, 1);
                    LabelledGraph body(syms);
                    VertexId bot = body.add_vertex();
                    VertexId y = body.add_vertex(head, {bot});
                    rules.add_rule(Rule{syms->operator[](head).name, std::move(body), y, bot});
                    return head;
                } else if constexpr (std::is_same_v<T, FnConstr>) {
                    SymbolId head = fresh(path, "con", sig, arity);
                    LabelledGraph body(syms);
                    std::vector<VertexId> bots(arity);
                    for (auto& b : bots) b = body.add_vertex();
                    VertexId y = body.add_vertex(head, bots);
                    VertexId rhs = body.add_vertex(syms->tiered(node.ctor, sig.output), bots);
                    rules.add_rule(Rule{syms->operator[](head).name, std::move(body), y, rhs});
                    return head;
                } else if constexpr (std::is_same_v<T, FnProj>) {
                    SymbolId head = fresh(path, "proj", sig, arity);
                    LabelledGraph body(syms);
                    std::vector<VertexId> bots(arity);
                    for (auto& b : bots) b = body.add_vertex();
                    VertexId y = body.add_vertex(head, bots);
                    rules.add_rule(
                        Rule{syms->operator[](head).name, std::move(body), y, bots[node.m - 1]});
                    return head;
                } else if constexpr (std::is_same_v<T, FnComp>) {
                    SymbolId outer = emit(node.outer, path + ".0");
                    std::vector<SymbolId> inner(node.inners.size());
                    for (std::size_t k = 0; k < node.inners.size(); ++k)
                        inner[k] = emit(node.inners[k], path + "." + std::to_string(k + 1));
                    SymbolId head = fresh(path, "comp", sig, arity);
                    LabelledGraph body(syms);
                    std::vector<VertexId> bots(arity);
                    for (auto& b : bots) b = body.add_vertex();
                    VertexId y = body.add_vertex(head, bots);
                    std::vector<VertexId> calls(inner.size());
                    for (std::size_t k = 0; k < inner.size(); ++k)
                        calls[k] = body.add_vertex(inner[k], bots);
                    VertexId rhs = body.add_vertex(outer, calls);
                    rules.add_rule(Rule{syms->operator[](head).name, std::move(body), y, rhs});
                    return head;
                } else if constexpr (std::is_same_v<T, FnRec>) {
                    std::vector<SymbolId> steps(node.branches.size());
                    for (std::size_t k = 0; k < node.branches.size(); ++k)
                        steps[k] = emit(node.branches[k], path + "." + std::to_string(k));
                    SymbolId head = fresh(path, "rec", sig, arity);
                    UnfoldingFamily fam;
                    fam.head = head;
                    fam.slice_tier = sig.inputs[0];
                    fam.step_symbols = std::move(steps);
                    fam.n_params = arity - 1;
                    rules.add_family(std::move(fam));
                    return head;
                } else if constexpr (std::is_same_v<T, FnCond>) {
                    std::vector<SymbolId> branches(node.branches.size());
                    for (std::size_t k = 0; k < node.branches.size(); ++k)
                        branches[k] = emit(node.branches[k], path + "." + std::to_string(k));
                    SymbolId head = fresh(path, "cond", sig, arity);
                    unsigned j = sig.inputs[0];
                    unsigned n = arity - 1;
                    const Signature& s = syms->signature();
                    for (unsigned k = 0; k < branches.size(); ++k) {
                        unsigned a = s.ctors[k].arity;
                        LabelledGraph body(syms);
                        std::vector<VertexId> arg_bots(a);
                        for (auto& b : arg_bots) b = body.add_vertex();
                        VertexId scrut = body.add_vertex(syms->tiered(k, j), arg_bots);
                        std::vector<VertexId> param_bots(n);
                        for (auto& b : param_bots) b = body.add_vertex();
                        std::vector<VertexId> head_children{scrut};
                        head_children.insert(head_children.end(), param_bots.begin(),
                                             param_bots.end());
                        VertexId y = body.add_vertex(head, std::move(head_children));
                        std::vector<VertexId> rhs_children = arg_bots;
                        rhs_children.insert(rhs_children.end(), param_bots.begin(),
                                            param_bots.end());
                        VertexId rhs = body.add_vertex(branches[k], std::move(rhs_children));
                        rules.add_rule(Rule{syms->operator[](head).name + ":" + s.ctors[k].name,
                                            std::move(body), y, rhs});
                    }
                    return head;
                }
            },
            f->node);
    }
};

}  // namespace

CompiledProgram compile(const FnPtr& f, const Signature& sig) {
    check_tiers(f, sig);
    Compiler c{std::make_shared<SymbolTable>(sig), {}, {}};
    SymbolId entry = c.emit(f, "r");
    return CompiledProgram{std::move(c.syms), std::move(c.rules), entry, f->sig,
                           std::move(c.generated)};
}

TermGraph build_call_graph(const CompiledProgram& p, const std::vector<TermPtr>& args,
                           bool share_args) {
    const TierSig& sig = p.tiersig;
    if (args.size() != sig.inputs.size())
        throw std::invalid_argument("expected " + std::to_string(sig.inputs.size()) +
                                    " arguments, got " + std::to_string(args.size()));
    SharedBuilder builder(p.symbols);
    std::vector<VertexId> roots;
    roots.reserve(args.size());
    for (std::size_t k = 0; k < args.size(); ++k)
        roots.push_back(builder.add(tier_annotate(args[k], sig.inputs[k], *p.symbols), share_args));
    VertexId root = builder.graph().add_vertex(p.entry, std::move(roots));
    return TermGraph{builder.take(), root};
}

RunResult run(const CompiledProgram& p, const std::vector<TermPtr>& args, const Limits& limits,
              const TraceSink& trace, bool share_args) {
    TermGraph g = build_call_graph(p, args, share_args);
    auto [result, metrics] = normalize(g, p.ruleset, Strategy::Innermost, limits, 0, trace);
    return RunResult{std::move(result), std::move(metrics)};
}

}  // namespace tgr
