#include "tgr/harness.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace tgr {

std::vector<VertexId> holes(const TermGraph& g) {
    std::vector<VertexId> out;
    for (VertexId v : g.graph.vertices())
        if (!g.graph.label(v)) out.push_back(v);
    return out;
}

SubstituteResult substitute(const Context& C, const Substitution& sub, const TermGraph& G) {
    std::unordered_set<VertexId> hole_set;
    for (VertexId h : holes(C.graph)) hole_set.insert(h);
    for (const auto& [h, _] : sub.xi)
        if (!hole_set.count(h))
            throw std::invalid_argument("substitution domain must consist of context holes");

    SubstituteResult res{TermGraph{LabelledGraph(C.graph.graph.symbols_ptr()), 0}, {}, {}};
    LabelledGraph& out = res.graph.graph;

    // clause 1: vertices are (V - X) followed by W, renumbered
    for (VertexId v : C.graph.graph.vertices())
        if (!sub.xi.count(v)) res.from_context[v] = 0;  // placeholder, assigned below
    for (auto& [v, slot] : res.from_context) slot = out.add_vertex();
    std::size_t plug_base = out.arena_size();
    (void)plug_base;
    for (VertexId v : G.graph.vertices()) res.from_plug[v] = out.add_vertex();

    auto resolve_context_child = [&](VertexId w) -> VertexId {
        auto it = sub.xi.find(w);
        if (it != sub.xi.end()) return res.from_plug.at(it->second);  // clause 2
        return res.from_context.at(w);
    };

    // clauses 2-4: orders and labels
    for (const auto& [v, nv] : res.from_context) {
        if (auto l = C.graph.graph.label(v)) {
            std::vector<VertexId> children;
            for (VertexId w : C.graph.graph.out(v)) children.push_back(resolve_context_child(w));
            // relabel the placeholder: rebuild via direct child assignment
            out.relabel(nv, *l, std::move(children));
        }
    }
    for (const auto& [v, nv] : res.from_plug) {
        if (auto l = G.graph.label(v)) {
            std::vector<VertexId> children;
            for (VertexId w : G.graph.out(v)) children.push_back(res.from_plug.at(w));
            out.relabel(nv, *l, std::move(children));
        }
    }

    // clause 5: the root
    if (sub.xi.count(C.graph.root))
        res.graph.root = res.from_plug.at(G.root);
    else
        res.graph.root = res.from_context.at(C.graph.root);

    if (!out.is_acyclic()) throw std::logic_error("substitution produced a cyclic graph");
    return res;
}

bool check_context_preservation(const Context& C, const Substitution& sub, const TermGraph& G,
                                const RuleSet& rs, FireFault fault) {
    SubstituteResult plugged = substitute(C, sub, G);
    const TermGraph& P = plugged.graph;

    std::unordered_set<VertexId> plug_vertices;
    for (const auto& [_, nv] : plugged.from_plug) plug_vertices.insert(nv);

    auto all_redexes = find_redexes(P, rs);
    std::vector<Redex> inside;
    for (const auto& r : all_redexes)
        if (plug_vertices.count(r.matched_root())) inside.push_back(r);
    if (inside.empty()) return true;  // no step can occur inside G

    // designated roots: xi-images whose subgraphs are redex-free
    std::vector<VertexId> designated;
    for (const auto& [hole, plug_v] : sub.xi) {
        (void)hole;
        VertexId root = plugged.from_plug.at(plug_v);
        VertexId roots[1] = {root};
        auto below = reachable(P.graph, roots);
        std::unordered_set<VertexId> below_set(below.begin(), below.end());
        bool redex_free = true;
        for (const auto& r : all_redexes)
            if (below_set.count(r.matched_root())) {
                redex_free = false;
                break;
            }
        if (redex_free) designated.push_back(root);
    }
    std::sort(designated.begin(), designated.end());
    designated.erase(std::unique(designated.begin(), designated.end()), designated.end());
    if (designated.empty()) return true;

    CanonicalKey before = canonical_form(subgraph(P.graph, designated));

    TermGraph after = P;
    try {
        fire_inplace(after, select_innermost(inside, P), fault);
    } catch (const std::exception&) {
        return false;  // a broken firing phase may corrupt structure outright
    }
    if (!after.graph.is_acyclic()) return false;

    for (VertexId d : designated)
        if (!after.graph.alive(d)) return false;
    CanonicalKey after_key = canonical_form(subgraph(after.graph, designated));
    return after_key == before;
}

// ---------------------------------------------------------------------------

ConfluenceReport confluence_experiment(const TermGraph& g, const RuleSet& rs, unsigned trials,
                                       std::uint64_t seed, const Limits& limits) {
    ConfluenceReport report;
    auto one = [&](Strategy s, const std::string& name, std::uint64_t rng_seed) {
        StrategyRun run;
        run.strategy = name;
        try {
            auto [h, metrics] = normalize(g, rs, s, limits, rng_seed);
            run.steps = metrics.steps;
            run.max_size = metrics.max_size;
            run.final_key = canonical_form(h);
        } catch (const LimitExceeded&) {
            run.completed = false;
        }
        report.runs.push_back(std::move(run));
    };
    one(Strategy::Outermost, "outermost", 0);
    one(Strategy::Innermost, "innermost", 0);
    for (unsigned t = 0; t < trials; ++t)
        one(Strategy::Any, "random[" + std::to_string(t) + "]", seed + t);

    report.outermost_steps = report.runs[0].steps;
    report.innermost_steps = report.runs[1].steps;
    report.all_normal_forms_agree = true;
    report.ordering_holds = true;
    for (const auto& run : report.runs) {
        if (!run.completed) {
            report.all_normal_forms_agree = false;
            report.ordering_holds = false;
            break;
        }
        if (run.final_key != report.runs[0].final_key) report.all_normal_forms_agree = false;
    }
    if (report.ordering_holds) {
        for (std::size_t t = 2; t < report.runs.size(); ++t) {
            std::uint64_t m = report.runs[t].steps;
            if (!(report.outermost_steps <= m && m <= report.innermost_steps))
                report.ordering_holds = false;
        }
        if (report.outermost_steps > report.innermost_steps) report.ordering_holds = false;
    }
    return report;
}

std::string report_to_json(const ConfluenceReport& r) {
    nlohmann::json j;
    j["trials"] = nlohmann::json::array();
    for (const auto& run : r.runs)
        j["trials"].push_back({{"strategy", run.strategy},
                               {"steps", run.steps},
                               {"max_size", run.max_size},
                               {"final_canonical_key", run.final_key},
                               {"completed", run.completed}});
    j["all_normal_forms_agree"] = r.all_normal_forms_agree;
    j["ordering_holds"] = r.ordering_holds;
    j["outermost_steps"] = r.outermost_steps;
    j["innermost_steps"] = r.innermost_steps;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > ~std::uint64_t{0} / a) return ~std::uint64_t{0};
    return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r < a ? ~std::uint64_t{0} : r;
}

std::uint64_t sat_pow(std::uint64_t x, unsigned d) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < d; ++i) r = sat_mul(r, x);
    return r;
}

}  // namespace

std::uint64_t BoundFit::eval(std::uint64_t x) const {
    return sat_add(sat_mul(coeff, sat_pow(x, degree)), offset);
}

BoundFit bound_fit(std::vector<std::pair<std::uint64_t, std::uint64_t>> points,
                   unsigned degree_max) {
    if (points.empty()) throw NoFit("empty grid");
    std::sort(points.begin(), points.end());
    std::size_t lower = (points.size() + 1) / 2;

    for (unsigned d = 0; d <= degree_max; ++d) {
        BoundFit fit;
        fit.degree = d;
        for (std::size_t i = 0; i < lower; ++i)
            if (points[i].first == 0 || d == 0)
                fit.offset = std::max(fit.offset, points[i].second);
        for (std::size_t i = 0; i < lower && d > 0; ++i) {
            auto [x, y] = points[i];
            if (x == 0 || y <= fit.offset) continue;
            std::uint64_t xd = sat_pow(x, d);
            fit.coeff = std::max(fit.coeff, (y - fit.offset + xd - 1) / xd);
        }
        bool ok = true;
        for (const auto& [x, y] : points)
            if (fit.eval(x) < y) {
                ok = false;
                break;
            }
        if (ok) {
            for (const auto& [x, y] : points) fit.residuals.push_back({x, y, fit.eval(x)});
            return fit;
        }
    }
    throw NoFit("no dominating polynomial of degree <= " + std::to_string(degree_max));
}

// ---------------------------------------------------------------------------

std::vector<TermPtr> spine_args(const Signature& sig, const TierSig& tiers, std::uint64_t per_arg,
                                const SymbolTable& syms) {
    std::optional<unsigned> base, spine;
    for (unsigned i = 0; i < sig.ctors.size(); ++i) {
        if (sig.ctors[i].arity == 0 && !base) base = i;
        if (sig.ctors[i].arity >= 1 && !spine) spine = i;
    }
    if (!base) throw std::invalid_argument("signature has no nullary constructor");
    TermPtr base_t = make_term(syms, syms.plain(*base));
    std::vector<TermPtr> args;
    for (std::size_t k = 0; k < tiers.inputs.size(); ++k) {
        TermPtr t = base_t;
        if (spine) {
            unsigned a = sig.ctors[*spine].arity;
            while (t->tree_size < per_arg) {
                std::vector<TermPtr> children{t};
                for (unsigned i = 1; i < a; ++i) children.push_back(base_t);
                t = make_term(syms, syms.plain(*spine), std::move(children));
            }
        }
        args.push_back(t);
    }
    return args;
}

std::vector<GridPoint> measure_grid(const CompiledProgram& p,
                                    const std::vector<std::uint64_t>& sizes, const Limits& limits) {
    std::vector<GridPoint> grid;
    for (std::uint64_t s : sizes) {
        auto args = spine_args(p.symbols->signature(), p.tiersig, s, *p.symbols);
        TermGraph g = build_call_graph(p, args);
        GridPoint pt;
        pt.input_size = size(g);
        for (unsigned t : tiers_present(g)) pt.tier_in[t] = tier_size(g, t);
        auto [h, metrics] = normalize(g, p.ruleset, Strategy::Innermost, limits);
        pt.steps = metrics.steps;
        pt.max_size = metrics.max_size;
        pt.final_size = h.graph.vertex_count();
        pt.tier_out = metrics.tier_sizes_final;
        grid.push_back(std::move(pt));
    }
    return grid;
}

std::string grid_to_csv(const std::vector<GridPoint>& grid) {
    std::vector<unsigned> tiers;
    for (const auto& pt : grid) {
        for (const auto& [t, _] : pt.tier_in)
            if (std::find(tiers.begin(), tiers.end(), t) == tiers.end()) tiers.push_back(t);
        for (const auto& [t, _] : pt.tier_out)
            if (std::find(tiers.begin(), tiers.end(), t) == tiers.end()) tiers.push_back(t);
    }
    std::sort(tiers.begin(), tiers.end());
    std::ostringstream out;
    out << "g_size,steps,max_size,final_size";
    for (unsigned t : tiers) out << ",in_tier_" << t << ",out_tier_" << t;
    out << "\n";
    auto get = [](const std::map<unsigned, std::uint64_t>& m, unsigned t) {
        auto it = m.find(t);
        return it == m.end() ? std::uint64_t{0} : it->second;
    };
    for (const auto& pt : grid) {
        out << pt.input_size << ',' << pt.steps << ',' << pt.max_size << ',' << pt.final_size;
        for (unsigned t : tiers) out << ',' << get(pt.tier_in, t) << ',' << get(pt.tier_out, t);
        out << "\n";
    }
    return out.str();
}

}  // namespace tgr
