#include "tgr/rewrite.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_set>

namespace tgr {

void RuleSet::add_rule(Rule rule) {
    if (!rule.body.label(rule.left_root))
        throw std::invalid_argument("rule left root must be labelled: " + rule.name);
    rules_.push_back(std::make_shared<const Rule>(std::move(rule)));
}

void RuleSet::add_family(UnfoldingFamily family) { families_.push_back(std::move(family)); }

std::vector<RulePtr> RuleSet::rules_for_head(SymbolId head) const {
    std::vector<RulePtr> out;
    for (const auto& r : rules_)
        if (r->body.label(r->left_root) == head) out.push_back(r);
    return out;
}

const UnfoldingFamily* RuleSet::family_for_head(SymbolId head) const {
    for (const auto& f : families_)
        if (f.head == head) return &f;
    return nullptr;
}

void RuleSet::merge(const RuleSet& other) {
    rules_.insert(rules_.end(), other.rules_.begin(), other.rules_.end());
    families_.insert(families_.end(), other.families_.begin(), other.families_.end());
}

// ---------------------------------------------------------------------------
// Firing.

namespace {

std::unordered_set<VertexId> reach_set(const LabelledGraph& g, VertexId root) {
    VertexId roots[1] = {root};
    auto vec = reachable(g, roots);
    return {vec.begin(), vec.end()};
}

// Copies the portion of the right subgraph outside the left subgraph into the
// host; arcs into the left subgraph are routed through phi.
VertexId build_copy(const LabelledGraph& body, VertexId b,
                    const std::unordered_set<VertexId>& left, const VertexMap& phi,
                    LabelledGraph& host, VertexMap& copied) {
    if (left.count(b)) return phi.at(b);
    auto it = copied.find(b);
    if (it != copied.end()) return it->second;
    std::vector<VertexId> children;
    children.reserve(body.out(b).size());
    for (VertexId c : body.out(b)) children.push_back(build_copy(body, c, left, phi, host, copied));
    VertexId v = body.label(b) ? host.add_vertex(*body.label(b), std::move(children))
                               : host.add_vertex();
    copied.emplace(b, v);
    return v;
}

void garbage_collect(TermGraph& g) {
    VertexId roots[1] = {g.root};
    auto live = reachable(g.graph, roots);
    std::unordered_set<VertexId> keep(live.begin(), live.end());
    for (VertexId v : g.graph.vertices())
        if (!keep.count(v)) g.graph.kill(v);
}

}  // namespace

void fire_inplace(TermGraph& g, const Redex& redex, FireFault fault) {
    const Rule& rule = *redex.rule;
    auto left = reach_set(rule.body, rule.left_root);

    // build phase
    VertexMap copied;
    VertexId sstar = build_copy(rule.body, rule.right_root, left, redex.map, g.graph, copied);

    // redirection phase
    VertexId target = redex.map.at(rule.left_root);
    if (target != sstar) g.graph.redirect_edges(target, sstar);
    if (fault == FireFault::OverRedirect && !g.graph.out(target).empty()) {
        VertexId child = g.graph.out(target)[0];
        if (child != sstar) g.graph.redirect_edges(child, sstar);
    }
    if (g.root == target) g.root = sstar;

    // garbage collection phase
    garbage_collect(g);

#ifndef NDEBUG
    if (fault == FireFault::None) {
        assert(g.graph.is_acyclic());
        assert(is_proper(g));
    }
#endif
}

FirePhases fire_phases(const TermGraph& g, const Redex& redex) {
    const Rule& rule = *redex.rule;
    auto left = reach_set(rule.body, rule.left_root);

    TermGraph cur = g;
    VertexMap copied;
    VertexId sstar = build_copy(rule.body, rule.right_root, left, redex.map, cur.graph, copied);
    TermGraph after_build = cur;

    VertexId target = redex.map.at(rule.left_root);
    if (target != sstar) cur.graph.redirect_edges(target, sstar);
    if (cur.root == target) cur.root = sstar;
    TermGraph after_redirect = cur;

    garbage_collect(cur);
    return FirePhases{std::move(after_build), sstar, std::move(after_redirect), target,
                      std::move(cur)};
}

TermGraph fire(const TermGraph& g, const Redex& redex, FireFault fault) {
    TermGraph out = g;
    fire_inplace(out, redex, fault);
    if (!out.graph.is_acyclic()) throw std::logic_error("firing produced a cyclic graph");
    return out;
}

// ---------------------------------------------------------------------------
// Unfolding-rule synthesis.

namespace {

// Reverse postorder from root following edge order; root comes first and
// every parent precedes its children.
std::vector<VertexId> rpo(const LabelledGraph& g, VertexId root) {
    std::vector<VertexId> post;
    std::unordered_set<VertexId> seen;
    std::function<void(VertexId)> visit = [&](VertexId v) {
        if (!seen.insert(v).second) return;
        for (VertexId c : g.out(v)) visit(c);
        post.push_back(v);
    };
    visit(root);
    std::reverse(post.begin(), post.end());
    return post;
}

}  // namespace

Rule synth_unfolding_rule(const UnfoldingFamily& family, const LabelledGraph& host,
                          VertexId arg_root, SymbolTablePtr syms) {
    std::vector<VertexId> order = rpo(host, arg_root);
    const std::size_t m = order.size();
    const unsigned n = family.n_params;

    std::unordered_map<VertexId, std::size_t> pos;
    for (std::size_t i = 0; i < m; ++i) pos.emplace(order[i], i);

    for (VertexId v : order) {
        auto l = host.label(v);
        if (!l) throw std::invalid_argument("unfolding argument contains an unlabelled vertex");
        const SymbolInfo& info = host.symbols()[*l];
        if (info.kind != SymbolKind::TieredCtor || info.tier != family.slice_tier)
            throw std::invalid_argument("unfolding argument leaves the recurrence slice: " +
                                        info.name);
    }

    LabelledGraph body(std::move(syms));
    // v_1..v_m: exact copy of the argument, children before parents.
    std::vector<VertexId> v_ids(m);
    for (std::size_t i = m; i-- > 0;) {
        std::vector<VertexId> children;
        for (VertexId c : host.out(order[i])) children.push_back(v_ids[pos.at(c)]);
        v_ids[i] = body.add_vertex(*host.label(order[i]), std::move(children));
    }
    // x_1..x_n: parameter holes.
    std::vector<VertexId> x_ids(n);
    for (unsigned k = 0; k < n; ++k) x_ids[k] = body.add_vertex();
    // w_1..w_m: the step-symbol mirror, alpha(w_i) = alpha(v_i) chi*(alpha(v_i)) x_1..x_n.
    std::vector<VertexId> w_ids(m);
    for (std::size_t i = m; i-- > 0;) {
        const SymbolInfo& info = host.symbols()[*host.label(order[i])];
        std::vector<VertexId> children;
        for (VertexId c : host.out(order[i])) children.push_back(v_ids[pos.at(c)]);
        for (VertexId c : host.out(order[i])) children.push_back(w_ids[pos.at(c)]);
        children.insert(children.end(), x_ids.begin(), x_ids.end());
        w_ids[i] = body.add_vertex(family.step_symbols.at(info.ctor_index), std::move(children));
    }
    // y: the head.
    std::vector<VertexId> head_children{v_ids[0]};
    head_children.insert(head_children.end(), x_ids.begin(), x_ids.end());
    VertexId y = body.add_vertex(family.head, std::move(head_children));

    std::string name =
        "unfold:" + body.symbols()[family.head].name + ":" + std::to_string(m);
    return Rule{std::move(name), std::move(body), y, w_ids[0]};
}

// ---------------------------------------------------------------------------
// Redex discovery.

std::optional<SymbolId> first_arg_discriminator(const Rule& rule) {
    auto children = rule.body.out(rule.left_root);
    if (children.empty()) return std::nullopt;
    auto l = rule.body.label(children[0]);
    if (!l) return std::nullopt;
    if (rule.body.symbols()[*l].kind == SymbolKind::Function) return std::nullopt;
    return l;
}

std::vector<Redex> find_redexes(const TermGraph& g, const RuleSet& rs) {
    std::vector<Redex> out;
    for (VertexId v : g.graph.vertices()) {
        auto l = g.graph.label(v);
        if (!l) continue;
        for (const auto& rule : rs.rules_for_head(*l)) {
            if (auto disc = first_arg_discriminator(*rule)) {
                auto hc = g.graph.out(v);
                if (hc.empty() || g.graph.label(hc[0]) != *disc) continue;
            }
            if (auto map = find_homomorphism(rule->body, rule->left_root, g.graph, v))
                out.push_back(Redex{rule, std::move(*map)});
        }
        if (const UnfoldingFamily* fam = rs.family_for_head(*l)) {
            VertexId arg_root = g.graph.out(v)[0];
            VertexId roots[1] = {arg_root};
            auto arg = reachable(g.graph, roots);
            bool in_slice = true;
            for (VertexId a : arg) {
                auto al = g.graph.label(a);
                if (!al) {
                    in_slice = false;
                    break;
                }
                const SymbolInfo& info = g.graph.symbols()[*al];
                if (info.kind != SymbolKind::TieredCtor || info.tier != fam->slice_tier) {
                    in_slice = false;
                    break;
                }
            }
            if (!in_slice) continue;
            Rule rule = synth_unfolding_rule(*fam, g.graph, arg_root, g.graph.symbols_ptr());
            // The synthesized rule matches by construction; assemble phi directly.
            std::vector<VertexId> order = rpo(g.graph, arg_root);
            const std::size_t m = order.size();
            const unsigned n = fam->n_params;
            VertexMap phi;
            // Body layout (see synth_unfolding_rule): v_m..v_1, x_1..x_n, w_m..w_1, y.
            for (std::size_t i = 0; i < m; ++i)
                phi.emplace(static_cast<VertexId>(m - 1 - i), order[i]);
            for (unsigned k = 0; k < n; ++k)
                phi.emplace(static_cast<VertexId>(m + k), g.graph.out(v)[k + 1]);
            phi.emplace(rule.left_root, v);
            out.push_back(Redex{std::make_shared<const Rule>(std::move(rule)), std::move(phi)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Redex& a, const Redex& b) {
        return a.matched_root() < b.matched_root();
    });
    return out;
}

// ---------------------------------------------------------------------------
// Strategies.

namespace {

const Redex& select_by_path(const std::vector<Redex>& redexes, const TermGraph& g,
                            bool innermost) {
    assert(!redexes.empty());
    const Redex* best = nullptr;
    for (const auto& r : redexes) {
        VertexId root = r.matched_root();
        auto below = reach_set(g.graph, root);
        bool ok = true;
        for (const auto& other : redexes) {
            VertexId o = other.matched_root();
            if (o == root) continue;
            bool path = innermost ? below.count(o) > 0 : reach_set(g.graph, o).count(root) > 0;
            if (path) {
                ok = false;
                break;
            }
        }
        if (ok && (!best || root < best->matched_root())) best = &r;
    }
    assert(best && "acyclic graphs always have an extremal redex");
    return *best;
}

}  // namespace

const Redex& select_innermost(const std::vector<Redex>& redexes, const TermGraph& g) {
    return select_by_path(redexes, g, true);
}

const Redex& select_outermost(const std::vector<Redex>& redexes, const TermGraph& g) {
    return select_by_path(redexes, g, false);
}

// ---------------------------------------------------------------------------
// Reduction driver.

namespace {

const Redex& pick(const std::vector<Redex>& redexes, const TermGraph& g, Strategy strategy,
                  std::mt19937_64& rng) {
    switch (strategy) {
        case Strategy::Innermost: return select_innermost(redexes, g);
        case Strategy::Outermost: return select_outermost(redexes, g);
        case Strategy::Any: {
            std::uniform_int_distribution<std::size_t> dist(0, redexes.size() - 1);
            return redexes[dist(rng)];
        }
    }
    throw std::logic_error("unknown strategy");
}

}  // namespace

StepOutcome step(const TermGraph& g, const RuleSet& rs, Strategy strategy, std::uint64_t rng_seed) {
    auto redexes = find_redexes(g, rs);
    if (redexes.empty()) return {false, g};
    std::mt19937_64 rng(rng_seed);
    return {true, fire(g, pick(redexes, g, strategy, rng))};
}

std::pair<TermGraph, Metrics> normalize(const TermGraph& g, const RuleSet& rs, Strategy strategy,
                                        const Limits& limits, std::uint64_t rng_seed,
                                        const TraceSink& trace) {
    TermGraph cur = g;
    Metrics metrics;
    metrics.max_size = cur.graph.vertex_count();
    std::mt19937_64 rng(rng_seed);
    while (true) {
        auto redexes = find_redexes(cur, rs);
        if (redexes.empty()) break;
        if (metrics.steps >= limits.max_steps)
            throw LimitExceeded("step budget exceeded: " + std::to_string(limits.max_steps));
        const Redex& chosen = pick(redexes, cur, strategy, rng);
        std::string rule_name = chosen.rule->name;
        VertexId root = chosen.matched_root();
        fire_inplace(cur, chosen);
        ++metrics.steps;
        std::uint64_t sz = cur.graph.vertex_count();
        metrics.size_trace.push_back(sz);
        metrics.max_size = std::max(metrics.max_size, sz);
        if (sz > limits.max_vertices)
            throw LimitExceeded("size budget exceeded: " + std::to_string(limits.max_vertices));
        if (trace) trace(metrics.steps - 1, rule_name, root, sz);
    }
    for (unsigned tier : tiers_present(cur)) metrics.tier_sizes_final[tier] = tier_size(cur, tier);
    return {std::move(cur), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Non-overlap check.

std::optional<OverlapCounterexample> check_non_overlapping(const RuleSet& rs) {
    const auto& rules = rs.rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        for (std::size_t j = i + 1; j < rules.size(); ++j) {
            const Rule& a = *rules[i];
            const Rule& b = *rules[j];
            if (a.body.label(a.left_root) != b.body.label(b.left_root)) continue;
            auto da = first_arg_discriminator(a);
            auto db = first_arg_discriminator(b);
            if (!da || !db || *da == *db)
                return OverlapCounterexample{a.name, b.name,
                                             "rules share a head symbol without distinct "
                                             "first-argument constructors"};
        }
    }
    for (std::size_t i = 0; i < rs.families().size(); ++i) {
        SymbolId head = rs.families()[i].head;
        for (std::size_t j = i + 1; j < rs.families().size(); ++j)
            if (rs.families()[j].head == head)
                return OverlapCounterexample{"family " + std::to_string(i),
                                             "family " + std::to_string(j),
                                             "two unfolding families share a head symbol"};
        for (const auto& r : rules)
            if (r->body.label(r->left_root) == head)
                return OverlapCounterexample{"family " + std::to_string(i), r->name,
                                             "a finite rule collides with an unfolding family "
                                             "head"};
    }
    return std::nullopt;
}

}  // namespace tgr
