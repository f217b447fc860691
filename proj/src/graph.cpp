#include "tgr/graph.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace tgr {

VertexId LabelledGraph::add_vertex() {
    arena_.push_back({std::nullopt, {}, true});
    return static_cast<VertexId>(arena_.size() - 1);
}

VertexId LabelledGraph::add_vertex(SymbolId label, std::vector<VertexId> children) {
    if (symbols()[label].arity != children.size())
        throw std::invalid_argument("out-degree must match arity of " + symbols()[label].name);
    for ([[maybe_unused]] VertexId c : children) assert(c < arena_.size());
    arena_.push_back({label, std::move(children), true});
    return static_cast<VertexId>(arena_.size() - 1);
}

void LabelledGraph::relabel(VertexId v, SymbolId label, std::vector<VertexId> children) {
    if (arena_[v].label) throw std::invalid_argument("relabel target must be unlabelled");
    if (symbols()[label].arity != children.size())
        throw std::invalid_argument("out-degree must match arity of " + symbols()[label].name);
    arena_[v].label = label;
    arena_[v].out = std::move(children);
}

void LabelledGraph::redirect_edges(VertexId from, VertexId to) {
    for (auto& v : arena_) {
        if (!v.alive) continue;
        for (auto& c : v.out)
            if (c == from) c = to;
    }
}

std::vector<VertexId> LabelledGraph::vertices() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < arena_.size(); ++v)
        if (arena_[v].alive) out.push_back(v);
    return out;
}

std::size_t LabelledGraph::vertex_count() const {
    std::size_t n = 0;
    for (const auto& v : arena_)
        if (v.alive) ++n;
    return n;
}

bool LabelledGraph::is_acyclic() const {
    // 0 = unseen, 1 = on stack, 2 = done
    std::vector<unsigned char> state(arena_.size(), 0);
    std::function<bool(VertexId)> visit = [&](VertexId v) {
        if (state[v] == 1) return false;
        if (state[v] == 2) return true;
        state[v] = 1;
        for (VertexId c : arena_[v].out)
            if (arena_[c].alive && !visit(c)) return false;
        state[v] = 2;
        return true;
    };
    for (VertexId v = 0; v < arena_.size(); ++v)
        if (arena_[v].alive && !visit(v)) return false;
    return true;
}

// ---------------------------------------------------------------------------

VertexId SharedBuilder::add(const TermPtr& t, bool share) {
    std::vector<VertexId> children;
    children.reserve(t->children.size());
    for (const auto& c : t->children) children.push_back(add(c, share));
    if (share) {
        std::string key = std::to_string(t->head);
        for (VertexId c : children) key += "," + std::to_string(c);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        VertexId v = graph_.add_vertex(t->head, std::move(children));
        memo_.emplace(std::move(key), v);
        return v;
    }
    return graph_.add_vertex(t->head, std::move(children));
}

TermGraph from_term(const TermPtr& t, SymbolTablePtr syms, bool share) {
    SharedBuilder b(std::move(syms));
    VertexId root = b.add(t, share);
    return TermGraph{b.take(), root};
}

namespace {

TermPtr unfold_at(const LabelledGraph& g, VertexId v, std::uint64_t cap, std::uint64_t& used) {
    auto label = g.label(v);
    if (!label) throw std::invalid_argument("cannot unfold a graph with unlabelled vertices");
    if (++used > cap) throw CapExceeded("unfolding exceeds cap of " + std::to_string(cap));
    std::vector<TermPtr> children;
    children.reserve(g.out(v).size());
    for (VertexId c : g.out(v)) children.push_back(unfold_at(g, c, cap, used));
    return make_term(g.symbols(), *label, std::move(children));
}

}  // namespace

TermPtr unfold(const TermGraph& g, std::uint64_t cap) {
    std::uint64_t used = 0;
    return unfold_at(g.graph, g.root, cap, used);
}

// ---------------------------------------------------------------------------

std::vector<VertexId> reachable(const LabelledGraph& g, std::span<const VertexId> roots) {
    std::vector<bool> seen(g.arena_size(), false);
    std::vector<VertexId> order;
    std::function<void(VertexId)> visit = [&](VertexId v) {
        if (seen[v]) return;
        seen[v] = true;
        order.push_back(v);
        for (VertexId c : g.out(v)) visit(c);
    };
    for (VertexId r : roots) visit(r);
    return order;
}

MultiGraph subgraph(const LabelledGraph& g, std::span<const VertexId> roots) {
    std::vector<VertexId> keep = reachable(g, roots);
    std::sort(keep.begin(), keep.end());  // preserve relative creation order
    std::unordered_map<VertexId, VertexId> remap;
    LabelledGraph out(g.symbols_ptr());
    for (VertexId v : keep) remap[v] = static_cast<VertexId>(remap.size());
    for (VertexId v : keep) {
        if (auto l = g.label(v)) {
            std::vector<VertexId> children;
            for (VertexId c : g.out(v)) children.push_back(remap.at(c));
            out.add_vertex(*l, std::move(children));
        } else {
            out.add_vertex();
        }
    }
    std::vector<VertexId> new_roots;
    for (VertexId r : roots) new_roots.push_back(remap.at(r));
    return MultiGraph{std::move(out), std::move(new_roots)};
}

TermGraph subgraph_at(const LabelledGraph& g, VertexId root) {
    VertexId roots[1] = {root};
    MultiGraph m = subgraph(g, roots);
    return TermGraph{std::move(m.graph), m.roots[0]};
}

bool is_proper(const TermGraph& g) {
    VertexId roots[1] = {g.root};
    return reachable(g.graph, roots).size() == g.graph.vertex_count();
}

// ---------------------------------------------------------------------------

namespace {

struct Matcher {
    const LabelledGraph& pat;
    const LabelledGraph& tgt;
    VertexMap map;
    std::unordered_set<VertexId> used;  // injectivity over labelled pattern vertices

    bool match(VertexId pv, VertexId tv) {
        auto it = map.find(pv);
        if (it != map.end()) return it->second == tv;
        auto pl = pat.label(pv);
        if (!pl) {
            map.emplace(pv, tv);  // bottom vertices are unconstrained
            return true;
        }
        if (tgt.label(tv) != pl) return false;
        if (used.count(tv)) return false;
        map.emplace(pv, tv);
        used.insert(tv);
        auto pc = pat.out(pv);
        auto tc = tgt.out(tv);
        for (std::size_t i = 0; i < pc.size(); ++i)
            if (!match(pc[i], tc[i])) return false;
        return true;
    }
};

}  // namespace

std::optional<VertexMap> find_homomorphism(const LabelledGraph& pattern, VertexId pat_root,
                                           const LabelledGraph& target, VertexId at) {
    Matcher m{pattern, target, {}, {}};
    if (!m.match(pat_root, at)) return std::nullopt;
    return std::move(m.map);
}

bool verify_homomorphism(const LabelledGraph& pattern, VertexId pat_root,
                         const LabelledGraph& target, const VertexMap& map) {
    VertexId roots[1] = {pat_root};
    std::unordered_set<VertexId> images;
    for (VertexId v : reachable(pattern, roots)) {
        auto it = map.find(v);
        if (it == map.end()) return false;
        if (!pattern.label(v)) continue;
        VertexId w = it->second;
        if (target.label(w) != pattern.label(v)) return false;  // delta equation
        if (!images.insert(w).second) return false;             // injectivity
        auto pc = pattern.out(v);
        auto tc = target.out(w);
        if (pc.size() != tc.size()) return false;
        for (std::size_t i = 0; i < pc.size(); ++i) {  // alpha equation
            auto ci = map.find(pc[i]);
            if (ci == map.end() || ci->second != tc[i]) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

// DFS numbering from the roots: first visit emits the vertex, revisits emit a
// back-reference. Iso-invariant for rooted ordered labelled DAGs.
void canon_visit(const LabelledGraph& g, VertexId v, std::unordered_map<VertexId, unsigned>& seen,
                 std::string& out) {
    auto it = seen.find(v);
    if (it != seen.end()) {
        out += "#" + std::to_string(it->second);
        return;
    }
    seen.emplace(v, static_cast<unsigned>(seen.size()));
    auto l = g.label(v);
    out += "(";
    out += l ? g.symbols()[*l].name : "_";
    for (VertexId c : g.out(v)) {
        out += " ";
        canon_visit(g, c, seen, out);
    }
    out += ")";
}

}  // namespace

CanonicalKey canonical_form(const TermGraph& g) {
    std::unordered_map<VertexId, unsigned> seen;
    std::string out;
    canon_visit(g.graph, g.root, seen, out);
    return out;
}

CanonicalKey canonical_form(const MultiGraph& g) {
    std::unordered_map<VertexId, unsigned> seen;
    std::string out;
    for (std::size_t i = 0; i < g.roots.size(); ++i) {
        if (i) out += ";";
        canon_visit(g.graph, g.roots[i], seen, out);
    }
    return out;
}

bool iso(const TermGraph& a, const TermGraph& b) {
    return canonical_form(a) == canonical_form(b);
}

// ---------------------------------------------------------------------------

std::size_t size(const TermGraph& g) { return g.graph.vertex_count(); }

std::size_t tier_size(const TermGraph& g, unsigned tier) {
    std::size_t n = 0;
    for (VertexId v : g.graph.vertices()) {
        auto l = g.graph.label(v);
        if (!l) continue;
        const SymbolInfo& info = g.graph.symbols()[*l];
        if (info.kind == SymbolKind::TieredCtor && info.tier == tier) ++n;
    }
    return n;
}

std::vector<unsigned> tiers_present(const TermGraph& g) {
    std::vector<unsigned> tiers;
    for (VertexId v : g.graph.vertices()) {
        auto l = g.graph.label(v);
        if (!l) continue;
        const SymbolInfo& info = g.graph.symbols()[*l];
        if (info.kind == SymbolKind::TieredCtor &&
            std::find(tiers.begin(), tiers.end(), info.tier) == tiers.end())
            tiers.push_back(info.tier);
    }
    std::sort(tiers.begin(), tiers.end());
    return tiers;
}

// ---------------------------------------------------------------------------

std::string to_dot(const TermGraph& g, const std::string& name) {
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    for (VertexId v : g.graph.vertices()) {
        auto l = g.graph.label(v);
        out << "  v" << v << " [label=\"" << (l ? g.graph.symbols()[*l].name : "\\u22a5") << "\"";
        if (v == g.root) out << ", peripheries=2";
        out << "];\n";
        auto children = g.graph.out(v);
        for (std::size_t i = 0; i < children.size(); ++i)
            out << "  v" << v << " -> v" << children[i] << " [label=\"" << i << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

std::string graph_to_json(const TermGraph& g) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    j["order"] = nlohmann::json::object();
    j["label"] = nlohmann::json::object();
    for (VertexId v : g.graph.vertices()) {
        std::string id = std::to_string(v);
        j["vertices"].push_back(id);
        nlohmann::json children = nlohmann::json::array();
        for (VertexId c : g.graph.out(v)) children.push_back(std::to_string(c));
        j["order"][id] = children;
        if (auto l = g.graph.label(v)) j["label"][id] = g.graph.symbols()[*l].name;
    }
    j["root"] = std::to_string(g.root);
    return j.dump(2);
}

}  // namespace tgr
