#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgr/algebra.hpp"

namespace tgr {

using VertexId = std::uint32_t;

struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

// The DAG substrate: an append-only vertex arena. Vertex ids are never
// reused; creation order is the id order. Garbage collection marks vertices
// dead instead of compacting, so ids stay stable across rewriting steps.
class LabelledGraph {
public:
    // A default-constructed graph has no symbol table and is only assignable.
    LabelledGraph() = default;
    explicit LabelledGraph(SymbolTablePtr syms) : syms_(std::move(syms)) {}

    VertexId add_vertex();  // unlabelled (a "bottom" / variable vertex)
    VertexId add_vertex(SymbolId label, std::vector<VertexId> children);

    bool alive(VertexId v) const { return arena_[v].alive; }
    std::optional<SymbolId> label(VertexId v) const { return arena_[v].label; }
    std::span<const VertexId> out(VertexId v) const { return arena_[v].out; }

    void set_child(VertexId v, std::size_t i, VertexId child) { arena_[v].out.at(i) = child; }

    // Turns an unlabelled placeholder into a labelled vertex (two-phase builds).
    void relabel(VertexId v, SymbolId label, std::vector<VertexId> children);
    void kill(VertexId v) { arena_[v].alive = false; }

    // Replaces every occurrence of `from` in the out-lists of alive vertices.
    void redirect_edges(VertexId from, VertexId to);

    std::vector<VertexId> vertices() const;  // alive, in creation order
    std::size_t vertex_count() const;        // alive count
    std::size_t arena_size() const { return arena_.size(); }

    const SymbolTable& symbols() const { return *syms_; }
    const SymbolTablePtr& symbols_ptr() const { return syms_; }

    bool is_acyclic() const;

private:
    struct Vertex {
        std::optional<SymbolId> label;
        std::vector<VertexId> out;
        bool alive = true;
    };
    std::vector<Vertex> arena_;
    SymbolTablePtr syms_;
};

struct TermGraph {
    LabelledGraph graph;
    VertexId root = 0;
};

struct MultiGraph {
    LabelledGraph graph;
    std::vector<VertexId> roots;
};

// Pattern-to-target vertex maps (the paper's homomorphisms).
using VertexMap = std::unordered_map<VertexId, VertexId>;

// ---------------------------------------------------------------------------
// Construction and unfolding.

// Builds a term graph for t. With share=true (the default) structurally equal
// subterms collapse onto one vertex (hash-consing); with share=false the
// graph is the unshared tree.
TermGraph from_term(const TermPtr& t, SymbolTablePtr syms, bool share = true);

// Incremental hash-consing builder, used where several terms must share one
// vertex arena (call graphs with cross-argument sharing).
class SharedBuilder {
public:
    explicit SharedBuilder(SymbolTablePtr syms) : graph_(std::move(syms)) {}

    VertexId add(const TermPtr& t, bool share = true);
    LabelledGraph take() { return std::move(graph_); }
    LabelledGraph& graph() { return graph_; }

private:
    LabelledGraph graph_;
    std::unordered_map<std::string, VertexId> memo_;
};

TermPtr unfold(const TermGraph& g, std::uint64_t cap = 1'000'000);

// ---------------------------------------------------------------------------
// Structure.

std::vector<VertexId> reachable(const LabelledGraph& g, std::span<const VertexId> roots);

MultiGraph subgraph(const LabelledGraph& g, std::span<const VertexId> roots);
TermGraph subgraph_at(const LabelledGraph& g, VertexId root);

bool is_proper(const TermGraph& g);

// Deterministic DFS matcher: maps pattern vertices reachable from pat_root
// into the target, label- and order-preserving on labelled pattern vertices
// and injective on them; unlabelled pattern vertices map anywhere.
std::optional<VertexMap> find_homomorphism(const LabelledGraph& pattern, VertexId pat_root,
                                           const LabelledGraph& target, VertexId at);

// Re-checks the two homomorphism equations plus injectivity directly.
bool verify_homomorphism(const LabelledGraph& pattern, VertexId pat_root,
                         const LabelledGraph& target, const VertexMap& map);

// ---------------------------------------------------------------------------
// Isomorphism via canonical forms (rooted, ordered DAGs).

using CanonicalKey = std::string;

CanonicalKey canonical_form(const TermGraph& g);
CanonicalKey canonical_form(const MultiGraph& g);

bool iso(const TermGraph& a, const TermGraph& b);

// ---------------------------------------------------------------------------
// Sizes.

std::size_t size(const TermGraph& g);

// Number of vertices labelled with tier-i constructors. Function-symbol
// vertices count toward no tier slice.
std::size_t tier_size(const TermGraph& g, unsigned tier);

std::vector<unsigned> tiers_present(const TermGraph& g);

// ---------------------------------------------------------------------------
// Serialization.

std::string to_dot(const TermGraph& g, const std::string& name = "G");
std::string graph_to_json(const TermGraph& g);

}  // namespace tgr
