#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace tgr {

using SymbolId = std::uint32_t;

// The user-facing free-algebra signature: an ordered list of constructors.
struct Signature {
    struct Ctor {
        std::string name;
        unsigned arity = 0;
    };
    std::vector<Ctor> ctors;

    std::optional<unsigned> index_of(std::string_view name) const;
    void validate() const;  // distinct names
};

enum class SymbolKind {
    PlainCtor,   // constructor of the base signature
    TieredCtor,  // constructor labelled with a tier (member of some slice)
    Function,    // defined-function symbol (carries no tier slice)
};

struct SymbolInfo {
    std::string name;
    unsigned arity = 0;
    SymbolKind kind = SymbolKind::Function;
    unsigned ctor_index = 0;  // valid for PlainCtor / TieredCtor
    unsigned tier = 0;        // valid for TieredCtor
};

// Interning store for every symbol a program touches: the base constructors,
// their tier-labelled copies, and generated function symbols. Append-only.
class SymbolTable {
public:
    explicit SymbolTable(Signature sig);

    const Signature& signature() const { return sig_; }

    SymbolId plain(unsigned ctor_index) const;
    SymbolId tiered(unsigned ctor_index, unsigned tier);  // interns on demand
    SymbolId fresh_function(std::string name, unsigned arity);

    std::optional<SymbolId> lookup(std::string_view name) const;
    const SymbolInfo& operator[](SymbolId id) const { return infos_.at(id); }
    std::size_t size() const { return infos_.size(); }

private:
    SymbolId intern(SymbolInfo info);

    Signature sig_;
    std::vector<SymbolInfo> infos_;
    std::unordered_map<std::string, SymbolId> by_name_;
};

using SymbolTablePtr = std::shared_ptr<SymbolTable>;

// ---------------------------------------------------------------------------
// Terms. Immutable, reference-semantic trees; tree_size is the size of the
// term seen as a tree (saturating), so sharing-induced blowup is O(1) to read.

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    SymbolId head;
    std::vector<TermPtr> children;
    std::uint64_t tree_size = 1;
};

TermPtr make_term(const SymbolTable& syms, SymbolId head, std::vector<TermPtr> children = {});
bool term_equal(const TermPtr& a, const TermPtr& b);
std::string to_string(const TermPtr& t, const SymbolTable& syms);

// Parses the surface term syntax, e.g. "s(s(z))". Names must resolve in the
// table (plain constructors).
TermPtr parse_term(std::string_view text, const SymbolTable& syms);

// ---------------------------------------------------------------------------
// Tier signatures and the tiered-function AST.

struct TierSig {
    std::vector<unsigned> inputs;
    unsigned output = 0;

    bool operator==(const TierSig&) const = default;
};

std::string to_string(const TierSig& sig);

struct TieredFn;
using FnPtr = std::shared_ptr<const TieredFn>;

struct FnId {};
struct FnConstr {
    unsigned ctor;  // index into the signature
};
struct FnProj {
    unsigned n = 0, m = 0;  // 1 <= m <= n
};
struct FnComp {
    FnPtr outer;
    std::vector<FnPtr> inners;
};
struct FnRec {
    std::vector<FnPtr> branches;  // one per constructor, signature order
};
struct FnCond {
    std::vector<FnPtr> branches;  // one per constructor, signature order
};

struct TieredFn {
    std::variant<FnId, FnConstr, FnProj, FnComp, FnRec, FnCond> node;
    TierSig sig;  // declared, not inferred
};

FnPtr make_fn(std::variant<FnId, FnConstr, FnProj, FnComp, FnRec, FnCond> node, TierSig sig);

// ---------------------------------------------------------------------------
// Errors.

struct TierError : std::runtime_error {
    enum class Kind { Mismatch, PredicativityViolation, Structure };

    TierError(Kind k, std::vector<unsigned> ast_path, const std::string& message)
        : std::runtime_error(message), kind(k), path(std::move(ast_path)) {}

    Kind kind;
    std::vector<unsigned> path;  // child indices from the root of the AST
};

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Operations.

// Validates every node's declared sig against its formation rule and returns
// the root sig. Throws TierError.
TierSig check_tiers(const FnPtr& f, const Signature& sig);

// Naive tree-level reference semantics; the oracle. `budget` caps the tree
// size of every constructed term (and the number of evaluation steps).
TermPtr eval_term(const FnPtr& f, const std::vector<TermPtr>& args, const SymbolTable& syms,
                  std::uint64_t budget = 1'000'000);

// Uniformly labels every constructor of t with tier i.
TermPtr tier_annotate(const TermPtr& t, unsigned tier, SymbolTable& syms);

// Left inverse of tier_annotate.
TermPtr erase_tiers(const TermPtr& t, const SymbolTable& syms);

}  // namespace tgr
