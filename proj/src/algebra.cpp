#include "tgr/algebra.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <sstream>

namespace tgr {

std::optional<unsigned> Signature::index_of(std::string_view name) const {
    for (unsigned i = 0; i < ctors.size(); ++i)
        if (ctors[i].name == name) return i;
    return std::nullopt;
}

void Signature::validate() const {
    for (unsigned i = 0; i < ctors.size(); ++i)
        for (unsigned j = i + 1; j < ctors.size(); ++j)
            if (ctors[i].name == ctors[j].name)
                throw std::invalid_argument("duplicate constructor name: " + ctors[i].name);
}

SymbolTable::SymbolTable(Signature sig) : sig_(std::move(sig)) {
    sig_.validate();
    for (unsigned i = 0; i < sig_.ctors.size(); ++i)
        intern({sig_.ctors[i].name, sig_.ctors[i].arity, SymbolKind::PlainCtor, i, 0});
}

SymbolId SymbolTable::intern(SymbolInfo info) {
    auto it = by_name_.find(info.name);
    if (it != by_name_.end()) return it->second;
    SymbolId id = static_cast<SymbolId>(infos_.size());
    by_name_.emplace(info.name, id);
    infos_.push_back(std::move(info));
    return id;
}

SymbolId SymbolTable::plain(unsigned ctor_index) const {
    assert(ctor_index < sig_.ctors.size());
    return static_cast<SymbolId>(ctor_index);  // base ctors are interned first, in order
}

SymbolId SymbolTable::tiered(unsigned ctor_index, unsigned tier) {
    const auto& c = sig_.ctors.at(ctor_index);
    return intern({c.name + "^" + std::to_string(tier), c.arity, SymbolKind::TieredCtor, ctor_index,
                   tier});
}

SymbolId SymbolTable::fresh_function(std::string name, unsigned arity) {
    if (by_name_.count(name)) throw std::invalid_argument("symbol name collision: " + name);
    return intern({std::move(name), arity, SymbolKind::Function, 0, 0});
}

std::optional<SymbolId> SymbolTable::lookup(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

static std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r < a ? ~std::uint64_t{0} : r;
}

TermPtr make_term(const SymbolTable& syms, SymbolId head, std::vector<TermPtr> children) {
    if (syms[head].arity != children.size())
        throw std::invalid_argument("arity mismatch building term with head " + syms[head].name);
    std::uint64_t size = 1;
    for (const auto& c : children) size = sat_add(size, c->tree_size);
    return std::make_shared<Term>(Term{head, std::move(children), size});
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->head != b->head || a->children.size() != b->children.size()) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!term_equal(a->children[i], b->children[i])) return false;
    return true;
}

std::string to_string(const TermPtr& t, const SymbolTable& syms) {
    std::string out = syms[t->head].name;
    if (!t->children.empty()) {
        out += '(';
        for (std::size_t i = 0; i < t->children.size(); ++i) {
            if (i) out += ',';
            out += to_string(t->children[i], syms);
        }
        out += ')';
    }
    return out;
}

namespace {

struct TermParser {
    std::string_view text;
    std::size_t pos = 0;
    const SymbolTable& syms;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("term parse error at offset " + std::to_string(pos) + ": " + msg);
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (start == pos) fail("expected identifier");
        return std::string(text.substr(start, pos - start));
    }

    TermPtr term() {
        std::string name = ident();
        auto sym = syms.lookup(name);
        if (!sym) fail("unknown symbol: " + name);
        std::vector<TermPtr> children;
        skip_ws();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            skip_ws();
            if (pos < text.size() && text[pos] == ')') {
                ++pos;
            } else {
                while (true) {
                    children.push_back(term());
                    skip_ws();
                    if (pos < text.size() && text[pos] == ',') {
                        ++pos;
                        continue;
                    }
                    if (pos < text.size() && text[pos] == ')') {
                        ++pos;
                        break;
                    }
                    fail("expected ',' or ')'");
                }
            }
        }
        return make_term(syms, *sym, std::move(children));
    }
};

}  // namespace

TermPtr parse_term(std::string_view text, const SymbolTable& syms) {
    TermParser p{text, 0, syms};
    TermPtr t = p.term();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return t;
}

std::string to_string(const TierSig& sig) {
    std::string out = "(";
    for (std::size_t i = 0; i < sig.inputs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(sig.inputs[i]);
    }
    out += ")->" + std::to_string(sig.output);
    return out;
}

FnPtr make_fn(std::variant<FnId, FnConstr, FnProj, FnComp, FnRec, FnCond> node, TierSig sig) {
    return std::make_shared<TieredFn>(TieredFn{std::move(node), std::move(sig)});
}

// ---------------------------------------------------------------------------
// Tier checker.

namespace {

struct TierChecker {
    const Signature& sig;
    std::vector<unsigned> path;

    [[noreturn]] void fail(TierError::Kind k, const std::string& msg) {
        throw TierError(k, path, msg);
    }

    void expect(bool cond, TierError::Kind k, const std::string& msg) {
        if (!cond) fail(k, msg);
    }

    static TierSig uniform(unsigned tier, unsigned count, unsigned output) {
        return TierSig{std::vector<unsigned>(count, tier), output};
    }

    void check(const FnPtr& f) {
        const TierSig& s = f->sig;
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, FnId>) {
                    expect(s.inputs.size() == 1, TierError::Kind::Structure, "id is unary");
                    expect(s.inputs[0] == s.output, TierError::Kind::Mismatch,
                           "id requires tiers i->i, got " + to_string(s));
                } else if constexpr (std::is_same_v<T, FnConstr>) {
                    expect(node.ctor < sig.ctors.size(), TierError::Kind::Structure,
                           "constructor index out of range");
                    unsigned arity = sig.ctors[node.ctor].arity;
                    expect(s == uniform(s.output, arity, s.output), TierError::Kind::Mismatch,
                           "constructor " + sig.ctors[node.ctor].name +
                               " requires tiers (i,...,i)->i, got " + to_string(s));
                } else if constexpr (std::is_same_v<T, FnProj>) {
                    expect(node.n >= 1 && node.m >= 1 && node.m <= node.n,
                           TierError::Kind::Structure, "projection needs 1 <= m <= n");
                    expect(s.inputs.size() == node.n, TierError::Kind::Mismatch,
                           "projection arity does not match declared inputs");
                    expect(s.inputs[node.m - 1] == s.output, TierError::Kind::Mismatch,
                           "projection requires i_m = i, got " + to_string(s));
                } else if constexpr (std::is_same_v<T, FnComp>) {
                    const TierSig& outer = node.outer->sig;
                    expect(outer.inputs.size() == node.inners.size(), TierError::Kind::Structure,
                           "composition needs one inner function per outer input");
                    expect(outer.output == s.output, TierError::Kind::Mismatch,
                           "composition output tier must match outer output");
                    for (unsigned k = 0; k < node.inners.size(); ++k) {
                        const TierSig& inner = node.inners[k]->sig;
                        expect(inner.inputs == s.inputs, TierError::Kind::Mismatch,
                               "inner function " + std::to_string(k + 1) +
                                   " must share the composition's input tiers");
                        expect(inner.output == outer.inputs[k], TierError::Kind::Mismatch,
                               "inner function " + std::to_string(k + 1) +
                                   " output tier must match outer input tier");
                    }
                    path.push_back(0);
                    check(node.outer);
                    path.back() = 1;
                    for (unsigned k = 0; k < node.inners.size(); ++k) {
                        path.back() = 1 + k;
                        check(node.inners[k]);
                    }
                    path.pop_back();
                } else if constexpr (std::is_same_v<T, FnRec>) {
                    expect(node.branches.size() == sig.ctors.size(), TierError::Kind::Structure,
                           "rec needs exactly one branch per constructor");
                    expect(!s.inputs.empty(), TierError::Kind::Structure,
                           "rec needs a recurrence argument");
                    unsigned j = s.inputs[0];
                    unsigned i = s.output;
                    expect(i < j, TierError::Kind::PredicativityViolation,
                           "rec requires recurrence tier j > result tier i, got " + to_string(s));
                    std::vector<unsigned> params(s.inputs.begin() + 1, s.inputs.end());
                    for (unsigned k = 0; k < node.branches.size(); ++k) {
                        unsigned a = sig.ctors[k].arity;
                        TierSig want;
                        want.inputs.insert(want.inputs.end(), a, j);
                        want.inputs.insert(want.inputs.end(), a, i);
                        want.inputs.insert(want.inputs.end(), params.begin(), params.end());
                        want.output = i;
                        path.push_back(k);
                        expect(node.branches[k]->sig == want, TierError::Kind::Mismatch,
                               "rec branch for " + sig.ctors[k].name + " must have tiers " +
                                   to_string(want) + ", got " + to_string(node.branches[k]->sig));
                        check(node.branches[k]);
                        path.pop_back();
                    }
                } else if constexpr (std::is_same_v<T, FnCond>) {
                    expect(node.branches.size() == sig.ctors.size(), TierError::Kind::Structure,
                           "cond needs exactly one branch per constructor");
                    expect(!s.inputs.empty(), TierError::Kind::Structure,
                           "cond needs a scrutinee argument");
                    unsigned j = s.inputs[0];
                    unsigned i = s.output;
                    std::vector<unsigned> params(s.inputs.begin() + 1, s.inputs.end());
                    for (unsigned k = 0; k < node.branches.size(); ++k) {
                        unsigned a = sig.ctors[k].arity;
                        TierSig want;
                        want.inputs.insert(want.inputs.end(), a, j);
                        want.inputs.insert(want.inputs.end(), params.begin(), params.end());
                        want.output = i;
                        path.push_back(k);
                        expect(node.branches[k]->sig == want, TierError::Kind::Mismatch,
                               "cond branch for " + sig.ctors[k].name + " must have tiers " +
                                   to_string(want) + ", got " + to_string(node.branches[k]->sig));
                        check(node.branches[k]);
                        path.pop_back();
                    }
                }
            },
            f->node);
    }
};

}  // namespace

TierSig check_tiers(const FnPtr& f, const Signature& sig) {
    TierChecker checker{sig, {}};
    checker.check(f);
    return f->sig;
}

// ---------------------------------------------------------------------------
// Reference evaluator.

namespace {

struct Evaluator {
    const SymbolTable& syms;
    std::uint64_t budget;
    std::uint64_t steps = 0;

    void charge(const TermPtr& t) {
        if (t->tree_size > budget)
            throw BudgetExceeded("oracle term exceeds node budget of " + std::to_string(budget));
    }

    TermPtr eval(const FnPtr& f, const std::vector<TermPtr>& args) {
        if (++steps > budget)
            throw BudgetExceeded("oracle exceeds step budget of " + std::to_string(budget));
        return std::visit(
            [&](const auto& node) -> TermPtr {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, FnId>) {
                    return args.at(0);
                } else if constexpr (std::is_same_v<T, FnConstr>) {
                    TermPtr t = make_term(syms, syms.plain(node.ctor), args);
                    charge(t);
                    return t;
                } else if constexpr (std::is_same_v<T, FnProj>) {
                    return args.at(node.m - 1);
                } else if constexpr (std::is_same_v<T, FnComp>) {
                    std::vector<TermPtr> mid;
                    mid.reserve(node.inners.size());
                    for (const auto& g : node.inners) mid.push_back(eval(g, args));
                    return eval(node.outer, mid);
                } else if constexpr (std::is_same_v<T, FnRec>) {
                    const TermPtr& scrut = args.at(0);
                    unsigned k = syms[scrut->head].ctor_index;
                    std::vector<TermPtr> params(args.begin() + 1, args.end());
                    std::vector<TermPtr> branch_args = scrut->children;
                    for (const auto& t : scrut->children) {
                        std::vector<TermPtr> rec_args{t};
                        rec_args.insert(rec_args.end(), params.begin(), params.end());
                        branch_args.push_back(eval(f, rec_args));
                    }
                    branch_args.insert(branch_args.end(), params.begin(), params.end());
                    TermPtr r = eval(node.branches.at(k), branch_args);
                    charge(r);
                    return r;
                } else if constexpr (std::is_same_v<T, FnCond>) {
                    const TermPtr& scrut = args.at(0);
                    unsigned k = syms[scrut->head].ctor_index;
                    std::vector<TermPtr> branch_args = scrut->children;
                    branch_args.insert(branch_args.end(), args.begin() + 1, args.end());
                    return eval(node.branches.at(k), branch_args);
                }
            },
            f->node);
    }
};

}  // namespace

TermPtr eval_term(const FnPtr& f, const std::vector<TermPtr>& args, const SymbolTable& syms,
                  std::uint64_t budget) {
    Evaluator ev{syms, budget};
    return ev.eval(f, args);
}

TermPtr tier_annotate(const TermPtr& t, unsigned tier, SymbolTable& syms) {
    const SymbolInfo& info = syms[t->head];
    if (info.kind == SymbolKind::Function)
        throw std::invalid_argument("cannot tier-annotate a function symbol: " + info.name);
    std::vector<TermPtr> children;
    children.reserve(t->children.size());
    for (const auto& c : t->children) children.push_back(tier_annotate(c, tier, syms));
    return make_term(syms, syms.tiered(info.ctor_index, tier), std::move(children));
}

TermPtr erase_tiers(const TermPtr& t, const SymbolTable& syms) {
    const SymbolInfo& info = syms[t->head];
    if (info.kind == SymbolKind::Function)
        throw std::invalid_argument("cannot erase tiers under a function symbol: " + info.name);
    std::vector<TermPtr> children;
    children.reserve(t->children.size());
    for (const auto& c : t->children) children.push_back(erase_tiers(c, syms));
    return make_term(syms, syms.plain(info.ctor_index), std::move(children));
}

}  // namespace tgr
