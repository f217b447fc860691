#include "tgr/dsl.hpp"

#include <cctype>
#include <sstream>

namespace tgr {

const FnPtr& ProgramFile::fn(const std::string& name) const {
    auto it = fn_by_name.find(name);
    if (it == fn_by_name.end()) throw std::invalid_argument("unknown function: " + name);
    return it->second;
}

namespace {

struct Token {
    enum Kind { Ident, Number, Punct, End } kind = End;
    std::string text;
    unsigned line = 1, col = 1;
};

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    unsigned line = 1, col = 1;
    Token cur;

    Lexer(std::string_view s) : src(s) { advance(); }

    void bump(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos < src.size(); ++i) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    }

    void advance() {
        while (pos < src.size()) {
            if (std::isspace(static_cast<unsigned char>(src[pos]))) {
                bump();
            } else if (src[pos] == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
                while (pos < src.size() && src[pos] != '\n') bump();
            } else {
                break;
            }
        }
        cur.line = line;
        cur.col = col;
        if (pos >= src.size()) {
            cur = {Token::End, "", line, col};
            return;
        }
        char c = src[pos];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                        src[pos] == '_'))
                bump();
            cur = {Token::Ident, std::string(src.substr(start, pos - start)), cur.line, cur.col};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) bump();
            cur = {Token::Number, std::string(src.substr(start, pos - start)), cur.line, cur.col};
            return;
        }
        if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
            bump(2);
            cur = {Token::Punct, "->", cur.line, cur.col};
            return;
        }
        if (c == '=' && pos + 1 < src.size() && src[pos + 1] == '>') {
            bump(2);
            cur = {Token::Punct, "=>", cur.line, cur.col};
            return;
        }
        bump();
        cur = {Token::Punct, std::string(1, c), cur.line, cur.col};
    }
};

struct RawExpr {
    enum Kind { Id, Con, Proj, Comp, Rec, Cond, Ref, Annot } kind = Id;
    unsigned line = 1, col = 1;
    std::string name;     // Con / Ref
    unsigned n = 0, m = 0;  // Proj
    std::vector<RawExpr> args;  // Comp: outer then inners; Annot: single child
    std::vector<std::pair<std::string, RawExpr>> branches;  // Rec / Cond, source order
    TierSig ann;  // Annot
};

struct Parser {
    Lexer lex;
    Signature sig;
    bool have_sig = false;
    std::vector<std::pair<std::string, FnPtr>> fns;
    std::map<std::string, FnPtr> env;
    std::map<std::string, std::string> term_constants;

    explicit Parser(std::string_view src) : lex(src) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(lex.cur.line, lex.cur.col, msg);
    }
    [[noreturn]] void fail_at(const RawExpr& e, const std::string& msg) {
        throw ParseError(e.line, e.col, msg);
    }

    bool at_punct(const std::string& p) {
        return lex.cur.kind == Token::Punct && lex.cur.text == p;
    }
    bool at_ident(const std::string& w) {
        return lex.cur.kind == Token::Ident && lex.cur.text == w;
    }

    void expect_punct(const std::string& p) {
        if (!at_punct(p)) fail("expected '" + p + "'");
        lex.advance();
    }

    std::string ident() {
        if (lex.cur.kind != Token::Ident) fail("expected identifier");
        std::string s = lex.cur.text;
        lex.advance();
        return s;
    }

    unsigned number() {
        if (lex.cur.kind != Token::Number) fail("expected number");
        unsigned n = static_cast<unsigned>(std::stoul(lex.cur.text));
        lex.advance();
        return n;
    }

    TierSig tiersig() {
        TierSig s;
        expect_punct("(");
        if (!at_punct(")")) {
            s.inputs.push_back(number());
            while (at_punct(",")) {
                lex.advance();
                s.inputs.push_back(number());
            }
        }
        expect_punct(")");
        expect_punct("->");
        s.output = number();
        return s;
    }

    void parse_file() {
        while (lex.cur.kind != Token::End) {
            if (at_ident("sig")) {
                parse_sig();
            } else if (at_ident("fn")) {
                parse_fn();
            } else if (at_ident("term")) {
                parse_term_decl();
            } else {
                fail("expected 'sig', 'fn' or 'term'");
            }
        }
        if (!have_sig) fail("program declares no signature");
    }

    void parse_sig() {
        if (have_sig) fail("only one signature per program");
        lex.advance();
        ident();  // signature name, informational
        expect_punct("{");
        while (true) {
            std::string name = ident();
            expect_punct(":");
            unsigned arity = number();
            sig.ctors.push_back({name, arity});
            if (at_punct(",")) {
                lex.advance();
                continue;
            }
            break;
        }
        expect_punct("}");
        sig.validate();
        have_sig = true;
    }

    void parse_fn() {
        lex.advance();
        std::string name = ident();
        if (env.count(name)) fail("function redefined: " + name);
        expect_punct("@");
        TierSig declared = tiersig();
        expect_punct("=");
        RawExpr body = expr();
        FnPtr fn = resolve(body, declared);
        fns.emplace_back(name, fn);
        env.emplace(name, fn);
    }

    void parse_term_decl() {
        lex.advance();
        std::string name = ident();
        expect_punct("=");
        // capture raw term text up to end of line; terms are re-parsed against
        // a symbol table by the consumer
        std::ostringstream text;
        unsigned start_line = lex.cur.line;
        while (lex.cur.kind != Token::End && lex.cur.line == start_line) {
            text << lex.cur.text;
            lex.advance();
        }
        term_constants[name] = text.str();
    }

    RawExpr expr() {
        RawExpr e;
        e.line = lex.cur.line;
        e.col = lex.cur.col;
        if (at_punct("(")) {
            lex.advance();
            RawExpr inner = expr();
            expect_punct("@");
            e.kind = RawExpr::Annot;
            e.ann = tiersig();
            e.args.push_back(std::move(inner));
            expect_punct(")");
            return e;
        }
        std::string head = ident();
        if (head == "id") {
            e.kind = RawExpr::Id;
        } else if (head == "con") {
            e.kind = RawExpr::Con;
            e.name = ident();
            if (!sig.index_of(e.name)) fail_at(e, "unknown constructor: " + e.name);
        } else if (head == "proj") {
            e.kind = RawExpr::Proj;
            e.n = number();
            e.m = number();
        } else if (head == "comp") {
            e.kind = RawExpr::Comp;
            expect_punct("(");
            e.args.push_back(expr());
            expect_punct(";");
            if (!at_punct(")")) {
                e.args.push_back(expr());
                while (at_punct(",")) {
                    lex.advance();
                    e.args.push_back(expr());
                }
            }
            expect_punct(")");
        } else if (head == "rec" || head == "cond") {
            e.kind = head == "rec" ? RawExpr::Rec : RawExpr::Cond;
            expect_punct("{");
            while (true) {
                std::string ctor = ident();
                if (!sig.index_of(ctor)) fail_at(e, "unknown constructor in branch: " + ctor);
                expect_punct("=>");
                e.branches.emplace_back(ctor, expr());
                if (at_punct(",")) {
                    lex.advance();
                    continue;
                }
                break;
            }
            expect_punct("}");
        } else {
            e.kind = RawExpr::Ref;
            e.name = head;
            if (!env.count(head)) fail_at(e, "unknown function: " + head);
        }
        return e;
    }

    // ------------------------------------------------------------------
    // Tier-sig resolution: the declared top-level sig propagates down; Comp
    // intermediate tiers come from the shapes of the outer/inner expressions
    // or from references and annotations.

    std::optional<unsigned> infer_output(const RawExpr& e, const std::vector<unsigned>& inputs) {
        switch (e.kind) {
            case RawExpr::Ref: return env.at(e.name)->sig.output;
            case RawExpr::Annot: return e.ann.output;
            case RawExpr::Id: return inputs.size() == 1 ? std::optional(inputs[0]) : std::nullopt;
            case RawExpr::Con: {
                unsigned a = sig.ctors[*sig.index_of(e.name)].arity;
                if (a >= 1 && inputs.size() == a) return inputs[0];
                return std::nullopt;
            }
            case RawExpr::Proj:
                if (e.m >= 1 && inputs.size() == e.n && e.m <= e.n) return inputs[e.m - 1];
                return std::nullopt;
            case RawExpr::Comp: {
                std::vector<unsigned> mids;
                for (std::size_t k = 1; k < e.args.size(); ++k) {
                    auto o = infer_output(e.args[k], inputs);
                    if (!o) return std::nullopt;
                    mids.push_back(*o);
                }
                return infer_output(e.args[0], mids);
            }
            case RawExpr::Rec:
            case RawExpr::Cond: return std::nullopt;
        }
        return std::nullopt;
    }

    FnPtr resolve(const RawExpr& e, const TierSig& required) {
        switch (e.kind) {
            case RawExpr::Annot: {
                if (!(e.ann == required))
                    fail_at(e, "annotation " + to_string(e.ann) +
                                   " disagrees with required tiers " + to_string(required));
                return resolve(e.args[0], required);
            }
            case RawExpr::Ref: {
                const FnPtr& fn = env.at(e.name);
                if (!(fn->sig == required))
                    fail_at(e, "function " + e.name + " declared @ " + to_string(fn->sig) +
                                   " used where " + to_string(required) + " is required");
                return fn;
            }
            case RawExpr::Id: return make_fn(FnId{}, required);
            case RawExpr::Con: return make_fn(FnConstr{*sig.index_of(e.name)}, required);
            case RawExpr::Proj: return make_fn(FnProj{e.n, e.m}, required);
            case RawExpr::Comp: {
                const RawExpr& outer = e.args[0];
                std::size_t n = e.args.size() - 1;
                std::vector<std::optional<unsigned>> mids(n);
                for (std::size_t k = 0; k < n; ++k)
                    mids[k] = infer_output(e.args[k + 1], required.inputs);
                // shape of the outer expression fixes remaining intermediates
                auto assign = [&](std::size_t k, unsigned tier) {
                    if (mids[k] && *mids[k] != tier)
                        fail_at(e, "conflicting tiers for composition argument " +
                                       std::to_string(k + 1));
                    mids[k] = tier;
                };
                if (outer.kind == RawExpr::Id || outer.kind == RawExpr::Con) {
                    for (std::size_t k = 0; k < n; ++k) assign(k, required.output);
                } else if (outer.kind == RawExpr::Proj) {
                    if (outer.m >= 1 && outer.m <= n) assign(outer.m - 1, required.output);
                } else if (outer.kind == RawExpr::Ref) {
                    const TierSig& s = env.at(outer.name)->sig;
                    for (std::size_t k = 0; k < n && k < s.inputs.size(); ++k)
                        assign(k, s.inputs[k]);
                } else if (outer.kind == RawExpr::Annot) {
                    for (std::size_t k = 0; k < n && k < outer.ann.inputs.size(); ++k)
                        assign(k, outer.ann.inputs[k]);
                }
                std::vector<unsigned> out_inputs;
                for (std::size_t k = 0; k < n; ++k) {
                    if (!mids[k])
                        fail_at(e.args[k + 1],
                                "cannot infer the tier of composition argument " +
                                    std::to_string(k + 1) + "; add a (... @ (...)->i) annotation");
                    out_inputs.push_back(*mids[k]);
                }
                FnComp node;
                node.outer = resolve(outer, TierSig{out_inputs, required.output});
                for (std::size_t k = 0; k < n; ++k)
                    node.inners.push_back(
                        resolve(e.args[k + 1], TierSig{required.inputs, out_inputs[k]}));
                return make_fn(std::move(node), required);
            }
            case RawExpr::Rec:
            case RawExpr::Cond: {
                bool is_rec = e.kind == RawExpr::Rec;
                if (required.inputs.empty())
                    fail_at(e, std::string(is_rec ? "rec" : "cond") +
                                   " needs at least one input tier");
                unsigned j = required.inputs[0];
                unsigned i = required.output;
                std::vector<unsigned> params(required.inputs.begin() + 1, required.inputs.end());
                std::vector<const RawExpr*> by_ctor(sig.ctors.size(), nullptr);
                for (const auto& [name, body] : e.branches) {
                    unsigned idx = *sig.index_of(name);
                    if (by_ctor[idx]) fail_at(e, "duplicate branch for constructor " + name);
                    by_ctor[idx] = &body;
                }
                for (unsigned k = 0; k < sig.ctors.size(); ++k)
                    if (!by_ctor[k])
                        fail_at(e, "missing branch for constructor " + sig.ctors[k].name);
                std::vector<FnPtr> branches;
                for (unsigned k = 0; k < sig.ctors.size(); ++k) {
                    unsigned a = sig.ctors[k].arity;
                    TierSig want;
                    want.inputs.insert(want.inputs.end(), a, j);
                    if (is_rec) want.inputs.insert(want.inputs.end(), a, i);
                    want.inputs.insert(want.inputs.end(), params.begin(), params.end());
                    want.output = i;
                    branches.push_back(resolve(*by_ctor[k], want));
                }
                if (is_rec) return make_fn(FnRec{std::move(branches)}, required);
                return make_fn(FnCond{std::move(branches)}, required);
            }
        }
        fail_at(e, "unresolvable expression");
    }
};

}  // namespace

ProgramFile parse_program(std::string_view source) {
    Parser p(source);
    p.parse_file();
    ProgramFile out;
    out.sig = std::move(p.sig);
    out.fns = std::move(p.fns);
    for (const auto& [name, fn] : out.fns) out.fn_by_name.emplace(name, fn);
    out.term_constants = std::move(p.term_constants);
    return out;
}

// ---------------------------------------------------------------------------
// Pretty printing.

namespace {

void print_expr(std::ostringstream& out, const FnPtr& f, const Signature& sig, bool top) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FnId>) {
                out << "id";
            } else if constexpr (std::is_same_v<T, FnConstr>) {
                out << "con " << sig.ctors[node.ctor].name;
            } else if constexpr (std::is_same_v<T, FnProj>) {
                out << "proj " << node.n << " " << node.m;
            } else if constexpr (std::is_same_v<T, FnComp>) {
                out << "comp(";
                print_expr(out, node.outer, sig, false);
                out << ";";
                for (std::size_t k = 0; k < node.inners.size(); ++k) {
                    out << (k ? ", " : " ");
                    print_expr(out, node.inners[k], sig, false);
                }
                out << ")";
            } else {
                constexpr bool is_rec = std::is_same_v<T, FnRec>;
                // nested rec/cond carry an explicit annotation so the printed
                // form re-resolves
                if (!top) out << "(";
                out << (is_rec ? "rec{ " : "cond{ ");
                for (std::size_t k = 0; k < node.branches.size(); ++k) {
                    if (k) out << ", ";
                    out << sig.ctors[k].name << " => ";
                    print_expr(out, node.branches[k], sig, false);
                }
                out << " }";
                if (!top) out << " @ " << to_string(f->sig) << ")";
            }
        },
        f->node);
}

}  // namespace

std::string pretty_print_fn(const FnPtr& f, const Signature& sig) {
    std::ostringstream out;
    print_expr(out, f, sig, true);
    return out.str();
}

std::string pretty_print(const ProgramFile& p) {
    std::ostringstream out;
    out << "sig S {";
    for (std::size_t i = 0; i < p.sig.ctors.size(); ++i)
        out << (i ? ", " : " ") << p.sig.ctors[i].name << ":" << p.sig.ctors[i].arity;
    out << " }\n";
    for (const auto& [name, fn] : p.fns)
        out << "fn " << name << " @ " << to_string(fn->sig) << " = " << pretty_print_fn(fn, p.sig)
            << "\n";
    for (const auto& [name, text] : p.term_constants) out << "term " << name << " = " << text << "\n";
    return out.str();
}

}  // namespace tgr
