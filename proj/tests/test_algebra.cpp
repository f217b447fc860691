#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace tgr;

namespace {

SymbolTablePtr nat_table() {
    return std::make_shared<SymbolTable>(Signature{{{"z", 0}, {"s", 1}}});
}

FnPtr sum_fn(unsigned j, unsigned i) {
    FnPtr pz = make_fn(FnProj{1, 1}, {{i}, i});
    FnPtr cons = make_fn(FnConstr{1}, {{i}, i});
    FnPtr p32 = make_fn(FnProj{3, 2}, {{j, i, i}, i});
    FnPtr bs = make_fn(FnComp{cons, {p32}}, {{j, i, i}, i});
    return make_fn(FnRec{{pz, bs}}, {{j, i}, i});
}

FnPtr mirror_fn(unsigned j, unsigned i) {
    FnPtr bleaf = make_fn(FnConstr{0}, {{}, i});
    FnPtr connode = make_fn(FnConstr{1}, {{i, i}, i});
    FnPtr p44 = make_fn(FnProj{4, 4}, {{j, j, i, i}, i});
    FnPtr p43 = make_fn(FnProj{4, 3}, {{j, j, i, i}, i});
    FnPtr bnode = make_fn(FnComp{connode, {p44, p43}}, {{j, j, i, i}, i});
    return make_fn(FnRec{{bleaf, bnode}}, {{j}, i});
}

}  // namespace

TEST_CASE("signature rejects duplicate constructor names") {
    Signature ok{{{"z", 0}, {"s", 1}}};
    CHECK_NOTHROW(ok.validate());
    Signature dup{{{"z", 0}, {"z", 1}}};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("symbol table interns tiered copies and functions") {
    auto syms = nat_table();
    SymbolId s0 = syms->tiered(1, 0);
    CHECK(syms->tiered(1, 0) == s0);
    CHECK((*syms)[s0].name == "s^0");
    CHECK((*syms)[s0].kind == SymbolKind::TieredCtor);
    CHECK((*syms)[s0].arity == 1);
    SymbolId f = syms->fresh_function("f", 2);
    CHECK((*syms)[f].kind == SymbolKind::Function);
    CHECK_THROWS_AS(syms->fresh_function("f", 2), std::invalid_argument);
    CHECK(syms->lookup("s^0") == s0);
}

TEST_CASE("term parse and print round-trip") {
    auto syms = nat_table();
    TermPtr t = parse_term("s(s(z))", *syms);
    CHECK(to_string(t, *syms) == "s(s(z))");
    CHECK(t->tree_size == 3);
    CHECK_THROWS_AS(parse_term("s(z,z)", *syms), std::invalid_argument);
    CHECK_THROWS_AS(parse_term("w(z)", *syms), std::invalid_argument);
    CHECK_THROWS_AS(parse_term("s(z", *syms), std::invalid_argument);
}

TEST_CASE("tier annotation is invertible") {
    auto syms = nat_table();
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        TermPtr t = testutil::random_term(*syms, rng, 40);
        TermPtr a = tier_annotate(t, 2, *syms);
        CHECK(to_string(a, *syms) != to_string(t, *syms));
        CHECK(term_equal(erase_tiers(a, *syms), t));
    }
}

TEST_CASE("oracle computes addition") {
    auto syms = nat_table();
    FnPtr sum = sum_fn(1, 0);
    for (unsigned a = 0; a <= 10; ++a)
        for (unsigned b = 0; b <= 10; ++b) {
            TermPtr r = eval_term(sum, {testutil::nat(*syms, a), testutil::nat(*syms, b)}, *syms);
            CHECK(testutil::nat_value(r, *syms) == a + b);
        }
}

TEST_CASE("oracle mirror is an involution") {
    auto syms = std::make_shared<SymbolTable>(Signature{{{"leaf", 0}, {"node", 2}}});
    FnPtr mirror = mirror_fn(1, 0);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        TermPtr t = testutil::random_term(*syms, rng, 60);
        TermPtr once = eval_term(mirror, {t}, *syms);
        TermPtr twice = eval_term(mirror, {once}, *syms);
        CHECK(term_equal(twice, t));
    }
}

TEST_CASE("oracle enforces its budget") {
    auto syms = nat_table();
    FnPtr sum = sum_fn(1, 0);
    CHECK_THROWS_AS(
        eval_term(sum, {testutil::nat(*syms, 50), testutil::nat(*syms, 50)}, *syms, 20),
        BudgetExceeded);
}

TEST_CASE("tier checker accepts stratified recursion") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    CHECK(check_tiers(sum_fn(1, 0), nat) == TierSig{{1, 0}, 0});
    CHECK(check_tiers(sum_fn(2, 0), nat) == TierSig{{2, 0}, 0});
    Signature bt{{{"leaf", 0}, {"node", 2}}};
    CHECK(check_tiers(mirror_fn(1, 0), bt) == TierSig{{1}, 0});
}

TEST_CASE("tier checker rejects recursion within one tier") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    for (auto [j, i] : {std::pair{0u, 0u}, {1u, 1u}, {0u, 1u}}) {
        try {
            check_tiers(sum_fn(j, i), nat);
            FAIL("expected TierError for (", j, ",", i, ")");
        } catch (const TierError& e) {
            CHECK(e.kind == TierError::Kind::PredicativityViolation);
        }
    }
}

TEST_CASE("case distinction may stay within a tier") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    FnPtr bz = make_fn(FnConstr{0}, {{}, 0});
    FnPtr bs = make_fn(FnProj{1, 1}, {{0}, 0});
    FnPtr pred = make_fn(FnCond{{bz, bs}}, {{0}, 0});
    CHECK(check_tiers(pred, nat) == TierSig{{0}, 0});
}

TEST_CASE("tier checker rejects branch signature mismatches") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    // s-branch output tier disagrees with the recursion's result tier
    FnPtr pz = make_fn(FnProj{1, 1}, {{0}, 0});
    FnPtr bad = make_fn(FnProj{3, 2}, {{1, 0, 0}, 1});
    FnPtr rec = make_fn(FnRec{{pz, bad}}, {{1, 0}, 0});
    try {
        check_tiers(rec, nat);
        FAIL("expected TierError");
    } catch (const TierError& e) {
        CHECK(e.kind == TierError::Kind::Mismatch);
        CHECK(e.path == std::vector<unsigned>{1});
    }
}

TEST_CASE("tier checker rejects structural errors with a path") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    FnPtr p = make_fn(FnProj{2, 3}, {{0, 0}, 0});  // m out of range
    CHECK_THROWS_AS(check_tiers(p, nat), TierError);
    FnPtr inner = make_fn(FnProj{2, 3}, {{0, 0}, 0});
    FnPtr outer = make_fn(FnComp{make_fn(FnId{}, {{0}, 0}), {inner}}, {{0, 0}, 0});
    try {
        check_tiers(outer, nat);
        FAIL("expected TierError");
    } catch (const TierError& e) {
        CHECK(e.path == std::vector<unsigned>{1});
    }
}

TEST_CASE("nested recursion cannot recurse on its own results") {
    Signature nat{{{"z", 0}, {"s", 1}}};
    // the inner recursion consumes a tier-0 value produced by the outer one,
    // so its recurrence tier would have to equal its result tier
    FnPtr icz = make_fn(FnConstr{0}, {{}, 0});
    FnPtr ips = make_fn(FnProj{2, 2}, {{0, 0}, 0});
    FnPtr inner = make_fn(FnRec{{icz, ips}}, {{0}, 0});
    FnPtr ocz = make_fn(FnConstr{0}, {{}, 0});
    FnPtr op = make_fn(FnProj{2, 2}, {{1, 0}, 0});
    FnPtr obranch = make_fn(FnComp{inner, {op}}, {{1, 0}, 0});
    FnPtr outer = make_fn(FnRec{{ocz, obranch}}, {{1}, 0});
    try {
        check_tiers(outer, nat);
        FAIL("expected TierError");
    } catch (const TierError& e) {
        CHECK(e.kind == TierError::Kind::PredicativityViolation);
    }
}
