#include <catch2/catch_amalgamated.hpp>

#include "closefields/witt.hpp"

using namespace closefields;

namespace {

FieldDescPtr Z2() { return field_Qp(2); }
FieldDescPtr Z3() { return field_Qp(3); }
FieldDescPtr Z2sqrt2() { return field_Qp_ramified(2, 2); }
FieldDescPtr W_F4() { return make_field(2, 2, default_defining_poly(2, 2), {EisCoeff(-2), EisCoeff(1)}); }

// All coordinate tuples over F_q of a given length.
std::vector<std::vector<FqElem>> all_tuples(int64_t q, int len) {
    std::vector<std::vector<FqElem>> out;
    std::vector<FqElem> cur(len, 0);
    while (true) {
        out.push_back(cur);
        int j = 0;
        while (j < len && cur[j] == q - 1) cur[j++] = 0;
        if (j == len) break;
        cur[j]++;
    }
    return out;
}

}  // namespace

TEST_CASE("ghost map formula, symbolically") {
    // q=2, pi=2: (a_0, a_1) -> (a_0, a_0^2 + 2 a_1)
    auto F = Z2();
    int P = 6;
    MPolyCoordRing R{F, P, 2};
    std::vector<MPoly> coords = {R.var(0), R.var(1)};
    std::function<MPoly(const TruncElem&)> embed = [&](const TruncElem& c) {
        return MPoly::constant(F, P, 2, c);
    };
    auto ghosts = ghost_map_generic<MPoly>(F, P, coords, embed);
    CHECK(ghosts[0] == R.var(0));
    auto two = TruncElem::from_integer(F, P, 2);
    CHECK(ghosts[1] == R.var(0).pow(2) + R.var(1).scale(two));
}

TEST_CASE("ghost map on zero and on (1,1) at q=3") {
    auto F = Z3();
    int P = 5;
    TruncCoordRing R{F, P};
    std::function<TruncElem(const TruncElem&)> id = [](const TruncElem& c) { return c; };
    std::vector<TruncElem> zero2 = {R.zero(), R.zero()};
    auto gz = ghost_map_generic<TruncElem>(F, P, zero2, id);
    CHECK(gz[0].is_zero());
    CHECK(gz[1].is_zero());
    std::vector<TruncElem> oneone = {R.one(), R.one()};
    auto g = ghost_map_generic<TruncElem>(F, P, oneone, id);
    CHECK(g[0] == R.one());
    CHECK(g[1] == TruncElem::from_integer(F, P, 4));  // 1^3 + 3*1
}

TEST_CASE("ghost_solve: Teichmuller ghost and V of Teichmuller") {
    auto F = Z2();
    int P = 6;
    // symbolic: ghost (a, a^q) -> Witt (a, 0)
    MPolyCoordRing R{F, P, 1};
    std::function<MPoly(const MPoly&)> phi = [&](const MPoly& b) { return frobenius_substitute(b, 2); };
    std::vector<MPoly> ghosts = {R.var(0), R.var(0).pow(2)};
    auto coords = ghost_solve_generic<MPoly>(F, P, ghosts, phi);
    CHECK(coords[0] == R.var(0));
    CHECK(coords[1].is_zero());
    // concrete: ghost (0, 2) -> Witt (0, 1)
    TruncCoordRing RT{F, P};
    std::function<TruncElem(const TruncElem&)> phit = [](const TruncElem& b) { return b; };
    std::vector<TruncElem> g2 = {RT.zero(), TruncElem::from_integer(F, P, 2)};
    auto c2 = ghost_solve_generic<TruncElem>(F, P, g2, phit);
    CHECK(c2[0].is_zero());
    CHECK(c2[1] == TruncElem::one(F, P - 1));
}

TEST_CASE("ghost_map then ghost_solve round-trips on admissible ghosts") {
    auto F = Z3();
    int P = 7;
    MPolyCoordRing R{F, P, 3};
    std::function<MPoly(const TruncElem&)> embed = [&](const TruncElem& c) {
        return MPoly::constant(F, P, 3, c);
    };
    std::function<MPoly(const MPoly&)> phi = [&](const MPoly& b) { return frobenius_substitute(b, 3); };
    // random-ish Witt coordinates: polynomials in three symbols
    std::vector<MPoly> coords = {
        R.var(0) + R.var(1).scale(TruncElem::from_integer(F, P, 2)),
        R.var(2).pow(2) + R.one(),
        R.var(0) * R.var(2),
    };
    auto ghosts = ghost_map_generic<MPoly>(F, P, coords, embed);
    auto back = ghost_solve_generic<MPoly>(F, P, ghosts, phi);
    for (int j = 0; j < 3; ++j) CHECK(back[j] == coords[j].reduce(P - j));
}

TEST_CASE("ghost_solve rejects inadmissible ghosts with the stage index") {
    auto F = Z2();
    int P = 5;
    std::function<TruncElem(const TruncElem&)> phit = [](const TruncElem& b) { return b; };
    std::vector<TruncElem> bad = {TruncElem::one(F, P), TruncElem::from_integer(F, P, 2)};
    try {
        ghost_solve_generic<TruncElem>(F, P, bad, phit);
        FAIL("expected VerifyError");
    } catch (const VerifyError& e) {
        CHECK(std::string(e.what()).find("stage 0") != std::string::npos);
    }
}

TEST_CASE("law polynomials: S_0 = X_0 + Y_0 for every (O, q, pi)") {
    for (auto F : {Z2(), Z3(), Z2sqrt2(), W_F4()}) {
        LawTable t(F, 2, 3);
        int nv = 4;
        auto X0 = MPoly::variable(F, 3, nv, 0), Y0 = MPoly::variable(F, 3, nv, 2);
        CHECK(t.sum()[0] == X0 + Y0);
    }
}

TEST_CASE("law polynomials for O = Z_2 match hand-solved ghosts") {
    auto F = Z2();
    LawTable t(F, 2, 4);
    int nv = 4;
    auto X0 = MPoly::variable(F, 4, nv, 0), X1 = MPoly::variable(F, 4, nv, 1);
    auto Y0 = MPoly::variable(F, 4, nv, 2), Y1 = MPoly::variable(F, 4, nv, 3);
    CHECK(t.sum()[1] == X1 + Y1 - X0 * Y0);
    CHECK(t.product()[0] == X0 * Y0);
    auto two = TruncElem::from_integer(F, 4, 2);
    CHECK(t.product()[1] == X0.pow(2) * Y1 + X1 * Y0.pow(2) + (X1 * Y1).scale(two));
}

TEST_CASE("ramified law table: S_1 = X_1 + Y_1 - pi X_0 Y_0 over Z_2[sqrt 2]") {
    auto F = Z2sqrt2();
    LawTable t(F, 2, 4);
    int nv = 4;
    auto X0 = MPoly::variable(F, 4, nv, 0), X1 = MPoly::variable(F, 4, nv, 1);
    auto Y0 = MPoly::variable(F, 4, nv, 2), Y1 = MPoly::variable(F, 4, nv, 3);
    auto pi = TruncElem::pi(F, 4);
    CHECK(t.sum()[1] == X1 + Y1 - (X0 * Y0).scale(pi));
}

TEST_CASE("ghost consistency of law tables (integrality witnessed by construction)") {
    for (auto F : {Z2(), Z3(), Z2sqrt2()}) {
        LawTable t(F, 3, 3);
        CHECK(t.verify_ghost_consistency());
    }
}

TEST_CASE("witt ring ops: unit, Teichmuller multiplicativity, 1+1=V(1)") {
    auto F = Z2();
    auto t = law_polynomials(F, 2, 3);
    FqCoordRing R{F->rf()};
    auto one = WittVec<FqCoordRing>::teichmuller(t, R, R.one(), 2);
    auto zero = WittVec<FqCoordRing>::zero(t, R, 2);
    CHECK(witt_add(one, zero) == one);
    // (1,0) + (1,0) = (0,1) in W^2(F_2) = Z/4
    auto s = witt_add(one, one);
    CHECK(s.coords == std::vector<FqElem>{0, 1});

    // [a][b] = [ab] for all a, b in F_4, n = 3
    auto F4field = W_F4();
    auto t4 = law_polynomials(F4field, 3, 3);
    FqCoordRing R4{F4field->rf()};
    for (FqElem a = 0; a < 4; ++a)
        for (FqElem b = 0; b < 4; ++b) {
            auto ta = WittVec<FqCoordRing>::teichmuller(t4, R4, a, 3);
            auto tb = WittVec<FqCoordRing>::teichmuller(t4, R4, b, 3);
            auto tab = WittVec<FqCoordRing>::teichmuller(t4, R4, R4.mul(a, b), 3);
            CHECK(witt_mul(ta, tb) == tab);
        }
}

TEST_CASE("W^n ring axioms exhaustively over F_2 and F_3, n = 2") {
    for (auto F : {Z2(), Z3()}) {
        auto t = law_polynomials(F, 2, 3);
        FqCoordRing R{F->rf()};
        auto tuples = all_tuples(F->q(), 2);
        std::vector<WittVec<FqCoordRing>> elems;
        for (auto& c : tuples) elems.push_back(WittVec<FqCoordRing>{t, R, c});
        auto zero = WittVec<FqCoordRing>::zero(t, R, 2);
        auto one = WittVec<FqCoordRing>::teichmuller(t, R, R.one(), 2);
        for (const auto& a : elems) {
            CHECK(witt_add(a, witt_neg(a)) == zero);
            CHECK(witt_mul(a, one) == a);
            for (const auto& b : elems) {
                CHECK(witt_add(a, b) == witt_add(b, a));
                CHECK(witt_mul(a, b) == witt_mul(b, a));
                for (const auto& c : elems) {
                    CHECK(witt_add(witt_add(a, b), c) == witt_add(a, witt_add(b, c)));
                    CHECK(witt_mul(witt_mul(a, b), c) == witt_mul(a, witt_mul(b, c)));
                    CHECK(witt_mul(a, witt_add(b, c)) == witt_add(witt_mul(a, b), witt_mul(a, c)));
                }
            }
        }
    }
}

TEST_CASE("phi V = V phi = pi on O/pi-algebra coordinates") {
    auto F = Z2();
    auto t = law_polynomials(F, 3, 3);
    SECTION("over F_2") {
        FqCoordRing R{F->rf()};
        for (auto& c : all_tuples(2, 3)) {
            WittVec<FqCoordRing> x{t, R, c};
            auto lhs1 = witt_frobenius(witt_verschiebung(x));
            auto lhs2 = witt_verschiebung(witt_frobenius(x));
            auto rhs = witt_scalar_pi(x);
            CHECK(lhs1 == rhs);
            CHECK(lhs2 == rhs);
        }
    }
    SECTION("over the non-perfect F_2[u]/u^3") {
        FqPolyCoordRing R{F->rf(), 3};
        std::vector<FqPolyCoordRing::Elem> sample = {
            R.zero(), R.one(), R.gen(), R.add(R.one(), R.gen()),
            R.mul(R.gen(), R.gen()), R.add(R.gen(), R.mul(R.gen(), R.gen()))};
        for (const auto& c0 : sample)
            for (const auto& c1 : sample) {
                WittVec<FqPolyCoordRing> x{t, R, {c0, c1, R.one()}};
                CHECK(witt_frobenius(witt_verschiebung(x)) == witt_scalar_pi(x));
                CHECK(witt_verschiebung(witt_frobenius(x)) == witt_scalar_pi(x));
            }
    }
}

TEST_CASE("frobenius over O/pi^m with m >= 2 is refused") {
    auto F = Z2();
    auto t = law_polynomials(F, 2, 3);
    TruncCoordRing R{F, 2};
    auto x = WittVec<TruncCoordRing>::teichmuller(t, R, R.one(), 2);
    CHECK_THROWS_AS(witt_frobenius(x), Error);
}

TEST_CASE("truncation drops the tail coordinates") {
    auto F = Z2();
    auto t = law_polynomials(F, 3, 2);
    FqCoordRing R{F->rf()};
    WittVec<FqCoordRing> x{t, R, {1, 0, 1}};
    auto y = witt_truncate(x, 2);
    CHECK(y.coords == std::vector<FqElem>{1, 0});
}

TEST_CASE("covector shift and addition") {
    auto F = Z2();
    auto t = law_polynomials(F, 4, 2);
    FqCoordRing R{F->rf()};
    // (..., 0, a, b) -> (..., 0, 0, a)
    Covector<FqCoordRing> c{t, R, {1, 1}};  // a_{-1} = 1, a_0 = 1
    auto v = covector_V(c);
    CHECK(v.entries == std::vector<FqElem>{1});
    // addition agrees with W^m addition on padded representatives; in
    // W^2(F_2) = Z/4 the classes are (1,0) = 1, (0,1) = 2, (1,1) = 3, and a
    // length-1 covector {a} embeds as V(a).
    Covector<FqCoordRing> d{t, R, {1}};
    auto s = covector_add(c, d);  // 3 + 2 = 1 = (1,0)
    CHECK(s.entries == std::vector<FqElem>{1, 0});
    auto s2 = covector_add(c, Covector<FqCoordRing>{t, R, {1, 0}});  // 3 + 1 = 0
    CHECK(s2.entries.empty());
}

TEST_CASE("theta counit: W^3(F_2) -> Z/8") {
    ThetaCounit theta(Z2(), 3);
    CHECK(theta.map({1, 1, 1}) == TruncElem::from_integer(Z2(), 3, 7));
    CHECK(theta.map({1, 0, 0}) == TruncElem::one(Z2(), 3));
    auto rep = theta.verify();
    CHECK(rep.ok);
    CHECK(rep.size == 8);
}

TEST_CASE("theta is a ring isomorphism for desk-scale instances") {
    CHECK(ThetaCounit(Z3(), 2).verify().ok);          // 9 elements
    CHECK(ThetaCounit(Z2sqrt2(), 4).verify().ok);     // 16
    CHECK(ThetaCounit(W_F4(), 3).verify().ok);        // 64
}

TEST_CASE("specialize_check matches the classical p-typical oracle") {
    CHECK(specialize_check(LawTable(Z2(), 3, 4)).ok);
    CHECK(specialize_check(LawTable(Z3(), 2, 4)).ok);
    CHECK(specialize_check(LawTable(Z2(), 1, 4)).ok);  // S_0 = X_0 + Y_0 both sides
}
