#include <catch2/catch_amalgamated.hpp>

#include "closefields/local_field.hpp"

using namespace closefields;

namespace {

FieldDescPtr Q2() { return field_Qp(2); }
FieldDescPtr Q2_sqrt2() { return field_Qp_ramified(2, 2); }
FieldDescPtr Q2_fourth() { return field_Qp_ramified(2, 4); }
FieldDescPtr F2t() { return field_Fq_laurent(2); }

void check_ring_axioms_exhaustive(FieldDescPtr F, int N) {
    auto elems = TruncElem::enumerate(F, N);
    REQUIRE(elems.size() <= 512);
    auto zero = TruncElem::zero(F, N);
    auto one = TruncElem::one(F, N);
    for (const auto& a : elems) {
        CHECK(a + zero == a);
        CHECK(a * one == a);
        CHECK(a + (-a) == zero);
        for (const auto& b : elems) {
            CHECK(a + b == b + a);
            CHECK(a * b == b * a);
        }
    }
    // associativity and distributivity on a deterministic sample of triples
    size_t n = elems.size();
    for (size_t i = 0; i < n; i += 3)
        for (size_t j = 1; j < n; j += 4)
            for (size_t k = 2; k < n; k += 5) {
                const auto &a = elems[i], &b = elems[j], &c = elems[k];
                CHECK((a + b) + c == a + (b + c));
                CHECK((a * b) * c == a * (b * c));
                CHECK(a * (b + c) == a * b + a * c);
            }
}

}  // namespace

TEST_CASE("default defining polynomial table is irreducible for p^f <= 64") {
    // construction verifies irreducibility by brute-force factor search
    for (auto [p, f] : std::vector<std::pair<int64_t, int>>{
             {2, 1}, {2, 2}, {2, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 1}, {3, 2}, {3, 3},
             {5, 1}, {5, 2}, {7, 2}, {61, 1}}) {
        auto rf = make_residue_field(p, f);
        CHECK(rf->q() == detail::pow_ll(p, f));
        if (f > 1) CHECK(rf->order(rf->gen_y()) >= 1);
    }
}

TEST_CASE("make_field basics") {
    auto E = Q2();
    CHECK(E->e() == 1);
    CHECK(E->q() == 2);
    auto E2 = Q2_sqrt2();
    CHECK(E2->e() == 2);
    CHECK(E2->q() == 2);
}

TEST_CASE("make_field rejects bad input") {
    CHECK_THROWS_AS(make_field(4, 1, {0, 1}, {EisCoeff(-4), EisCoeff(1)}), FieldError);  // non-prime p
    CHECK_THROWS_AS(make_residue_field(2, 2, {0, 1, 1}), FieldError);  // y^2+y reducible
    // x^2 - 1: constant term -1 not divisible by 2
    CHECK_THROWS_AS(make_field(2, 1, {0, 1}, {EisCoeff(-1), EisCoeff(0), EisCoeff(1)}), FieldError);
    // x^2 - 4: constant term of valuation 2
    CHECK_THROWS_AS(make_field(2, 1, {0, 1}, {EisCoeff(-4), EisCoeff(0), EisCoeff(1)}), FieldError);
}

TEST_CASE("arithmetic in Z_2/2^3") {
    auto E = Q2();
    auto three = TruncElem::from_integer(E, 3, 3);
    CHECK(three * three == TruncElem::one(E, 3));  // 9 = 1 mod 8
}

TEST_CASE("Eisenstein relation x*x = 2 in Z_2[x]/(x^2-2)") {
    auto E = Q2_sqrt2();
    auto x = TruncElem::pi(E, 4);
    auto xsq = x * x;
    CHECK(xsq == TruncElem::from_integer(E, 4, 2));
    CHECK(xsq.val() == 2);
}

TEST_CASE("geometric series inverse in F_2[t]/t^3") {
    auto F = F2t();
    auto one = TruncElem::one(F, 3);
    auto t = TruncElem::pi(F, 3);
    auto a = one + t;
    auto expect = one + t + t * t;
    CHECK(a.inv() == expect);
}

TEST_CASE("ring axioms hold exhaustively on desk-scale instances") {
    check_ring_axioms_exhaustive(Q2(), 3);          // |Z/8| = 8
    check_ring_axioms_exhaustive(Q2_sqrt2(), 4);    // 16 elements
    check_ring_axioms_exhaustive(Q2_fourth(), 4);   // 16 elements
    check_ring_axioms_exhaustive(F2t(), 3);         // 8 elements
    check_ring_axioms_exhaustive(field_Qp(3), 3);   // 27 elements
    check_ring_axioms_exhaustive(make_laurent_field(make_residue_field(2, 2)), 2);  // F_4[t]/t^2
}

TEST_CASE("valuation properties") {
    auto E = Q2_sqrt2();
    int N = 6;
    auto elems = TruncElem::enumerate(E, 3);
    for (const auto& a3 : elems) {
        auto a = TruncElem::from_digits(E, [&] {
            auto d = a3.teichmuller_digits();
            d.resize(N, 0);
            return d;
        }());
        for (const auto& b3 : elems) {
            auto b = TruncElem::from_digits(E, [&] {
                auto d = b3.teichmuller_digits();
                d.resize(N, 0);
                return d;
            }());
            int va = a.val(), vb = b.val();
            if (va + vb < N) CHECK((a * b).val() == va + vb);
            CHECK((a + b).val() >= std::min(va, vb));
        }
    }
}

TEST_CASE("division by pi and precision reduction") {
    auto E = Q2_sqrt2();
    auto x = TruncElem::pi(E, 5);
    auto two = TruncElem::from_integer(E, 5, 2);
    CHECK(two.val() == 2);
    CHECK(two.div_pi(2) == TruncElem::one(E, 3));
    CHECK_THROWS_AS(TruncElem::one(E, 5).div_pi(1), PrecisionError);
    CHECK((x * x * x).reduce(2) == TruncElem::zero(E, 2));
    auto a = TruncElem::from_integer(E, 5, 7);
    CHECK(a.reduce(3) + a.reduce(3) == (a + a).reduce(3));
    CHECK_THROWS_AS(a + a.reduce(3), PrecisionError);  // no implicit coercion
}

TEST_CASE("inverting a non-unit fails") {
    auto E = Q2();
    CHECK_THROWS_AS(TruncElem::from_integer(E, 3, 2).inv(), FieldError);
}

TEST_CASE("Teichmuller digits in Z_2/8: 7 = 1 + 2 + 4") {
    auto E = Q2();
    auto seven = TruncElem::from_integer(E, 3, 7);
    CHECK(seven.teichmuller_digits() == std::vector<FqElem>{1, 1, 1});
}

TEST_CASE("Teichmuller digits in Z_3/9: 5 has digits (2,2)") {
    auto E = field_Qp(3);
    // [2] in Z/9 is the fixed point of x -> x^3 over 2, namely 8
    auto t2 = TruncElem::teichmuller(E, 2, 2);
    CHECK(t2 == TruncElem::from_integer(E, 2, 8));
    auto five = TruncElem::from_integer(E, 2, 5);
    CHECK(five.teichmuller_digits() == std::vector<FqElem>{2, 2});
    // verify 8 + [2]*3 = 8 + 24 = 32 = 5 mod 9 via from_digits
    CHECK(TruncElem::from_digits(E, {2, 2}) == five);
}

TEST_CASE("zero has all-zero digits") {
    auto E = Q2_sqrt2();
    CHECK(TruncElem::zero(E, 4).teichmuller_digits() == std::vector<FqElem>(4, 0));
}

TEST_CASE("digits and from_digits are mutually inverse bijections") {
    for (auto F : {Q2(), Q2_sqrt2(), F2t()}) {
        int N = 4;
        auto elems = TruncElem::enumerate(F, N);
        std::set<std::string> seen;
        for (const auto& a : elems) {
            auto d = a.teichmuller_digits();
            REQUIRE(d.size() == static_cast<size_t>(N));
            CHECK(TruncElem::from_digits(F, d) == a);
            seen.insert(a.rep_bytes());
        }
        CHECK(seen.size() == elems.size());  // injective, hence bijective by counting
    }
}

TEST_CASE("close_field_iso at n=1 is the identity on residues") {
    auto E = Q2();
    CloseFieldIso iso(E, 1);
    auto rep = iso.verify();
    CHECK(rep.ok);
    CHECK(rep.exhaustive);
}

TEST_CASE("close_field_iso O/pi^2 of Q_2(sqrt 2): sqrt2 -> t, 2 -> 0") {
    auto E = Q2_sqrt2();
    CloseFieldIso iso(E, 2);
    auto x = TruncElem::pi(E, 2);
    CHECK(iso.forward(x) == TruncElem::pi(iso.laurent_side(), 2));
    auto two = TruncElem::from_integer(E, 2, 2);
    CHECK(two.is_zero());  // p = pi^2 = 0 already in O/pi^2
    CHECK(iso.forward(two).is_zero());
    CHECK(iso.verify().ok);
}

TEST_CASE("close_field_iso refuses e < n") {
    CHECK_THROWS_AS(CloseFieldIso(Q2(), 2), FieldError);
}

TEST_CASE("close_field_iso is a ring isomorphism on all desk-scale instances") {
    CHECK(CloseFieldIso(Q2_sqrt2(), 2).verify().ok);
    CHECK(CloseFieldIso(Q2_fourth(), 4).verify().ok);
    CHECK(CloseFieldIso(Q2_fourth(), 3).verify().ok);
    CHECK(CloseFieldIso(field_Qp_ramified(3, 2), 2).verify().ok);
}

TEST_CASE("spread_extension lifts T^2 + t over F_2((t)) to T^2 + pi") {
    auto F = F2t();
    auto E = Q2_sqrt2();
    int n = 2;
    std::vector<TruncElem> ainf = {TruncElem::one(F, n), TruncElem::zero(F, n)};
    auto ext = spread_extension(ainf, E, n);
    CHECK(ext.rel_degree == 2);
    CHECK(ext.lifted[0] == TruncElem::one(E, n));
    CHECK(ext.lifted[1] == TruncElem::zero(E, n));
}

TEST_CASE("spread_extension with nonconstant digits matches digit expansions") {
    auto F = F2t();
    auto E = Q2_fourth();
    int n = 3;
    auto one = TruncElem::one(F, n);
    auto t = TruncElem::pi(F, n);
    // f_inf = T^2 + t((1+t) T + (1+t^2))
    std::vector<TruncElem> ainf = {one + t * t, one + t};
    auto ext = spread_extension(ainf, E, n);
    for (size_t j = 0; j < ainf.size(); ++j)
        CHECK(ext.lifted[j].teichmuller_digits() == ainf[j].teichmuller_digits());
    // lifting then reducing returns the input mod t^n
    auto back = ext.reduce_back(F);
    for (size_t j = 0; j < ainf.size(); ++j) CHECK(back[j] == ainf[j]);
}

TEST_CASE("spread_extension rejects invalid input") {
    auto F = F2t();
    auto E = Q2_sqrt2();
    // a_0 not a unit: T^2 + t(tT + t) has non-Eisenstein constant term
    auto t = TruncElem::pi(F, 2);
    CHECK_THROWS_AS(spread_extension({t, t}, E, 2), FieldError);
    // e < n
    CHECK_THROWS_AS(spread_extension({TruncElem::one(F, 3), TruncElem::zero(F, 3)}, Q2_sqrt2(), 3),
                    FieldError);
}
