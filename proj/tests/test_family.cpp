#include <catch2/catch_amalgamated.hpp>

#include "closefields/family.hpp"

using namespace closefields;

TEST_CASE("constant family") {
    auto f = make_family<int>(0, {});
    CHECK(f.stalk(Index::at(17)) == 0);
    CHECK(f.stalk(Index::inf()) == 0);
    CHECK(f.exceptions().empty());
}

TEST_CASE("canonical form drops redundant exceptions") {
    auto f = make_family<int>(5, {{Index::at(3), 5}});
    CHECK(f.exceptions().empty());
    CHECK(f == make_family<int>(5, {}));
}

TEST_CASE("stalk evaluation") {
    auto f = make_family<int>(1, {{Index::at(0), 7}, {Index::at(2), 9}});
    CHECK(f.stalk(Index::at(1)) == 1);
    CHECK(f.stalk(Index::at(0)) == 7);
    CHECK(f.stalk(Index::at(2)) == 9);
    CHECK(f.stalk(Index::inf()) == 1);

    auto g = make_family<int>(10, {{Index::at(17), 11}});
    CHECK(g.stalk(Index::at(17)) == 11);
    CHECK(g.stalk(Index::at(16)) == 10);
    CHECK(g.stalk(Index::inf()) == 10);
}

TEST_CASE("exception at infinity is rejected") {
    CHECK_THROWS_AS(make_family<int>(0, {{Index::inf(), 1}}), Error);
}

TEST_CASE("glue constants over a two-piece partition") {
    std::vector<std::pair<Clopen, Family<int>>> cover = {
        {Clopen::finite({0, 1}), make_family<int>(2, {})},
        {Clopen::cofinite_complement({0, 1}), make_family<int>(3, {})},
    };
    auto g = glue(cover);
    CHECK(g == make_family<int>(3, {{Index::at(0), 2}, {Index::at(1), 2}}));
}

TEST_CASE("gluing a family with itself is the identity") {
    auto f = make_family<int>(4, {{Index::at(2), 8}, {Index::at(5), 1}});
    std::vector<std::pair<Clopen, Family<int>>> cover = {
        {Clopen::finite({2, 3}), f},
        {Clopen::finite({0}), f},
        {Clopen::cofinite_complement({0, 2, 3}), f},
    };
    CHECK(glue(cover) == f);
}

TEST_CASE("three-piece partition with distinct constants") {
    // independent oracle: evaluate the piecewise definition pointwise
    std::vector<std::pair<Clopen, Family<int>>> cover = {
        {Clopen::finite({0, 4}), make_family<int>(10, {})},
        {Clopen::finite({1}), make_family<int>(20, {})},
        {Clopen::cofinite_complement({0, 1, 4}), make_family<int>(30, {})},
    };
    auto g = glue(cover);
    auto piecewise = [&](Index x) {
        for (const auto& [c, fam] : cover)
            if (c.contains(x)) return fam.stalk(x);
        FAIL("not covered");
        return 0;
    };
    for (uint64_t i = 0; i < 10; ++i) CHECK(g.stalk(Index::at(i)) == piecewise(Index::at(i)));
    CHECK(g.stalk(Index::inf()) == piecewise(Index::inf()));
}

TEST_CASE("glue rejects non-partitions") {
    CHECK_THROWS_AS(glue<int>({{Clopen::finite({0}), make_family<int>(1, {})},
                               {Clopen::finite({0}), make_family<int>(2, {})},
                               {Clopen::cofinite_complement({0}), make_family<int>(3, {})}}),
                    Error);
    CHECK_THROWS_AS(glue<int>({{Clopen::finite({0}), make_family<int>(1, {})}}), Error);
    CHECK_THROWS_AS(glue<int>({{Clopen::whole(), make_family<int>(1, {})},
                               {Clopen::cofinite_complement({0}), make_family<int>(2, {})}}),
                    Error);
    CHECK_THROWS_AS(glue<int>({{Clopen::finite({0, 1}), make_family<int>(1, {})},
                               {Clopen::cofinite_complement({0}), make_family<int>(2, {})}}),
                    Error);
}

TEST_CASE("sheaf condition: glue of restrictions recovers the family") {
    auto f = make_family<int>(7, {{Index::at(1), 3}, {Index::at(6), 9}});
    std::vector<std::pair<Clopen, Family<int>>> cover = {
        {Clopen::finite({1, 2}), restrict(f, Clopen::finite({1, 2}))},
        {Clopen::finite({6}), restrict(f, Clopen::finite({6}))},
        {Clopen::cofinite_complement({1, 2, 6}), restrict(f, Clopen::cofinite_complement({1, 2, 6}))},
    };
    auto g = glue(cover);
    // exhaustive evaluation on exception set plus a generic tail point
    for (uint64_t i : {0ull, 1ull, 2ull, 6ull, 100ull}) CHECK(g.stalk(Index::at(i)) == f.stalk(Index::at(i)));
    CHECK(g.stalk(Index::inf()) == f.stalk(Index::inf()));
    CHECK(g == f);
}

TEST_CASE("map composition is pointwise composition") {
    auto f = make_family<int>(2, {{Index::at(3), 5}});
    auto g = [](int x) { return x + 1; };
    auto h = [](int x) { return 3 * x; };
    auto lhs = f.map(h).map(g);
    auto rhs = f.map([&](int x) { return g(h(x)); });
    CHECK(lhs == rhs);
}

TEST_CASE("zip_with evaluates pointwise") {
    auto f = make_family<int>(1, {{Index::at(0), 2}});
    auto g = make_family<int>(10, {{Index::at(1), 20}});
    auto s = f.zip_with(g, [](int a, int b) { return a + b; });
    CHECK(s.stalk(Index::at(0)) == 12);
    CHECK(s.stalk(Index::at(1)) == 21);
    CHECK(s.stalk(Index::at(9)) == 11);
    CHECK(s.stalk(Index::inf()) == 11);
}
