#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "closefields/common.hpp"

namespace closefields {

// A point of N u {infinity}. Only the topology of the one-point
// compactification matters: neighborhoods of infinity are cofinite.
struct Index {
    bool infinite = false;
    uint64_t i = 0;

    static Index at(uint64_t n) { return Index{false, n}; }
    static Index inf() { return Index{true, 0}; }

    bool operator==(const Index& o) const {
        return infinite == o.infinite && (infinite || i == o.i);
    }
    bool operator<(const Index& o) const {  // for map keys only
        if (infinite != o.infinite) return !infinite;
        return !infinite && i < o.i;
    }
};

// A clopen subset of N u {infinity}: either a finite set of naturals, or the
// complement of one (which contains infinity). These are exactly the clopens
// of the one-point compactification.
struct Clopen {
    bool cofinite = false;        // contains infinity iff true
    std::set<uint64_t> points;    // the finite set, or the excluded set

    static Clopen finite(std::set<uint64_t> pts) { return Clopen{false, std::move(pts)}; }
    static Clopen cofinite_complement(std::set<uint64_t> excluded) {
        return Clopen{true, std::move(excluded)};
    }
    static Clopen whole() { return Clopen{true, {}}; }

    bool contains(const Index& x) const {
        if (x.infinite) return cofinite;
        return cofinite ? !points.count(x.i) : points.count(x.i) > 0;
    }
};

// Eventually constant function N u {infinity} -> V: a finite exception map
// plus the tail value (the stalk at infinity and at all other naturals).
// Canonical form keeps no exception equal to the tail, so structural equality
// is semantic equality.
template <class V>
class Family {
  public:
    Family() = default;
    Family(V tail, std::map<uint64_t, V> exceptions) : tail_(std::move(tail)) {
        for (auto& [k, v] : exceptions)
            if (!(v == tail_)) exceptions_.emplace(k, std::move(v));
    }

    const V& tail() const { return tail_; }
    const std::map<uint64_t, V>& exceptions() const { return exceptions_; }

    const V& stalk(const Index& x) const {
        if (x.infinite) return tail_;
        auto it = exceptions_.find(x.i);
        return it == exceptions_.end() ? tail_ : it->second;
    }

    bool operator==(const Family& o) const {
        return tail_ == o.tail_ && exceptions_ == o.exceptions_;
    }

    template <class F>
    auto map(F&& fn) const -> Family<decltype(fn(std::declval<V>()))> {
        using W = decltype(fn(std::declval<V>()));
        std::map<uint64_t, W> ex;
        for (const auto& [k, v] : exceptions_) ex.emplace(k, fn(v));
        return Family<W>(fn(tail_), std::move(ex));
    }

    template <class U, class F>
    auto zip_with(const Family<U>& other, F&& fn) const
        -> Family<decltype(fn(std::declval<V>(), std::declval<U>()))> {
        using W = decltype(fn(std::declval<V>(), std::declval<U>()));
        std::map<uint64_t, W> ex;
        for (const auto& [k, v] : exceptions_) ex.emplace(k, fn(v, other.stalk(Index::at(k))));
        for (const auto& [k, u] : other.exceptions())
            if (!ex.count(k)) ex.emplace(k, fn(stalk(Index::at(k)), u));
        return Family<W>(fn(tail_, other.tail()), std::move(ex));
    }

  private:
    V tail_{};
    std::map<uint64_t, V> exceptions_;
};

template <class V>
Family<V> make_family(V tail, std::map<Index, V> exceptions) {
    std::map<uint64_t, V> ex;
    for (auto& [k, v] : exceptions) {
        if (k.infinite)
            throw Error("exception key infinity is not allowed: the value at infinity is the tail");
        ex.emplace(k.i, std::move(v));
    }
    return Family<V>(std::move(tail), std::move(ex));
}

// Glue families along a clopen partition of N u {infinity}. The cover must
// consist of pairwise disjoint clopens whose union is everything: exactly one
// cofinite piece, with the finite pieces partitioning its complement.
template <class V>
Family<V> glue(const std::vector<std::pair<Clopen, Family<V>>>& cover) {
    int cofinite_count = 0;
    size_t cof = 0;
    for (size_t i = 0; i < cover.size(); ++i)
        if (cover[i].first.cofinite) {
            ++cofinite_count;
            cof = i;
        }
    if (cofinite_count != 1)
        throw Error("glue: a clopen partition of N u {infinity} has exactly one cofinite piece, got " +
                    std::to_string(cofinite_count));
    const Clopen& tail_piece = cover[cof].first;
    std::set<uint64_t> seen;
    for (size_t i = 0; i < cover.size(); ++i) {
        if (i == cof) continue;
        for (uint64_t n : cover[i].first.points) {
            if (!seen.insert(n).second) throw Error("glue: overlapping pieces at index " + std::to_string(n));
            if (!tail_piece.points.count(n))
                throw Error("glue: pieces not disjoint from the cofinite piece at index " + std::to_string(n));
        }
    }
    if (seen != tail_piece.points) throw Error("glue: cover does not partition N u {infinity}");

    const Family<V>& tail_fam = cover[cof].second;
    std::map<uint64_t, V> ex;
    for (const auto& [k, v] : tail_fam.exceptions())
        if (tail_piece.contains(Index::at(k))) ex.emplace(k, v);
    for (size_t i = 0; i < cover.size(); ++i) {
        if (i == cof) continue;
        for (uint64_t n : cover[i].first.points) ex.insert_or_assign(n, cover[i].second.stalk(Index::at(n)));
    }
    return Family<V>(tail_fam.tail(), std::move(ex));
}

// Restriction of f regarded on a piece (used to state the sheaf condition in
// tests; the data of a family restricted to a clopen is just the family).
template <class V>
Family<V> restrict(const Family<V>& f, const Clopen&) {
    return f;
}

}  // namespace closefields
