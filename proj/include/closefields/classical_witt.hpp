#pragma once

#include <map>
#include <string>
#include <vector>

#include "closefields/common.hpp"

namespace closefields {

// Classical p-typical Witt polynomials over exact integers, solved from the
// classical ghost components w_j = T_0^{p^j} + p T_1^{p^{j-1}} + ... + p^j T_j.
// This is the independent oracle behind specialize_check: it never touches
// TruncElem arithmetic.
namespace classical {

using Monomial = std::vector<uint16_t>;
using IntPoly = std::map<Monomial, int64_t>;

inline void ipoly_add_term(IntPoly& p, const Monomial& m, int64_t c) {
    if (c == 0) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

inline IntPoly ipoly_add(const IntPoly& a, const IntPoly& b) {
    IntPoly r = a;
    for (const auto& [m, c] : b) ipoly_add_term(r, m, c);
    return r;
}

inline IntPoly ipoly_neg(const IntPoly& a) {
    IntPoly r;
    for (const auto& [m, c] : a) r.emplace(m, -c);
    return r;
}

inline IntPoly ipoly_mul(const IntPoly& a, const IntPoly& b) {
    IntPoly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Monomial m(ma.size());
            for (size_t i = 0; i < m.size(); ++i) m[i] = static_cast<uint16_t>(ma[i] + mb[i]);
            __int128 prod = static_cast<__int128>(ca) * cb;
            if (prod > INT64_MAX || prod < INT64_MIN) throw Error("classical oracle overflow");
            ipoly_add_term(r, m, static_cast<int64_t>(prod));
        }
    return r;
}

inline IntPoly ipoly_pow(const IntPoly& a, int64_t k, int nvars) {
    IntPoly acc{{Monomial(nvars, 0), 1}};
    IntPoly base = a;
    while (k) {
        if (k & 1) acc = ipoly_mul(acc, base);
        base = ipoly_mul(base, base);
        k >>= 1;
    }
    return acc;
}

inline IntPoly ipoly_scale(const IntPoly& a, int64_t s) {
    IntPoly r;
    for (const auto& [m, c] : a) {
        __int128 prod = static_cast<__int128>(c) * s;
        if (prod > INT64_MAX || prod < INT64_MIN) throw Error("classical oracle overflow");
        if (prod != 0) r.emplace(m, static_cast<int64_t>(prod));
    }
    return r;
}

inline IntPoly ipoly_div_exact(const IntPoly& a, int64_t d) {
    IntPoly r;
    for (const auto& [m, c] : a) {
        if (c % d != 0) throw Error("classical oracle: non-exact division");
        r.emplace(m, c / d);
    }
    return r;
}

inline IntPoly ghost(int64_t p, int nvars, int offset, int j) {
    IntPoly w;
    int64_t pk = 1;
    for (int k = 0; k <= j; ++k) {
        Monomial m(nvars, 0);
        m[offset + k] = static_cast<uint16_t>(detail::pow_ll(p, j - k));
        ipoly_add_term(w, m, pk);
        pk *= p;
    }
    return w;
}

struct Tables {
    int64_t p;
    int n;
    std::vector<IntPoly> S, P, N;
};

inline Tables p_typical_tables(int64_t p, int n) {
    Tables t;
    t.p = p;
    t.n = n;
    int nv = 2 * n;
    std::vector<IntPoly> gx, gy;
    for (int j = 0; j < n; ++j) {
        gx.push_back(ghost(p, nv, 0, j));
        gy.push_back(ghost(p, nv, n, j));
    }
    auto solve = [&](auto&& target_of) {
        std::vector<IntPoly> R;
        for (int j = 0; j < n; ++j) {
            IntPoly acc = target_of(j);
            int64_t pk = 1;
            for (int k = 0; k < j; ++k) {
                acc = ipoly_add(acc, ipoly_neg(ipoly_scale(ipoly_pow(R[k], detail::pow_ll(p, j - k), nv), pk)));
                pk *= p;
            }
            R.push_back(ipoly_div_exact(acc, detail::pow_ll(p, j)));
        }
        return R;
    };
    t.S = solve([&](int j) { return ipoly_add(gx[j], gy[j]); });
    t.P = solve([&](int j) { return ipoly_mul(gx[j], gy[j]); });
    t.N = solve([&](int j) { return ipoly_neg(gx[j]); });
    return t;
}

}  // namespace classical
}  // namespace closefields
