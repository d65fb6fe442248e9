#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include "closefields/common.hpp"

namespace closefields {

// An element of F_q is addressed by its index sum(c_i * p^i) where
// (c_0,...,c_{f-1}) are its coordinates over F_p in the power basis of the
// defining polynomial's root.
using FqElem = uint16_t;

// F_q = F_p[y]/(defining_poly), with full operation tables built at
// construction. Desk scale only: q is capped so the tables stay small.
class ResidueField {
  public:
    static constexpr int kMaxQ = 1024;

    ResidueField(int64_t p, int f, std::vector<int64_t> defining_poly)
        : p_(p), f_(f) {
        if (!detail::is_prime(p)) throw FieldError("p is not prime: " + std::to_string(p));
        if (f < 1) throw FieldError("f must be positive");
        if (static_cast<int>(defining_poly.size()) != f + 1)
            throw FieldError("defining_poly must have degree exactly f");
        q_ = detail::pow_ll(p, f);
        if (q_ > kMaxQ) throw BudgetError("residue field too large: q = " + std::to_string(q_));
        poly_.resize(f + 1);
        for (int i = 0; i <= f; ++i) poly_[i] = detail::mod_reduce(defining_poly[i], p);
        if (poly_[f] != 1) throw FieldError("defining_poly must be monic");
        if (!irreducible()) throw FieldError("defining_poly is reducible over F_p");
        build_tables();
    }

    int64_t p() const { return p_; }
    int f() const { return f_; }
    int64_t q() const { return q_; }
    const std::vector<int64_t>& defining_poly() const { return poly_; }

    FqElem zero() const { return 0; }
    FqElem one() const { return 1; }
    // The residue class of y (equals the class of 1 when f = 1 is not
    // meaningful; callers guard on f).
    FqElem gen_y() const { return f_ == 1 ? FqElem(1) : FqElem(p_); }

    FqElem add(FqElem a, FqElem b) const { return add_[a * q_ + b]; }
    FqElem sub(FqElem a, FqElem b) const { return add_[a * q_ + neg_[b]]; }
    FqElem neg(FqElem a) const { return neg_[a]; }
    FqElem mul(FqElem a, FqElem b) const { return mul_[a * q_ + b]; }
    FqElem inv(FqElem a) const {
        if (a == 0) throw FieldError("inverting 0 in F_q");
        return inv_[a];
    }
    FqElem pow(FqElem a, int64_t e) const {
        if (a == 0) return e == 0 ? one() : zero();
        int64_t r = detail::mod_reduce(e, q_ - 1);
        FqElem acc = 1, base = a;
        while (r) {
            if (r & 1) acc = mul(acc, base);
            base = mul(base, base);
            r >>= 1;
        }
        return acc;
    }
    // x -> x^p, a generator of Gal(F_q/F_p).
    FqElem frobenius_p(FqElem a) const { return pow(a, p_); }
    // q-th power is the identity on F_q; kept for emphasis at call sites
    // that conceptually take q-th roots in a perfect ring.
    FqElem qth_root(FqElem a) const { return a; }

    FqElem from_int(int64_t v) const { return scalar_[detail::mod_reduce(v, p_)]; }
    FqElem from_coeffs(const std::vector<int64_t>& c) const {
        int64_t idx = 0;
        for (int i = std::min<int>(c.size(), f_) - 1; i >= 0; --i)
            idx = idx * p_ + detail::mod_reduce(c[i], p_);
        return static_cast<FqElem>(idx);
    }
    std::vector<int64_t> coeffs(FqElem a) const {
        std::vector<int64_t> c(f_);
        int64_t v = a;
        for (int i = 0; i < f_; ++i) {
            c[i] = v % p_;
            v /= p_;
        }
        return c;
    }

    // Multiplicative order; 0 has none.
    int64_t order(FqElem a) const {
        if (a == 0) throw FieldError("0 has no multiplicative order");
        int64_t n = 1;
        FqElem x = a;
        while (x != one()) {
            x = mul(x, a);
            ++n;
        }
        return n;
    }
    // Some generator of F_q^*.
    FqElem primitive_element() const {
        for (int64_t a = 1; a < q_; ++a)
            if (order(static_cast<FqElem>(a)) == q_ - 1) return static_cast<FqElem>(a);
        throw Error("no primitive element found");  // unreachable for a field
    }

    bool operator==(const ResidueField& o) const {
        return p_ == o.p_ && f_ == o.f_ && poly_ == o.poly_;
    }

  private:
    // Brute-force irreducibility: no monic factor of degree 1..f/2.
    bool irreducible() const {
        for (int d = 1; 2 * d <= f_; ++d) {
            std::vector<int64_t> div(d + 1, 0);
            div[d] = 1;
            if (divisor_search(div, 0)) return false;
        }
        return true;
    }
    bool divisor_search(std::vector<int64_t>& div, int pos) const {
        if (pos == static_cast<int>(div.size()) - 1) return poly_divides(div);
        for (int64_t c = 0; c < p_; ++c) {
            div[pos] = c;
            if (divisor_search(div, pos + 1)) return true;
        }
        return false;
    }
    bool poly_divides(const std::vector<int64_t>& div) const {
        std::vector<int64_t> rem = poly_;
        int dr = f_, dd = static_cast<int>(div.size()) - 1;
        while (dr >= dd) {
            int64_t lead = rem[dr];
            if (lead != 0)
                for (int i = 0; i <= dd; ++i)
                    rem[dr - dd + i] = detail::mod_reduce(rem[dr - dd + i] - lead * div[i], p_);
            --dr;
        }
        for (int i = 0; i < dd; ++i)
            if (rem[i] != 0) return false;
        return true;
    }

    void build_tables() {
        add_.resize(q_ * q_);
        mul_.resize(q_ * q_);
        neg_.resize(q_);
        inv_.resize(q_);
        scalar_.resize(p_);
        auto unpack = [&](int64_t idx) {
            std::vector<int64_t> c(f_);
            for (int i = 0; i < f_; ++i) {
                c[i] = idx % p_;
                idx /= p_;
            }
            return c;
        };
        auto pack = [&](const std::vector<int64_t>& c) {
            int64_t idx = 0;
            for (int i = f_ - 1; i >= 0; --i) idx = idx * p_ + c[i];
            return idx;
        };
        for (int64_t a = 0; a < q_; ++a) {
            auto ca = unpack(a);
            std::vector<int64_t> nc(f_);
            for (int i = 0; i < f_; ++i) nc[i] = detail::mod_reduce(-ca[i], p_);
            neg_[a] = static_cast<FqElem>(pack(nc));
            for (int64_t b = 0; b < q_; ++b) {
                auto cb = unpack(b);
                std::vector<int64_t> s(f_);
                for (int i = 0; i < f_; ++i) s[i] = detail::mod_reduce(ca[i] + cb[i], p_);
                add_[a * q_ + b] = static_cast<FqElem>(pack(s));
                std::vector<int64_t> prod(2 * f_ - 1, 0);
                for (int i = 0; i < f_; ++i)
                    for (int j = 0; j < f_; ++j)
                        prod[i + j] = detail::mod_reduce(prod[i + j] + ca[i] * cb[j], p_);
                for (int d = 2 * f_ - 2; d >= f_; --d) {
                    int64_t lead = prod[d];
                    if (lead == 0) continue;
                    prod[d] = 0;
                    for (int i = 0; i < f_; ++i)
                        prod[d - f_ + i] = detail::mod_reduce(prod[d - f_ + i] - lead * poly_[i], p_);
                }
                prod.resize(f_);
                mul_[a * q_ + b] = static_cast<FqElem>(pack(prod));
            }
        }
        for (int64_t a = 1; a < q_; ++a) {
            for (int64_t b = 1; b < q_; ++b)
                if (mul_[a * q_ + b] == 1) {
                    inv_[a] = static_cast<FqElem>(b);
                    break;
                }
        }
        for (int64_t v = 0; v < p_; ++v) {
            std::vector<int64_t> c(f_, 0);
            c[0] = v;
            scalar_[v] = static_cast<FqElem>(pack(c));
        }
    }

    int64_t p_;
    int f_;
    int64_t q_;
    std::vector<int64_t> poly_;
    std::vector<FqElem> add_, mul_, neg_, inv_, scalar_;
};

using ResidueFieldPtr = std::shared_ptr<const ResidueField>;

// Default defining polynomials for p^f <= 64 (Conway polynomials, low
// coefficient first; X itself for f = 1). Verified irreducible at
// construction anyway; users may override.
inline std::vector<int64_t> default_defining_poly(int64_t p, int f) {
    if (f == 1) return {0, 1};
    static const std::map<std::pair<int64_t, int>, std::vector<int64_t>> table = {
        {{2, 2}, {1, 1, 1}},          {{2, 3}, {1, 1, 0, 1}},
        {{2, 4}, {1, 1, 0, 0, 1}},    {{2, 5}, {1, 0, 1, 0, 0, 1}},
        {{2, 6}, {1, 1, 0, 1, 1, 0, 1}},
        {{3, 2}, {2, 2, 1}},          {{3, 3}, {1, 2, 0, 1}},
        {{5, 2}, {2, 4, 1}},          {{7, 2}, {3, 6, 1}},
    };
    auto it = table.find({p, f});
    if (it == table.end())
        throw FieldError("no default defining polynomial for p^f = " + std::to_string(p) + "^" +
                         std::to_string(f));
    return it->second;
}

inline ResidueFieldPtr make_residue_field(int64_t p, int f) {
    return std::make_shared<ResidueField>(p, f, default_defining_poly(p, f));
}

inline ResidueFieldPtr make_residue_field(int64_t p, int f, std::vector<int64_t> poly) {
    return std::make_shared<ResidueField>(p, f, std::move(poly));
}

}  // namespace closefields
