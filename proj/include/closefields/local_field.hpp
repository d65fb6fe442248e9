#pragma once

#include <cassert>
#include <memory>
#include <optional>
#include <sstream>
#include <tuple>
#include <variant>
#include <vector>

#include "closefields/fq.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// W(F_q) at finite precision: (Z/p^M)[y]/(defining_poly), the unramified base.
// Elements are coefficient vectors of length f, coefficients in [0, p^M).
// ---------------------------------------------------------------------------

using WElem = std::vector<int64_t>;

class WRing {
  public:
    WRing(ResidueFieldPtr rf, int M) : rf_(std::move(rf)), M_(M) {
        if (M < 0) throw Error("negative precision");
        // fits int64 with headroom for __int128 products
        if (M > 0 && M * 64 / 62 > 0) {
            double bits = M * std::log2(static_cast<double>(rf_->p()));
            if (bits > 62) throw BudgetError("p^M exceeds 62-bit working range");
        }
        pM_ = detail::pow_ll(rf_->p(), M);
    }

    const ResidueFieldPtr& rf() const { return rf_; }
    int M() const { return M_; }
    int64_t pM() const { return pM_; }

    WElem zero() const { return WElem(rf_->f(), 0); }
    WElem one() const {
        WElem w(rf_->f(), 0);
        if (M_ > 0) w[0] = 1 % pM_;
        return w;
    }
    WElem from_int(int64_t v) const {
        WElem w(rf_->f(), 0);
        if (M_ > 0) w[0] = detail::mod_reduce(v, pM_);
        return w;
    }
    // Integer y-polynomial (any degree), reduced mod (defining_poly, p^M).
    WElem from_int_poly(const std::vector<int64_t>& c) const {
        std::vector<int64_t> t(c);
        reduce_poly(t);
        t.resize(rf_->f(), 0);
        if (M_ == 0) std::fill(t.begin(), t.end(), 0);
        return t;
    }
    WElem from_fq(FqElem a) const {  // naive lift, digits 0..p-1
        auto c = rf_->coeffs(a);
        return from_int_poly(c);
    }

    WElem add(const WElem& a, const WElem& b) const {
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) r[i] = detail::mod_reduce(a[i] + b[i], pM_);
        return r;
    }
    WElem sub(const WElem& a, const WElem& b) const {
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) r[i] = detail::mod_reduce(a[i] - b[i], pM_);
        return r;
    }
    WElem neg(const WElem& a) const {
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) r[i] = detail::mod_reduce(-a[i], pM_);
        return r;
    }
    WElem mul(const WElem& a, const WElem& b) const {
        int f = rf_->f();
        std::vector<int64_t> prod(2 * f - 1, 0);
        for (int i = 0; i < f; ++i) {
            if (a[i] == 0) continue;
            for (int j = 0; j < f; ++j)
                prod[i + j] = detail::mod_reduce(prod[i + j] + detail::mul_mod(a[i], b[j], pM_), pM_);
        }
        reduce_poly(prod);
        prod.resize(f, 0);
        return prod;
    }
    WElem scalar_mul(int64_t s, const WElem& a) const {
        s = detail::mod_reduce(s, pM_);
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) r[i] = detail::mul_mod(s, a[i], pM_);
        return r;
    }
    bool is_zero(const WElem& a) const {
        for (auto c : a)
            if (c != 0) return false;
        return true;
    }
    // p-adic valuation within precision M; returns M when a == 0.
    int valp(const WElem& a) const {
        int64_t p = rf_->p();
        int v = M_;
        for (auto c : a) {
            if (c == 0) continue;
            int vc = 0;
            int64_t x = c;
            while (x % p == 0) {
                x /= p;
                ++vc;
            }
            v = std::min(v, vc);
        }
        return v;
    }
    // Exact division by p^k; caller must know valp >= k.
    WElem div_p(const WElem& a, int k) const {
        int64_t pk = detail::pow_ll(rf_->p(), k);
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) {
            if (a[i] % pk != 0) throw PrecisionError("inexact division by p^k in W(F_q)");
            r[i] = a[i] / pk;
        }
        return r;
    }
    WElem reduce_to(const WElem& a, int M2) const {
        int64_t pM2 = detail::pow_ll(rf_->p(), M2);
        WElem r(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) r[i] = a[i] % pM2;
        return r;
    }
    FqElem residue(const WElem& a) const {
        std::vector<int64_t> c(rf_->f());
        for (int i = 0; i < rf_->f(); ++i) c[i] = a[i] % rf_->p();
        return rf_->from_coeffs(c);
    }
    // Teichmueller lift of c in F_q: the fixed point of x -> x^q above c.
    WElem teichmuller(FqElem c) const {
        WElem z = from_fq(c);
        for (int it = 0; it < M_ + 2; ++it) {
            WElem zq = pow_q(z);
            if (zq == z) return z;
            z = zq;
        }
        WElem zq = pow_q(z);
        if (zq != z) throw Error("Teichmuller iteration failed to stabilize in W(F_q)");
        return z;
    }
    WElem pow_q(const WElem& a) const {
        WElem acc = one(), base = a;
        int64_t e = rf_->q();
        while (e) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }

  private:
    void reduce_poly(std::vector<int64_t>& t) const {
        int f = rf_->f();
        const auto& lam = rf_->defining_poly();
        for (int i = 0; i < static_cast<int>(t.size()); ++i) t[i] = detail::mod_reduce(t[i], pM_);
        for (int d = static_cast<int>(t.size()) - 1; d >= f; --d) {
            int64_t lead = t[d];
            if (lead == 0) continue;
            t[d] = 0;
            for (int i = 0; i < f; ++i)
                t[d - f + i] = detail::mod_reduce(t[d - f + i] - detail::mul_mod(lead, lam[i], pM_), pM_);
        }
    }

    ResidueFieldPtr rf_;
    int M_;
    int64_t pM_;
};

// ---------------------------------------------------------------------------
// Field descriptors
// ---------------------------------------------------------------------------

// An Eisenstein coefficient is an exact element of W(F_q), given either as an
// integer, an integer polynomial in y, or a finite Teichmueller digit list
// (c_0, c_1, ...) meaning sum [c_j] p^j. All three evaluate exactly at any
// precision.
struct EisDigits {
    std::vector<FqElem> digits;
};
using EisCoeff = std::variant<int64_t, std::vector<int64_t>, EisDigits>;

enum class FieldKind { Mixed, Laurent };

class FieldDescImpl;
using FieldDescPtr = std::shared_ptr<const FieldDescImpl>;

class FieldDescImpl {
  public:
    // Mixed characteristic: O = W(F_q)[x]/(eisenstein), pi = x.
    FieldDescImpl(ResidueFieldPtr rf, std::vector<EisCoeff> eisenstein)
        : kind_(FieldKind::Mixed), rf_(std::move(rf)), eis_(std::move(eisenstein)) {
        if (eis_.size() < 2) throw FieldError("eisenstein polynomial must have degree >= 1");
        e_ = static_cast<int>(eis_.size()) - 1;
        WRing w2(rf_, 2);
        if (w2.valp(coeff_at(e_, w2)) != 0 || w2.residue(coeff_at(e_, w2)) != rf_->one())
            throw FieldError("eisenstein polynomial must be monic");
        for (int i = 0; i < e_; ++i) {
            if (w2.valp(coeff_at(i, w2)) < 1)
                throw FieldError("eisenstein criterion fails: coefficient of x^" + std::to_string(i) +
                                 " (valuation 0) is not divisible by p");
        }
        if (w2.valp(coeff_at(0, w2)) != 1)
            throw FieldError("eisenstein criterion fails: constant term has valuation != 1");
    }

    // Equal characteristic: O = F_q[[t]], pi = t.
    explicit FieldDescImpl(ResidueFieldPtr rf) : kind_(FieldKind::Laurent), rf_(std::move(rf)), e_(0) {}

    FieldKind kind() const { return kind_; }
    const ResidueFieldPtr& rf() const { return rf_; }
    int64_t p() const { return rf_->p(); }
    int64_t q() const { return rf_->q(); }
    int f() const { return rf_->f(); }
    bool mixed() const { return kind_ == FieldKind::Mixed; }
    int e() const {
        if (!mixed()) throw FieldError("e() on an equal-characteristic field");
        return e_;
    }
    // "e >= n" in the equal-characteristic case holds for every n.
    bool e_at_least(int n) const { return !mixed() || e_ >= n; }

    // a_i at precision M (i = 0..e).
    WElem coeff_at(int i, const WRing& w) const {
        const EisCoeff& c = eis_.at(i);
        if (std::holds_alternative<int64_t>(c)) return w.from_int(std::get<int64_t>(c));
        if (std::holds_alternative<std::vector<int64_t>>(c))
            return w.from_int_poly(std::get<std::vector<int64_t>>(c));
        const auto& d = std::get<EisDigits>(c).digits;
        WElem acc = w.zero();
        int64_t pk = 1;
        for (size_t j = 0; j < d.size() && static_cast<int>(j) < w.M(); ++j) {
            acc = w.add(acc, w.scalar_mul(pk, w.teichmuller(d[j])));
            pk *= w.rf()->p();
        }
        return acc;
    }
    // b_i = a_i / p, exact (i = 0..e-1).
    WElem bcoeff_at(int i, const WRing& w) const {
        WRing wup(rf_, w.M() + 1);
        return w.reduce_to(wup.div_p(coeff_at(i, wup), 1), w.M());
    }
    const std::vector<EisCoeff>& eisenstein() const { return eis_; }

    std::string describe() const {
        std::ostringstream os;
        if (mixed())
            os << "mixed(p=" << p() << ", f=" << f() << ", e=" << e_ << ")";
        else
            os << "laurent(q=" << q() << ")";
        return os.str();
    }

    bool same_as(const FieldDescImpl& o) const {
        if (kind_ != o.kind_ || !(*rf_ == *o.rf_)) return false;
        if (!mixed()) return true;
        if (e_ != o.e_) return false;
        WRing w(rf_, 8);
        for (int i = 0; i <= e_; ++i)
            if (coeff_at(i, w) != o.coeff_at(i, w)) return false;
        return true;
    }

  private:
    FieldKind kind_;
    ResidueFieldPtr rf_;
    std::vector<EisCoeff> eis_;
    int e_ = 0;
};

// Largest pi-adic precision whose W(F_q) words stay inside the 62-bit range.
inline int precision_cap(const FieldDescPtr& F) {
    int e = F->mixed() ? F->e() : 1;
    if (!F->mixed()) return 1 << 20;  // F_q coefficients never grow
    return static_cast<int>(e * 62.0 / std::log2(static_cast<double>(F->p()))) - e;
}

inline FieldDescPtr make_field(int64_t p, int f, std::vector<int64_t> defining_poly,
                               std::vector<EisCoeff> eisenstein) {
    auto rf = make_residue_field(p, f, std::move(defining_poly));
    return std::make_shared<FieldDescImpl>(rf, std::move(eisenstein));
}

inline FieldDescPtr make_laurent_field(int64_t p, int f, std::vector<int64_t> defining_poly) {
    auto rf = make_residue_field(p, f, std::move(defining_poly));
    return std::make_shared<FieldDescImpl>(rf);
}

inline FieldDescPtr make_laurent_field(ResidueFieldPtr rf) {
    return std::make_shared<FieldDescImpl>(std::move(rf));
}

// Convenience constructors for common test fields.
inline FieldDescPtr field_Qp(int64_t p) { return make_field(p, 1, {0, 1}, {EisCoeff(-p), EisCoeff(1)}); }
// Totally ramified of degree e over Q_p by x^e - p.
inline FieldDescPtr field_Qp_ramified(int64_t p, int e) {
    std::vector<EisCoeff> eis(e + 1, EisCoeff(int64_t(0)));
    eis[0] = EisCoeff(-p);
    eis[e] = EisCoeff(int64_t(1));
    return make_field(p, 1, {0, 1}, std::move(eis));
}
inline FieldDescPtr field_Fq_laurent(int64_t p, int f = 1) {
    return make_laurent_field(make_residue_field(p, f));
}

// ---------------------------------------------------------------------------
// TruncElem: an element of O/pi^N in canonical form.
//
// Mixed: sum_{j < min(e,N)} c_j x^j with c_j in W(F_q) canonically reduced
// mod p^{ceil((N-j)/e)}. Laurent: a polynomial in t of degree < N over F_q.
// Binary operations require equal field and equal N; there is no implicit
// precision coercion.
// ---------------------------------------------------------------------------

class TruncElem {
  public:
    TruncElem() : N_(0) {}

    static TruncElem zero(FieldDescPtr F, int N) { return TruncElem(std::move(F), N); }
    static TruncElem one(FieldDescPtr F, int N) { return from_integer(std::move(F), N, 1); }
    static TruncElem from_integer(FieldDescPtr F, int N, int64_t v) {
        TruncElem r(std::move(F), N);
        if (N == 0) return r;
        if (r.mixed()) {
            WRing w(r.field()->rf(), r.M0());
            r.mixed_slots()[0] = w.from_int(v);
            r.canonicalize();
        } else {
            r.laurent_coeffs()[0] = r.field()->rf()->from_int(v);
        }
        return r;
    }
    static TruncElem pi(FieldDescPtr F, int N) {
        TruncElem r(std::move(F), N);
        if (N <= 1) {
            return r;  // pi == 0 at precision <= 1
        }
        if (r.mixed()) {
            std::vector<WElem> poly(2, WRing(r.field()->rf(), r.M0()).zero());
            poly[1] = WRing(r.field()->rf(), r.M0()).one();
            r.set_from_xpoly(poly);
        } else {
            r.laurent_coeffs()[1] = r.field()->rf()->one();
        }
        return r;
    }
    // Naive (non-Teichmueller) lift of a residue element.
    static TruncElem lift_residue(FieldDescPtr F, int N, FqElem c) {
        TruncElem r(std::move(F), N);
        if (N == 0) return r;
        if (r.mixed()) {
            WRing w(r.field()->rf(), r.M0());
            r.mixed_slots()[0] = w.from_fq(c);
            r.canonicalize();
        } else {
            r.laurent_coeffs()[0] = c;
        }
        return r;
    }

    const FieldDescPtr& field() const { return F_; }
    int precision() const { return N_; }
    bool mixed() const { return F_->mixed(); }

    bool is_zero() const {
        if (mixed()) {
            for (const auto& s : std::get<0>(rep_))
                for (auto c : s)
                    if (c) return false;
            return true;
        }
        for (auto c : std::get<1>(rep_))
            if (c) return false;
        return true;
    }
    bool is_unit() const { return N_ > 0 && val() == 0; }

    // pi-adic valuation, in 0..N; returns N when the element is 0 in O/pi^N.
    int val() const {
        if (N_ == 0) return 0;
        if (!mixed()) {
            const auto& c = std::get<1>(rep_);
            for (int j = 0; j < N_; ++j)
                if (c[j]) return j;
            return N_;
        }
        const auto& slots = std::get<0>(rep_);
        int e = F_->e(), v = N_;
        WRing w(F_->rf(), M0());
        for (int j = 0; j < static_cast<int>(slots.size()); ++j) {
            if (w.is_zero(slots[j])) continue;
            v = std::min(v, j + e * w.valp(slots[j]));
        }
        return std::min(v, N_);
    }

    FqElem residue() const {
        if (N_ == 0) throw PrecisionError("residue of a precision-0 element");
        if (!mixed()) return std::get<1>(rep_)[0];
        WRing w(F_->rf(), M0());
        return w.residue(std::get<0>(rep_)[0]);
    }

    TruncElem operator+(const TruncElem& o) const {
        check_compat(o);
        TruncElem r(F_, N_);
        if (N_ == 0) return r;
        if (mixed()) {
            WRing w(F_->rf(), M0());
            auto& s = r.mixed_slots();
            const auto& a = std::get<0>(rep_);
            const auto& b = std::get<0>(o.rep_);
            for (size_t j = 0; j < s.size(); ++j) s[j] = w.add(a[j], b[j]);
            r.canonicalize();
        } else {
            const auto& rf = *F_->rf();
            auto& s = r.laurent_coeffs();
            const auto& a = std::get<1>(rep_);
            const auto& b = std::get<1>(o.rep_);
            for (int j = 0; j < N_; ++j) s[j] = rf.add(a[j], b[j]);
        }
        return r;
    }
    TruncElem operator-() const {
        TruncElem r(F_, N_);
        if (N_ == 0) return r;
        if (mixed()) {
            WRing w(F_->rf(), M0());
            auto& s = r.mixed_slots();
            const auto& a = std::get<0>(rep_);
            for (size_t j = 0; j < s.size(); ++j) s[j] = w.neg(a[j]);
            r.canonicalize();
        } else {
            const auto& rf = *F_->rf();
            auto& s = r.laurent_coeffs();
            const auto& a = std::get<1>(rep_);
            for (int j = 0; j < N_; ++j) s[j] = rf.neg(a[j]);
        }
        return r;
    }
    TruncElem operator-(const TruncElem& o) const { return *this + (-o); }

    TruncElem operator*(const TruncElem& o) const {
        check_compat(o);
        TruncElem r(F_, N_);
        if (N_ == 0) return r;
        if (mixed()) {
            WRing w(F_->rf(), M0());
            const auto& a = std::get<0>(rep_);
            const auto& b = std::get<0>(o.rep_);
            int s = static_cast<int>(a.size());
            std::vector<WElem> prod(2 * s - 1, w.zero());
            for (int i = 0; i < s; ++i) {
                if (w.is_zero(a[i])) continue;
                for (int j = 0; j < s; ++j) prod[i + j] = w.add(prod[i + j], w.mul(a[i], b[j]));
            }
            r.set_from_xpoly(prod);
        } else {
            const auto& rf = *F_->rf();
            const auto& a = std::get<1>(rep_);
            const auto& b = std::get<1>(o.rep_);
            auto& s = r.laurent_coeffs();
            for (int i = 0; i < N_; ++i) {
                if (!a[i]) continue;
                for (int j = 0; j + i < N_; ++j)
                    s[i + j] = rf.add(s[i + j], rf.mul(a[i], b[j]));
            }
        }
        return r;
    }

    TruncElem scalar(int64_t v) const { return *this * from_integer(F_, N_, v); }

    TruncElem pow(int64_t k) const {
        if (k < 0) throw Error("negative power of a TruncElem");
        TruncElem acc = one(F_, N_), base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    // Multiplicative inverse of a unit, by Newton iteration from the residue.
    TruncElem inv() const {
        if (!is_unit()) throw FieldError("inverting a non-unit in O/pi^N");
        const auto& rf = *F_->rf();
        TruncElem z = lift_residue(F_, N_, rf.inv(residue()));
        TruncElem two = from_integer(F_, N_, 2);
        int steps = 1;
        while ((1 << steps) < N_ * (mixed() ? 1 : 1) + 1) ++steps;
        for (int i = 0; i <= steps + 1; ++i) z = z * (two - *this * z);
        if (!((*this * z) == one(F_, N_))) throw Error("Newton inversion failed");
        return z;
    }

    // Digit-padded lift to a higher precision (one choice of lift; callers
    // use it where any lift works or garbage digits get truncated later).
    TruncElem lift(int N2) const {
        if (N2 <= N_) return reduce(N2);
        auto d = teichmuller_digits();
        d.resize(N2, 0);
        return from_digits(F_, d);
    }

    // Canonical surjection O/pi^N -> O/pi^{N'}.
    TruncElem reduce(int N2) const {
        if (N2 > N_) throw PrecisionError("reduce() cannot raise precision");
        if (N2 == N_) return *this;
        TruncElem r(F_, N2);
        if (N2 == 0) return r;
        if (mixed()) {
            const auto& a = std::get<0>(rep_);
            auto& s = r.mixed_slots();
            for (size_t j = 0; j < s.size(); ++j) s[j] = a[j];
            for (auto& w : s) w.resize(F_->f(), 0);
            r.canonicalize();
        } else {
            const auto& a = std::get<1>(rep_);
            auto& s = r.laurent_coeffs();
            for (int j = 0; j < N2; ++j) s[j] = a[j];
        }
        return r;
    }

    // Exact division by pi^k. Requires val >= k; lowers precision by k.
    TruncElem div_pi(int k) const {
        if (k == 0) return *this;
        if (k < 0) throw Error("div_pi with negative k");
        if (val() < k) throw PrecisionError("inexact division by pi^" + std::to_string(k));
        TruncElem cur = *this;
        for (int i = 0; i < k; ++i) cur = cur.div_pi_once();
        return cur;
    }

    // pi^k * (any lift of this) at precision N + k; exact because the lift
    // ambiguity lands in pi^{N+k}.
    TruncElem mul_pi_raise(int k) const {
        if (k == 0) return *this;
        TruncElem r(F_, N_ + k);
        if (!mixed()) {
            const auto& a = std::get<1>(rep_);
            auto& s = r.laurent_coeffs();
            for (int j = 0; j < N_; ++j) s[j + k] = a[j];
            return r;
        }
        WRing wlo(F_->rf(), M0());
        WRing whi(F_->rf(), r.M0());
        const auto& a = std::get<0>(rep_);
        std::vector<WElem> poly(a.size() + k, whi.zero());
        for (size_t j = 0; j < a.size(); ++j) {
            WElem lifted = a[j];
            lifted.resize(F_->f(), 0);
            poly[j + k] = lifted;  // canonical digits reused as the lift
        }
        r.set_from_xpoly(poly);
        return r;
    }

    // Teichmueller digit expansion: a = sum_{j<N} [c_j] pi^j. Memoized for
    // small rings; the expansion is the workhorse of canonical forms.
    std::vector<FqElem> teichmuller_digits() const {
        if (!mixed()) return std::get<1>(rep_);
        bool memoize = N_ * std::log2(static_cast<double>(F_->q())) <= 14;
        thread_local std::map<std::pair<const void*, std::string>, std::vector<FqElem>> memo;
        std::pair<const void*, std::string> key;
        if (memoize) {
            key = {static_cast<const void*>(F_.get()), rep_bytes()};
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
        }
        std::vector<FqElem> digits(N_);
        TruncElem cur = *this;
        for (int j = 0; j < N_; ++j) {
            FqElem c = cur.residue();
            digits[j] = c;
            cur = (cur - teichmuller(F_, cur.precision(), c)).div_pi(1);
        }
        if (memoize) memo.emplace(std::move(key), digits);
        return digits;
    }

    static TruncElem from_digits(FieldDescPtr F, const std::vector<FqElem>& digits) {
        int N = static_cast<int>(digits.size());
        TruncElem acc = zero(F, N);
        if (N == 0) return acc;
        if (!F->mixed()) {
            TruncElem r(F, N);
            r.laurent_coeffs() = digits;
            return r;
        }
        TruncElem pw = one(F, N);
        TruncElem p = pi(F, N);
        for (int j = 0; j < N; ++j) {
            acc = acc + teichmuller(F, N, digits[j]) * pw;
            pw = pw * p;
        }
        return acc;
    }

    // The multiplicative section of O/pi^N -> F_q: the unique lift fixed by
    // x -> x^q, found by q-power iteration (memoized; it is hot in digit
    // expansions and canonical-form computations).
    static TruncElem teichmuller(const FieldDescPtr& F, int N, FqElem c) {
        if (!F->mixed() || N <= 1) return lift_residue(F, N, c);
        thread_local std::map<std::tuple<const void*, int, FqElem>, TruncElem> memo;
        auto key = std::make_tuple(static_cast<const void*>(F.get()), N, c);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        TruncElem z = lift_residue(F, N, c);
        int cap = N * F->e() * F->f() + 4;
        for (int iter = 0; iter < cap; ++iter) {
            TruncElem zq = z.pow(F->q());
            if (zq == z) {
                memo.emplace(key, z);
                return z;
            }
            z = zq;
        }
        throw Error("Teichmuller iteration failed to stabilize");
    }

    bool operator==(const TruncElem& o) const {
        return N_ == o.N_ && F_->same_as(*o.F_) && rep_ == o.rep_;
    }
    bool operator!=(const TruncElem& o) const { return !(*this == o); }

    // Deterministic total order via digit expansions (lexicographic, low
    // digit first), used for canonical least representatives.
    int compare(const TruncElem& o) const {
        if (N_ != o.N_) return N_ < o.N_ ? -1 : 1;
        auto da = teichmuller_digits();
        auto db = o.teichmuller_digits();
        if (da < db) return -1;
        if (db < da) return 1;
        return 0;
    }

    // Raw canonical bytes, for hashing/dedup (not cross-field portable).
    std::string rep_bytes() const {
        std::ostringstream os;
        os << N_ << ':';
        if (mixed()) {
            for (const auto& s : std::get<0>(rep_)) {
                for (auto c : s) os << c << ',';
                os << ';';
            }
        } else {
            for (auto c : std::get<1>(rep_)) os << c << ',';
        }
        return os.str();
    }

    // Enumerate all of O/pi^N (via digit tuples). Desk scale only.
    static std::vector<TruncElem> enumerate(FieldDescPtr F, int N) {
        int64_t q = F->q();
        double total = std::pow(static_cast<double>(q), N);
        if (total > (1 << 20)) throw BudgetError("enumeration of O/pi^N too large");
        std::vector<TruncElem> out;
        std::vector<FqElem> digits(N, 0);
        while (true) {
            out.push_back(from_digits(F, digits));
            int j = 0;
            while (j < N && digits[j] == q - 1) digits[j++] = 0;
            if (j == N) break;
            digits[j]++;
        }
        return out;
    }

  private:
    TruncElem(FieldDescPtr F, int N) : F_(std::move(F)), N_(N) {
        if (N < 0) throw Error("negative precision");
        if (F_->mixed()) {
            int s = std::min(F_->e(), N_);
            rep_.emplace<0>(std::vector<WElem>(s, WElem(F_->f(), 0)));
        } else {
            rep_.emplace<1>(std::vector<FqElem>(N_, 0));
        }
    }

    int M0() const { return detail::ceil_div(N_, F_->e()); }
    int slot_modexp(int j) const { return detail::ceil_div(N_ - j, F_->e()); }

    std::vector<WElem>& mixed_slots() { return std::get<0>(rep_); }
    std::vector<FqElem>& laurent_coeffs() { return std::get<1>(rep_); }

    void check_compat(const TruncElem& o) const {
        if (N_ != o.N_)
            throw PrecisionError("mixed precisions: " + std::to_string(N_) + " vs " +
                                 std::to_string(o.N_));
        if (F_.get() != o.F_.get() && !F_->same_as(*o.F_))
            throw FieldError("operands from different fields");
    }

    // Reduce an x-polynomial (coefficients in W at this element's M0) into
    // canonical slot form, applying x^e = -(a_{e-1}x^{e-1}+...+a_0) then x^N = 0.
    void set_from_xpoly(std::vector<WElem> poly) {
        WRing w(F_->rf(), M0());
        int e = F_->e();
        thread_local std::map<std::pair<const void*, int>, std::vector<WElem>> eis_memo;
        auto ekey = std::make_pair(static_cast<const void*>(F_.get()), M0());
        auto eit = eis_memo.find(ekey);
        if (eit == eis_memo.end()) {
            std::vector<WElem> fresh(e);
            for (int i = 0; i < e; ++i) fresh[i] = F_->coeff_at(i, w);
            eit = eis_memo.emplace(ekey, std::move(fresh)).first;
        }
        const std::vector<WElem>& eis = eit->second;
        for (int d = static_cast<int>(poly.size()) - 1; d >= e; --d) {
            WElem lead = poly[d];
            if (w.is_zero(lead)) continue;
            poly[d] = w.zero();
            for (int i = 0; i < e; ++i)
                poly[d - e + i] = w.sub(poly[d - e + i], w.mul(lead, eis[i]));
        }
        auto& slots = mixed_slots();
        for (size_t j = 0; j < slots.size(); ++j)
            slots[j] = j < poly.size() ? poly[j] : w.zero();
        canonicalize();
    }

    void canonicalize() {
        if (!mixed() || N_ == 0) return;
        WRing w(F_->rf(), M0());
        auto& slots = mixed_slots();
        for (size_t j = 0; j < slots.size(); ++j)
            slots[j] = w.reduce_to(slots[j], slot_modexp(static_cast<int>(j)));
    }

    // One exact division by pi = x. Uses p = -x^e / B(x) with
    // B = (eisenstein - x^e)/p, a unit since b_0 is.
    TruncElem div_pi_once() const {
        TruncElem r(F_, N_ - 1);
        if (N_ - 1 == 0) return r;
        if (!mixed()) {
            const auto& a = std::get<1>(rep_);
            auto& s = r.laurent_coeffs();
            for (int j = 0; j + 1 < N_; ++j) s[j] = a[j + 1];
            return r;
        }
        int e = F_->e();
        WRing w(F_->rf(), M0());
        const auto& a = std::get<0>(rep_);
        // c_0 = p * d0 exactly (val >= 1 guarantees it)
        WElem d0 = WRing(F_->rf(), M0()).div_p(a[0], 1);
        // elem / x = sum_{j>=1} c_j x^{j-1} - d0 * x^{e-1} * B^{-1}
        TruncElem shifted(F_, N_ - 1);
        {
            std::vector<WElem> poly(std::max<size_t>(a.size() - 1, 1), WRing(F_->rf(), shifted.M0()).zero());
            for (size_t j = 1; j < a.size(); ++j) {
                WElem c = a[j];
                c.resize(F_->f(), 0);
                poly[j - 1] = c;
            }
            shifted.set_from_xpoly(poly);
        }
        TruncElem corr(F_, N_ - 1);
        {
            std::vector<WElem> poly(e, WRing(F_->rf(), corr.M0()).zero());
            WElem d0r = d0;
            d0r.resize(F_->f(), 0);
            poly[e - 1] = d0r;
            corr.set_from_xpoly(poly);
        }
        // B^{-1} is hot (one use per pi-division); memoized per (field, N)
        thread_local std::map<std::pair<const void*, int>, TruncElem> binv_memo;
        auto key = std::make_pair(static_cast<const void*>(F_.get()), N_ - 1);
        auto it = binv_memo.find(key);
        if (it == binv_memo.end()) it = binv_memo.emplace(key, b_poly(N_ - 1).inv()).first;
        return shifted - corr * it->second;
    }

    // B(x) = b_{e-1} x^{e-1} + ... + b_0 as a TruncElem at precision N2.
    TruncElem b_poly(int N2) const {
        TruncElem b(F_, N2);
        int e = F_->e();
        WRing w(F_->rf(), b.M0());
        std::vector<WElem> poly(e, w.zero());
        for (int i = 0; i < e; ++i) poly[i] = F_->bcoeff_at(i, w);
        b.set_from_xpoly(poly);
        return b;
    }

    FieldDescPtr F_;
    int N_;
    // Mixed: slots; Laurent: t-coefficients.
    std::variant<std::vector<WElem>, std::vector<FqElem>> rep_;
};

// ---------------------------------------------------------------------------
// Close fields: the ring isomorphism O/pi^n ~ F_q[t]/t^n when e >= n.
//
// With e >= n we have p = 0 in O/pi^n, so O/pi^n is an F_q-algebra and the
// Teichmueller section is additive as well as multiplicative; the digit map
// sum [c_j] pi^j -> sum c_j t^j is then a ring isomorphism sending pi to t.
// ---------------------------------------------------------------------------

struct IsoCheckReport {
    bool ok = true;
    int64_t pairs_checked = 0;
    bool exhaustive = true;
    std::string message;
};

class CloseFieldIso {
  public:
    CloseFieldIso(FieldDescPtr E, int n)
        : E_(std::move(E)), n_(n) {
        if (!E_->mixed()) throw FieldError("close_field_iso expects a mixed-characteristic field");
        if (n < 1) throw FieldError("close_field_iso needs n >= 1");
        if (!E_->e_at_least(n))
            throw FieldError("close_field_iso refused: e = " + std::to_string(E_->e()) +
                             " < n = " + std::to_string(n) + " (hypothesis e >= n fails)");
        Eprime_ = make_laurent_field(E_->rf());
    }

    const FieldDescPtr& mixed_side() const { return E_; }
    const FieldDescPtr& laurent_side() const { return Eprime_; }
    int level() const { return n_; }

    TruncElem forward(const TruncElem& a) const {
        if (a.field().get() != E_.get() && !a.field()->same_as(*E_))
            throw FieldError("forward: element not from the mixed side");
        if (a.precision() != n_) throw PrecisionError("forward: element not at level n");
        return TruncElem::from_digits(Eprime_, a.teichmuller_digits());
    }
    TruncElem backward(const TruncElem& b) const {
        if (b.precision() != n_) throw PrecisionError("backward: element not at level n");
        return TruncElem::from_digits(E_, b.teichmuller_digits());
    }

    // Ring-homomorphism check: all pairs when |O/pi^n| <= limit, sampled
    // digit tuples otherwise. Also checks pi -> t and [c] -> c.
    IsoCheckReport verify(int64_t exhaustive_limit = 512) const {
        IsoCheckReport rep;
        double size = std::pow(static_cast<double>(E_->q()), n_);
        std::vector<TruncElem> elems;
        if (size <= static_cast<double>(exhaustive_limit)) {
            elems = TruncElem::enumerate(E_, n_);
        } else {
            rep.exhaustive = false;
            // deterministic sample: digit tuples from a fixed LCG
            uint64_t state = 0x9e3779b97f4a7c15ull;
            for (int s = 0; s < 64; ++s) {
                std::vector<FqElem> d(n_);
                for (int j = 0; j < n_; ++j) {
                    state = state * 6364136223846793005ull + 1442695040888963407ull;
                    d[j] = static_cast<FqElem>((state >> 33) % E_->q());
                }
                elems.push_back(TruncElem::from_digits(E_, d));
            }
        }
        for (const auto& a : elems) {
            if (!(backward(forward(a)) == a)) {
                rep.ok = false;
                rep.message = "digit round-trip failed";
                return rep;
            }
            for (const auto& b : elems) {
                if (!(forward(a + b) == forward(a) + forward(b))) {
                    rep.ok = false;
                    rep.message = "additivity failed";
                    return rep;
                }
                if (!(forward(a * b) == forward(a) * forward(b))) {
                    rep.ok = false;
                    rep.message = "multiplicativity failed";
                    return rep;
                }
                ++rep.pairs_checked;
            }
        }
        if (!(forward(TruncElem::pi(E_, n_)) == TruncElem::pi(Eprime_, n_))) {
            rep.ok = false;
            rep.message = "pi does not map to t";
            return rep;
        }
        for (int64_t c = 0; c < E_->q(); ++c) {
            auto tc = TruncElem::teichmuller(E_, n_, static_cast<FqElem>(c));
            if (!(forward(tc) == TruncElem::lift_residue(Eprime_, n_, static_cast<FqElem>(c)))) {
                rep.ok = false;
                rep.message = "Teichmueller constants not preserved";
                return rep;
            }
        }
        return rep;
    }

  private:
    FieldDescPtr E_;
    FieldDescPtr Eprime_;
    int n_;
};

// ---------------------------------------------------------------------------
// Spreading a totally ramified extension of F_q((t)) out to E, per the
// explicit Eisenstein lift T^r + pi(a_{r-1}T^{r-1} + ... + a_0) with a_j the
// digit-wise lift of a_{j,infinity} through the close-field isomorphism.
// The result is a relative descriptor over E: its reduction mod pi^n
// reproduces the input mod t^n.
// ---------------------------------------------------------------------------

struct SpreadExtension {
    FieldDescPtr base;                 // E
    int rel_degree = 0;                // r
    int level = 0;                     // n
    std::vector<TruncElem> lifted;     // a_0..a_{r-1} over O_E/pi^n
    std::vector<std::vector<FqElem>> digitdata;  // the exact digit lists

    // Reduce the relative Eisenstein data back to F_q[t]/t^n coefficients.
    std::vector<TruncElem> reduce_back(const FieldDescPtr& laurent) const {
        std::vector<TruncElem> out;
        out.reserve(lifted.size());
        for (const auto& a : lifted) out.push_back(TruncElem::from_digits(laurent, a.teichmuller_digits()));
        return out;
    }
};

inline SpreadExtension spread_extension(const std::vector<TruncElem>& a_inf, FieldDescPtr E, int n) {
    if (!E->e_at_least(n))
        throw FieldError("spread_extension refused: e < n");
    if (a_inf.empty()) throw FieldError("spread_extension: empty coefficient list");
    for (const auto& a : a_inf) {
        if (a.field()->mixed()) throw FieldError("spread_extension expects equal-characteristic input");
        if (a.precision() != n) throw PrecisionError("spread_extension: input coefficients must be mod t^n");
    }
    if (!a_inf[0].is_unit())
        throw FieldError("spread_extension: a_0 must be a unit (else T^r + t(...) is not Eisenstein)");
    CloseFieldIso iso(E, n);
    SpreadExtension out;
    out.base = std::move(E);
    out.rel_degree = static_cast<int>(a_inf.size());
    out.level = n;
    for (const auto& a : a_inf) {
        auto digits = a.teichmuller_digits();
        out.digitdata.push_back(digits);
        out.lifted.push_back(iso.backward(a));
    }
    return out;
}

}  // namespace closefields
