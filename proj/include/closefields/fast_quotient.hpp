#pragma once

#include "closefields/local_field.hpp"

namespace closefields {

// Allocation-free arithmetic in O/pi^P for mixed-characteristic fields with
// prime residue field (f = 1), used by the pointwise Witt kernels where the
// generic TruncElem path is too slow. Elements are slot arrays
// sum_{j < min(e,P)} c_j x^j with c_j mod p^{ceil((P-j)/e)}. Division by pi
// leaves the result exact modulo pi^{P-1} with unspecified digits above; the
// callers only ever read digits well below that.
class FastQuotient {
  public:
    static constexpr int kMaxSlots = 8;
    using Elem = std::array<int64_t, kMaxSlots>;

    FastQuotient(const FieldDescPtr& F, int P) : F_(F), P_(P) {
        if (F->f() != 1 || !F->mixed()) throw Error("FastQuotient needs a mixed field with f = 1");
        p_ = F->p();
        e_ = F->e();
        if (e_ > kMaxSlots) throw BudgetError("FastQuotient: ramification index too large");
        s_ = std::min(e_, P_);
        for (int j = 0; j < s_; ++j) {
            Mj_[j] = detail::ceil_div(P_ - j, e_);
            pMj_[j] = detail::pow_ll(p_, Mj_[j]);
        }
        M0_ = Mj_[0];
        pM0_ = pMj_[0];
        WRing w(F->rf(), M0_ + 1);
        for (int i = 0; i < e_; ++i) barr_[i] = F->bcoeff_at(i, w)[0] % pM0_;
        // B(x) = b_{e-1} x^{e-1} + ... + b_0 is a unit; Newton-invert it
        Elem B = zero();
        for (int i = 0; i < s_; ++i) B[i] = detail::mod_reduce(barr_[i], pMj_[i]);
        binv_ = invert_unit(B);
    }

    int64_t p() const { return p_; }
    int e() const { return e_; }
    int precision() const { return P_; }

    Elem zero() const { return Elem{}; }
    Elem one() const {
        Elem z{};
        z[0] = 1 % pM0_;
        return z;
    }
    Elem from_int(int64_t v) const {
        Elem z{};
        z[0] = detail::mod_reduce(v, pM0_);
        canonicalize(z);
        return z;
    }
    Elem pi() const {
        if (s_ > 1) {
            Elem z{};
            z[1] = 1;
            return z;
        }
        // e = 1: x = -a_0 = p * (-b_0)
        Elem z{};
        z[0] = detail::mod_reduce(-p_ * barr_[0], pM0_);
        return z;
    }

    Elem add(const Elem& a, const Elem& b) const {
        Elem r{};
        for (int j = 0; j < s_; ++j) r[j] = detail::mod_reduce(a[j] + b[j], pMj_[j]);
        return r;
    }
    Elem neg(const Elem& a) const {
        Elem r{};
        for (int j = 0; j < s_; ++j) r[j] = detail::mod_reduce(-a[j], pMj_[j]);
        return r;
    }
    Elem sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }

    Elem mul(const Elem& a, const Elem& b) const {
        int64_t prod[2 * kMaxSlots] = {0};
        for (int i = 0; i < s_; ++i) {
            if (!a[i]) continue;
            for (int j = 0; j < s_; ++j)
                prod[i + j] = detail::mod_reduce(prod[i + j] + detail::mul_mod(a[i], b[j], pM0_), pM0_);
        }
        for (int d = 2 * s_ - 2; d >= e_; --d) {
            int64_t lead = prod[d];
            if (!lead) continue;
            prod[d] = 0;
            // x^e = -p B(x)
            for (int i = 0; i < e_; ++i)
                prod[d - e_ + i] = detail::mod_reduce(
                    prod[d - e_ + i] - detail::mul_mod(lead, detail::mod_reduce(p_ * barr_[i], pM0_), pM0_),
                    pM0_);
        }
        Elem r{};
        for (int j = 0; j < s_; ++j) r[j] = prod[j];
        canonicalize(r);
        return r;
    }

    Elem pow(Elem a, int64_t k) const {
        Elem acc = one();
        while (k) {
            if (k & 1) acc = mul(acc, a);
            a = mul(a, a);
            k >>= 1;
        }
        return acc;
    }

    FqElem residue(const Elem& a) const { return static_cast<FqElem>(a[0] % p_); }

    int val(const Elem& a) const {
        int v = P_;
        for (int j = 0; j < s_; ++j) {
            int64_t c = a[j];
            if (!c) continue;
            int vc = 0;
            while (c % p_ == 0) {
                c /= p_;
                ++vc;
            }
            v = std::min(v, j + e_ * vc);
        }
        return v;
    }

    // Exact division by pi^k (val >= k required); the result is correct mod
    // pi^{P-k}, with unspecified digits above.
    Elem div_pi(const Elem& a, int k) const {
        Elem cur = a;
        for (int i = 0; i < k; ++i) cur = div_pi_once(cur);
        return cur;
    }

    // Teichmueller lift of c in F_p, memoized.
    Elem teichmuller(FqElem c) const {
        auto& memo = teich_;
        auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        Elem z = from_int(c);
        for (int iter = 0; iter < P_ * e_ + 4; ++iter) {
            Elem zq = pow(z, p_);
            if (zq == z) break;
            z = zq;
        }
        if (pow(z, p_) != z) throw Error("FastQuotient: Teichmuller iteration failed");
        memo.emplace(c, z);
        return z;
    }

    // digit expansion mod pi^N (N <= P)
    std::vector<FqElem> digits(const Elem& a, int N) const {
        std::vector<FqElem> out(N);
        Elem cur = a;
        for (int j = 0; j < N; ++j) {
            FqElem c = residue(cur);
            out[j] = c;
            cur = div_pi_once(sub(cur, teichmuller(c)));
        }
        return out;
    }

  private:
    void canonicalize(Elem& a) const {
        for (int j = 0; j < s_; ++j) a[j] = detail::mod_reduce(a[j], pMj_[j]);
    }

    Elem div_pi_once(const Elem& a) const {
        if (a[0] % p_ != 0) throw PrecisionError("FastQuotient: inexact division by pi");
        int64_t d0 = a[0] / p_;
        Elem shifted{};
        for (int j = 0; j + 1 < s_; ++j) shifted[j] = a[j + 1];
        // a / x = shifted - d0 x^{e-1} B^{-1}; when P <= e-1 the correction
        // has valuation >= e-1 >= P and vanishes at the result's precision
        if (e_ - 1 >= s_) return shifted;
        Elem mono{};
        mono[e_ - 1] = detail::mod_reduce(d0, pM0_);
        return sub(shifted, mul(mono, binv_));
    }

    Elem invert_unit(const Elem& a) const {
        if (a[0] % p_ == 0) throw Error("FastQuotient: inverting a non-unit");
        // inverse of a mod p by Fermat, then Newton
        int64_t r0 = detail::mod_reduce(a[0], p_);
        int64_t inv0 = 1;
        for (int64_t k = 0; k < p_ - 2; ++k) inv0 = detail::mod_reduce(inv0 * r0, p_);
        Elem z = from_int(inv0);
        Elem two = from_int(2);
        for (int iter = 0; iter < 2 * P_ + 4; ++iter) {
            Elem az = mul(a, z);
            if (az == one()) return z;
            z = mul(z, sub(two, az));
        }
        throw Error("FastQuotient: unit inversion did not converge");
    }

    FieldDescPtr F_;
    int P_, e_, s_, M0_;
    int64_t p_, pM0_;
    std::array<int, kMaxSlots> Mj_{};
    std::array<int64_t, kMaxSlots> pMj_{};
    std::array<int64_t, kMaxSlots> barr_{};
    Elem binv_{};
    mutable std::map<FqElem, Elem> teich_;
};

// Pointwise Witt operation over F_p through the ghost construction, on the
// fast kernel. Same contract as witt_pointwise.
enum class FastWittOp { Add, Mul };

inline std::vector<FqElem> witt_pointwise_fast(const FastQuotient& R, FastWittOp op,
                                               const std::vector<FqElem>& a,
                                               const std::vector<FqElem>& b) {
    int N = static_cast<int>(a.size());
    int64_t q = R.p();
    auto ghost = [&](const std::vector<FqElem>& v) {
        std::vector<FastQuotient::Elem> lifts(N), g(N);
        for (int j = 0; j < N; ++j) lifts[j] = R.teichmuller(v[j]);
        FastQuotient::Elem pik = R.one();
        // w_j = sum_k pi^k T_k^{q^{j-k}}; Teichmueller lifts are q-power
        // fixed points, so T_k^{q^{j-k}} = T_k exactly
        std::vector<FastQuotient::Elem> scaled(N);
        for (int k = 0; k < N; ++k) {
            scaled[k] = R.mul(pik, lifts[k]);
            pik = R.mul(pik, R.pi());
        }
        FastQuotient::Elem acc = R.zero();
        for (int j = 0; j < N; ++j) {
            acc = R.add(acc, scaled[j]);
            g[j] = acc;
        }
        return g;
    };
    auto ga = ghost(a), gb = ghost(b);
    std::vector<FastQuotient::Elem> gc(N);
    for (int j = 0; j < N; ++j)
        gc[j] = op == FastWittOp::Add ? R.add(ga[j], gb[j]) : R.mul(ga[j], gb[j]);
    // solve the ghost system; powers[k] tracks coords[k]^{q^{j-k}} as j grows
    std::vector<FastQuotient::Elem> coords(N), powers(N), pis(N);
    {
        FastQuotient::Elem pik = R.one();
        for (int k = 0; k < N; ++k) {
            pis[k] = pik;
            pik = R.mul(pik, R.pi());
        }
    }
    std::vector<FqElem> out(N);
    for (int j = 0; j < N; ++j) {
        FastQuotient::Elem acc = gc[j];
        for (int k = 0; k < j; ++k) {
            powers[k] = R.pow(powers[k], q);
            acc = R.sub(acc, R.mul(pis[k], powers[k]));
        }
        if (R.val(acc) < j) throw VerifyError("fast ghost solve: inexact division at stage " + std::to_string(j));
        coords[j] = R.div_pi(acc, j);
        powers[j] = coords[j];
        out[j] = R.residue(coords[j]);
    }
    return out;
}

// Exhaustive theta ring-isomorphism check run entirely on the fast kernel:
// theta(c) = sum [c_j] pi^j, Witt operations through the ghost construction,
// congruences asserted mod pi^N.
struct FastThetaReport {
    bool ok = true;
    bool bijective = true;
    bool additive = true;
    bool multiplicative = true;
    int64_t size = 0;
};

inline FastThetaReport theta_verify_fast(const FieldDescPtr& F, int N) {
    FastQuotient R(F, N + 2);
    int64_t q = F->q();
    FastThetaReport rep;
    std::vector<std::vector<FqElem>> all;
    {
        std::vector<FqElem> cur(N, 0);
        while (true) {
            all.push_back(cur);
            int j = 0;
            while (j < N && cur[j] == q - 1) cur[j++] = 0;
            if (j == N) break;
            cur[j]++;
        }
    }
    rep.size = static_cast<int64_t>(all.size());
    std::vector<FastQuotient::Elem> pis(N);
    {
        FastQuotient::Elem pik = R.one();
        for (int k = 0; k < N; ++k) {
            pis[k] = pik;
            pik = R.mul(pik, R.pi());
        }
    }
    auto theta_of = [&](const std::vector<FqElem>& c) {
        FastQuotient::Elem acc = R.zero();
        for (int j = 0; j < N; ++j) acc = R.add(acc, R.mul(pis[j], R.teichmuller(c[j])));
        return acc;
    };
    std::vector<FastQuotient::Elem> th;
    th.reserve(all.size());
    std::set<std::vector<FqElem>> images;
    for (const auto& c : all) {
        th.push_back(theta_of(c));
        auto dd = R.digits(th.back(), N);
        if (dd != c || !images.insert(dd).second) rep.bijective = false;
    }
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t k = i; k < all.size(); ++k) {
            auto s = witt_pointwise_fast(R, FastWittOp::Add, all[i], all[k]);
            if (R.val(R.sub(theta_of(s), R.add(th[i], th[k]))) < N) rep.additive = false;
            auto m = witt_pointwise_fast(R, FastWittOp::Mul, all[i], all[k]);
            if (R.val(R.sub(theta_of(m), R.mul(th[i], th[k]))) < N) rep.multiplicative = false;
        }
    rep.ok = rep.bijective && rep.additive && rep.multiplicative;
    return rep;
}

}  // namespace closefields
