#pragma once

#include "closefields/series.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// Lubin-Tate formal groups at joint (pi-adic, degree) precision.
//
// Two sources for the formal-group data:
//   (a) the canonical pair: log = sum X^{q^r}/pi^r, exp its reversion,
//       f_pi = exp(pi log X), group law F = exp(log X + log Y);
//   (b) a classical Lubin-Tate polynomial (default pi X + X^q) with its log
//       recovered as lim f^{(k)}/pi^k - an independent cross-check oracle.
// ---------------------------------------------------------------------------

struct LtContext {
    FieldDescPtr F;
    SeriesContext sctx;

    static LtContext make(FieldDescPtr F, int D, int M, int floor_hint = -1, int pwork_hint = -1) {
        LtContext c;
        c.sctx = SeriesContext::make(F, D, M, floor_hint, pwork_hint);
        c.F = std::move(F);
        return c;
    }
    int64_t q() const { return F->q(); }
};

// log = sum_{q^r <= D} X^{q^r} / pi^r
inline TruncSeries lt_log(const LtContext& lt) {
    TruncSeries s = TruncSeries::zero(lt.sctx, 1);
    int64_t qr = 1;
    int r = 0;
    while (qr <= lt.sctx.D) {
        s.add_term(TruncSeries::Key{static_cast<uint16_t>(qr), 0, 0},
                   ScaledCoeff::pi_shifted(lt.sctx, 1, r));
        qr *= lt.q();
        ++r;
    }
    return s;
}

// Compositional inverse of a logarithm (linear coefficient 1); checks the
// E<T/pi>-style coefficient bound val(e_k) >= -(k-1)/(q-1) a posteriori.
inline TruncSeries lt_exp(const TruncSeries& log) {
    TruncSeries e = log.reversion();
    int64_t q = e.ctx().F->q();
    for (const auto& [k, c] : e.terms()) {
        int deg = TruncSeries::total_degree(k);
        if (deg < 1) continue;
        int bound = -static_cast<int>((deg - 1) / (q - 1));
        if (!c.rep_zero() && c.val_lb() < bound)
            throw VerifyError("exp coefficient at degree " + std::to_string(deg) +
                              " violates the integrality bound");
    }
    return e;
}

// [a](X) = exp(a log X) for a in O (exact at Pwork); integrality asserted.
inline TruncSeries lt_mult(const LtContext& lt, const TruncSeries& exp_s, const TruncSeries& log_s,
                           const TruncElem& a) {
    if (a.precision() < lt.sctx.Pwork) throw PrecisionError("lt_mult wants the scalar at full working precision");
    TruncSeries al = log_s.scale(ScaledCoeff::exact_elem(a.reduce(lt.sctx.Pwork)));
    TruncSeries m = exp_s.substitute({al});
    m.assert_integral("[a](X)");
    m.enforce_floor("[a](X)");
    return m;
}

inline TruncSeries lt_mult_int(const LtContext& lt, const TruncSeries& exp_s, const TruncSeries& log_s,
                               int64_t a) {
    return lt_mult(lt, exp_s, log_s, TruncElem::from_integer(lt.F, lt.sctx.Pwork, a));
}

// f_pi = [pi]; satisfies f_pi = pi X mod deg 2 and f_pi = X^q mod pi
// (both asserted).
inline TruncSeries lt_f_pi(const LtContext& lt, const TruncSeries& exp_s, const TruncSeries& log_s) {
    TruncSeries f = lt_mult(lt, exp_s, log_s, TruncElem::pi(lt.F, lt.sctx.Pwork));
    // linear term pi
    auto lin = coeff_sub(f.coeff1(1), ScaledCoeff::exact_elem(TruncElem::pi(lt.F, lt.sctx.Pwork)));
    if (!lin.zero_mod(lt.sctx.M)) throw VerifyError("f_pi: linear coefficient is not pi");
    // f_pi = X^q mod pi
    for (const auto& [k, c] : f.terms()) {
        int deg = k[0];
        if (deg == lt.q()) {
            if (!coeff_sub(c, ScaledCoeff::exact(lt.sctx, 1)).zero_mod(1))
                throw VerifyError("f_pi: X^q coefficient is not 1 mod pi");
        } else if (!c.zero_mod(1)) {
            throw VerifyError("f_pi: coefficient at degree " + std::to_string(deg) + " not 0 mod pi");
        }
    }
    return f;
}

// Embed a 1-variable series into variable v of an nvars-variable space.
inline TruncSeries embed_var(const TruncSeries& s, int nvars, int v) {
    TruncSeries r(s.ctx(), nvars);
    for (const auto& [k, c] : s.terms()) {
        TruncSeries::Key key{0, 0, 0};
        key.at(v) = k[0];
        r.add_term(key, c);
    }
    return r;
}

// F(X, Y) = exp(log X + log Y); unit law asserted, commutativity /
// associativity are left to callers (they are verification outputs).
inline TruncSeries group_law(const LtContext& lt, const TruncSeries& exp_s, const TruncSeries& log_s) {
    TruncSeries lx = embed_var(log_s, 2, 0), ly = embed_var(log_s, 2, 1);
    TruncSeries F = exp_s.substitute({lx + ly});
    F.assert_integral("F(X,Y)");
    F.enforce_floor("F(X,Y)");
    return F;
}

// Substitute 0 for variable v (2- or 3-variable series).
inline TruncSeries set_var_zero(const TruncSeries& s, int v) {
    TruncSeries r(s.ctx(), s.nvars());
    for (const auto& [k, c] : s.terms())
        if (k[v] == 0) r.add_term(k, c);
    return r;
}

inline TruncSeries swap_vars(const TruncSeries& s, int v1, int v2) {
    TruncSeries r(s.ctx(), s.nvars());
    for (const auto& [k, c] : s.terms()) {
        TruncSeries::Key key = k;
        std::swap(key.at(v1), key.at(v2));
        r.add_term(key, c);
    }
    return r;
}

// log of a classical Lubin-Tate series f, as the coefficientwise limit of
// f^{(k)}/pi^k; iterates to stabilization mod pi^target. Each iterate is the
// exact composite f^{(k)} divided once by pi^k, so knowledge at step k is
// Pwork - k; the caller's context must leave room for that.
inline TruncSeries lt_log_from_series(const LtContext& lt, const TruncSeries& f, int target) {
    TruncSeries comp = TruncSeries::variable(lt.sctx, 1, 0);
    TruncSeries prev = comp;
    for (int k = 1; k < 120; ++k) {
        comp = comp.substitute({f});  // f^{(k)}, exact integral arithmetic
        TruncSeries L = comp.scale(ScaledCoeff::pi_shifted(lt.sctx, 1, k));
        if (k > 1 && L.equal_mod(prev, target)) return L;
        prev = L;
    }
    throw PrecisionError("lt_log_from_series did not stabilize");
}

// [u] for a classical Lubin-Tate polynomial f, solved directly from the
// commutation equation f([u](X)) = [u](f(X)) with [u] = uX mod deg 2.
// The degree-k coefficient satisfies c_k (pi - pi^k) = -D_k with D_k the
// degree-k defect of the partial solution; the division by pi is exact.
inline TruncSeries lt_mult_commuting(const LtContext& lt, const TruncSeries& f, const TruncElem& u) {
    TruncSeries U = TruncSeries::variable(lt.sctx, 1, 0).scale(
        ScaledCoeff::exact_elem(u.reduce(lt.sctx.Pwork)));
    for (int k = 2; k <= lt.sctx.D; ++k) {
        TruncSeries diff = f.substitute({U}) - U.substitute({f});
        ScaledCoeff Dk = diff.coeff1(k);
        if (Dk.rep_zero()) continue;
        // c_k = -D_k / (pi - pi^k) = -D_k * (1 - pi^{k-1})^{-1} / pi
        TruncElem unit = (TruncElem::one(lt.F, lt.sctx.Pwork) -
                          TruncElem::pi(lt.F, lt.sctx.Pwork).pow(k - 1)).inv();
        ScaledCoeff ck = coeff_mul(coeff_mul(coeff_neg(Dk), ScaledCoeff::exact_elem(unit)),
                                   ScaledCoeff::pi_shifted(lt.sctx, 1, 1));
        U.add_term(TruncSeries::Key{static_cast<uint16_t>(k), 0, 0}, ck);
    }
    if (!f.substitute({U}).equal_mod(U.substitute({f}), lt.sctx.M))
        throw VerifyError("[u] does not commute with f at the working precision");
    U.assert_integral("[u] (commuting construction)");
    return U;
}

// ---------------------------------------------------------------------------
// TowerRing: O/pi^M [t_1]/(g_1) [t_2]/(g_2) ... with dense nested elements.
// Reduction happens in t_n first, then t_{n-1}, ..., then pi, so normal forms
// are unique.
// ---------------------------------------------------------------------------

class TowerRing;

class TowerElem {
  public:
    TowerElem() = default;
    explicit TowerElem(TruncElem leaf) : level_(0), leaf_(std::move(leaf)) {}
    TowerElem(int level, std::vector<TowerElem> kids) : level_(level), kids_(std::move(kids)) {}

    int level() const { return level_; }
    const TruncElem& leaf() const { return leaf_; }
    const std::vector<TowerElem>& kids() const { return kids_; }
    std::vector<TowerElem>& kids() { return kids_; }

    bool operator==(const TowerElem& o) const {
        if (level_ != o.level_) return false;
        if (level_ == 0) return leaf_ == o.leaf_;
        return kids_ == o.kids_;
    }
    bool operator!=(const TowerElem& o) const { return !(*this == o); }

  private:
    int level_ = 0;
    TruncElem leaf_;
    std::vector<TowerElem> kids_;
};

class TowerRing {
  public:
    TowerRing(FieldDescPtr F, int M) : F_(std::move(F)), M_(M) {}

    const FieldDescPtr& field() const { return F_; }
    int precision() const { return M_; }
    int stages() const { return static_cast<int>(gs_.size()); }
    const std::vector<TowerElem>& g(int j) const { return gs_.at(j - 1); }  // 1-based
    int stage_degree(int j) const { return static_cast<int>(gs_.at(j - 1).size()) - 1; }

    // g's coefficients must live at level = current stages().
    void push_stage(std::vector<TowerElem> g) {
        for (const auto& c : g)
            if (c.level() != stages()) throw Error("push_stage: coefficient level mismatch");
        if (!is_one_elem(g.back())) throw Error("push_stage: g must be monic");
        gs_.push_back(std::move(g));
    }

    TowerElem zero(int L) const {
        if (L == 0) return TowerElem(TruncElem::zero(F_, M_));
        return TowerElem(L, std::vector<TowerElem>(stage_degree(L), zero(L - 1)));
    }
    TowerElem one(int L) const {
        TowerElem z = zero(L);
        return set_leading_scalar(z, TruncElem::one(F_, M_));
    }
    TowerElem scalar(int L, const TruncElem& c) const {
        TowerElem z = zero(L);
        return set_leading_scalar(z, c.precision() == M_ ? c : c.reduce(M_));
    }
    // t_j as a level-L element (L >= j >= 1). A degree-1 stage pins t_j to
    // -g_j(0) in the previous ring.
    TowerElem gen(int L, int j) const {
        if (j < 1 || j > L) throw Error("gen: bad stage index");
        if (j == L) {
            if (stage_degree(L) == 1) return TowerElem(L, {neg(gs_[L - 1][0])});
            TowerElem r = zero(L);
            r.kids()[1] = one(L - 1);
            return r;
        }
        TowerElem r = zero(L);
        r.kids()[0] = gen(L - 1, j);
        return r;
    }
    TowerElem lift(const TowerElem& a, int L) const {
        if (a.level() == L) return a;
        if (a.level() > L) throw Error("lift: cannot lower");
        TowerElem r = zero(a.level() + 1);
        r.kids()[0] = a;
        return lift(r, L);
    }

    bool is_zero_elem(const TowerElem& a) const {
        if (a.level() == 0) return a.leaf().is_zero();
        for (const auto& k : a.kids())
            if (!is_zero_elem(k)) return false;
        return true;
    }
    bool is_one_elem(const TowerElem& a) const { return a == one(a.level()); }

    TowerElem add(const TowerElem& a, const TowerElem& b) const {
        check(a, b);
        if (a.level() == 0) return TowerElem(a.leaf() + b.leaf());
        std::vector<TowerElem> kids(a.kids().size());
        for (size_t i = 0; i < kids.size(); ++i) kids[i] = add(a.kids()[i], b.kids()[i]);
        return TowerElem(a.level(), std::move(kids));
    }
    TowerElem neg(const TowerElem& a) const {
        if (a.level() == 0) return TowerElem(-a.leaf());
        std::vector<TowerElem> kids(a.kids().size());
        for (size_t i = 0; i < kids.size(); ++i) kids[i] = neg(a.kids()[i]);
        return TowerElem(a.level(), std::move(kids));
    }
    TowerElem sub(const TowerElem& a, const TowerElem& b) const { return add(a, neg(b)); }

    TowerElem mul(const TowerElem& a, const TowerElem& b) const {
        check(a, b);
        if (a.level() == 0) return TowerElem(a.leaf() * b.leaf());
        int L = a.level();
        int d = stage_degree(L);
        std::vector<TowerElem> prod(2 * d - 1, zero(L - 1));
        for (int i = 0; i < d; ++i) {
            if (is_zero_elem(a.kids()[i])) continue;
            for (int j = 0; j < d; ++j)
                prod[i + j] = add(prod[i + j], mul(a.kids()[i], b.kids()[j]));
        }
        // reduce by the monic g_L
        const auto& gL = gs_[L - 1];
        for (int dd = 2 * d - 2; dd >= d; --dd) {
            TowerElem lead = prod[dd];
            if (is_zero_elem(lead)) continue;
            prod[dd] = zero(L - 1);
            for (int i = 0; i < d; ++i)
                prod[dd - d + i] = sub(prod[dd - d + i], mul(lead, gL[i]));
        }
        prod.resize(d, zero(L - 1));
        return TowerElem(L, std::move(prod));
    }
    TowerElem pow(const TowerElem& a, int64_t e) const {
        TowerElem acc = one(a.level()), base = a;
        while (e) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }

    FqElem residue(const TowerElem& a) const {
        const TowerElem* cur = &a;
        while (cur->level() > 0) cur = &cur->kids()[0];
        return cur->leaf().residue();
    }
    bool is_unit(const TowerElem& a) const { return residue(a) != 0; }

    TowerElem inv(const TowerElem& a) const {
        if (!is_unit(a)) throw FieldError("inverting a non-unit in the tower ring");
        int L = a.level();
        TowerElem z = scalar(L, TruncElem::lift_residue(F_, M_, F_->rf()->inv(residue(a))));
        TowerElem two = scalar(L, TruncElem::from_integer(F_, M_, 2));
        for (int it = 0; it < 200; ++it) {
            TowerElem az = mul(a, z);
            if (is_one_elem(az)) return z;
            z = mul(z, sub(two, az));
        }
        throw Error("tower inversion did not converge");
    }

    // min over leaf coefficients of the pi-valuation (M when zero): detects
    // divisibility by pi^k, using that the monomial basis is pi-adically free.
    int min_pi_val(const TowerElem& a) const {
        if (a.level() == 0) return a.leaf().val();
        int v = M_;
        for (const auto& k : a.kids()) v = std::min(v, min_pi_val(k));
        return v;
    }

    // Stage-uniformizer valuation: val(t_L) = 1 at level L, with
    // val_L = stage_degree * val_{L-1} on coefficients. Values >= cap are
    // reported as cap.
    int stage_val(const TowerElem& a, int cap = 1 << 20) const {
        if (a.level() == 0) {
            if (a.leaf().is_zero()) return cap;
            return std::min(cap, a.leaf().val());
        }
        int d = stage_degree(a.level());
        int v = cap;
        for (size_t i = 0; i < a.kids().size(); ++i) {
            int vk = stage_val(a.kids()[i], cap);
            int vi = vk >= cap ? cap : static_cast<int>(i) + d * vk;
            v = std::min(v, vi);
        }
        return std::min(v, cap);
    }

    std::string show(const TowerElem& a) const {
        if (a.level() == 0) {
            std::string s = "[";
            for (auto d : a.leaf().teichmuller_digits()) s += std::to_string(d) + ",";
            return s + "]";
        }
        std::string s = "(";
        for (const auto& k : a.kids()) s += show(k) + " ";
        return s + ")";
    }

  private:
    void check(const TowerElem& a, const TowerElem& b) const {
        if (a.level() != b.level()) throw Error("tower elements at different levels");
    }
    TowerElem set_leading_scalar(TowerElem z, TruncElem c) const {
        if (z.level() == 0) return TowerElem(std::move(c));
        z.kids()[0] = set_leading_scalar(z.kids()[0], std::move(c));
        return z;
    }

    FieldDescPtr F_;
    int M_;
    std::vector<std::vector<TowerElem>> gs_;
};

// ---------------------------------------------------------------------------
// Polynomial helpers over a tower stage (dense coefficient vectors).
// ---------------------------------------------------------------------------

namespace tower_poly {

inline void trim(const TowerRing& R, std::vector<TowerElem>& p) {
    while (p.size() > 1 && R.is_zero_elem(p.back())) p.pop_back();
}

inline std::vector<TowerElem> mul(const TowerRing& R, const std::vector<TowerElem>& a,
                                  const std::vector<TowerElem>& b) {
    int L = a.at(0).level();
    std::vector<TowerElem> r(a.size() + b.size() - 1, R.zero(L));
    for (size_t i = 0; i < a.size(); ++i) {
        if (R.is_zero_elem(a[i])) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = R.add(r[i + j], R.mul(a[i], b[j]));
    }
    trim(R, r);
    return r;
}

inline std::vector<TowerElem> add(const TowerRing& R, std::vector<TowerElem> a,
                                  const std::vector<TowerElem>& b) {
    if (b.size() > a.size()) a.resize(b.size(), R.zero(a.at(0).level()));
    for (size_t i = 0; i < b.size(); ++i) a[i] = R.add(a[i], b[i]);
    trim(R, a);
    return a;
}

inline std::vector<TowerElem> neg(const TowerRing& R, std::vector<TowerElem> a) {
    for (auto& c : a) c = R.neg(c);
    return a;
}

inline std::vector<TowerElem> scale(const TowerRing& R, std::vector<TowerElem> a, const TowerElem& s) {
    for (auto& c : a) c = R.mul(c, s);
    trim(R, a);
    return a;
}

// divmod by a monic divisor.
inline std::pair<std::vector<TowerElem>, std::vector<TowerElem>> divmod(const TowerRing& R,
                                                                        std::vector<TowerElem> num,
                                                                        const std::vector<TowerElem>& den) {
    int L = num.at(0).level();
    if (!R.is_one_elem(den.back())) throw Error("divmod needs a monic divisor");
    int dd = static_cast<int>(den.size()) - 1;
    if (static_cast<int>(num.size()) - 1 < dd) return {std::vector<TowerElem>{R.zero(L)}, std::move(num)};
    std::vector<TowerElem> q(num.size() - dd, R.zero(L));
    for (int d = static_cast<int>(num.size()) - 1; d >= dd; --d) {
        TowerElem lead = num[d];
        if (R.is_zero_elem(lead)) continue;
        q[d - dd] = lead;
        for (int i = 0; i <= dd; ++i) num[d - dd + i] = R.sub(num[d - dd + i], R.mul(lead, den[i]));
    }
    num.resize(dd == 0 ? 1 : dd, R.zero(L));
    trim(R, num);
    trim(R, q);
    return {std::move(q), std::move(num)};
}

inline TowerElem eval(const TowerRing& R, const std::vector<TowerElem>& p, const TowerElem& x) {
    TowerElem acc = R.zero(x.level());
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) acc = R.add(R.mul(acc, x), p[i]);
    return acc;
}

}  // namespace tower_poly

// ---------------------------------------------------------------------------
// Weierstrass preparation over a tower stage: F = h * g with g monic of
// degree d = (first unit coefficient index), g = X^d mod the maximal ideal.
// Implemented by quadratic Hensel lifting of the residue factorization
// (exact because the maximal ideal is nilpotent at finite precision), i.e.
// iterative quotient-remainder with pi-adic correction.
// ---------------------------------------------------------------------------

struct WeierstrassFactorization {
    std::vector<TowerElem> g;  // monic, degree d
    std::vector<TowerElem> h;  // F = h * g exactly
    int degree = 0;
};

inline WeierstrassFactorization weierstrass_factor(const TowerRing& R, const std::vector<TowerElem>& Fin) {
    int L = Fin.at(0).level();
    std::vector<TowerElem> F = Fin;
    tower_poly::trim(R, F);
    int d = -1;
    for (size_t i = 0; i < F.size(); ++i)
        if (R.is_unit(F[i])) {
            d = static_cast<int>(i);
            break;
        }
    if (d < 0) throw VerifyError("weierstrass: polynomial is not distinguished (no unit coefficient)");

    // residue factorization over F_q: gbar = X^d, hbar = residue(F)/X^d
    const auto& rf = *R.field()->rf();
    int degF = static_cast<int>(F.size()) - 1;
    // g: monic degree d; h: degree degF - d
    std::vector<TowerElem> g(d + 1, R.zero(L));
    g[d] = R.one(L);
    std::vector<TowerElem> h(degF - d + 1, R.zero(L));
    for (int i = d; i <= degF; ++i) h[i - d] = R.scalar(L, TruncElem::lift_residue(R.field(), R.precision(), R.residue(F[i])));
    // Bezout over F_q[X]: a*g + b*h = 1 mod m. gbar = X^d, hbar has unit
    // constant term c: X^d * 0 + hbar * (inverse series of hbar mod X^d) = 1
    // mod X^d... use: b = inverse of hbar as a power series mod X^d, and
    // a = (1 - b*hbar)/X^d.
    std::vector<FqElem> hbar(h.size());
    for (size_t i = 0; i < h.size(); ++i) hbar[i] = R.residue(h[i]);
    std::vector<FqElem> binv(d == 0 ? 1 : d, 0);
    {
        // power series inversion of hbar mod X^max(d,1)
        int len = std::max(d, 1);
        binv.assign(len, 0);
        binv[0] = rf.inv(hbar[0]);
        for (int k = 1; k < len; ++k) {
            FqElem s = 0;
            for (int i = 1; i <= k; ++i)
                if (i < static_cast<int>(hbar.size())) s = rf.add(s, rf.mul(hbar[i], binv[k - i]));
            binv[k] = rf.neg(rf.mul(s, binv[0]));
        }
    }
    auto lift_fq_poly = [&](const std::vector<FqElem>& v) {
        std::vector<TowerElem> out;
        for (auto c : v) out.push_back(R.scalar(L, TruncElem::lift_residue(R.field(), R.precision(), c)));
        if (out.empty()) out.push_back(R.zero(L));
        tower_poly::trim(R, out);
        return out;
    };
    std::vector<TowerElem> b = lift_fq_poly(binv);
    // a = (1 - b*h) div g  (exact at the residue level; lift and correct below)
    std::vector<TowerElem> onep{R.one(L)};
    std::vector<TowerElem> a;
    {
        auto rem = tower_poly::add(R, onep, tower_poly::neg(R, tower_poly::mul(R, b, h)));
        a = tower_poly::divmod(R, rem, g).first;
    }

    // quadratic Hensel iteration, exact termination
    for (int it = 0; it < 64; ++it) {
        auto gh = tower_poly::mul(R, g, h);
        auto e = tower_poly::add(R, F, tower_poly::neg(R, gh));
        if (e.size() == 1 && R.is_zero_elem(e[0])) break;
        auto be = tower_poly::mul(R, b, e);
        auto [q1, r1] = tower_poly::divmod(R, be, g);
        g = tower_poly::add(R, g, r1);
        h = tower_poly::add(R, h, tower_poly::add(R, tower_poly::mul(R, a, e), tower_poly::mul(R, q1, h)));
        // refresh the Bezout pair
        auto err = tower_poly::add(R, tower_poly::add(R, tower_poly::mul(R, a, g), tower_poly::mul(R, b, h)),
                                   tower_poly::neg(R, onep));
        auto berr = tower_poly::mul(R, b, err);
        auto [q2, r2] = tower_poly::divmod(R, berr, g);
        b = tower_poly::add(R, b, tower_poly::neg(R, r2));
        a = tower_poly::add(R, a, tower_poly::neg(R, tower_poly::add(R, tower_poly::mul(R, a, err),
                                                                     tower_poly::mul(R, q2, h))));
    }
    {
        auto gh = tower_poly::mul(R, g, h);
        auto e = tower_poly::add(R, F, tower_poly::neg(R, gh));
        if (!(e.size() == 1 && R.is_zero_elem(e[0])))
            throw Error("weierstrass: Hensel iteration failed to terminate exactly");
    }
    WeierstrassFactorization out;
    out.degree = d;
    out.g = std::move(g);
    out.h = std::move(h);
    return out;
}

// ---------------------------------------------------------------------------
// The torsion tower: g_1 = Weierstrass factor of f/X over O/pi^M (degree
// q-1), then g_{j+1} = Weierstrass factor of f - t_j over stage j (degree q),
// with f_pi(t_1) = 0 and f_pi(t_{j+1}) = t_j holding exactly in the ring.
// ---------------------------------------------------------------------------

struct TorsionTower {
    FieldDescPtr F;
    int n = 0;
    int M = 0;
    std::vector<TruncElem> f;             // the Lubin-Tate polynomial, dense
    std::shared_ptr<TowerRing> ring;
    std::vector<int> stage_degrees;       // deg g_j over its stage
    std::vector<int64_t> accumulated;     // rank of stage j over O
    int64_t torsion_count = 0;            // 1 + sum of accumulated ranks

    TowerElem t(int j) const { return ring->gen(n, j); }

    // f evaluated in the top ring.
    TowerElem eval_f(const TowerElem& x) const {
        std::vector<TowerElem> fe;
        for (const auto& c : f) fe.push_back(ring->scalar(x.level(), c));
        return tower_poly::eval(*ring, fe, x);
    }
};

// Validation of a Lubin-Tate polynomial for pi: f = pi X mod deg 2 and
// f = X^q mod pi.
inline void validate_lt_poly(const FieldDescPtr& F, const std::vector<TruncElem>& f, int M) {
    int64_t q = F->q();
    if (static_cast<int>(f.size()) < q + 1) throw VerifyError("lt polynomial has degree < q");
    if (!f[0].is_zero()) throw VerifyError("lt polynomial has a constant term");
    if (f[1] != TruncElem::pi(F, M)) throw VerifyError("lt polynomial: linear coefficient is not pi");
    for (size_t i = 2; i < f.size(); ++i) {
        if (static_cast<int64_t>(i) == q) {
            if ((f[i] - TruncElem::one(F, M)).val() < 1)
                throw VerifyError("lt polynomial: X^q coefficient != 1 mod pi");
        } else if (f[i].val() < 1) {
            throw VerifyError("lt polynomial: coefficient at degree " + std::to_string(i) +
                              " is not divisible by pi");
        }
    }
}

// The default classical polynomial pi X + X^q.
inline std::vector<TruncElem> classical_lt_poly(const FieldDescPtr& F, int M) {
    int64_t q = F->q();
    std::vector<TruncElem> f(q + 1, TruncElem::zero(F, M));
    f[1] = TruncElem::pi(F, M);
    f[q] = TruncElem::one(F, M);
    return f;
}

inline TorsionTower torsion_tower(FieldDescPtr F, std::vector<TruncElem> f, int n, int M) {
    validate_lt_poly(F, f, M);
    int64_t q = F->q();
    TorsionTower T;
    T.F = F;
    T.n = n;
    T.M = M;
    T.f = std::move(f);
    T.ring = std::make_shared<TowerRing>(F, M);
    auto& R = *T.ring;
    int64_t acc = 1;
    for (int j = 1; j <= n; ++j) {
        int L = j - 1;
        std::vector<TowerElem> Fj;
        if (j == 1) {
            // f / X
            for (size_t i = 1; i < T.f.size(); ++i) Fj.push_back(R.scalar(L, T.f[i]));
        } else {
            for (size_t i = 0; i < T.f.size(); ++i) Fj.push_back(R.scalar(L, T.f[i]));
            Fj[0] = R.sub(Fj[0], R.gen(L, j - 1));  // f - t_{j-1}
        }
        auto W = weierstrass_factor(R, Fj);
        int expect = j == 1 ? static_cast<int>(q - 1) : static_cast<int>(q);
        if (W.degree != expect)
            throw VerifyError("torsion tower: Weierstrass degree " + std::to_string(W.degree) +
                              " at stage " + std::to_string(j) + ", expected " + std::to_string(expect));
        R.push_stage(W.g);
        T.stage_degrees.push_back(W.degree);
        acc *= W.degree;
        T.accumulated.push_back(acc);
    }
    T.torsion_count = 1;
    for (auto a : T.accumulated) T.torsion_count += a;
    return T;
}

// Eisenstein-over-stage: monic (by construction), lower coefficients in the
// maximal ideal, constant term of stage-valuation exactly 1.
inline bool eisenstein_over_stage(const TorsionTower& T, int j) {
    const auto& R = *T.ring;
    const auto& g = R.g(j);
    for (size_t i = 0; i + 1 < g.size(); ++i)
        if (R.residue(g[i]) != 0) return false;
    return R.stage_val(g[0]) == 1;
}

// f_pi(t_1) = 0 and f_pi(t_{j+1}) = t_j, exactly in the tower ring.
inline bool tower_compatibility(const TorsionTower& T) {
    const auto& R = *T.ring;
    if (!R.is_zero_elem(T.eval_f(T.t(1)))) return false;
    for (int j = 1; j < T.n; ++j)
        if (T.eval_f(T.t(j + 1)) != T.t(j)) return false;
    return true;
}

// The Cauchy property behind pi_infty^sharp = lim t_n^{q^n}:
// t_{j+1}^{q^{j+1}} = t_j^{q^j} mod pi^{j+1} for j < n.
struct LimitCheckReport {
    bool ok = true;
    std::vector<int> failed_j;
};

inline LimitCheckReport limit_coordinate_check(const TorsionTower& T) {
    LimitCheckReport rep;
    const auto& R = *T.ring;
    int64_t q = T.F->q();
    for (int j = 1; j < T.n; ++j) {
        if (j + 1 > T.M) throw PrecisionError("limit check needs M > j");
        auto lhs = R.pow(T.t(j + 1), detail::pow_ll(q, j + 1));
        auto rhs = R.pow(T.t(j), detail::pow_ll(q, j));
        if (R.min_pi_val(R.sub(lhs, rhs)) < j + 1) {
            rep.ok = false;
            rep.failed_j.push_back(j);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The unit action on torsion: [u] permutes the level-n torsion
// (g_n([u](t_n)) = 0), and fixes t_n iff u = 1 mod pi^n.
// ---------------------------------------------------------------------------

struct UnitActionReport {
    bool permutes = true;       // g_n([u](t_n)) = 0
    bool fixes_tn = false;      // [u](t_n) == t_n
    bool congruent_1_mod_pin = false;
    bool consistent() const { return permutes && (fixes_tn == congruent_1_mod_pin); }
};

// Evaluate an integral 1-variable series at a tower element (exact when the
// argument is nilpotent below the cutoff; asserted).
inline TowerElem eval_series_in_tower(const TorsionTower& T, const TruncSeries& s, const TowerElem& x) {
    const auto& R = *T.ring;
    if (!R.is_zero_elem(R.pow(x, s.ctx().D + 1)))
        throw PrecisionError("series cutoff too small for exact evaluation at this tower element");
    auto coeffs = s.dense_poly(T.M);
    std::vector<TowerElem> p;
    for (const auto& c : coeffs) p.push_back(R.scalar(x.level(), c));
    return tower_poly::eval(R, p, x);
}

// The tower's f as a series; its precision-M coefficients are treated as
// exact data (true for polynomial inputs like pi X + X^q).
inline TruncSeries tower_f_series(const LtContext& lt, const TorsionTower& T) {
    TruncSeries fs = TruncSeries::zero(lt.sctx, 1);
    for (size_t i = 0; i < T.f.size(); ++i) {
        if (T.f[i].is_zero()) continue;
        auto d = T.f[i].teichmuller_digits();
        d.resize(lt.sctx.Pwork, 0);
        fs.add_term(TruncSeries::Key{static_cast<uint16_t>(i), 0, 0},
                    ScaledCoeff::exact_elem(TruncElem::from_digits(T.F, d)));
    }
    return fs;
}

inline UnitActionReport unit_action_check(const LtContext& lt, const TorsionTower& T, const TruncElem& u) {
    if (u.val() != 0) throw FieldError("unit_action_check: u is not a unit");
    if (u.precision() < lt.sctx.Pwork) throw PrecisionError("unit_action_check: u below working precision");
    TruncSeries useries = lt_mult_commuting(lt, tower_f_series(lt, T), u);

    const auto& R = *T.ring;
    UnitActionReport rep;
    TowerElem ut = eval_series_in_tower(T, useries, T.t(T.n));
    std::vector<TowerElem> gn;
    for (const auto& c : R.g(T.n)) gn.push_back(R.lift(c, T.n));
    rep.permutes = R.is_zero_elem(tower_poly::eval(R, gn, ut));
    rep.fixes_tn = (ut == T.t(T.n));
    rep.congruent_1_mod_pin = (u.reduce(T.n) == TruncElem::one(T.F, T.n));
    return rep;
}

}  // namespace closefields
