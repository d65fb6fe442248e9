#pragma once

#include <functional>
#include <set>

#include "closefields/classical_witt.hpp"
#include "closefields/fast_quotient.hpp"
#include "closefields/mpoly.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// Ghost polynomials w_j(T_0..T_j) = T_0^{q^j} + pi T_1^{q^{j-1}} + ... + pi^j T_j
// ---------------------------------------------------------------------------

// w_j in an nvars-variable space, using variables offset..offset+j.
inline MPoly ghost_poly(const FieldDescPtr& F, int N, int nvars, int offset, int j) {
    int64_t q = F->q();
    MPoly w = MPoly::zero(F, N, nvars);
    auto piN = TruncElem::pi(F, N);
    for (int k = 0; k <= j; ++k) {
        MPoly t = MPoly::variable(F, N, nvars, offset + k).pow(detail::pow_ll(q, j - k));
        w = w + t.scale(piN.pow(k));
    }
    return w;
}

// phi on the universal algebra: identity on O, T -> T^q. Legitimate as a
// Frobenius lift exactly because the residue field is F_q.
inline MPoly frobenius_substitute(const MPoly& a, int64_t q) {
    MPoly r = MPoly::zero(a.field(), a.precision(), a.nvars());
    for (const auto& [m, c] : a.terms()) {
        MPoly::Monomial mq(m.size());
        for (size_t i = 0; i < m.size(); ++i) mq[i] = static_cast<uint16_t>(m[i] * q);
        r.add_term(mq, c);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Generic ghost solving (the inductive exact division of Prop 3.1(i)).
// Works for any coefficient object supporting the small adapter functions
// below; instantiated for TruncElem and MPoly coordinates.
// ---------------------------------------------------------------------------

namespace witt_detail {

inline int value_val(const TruncElem& x) { return x.val(); }
inline int value_val(const MPoly& x) { return x.min_val(); }

}  // namespace witt_detail

// coords -> ghosts, at the coords' uniform precision.
template <class C>
std::vector<C> ghost_map_generic(const FieldDescPtr& F, int P, const std::vector<C>& coords,
                                 const std::function<C(const TruncElem&)>& embed_scalar) {
    int64_t q = F->q();
    int n = static_cast<int>(coords.size());
    std::vector<C> out;
    out.reserve(n);
    auto piP = TruncElem::pi(F, P);
    for (int j = 0; j < n; ++j) {
        C acc = coords[0].pow(detail::pow_ll(q, j));
        for (int k = 1; k <= j; ++k)
            acc = acc + coords[k].pow(detail::pow_ll(q, j - k)) * embed_scalar(piP.pow(k));
        out.push_back(acc);
    }
    return out;
}

// ghosts -> coords. Ghosts are at uniform precision P; coordinate j comes out
// at precision P - j (division by pi^j is genuine). The admissibility
// congruence b_{j+1} = phi(b_j) mod pi^{j+1} is checked and failures are
// reported with the stage index.
template <class C>
std::vector<C> ghost_solve_generic(const FieldDescPtr& F, int P, const std::vector<C>& ghosts,
                                   const std::function<C(const C&)>& phi) {
    int64_t q = F->q();
    int n = static_cast<int>(ghosts.size());
    for (int j = 0; j + 1 < n; ++j) {
        C diff = ghosts[j + 1] - phi(ghosts[j]);
        if (witt_detail::value_val(diff) < j + 1)
            throw VerifyError("ghost vector not admissible: b_{j+1} != phi(b_j) mod pi^{j+1} at stage " +
                              std::to_string(j));
    }
    std::vector<C> coords;
    coords.reserve(n);
    for (int j = 0; j < n; ++j) {
        C acc = ghosts[j];  // precision P
        for (int k = 0; k < j; ++k)
            acc = acc - coords[k].pow(detail::pow_ll(q, j - k)).mul_pi_raise(k);
        if (witt_detail::value_val(acc) < j)
            throw VerifyError("ghost preimage requires division by pi^" + std::to_string(j) +
                              " of a value with smaller valuation at stage " + std::to_string(j));
        coords.push_back(acc.div_pi(j));
    }
    return coords;
}

// ---------------------------------------------------------------------------
// LawTable: the universal Witt sum/product/negation polynomials S_j, P_j, N_j
// for a fixed (O, q, pi), solved from the ghost equations with pi-headroom
// M + n and exact-divisibility assertions, then reduced to precision M.
// ---------------------------------------------------------------------------

class LawTable {
  public:
    LawTable(FieldDescPtr F, int n, int M) : F_(std::move(F)), n_(n), M_(M) {
        if (n < 1 || n > 10) throw BudgetError("law table length out of desk-scale range");
        int MH = M + n;
        int nv = 2 * n;
        std::vector<MPoly> gx, gy;
        for (int j = 0; j < n; ++j) {
            gx.push_back(ghost_poly(F_, MH, nv, 0, j));
            gy.push_back(ghost_poly(F_, MH, nv, n, j));
        }
        std::vector<MPoly> ts, tp, tn;
        for (int j = 0; j < n; ++j) {
            ts.push_back(gx[j] + gy[j]);
            tp.push_back(gx[j] * gy[j]);
            tn.push_back(-gx[j]);
        }
        S_ = solve(ts);
        P_ = solve(tp);
        Neg_ = solve(tn);
    }

    const FieldDescPtr& field() const { return F_; }
    int length() const { return n_; }
    int precision() const { return M_; }
    const std::vector<MPoly>& sum() const { return S_; }
    const std::vector<MPoly>& product() const { return P_; }
    const std::vector<MPoly>& negation() const { return Neg_; }

    // Ghost consistency at output precision: w_j(S) = w_j(X) + w_j(Y), etc.
    bool verify_ghost_consistency() const {
        int nv = 2 * n_;
        std::vector<MPoly> vars;
        for (int v = 0; v < nv; ++v) vars.push_back(MPoly::variable(F_, M_, nv, v));
        for (int j = 0; j < n_; ++j) {
            MPoly w = ghost_poly(F_, M_, j + 1, 0, j);
            MPoly gxj = ghost_poly(F_, M_, nv, 0, j);
            MPoly gyj = ghost_poly(F_, M_, nv, n_, j);
            auto args_of = [&](const std::vector<MPoly>& tab) {
                std::vector<MPoly> a;
                for (int k = 0; k <= j; ++k) a.push_back(tab[k]);
                return a;
            };
            if (w.substitute(args_of(S_)) != gxj + gyj) return false;
            if (w.substitute(args_of(P_)) != gxj * gyj) return false;
            if (w.substitute(args_of(Neg_)) != -gxj) return false;
        }
        return true;
    }

    // The structure map O -> W^n(O/pi^M): the unique Witt vector with constant
    // ghost (lam, lam, ...). Used for scalar multiplication identities.
    std::vector<TruncElem> scalar_vector(const TruncElem& lam_at_MH) const {
        int MH = M_ + n_;
        if (lam_at_MH.precision() != MH)
            throw PrecisionError("scalar_vector wants the scalar at precision M + n");
        std::vector<TruncElem> ghosts(n_, lam_at_MH);
        std::function<TruncElem(const TruncElem&)> phi = [](const TruncElem& x) { return x; };
        auto coords = ghost_solve_generic<TruncElem>(F_, MH, ghosts, phi);
        std::vector<TruncElem> out;
        for (auto& c : coords) out.push_back(c.reduce(M_));
        return out;
    }

  private:
    std::vector<MPoly> solve(const std::vector<MPoly>& targets) const {
        int MH = M_ + n_;
        int64_t q = F_->q();
        std::vector<MPoly> R;
        for (int j = 0; j < n_; ++j) {
            MPoly acc = targets[j];
            for (int k = 0; k < j; ++k)
                acc = acc - R[k].pow(detail::pow_ll(q, j - k)).mul_pi_raise(k);
            R.push_back(acc.div_pi(j));  // throws on non-exact division
            if (R.back().precision() != MH - j) throw Error("internal: headroom bookkeeping");
        }
        std::vector<MPoly> out;
        for (int j = 0; j < n_; ++j) out.push_back(R[j].reduce(M_));
        return out;
    }

    FieldDescPtr F_;
    int n_, M_;
    std::vector<MPoly> S_, P_, Neg_;
};

using LawTablePtr = std::shared_ptr<const LawTable>;

inline LawTablePtr law_polynomials(FieldDescPtr F, int n, int M) {
    return std::make_shared<LawTable>(std::move(F), n, M);
}

// ---------------------------------------------------------------------------
// Coordinate rings for Witt vectors. The enumerated bases keep exhaustive
// testing possible: F_q, F_q[u]/u^k (which also models the truncated
// perfection F_q[u^{1/q^s}]/(u) with k = q^s), and O/pi^m.
// ---------------------------------------------------------------------------

struct FqCoordRing {
    using Elem = FqElem;
    ResidueFieldPtr rf;

    Elem zero() const { return rf->zero(); }
    Elem one() const { return rf->one(); }
    Elem add(Elem a, Elem b) const { return rf->add(a, b); }
    Elem mul(Elem a, Elem b) const { return rf->mul(a, b); }
    Elem neg(Elem a) const { return rf->neg(a); }
    Elem from_table_coeff(const TruncElem& c) const { return c.residue(); }
    bool equal(Elem a, Elem b) const { return a == b; }
    bool is_opi_algebra() const { return true; }
    Elem qpow(Elem a) const { return rf->pow(a, rf->q()); }
    std::vector<Elem> all() const {
        std::vector<Elem> v;
        for (int64_t i = 0; i < rf->q(); ++i) v.push_back(static_cast<Elem>(i));
        return v;
    }
};

// F_q[u]/u^k; written multiplicatively in the truncated-perfection reading as
// F_q[u^{1/q^s}]/(u) by taking k = q^s and v = u^{1/q^s}.
struct FqPolyCoordRing {
    using Elem = std::vector<FqElem>;  // coefficients, degree < k
    ResidueFieldPtr rf;
    int k;

    Elem zero() const { return Elem(k, 0); }
    Elem one() const {
        Elem e(k, 0);
        e[0] = rf->one();
        return e;
    }
    Elem gen() const {
        Elem e(k, 0);
        if (k > 1) e[1] = rf->one();
        return e;
    }
    Elem add(const Elem& a, const Elem& b) const {
        Elem r(k);
        for (int i = 0; i < k; ++i) r[i] = rf->add(a[i], b[i]);
        return r;
    }
    Elem mul(const Elem& a, const Elem& b) const {
        Elem r(k, 0);
        for (int i = 0; i < k; ++i) {
            if (!a[i]) continue;
            for (int j = 0; i + j < k; ++j) r[i + j] = rf->add(r[i + j], rf->mul(a[i], b[j]));
        }
        return r;
    }
    Elem neg(const Elem& a) const {
        Elem r(k);
        for (int i = 0; i < k; ++i) r[i] = rf->neg(a[i]);
        return r;
    }
    Elem from_table_coeff(const TruncElem& c) const {
        Elem r(k, 0);
        r[0] = c.residue();
        return r;
    }
    bool equal(const Elem& a, const Elem& b) const { return a == b; }
    bool is_opi_algebra() const { return true; }
    Elem qpow(const Elem& a) const {
        Elem acc = one();
        int64_t e = rf->q();
        Elem base = a;
        while (e) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }
};

// O/pi^m through its quotient structure (an O/pi-algebra only when m = 1).
struct TruncCoordRing {
    using Elem = TruncElem;
    FieldDescPtr F;
    int m;

    Elem zero() const { return TruncElem::zero(F, m); }
    Elem one() const { return TruncElem::one(F, m); }
    Elem add(const Elem& a, const Elem& b) const { return a + b; }
    Elem mul(const Elem& a, const Elem& b) const { return a * b; }
    Elem neg(const Elem& a) const { return -a; }
    Elem from_table_coeff(const TruncElem& c) const { return c.reduce(m); }
    bool equal(const Elem& a, const Elem& b) const { return a == b; }
    bool is_opi_algebra() const { return m == 1; }
    Elem qpow(const Elem& a) const { return a.pow(F->q()); }
};

// Symbolic coordinates (polynomial algebra over O/pi^P): the pi-torsionfree
// test bed for ghost identities, with tracked exactness.
struct MPolyCoordRing {
    using Elem = MPoly;
    FieldDescPtr F;
    int P;
    int nvars;

    Elem zero() const { return MPoly::zero(F, P, nvars); }
    Elem one() const { return MPoly::constant(F, P, nvars, TruncElem::one(F, P)); }
    Elem var(int v) const { return MPoly::variable(F, P, nvars, v); }
    Elem add(const Elem& a, const Elem& b) const { return a + b; }
    Elem mul(const Elem& a, const Elem& b) const { return a * b; }
    Elem neg(const Elem& a) const { return -a; }
    Elem from_table_coeff(const TruncElem& c) const {
        return MPoly::constant(F, P, nvars, c.precision() == P ? c : c.reduce(P));
    }
    bool equal(const Elem& a, const Elem& b) const { return a == b; }
    bool is_opi_algebra() const { return false; }
    Elem qpow(const Elem& a) const { return a.pow(F->q()); }
};

// ---------------------------------------------------------------------------
// Witt vectors over a coordinate ring, with table-driven arithmetic.
// ---------------------------------------------------------------------------

template <class Ring>
struct WittVec {
    LawTablePtr table;
    Ring ring;
    std::vector<typename Ring::Elem> coords;

    int length() const { return static_cast<int>(coords.size()); }

    static WittVec zero(LawTablePtr t, Ring r, int len) {
        WittVec v{t, r, {}};
        v.coords.assign(len, r.zero());
        return v;
    }
    static WittVec teichmuller(LawTablePtr t, Ring r, typename Ring::Elem a, int len) {
        WittVec v = zero(t, std::move(r), len);
        v.coords[0] = std::move(a);
        return v;
    }

    bool operator==(const WittVec& o) const {
        if (coords.size() != o.coords.size()) return false;
        for (size_t i = 0; i < coords.size(); ++i)
            if (!ring.equal(coords[i], o.coords[i])) return false;
        return true;
    }
};

namespace witt_detail {

template <class Ring>
std::vector<typename Ring::Elem> joint_coords(const WittVec<Ring>& u, const WittVec<Ring>& v) {
    int n = u.table->length();
    std::vector<typename Ring::Elem> c;
    c.reserve(2 * n);
    for (int i = 0; i < n; ++i) c.push_back(i < u.length() ? u.coords[i] : u.ring.zero());
    for (int i = 0; i < n; ++i) c.push_back(i < v.length() ? v.coords[i] : v.ring.zero());
    return c;
}

template <class Ring>
void check_shared(const WittVec<Ring>& u, const WittVec<Ring>& v) {
    if (u.table.get() != v.table.get()) throw Error("witt operands use different law tables");
    if (u.length() != v.length()) throw Error("witt operands of different length");
}

}  // namespace witt_detail

template <class Ring>
WittVec<Ring> witt_add(const WittVec<Ring>& u, const WittVec<Ring>& v) {
    witt_detail::check_shared(u, v);
    auto args = witt_detail::joint_coords(u, v);
    WittVec<Ring> r{u.table, u.ring, {}};
    for (int j = 0; j < u.length(); ++j) r.coords.push_back(u.table->sum()[j].eval(u.ring, args));
    return r;
}

template <class Ring>
WittVec<Ring> witt_mul(const WittVec<Ring>& u, const WittVec<Ring>& v) {
    witt_detail::check_shared(u, v);
    auto args = witt_detail::joint_coords(u, v);
    WittVec<Ring> r{u.table, u.ring, {}};
    for (int j = 0; j < u.length(); ++j) r.coords.push_back(u.table->product()[j].eval(u.ring, args));
    return r;
}

template <class Ring>
WittVec<Ring> witt_neg(const WittVec<Ring>& u) {
    auto args = witt_detail::joint_coords(u, u);
    WittVec<Ring> r{u.table, u.ring, {}};
    for (int j = 0; j < u.length(); ++j) r.coords.push_back(u.table->negation()[j].eval(u.ring, args));
    return r;
}

// phi: coordinatewise q-power; valid when the coordinate base is an
// O/pi-algebra (Prop: phi is induced by absolute q-Frobenius there).
template <class Ring>
WittVec<Ring> witt_frobenius(const WittVec<Ring>& u) {
    if (!u.ring.is_opi_algebra())
        throw Error("frobenius: coordinate base is neither perfect nor an O/pi-algebra");
    WittVec<Ring> r{u.table, u.ring, {}};
    for (const auto& c : u.coords) r.coords.push_back(u.ring.qpow(c));
    return r;
}

template <class Ring>
WittVec<Ring> witt_verschiebung(const WittVec<Ring>& u) {
    WittVec<Ring> r{u.table, u.ring, {}};
    r.coords.push_back(u.ring.zero());
    for (int i = 0; i + 1 < u.length(); ++i) r.coords.push_back(u.coords[i]);
    return r;
}

// W^n -> W^m, dropping im V^m: keep the first m coordinates.
template <class Ring>
WittVec<Ring> witt_truncate(const WittVec<Ring>& u, int m) {
    if (m > u.length()) throw Error("truncate cannot lengthen");
    WittVec<Ring> r{u.table, u.ring, {}};
    r.coords.assign(u.coords.begin(), u.coords.begin() + m);
    return r;
}

// Multiplication by the scalar pi via the structure map O -> W^n.
template <class Ring>
WittVec<Ring> witt_scalar_pi(const WittVec<Ring>& u) {
    int MH = u.table->precision() + u.table->length();
    auto piv = u.table->scalar_vector(TruncElem::pi(u.table->field(), MH));
    WittVec<Ring> pw{u.table, u.ring, {}};
    for (int i = 0; i < u.length(); ++i) pw.coords.push_back(u.ring.from_table_coeff(piv[i]));
    return witt_mul(pw, u);
}

// ---------------------------------------------------------------------------
// Unit covectors CW^u: left-infinite, finitely supported sequences.
// entries.back() is a_0.
// ---------------------------------------------------------------------------

template <class Ring>
struct Covector {
    LawTablePtr table;
    Ring ring;
    std::vector<typename Ring::Elem> entries;  // (a_{-m}, ..., a_0)

    void trim() {
        size_t lead = 0;
        while (lead < entries.size() && ring.equal(entries[lead], ring.zero())) ++lead;
        entries.erase(entries.begin(), entries.begin() + lead);
    }

    bool operator==(const Covector& o) const {
        Covector a = *this, b = o;
        a.trim();
        b.trim();
        if (a.entries.size() != b.entries.size()) return false;
        for (size_t i = 0; i < a.entries.size(); ++i)
            if (!ring.equal(a.entries[i], b.entries[i])) return false;
        return true;
    }
};

// V sends (..., a_{-1}, a_0) to (..., a_{-2}, a_{-1}).
template <class Ring>
Covector<Ring> covector_V(const Covector<Ring>& c) {
    Covector<Ring> r = c;
    if (!r.entries.empty()) r.entries.pop_back();
    return r;
}

template <class Ring>
Covector<Ring> covector_add(const Covector<Ring>& a, const Covector<Ring>& b) {
    size_t m = std::max(a.entries.size(), b.entries.size());
    if (static_cast<int>(m) > a.table->length())
        throw BudgetError("covector support exceeds the law table length");
    auto pad = [&](const Covector<Ring>& c) {
        WittVec<Ring> w = WittVec<Ring>::zero(a.table, a.ring, static_cast<int>(m));
        size_t off = m - c.entries.size();
        for (size_t i = 0; i < c.entries.size(); ++i) w.coords[off + i] = c.entries[i];
        return w;
    };
    auto s = witt_add(pad(a), pad(b));
    Covector<Ring> r{a.table, a.ring, s.coords};
    r.trim();
    return r;
}

// ---------------------------------------------------------------------------
// theta_N : W^N(F_q) -> O/pi^N, the finite shadow of the tilt counit
// sum [r_n] pi^n -> sum r_n^sharp pi^n (q-th roots are trivial on F_q).
// ---------------------------------------------------------------------------

struct ThetaReport {
    bool ok = true;
    bool bijective = true;
    bool additive = true;
    bool multiplicative = true;
    int64_t size = 0;
};

// ---------------------------------------------------------------------------
// Pointwise Witt operations over F_q through the ghost construction itself:
// lift the coordinates to O/pi^{N+2} (any lifts work, by functoriality of
// reduction), combine ghost components, solve back, reduce mod pi. This
// covers lengths where the universal tables are no longer desk-scale.
// ---------------------------------------------------------------------------

enum class WittOp { Add, Mul, Neg };

inline std::vector<FqElem> witt_pointwise(const FieldDescPtr& F, WittOp op,
                                          const std::vector<FqElem>& a, const std::vector<FqElem>& b) {
    int N = static_cast<int>(a.size());
    int P = N + 2;
    auto lift = [&](const std::vector<FqElem>& v) {
        std::vector<TruncElem> out;
        for (auto c : v) out.push_back(TruncElem::teichmuller(F, P, c));
        return out;
    };
    std::function<TruncElem(const TruncElem&)> id = [](const TruncElem& x) { return x; };
    auto ga = ghost_map_generic<TruncElem>(F, P, lift(a), id);
    std::vector<TruncElem> gc(N, TruncElem::zero(F, P));
    if (op == WittOp::Neg) {
        for (int j = 0; j < N; ++j) gc[j] = -ga[j];
    } else {
        auto gb = ghost_map_generic<TruncElem>(F, P, lift(b), id);
        for (int j = 0; j < N; ++j) gc[j] = op == WittOp::Add ? ga[j] + gb[j] : ga[j] * gb[j];
    }
    auto coords = ghost_solve_generic<TruncElem>(F, P, gc, id);
    std::vector<FqElem> out(N);
    for (int j = 0; j < N; ++j) out[j] = coords[j].residue();
    return out;
}

class ThetaCounit {
  public:
    // Universal tables drive the ring checks up to table_threshold; beyond
    // that, the pointwise ghost construction computes the same operations.
    ThetaCounit(FieldDescPtr F, int N, int table_threshold = 6)
        : F_(std::move(F)), N_(N), ring_{F_->rf()} {
        if (N <= table_threshold) table_ = law_polynomials(F_, N, 1);
    }

    TruncElem map(const std::vector<FqElem>& coords) const {
        if (static_cast<int>(coords.size()) != N_) throw Error("theta: wrong length");
        std::vector<FqElem> digits(N_);
        for (int j = 0; j < N_; ++j) {
            FqElem r = coords[j];
            for (int i = 0; i < j; ++i) r = F_->rf()->qth_root(r);
            digits[j] = r;
        }
        return TruncElem::from_digits(F_, digits);
    }

    // Inverse via digit reading (q-th powers reapplied).
    std::vector<FqElem> unmap(const TruncElem& a) const {
        auto digits = a.teichmuller_digits();
        std::vector<FqElem> coords(N_);
        for (int j = 0; j < N_; ++j) {
            FqElem r = digits[j];
            for (int i = 0; i < j; ++i) r = F_->rf()->pow(r, F_->q());
            coords[j] = r;
        }
        return coords;
    }

    const LawTablePtr& table() const { return table_; }

    ThetaReport verify() const {
        ThetaReport rep;
        double size = std::pow(static_cast<double>(F_->q()), N_);
        if (size > 512) throw BudgetError("theta verification is exhaustive-only (|O/pi^N| <= 512)");
        if (!table_ && F_->f() == 1 && F_->mixed()) {
            auto fr = theta_verify_fast(F_, N_);
            rep.ok = fr.ok;
            rep.bijective = fr.bijective;
            rep.additive = fr.additive;
            rep.multiplicative = fr.multiplicative;
            rep.size = fr.size;
            return rep;
        }
        std::vector<std::vector<FqElem>> all;
        std::vector<FqElem> cur(N_, 0);
        int64_t q = F_->q();
        while (true) {
            all.push_back(cur);
            int j = 0;
            while (j < N_ && cur[j] == q - 1) cur[j++] = 0;
            if (j == N_) break;
            cur[j]++;
        }
        rep.size = static_cast<int64_t>(all.size());
        std::set<std::string> images;
        for (const auto& a : all) images.insert(map(a).rep_bytes());
        rep.bijective = images.size() == all.size();
        std::shared_ptr<FastQuotient> fastq;
        if (!table_ && F_->f() == 1 && F_->mixed()) fastq = std::make_shared<FastQuotient>(F_, N_ + 2);
        auto wadd = [&](const std::vector<FqElem>& a, const std::vector<FqElem>& b) {
            if (table_) {
                WittVec<FqCoordRing> u{table_, ring_, a}, v{table_, ring_, b};
                return witt_add(u, v).coords;
            }
            if (fastq) return witt_pointwise_fast(*fastq, FastWittOp::Add, a, b);
            return witt_pointwise(F_, WittOp::Add, a, b);
        };
        auto wmul = [&](const std::vector<FqElem>& a, const std::vector<FqElem>& b) {
            if (table_) {
                WittVec<FqCoordRing> u{table_, ring_, a}, v{table_, ring_, b};
                return witt_mul(u, v).coords;
            }
            if (fastq) return witt_pointwise_fast(*fastq, FastWittOp::Mul, a, b);
            return witt_pointwise(F_, WittOp::Mul, a, b);
        };
        // cache theta values; the double loop reuses them heavily
        std::vector<TruncElem> th;
        th.reserve(all.size());
        for (const auto& a : all) th.push_back(map(a));
        for (size_t i = 0; i < all.size(); ++i) {
            if (unmap(th[i]) != all[i]) rep.bijective = false;
            for (size_t k = i; k < all.size(); ++k) {
                if (!(map(wadd(all[i], all[k])) == th[i] + th[k])) rep.additive = false;
                if (!(map(wmul(all[i], all[k])) == th[i] * th[k])) rep.multiplicative = false;
            }
        }
        rep.ok = rep.bijective && rep.additive && rep.multiplicative;
        return rep;
    }

  private:
    FieldDescPtr F_;
    int N_;
    LawTablePtr table_;
    FqCoordRing ring_;
};

// ---------------------------------------------------------------------------
// specialize_check: for unramified O = Z_p (q = p), the tables must coincide
// with the classical p-typical Witt polynomials from the integer-exact oracle.
// ---------------------------------------------------------------------------

struct SpecializeReport {
    bool ok = true;
    std::string first_mismatch;  // table name, index, monomial
};

inline SpecializeReport specialize_check(const LawTable& table) {
    const auto& F = table.field();
    if (!F->mixed() || F->e() != 1 || F->f() != 1)
        throw Error("specialize_check applies to unramified O = Z_p with q = p");
    int64_t p = F->p();
    int n = table.length(), M = table.precision();
    int64_t pM = detail::pow_ll(p, M);
    auto oracle = classical::p_typical_tables(p, n);
    SpecializeReport rep;
    auto compare = [&](const std::vector<MPoly>& mine, const std::vector<classical::IntPoly>& ref,
                       const char* name) {
        for (int j = 0; j < n && rep.ok; ++j) {
            MPoly refpoly = MPoly::zero(F, M, 2 * n);
            for (const auto& [m, c] : ref[j])
                refpoly.add_term(m, TruncElem::from_integer(F, M, detail::mod_reduce(c, pM)));
            if (refpoly != mine[j]) {
                rep.ok = false;
                auto diff = refpoly - mine[j];
                std::string mono = diff.is_zero() ? "?" : diff.monomial_key(diff.terms().begin()->first, n);
                rep.first_mismatch = std::string(name) + "_" + std::to_string(j) + " at " + mono;
            }
        }
    };
    compare(table.sum(), oracle.S, "S");
    compare(table.product(), oracle.P, "P");
    compare(table.negation(), oracle.N, "N");
    return rep;
}

}  // namespace closefields
