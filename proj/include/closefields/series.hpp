#pragma once

#include <array>
#include <map>
#include <optional>

#include "closefields/local_field.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// Coefficients with bounded negative pi-valuation: value = rep * pi^{-shift},
// rep a TruncElem at its own precision. The value is known modulo
// pi^{known()} where known() = rep.precision() - shift. Multiplication uses
// valuation credits (val(ab) = val a + val b) so knowledge does not decay
// through long products of integral series.
// ---------------------------------------------------------------------------

struct SeriesContext {
    FieldDescPtr F;
    int D;      // total-degree cutoff
    int M;      // target absolute precision for all assertions
    int floor;  // max shift a declared series coefficient may carry
    int Pwork;  // precision at which exact inputs are minted

    static SeriesContext make(FieldDescPtr F, int D, int M, int floor_hint = -1, int pwork_hint = -1) {
        SeriesContext c;
        c.F = std::move(F);
        c.D = D;
        c.M = M;
        int64_t q = c.F->q();
        c.floor = floor_hint >= 0 ? floor_hint : (D <= 1 ? 0 : static_cast<int>((D - 1) / (q - 1)) + 1);
        c.Pwork = pwork_hint >= 0 ? pwork_hint : M + 2 * c.floor + 6;
        int cap = precision_cap(c.F);
        if (c.Pwork > cap) {
            if (pwork_hint >= 0) throw BudgetError("requested working precision exceeds the word range");
            c.Pwork = cap;
        }
        if (c.Pwork < M + c.floor + 2)
            throw BudgetError("cutoff/precision combination leaves no working headroom");
        return c;
    }
};

class ScaledCoeff {
  public:
    ScaledCoeff() = default;
    ScaledCoeff(TruncElem rep, int shift) : rep_(std::move(rep)), shift_(shift) {}

    static ScaledCoeff exact(const SeriesContext& ctx, int64_t v) {
        return ScaledCoeff(TruncElem::from_integer(ctx.F, ctx.Pwork, v), 0);
    }
    static ScaledCoeff exact_elem(const TruncElem& v) { return ScaledCoeff(v, 0); }
    // value = v * pi^{-r}
    static ScaledCoeff pi_shifted(const SeriesContext& ctx, int64_t v, int r) {
        return ScaledCoeff(TruncElem::from_integer(ctx.F, ctx.Pwork, v), r);
    }

    const TruncElem& rep() const { return rep_; }
    int shift() const { return shift_; }
    int known() const { return rep_.precision() - shift_; }
    bool rep_zero() const { return rep_.is_zero(); }
    // Lower bound for the pi-valuation of the value.
    int val_lb() const { return rep_.val() - shift_; }

    ScaledCoeff normalized() const {
        ScaledCoeff c = *this;
        if (!c.rep_zero()) {
            int v = std::min(c.rep_.val(), c.shift_);
            if (v > 0) {
                c.rep_ = c.rep_.div_pi(v);
                c.shift_ -= v;
            }
        }
        return c;
    }

    friend ScaledCoeff coeff_add(const ScaledCoeff& a, const ScaledCoeff& b) {
        int s = std::max(a.shift_, b.shift_);
        int K = std::min(a.known(), b.known());
        int P = std::min(K + s, precision_cap(a.rep_.field()));
        auto align = [&](const ScaledCoeff& c) {
            int delta = s - c.shift_;
            return lift_to(c.rep_, std::max(P - delta, 0)).mul_pi_raise(delta);
        };
        return ScaledCoeff(align(a) + align(b), s).normalized();
    }
    friend ScaledCoeff coeff_neg(const ScaledCoeff& a) { return ScaledCoeff(-a.rep_, a.shift_); }
    friend ScaledCoeff coeff_sub(const ScaledCoeff& a, const ScaledCoeff& b) {
        return coeff_add(a, coeff_neg(b));
    }
    friend ScaledCoeff coeff_mul(const ScaledCoeff& a, const ScaledCoeff& b) {
        // K_c = min(K_a + val b, K_b + val a); rep precision K_c + s_a + s_b,
        // capped to the field's word range.
        int va = a.rep_zero() ? a.known() : a.val_lb();
        int vb = b.rep_zero() ? b.known() : b.val_lb();
        int K = std::min(a.known() + vb, b.known() + va);
        int P = std::min(K + a.shift_ + b.shift_, precision_cap(a.rep_.field()));
        if (P <= 0) return ScaledCoeff(TruncElem::zero(a.rep_.field(), 0), 0);
        TruncElem ra = lift_to(a.rep_, P);
        TruncElem rb = lift_to(b.rep_, P);
        return ScaledCoeff(ra * rb, a.shift_ + b.shift_).normalized();
    }

    // Is the value certified 0 mod pi^m?
    bool zero_mod(int m) const {
        if (known() < m)
            throw PrecisionError("cannot certify a congruence mod pi^" + std::to_string(m) +
                                 ": coefficient only known mod pi^" + std::to_string(known()));
        if (rep_zero()) return true;
        return val_lb() >= m;
    }

    // The value as an integral TruncElem at precision N (requires val >= 0).
    TruncElem integral_value(int N) const {
        if (known() < N) throw PrecisionError("coefficient not known to the requested precision");
        if (rep_zero()) return TruncElem::zero(rep_.field(), N);
        if (val_lb() < 0) throw PrecisionError("coefficient is not integral");
        return rep_.div_pi(shift_).reduce(N);
    }

  private:
    static TruncElem lift_to(const TruncElem& x, int P) {
        if (P <= x.precision()) return x.reduce(P);
        auto d = x.teichmuller_digits();
        d.resize(P, 0);
        return TruncElem::from_digits(x.field(), d);
    }

    TruncElem rep_;
    int shift_ = 0;
};

// ---------------------------------------------------------------------------
// TruncSeries: sparse truncated power series in 1..3 variables with
// ScaledCoeff coefficients, total degree <= ctx.D.
// ---------------------------------------------------------------------------

class TruncSeries {
  public:
    using Key = std::array<uint16_t, 3>;

    TruncSeries() = default;
    TruncSeries(SeriesContext ctx, int nvars) : ctx_(std::move(ctx)), nvars_(nvars) {}

    static TruncSeries zero(const SeriesContext& ctx, int nvars) { return TruncSeries(ctx, nvars); }
    static TruncSeries variable(const SeriesContext& ctx, int nvars, int v) {
        TruncSeries s(ctx, nvars);
        Key k{0, 0, 0};
        k.at(v) = 1;
        s.add_term(k, ScaledCoeff::exact(ctx, 1));
        return s;
    }
    static TruncSeries constant(const SeriesContext& ctx, int nvars, ScaledCoeff c) {
        TruncSeries s(ctx, nvars);
        s.add_term(Key{0, 0, 0}, std::move(c));
        return s;
    }

    const SeriesContext& ctx() const { return ctx_; }
    int nvars() const { return nvars_; }
    const std::map<Key, ScaledCoeff>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    static int total_degree(const Key& k) { return k[0] + k[1] + k[2]; }

    ScaledCoeff coeff(const Key& k) const {
        auto it = terms_.find(k);
        if (it != terms_.end()) return it->second;
        return ScaledCoeff(TruncElem::zero(ctx_.F, ctx_.Pwork), 0);
    }
    ScaledCoeff coeff1(int deg) const { return coeff(Key{static_cast<uint16_t>(deg), 0, 0}); }

    void add_term(const Key& k, ScaledCoeff c) {
        if (total_degree(k) > ctx_.D) return;  // beyond the cutoff
        auto it = terms_.find(k);
        ScaledCoeff acc = it == terms_.end() ? c.normalized() : coeff_add(it->second, c);
        if (acc.rep_zero()) {
            if (acc.known() < ctx_.M)
                throw PrecisionError("series coefficient dropped below target precision");
            if (it != terms_.end()) terms_.erase(it);
            return;
        }
        if (acc.known() < ctx_.M) throw PrecisionError("series working precision exhausted");
        if (it == terms_.end())
            terms_.emplace(k, std::move(acc));
        else
            it->second = std::move(acc);
    }

    TruncSeries operator+(const TruncSeries& o) const {
        check(o);
        TruncSeries r = *this;
        for (const auto& [k, c] : o.terms_) r.add_term(k, c);
        return r;
    }
    TruncSeries operator-() const {
        TruncSeries r(ctx_, nvars_);
        for (const auto& [k, c] : terms_) r.terms_.emplace(k, coeff_neg(c));
        return r;
    }
    TruncSeries operator-(const TruncSeries& o) const { return *this + (-o); }
    TruncSeries operator*(const TruncSeries& o) const {
        check(o);
        TruncSeries r(ctx_, nvars_);
        for (const auto& [ka, ca] : terms_)
            for (const auto& [kb, cb] : o.terms_) {
                Key k{static_cast<uint16_t>(ka[0] + kb[0]), static_cast<uint16_t>(ka[1] + kb[1]),
                      static_cast<uint16_t>(ka[2] + kb[2])};
                if (total_degree(k) > ctx_.D) continue;
                r.add_term(k, coeff_mul(ca, cb));
            }
        return r;
    }
    TruncSeries scale(const ScaledCoeff& c) const {
        TruncSeries r(ctx_, nvars_);
        for (const auto& [k, a] : terms_) r.add_term(k, coeff_mul(a, c));
        return r;
    }
    TruncSeries pow(int64_t e) const {
        TruncSeries acc = constant(ctx_, nvars_, ScaledCoeff::exact(ctx_, 1));
        TruncSeries base = *this;
        while (e) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    bool has_constant_term() const {
        auto it = terms_.find(Key{0, 0, 0});
        return it != terms_.end() && !it->second.zero_mod(ctx_.M);
    }

    // Substitute args[v] (in a common target variable space, no constant
    // terms) for the variables of this series.
    TruncSeries substitute(const std::vector<TruncSeries>& args) const {
        if (static_cast<int>(args.size()) != nvars_) throw Error("substitute: arity mismatch");
        for (const auto& a : args)
            if (a.has_constant_term()) throw Error("substitute: argument has a constant term");
        int tnv = args.empty() ? nvars_ : args[0].nvars_;
        // memoized powers of each argument
        std::vector<std::vector<TruncSeries>> pows(args.size());
        auto arg_pow = [&](int v, int e) -> const TruncSeries& {
            auto& pv = pows[v];
            if (pv.empty()) {
                pv.push_back(constant(ctx_, tnv, ScaledCoeff::exact(ctx_, 1)));
                pv.push_back(args[v]);
            }
            while (static_cast<int>(pv.size()) <= e) pv.push_back(pv.back() * args[v]);
            return pv[e];
        };
        TruncSeries r(ctx_, tnv);
        for (const auto& [k, c] : terms_) {
            TruncSeries t = constant(ctx_, tnv, c);
            for (int v = 0; v < nvars_; ++v)
                if (k[v]) t = t * arg_pow(v, k[v]);
            r = r + t;
        }
        return r;
    }

    // Compositional inverse of a 1-variable series with linear coefficient 1
    // and no constant term: solve degree by degree.
    TruncSeries reversion() const {
        if (nvars_ != 1) throw Error("reversion needs a 1-variable series");
        if (has_constant_term()) throw Error("reversion: nonzero constant term");
        ScaledCoeff lin = coeff1(1);
        if (!coeff_sub(lin, ScaledCoeff::exact(ctx_, 1)).zero_mod(ctx_.M))
            throw Error("reversion requires linear coefficient 1");
        TruncSeries E = variable(ctx_, 1, 0);
        for (int k = 2; k <= ctx_.D; ++k) {
            TruncSeries comp = substitute({E});
            ScaledCoeff sk = comp.coeff1(k);
            if (sk.rep_zero()) continue;
            Key key{static_cast<uint16_t>(k), 0, 0};
            E.add_term(key, coeff_neg(sk));
        }
        return E;
    }

    // min over coefficients of the valuation lower bound (the v_min field).
    int v_min() const {
        int v = ctx_.Pwork;
        for (const auto& [k, c] : terms_) v = std::min(v, c.rep_zero() ? c.known() : c.val_lb());
        return v;
    }
    bool is_integral() const { return v_min() >= 0; }

    // Enforce the declared-series contracts: integrality and the shift floor.
    const TruncSeries& assert_integral(const std::string& what) const {
        for (const auto& [k, c] : terms_) {
            if (!c.rep_zero() && c.val_lb() < 0)
                throw VerifyError(what + ": coefficient at degree " + std::to_string(total_degree(k)) +
                                  " has negative valuation " + std::to_string(c.val_lb()));
        }
        return *this;
    }
    const TruncSeries& enforce_floor(const std::string& what) const {
        for (const auto& [k, c] : terms_) {
            auto n = c.normalized();
            if (n.shift() > ctx_.floor)
                throw PrecisionError(what + ": coefficient shift " + std::to_string(n.shift()) +
                                     " breaches the valuation floor " + std::to_string(ctx_.floor));
        }
        return *this;
    }

    // Equality of all coefficients mod pi^m up to the cutoff.
    bool equal_mod(const TruncSeries& o, int m) const {
        check(o);
        for (const auto& [k, c] : terms_)
            if (!coeff_sub(c, o.coeff(k)).zero_mod(m)) return false;
        for (const auto& [k, c] : o.terms_)
            if (!terms_.count(k) && !c.zero_mod(m)) return false;
        return true;
    }

    // Integral series as a dense polynomial (coefficient list) at precision N.
    std::vector<TruncElem> dense_poly(int N) const {
        if (nvars_ != 1) throw Error("dense_poly needs a 1-variable series");
        std::vector<TruncElem> out(ctx_.D + 1, TruncElem::zero(ctx_.F, N));
        for (const auto& [k, c] : terms_) out[k[0]] = c.integral_value(N);
        return out;
    }

  private:
    void check(const TruncSeries& o) const {
        if (nvars_ != o.nvars_ || ctx_.D != o.ctx_.D) throw Error("series operand mismatch");
    }

    SeriesContext ctx_;
    int nvars_ = 0;
    std::map<Key, ScaledCoeff> terms_;
};

}  // namespace closefields
