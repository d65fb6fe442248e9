#pragma once

#include <map>
#include <sstream>

#include "closefields/local_field.hpp"

namespace closefields {

// Sparse multivariate polynomial with TruncElem coefficients, all sharing one
// (field, precision). Monomial keys are fixed-length exponent vectors, so map
// ordering is deterministic.
class MPoly {
  public:
    using Monomial = std::vector<uint16_t>;

    MPoly() = default;
    MPoly(FieldDescPtr F, int N, int nvars) : F_(std::move(F)), N_(N), nvars_(nvars) {}

    static MPoly zero(FieldDescPtr F, int N, int nvars) { return MPoly(std::move(F), N, nvars); }
    static MPoly constant(FieldDescPtr F, int N, int nvars, TruncElem c) {
        MPoly p(F, N, nvars);
        p.add_term(Monomial(nvars, 0), std::move(c));
        return p;
    }
    static MPoly variable(FieldDescPtr F, int N, int nvars, int v) {
        MPoly p(F, N, nvars);
        Monomial m(nvars, 0);
        m.at(v) = 1;
        p.add_term(m, TruncElem::one(p.F_, N));
        return p;
    }

    const FieldDescPtr& field() const { return F_; }
    int precision() const { return N_; }
    int nvars() const { return nvars_; }
    const std::map<Monomial, TruncElem>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Monomial& m, TruncElem c) {
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, std::move(c));
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    MPoly operator+(const MPoly& o) const {
        check(o);
        MPoly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }
    MPoly operator-() const {
        MPoly r(F_, N_, nvars_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
        return r;
    }
    MPoly operator-(const MPoly& o) const { return *this + (-o); }
    MPoly operator*(const MPoly& o) const {
        check(o);
        MPoly r(F_, N_, nvars_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) {
                Monomial m(nvars_);
                for (int i = 0; i < nvars_; ++i) m[i] = static_cast<uint16_t>(ma[i] + mb[i]);
                r.add_term(m, ca * cb);
            }
        return r;
    }
    MPoly scale(const TruncElem& c) const {
        MPoly r(F_, N_, nvars_);
        for (const auto& [m, a] : terms_) r.add_term(m, a * c);
        return r;
    }
    MPoly pow(int64_t k) const {
        MPoly acc = constant(F_, N_, nvars_, TruncElem::one(F_, N_));
        MPoly base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    // Minimum coefficient valuation (N_ when zero).
    int min_val() const {
        int v = N_;
        for (const auto& [m, c] : terms_) v = std::min(v, c.val());
        return v;
    }

    // Exact coefficientwise division by pi^k; lowers precision by k.
    MPoly div_pi(int k) const {
        MPoly r(F_, N_ - k, nvars_);
        for (const auto& [m, c] : terms_) {
            if (c.val() < k)
                throw Error("non-exact division by pi^" + std::to_string(k) +
                            " in polynomial coefficient (valuation " + std::to_string(c.val()) + ")");
            r.add_term(m, c.div_pi(k));
        }
        return r;
    }
    // pi^k * (lift), raising precision by k.
    MPoly mul_pi_raise(int k) const {
        MPoly r(F_, N_ + k, nvars_);
        for (const auto& [m, c] : terms_) r.add_term(m, c.mul_pi_raise(k));
        return r;
    }
    MPoly reduce(int N2) const {
        MPoly r(F_, N2, nvars_);
        for (const auto& [m, c] : terms_) r.add_term(m, c.reduce(N2));
        return r;
    }

    // Substitute polynomials for the variables (args.size() == nvars, all in a
    // common target variable space).
    MPoly substitute(const std::vector<MPoly>& args) const {
        if (args.size() != static_cast<size_t>(nvars_)) throw Error("substitute: arity mismatch");
        int tv = args.empty() ? nvars_ : args[0].nvars_;
        MPoly r(F_, N_, tv);
        for (const auto& [m, c] : terms_) {
            MPoly t = MPoly::constant(F_, N_, tv, c);
            for (int v = 0; v < nvars_; ++v)
                if (m[v]) t = t * args[v].pow(m[v]);
            r = r + t;
        }
        return r;
    }

    // Evaluate into a coordinate ring R via its from_table_coeff map.
    template <class Ring>
    typename Ring::Elem eval(const Ring& ring, const std::vector<typename Ring::Elem>& coords) const {
        if (coords.size() != static_cast<size_t>(nvars_)) throw Error("eval: arity mismatch");
        auto acc = ring.zero();
        for (const auto& [m, c] : terms_) {
            auto t = ring.from_table_coeff(c);
            for (int v = 0; v < nvars_; ++v)
                for (int k = 0; k < m[v]; ++k) t = ring.mul(t, coords[v]);
            acc = ring.add(acc, t);
        }
        return acc;
    }

    bool operator==(const MPoly& o) const {
        return N_ == o.N_ && nvars_ == o.nvars_ && terms_ == o.terms_;
    }
    bool operator!=(const MPoly& o) const { return !(*this == o); }

    // "X_0^2 Y_1 : [digits]" style dump keyed for JSON output.
    std::string monomial_key(const Monomial& m, int split_at) const {
        std::ostringstream os;
        bool first = true;
        for (int v = 0; v < nvars_; ++v) {
            if (!m[v]) continue;
            if (!first) os << "*";
            first = false;
            if (split_at > 0)
                os << (v < split_at ? "X" : "Y") << (v < split_at ? v : v - split_at);
            else
                os << "T" << v;
            if (m[v] > 1) os << "^" << m[v];
        }
        if (first) os << "1";
        return os.str();
    }

  private:
    void check(const MPoly& o) const {
        if (nvars_ != o.nvars_ || N_ != o.N_) throw Error("MPoly operand mismatch");
    }

    FieldDescPtr F_;
    int N_ = 0;
    int nvars_ = 0;
    std::map<Monomial, TruncElem> terms_;
};

}  // namespace closefields
