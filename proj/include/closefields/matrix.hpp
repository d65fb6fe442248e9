#pragma once

#include <sstream>

#include "closefields/local_field.hpp"

namespace closefields {

// Square matrix over O/pi^N with uniform field and precision.
class Mat {
  public:
    Mat() = default;
    Mat(FieldDescPtr F, int r, int N)
        : F_(std::move(F)), r_(r), N_(N), a_(r * r, TruncElem::zero(F_, N)) {}

    static Mat identity(FieldDescPtr F, int r, int N) {
        Mat m(std::move(F), r, N);
        for (int i = 0; i < r; ++i) m.at(i, i) = TruncElem::one(m.F_, N);
        return m;
    }

    const FieldDescPtr& field() const { return F_; }
    int rank() const { return r_; }
    int precision() const { return N_; }

    TruncElem& at(int i, int j) { return a_[i * r_ + j]; }
    const TruncElem& at(int i, int j) const { return a_[i * r_ + j]; }

    Mat operator*(const Mat& o) const {
        int N2 = std::min(N_, o.N_);
        Mat x = reduce(N2), y = o.reduce(N2);
        Mat m(F_, r_, N2);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < r_; ++j) {
                TruncElem s = TruncElem::zero(F_, N2);
                for (int k = 0; k < r_; ++k) s = s + x.at(i, k) * y.at(k, j);
                m.at(i, j) = s;
            }
        return m;
    }

    Mat reduce(int N2) const {
        if (N2 == N_) return *this;
        Mat out(F_, r_, N2);
        for (int i = 0; i < r_ * r_; ++i) out.a_[i] = a_[i].reduce(N2);
        return out;
    }

    // Digit-padded lift to a higher precision (any lift of each entry works
    // for the coset computations that call this).
    Mat lift(int N2) const {
        if (N2 <= N_) return reduce(N2);
        Mat m(F_, r_, N2);
        for (int i = 0; i < r_ * r_; ++i) {
            auto d = a_[i].teichmuller_digits();
            d.resize(N2, 0);
            m.a_[i] = TruncElem::from_digits(F_, d);
        }
        return m;
    }

    TruncElem det() const {
        if (r_ == 1) return a_[0];
        if (r_ == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        TruncElem s = TruncElem::zero(F_, N_);
        for (int j = 0; j < r_; ++j) {
            Mat minor = drop_row_col(0, j);
            TruncElem t = at(0, j) * minor.det();
            s = (j % 2 == 0) ? s + t : s - t;
        }
        return s;
    }

    // Inverse of an element of GL_r(O/pi^N) (unit determinant required).
    Mat unit_inverse() const {
        TruncElem d = det();
        if (d.val() != 0) throw FieldError("unit_inverse: determinant is not a unit");
        TruncElem di = d.inv();
        Mat inv(F_, r_, N_);
        if (r_ == 1) {
            inv.at(0, 0) = di;
            return inv;
        }
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < r_; ++j) {
                TruncElem c = drop_row_col(i, j).det();
                inv.at(j, i) = (((i + j) % 2 == 0) ? c : -c) * di;
            }
        return inv;
    }

    bool operator==(const Mat& o) const { return N_ == o.N_ && a_ == o.a_; }
    bool operator!=(const Mat& o) const { return !(*this == o); }

    // Deterministic digit serialization, row-major.
    std::string digit_string() const {
        std::ostringstream os;
        for (int i = 0; i < r_; ++i) {
            if (i) os << ";";
            for (int j = 0; j < r_; ++j) {
                if (j) os << ",";
                bool first = true;
                for (auto d : at(i, j).teichmuller_digits()) {
                    if (!first) os << ".";
                    first = false;
                    os << d;
                }
            }
        }
        return os.str();
    }

    // Digit-lex comparison, entries in row-major order.
    int compare(const Mat& o) const {
        for (int i = 0; i < r_ * r_; ++i) {
            int c = a_[i].compare(o.a_[i]);
            if (c) return c;
        }
        return 0;
    }

    int min_val() const {
        int v = N_;
        for (const auto& x : a_) v = std::min(v, x.val());
        return v;
    }

    Mat div_pi_all(int k) const {
        Mat m(F_, r_, N_ - k);
        for (int i = 0; i < r_ * r_; ++i) m.a_[i] = a_[i].div_pi(k);
        return m;
    }

  private:
    Mat drop_row_col(int i0, int j0) const {
        Mat minor(F_, r_ - 1, N_);
        int rr = 0;
        for (int i = 0; i < r_; ++i) {
            if (i == i0) continue;
            int cc = 0;
            for (int j = 0; j < r_; ++j) {
                if (j == j0) continue;
                minor.at(rr, cc++) = at(i, j);
            }
            ++rr;
        }
        return minor;
    }

    FieldDescPtr F_;
    int r_ = 0;
    int N_ = 0;
    std::vector<TruncElem> a_;
};

// ---------------------------------------------------------------------------
// Smith normal form over the local ring at finite precision: M = U D V with
// U, V in GL_r(O) and D = diag(pi^{d_0}, ...), d ascending. Pivot = a
// minimal-valuation entry of the remaining block; each pivot of valuation v
// costs 2v of working precision (one v for the exact multiplier division,
// one for the transform bookkeeping), tracked by uniform shrinking.
// ---------------------------------------------------------------------------

struct SnfResult {
    Mat U, V;               // M = U * diag(pi^d) * V at out_precision
    std::vector<int> d;     // ascending elementary divisor exponents
    int out_precision = 0;
};

inline SnfResult snf_decompose(const Mat& Min) {
    const auto& F = Min.field();
    int r = Min.rank();
    Mat A = Min;
    Mat K1 = Mat::identity(F, r, Min.precision());
    Mat K2 = Mat::identity(F, r, Min.precision());
    std::vector<int> d;
    for (int s = 0; s < r; ++s) {
        int P = A.precision();
        int bi = -1, bj = -1, bv = P;
        for (int i = s; i < r; ++i)
            for (int j = s; j < r; ++j)
                if (A.at(i, j).val() < bv) {
                    bv = A.at(i, j).val();
                    bi = i;
                    bj = j;
                }
        if (bi < 0)
            throw PrecisionError("snf: cannot certify a pivot at precision " + std::to_string(P) +
                                 "; precision escalation requested");
        if (bi != s)
            for (int j = 0; j < r; ++j) {
                std::swap(A.at(bi, j), A.at(s, j));
                std::swap(K1.at(j, bi), K1.at(j, s));
            }
        if (bj != s)
            for (int i = 0; i < r; ++i) {
                std::swap(A.at(i, bj), A.at(i, s));
                std::swap(K2.at(bj, i), K2.at(s, i));
            }
        int Pq = P - bv;  // precision of the exact unit multipliers
        TruncElem piv_unit_inv = A.at(s, s).div_pi(bv).inv();  // at Pq
        // rows below: row_i -= q_i row_s; K1 col_s += q_i K1 col_i
        for (int i = s + 1; i < r; ++i) {
            TruncElem q = A.at(i, s).div_pi(bv) * piv_unit_inv;  // integral, at Pq
            for (int j = s; j < r; ++j) {
                // all block entries have val >= bv, so the product keeps
                // full precision P via the valuation credit
                TruncElem delta = (q * A.at(s, j).div_pi(bv)).mul_pi_raise(bv).reduce(P);
                A.at(i, j) = A.at(i, j) - delta;
            }
            for (int j = 0; j < r; ++j) {
                TruncElem delta = q * K1.at(j, i).reduce(Pq);
                K1.at(j, s) = K1.at(j, s).reduce(Pq) + delta;
                K1.at(j, s) = K1.at(j, s).lift(P);  // placeholder lift; shrunk below
            }
        }
        // columns rightward: col_j -= q_j col_s; K2 row_s += q_j K2 row_j
        for (int j = s + 1; j < r; ++j) {
            TruncElem q = A.at(s, j).div_pi(bv) * piv_unit_inv;
            for (int i = s; i < r; ++i) {
                TruncElem delta = (q * A.at(i, s).div_pi(bv)).mul_pi_raise(bv).reduce(P);
                A.at(i, j) = A.at(i, j) - delta;
            }
            for (int i = 0; i < r; ++i) {
                TruncElem delta = q * K2.at(j, i).reduce(Pq);
                K2.at(s, i) = K2.at(s, i).reduce(Pq) + delta;
                K2.at(s, i) = K2.at(s, i).lift(P);
            }
        }
        // normalize the pivot row: row_s *= piv_unit_inv, K1 col_s *= piv_unit
        TruncElem piv_unit = A.at(s, s).div_pi(bv);
        for (int j = s; j < r; ++j)
            A.at(s, j) = (A.at(s, j).div_pi(bv) * piv_unit_inv).mul_pi_raise(bv).reduce(P);
        for (int j = 0; j < r; ++j) {
            K1.at(j, s) = (K1.at(j, s).reduce(Pq) * piv_unit).lift(P);
        }
        d.push_back(bv);
        // uniform precision accounting: 2 bv per pivot
        int Pnext = P - 2 * bv;
        if (Pnext <= 0)
            throw PrecisionError("snf: working precision exhausted; precision escalation requested");
        A = A.reduce(Pnext);
        K1 = K1.reduce(Pnext);
        K2 = K2.reduce(Pnext);
    }
    SnfResult res;
    res.U = K1;
    res.V = K2;
    res.d = std::move(d);
    res.out_precision = A.precision();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            TruncElem want = TruncElem::zero(F, res.out_precision);
            if (i == j && res.d[i] < res.out_precision)
                want = TruncElem::pi(F, res.out_precision).pow(res.d[i]);
            if (A.at(i, j) != want) throw Error("snf: reduction did not reach diagonal form");
        }
    return res;
}

// ---------------------------------------------------------------------------
// Canonical Hermite form of the column lattice M O^r of an invertible matrix:
// a lower-triangular basis with diagonal pi^{a_i}, zeros above the diagonal,
// and below-diagonal entries canonically reduced mod the row pivot pi^{a_i}.
// Unique per lattice, so it is a lattice label.
// ---------------------------------------------------------------------------

struct ColHnf {
    std::vector<int> pivots;
    Mat basis;

    // Canonical serialization: pivots plus below-diagonal digits truncated to
    // the row pivot length (precision-independent).
    std::string label() const {
        std::ostringstream os;
        int r = basis.rank();
        for (int i = 0; i < r; ++i) {
            os << "a" << pivots[i] << ":";
            for (int j = 0; j < i; ++j) {
                auto dd = basis.at(i, j).teichmuller_digits();
                for (int k = 0; k < pivots[i] && k < static_cast<int>(dd.size()); ++k)
                    os << dd[k] << ".";
                os << ",";
            }
            os << ";";
        }
        return os.str();
    }
};

inline ColHnf col_lattice_hnf(const Mat& Min) {
    const auto& F = Min.field();
    int r = Min.rank();
    Mat B = Min;
    std::vector<int> piv(r, 0);
    for (int row = 0; row < r; ++row) {
        int P = B.precision();
        int bj = -1, bv = P;
        for (int j = row; j < r; ++j)
            if (B.at(row, j).val() < bv) {
                bv = B.at(row, j).val();
                bj = j;
            }
        if (bj < 0) throw PrecisionError("hnf: cannot certify a pivot; precision escalation requested");
        piv[row] = bv;
        if (bj != row)
            for (int i = 0; i < r; ++i) std::swap(B.at(i, bj), B.at(i, row));
        int Pq = P - bv;
        TruncElem u_inv = B.at(row, row).div_pi(bv).inv();  // at Pq
        for (int i = 0; i < r; ++i) B.at(i, row) = (B.at(i, row).reduce(Pq) * u_inv).lift(P);
        B.at(row, row) = bv < P ? TruncElem::pi(F, P).pow(bv) : TruncElem::zero(F, P);
        for (int j = row + 1; j < r; ++j) {
            TruncElem q = B.at(row, j).div_pi(bv).reduce(Pq);  // val >= bv in this row
            for (int i = 0; i < r; ++i) {
                TruncElem delta = (q * B.at(i, row).reduce(Pq)).lift(P);
                B.at(i, j) = B.at(i, j) - delta;
            }
            B.at(row, j) = TruncElem::zero(F, P);  // exact by construction mod pi^Pq... enforced below
        }
        int Pnext = P - bv;
        if (Pnext <= 0) throw PrecisionError("hnf: working precision exhausted");
        B = B.reduce(Pnext);
    }
    // canonical below-diagonal reduction
    for (int j = 0; j < r; ++j)
        for (int i = j + 1; i < r; ++i) {
            int ai = piv[i];
            int P = B.precision();
            if (ai > P) throw PrecisionError("hnf: insufficient precision for canonical reduction");
            TruncElem rem = B.at(i, j).reduce(ai).lift(P);
            TruncElem q = (B.at(i, j) - rem).div_pi(ai);  // at P - ai
            for (int k = i; k < r; ++k) {
                TruncElem delta = (q * B.at(k, i).reduce(P - ai)).mul_pi_raise(ai).reduce(P);
                B.at(k, j) = B.at(k, j) - delta;
            }
        }
    ColHnf out;
    out.pivots = std::move(piv);
    out.basis = B;
    return out;
}

}  // namespace closefields
