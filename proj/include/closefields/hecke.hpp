#pragma once

#include <deque>
#include <set>

#include "closefields/matrix.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// GrpElt: an element of GL_r(E) as pi^{-m} * (integral matrix), m minimal.
// ---------------------------------------------------------------------------

struct GrpElt {
    FieldDescPtr F;
    int r = 0;
    int m = 0;  // denominator exponent
    Mat mat;    // integral part, at its working precision

    static GrpElt identity(FieldDescPtr F, int r, int N) {
        GrpElt g{F, r, 0, Mat::identity(F, r, N)};
        return g;
    }
    // nabla(nu) = diag(pi^{nu_1},...,pi^{nu_r}), nu dominant (descending).
    static GrpElt nabla(FieldDescPtr F, int r, const std::vector<int>& nu, int N) {
        if (static_cast<int>(nu.size()) != r) throw Error("nabla: wrong length");
        for (size_t i = 0; i + 1 < nu.size(); ++i)
            if (nu[i] < nu[i + 1]) throw Error("nabla: nu must be dominant (descending)");
        int m = std::max(0, -nu.back());
        Mat mat(F, r, N);
        for (int i = 0; i < r; ++i) mat.at(i, i) = TruncElem::pi(F, N).pow(nu[i] + m);
        return GrpElt{std::move(F), r, m, std::move(mat)};
    }

    GrpElt normalized() const {
        GrpElt g = *this;
        int v = std::min(g.mat.min_val(), g.m);
        if (v > 0) {
            g.mat = g.mat.div_pi_all(v);
            g.m -= v;
        }
        return g;
    }

    GrpElt operator*(const GrpElt& o) const {
        GrpElt g{F, r, m + o.m, mat * o.mat};
        return g.normalized();
    }

    // g^{-1} = pi^{m} adj(mat) u^{-1} pi^{-k} where det(mat) = u pi^k.
    GrpElt inverse() const {
        TruncElem d = mat.det();
        int k = d.val();
        if (k >= mat.precision()) throw PrecisionError("inverse: determinant valuation uncertified");
        TruncElem uinv = d.div_pi(k).inv();
        int P2 = mat.precision() - k;
        Mat adj(F, r, P2);
        if (r == 1) {
            adj.at(0, 0) = TruncElem::one(F, P2);
        } else {
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) {
                    Mat minor(F, r - 1, P2);
                    int rr = 0;
                    for (int x = 0; x < r; ++x) {
                        if (x == i) continue;
                        int cc = 0;
                        for (int y = 0; y < r; ++y) {
                            if (y == j) continue;
                            minor.at(rr, cc++) = mat.at(x, y).reduce(P2);
                        }
                        ++rr;
                    }
                    TruncElem c = minor.det();
                    adj.at(j, i) = ((i + j) % 2 == 0) ? c : -c;
                }
        }
        Mat inv_mat(F, r, P2);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) inv_mat.at(i, j) = adj.at(i, j) * uinv;
        // g^{-1} = pi^{-(k - m)} * inv_mat
        GrpElt g{F, r, k - m, inv_mat};
        if (g.m < 0) {
            // value is integral times a positive pi power
            g.mat = Mat(F, r, P2);
            Mat scaled(F, r, P2);
            int shift = -g.m;
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    scaled.at(i, j) = inv_mat.at(i, j).reduce(P2 - shift).mul_pi_raise(shift);
            g.mat = scaled;
            g.m = 0;
        }
        return g.normalized();
    }
};

// ---------------------------------------------------------------------------
// Canonical double cosets at level n (n = 0 carries only nu).
// ---------------------------------------------------------------------------

struct DoubleCoset {
    std::vector<int> nu;
    Mat k1, k2;       // canonical pair at precision n (unused when n = 0)
    std::string key;  // deterministic ordering/identity

    bool operator<(const DoubleCoset& o) const { return key < o.key; }
    bool operator==(const DoubleCoset& o) const { return key == o.key; }
};

struct HeckeElem {
    int level = 0;
    std::map<DoubleCoset, int64_t> support;

    void add(const DoubleCoset& d, int64_t c) {
        if (c == 0) return;
        auto it = support.find(d);
        if (it == support.end()) {
            support.emplace(d, c);
        } else {
            it->second += c;
            if (it->second == 0) support.erase(it);
        }
    }
    bool operator==(const HeckeElem& o) const { return level == o.level && support == o.support; }
};

// ---------------------------------------------------------------------------
// HeckeContext: level-n double coset machinery for GL_r(E), with caches.
// Same generic code serves both field kinds; nothing is shared across
// contexts, so cross-field comparisons stay independent experiments.
// ---------------------------------------------------------------------------

class HeckeContext {
  public:
    HeckeContext(FieldDescPtr F, int r, int n, int64_t budget = 1000000)
        : F_(std::move(F)), r_(r), n_(n), budget_(budget) {
        if (r < 1 || r > 3) throw BudgetError("rank outside the supported range r <= 3");
        if (n < 0) throw Error("negative level");
    }

    const FieldDescPtr& field() const { return F_; }
    int rank() const { return r_; }
    int level() const { return n_; }

    static int max_abs(const std::vector<int>& nu) {
        int a = 0;
        for (int x : nu) a = std::max(a, std::abs(x));
        return a;
    }
    // Working precision from the spec: N(nu, n) = n + 2 max|nu_j|.
    int working_precision(const std::vector<int>& nu) const { return n_ + 2 * max_abs(nu); }
    // Carry precision with margin for SNF certification and label reduction.
    int carry_precision(int nu_abs_bound) const { return n_ + (2 * r_ + 2) * nu_abs_bound + 2; }

    // |GL_r(O/pi^N)| for budget messages.
    static double group_order(int64_t q, int r, int N) {
        double o = std::pow(static_cast<double>(q), static_cast<double>(r) * r * (N - 1));
        for (int k = 0; k < r; ++k)
            o *= std::pow(static_cast<double>(q), r) - std::pow(static_cast<double>(q), k);
        return o;
    }

    // ---- left cosets -------------------------------------------------------

    // Canonical label of the left coset g K^n: the scale m, the column
    // lattice pivots, and the columns reduced mod pi^n * (column lattice).
    // For n = 0 the label is the lattice itself.
    std::string left_label(const GrpElt& gin) const {
        GrpElt g = gin.normalized();
        ColHnf H = col_lattice_hnf(g.mat);
        std::ostringstream os;
        os << "m" << g.m << "#" << H.label() << "#";
        if (n_ == 0) return os.str();
        Mat M = g.mat;
        int cur = std::min(M.precision(), H.basis.precision());
        M = M.reduce(cur);
        for (int col = 0; col < r_; ++col) {
            // reduce the column modulo pi^n * lattice, top row down; the
            // lattice basis vector w_i = pi^n B(:, i) has pivot pi^{n + a_i}
            std::vector<TruncElem> v;
            for (int i = 0; i < r_; ++i) v.push_back(M.at(i, col));
            int curc = cur;
            for (int i = 0; i < r_; ++i) {
                int ai = H.pivots[i];
                int cut = n_ + ai;
                if (curc < cut + 1)
                    throw PrecisionError("left_label: insufficient precision; escalation requested");
                TruncElem rem = v[i].reduce(std::min(cut, curc)).lift(curc);
                TruncElem q = (v[i] - rem).div_pi(cut);  // at curc - cut
                v[i] = rem;
                for (int k = i + 1; k < r_; ++k) {
                    TruncElem delta = (q * H.basis.at(k, i).reduce(curc - cut)).mul_pi_raise(n_);
                    v[k] = v[k].reduce(curc - ai) - delta.reduce(curc - ai);
                }
                curc -= ai;
            }
            for (int i = 0; i < r_; ++i) {
                int cut = n_ + H.pivots[i];
                if (curc < cut)
                    throw PrecisionError("left_label: digits below cut; escalation requested");
                auto dd = v[i].reduce(cut).teichmuller_digits();
                for (int t = 0; t < cut; ++t) os << dd[t] << ".";
                os << ",";
            }
            os << "|";
        }
        return os.str();
    }

    // ---- Cartan and canonical double cosets --------------------------------

    struct CartanResult {
        std::vector<int> nu;  // dominant
        Mat k1, k2;           // at the SNF output precision
        int out_precision = 0;
    };

    CartanResult cartan_decompose(const GrpElt& gin) const {
        GrpElt g = gin.normalized();
        auto S = snf_decompose(g.mat);
        CartanResult res;
        res.out_precision = S.out_precision;
        res.nu.resize(r_);
        for (int i = 0; i < r_; ++i) res.nu[i] = S.d[r_ - 1 - i] - g.m;
        // reverse the diagonal: k1 = U P, k2 = P V with P the reversal
        Mat k1(F_, r_, S.out_precision), k2(F_, r_, S.out_precision);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < r_; ++j) {
                k1.at(i, j) = S.U.at(i, r_ - 1 - j);
                k2.at(i, j) = S.V.at(r_ - 1 - i, j);
            }
        res.k1 = std::move(k1);
        res.k2 = std::move(k2);
        return res;
    }

    DoubleCoset canonical_double_coset(const GrpElt& g) {
        auto C = cartan_decompose(g);
        DoubleCoset d;
        d.nu = C.nu;
        if (n_ == 0) {
            d.key = nu_key(C.nu);
            return d;
        }
        if (C.out_precision < n_)
            throw PrecisionError("canonical_double_coset: pair not certified at level n; escalation requested");
        Mat k1 = C.k1.reduce(n_), k2 = C.k2.reduce(n_);
        auto raw = nu_key(C.nu) + "?" + pair_string(k1, k2);
        auto it = pair_canon_cache_.find(raw);
        if (it != pair_canon_cache_.end()) return it->second;
        canonicalize_pair(d, k1, k2);
        pair_canon_cache_.emplace(raw, d);
        return d;
    }

    DoubleCoset coset_of_nabla(const std::vector<int>& nu) {
        DoubleCoset d;
        d.nu = nu;
        if (n_ == 0) {
            d.key = nu_key(nu);
            return d;
        }
        canonicalize_pair(d, Mat::identity(F_, r_, n_), Mat::identity(F_, r_, n_));
        return d;
    }

    DoubleCoset identity_coset() { return coset_of_nabla(std::vector<int>(r_, 0)); }

    // A group element representing the double coset, at carry precision W.
    GrpElt representative(const DoubleCoset& d, int W) const {
        GrpElt nb = GrpElt::nabla(F_, r_, d.nu, W);
        if (n_ == 0) return nb;
        GrpElt a{F_, r_, 0, d.k1.lift(W)};
        GrpElt b{F_, r_, 0, d.k2.lift(W)};
        return a * nb * b;
    }

    // ---- enumeration -------------------------------------------------------

    // Complete, duplicate-free left-coset representatives of K^n d K^n / K^n.
    const std::vector<GrpElt>& left_cosets(const DoubleCoset& d, int W) {
        auto key = d.key + "@" + std::to_string(W);
        auto it = leftcoset_cache_.find(key);
        if (it != leftcoset_cache_.end()) return it->second;
        std::vector<GrpElt> reps;
        std::set<std::string> seen;
        std::deque<GrpElt> queue;
        GrpElt g0 = representative(d, W);
        seen.insert(left_label(g0));
        queue.push_back(g0);
        reps.push_back(g0);
        const auto& gens = group_generators(W);
        while (!queue.empty()) {
            GrpElt g = queue.front();
            queue.pop_front();
            for (const auto& gen : gens) {
                GrpElt h = gen * g;
                auto lbl = left_label(h);
                if (seen.insert(lbl).second) {
                    reps.push_back(h);
                    queue.push_back(h);
                    if (static_cast<int64_t>(reps.size()) > budget_)
                        throw BudgetError("left-coset enumeration exceeded the budget (group order ~" +
                                          std::to_string(group_order(F_->q(), r_, W)) + ")");
                }
            }
        }
        return leftcoset_cache_.emplace(key, std::move(reps)).first->second;
    }

    // ---- convolution -------------------------------------------------------

    struct ConvolutionStats {
        int64_t pairs = 0;
        bool counts_invariant = true;  // equal counts across left cosets per coset
        bool mass_conserved = true;    // sum c_g L(g) = L(a) L(b)
    };

    HeckeElem convolve(const HeckeElem& h1, const HeckeElem& h2, ConvolutionStats* stats = nullptr) {
        if (h1.level != n_ || h2.level != n_) throw Error("convolve: level mismatch");
        HeckeElem out;
        out.level = n_;
        ConvolutionStats st;
        for (const auto& [d1, c1] : h1.support)
            for (const auto& [d2, c2] : h2.support) {
                int B = max_abs(d1.nu) + max_abs(d2.nu);
                int W = carry_precision(B);
                const auto& X = left_cosets(d1, W);
                const auto& Y = left_cosets(d2, W);
                st.pairs += static_cast<int64_t>(X.size()) * Y.size();
                // classify products by left coset
                std::map<std::string, std::pair<int64_t, GrpElt>> by_label;
                for (const auto& x : X)
                    for (const auto& y : Y) {
                        GrpElt p = x * y;
                        auto lbl = left_label(p);
                        auto bit = by_label.find(lbl);
                        if (bit == by_label.end())
                            by_label.emplace(lbl, std::make_pair(int64_t(1), p));
                        else
                            bit->second.first++;
                    }
                // group left cosets into double cosets
                std::map<DoubleCoset, std::vector<int64_t>> buckets;
                for (const auto& [lbl, pc] : by_label) {
                    DoubleCoset dc = canonical_double_coset(pc.second);
                    buckets[dc].push_back(pc.first);
                }
                int64_t mass = 0;
                for (const auto& [dc, counts] : buckets) {
                    for (auto c : counts)
                        if (c != counts[0]) st.counts_invariant = false;
                    int64_t cg = counts[0];
                    // every left coset of dc must appear (counts are constant
                    // on the double coset), so bucket size = L(dc)
                    mass += cg * static_cast<int64_t>(counts.size());
                    out.add(dc, c1 * c2 * cg);
                }
                if (mass != static_cast<int64_t>(X.size()) * static_cast<int64_t>(Y.size()))
                    st.mass_conserved = false;
            }
        if (stats) *stats = st;
        if (!st.counts_invariant)
            throw VerifyError("convolve: left-coset counts not constant on a double coset");
        if (!st.mass_conserved) throw VerifyError("convolve: mass conservation failed");
        return out;
    }

    HeckeElem basis_elem(const DoubleCoset& d) const {
        HeckeElem h;
        h.level = n_;
        h.support.emplace(d, 1);
        return h;
    }

    // ---- level-n structure (pairs, stabilizers, class lists) ---------------

    // All of GL_r(O/pi^n) (n >= 1), canonical digit matrices.
    const std::vector<Mat>& level_group() {
        if (!level_group_.empty()) return level_group_;
        if (n_ < 1) throw Error("level_group needs n >= 1");
        double total = std::pow(static_cast<double>(F_->q()), static_cast<double>(r_) * r_ * n_);
        if (total > static_cast<double>(budget_))
            throw BudgetError("level group enumeration exceeds the budget (order ~" +
                              std::to_string(group_order(F_->q(), r_, n_)) + ")");
        std::vector<FqElem> digits(static_cast<size_t>(r_) * r_ * n_, 0);
        int64_t q = F_->q();
        while (true) {
            Mat m(F_, r_, n_);
            size_t idx = 0;
            for (int i = 0; i < r_; ++i)
                for (int j = 0; j < r_; ++j) {
                    std::vector<FqElem> d(digits.begin() + idx, digits.begin() + idx + n_);
                    m.at(i, j) = TruncElem::from_digits(F_, d);
                    idx += n_;
                }
            if (m.det().val() == 0) level_group_.push_back(m);
            size_t j = 0;
            while (j < digits.size() && digits[j] == q - 1) digits[j++] = 0;
            if (j == digits.size()) break;
            digits[j]++;
        }
        return level_group_;
    }

    // Stabilizer of [nabla(nu)] in (K(O/pi^n))^2: pairs (a, b) with
    // a nabla b in K^n nabla K^n, stored as (a^{-1}, b^{-1}) for the
    // canonical minimization. n >= 1.
    const std::vector<std::pair<Mat, Mat>>& stabilizer(const std::vector<int>& nu) {
        auto key = nu_key(nu);
        auto it = stab_cache_.find(key);
        if (it != stab_cache_.end()) return it->second;
        const auto& labels = nabla_labelset(nu);
        int W = carry_precision(max_abs(nu));
        GrpElt nb = GrpElt::nabla(F_, r_, nu, W);
        std::vector<std::pair<Mat, Mat>> stab;
        for (const auto& a : level_group())
            for (const auto& b : level_group()) {
                GrpElt ga{F_, r_, 0, a.lift(W)};
                GrpElt gb{F_, r_, 0, b.lift(W)};
                GrpElt t = ga * nb * gb;
                if (labels.count(left_label(t)))
                    stab.emplace_back(a.unit_inverse(), b.unit_inverse());
            }
        return stab_cache_.emplace(key, std::move(stab)).first->second;
    }

    // All level-n double cosets inside K nabla(nu) K, canonical.
    std::vector<DoubleCoset> classes_for_nu(const std::vector<int>& nu) {
        if (n_ == 0) {
            DoubleCoset d;
            d.nu = nu;
            d.key = nu_key(nu);
            return {d};
        }
        std::set<DoubleCoset> classes;
        for (const auto& a : level_group())
            for (const auto& b : level_group()) {
                DoubleCoset d;
                d.nu = nu;
                canonicalize_pair(d, a, b);
                classes.insert(d);
            }
        return std::vector<DoubleCoset>(classes.begin(), classes.end());
    }

    // Rebuild a canonical coset from transported level-n matrices.
    DoubleCoset coset_from_pair(const std::vector<int>& nu, const Mat& k1, const Mat& k2) {
        DoubleCoset d;
        d.nu = nu;
        if (n_ == 0) {
            d.key = nu_key(nu);
            return d;
        }
        canonicalize_pair(d, k1, k2);
        return d;
    }

    static std::string nu_key(const std::vector<int>& nu) {
        std::ostringstream os;
        os << "nu[";
        for (int x : nu) os << x << " ";
        os << "]";
        return os.str();
    }

    // Deterministic pseudorandom element of K^n at precision P (n >= 1):
    // 1 + pi^n Z with LCG digit matrix Z, guaranteed in K^n.
    GrpElt random_kn(int P, uint64_t& state) const {
        Mat z(F_, r_, P);
        int64_t q = F_->q();
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < r_; ++j) {
                std::vector<FqElem> dd(P, 0);
                for (int t = 0; t + n_ < P; ++t) {
                    state = state * 6364136223846793005ull + 1442695040888963407ull;
                    dd[t + n_] = static_cast<FqElem>((state >> 33) % q);
                }
                if (i == j) dd[0] = F_->rf()->one();
                z.at(i, j) = TruncElem::from_digits(F_, dd);
            }
        if (n_ == 0) {
            // a random element of K(O): retry until invertible
            while (z.det().val() != 0) {
                for (int i = 0; i < r_; ++i)
                    for (int j = 0; j < r_; ++j) {
                        std::vector<FqElem> dd(P, 0);
                        for (int t = 0; t < P; ++t) {
                            state = state * 6364136223846793005ull + 1442695040888963407ull;
                            dd[t] = static_cast<FqElem>((state >> 33) % q);
                        }
                        z.at(i, j) = TruncElem::from_digits(F_, dd);
                    }
            }
        }
        return GrpElt{F_, r_, 0, z};
    }

  private:
    // Left-coset labels of the full K^n nabla K^n (used for stabilizer
    // membership tests).
    const std::set<std::string>& nabla_labelset(const std::vector<int>& nu) {
        auto key = nu_key(nu);
        auto it = labelset_cache_.find(key);
        if (it != labelset_cache_.end()) return it->second;
        int W = carry_precision(max_abs(nu));
        std::set<std::string> seen;
        std::deque<GrpElt> queue;
        GrpElt g0 = GrpElt::nabla(F_, r_, nu, W);
        seen.insert(left_label(g0));
        queue.push_back(g0);
        const auto& gens = group_generators(W);
        while (!queue.empty()) {
            GrpElt g = queue.front();
            queue.pop_front();
            for (const auto& gen : gens) {
                GrpElt h = gen * g;
                auto lbl = left_label(h);
                if (seen.insert(lbl).second) {
                    queue.push_back(h);
                    if (static_cast<int64_t>(seen.size()) > budget_)
                        throw BudgetError("labelset enumeration exceeded the budget");
                }
            }
        }
        return labelset_cache_.emplace(key, std::move(seen)).first->second;
    }

    // Generators of K^n (n >= 1) or of K = GL_r(O) (n = 0) at precision P.
    const std::vector<GrpElt>& group_generators(int P) {
        auto it = gen_cache_.find(P);
        if (it != gen_cache_.end()) return it->second;
        std::vector<GrpElt> gens;
        const auto& rf = *F_->rf();
        auto unit_elem = [&](int j, FqElem c) {  // pi^j * [c-ish naive lift]
            return TruncElem::lift_residue(F_, P - j, c).mul_pi_raise(j).reduce(P);
        };
        if (n_ >= 1) {
            for (int s = 0; s < r_; ++s)
                for (int t = 0; t < r_; ++t)
                    for (int j = n_; j < P; ++j)
                        for (int a = 0; a < F_->f(); ++a) {
                            FqElem ya = rf.pow(rf.gen_y(), a);
                            if (F_->f() == 1) ya = rf.one();
                            Mat m = Mat::identity(F_, r_, P);
                            m.at(s, t) = m.at(s, t) + unit_elem(j, ya);
                            gens.push_back(GrpElt{F_, r_, 0, m});
                        }
        } else {
            // transvections
            for (int s = 0; s < r_; ++s)
                for (int t = 0; t < r_; ++t) {
                    if (s == t) continue;
                    for (int j = 0; j < P; ++j)
                        for (int a = 0; a < F_->f(); ++a) {
                            FqElem ya = F_->f() == 1 ? rf.one() : rf.pow(rf.gen_y(), a);
                            Mat m = Mat::identity(F_, r_, P);
                            m.at(s, t) = m.at(s, t) + unit_elem(j, ya);
                            gens.push_back(GrpElt{F_, r_, 0, m});
                        }
                }
            // diagonal units: Teichmueller generator and 1 + pi^j y^a
            {
                Mat m = Mat::identity(F_, r_, P);
                m.at(0, 0) = TruncElem::teichmuller(F_, P, rf.primitive_element());
                gens.push_back(GrpElt{F_, r_, 0, m});
            }
            for (int j = 1; j < P; ++j)
                for (int a = 0; a < F_->f(); ++a) {
                    FqElem ya = F_->f() == 1 ? rf.one() : rf.pow(rf.gen_y(), a);
                    Mat m = Mat::identity(F_, r_, P);
                    m.at(0, 0) = m.at(0, 0) + unit_elem(j, ya);
                    gens.push_back(GrpElt{F_, r_, 0, m});
                }
        }
        return gen_cache_.emplace(P, std::move(gens)).first->second;
    }

    void canonicalize_pair(DoubleCoset& d, const Mat& k1, const Mat& k2) {
        const auto& stab = stabilizer(d.nu);
        Mat best1 = k1, best2 = k2;
        std::string bk = pair_string(k1, k2);
        for (const auto& [ainv, binv] : stab) {
            Mat c1 = k1 * ainv;
            Mat c2 = binv * k2;
            std::string ck = pair_string(c1, c2);
            if (ck < bk) {
                bk = std::move(ck);
                best1 = std::move(c1);
                best2 = std::move(c2);
            }
        }
        d.k1 = best1;
        d.k2 = best2;
        d.key = nu_key(d.nu) + "|" + bk;
    }

    static std::string pair_string(const Mat& a, const Mat& b) {
        return a.digit_string() + "|" + b.digit_string();
    }

    FieldDescPtr F_;
    int r_, n_;
    int64_t budget_;
    std::vector<Mat> level_group_;
    std::map<std::string, std::vector<std::pair<Mat, Mat>>> stab_cache_;
    std::map<std::string, std::set<std::string>> labelset_cache_;
    std::map<int, std::vector<GrpElt>> gen_cache_;
    std::map<std::string, std::vector<GrpElt>> leftcoset_cache_;
    std::map<std::string, DoubleCoset> pair_canon_cache_;
};

}  // namespace closefields
