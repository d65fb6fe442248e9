#pragma once

#include <functional>

#include "closefields/family.hpp"
#include "closefields/hecke.hpp"

namespace closefields {

// ---------------------------------------------------------------------------
// A pair of close fields at level n: E mixed with e >= n, E' = F_q((t)) over
// the same residue field, the verified ring isomorphism O/pi^n ~ O'/t^n, and
// the induced entrywise group transport GL_r(O/pi^n) ~ GL_r(O'/t^n).
// ---------------------------------------------------------------------------

struct CloseFieldPair {
    FieldDescPtr E;
    FieldDescPtr Eprime;
    int n = 0;

    static CloseFieldPair make(FieldDescPtr E, FieldDescPtr Eprime, int n) {
        if (!E->mixed()) throw FieldError("close field pair: first field must be mixed characteristic");
        if (Eprime->mixed()) throw FieldError("close field pair: second field must be equal characteristic");
        if (!(*E->rf() == *Eprime->rf()))
            throw FieldError("close field pair: residue fields differ");
        if (n >= 1) {
            if (!E->e_at_least(n))
                throw FieldError("close field pair refused: e = " + std::to_string(E->e()) +
                                 " < n = " + std::to_string(n));
            CloseFieldIso iso(E, n);
            auto rep = iso.verify();
            if (!rep.ok) throw VerifyError("close field pair: ring isomorphism check failed: " + rep.message);
        }
        return CloseFieldPair{std::move(E), std::move(Eprime), n};
    }

    // Entrywise digit transport of a level-n matrix (pi -> t).
    Mat transport(const Mat& m) const {
        Mat out(Eprime, m.rank(), m.precision());
        for (int i = 0; i < m.rank(); ++i)
            for (int j = 0; j < m.rank(); ++j)
                out.at(i, j) = TruncElem::from_digits(Eprime, m.at(i, j).teichmuller_digits());
        return out;
    }
};

// Generating support C = {nu dominant : |nu_j| <= gen_bound} with product
// depth; D-fold products stay inside {|nu_j| <= gen_bound * depth} because
// the extreme coordinates of nu are subadditive under multiplication.
struct SupportBound {
    int gen_bound = 1;
    int depth = 2;
    int product_bound() const { return gen_bound * depth; }
};

inline std::vector<std::vector<int>> dominant_vectors(int r, int bound) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(r, 0);
    std::function<void(int, int)> rec = [&](int pos, int hi) {
        if (pos == r) {
            out.push_back(cur);
            return;
        }
        for (int v = hi; v >= -bound; --v) {
            cur[pos] = v;
            rec(pos + 1, v);
        }
    };
    rec(0, bound);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// match_double_cosets: the per-nu bijection of level-n double cosets between
// the two sides, via the transported canonical pair. Cardinalities and
// stabilizer transport are checked and discrepancies surfaced, never patched.
// ---------------------------------------------------------------------------

struct MatchReport {
    struct PerNu {
        std::vector<int> nu;
        size_t count_E = 0, count_Eprime = 0;
        bool counts_equal = false;
        bool stabilizer_match = true;
        bool bijective = false;
    };
    std::vector<PerNu> per_nu;
    std::map<std::string, DoubleCoset> forward;  // E-key -> E'-coset
    bool ok = true;
    std::vector<std::string> discrepancies;
};

inline MatchReport match_double_cosets(HeckeContext& HE, HeckeContext& HEp, const CloseFieldPair& pair,
                                       int nu_bound) {
    if (HE.level() != pair.n || HEp.level() != pair.n) throw Error("match: level mismatch");
    MatchReport rep;
    for (const auto& nu : dominant_vectors(HE.rank(), nu_bound)) {
        MatchReport::PerNu pn;
        pn.nu = nu;
        auto ce = HE.classes_for_nu(nu);
        auto cp = HEp.classes_for_nu(nu);
        pn.count_E = ce.size();
        pn.count_Eprime = cp.size();
        pn.counts_equal = ce.size() == cp.size();
        if (!pn.counts_equal) {
            rep.ok = false;
            rep.discrepancies.push_back("class count mismatch at " + HeckeContext::nu_key(nu) + ": " +
                                        std::to_string(ce.size()) + " vs " + std::to_string(cp.size()));
        }
        if (pair.n >= 1) {
            // stabilizer transport check (the stabilizer congruence lemma)
            std::set<std::string> se, sp;
            for (const auto& [ai, bi] : HE.stabilizer(nu))
                se.insert(pair.transport(ai).digit_string() + "|" + pair.transport(bi).digit_string());
            for (const auto& [ai, bi] : HEp.stabilizer(nu))
                sp.insert(ai.digit_string() + "|" + bi.digit_string());
            pn.stabilizer_match = se == sp;
            if (!pn.stabilizer_match) {
                rep.ok = false;
                rep.discrepancies.push_back("stabilizer transport mismatch at " + HeckeContext::nu_key(nu));
            }
        }
        std::set<std::string> image_keys, target_keys;
        for (const auto& d : cp) target_keys.insert(d.key);
        bool inj_onto = true;
        for (const auto& d : ce) {
            DoubleCoset dp = pair.n == 0 ? HEp.coset_of_nabla(nu)
                                         : HEp.coset_from_pair(nu, pair.transport(d.k1), pair.transport(d.k2));
            if (!target_keys.count(dp.key) || !image_keys.insert(dp.key).second) inj_onto = false;
            rep.forward.emplace(d.key, dp);
        }
        pn.bijective = inj_onto && image_keys.size() == cp.size();
        if (!pn.bijective) {
            rep.ok = false;
            rep.discrepancies.push_back("transport is not a bijection at " + HeckeContext::nu_key(nu));
        }
        rep.per_nu.push_back(std::move(pn));
    }
    return rep;
}

// eta_n on Hecke elements: basis indicators map along the matching, extended
// linearly. Support must lie inside the matched range.
inline HeckeElem eta_map(const HeckeElem& h, const MatchReport& match, int level) {
    HeckeElem out;
    out.level = level;
    for (const auto& [d, c] : h.support) {
        auto it = match.forward.find(d.key);
        if (it == match.forward.end())
            throw Error("eta_map: support outside the matched bound at " + d.key);
        out.add(it->second, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// verify_algebra_iso: every product of generating basis elements, structure
// constants compared term by term under the matching. Both sides run the
// same generic enumeration code on their own field descriptor; nothing is
// shared, so the comparison is an experiment rather than a tautology.
// ---------------------------------------------------------------------------

struct VerifyInstance {
    std::string a_key, b_key;
    std::vector<std::pair<std::string, int64_t>> lhs_terms;  // transported E-side
    std::vector<std::pair<std::string, int64_t>> rhs_terms;  // E'-side
    bool equal = false;
};

struct VerifyReport {
    MatchReport match;
    std::vector<VerifyInstance> instances;
    int64_t compared = 0;
    int64_t discrepancies = 0;
    bool ok() const { return match.ok && discrepancies == 0; }
};

inline std::vector<DoubleCoset> generating_basis(HeckeContext& H, const SupportBound& bound) {
    std::vector<DoubleCoset> basis;
    for (const auto& nu : dominant_vectors(H.rank(), bound.gen_bound))
        for (const auto& d : H.classes_for_nu(nu)) basis.push_back(d);
    return basis;
}

inline VerifyReport verify_algebra_iso(HeckeContext& HE, HeckeContext& HEp, const CloseFieldPair& pair,
                                       const SupportBound& bound) {
    if (bound.depth < 2) throw Error("verify: depth must be at least 2");
    VerifyReport rep;
    rep.match = match_double_cosets(HE, HEp, pair, bound.product_bound());
    auto basisE = generating_basis(HE, bound);
    for (const auto& a : basisE)
        for (const auto& b : basisE) {
            auto ha = HE.basis_elem(a), hb = HE.basis_elem(b);
            auto lhs = HE.convolve(ha, hb);
            auto etaa = eta_map(ha, rep.match, pair.n);
            auto etab = eta_map(hb, rep.match, pair.n);
            auto rhs = HEp.convolve(etaa, etab);
            VerifyInstance inst;
            inst.a_key = a.key;
            inst.b_key = b.key;
            std::map<std::string, int64_t> lhst, rhst;
            for (const auto& [d, c] : lhs.support) {
                auto it = rep.match.forward.find(d.key);
                if (it == rep.match.forward.end())
                    throw Error("verify: product support escaped the matched bound at " + d.key);
                lhst[it->second.key] += c;
            }
            for (const auto& [d, c] : rhs.support) rhst[d.key] += c;
            inst.equal = lhst == rhst;
            for (const auto& [k, c] : lhst) inst.lhs_terms.emplace_back(k, c);
            for (const auto& [k, c] : rhst) inst.rhs_terms.emplace_back(k, c);
            rep.compared++;
            if (!inst.equal) rep.discrepancies++;
            rep.instances.push_back(std::move(inst));
        }
    return rep;
}

// ---------------------------------------------------------------------------
// family_hecke: structure-constant tables per listed field assembled into an
// eventually constant family over N u {infinity} with tail = the E'-side
// table; exceptions record indices where verification genuinely fails.
// ---------------------------------------------------------------------------

// Structure constants keyed by E'-side canonical labels.
using StructTable = std::map<std::pair<std::string, std::string>, std::map<std::string, int64_t>>;

inline StructTable table_from_instances(const std::vector<VerifyInstance>& instances, bool rhs_side,
                                        const MatchReport& match) {
    StructTable t;
    for (const auto& inst : instances) {
        auto ka = match.forward.at(inst.a_key).key;
        auto kb = match.forward.at(inst.b_key).key;
        auto& cell = t[{ka, kb}];
        for (const auto& [k, c] : rhs_side ? inst.rhs_terms : inst.lhs_terms) cell[k] += c;
    }
    return t;
}

struct FamilyHeckeResult {
    Family<StructTable> family;
    std::vector<bool> index_matches_tail;  // one per listed field
    std::vector<VerifyReport> reports;
};

inline FamilyHeckeResult family_hecke(const std::vector<FieldDescPtr>& E_list, const FieldDescPtr& Eprime,
                                      int r, int n, const SupportBound& bound, int64_t budget = 1000000) {
    FamilyHeckeResult out;
    StructTable tail;
    {
        // the tail table, computed on the E' side alone
        HeckeContext HEp(Eprime, r, n, budget);
        auto basis = generating_basis(HEp, bound);
        for (const auto& a : basis)
            for (const auto& b : basis) {
                auto prod = HEp.convolve(HEp.basis_elem(a), HEp.basis_elem(b));
                auto& cell = tail[{a.key, b.key}];
                for (const auto& [d, c] : prod.support) cell[d.key] += c;
            }
    }
    std::map<uint64_t, StructTable> exceptions;
    for (size_t i = 0; i < E_list.size(); ++i) {
        auto pair = CloseFieldPair::make(E_list[i], Eprime, n);
        HeckeContext HE(E_list[i], r, n, budget);
        HeckeContext HEp(Eprime, r, n, budget);
        auto rep = verify_algebra_iso(HE, HEp, pair, bound);
        StructTable ti = table_from_instances(rep.instances, /*rhs_side=*/false, rep.match);
        bool equal = rep.ok() && ti == tail;
        out.index_matches_tail.push_back(equal);
        out.reports.push_back(std::move(rep));
        if (!equal) exceptions.emplace(i, std::move(ti));
    }
    std::map<Index, StructTable> ex;
    for (auto& [k, v] : exceptions) ex.emplace(Index::at(k), std::move(v));
    out.family = make_family<StructTable>(std::move(tail), std::move(ex));
    return out;
}

}  // namespace closefields
