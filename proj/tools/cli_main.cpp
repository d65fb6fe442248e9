// closefields command-line interface: batch, deterministic, JSON or text.
// Exit codes: 0 success, 1 verification discrepancy, 2 usage/input error,
// 3 resource budget exceeded.

#include <iostream>

#include <CLI11.hpp>

#include "closefields/descriptor_io.hpp"

using namespace closefields;

namespace {

struct Options {
    std::string field, field_a, field_b;
    std::vector<std::string> fields;
    int n = 1, rank = 2, level = 0, deg = 8, precision = 4, bound = 1, depth = 2, iso_level = 0;
    int64_t budget = 1000000;
    std::string scalar = "pi", coset_a, coset_b, source = "classical";
    bool as_json = false;
};

void emit(const json& j, bool as_json, const std::string& headline) {
    if (!as_json) std::cout << headline << "\n";
    std::cout << j.dump(2) << "\n";
}

json tower_elem_json(const TowerElem& e) {
    if (e.level() == 0) return digits_json(e.leaf());
    json out = json::array();
    for (const auto& k : e.kids()) out.push_back(tower_elem_json(k));
    return out;
}

int cmd_field(const Options& o) {
    auto F = load_field_descriptor(o.field);
    json j;
    j["field"] = field_json(F);
    bool ok = true;
    if (o.iso_level >= 1) {
        CloseFieldIso iso(F, o.iso_level);
        auto rep = iso.verify();
        j["close_field_iso"] = json{{"level", o.iso_level},
                                    {"ok", rep.ok},
                                    {"exhaustive", rep.exhaustive},
                                    {"pairs_checked", rep.pairs_checked}};
        ok = rep.ok;
    }
    emit(j, o.as_json, "field descriptor");
    return ok ? 0 : 1;
}

int cmd_witt_laws(const Options& o) {
    auto F = load_field_descriptor(o.field);
    LawTable T(F, o.n, o.precision);
    bool ok = T.verify_ghost_consistency();
    json j = law_table_json(T);
    j["field"] = field_json(F);
    j["ghost_consistent"] = ok;
    emit(j, o.as_json, "witt law tables");
    return ok ? 0 : 1;
}

std::vector<TruncElem> poly_mul(const FieldDescPtr& F, int M, const std::vector<TruncElem>& a,
                                const std::vector<TruncElem>& b) {
    std::vector<TruncElem> r(a.size() + b.size() - 1, TruncElem::zero(F, M));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (size_t k = 0; k < b.size(); ++k) r[i + k] = r[i + k] + a[i] * b[k];
    }
    return r;
}

std::vector<TruncElem> poly_compose(const FieldDescPtr& F, int M, const std::vector<TruncElem>& outer,
                                    const std::vector<TruncElem>& inner) {
    std::vector<TruncElem> acc(1, TruncElem::zero(F, M));
    for (int i = static_cast<int>(outer.size()) - 1; i >= 0; --i) {
        acc = poly_mul(F, M, acc, inner);
        if (acc.empty()) acc.assign(1, TruncElem::zero(F, M));
        acc[0] = acc[0] + outer[i];
    }
    return acc;
}

int cmd_lt(const std::string& what, const Options& o) {
    auto F = load_field_descriptor(o.field);
    json j;
    j["field"] = field_json(F);
    bool ok = true;
    if (what == "log" || what == "mult") {
        auto lt = LtContext::make(F, o.deg, o.precision);
        auto log = lt_log(lt);
        if (what == "log") {
            j["log"] = series_json(log);
            j["exp"] = series_json(lt_exp(log));
        } else {
            auto exp = lt_exp(log);
            TruncElem a = o.scalar == "pi"
                              ? TruncElem::pi(F, lt.sctx.Pwork)
                              : TruncElem::from_integer(F, lt.sctx.Pwork, std::stoll(o.scalar));
            auto m = lt_mult(lt, exp, log, a);
            j["scalar"] = o.scalar;
            j["mult"] = series_json(m);
        }
    } else {  // torsion | tower
        int M = o.precision;
        std::vector<TruncElem> f;
        if (o.source == "canonical") {
            auto lt = LtContext::make(F, o.deg, M);
            auto log = lt_log(lt);
            f = lt_f_pi(lt, lt_exp(log), log).dense_poly(M);
        } else {
            f = classical_lt_poly(F, M);
        }
        auto T = torsion_tower(F, f, o.n, M);
        j["stage_degrees"] = T.stage_degrees;
        j["accumulated_degrees"] = T.accumulated;
        j["torsion_count"] = T.torsion_count;
        json gs = json::array();
        for (int s = 1; s <= T.n; ++s) {
            json g = json::array();
            for (const auto& c : T.ring->g(s)) g.push_back(tower_elem_json(c));
            gs.push_back(std::move(g));
        }
        j["g"] = std::move(gs);
        json checks;
        bool compat = tower_compatibility(T);
        checks["compatibility"] = compat;
        for (int s = 1; s <= T.n; ++s)
            checks["eisenstein_over_stage_" + std::to_string(s)] = eisenstein_over_stage(T, s);
        auto lim = limit_coordinate_check(T);
        checks["limit_cauchy"] = lim.ok;
        j["checks"] = std::move(checks);
        ok = compat && lim.ok;
        if (what == "torsion") {
            json fp = json::array();
            std::vector<TruncElem> comp = {TruncElem::zero(F, M), TruncElem::one(F, M)};
            for (int k = 1; k <= T.n; ++k) {
                comp = poly_compose(F, M, f, comp);
                json arr = json::array();
                for (const auto& c : comp) arr.push_back(digits_json(c));
                fp.push_back(std::move(arr));
            }
            j["f_pi_powers"] = std::move(fp);
        }
    }
    emit(j, o.as_json, "lubin-tate " + what);
    return ok ? 0 : 1;
}

int cmd_hecke_convolve(const Options& o) {
    auto F = load_field_descriptor(o.field);
    HeckeContext H(F, o.rank, o.level, o.budget);
    auto da = coset_from_json(nlohmann::json::parse(o.coset_a), H);
    auto db = coset_from_json(nlohmann::json::parse(o.coset_b), H);
    HeckeContext::ConvolutionStats st;
    auto prod = H.convolve(H.basis_elem(da), H.basis_elem(db), &st);
    json j = hecke_elem_json(prod);
    j["a"] = coset_json(da, o.level);
    j["b"] = coset_json(db, o.level);
    j["pairs"] = st.pairs;
    emit(j, o.as_json, "hecke convolution");
    return 0;
}

int cmd_close_verify(const Options& o) {
    auto A = load_field_descriptor(o.field_a);
    auto B = load_field_descriptor(o.field_b);
    auto pair = CloseFieldPair::make(A, B, o.level);
    HeckeContext HE(A, o.rank, o.level, o.budget);
    HeckeContext HEp(B, o.rank, o.level, o.budget);
    SupportBound bound{o.bound, o.depth};
    auto rep = verify_algebra_iso(HE, HEp, pair, bound);
    json j = verify_report_json(rep);
    j["field_a"] = field_json(A);
    j["field_b"] = field_json(B);
    j["rank"] = o.rank;
    j["level"] = o.level;
    emit(j, o.as_json, "close-fields Hecke verification");
    return rep.ok() ? 0 : 1;
}

int cmd_family_hecke(const Options& o) {
    std::vector<FieldDescPtr> Es;
    for (const auto& p : o.fields) Es.push_back(load_field_descriptor(p));
    auto B = load_field_descriptor(o.field_b);
    SupportBound bound{o.bound, o.depth};
    auto res = family_hecke(Es, B, o.rank, o.level, bound, o.budget);
    json j = family_json(res.family, [](const StructTable& t) { return struct_table_json(t); });
    json idx = json::array();
    for (bool b : res.index_matches_tail) idx.push_back(b);
    j["index_matches_tail"] = std::move(idx);
    emit(j, o.as_json, "family hecke structure constants");
    return res.family.exceptions().empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact truncated local fields, ramified Witt vectors, Lubin-Tate formal groups,\n"
                 "and congruence-level Hecke algebras over close fields"};
    app.require_subcommand(1);
    Options o;
    std::string lt_what;

    auto* field = app.add_subcommand("field", "inspect and validate a field descriptor");
    field->add_option("--field", o.field, "descriptor file")->required();
    field->add_option("--check-iso", o.iso_level, "verify the close-field isomorphism at this level");
    field->add_flag("--json", o.as_json, "machine-readable output");

    auto* witt = app.add_subcommand("witt", "ramified Witt vector law tables");
    auto* wl = witt->add_subcommand("laws", "solve and emit the universal sum/product/negation tables");
    wl->add_option("--field", o.field)->required();
    wl->add_option("--n", o.n, "table length")->required();
    wl->add_option("--precision", o.precision, "output precision M")->required();
    wl->add_flag("--json", o.as_json);
    witt->require_subcommand(1);

    auto* lt = app.add_subcommand("lt", "Lubin-Tate formal group computations");
    for (const char* sub : {"log", "mult", "torsion", "tower"}) {
        auto* s = lt->add_subcommand(sub);
        s->add_option("--field", o.field)->required();
        s->add_option("--deg", o.deg, "series degree cutoff D");
        s->add_option("--precision", o.precision, "pi-adic precision M");
        s->add_option("--n", o.n, "tower depth");
        s->add_option("--scalar", o.scalar, "scalar a for [a](X): an integer or \"pi\"");
        s->add_option("--source", o.source, "classical | canonical");
        s->add_flag("--json", o.as_json);
        s->callback([&lt_what, sub] { lt_what = sub; });
    }
    lt->require_subcommand(1);

    auto* hk = app.add_subcommand("hecke", "double cosets and convolution");
    auto* hc = hk->add_subcommand("convolve", "convolve two basis elements");
    hc->add_option("--field", o.field)->required();
    hc->add_option("--rank", o.rank)->required();
    hc->add_option("--level", o.level)->required();
    hc->add_option("--a", o.coset_a, "coset as JSON {\"nu\":[...], \"residue\":...}")->required();
    hc->add_option("--b", o.coset_b)->required();
    hc->add_option("--budget", o.budget);
    hc->add_flag("--json", o.as_json);
    hk->require_subcommand(1);

    auto* cv = app.add_subcommand("close-verify", "verify the Hecke algebra isomorphism over close fields");
    cv->add_option("--field-a", o.field_a, "mixed-characteristic side")->required();
    cv->add_option("--field-b", o.field_b, "equal-characteristic side")->required();
    cv->add_option("--rank", o.rank)->required();
    cv->add_option("--level", o.level)->required();
    cv->add_option("--bound", o.bound, "sup-norm bound of the generating support");
    cv->add_option("--depth", o.depth, "product depth");
    cv->add_option("--budget", o.budget);
    cv->add_flag("--json", o.as_json);

    auto* fh = app.add_subcommand("family-hecke", "eventually-constant family of structure constants");
    fh->add_option("--fields", o.fields, "mixed-characteristic descriptors (exception candidates)");
    fh->add_option("--field-b", o.field_b, "equal-characteristic tail")->required();
    fh->add_option("--rank", o.rank)->required();
    fh->add_option("--level", o.level)->required();
    fh->add_option("--bound", o.bound);
    fh->add_option("--depth", o.depth);
    fh->add_option("--budget", o.budget);
    fh->add_flag("--json", o.as_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(field)) return cmd_field(o);
        if (app.got_subcommand(witt)) return cmd_witt_laws(o);
        if (app.got_subcommand(lt)) return cmd_lt(lt_what, o);
        if (app.got_subcommand(hk)) return cmd_hecke_convolve(o);
        if (app.got_subcommand(cv)) return cmd_close_verify(o);
        if (app.got_subcommand(fh)) return cmd_family_hecke(o);
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const VerifyError& e) {
        std::cerr << "verification discrepancy: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
