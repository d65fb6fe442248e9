#pragma once

#include <fstream>

#include <json.hpp>

#include "closefields/comparison.hpp"
#include "closefields/lubin_tate.hpp"
#include "closefields/witt.hpp"

namespace closefields {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Field descriptor files. Two encodings of the same keys p, f, defining_poly,
// kind, eisenstein:
//   - JSON: { "p": 2, "f": 1, "defining_poly": [0,1], "kind": "mixed",
//             "eisenstein": [-2, 0, 1] }
//   - TOML-ish "key = value" lines with the same names.
// An eisenstein coefficient is either a plain integer (exact) or a list of
// F_q digits [c_0, c_1, ...] meaning sum [c_j] p^j.
// ---------------------------------------------------------------------------

namespace io_detail {

inline EisCoeff coeff_from_json(const nlohmann::json& v) {
    if (v.is_number_integer()) return EisCoeff(v.get<int64_t>());
    if (v.is_array()) {
        EisDigits d;
        for (const auto& x : v) d.digits.push_back(static_cast<FqElem>(x.get<int64_t>()));
        return EisCoeff(d);
    }
    throw Error("descriptor: eisenstein coefficient must be an integer or a digit list");
}

// Minimal TOML-ish parser: ints, quoted strings, and (nested) int arrays.
struct TomlValue {
    enum Kind { Int, Str, Arr } kind;
    int64_t i = 0;
    std::string s;
    std::vector<TomlValue> arr;
};

inline TomlValue parse_toml_value(const std::string& text, size_t& pos) {
    auto skip = [&] { while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos]))) ++pos; };
    skip();
    if (pos >= text.size()) throw Error("descriptor: unexpected end of value");
    TomlValue v;
    if (text[pos] == '[') {
        ++pos;
        v.kind = TomlValue::Arr;
        skip();
        while (pos < text.size() && text[pos] != ']') {
            v.arr.push_back(parse_toml_value(text, pos));
            skip();
            if (pos < text.size() && text[pos] == ',') {
                ++pos;
                skip();
            }
        }
        if (pos >= text.size()) throw Error("descriptor: unterminated array");
        ++pos;
        return v;
    }
    if (text[pos] == '"') {
        ++pos;
        v.kind = TomlValue::Str;
        while (pos < text.size() && text[pos] != '"') v.s += text[pos++];
        if (pos >= text.size()) throw Error("descriptor: unterminated string");
        ++pos;
        return v;
    }
    v.kind = TomlValue::Int;
    size_t start = pos;
    if (text[pos] == '-' || text[pos] == '+') ++pos;
    while (pos < text.size() && isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw Error("descriptor: expected a value");
    v.i = std::stoll(text.substr(start, pos - start));
    return v;
}

}  // namespace io_detail

inline FieldDescPtr field_from_json(const nlohmann::json& j) {
    int64_t p = j.at("p").get<int64_t>();
    int f = j.at("f").get<int>();
    std::vector<int64_t> defpoly;
    if (j.contains("defining_poly"))
        for (const auto& c : j.at("defining_poly")) defpoly.push_back(c.get<int64_t>());
    else
        defpoly = default_defining_poly(p, f);
    std::string kind = j.value("kind", std::string("mixed"));
    if (kind == "laurent") return make_laurent_field(p, f, defpoly);
    if (kind != "mixed") throw Error("descriptor: kind must be \"mixed\" or \"laurent\"");
    std::vector<EisCoeff> eis;
    for (const auto& c : j.at("eisenstein")) eis.push_back(io_detail::coeff_from_json(c));
    return make_field(p, f, defpoly, std::move(eis));
}

inline FieldDescPtr field_from_toml(const std::string& text) {
    std::map<std::string, io_detail::TomlValue> kv;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        size_t h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key.empty()) continue;
        std::string val = line.substr(eq + 1);
        size_t vp = 0;
        kv[key] = io_detail::parse_toml_value(val, vp);
    }
    auto need = [&](const std::string& k) -> const io_detail::TomlValue& {
        auto it = kv.find(k);
        if (it == kv.end()) throw Error("descriptor: missing key " + k);
        return it->second;
    };
    int64_t p = need("p").i;
    int f = static_cast<int>(need("f").i);
    std::vector<int64_t> defpoly;
    if (kv.count("defining_poly"))
        for (const auto& c : kv["defining_poly"].arr) defpoly.push_back(c.i);
    else
        defpoly = default_defining_poly(p, f);
    std::string kind = kv.count("kind") ? kv["kind"].s : "mixed";
    if (kind == "laurent") return make_laurent_field(p, f, defpoly);
    std::vector<EisCoeff> eis;
    for (const auto& c : need("eisenstein").arr) {
        if (c.kind == io_detail::TomlValue::Int) {
            eis.emplace_back(c.i);
        } else {
            EisDigits d;
            for (const auto& x : c.arr) d.digits.push_back(static_cast<FqElem>(x.i));
            eis.emplace_back(d);
        }
    }
    return make_field(p, f, defpoly, std::move(eis));
}

inline FieldDescPtr load_field_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read field descriptor file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return field_from_json(nlohmann::json::parse(text));
    return field_from_toml(text);
}

// ---------------------------------------------------------------------------
// JSON encoders (all iteration orders canonical, so output is byte-stable).
// ---------------------------------------------------------------------------

inline json digits_json(const TruncElem& a) {
    json out = json::array();
    for (auto d : a.teichmuller_digits()) out.push_back(static_cast<int>(d));
    return out;
}

inline json field_json(const FieldDescPtr& F) {
    json j;
    j["kind"] = F->mixed() ? "mixed" : "laurent";
    j["p"] = F->p();
    j["f"] = F->f();
    j["q"] = F->q();
    if (F->mixed()) j["e"] = F->e();
    return j;
}

inline json mpoly_json(const MPoly& P, int split_at) {
    json terms;
    for (const auto& [m, c] : P.terms()) terms[P.monomial_key(m, split_at)] = digits_json(c);
    return terms;
}

inline json law_table_json(const LawTable& T) {
    json j;
    j["n"] = T.length();
    j["precision"] = T.precision();
    json S = json::array(), P = json::array(), N = json::array();
    for (int k = 0; k < T.length(); ++k) {
        S.push_back(mpoly_json(T.sum()[k], T.length()));
        P.push_back(mpoly_json(T.product()[k], T.length()));
        N.push_back(mpoly_json(T.negation()[k], T.length()));
    }
    j["S"] = std::move(S);
    j["P"] = std::move(P);
    j["N"] = std::move(N);
    return j;
}

inline json series_json(const TruncSeries& s) {
    json terms;
    static const char* names[3] = {"X", "Y", "Z"};
    for (const auto& [k, c] : s.terms()) {
        std::string key;
        for (int v = 0; v < s.nvars(); ++v) {
            if (!k[v]) continue;
            if (!key.empty()) key += "*";
            key += names[v];
            if (k[v] > 1) key += "^" + std::to_string(k[v]);
        }
        if (key.empty()) key = "1";
        auto nc = c.normalized();
        json cj;
        cj["digits"] = digits_json(nc.rep().reduce(std::min(nc.rep().precision(), s.ctx().M + nc.shift())));
        cj["shift"] = nc.shift();
        terms[key] = std::move(cj);
    }
    return terms;
}

inline json matrix_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rank(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.rank(); ++j) row.push_back(digits_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json coset_json(const DoubleCoset& d, int level) {
    json j;
    j["nu"] = d.nu;
    if (level >= 1) {
        json res;
        res["k1"] = matrix_json(d.k1);
        res["k2"] = matrix_json(d.k2);
        j["residue"] = std::move(res);
    }
    return j;
}

inline Mat matrix_from_json(const nlohmann::json& rows, const FieldDescPtr& F, int r, int n) {
    Mat m(F, r, n);
    if (static_cast<int>(rows.size()) != r) throw Error("coset: matrix has wrong rank");
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            std::vector<FqElem> dd;
            for (const auto& x : rows.at(i).at(j)) dd.push_back(static_cast<FqElem>(x.get<int64_t>()));
            dd.resize(n, 0);
            m.at(i, j) = TruncElem::from_digits(F, dd);
        }
    return m;
}

inline DoubleCoset coset_from_json(const nlohmann::json& j, HeckeContext& H) {
    std::vector<int> nu;
    for (const auto& x : j.at("nu")) nu.push_back(x.get<int>());
    if (H.level() == 0 || !j.contains("residue")) return H.coset_of_nabla(nu);
    const auto& res = j.at("residue");
    Mat k1 = matrix_from_json(res.at("k1"), H.field(), H.rank(), H.level());
    Mat k2 = matrix_from_json(res.at("k2"), H.field(), H.rank(), H.level());
    if (k1.det().val() != 0 || k2.det().val() != 0)
        throw Error("coset: residue matrices must be invertible at level n");
    return H.coset_from_pair(nu, k1, k2);
}

inline json hecke_elem_json(const HeckeElem& h) {
    json terms = json::array();
    for (const auto& [d, c] : h.support) {
        json t;
        t["coset"] = coset_json(d, h.level);
        t["coeff"] = c;
        terms.push_back(std::move(t));
    }
    json j;
    j["terms"] = std::move(terms);
    return j;
}

inline json verify_report_json(const VerifyReport& rep) {
    json inst = json::array();
    for (const auto& i : rep.instances) {
        json ij;
        ij["product"] = i.a_key + " * " + i.b_key;
        json lt = json::array(), rt = json::array();
        for (const auto& [k, c] : i.lhs_terms) lt.push_back(json{{"coset", k}, {"coeff", c}});
        for (const auto& [k, c] : i.rhs_terms) rt.push_back(json{{"coset", k}, {"coeff", c}});
        ij["lhs_terms"] = std::move(lt);
        ij["rhs_terms"] = std::move(rt);
        ij["equal"] = i.equal;
        inst.push_back(std::move(ij));
    }
    json per_nu = json::array();
    for (const auto& pn : rep.match.per_nu) {
        per_nu.push_back(json{{"nu", pn.nu},
                              {"count_a", pn.count_E},
                              {"count_b", pn.count_Eprime},
                              {"counts_equal", pn.counts_equal},
                              {"stabilizer_match", pn.stabilizer_match},
                              {"bijective", pn.bijective}});
    }
    json j;
    j["instances"] = std::move(inst);
    j["summary"] = json{{"compared", rep.compared},
                        {"discrepancies", rep.discrepancies},
                        {"match_ok", rep.match.ok},
                        {"per_nu", std::move(per_nu)},
                        {"all_equal", rep.ok()}};
    return j;
}

inline json struct_table_json(const StructTable& t) {
    json j;
    for (const auto& [ab, cell] : t) {
        json cj;
        for (const auto& [k, c] : cell) cj[k] = c;
        j[ab.first + " * " + ab.second] = std::move(cj);
    }
    return j;
}

template <class V, class Enc>
json family_json(const Family<V>& fam, Enc&& enc) {
    json j;
    j["tail"] = enc(fam.tail());
    json ex;
    for (const auto& [k, v] : fam.exceptions()) ex[std::to_string(k)] = enc(v);
    j["exceptions"] = std::move(ex);
    return j;
}

}  // namespace closefields
