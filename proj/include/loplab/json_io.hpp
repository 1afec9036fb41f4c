#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "loplab/lop.hpp"
#include "loplab/search.hpp"

namespace loplab {

using Json = nlohmann::ordered_json;

inline constexpr int json_schema_version = 1;

inline std::string rational_text(const Rational& r) { return r.str(); }

inline Rational parse_rational(const std::string& text) {
    try {
        return Rational(text);
    } catch (const std::exception&) {
        throw ParseError("invalid rational '" + text + "'");
    }
}

inline Json pairs_json(const std::vector<Edge>& pairs) {
    Json out = Json::array();
    for (const Edge& e : pairs) out.push_back({e.from + 1, e.to + 1});
    return out;
}

inline std::vector<Edge> pairs_from_json(const Json& j) {
    std::vector<Edge> out;
    for (const auto& p : j) out.push_back({p.at(0).get<std::size_t>() - 1, p.at(1).get<std::size_t>() - 1});
    return out;
}

inline Json lop_json(const LopReport& r) {
    Json ranking = Json::array();
    for (const auto& group : r.ranking) {
        Json g = Json::array();
        for (std::size_t v : group) g.push_back(v + 1);
        ranking.push_back(std::move(g));
    }
    return Json{{"satisfied", r.satisfied}, {"violations", pairs_json(r.violations)}, {"ranking", std::move(ranking)}};
}

inline Json hit_json(const SearchHit& h) {
    const DagPattern pattern = h.pattern();
    Json j{{"schema", json_schema_version},
           {"method", method_name(h.method)},
           {"id", h.id},
           {"n", h.n},
           {"edge_count", h.edge_count},
           {"edges", pairs_json(std::vector<Edge>(pattern.edges().begin(), pattern.edges().end()))}};
    if (h.method == Method::llsm) {
        j["violations"] = pairs_json(h.violations);
        Json coeffs = Json::array();
        for (const auto& c : h.coefficients) coeffs.push_back(rational_text(c));
        j["coefficients"] = std::move(coeffs);
    } else {
        j["b_values"] = h.b_values;
        j["weights"] = h.weights;
        Json lv = Json::array();
        for (const auto& v : h.lop_violations) lv.push_back(pairs_json(v));
        j["lop_violations"] = std::move(lv);
        Json flips = Json::array();
        for (const auto& f : h.flips) flips.push_back({{"b", {f.b_low, f.b_high}}, {"pairs", pairs_json(f.pairs)}});
        j["flips"] = std::move(flips);
    }
    return j;
}

inline SearchHit hit_from_json(const Json& j) {
    if (j.at("schema").get<int>() != json_schema_version) throw ParseError("unsupported hit schema version");
    SearchHit h;
    const auto method = j.at("method").get<std::string>();
    if (method != "llsm" && method != "em") throw ParseError("unknown method '" + method + "'");
    h.method = method == "llsm" ? Method::llsm : Method::em;
    h.id = j.at("id").get<std::uint64_t>();
    h.n = j.at("n").get<std::size_t>();
    h.edge_count = j.at("edge_count").get<std::size_t>();
    if (h.method == Method::llsm) {
        h.violations = pairs_from_json(j.at("violations"));
        for (const auto& c : j.at("coefficients")) h.coefficients.push_back(parse_rational(c.get<std::string>()));
    } else {
        h.b_values = j.at("b_values").get<std::vector<double>>();
        h.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        for (const auto& v : j.at("lop_violations")) h.lop_violations.push_back(pairs_from_json(v));
        for (const auto& f : j.at("flips")) h.flips.push_back({f.at("b").at(0).get<double>(), f.at("b").at(1).get<double>(), pairs_from_json(f.at("pairs"))});
    }
    return h;
}

}  // namespace loplab
