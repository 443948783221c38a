#ifndef SUBDYN_IO_HPP
#define SUBDYN_IO_HPP

// JSON encodings of the library's inputs and results.

#include "error.hpp"
#include "geometry.hpp"
#include "nonauto.hpp"
#include "shadowing.hpp"
#include "shiftspace.hpp"
#include "spectrum.hpp"
#include "suspension.hpp"
#include "sweep.hpp"
#include "toral.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace subdyn::io {

using json = nlohmann::json;

inline json read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
    }
}

template <class T>
T field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::InvalidInput, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("field '") + key + "': " + e.what());
    }
}

/// Non-finite doubles become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json vec(const Vec& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

inline Vec to_vec(const json& j)
{
    if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected a numeric array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorKind::InvalidInput, "expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline IntVec to_intvec(const json& j)
{
    if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected an integer array");
    IntVec n;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw Error(ErrorKind::InvalidInput, "expected an integer array");
        n.push_back(x.get<long long>());
    }
    return n;
}

inline json mat(const Mat& m)
{
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
        a.push_back(row);
    }
    return a;
}

// ---- action specs

inline ActionSpec action_from_json(const json& j)
{
    auto gens = j.contains("generators") ? j.at("generators") : json();
    if (!gens.is_array() || gens.empty()) throw Error(ErrorKind::InvalidInput, "'generators' must be a nonempty array");
    std::vector<IntMatrix> mats;
    for (const auto& g : gens) {
        if (!g.is_array() || g.empty()) throw Error(ErrorKind::InvalidInput, "generator must be a nonempty matrix");
        IntMatrix M(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g[0].is_array() ? g[0].size() : 0));
        for (std::size_t r = 0; r < g.size(); ++r) {
            IntVec row = to_intvec(g[r]);
            if (static_cast<Eigen::Index>(row.size()) != M.cols()) throw Error(ErrorKind::InvalidInput, "ragged generator matrix");
            for (std::size_t c = 0; c < row.size(); ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        mats.push_back(M);
    }
    std::string interp = j.value("interpretation", std::string("toral"));
    if (interp != "toral" && interp != "abstract") throw Error(ErrorKind::InvalidInput, "interpretation must be toral or abstract");
    ActionSpec s = make_action(std::move(mats), interp == "toral");
    if (j.contains("k") && field<int>(j, "k") != s.k) throw Error(ErrorKind::InvalidInput, "'k' does not match the generators");
    if (j.contains("m") && field<int>(j, "m") != s.m) throw Error(ErrorKind::InvalidInput, "'m' does not match the generators");
    return s;
}

inline json to_json(const ActionSpec& s)
{
    json gens = json::array();
    for (const auto& g : s.generators) {
        json M = json::array();
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
            M.push_back(row);
        }
        gens.push_back(M);
    }
    return {{"k", s.k}, {"m", s.m}, {"generators", gens}, {"interpretation", s.toral ? "toral" : "abstract"}};
}

// ---- directions

inline json to_json(const Direction& d)
{
    json j{{"generator", vec(d.generator())}, {"rational", d.is_rational()}};
    if (d.is_rational()) j["integer_generator"] = *d.integer_generator();
    return j;
}

inline Direction direction_from_json(const json& j)
{
    Vec g = to_vec(j.at("generator"));
    if (j.value("rational", false)) {
        if (j.contains("integer_generator")) return Direction::rational(g, to_intvec(j.at("integer_generator")));
        IntVec n;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (g[i] != std::round(g[i])) throw Error(ErrorKind::InvalidInput, "rational direction needs an integer generator");
            n.push_back(static_cast<long long>(g[i]));
        }
        return Direction::rational(n);
    }
    return Direction::irrational(g);
}

/// "1,0" is rational; anything with a non-integer entry is irrational.
/// Entries may be numbers or sqrt(q).
inline Direction parse_direction(const std::string& text)
{
    std::vector<double> vals;
    bool integral = true;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0;
        try {
            if (item.rfind("sqrt(", 0) == 0 && item.back() == ')') {
                v = std::sqrt(std::stod(item.substr(5, item.size() - 6)));
                integral = integral && v == std::round(v);
            } else {
                std::size_t used = 0;
                v = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                integral = integral && item.find_first_of(".eE") == std::string::npos;
            }
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "bad direction entry '" + item + "'");
        }
        vals.push_back(v);
    }
    if (vals.empty()) throw Error(ErrorKind::InvalidInput, "empty direction");
    Vec g(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) g[static_cast<Eigen::Index>(i)] = vals[i];
    if (integral) {
        IntVec n;
        for (double v : vals) n.push_back(static_cast<long long>(std::llround(v)));
        return Direction::rational(n);
    }
    return Direction::irrational(g);
}

// ---- pseudo-orbits

inline json to_json(const PseudoOrbit& o, const Direction& d)
{
    json pts = json::array();
    for (std::size_t p = 0; p < o.points.size(); ++p) pts.push_back({{"n", o.window.points[p]}, {"x", vec(o.points[p])}});
    return {{"delta", o.delta}, {"direction", to_json(d)}, {"points", pts}};
}

inline PseudoOrbit orbit_from_json(const json& j)
{
    const json& pts = j.is_array() ? j : j.at("points");
    Direction d = j.is_object() && j.contains("direction") ? direction_from_json(j.at("direction"))
                                                          : Direction::irrational(Vec::Ones(static_cast<Eigen::Index>(pts.at(0).at("n").size())));
    std::vector<IntVec> ns;
    std::map<IntVec, Vec> xs;
    for (const auto& p : pts) {
        IntVec n = to_intvec(p.at("n"));
        if (!xs.emplace(n, to_vec(p.at("x"))).second) throw Error(ErrorKind::InvalidInput, "duplicate lattice point");
        ns.push_back(n);
    }
    PseudoOrbit o;
    o.window = make_window(ns, d);
    for (const auto& n : o.window.points) o.points.push_back(xs.at(n));
    o.delta = j.is_object() ? j.value("delta", 0.0) : 0.0;
    return o;
}

// ---- configurations

inline json to_json(const Configuration& c)
{
    json cells = json::object();
    for (std::size_t i = 0; i < c.size(); ++i) {
        IntVec n = c.point(i);
        std::string key;
        for (std::size_t d = 0; d < n.size(); ++d) key += (d ? "," : "") + std::to_string(n[d]);
        cells[key] = c.cells[i];
    }
    return {{"k", c.k}, {"W", c.W}, {"alphabet", c.alphabet}, {"cells", cells}};
}

/// Cells missing from the file are 0.
inline Configuration configuration_from_json(const json& j)
{
    int k = field<int>(j, "k"), W = field<int>(j, "W"), q = field<int>(j, "alphabet");
    if (k < 1 || k > 3 || W < 0 || q < 2) throw Error(ErrorKind::InvalidInput, "configuration needs 1 <= k <= 3, W >= 0, alphabet >= 2");
    Configuration c(k, W, q);
    if (!j.contains("cells")) return c;
    for (const auto& [key, val] : j.at("cells").items()) {
        IntVec n;
        std::stringstream ss(key);
        std::string item;
        try {
            while (std::getline(ss, item, ',')) n.push_back(std::stoll(item));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "bad cell key '" + key + "'");
        }
        if (static_cast<int>(n.size()) != k || !c.contains(n)) throw Error(ErrorKind::InvalidInput, "cell '" + key + "' outside the window");
        if (!val.is_number_integer()) throw Error(ErrorKind::InvalidInput, "cell values must be integers");
        int s = val.get<int>();
        if (s < 0 || s >= q) throw Error(ErrorKind::InvalidInput, "cell '" + key + "' outside the alphabet");
        c.at(n) = s;
    }
    return c;
}

// ---- chains

inline json to_json(const Chain& c)
{
    json nodes = json::array(), jumps = json::array();
    for (const auto& n : c.nodes) nodes.push_back({{"u", vec(n.u)}, {"x", vec(n.x)}});
    for (const auto& v : c.jumps) jumps.push_back(vec(v));
    return {{"nodes", nodes}, {"jumps", jumps}, {"delta", c.delta}, {"a", c.a}};
}

inline Chain chain_from_json(const json& j)
{
    Chain c;
    if (!j.contains("nodes") || !j.at("nodes").is_array()) throw Error(ErrorKind::InvalidInput, "chain needs 'nodes'");
    for (const auto& n : j.at("nodes")) c.nodes.push_back({to_vec(n.at("u")), to_vec(n.at("x"))});
    if (j.contains("jumps"))
        for (const auto& v : j.at("jumps")) c.jumps.push_back(to_vec(v));
    c.delta = j.value("delta", 0.0);
    c.a = j.value("a", 0.0);
    return c;
}

// ---- results

inline json to_json(const LyapunovSpectrum& sp)
{
    json blocks = json::array();
    for (const auto& b : sp.blocks)
        blocks.push_back({{"exponents", b.exponents}, {"multiplicity", b.multiplicity()}, {"complex", b.complex}, {"basis", mat(b.basis)}});
    return {{"k", sp.k}, {"m", sp.m}, {"kappa", num(sp.kappa)}, {"invariance_residual", num(sp.invariance_residual)}, {"blocks", blocks}};
}

inline json to_json(const DirectionClass& dc)
{
    return {{"tag", to_string(dc.tag)}, {"chi", dc.chi}, {"sign", dc.sign}, {"near_singular", dc.near_singular}};
}

inline json to_json(const GapConstants& g)
{
    json j{{"a", num(g.a)}, {"b1", num(g.b1)}, {"b2", num(g.b2)}, {"bv", num(g.bv)}, {"holds", g.holds}};
    if (g.b3) j["b3"] = num(*g.b3);
    j["b3_ok"] = g.b3_ok;
    return j;
}

inline json to_json(const WeylChambers& w)
{
    json normals = json::array(), arcs = json::array();
    for (const auto& n : w.normals) normals.push_back(vec(n));
    for (const auto& [a, b] : w.arcs) arcs.push_back({num(a), num(b)});
    return {{"normals", normals}, {"everywhere_singular", w.everywhere_singular}, {"singular_angles", w.singular_angles}, {"arcs", arcs}};
}

inline json to_json(const AngleSweep& s)
{
    json lines = json::array();
    for (const auto& l : s.lines)
        lines.push_back({{"angle_rad", l.angle},
                         {"angle_deg", l.angle * 180.0 / std::numbers::pi},
                         {"tag", to_string(l.tag)},
                         {"blocks", l.blocks},
                         {"bucket", l.bucket}});
    return {{"buckets", s.buckets},
            {"center_counts", {{"regular", s.regular}, {"first-type singular", s.first_type}, {"second-type singular", s.second_type}}},
            {"everywhere_singular", s.everywhere_singular},
            {"singular_lines", lines}};
}

inline json to_json(const RateReport& r)
{
    json j{{"a", num(r.a)}, {"lambda1", num(r.lambda1)}, {"lambda2", num(r.lambda2)}, {"hyperbolic_ok", r.hyperbolic_ok},
           {"center_ok", r.center_ok}, {"pass", r.pass()}};
    j["lambda3"] = r.lambda3 ? num(*r.lambda3) : json(nullptr);
    return j;
}

inline json to_json(const StepSequence& s)
{
    return s.points;
}

/// Fixed-point vector as exact dyadic strings "X/2^bits".
inline json fixed(const hp::FVec& v, long bits)
{
    json a = json::array();
    for (const auto& c : v) a.push_back(c.get_str() + "/2^" + std::to_string(bits));
    return a;
}

inline json to_json(const ShadowResult& r)
{
    return {{"point", vec(r.point)},      {"point_exact", fixed(r.point_fixed, r.bits)},
            {"sup_error", num(r.sup_error)}, {"defect", num(r.defect)},
            {"lipschitz_ratio", num(r.lipschitz_ratio)}, {"L", num(r.L)},
            {"per_step_errors", r.per_step_errors}};
}

inline json to_json(const QuasiShadowResult& r)
{
    return {{"point", vec(r.points.empty() ? Vec() : r.points.front())},
            {"sup_error", num(r.sup_error)},
            {"defect", num(r.defect)},
            {"max_translation", num(r.max_translation)},
            {"recurrence_residual", num(r.recurrence_residual)},
            {"torus_recurrence_residual", num(r.torus_recurrence_residual)},
            {"center_residual", num(r.center_residual)},
            {"L", num(r.L)}};
}

} // namespace subdyn::io

#endif
