#ifndef SUBDYN_CLI_HPP
#define SUBDYN_CLI_HPP

// Command-line front end. run() parses argv, dispatches to the library and
// writes one JSON report (plus an optional CSV series).

#include "io.hpp"
#include "parallel.hpp"

#include <CLI11.hpp>
#include <gmp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace subdyn::cli {

using io::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a.
class Digest {
public:
    void add(std::string_view s)
    {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
        add_sep();
    }
    std::string hex() const
    {
        std::ostringstream o;
        o << std::hex << std::setw(16) << std::setfill('0') << h_;
        return o.str();
    }

private:
    void add_sep()
    {
        h_ ^= 0xff;
        h_ *= 0x100000001b3ULL;
    }
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline json versions()
{
    return {{"subdyn", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"gmp", gmp_version},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                  "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

inline std::string utc_timestamp()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// State shared by one invocation.
struct Context {
    std::string command;
    Digest digest;
    json results = json::object();
    json warnings = json::array();
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;

    void input_file(const std::string& path) { digest.add(slurp(path)); }
    void warn(const std::string& w) { warnings.push_back(w); }
};

inline std::string fmt(double x)
{
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
}

inline std::string fmt(const IntVec& n)
{
    std::string s;
    for (std::size_t i = 0; i < n.size(); ++i) s += (i ? " " : "") + std::to_string(n[i]);
    return s;
}

inline Vec seeded_point(int m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = u(rng);
    return x;
}

/// x_{j+1} = alpha^g x_j + eta_j on the points 0, g, ..., (length-1) g of a
/// rational line, |eta_j| <= delta.
inline PseudoOrbit line_orbit(const ActionSpec& spec, const Direction& d, int length, double delta, std::uint64_t seed)
{
    auto g = smallest_integer_generator(d);
    if (!g) throw Error(ErrorKind::InvalidInput, "this command needs a rational direction");
    if (length < 2) throw Error(ErrorKind::InvalidInput, "length must be at least 2");
    if (!(delta >= 0.0) || delta >= 0.25) throw Error(ErrorKind::DefectTooLarge, "delta must lie in [0, 0.25)");
    std::vector<IntVec> pts;
    for (long long j = 0; j < length; ++j) {
        IntVec n = *g;
        for (auto& v : n) v *= j;
        pts.push_back(n);
    }
    PseudoOrbit o;
    o.window = make_window(pts, d);
    o.delta = delta;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0), eta(-delta, delta);
    Vec x(spec.m);
    for (Eigen::Index i = 0; i < spec.m; ++i) x[i] = u(rng);
    BigMatrix M = action_matrix(spec, *g);
    for (int j = 0; j < length; ++j) {
        o.points.push_back(x);
        x = apply_matrix(M, x);
        for (Eigen::Index i = 0; i < spec.m; ++i) x[i] += eta(rng);
        x = wrap01(x);
    }
    return o;
}

// ---- commands

inline void cmd_spectrum(Context& ctx, const std::string& spec_path)
{
    ctx.input_file(spec_path);
    auto spec = io::action_from_json(io::read_file(spec_path));
    auto sp = common_eigenstructure(spec);
    ctx.results["spectrum"] = io::to_json(sp);
    if (sp.invariance_residual > 1e-9) ctx.warn("block invariance residual above 1e-9");
}

inline void cmd_classify(Context& ctx, const std::string& spec_path, const std::string& v, int sweep)
{
    ctx.input_file(spec_path);
    auto spec = io::action_from_json(io::read_file(spec_path));
    auto sp = common_eigenstructure(spec);
    if (!v.empty()) {
        Direction d = io::parse_direction(v);
        if (d.dim() != sp.k) throw Error(ErrorKind::InvalidInput, "direction dimension does not match k");
        auto dc = classify_direction(sp, d.generator());
        ctx.results["direction"] = io::to_json(d);
        ctx.results["class"] = io::to_json(dc);
        if (dc.tag != DirectionTag::SecondTypeSingular) ctx.results["gap_constants"] = io::to_json(gap_constants(sp, d.generator()));
        if (dc.near_singular) ctx.warn("direction is within 1e-6 relative of a singular line");
        return;
    }
    auto s = angle_sweep(sp, sweep, 1e-12, thread_count());
    json r = io::to_json(s);
    // summary over lines L_theta: regular lines shadow, are expansive and
    // are Anosov; singular lines are listed individually
    json excluded = json::array();
    for (const auto& l : s.lines) excluded.push_back(l.angle * 180.0 / std::numbers::pi);
    r["summary"] = {{"regular_lines", s.regular > 0 ? "all lines except singular_lines" : "none"},
                    {"E1_S1_A1_contain_regular_lines", s.regular > 0},
                    {"excluded_angles_deg", excluded},
                    {"quasi_shadowing_lines", s.first_type > 0 ? "all first-type singular lines" : "none"}};
    ctx.results["sweep"] = r;
    ctx.csv_header = {"bucket", "angle_deg", "tag"};
    for (int b = 0; b < s.buckets; ++b)
        ctx.csv_rows.push_back({std::to_string(b), fmt((b + 0.5) * 180.0 / s.buckets), to_string(s.center_tags[static_cast<std::size_t>(b)])});
}

inline void cmd_chambers(Context& ctx, const std::string& spec_path)
{
    ctx.input_file(spec_path);
    auto spec = io::action_from_json(io::read_file(spec_path));
    auto sp = common_eigenstructure(spec);
    ctx.results["chambers"] = io::to_json(weyl_chambers(sp));
    if (auto n = find_regular_integer_vector(sp)) ctx.results["regular_integer_vector"] = *n;
    else ctx.results["regular_integer_vector"] = nullptr;
}

struct ShadowArgs {
    std::string spec, direction = "1,0", orbit_in, orbit_out;
    double delta = 1e-8;
    int length = 2001;
    std::uint64_t seed = 1;
};

inline PseudoOrbit shadow_input(Context& ctx, const ActionSpec& spec, const Direction& d, const ShadowArgs& a)
{
    if (!a.orbit_in.empty()) {
        ctx.input_file(a.orbit_in);
        return io::orbit_from_json(io::read_file(a.orbit_in));
    }
    auto o = line_orbit(spec, d, a.length, a.delta, a.seed);
    if (!a.orbit_out.empty()) {
        std::ofstream out(a.orbit_out);
        out << io::to_json(o, d).dump() << '\n';
    }
    return o;
}

inline void cmd_shadow(Context& ctx, const ShadowArgs& a)
{
    ctx.input_file(a.spec);
    auto spec = io::action_from_json(io::read_file(a.spec));
    auto sp = common_eigenstructure(spec);
    Direction d = io::parse_direction(a.direction);
    if (d.dim() != spec.k) throw Error(ErrorKind::InvalidInput, "direction dimension does not match k");
    if (classify_direction(sp, d.generator()).tag != DirectionTag::Regular)
        throw Error(ErrorKind::NotHyperbolic, "direction is singular; try quasi-shadow");
    auto orbit = shadow_input(ctx, spec, d, a);
    auto r = shadow_rational_tube(spec, sp, orbit, d);
    json j = io::to_json(r.line);
    j["window_sup_error"] = io::num(r.window_sup_error);
    j["origin_point"] = io::vec(r.origin_point);
    j["lipschitz_ratio_le_L"] = r.line.lipschitz_ratio <= r.line.L;
    j.erase("per_step_errors");
    ctx.results["direction"] = io::to_json(d);
    ctx.results["shadow"] = j;
    ctx.csv_header = {"p", "n", "error"};
    for (std::size_t p = 0; p < r.line.per_step_errors.size(); ++p) {
        IntVec n = r.generator;
        for (auto& v : n) v *= r.first_multiple + static_cast<long long>(p);
        ctx.csv_rows.push_back({std::to_string(p), fmt(n), fmt(r.line.per_step_errors[p])});
    }
}

inline void cmd_quasi_shadow(Context& ctx, const ShadowArgs& a)
{
    ctx.input_file(a.spec);
    auto spec = io::action_from_json(io::read_file(a.spec));
    auto sp = common_eigenstructure(spec);
    Direction d = io::parse_direction(a.direction);
    auto g = smallest_integer_generator(d);
    if (!g) throw Error(ErrorKind::InvalidInput, "quasi-shadow needs a rational direction");
    if (d.dim() != spec.k) throw Error(ErrorKind::InvalidInput, "direction dimension does not match k");
    if (classify_direction(sp, d.generator()).tag == DirectionTag::SecondTypeSingular)
        throw Error(ErrorKind::SecondTypeSingular, "no hyperbolic part along this line");
    auto orbit = shadow_input(ctx, spec, d, a);
    auto steps = make_steps(spec, line_steps(orbit.window));
    for (const auto& s : steps.dn)
        if (s != *g) throw Error(ErrorKind::MissingLatticePoint, "orbit window is not a run of consecutive line points");
    auto sctx = prepare_shadow(sp, splitting_for(sp, d.unit()), steps);
    auto r = quasi_shadow(sctx, steps, orbit.points);
    json j = io::to_json(r);
    j["center_dimension"] = sctx.split.dim_c();
    ctx.results["direction"] = io::to_json(d);
    ctx.results["quasi_shadow"] = j;
    ctx.csv_header = {"p", "correction", "translation"};
    for (std::size_t p = 0; p < r.corrections.size(); ++p)
        ctx.csv_rows.push_back({std::to_string(p), fmt(r.corrections[p].cwiseAbs().maxCoeff()),
                                fmt(r.translations[p].cwiseAbs().maxCoeff())});
}

struct ShiftArgs {
    std::string config;
    int radius = 6, W = 24, orbits = 1, flips = 1;
    double delta = std::exp2(-8), min_radius = -1;
    std::uint64_t seed = 1;
    bool ledrappier = false;
};

inline void cmd_shift_shadow(Context& ctx, const ShiftArgs& a)
{
    ctx.input_file(a.config);
    auto z = io::configuration_from_json(io::read_file(a.config));
    if (a.orbits < 1) throw Error(ErrorKind::InvalidInput, "need at least one orbit");
    auto box = box_window(z.k, a.radius, Direction::rational(IntVec(static_cast<std::size_t>(z.k), 1)));
    const double min_radius = a.min_radius >= 0 ? a.min_radius : (a.ledrappier ? 18.0 : 10.0);
    json runs = json::array();
    double worst_error = 0, worst_defect = 0, eps = 0;
    int bad = 0, invalid = 0;
    for (int t = 0; t < a.orbits; ++t) {
        auto o = noisy_shift_orbit(z, box, a.W, min_radius, a.seed + static_cast<std::uint64_t>(t), a.ledrappier,
                                   a.ledrappier ? -1 : a.flips);
        if (o.delta > a.delta) throw Error(ErrorKind::DefectTooLarge, "generated pseudo-orbit exceeds delta; raise --min-radius");
        auto xs = shadow_shift(o);
        auto c = verify_shift_shadow(o, xs, a.delta);
        bool valid = !a.ledrappier || ledrappier_validate(xs);
        worst_error = std::max(worst_error, c.max_error);
        worst_defect = std::max(worst_defect, o.delta);
        eps = c.epsilon;
        if (c.max_error > c.epsilon || c.disagreements_inside > 0) ++bad;
        if (!valid) ++invalid;
        ctx.csv_rows.push_back({std::to_string(t), fmt(o.delta), fmt(c.max_error), fmt(c.epsilon)});
        if (t == 0) runs.push_back({{"radius", c.radius}, {"epsilon", c.epsilon}, {"max_error", c.max_error},
                                    {"max_unknown", c.max_unknown}, {"disagreements_inside", c.disagreements_inside},
                                    {"shadow", io::to_json(xs)}});
    }
    ctx.csv_header = {"orbit", "defect", "max_error", "epsilon"};
    ctx.results["shift_shadow"] = {{"orbits", a.orbits},     {"delta", a.delta},          {"epsilon", eps},
                                   {"max_error", worst_error}, {"max_defect", worst_defect}, {"failures", bad},
                                   {"ledrappier", a.ledrappier}, {"ledrappier_invalid", invalid}, {"first", runs.at(0)}};
    if (bad > 0) throw Error(ErrorKind::Inconsistent, std::to_string(bad) + " pseudo-orbits not shadowed within epsilon");
}

inline void cmd_ledrappier_validate(Context& ctx, const std::string& path)
{
    ctx.input_file(path);
    auto x = io::configuration_from_json(io::read_file(path));
    ctx.results["valid"] = ledrappier_validate(x);
}

inline void cmd_ledrappier_random(Context& ctx, int W, std::uint64_t seed, const std::string& save)
{
    auto x = ledrappier_random(seed, W);
    ctx.results["valid"] = ledrappier_validate(x);
    ctx.results["configuration"] = io::to_json(x);
    if (!save.empty()) {
        std::ofstream out(save);
        out << io::to_json(x).dump() << '\n';
    }
}

struct SequenceArgs {
    std::string spec, direction;
    int N = 0, P = 1000;
    double t0 = 0, delta = 1e-8, a = 0;
    std::uint64_t seed = 1;
};

inline void cmd_sequence(Context& ctx, const SequenceArgs& args)
{
    ctx.input_file(args.spec);
    auto spec = io::action_from_json(io::read_file(args.spec));
    auto sp = common_eigenstructure(spec);
    Direction d = io::parse_direction(args.direction);
    if (d.is_rational()) d = Direction::irrational(d.generator());
    const double t0 = args.t0 > 0 ? args.t0 : std::sqrt(static_cast<double>(spec.k));
    std::optional<double> a = args.a > 0 ? std::optional<double>(args.a) : std::nullopt;
    int N = args.N;
    if (N <= 0) {
        auto s = search_N(sp, d, t0, args.P, a);
        N = s.N;
        a = s.a;
        json trace = json::array();
        for (const auto& st : s.trace) trace.push_back({{"N", st.N}, {"a", st.a}, {"pass", st.pass}});
        ctx.results["search"] = {{"N", s.N}, {"a", s.a}, {"trace", trace}};
    }
    auto seq = build_step_sequence(d, t0, N, args.P);
    auto chk = check_sequence(seq);
    ctx.results["sequence"] = io::to_json(seq);
    ctx.results["check"] = {{"ok", chk.ok()}, {"tube", chk.tube}, {"signs", chk.signs}, {"n2n", chk.n2n}, {"max_distance", chk.max_distance}, {"min_step", chk.min_step}, {"max_step", chk.max_step}};
    auto w = tube_lattice_points(d, t0, to_real(seq.points.back()).norm() + 1);
    auto orbit = noisy_orbit(spec, w, seeded_point(spec.m, args.seed), args.delta, args.seed);
    auto r = shadow_along_sequence(spec, sp, seq, orbit, a);
    json j{{"rates", io::to_json(r.rates)},
           {"hyperbolic", r.hyperbolic},
           {"L", io::num(r.L)},
           {"L2", io::num(r.L2)},
           {"window_defect", io::num(r.window_defect)},
           {"sub_defect", io::num(r.sub_defect)},
           {"sequence_sup_error", io::num(r.sequence_sup_error)},
           {"window_sup_error", io::num(r.window_sup_error)},
           {"carry_norm", io::num(r.carry_norm)},
           {"path_points_missing", r.path_points_missing}};
    if (r.hyp) j["point_exact"] = io::fixed(r.hyp->point_fixed, r.hyp->bits);
    ctx.results["shadow"] = j;
    ctx.csv_header = {"p", "n", "error"};
    if (r.hyp)
        for (std::size_t p = 0; p < r.hyp->per_step_errors.size(); ++p)
            ctx.csv_rows.push_back({std::to_string(p), fmt(seq.points[p]), fmt(r.hyp->per_step_errors[p])});
}

inline void cmd_suspend_shadow(Context& ctx, const std::string& spec_path, const std::string& chain_path, const std::string& dir_text)
{
    ctx.input_file(spec_path);
    ctx.input_file(chain_path);
    auto spec = io::action_from_json(io::read_file(spec_path));
    auto sp = common_eigenstructure(spec);
    auto chain = io::chain_from_json(io::read_file(chain_path));
    if (chain.jumps.empty() && dir_text.empty()) throw Error(ErrorKind::InvalidInput, "need --direction for a chain without jumps");
    Direction d = dir_text.empty() ? Direction::irrational(chain.jumps.front()) : io::parse_direction(dir_text);
    auto r = shadow_chain(spec, sp, chain, d);
    json j{{"direction", io::to_json(d)},
           {"hyperbolic", r.hyperbolic},
           {"chain_defect", io::num(r.chain.defect)},
           {"min_jump", io::num(r.chain.min_jump)},
           {"claimed_delta", chain.delta},
           {"claimed_a", chain.a},
           {"C", r.C},
           {"L", io::num(r.L)},
           {"lattice_defect", io::num(r.lattice_defect)},
           {"reduction_sound", r.reduction_sound},
           {"phase_drift", io::num(r.phase_drift)},
           {"coarse_nodes", r.coarse.size()},
           {"epsilon", io::num(r.epsilon)},
           {"bound", io::num(r.bound)},
           {"within_bound", r.epsilon <= r.bound}};
    if (r.hyperbolic) {
        j["point"] = {{"u", io::vec(r.point.u)}, {"x", io::vec(r.point.x)}, {"x_exact", io::fixed(r.point_fixed, r.bits)}};
    } else {
        j["quasi_shadow"] = io::to_json(*r.quasi);
    }
    if (chain.delta > 0 && r.chain.defect >= chain.delta) ctx.warn("measured chain defect is not below the claimed delta");
    if (chain.a > 0 && r.chain.min_jump <= chain.a) ctx.warn("some jump is not longer than the claimed a");
    ctx.results["suspension"] = j;
    ctx.csv_header = {"p", "m", "error"};
    for (std::size_t p = 0; p < r.errors.size(); ++p)
        ctx.csv_rows.push_back({std::to_string(p), fmt(r.lattice[p]), fmt(r.errors[p])});
}

// ---- driver

inline json make_report(const Context& ctx, bool ok, const std::string& error_kind, const std::string& message)
{
    json rep{{"schema_version", kSchemaVersion},
             {"command", ctx.command},
             {"inputs_digest", ctx.digest.hex()},
             {"results", ctx.results},
             {"warnings", ctx.warnings},
             {"versions", versions()},
             {"timestamp", utc_timestamp()},
             {"status", ok ? "ok" : "error"}};
    if (!ok) rep["error"] = {{"kind", error_kind}, {"message", message}};
    return rep;
}

/// Returns the exit code: 0 success, 2 invalid input, 3 analysis failure.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Shadowing and expansiveness along lines for commuting toral automorphisms"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string report_path, csv_path;
    app.add_option("--report", report_path, "write the JSON report here instead of stdout");
    app.add_option("--csv", csv_path, "write the per-step series as CSV");

    std::string spec_path, second_path, v, dir;
    int sweep = 0;
    ShadowArgs sh;
    ShiftArgs sa;
    SequenceArgs sq;
    int W = 12;
    std::uint64_t seed = 1;
    std::string save;

    auto* c_spec = app.add_subcommand("spectrum", "Lyapunov blocks and exponents");
    c_spec->add_option("spec", spec_path)->required();

    auto* c_cls = app.add_subcommand("classify", "classify one direction or sweep all angles (k = 2)");
    c_cls->add_option("spec", spec_path)->required();
    auto* o_v = c_cls->add_option("--v", v, "direction, e.g. 1,0 or 1,sqrt(2)");
    auto* o_sw = c_cls->add_option("--sweep", sweep, "number of angle buckets")->check(CLI::Range(2, 1000000));
    o_v->excludes(o_sw);

    auto* c_ch = app.add_subcommand("chambers", "Lyapunov hyperplanes and Weyl chambers");
    c_ch->add_option("spec", spec_path)->required();

    auto shadow_opts = [&](CLI::App* c) {
        c->add_option("spec", sh.spec)->required();
        c->add_option("--direction", sh.direction, "rational direction");
        c->add_option("--delta", sh.delta);
        c->add_option("--length", sh.length, "number of line points");
        c->add_option("--seed", sh.seed);
        c->add_option("--orbit", sh.orbit_in, "read the pseudo-orbit from JSON instead of generating it");
        c->add_option("--save-orbit", sh.orbit_out, "write the generated pseudo-orbit");
    };
    auto* c_sh = app.add_subcommand("shadow", "hyperbolic shadowing along a rational line");
    shadow_opts(c_sh);
    auto* c_qs = app.add_subcommand("quasi-shadow", "quasi-shadowing along a rational line with a center part");
    shadow_opts(c_qs);

    auto* c_ss = app.add_subcommand("shift-shadow", "shadow symbolic pseudo-orbits on a box");
    c_ss->add_option("config", sa.config, "base configuration")->required();
    c_ss->add_option("--radius", sa.radius);
    c_ss->add_option("--W", sa.W, "radius of each configuration");
    c_ss->add_option("--orbits", sa.orbits);
    c_ss->add_option("--flips", sa.flips);
    c_ss->add_option("--delta", sa.delta);
    c_ss->add_option("--min-radius", sa.min_radius, "noise stays at |i| >= this");
    c_ss->add_option("--seed", sa.seed);
    c_ss->add_flag("--ledrappier", sa.ledrappier);

    auto* c_led = app.add_subcommand("ledrappier", "three-dot subshift");
    c_led->require_subcommand(1);
    auto* c_lv = c_led->add_subcommand("validate");
    c_lv->add_option("config", spec_path)->required();
    auto* c_lr = c_led->add_subcommand("random");
    c_lr->add_option("--W", W);
    c_lr->add_option("--seed", seed);
    c_lr->add_option("--save", save);

    auto* c_sq = app.add_subcommand("sequence", "step sequence and shadowing along an irrational line");
    c_sq->add_option("spec", sq.spec)->required();
    c_sq->add_option("--direction", sq.direction)->required();
    c_sq->add_option("--N", sq.N, "step scale (searched when omitted)");
    c_sq->add_option("--P", sq.P);
    c_sq->add_option("--t0", sq.t0, "tube thickness (default sqrt k)");
    c_sq->add_option("--a", sq.a);
    c_sq->add_option("--delta", sq.delta);
    c_sq->add_option("--seed", sq.seed);

    auto* c_su = app.add_subcommand("suspend-shadow", "shadow a chain of the suspension flow");
    c_su->add_option("spec", spec_path)->required();
    c_su->add_option("chain", second_path)->required();
    c_su->add_option("--direction", dir);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 2;
    }

    Context ctx;
    for (auto* c : app.get_subcommands()) ctx.command = c->get_name();
    if (c_led->parsed()) ctx.command += std::string(" ") + (c_lv->parsed() ? "validate" : "random");
    // the digest covers the arguments, not where output goes
    for (std::size_t i = 0; i < args.size(); ++i) {
        if ((args[i] == "--report" || args[i] == "--csv") && i + 1 < args.size()) {
            ++i;
            continue;
        }
        ctx.digest.add(args[i]);
    }

    int code = 0;
    std::string kind, message;
    try {
        if (c_spec->parsed()) cmd_spectrum(ctx, spec_path);
        else if (c_cls->parsed()) {
            if (v.empty() && sweep == 0) throw Error(ErrorKind::InvalidInput, "classify needs --v or --sweep");
            cmd_classify(ctx, spec_path, v, sweep);
        } else if (c_ch->parsed()) cmd_chambers(ctx, spec_path);
        else if (c_sh->parsed()) cmd_shadow(ctx, sh);
        else if (c_qs->parsed()) cmd_quasi_shadow(ctx, sh);
        else if (c_ss->parsed()) cmd_shift_shadow(ctx, sa);
        else if (c_lv->parsed()) cmd_ledrappier_validate(ctx, spec_path);
        else if (c_lr->parsed()) cmd_ledrappier_random(ctx, W, seed, save);
        else if (c_sq->parsed()) cmd_sequence(ctx, sq);
        else if (c_su->parsed()) cmd_suspend_shadow(ctx, spec_path, second_path, dir);
    } catch (const Error& e) {
        code = e.is_input_error() ? 2 : 3;
        kind = to_string(e.kind());
        message = e.what();
    } catch (const std::exception& e) {
        code = 3;
        kind = "Internal";
        message = e.what();
    }
    if (code != 0) err << message << '\n';

    json rep = make_report(ctx, code == 0, kind, message);
    if (report_path.empty()) out << rep.dump(2) << '\n';
    else {
        std::ofstream f(report_path);
        if (!f) {
            err << "cannot write " << report_path << '\n';
            return 2;
        }
        f << rep.dump(2) << '\n';
    }
    if (!csv_path.empty() && !ctx.csv_header.empty()) {
        std::ofstream f(csv_path);
        for (std::size_t i = 0; i < ctx.csv_header.size(); ++i) f << (i ? "," : "") << ctx.csv_header[i];
        f << '\n';
        for (const auto& row : ctx.csv_rows) {
            for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
            f << '\n';
        }
    }
    return code;
}

} // namespace subdyn::cli

#endif
