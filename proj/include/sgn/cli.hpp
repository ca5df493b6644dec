#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <CLI11.hpp>

#include "sgn/checks.hpp"
#include "sgn/errors.hpp"
#include "sgn/function_model.hpp"
#include "sgn/gn_harness.hpp"
#include "sgn/ri_norms.hpp"

namespace sgn {

enum class ReportFormat { csv, text };

inline std::string to_string(ReportFormat f) { return f == ReportFormat::csv ? "csv" : "text"; }

inline ReportFormat parse_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "text") return ReportFormat::text;
    throw ConfigError("unknown report format '" + s + "' (expected csv or text)");
}

/// A GN case as declared in a configuration: the function is referenced by id.
struct CaseEntry {
    std::string id;
    std::string function;
    int j = 1;
    int k = 2;
    SpaceDescriptor X;
    SpaceDescriptor Y;
    GNMode mode = GNMode::pure;
    std::optional<std::size_t> n;  // defaults to the run resolution of the function's dimension
    double stability = 0.01;
    std::optional<double> max_ratio;
};

struct RunConfig {
    std::vector<FunctionEntry> functions;
    std::vector<CaseEntry> cases;
    CheckFlags flags;
    std::size_t resolution = 1024;
    std::size_t resolution_2d = 128;
    ReportFormat format = ReportFormat::csv;
    std::uint32_t seed = 20240607;
    std::size_t random_tuples = 50;
    std::size_t random_functions = 0;
    std::string out_dir = "reports";
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

// Accepts plain numbers and multiples of pi: "2", "-0.5", "pi", "-pi/2",
// "3pi/2", "1.5*pi".
inline double parse_real(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    const auto bad = [&] { return ConfigError(where + ": cannot parse number '" + raw + "'"); };
    const auto pi_pos = s.find("pi");
    if (pi_pos == std::string::npos) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != s.size() || !std::isfinite(v)) throw bad();
        return v;
    }
    std::string coef = trim(s.substr(0, pi_pos));
    std::string rest = trim(s.substr(pi_pos + 2));
    if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
    double c = 1.0;
    if (coef == "-")
        c = -1.0;
    else if (coef == "+" || coef.empty())
        c = 1.0;
    else
        c = parse_real(coef, where);
    double den = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') throw bad();
        den = parse_real(rest.substr(1), where);
        if (den == 0.0) throw bad();
    }
    return c * std::numbers::pi / den;
}

inline long long parse_integer(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse integer '" + raw + "'");
    }
    if (used != s.size()) throw ConfigError(where + ": cannot parse integer '" + raw + "'");
    return v;
}

inline std::size_t parse_count(const std::string& raw, const std::string& where, long long min = 0) {
    const long long v = parse_integer(raw, where);
    if (v < min) throw ConfigError(where + ": must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(where + ": expected a boolean, got '" + raw + "'");
}

inline Window parse_window(const std::string& raw, const std::string& where) {
    const auto parts = split(raw, ',');
    if (parts.size() != 2) throw ConfigError(where + ": window must be 'a, b'");
    Window w{parse_real(parts[0], where), parse_real(parts[1], where)};
    if (!(w.a < w.b)) throw ConfigError(where + ": window needs a < b");
    return w;
}

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline void set_check(CheckFlags& f, const std::string& name, bool on) {
    if (name == "overlap") f.overlap = on;
    else if (name == "pointwise") f.pointwise = on;
    else if (name == "observation") f.observation = on;
    else if (name == "operator-norm") f.operator_norm = on;
    else if (name == "modular") f.modular = on;
    else if (name == "young") f.young = on;
    else if (name == "gn") f.gn = on;
    else if (name == "chain") f.chain = on;
    else if (name == "induction") f.induction = on;
    else if (name == "norms") f.norms = on;
    else throw ConfigError("unknown check '" + name + "'");
}

}  // namespace detail

inline const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"overlap", "pointwise", "observation", "operator-norm", "modular",
                                                "young",   "gn",        "chain",       "induction",     "norms"};
    return names;
}

/// Comma separated check names; "all" selects everything, "none" nothing.
inline CheckFlags parse_checks(const std::string& list) {
    CheckFlags f;
    for (const auto& n : check_names()) detail::set_check(f, n, false);
    for (const auto& item : detail::split(list, ',')) {
        if (item.empty()) continue;
        if (item == "all") {
            for (const auto& n : check_names()) detail::set_check(f, n, true);
        } else if (item != "none") {
            detail::set_check(f, item, true);
        }
    }
    return f;
}

inline std::string to_string(const CheckFlags& f) {
    const std::vector<std::pair<std::string, bool>> on{
        {"overlap", f.overlap}, {"pointwise", f.pointwise}, {"observation", f.observation},
        {"operator-norm", f.operator_norm}, {"modular", f.modular}, {"young", f.young}, {"gn", f.gn},
        {"chain", f.chain}, {"induction", f.induction}, {"norms", f.norms}};
    std::string out;
    for (const auto& [n, b] : on)
        if (b) out += (out.empty() ? "" : ",") + n;
    return out.empty() ? "none" : out;
}

namespace detail {

inline FunctionEntry parse_function(const std::string& id, const boost::property_tree::ptree& sec) {
    FunctionEntry fe;
    fe.id = id;
    bool have_window = false;
    const std::string where = "function " + id;
    for (const auto& [key, node] : sec) {
        const std::string v = node.data();
        const std::string at = where + ", key " + key;
        if (key == "family") fe.spec.family = wrap(at, [&] { return parse_family(trim(v)); });
        else if (key == "dim") fe.spec.dim = static_cast<int>(parse_integer(v, at));
        else if (key == "center") fe.spec.center = parse_real(v, at);
        else if (key == "center_y") fe.spec.center_y = parse_real(v, at);
        else if (key == "width") fe.spec.width = parse_real(v, at);
        else if (key == "width_y") fe.spec.width_y = parse_real(v, at);
        else if (key == "amplitude") fe.spec.amplitude = parse_real(v, at);
        else if (key == "frequency") fe.spec.frequency = parse_real(v, at);
        else if (key == "radial") fe.spec.radial = parse_bool(v, at);
        else if (key == "window") {
            fe.spec.window = parse_window(v, at);
            have_window = true;
        } else if (key == "window_y") fe.spec.window_y = parse_window(v, at);
        else if (key == "axis") fe.axis = static_cast<int>(parse_integer(v, at));
        else if (key == "max_overlap") fe.max_overlap = static_cast<int>(parse_integer(v, at));
        else if (key == "max_excluded") fe.max_excluded = parse_real(v, at);
        else if (key == "spot_x") fe.spot_x = parse_real(v, at);
        else if (key == "spot_ratio") fe.spot_ratio = parse_real(v, at);
        else throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (!have_window) throw ConfigError(where + ": missing window");
    if (fe.spec.dim != 1 && fe.spec.dim != 2) throw ConfigError(where + ": dim must be 1 or 2");
    if (fe.spec.dim == 2 && sec.count("window_y") == 0) fe.spec.window_y = fe.spec.window;
    if (fe.axis != 1 && fe.axis != 2) throw ConfigError(where + ": axis must be 1 or 2");
    if (!(fe.spec.width > 0.0)) throw ConfigError(where + ": width must be positive");
    if (fe.spec.width_y < 0.0) throw ConfigError(where + ": width_y must be non-negative");
    if (!(fe.max_excluded >= 0.0 && fe.max_excluded <= 1.0)) throw ConfigError(where + ": max_excluded must lie in [0, 1]");
    if (fe.spot_x.has_value() != fe.spot_ratio.has_value())
        throw ConfigError(where + ": spot_x and spot_ratio go together");
    if (fe.spot_x && fe.spec.dim != 1) throw ConfigError(where + ": spot values are one-dimensional");
    if (fe.spec.dim == 2 && !fe.spec.compactly_supported())
        throw ConfigError(where + ": two-dimensional members must be compactly supported");
    return fe;
}

inline CaseEntry parse_case(const std::string& id, const boost::property_tree::ptree& sec) {
    CaseEntry c;
    c.id = id;
    const std::string where = "case " + id;
    bool have_x = false, have_y = false;
    for (const auto& [key, node] : sec) {
        const std::string v = trim(node.data());
        const std::string at = where + ", key " + key;
        if (key == "function") c.function = v;
        else if (key == "j") c.j = static_cast<int>(parse_integer(v, at));
        else if (key == "k") c.k = static_cast<int>(parse_integer(v, at));
        else if (key == "X") {
            c.X = wrap(at, [&] { return SpaceDescriptor::parse(v); });
            have_x = true;
        } else if (key == "Y") {
            c.Y = wrap(at, [&] { return SpaceDescriptor::parse(v); });
            have_y = true;
        } else if (key == "mode") c.mode = wrap(at, [&] { return parse_mode(v); });
        else if (key == "n") c.n = parse_count(v, at, 8);
        else if (key == "stability") c.stability = parse_real(v, at);
        else if (key == "max_ratio") c.max_ratio = parse_real(v, at);
        else throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (c.function.empty()) throw ConfigError(where + ": missing function");
    if (!have_x || !have_y) throw ConfigError(where + ": X and Y are required");
    if (!(c.j >= 1 && c.j < c.k && c.k <= 3)) throw ConfigError(where + ": need 1 <= j < k <= 3");
    if (c.X.tag() != c.Y.tag()) throw ConfigError(where + ": X and Y must share a tag");
    if (!(c.stability > 0.0)) throw ConfigError(where + ": stability must be positive");
    return c;
}

}  // namespace detail

/// Parses the structured-text (ini) configuration. Sections are `[run]`,
/// `[function <id>]` and `[case <id>]`, kept in file order.
inline RunConfig parse_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    std::set<std::string> ids;
    bool have_checks = false;
    for (const auto& [name, sec] : tree) {
        if (!sec.data().empty()) throw ConfigError("config: key '" + name + "' outside any section");
        const auto space = name.find(' ');
        const std::string kind = space == std::string::npos ? name : name.substr(0, space);
        const std::string id = space == std::string::npos ? "" : detail::trim(name.substr(space + 1));
        if (kind == "run") {
            if (!id.empty()) throw ConfigError("config: section [run] takes no id");
            for (const auto& [key, node] : sec) {
                const std::string v = detail::trim(node.data());
                const std::string at = "run, key " + key;
                if (key == "checks") {
                    cfg.flags = parse_checks(v);
                    have_checks = true;
                } else if (key == "resolution") cfg.resolution = detail::parse_count(v, at, 8);
                else if (key == "resolution_2d") cfg.resolution_2d = detail::parse_count(v, at, 8);
                else if (key == "format") cfg.format = parse_format(v);
                else if (key == "seed") cfg.seed = static_cast<std::uint32_t>(detail::parse_count(v, at));
                else if (key == "random_tuples") cfg.random_tuples = detail::parse_count(v, at);
                else if (key == "random_functions") cfg.random_functions = detail::parse_count(v, at);
                else if (key == "out") cfg.out_dir = v;
                else throw ConfigError("config: unknown [run] key '" + key + "'");
            }
        } else if (kind == "function" || kind == "case") {
            if (id.empty()) throw ConfigError("config: section [" + kind + "] needs an id");
            if (!ids.insert(kind + " " + id).second) throw ConfigError("config: duplicate " + kind + " '" + id + "'");
            if (kind == "function")
                cfg.functions.push_back(detail::parse_function(id, sec));
            else
                cfg.cases.push_back(detail::parse_case(id, sec));
        } else {
            throw ConfigError("config: unknown section [" + name + "]");
        }
    }
    if (!have_checks) cfg.flags = parse_checks("all");
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    return parse_config(in);
}

/// Cross-reference checks that need the whole configuration.
inline void validate(const RunConfig& cfg) {
    if (!cfg.flags.any()) throw ConfigError("config: no checks enabled");
    std::set<std::string> fids;
    for (const auto& f : cfg.functions) fids.insert(f.id);
    for (const auto& c : cfg.cases)
        if (!fids.count(c.function))
            throw ConfigError("case " + c.id + ": references undeclared function '" + c.function + "'");
}

/// Compactly supported one-dimensional members drawn from the seed.
inline std::vector<FunctionEntry> random_functions(std::uint32_t seed, std::size_t count) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> center(-1.0, 1.0), width(0.5, 2.0), amp(0.5, 3.0), freq(2.0, 6.0);
    std::vector<FunctionEntry> out;
    for (std::size_t i = 0; i < count; ++i) {
        FunctionEntry fe;
        fe.id = "random-" + std::to_string(i);
        fe.spec.family = i % 2 == 0 ? Family::smooth_bump : Family::modulated_bump;
        fe.spec.center = center(rng);
        fe.spec.width = width(rng);
        fe.spec.amplitude = amp(rng);
        const double f = freq(rng);
        if (fe.spec.family == Family::modulated_bump) fe.spec.frequency = f / fe.spec.width;
        fe.spec.window = {fe.spec.center - 1.25 * fe.spec.width, fe.spec.center + 1.25 * fe.spec.width};
        out.push_back(fe);
    }
    return out;
}

/// Serialized families: one record per corpus member.
struct FamilyRecord {
    struct Interval {
        double z = 0.0;
        double y = 0.0;
        int k = 0;
        int sign = 1;
    };
    struct Piece {
        std::size_t line = 0;
        double z = 0.0;
        double y = 0.0;
    };
    struct Slab {
        int k = 0;
        int sign = 1;
        double delta = 0.0;
        std::size_t half_width = 0;
        bool unresolved = false;
        std::vector<Piece> pieces{};
        std::vector<std::uint8_t> mask{};  // node mask over the 2D grid
    };
    std::string id;
    int dim = 1;
    int axis = 1;
    std::size_t n = 0;
    Window window{};
    Window window_y{};
    int k_min = 0;
    std::vector<Interval> intervals{};
    std::vector<Slab> slabs{};
};

inline FamilyRecord family_record(const std::string& id, const SparseFamily1D& f) {
    FamilyRecord r;
    r.id = id;
    r.n = f.grid.cells();
    r.window = {f.grid.a(), f.grid.b()};
    r.k_min = f.k_min;
    for (const auto& iv : f.intervals) r.intervals.push_back({iv.z, iv.y, iv.level, iv.sign});
    return r;
}

inline FamilyRecord family_record(const std::string& id, const SparseFamily2D& f) {
    FamilyRecord r;
    r.id = id;
    r.dim = 2;
    r.axis = f.axis;
    r.n = f.grid.x().cells();
    r.window = {f.grid.x().a(), f.grid.x().b()};
    r.window_y = {f.grid.y().a(), f.grid.y().b()};
    r.k_min = f.k_min;
    for (const auto& s : f.slabs) {
        FamilyRecord::Slab out{s.level, s.sign, s.delta, s.half_width, s.unresolved, {}, s.mask};
        for (const auto& p : s.pieces) out.pieces.push_back({p.line, p.z, p.y});
        r.slabs.push_back(std::move(out));
    }
    return r;
}

namespace detail {

inline std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
    return out + "\n";
}

}  // namespace detail

/// Run lengths of a boolean mask, alternating and starting with a run of
/// zeros (possibly empty).
inline std::vector<std::size_t> run_lengths(const std::vector<std::uint8_t>& mask) {
    std::vector<std::size_t> runs;
    std::uint8_t cur = 0;
    std::size_t len = 0;
    for (auto m : mask) {
        const std::uint8_t b = m ? 1 : 0;
        if (b != cur) {
            runs.push_back(len);
            cur = b;
            len = 0;
        }
        ++len;
    }
    runs.push_back(len);
    return runs;
}

inline std::vector<std::uint8_t> expand_runs(const std::vector<std::size_t>& runs) {
    std::vector<std::uint8_t> mask;
    std::uint8_t cur = 0;
    for (auto r : runs) {
        mask.insert(mask.end(), r, cur);
        cur ^= 1;
    }
    return mask;
}

inline std::string write_families(const std::vector<FamilyRecord>& records) {
    std::ostringstream o;
    for (const auto& r : records) {
        o << "family " << r.id << "\n";
        o << "  dim = " << r.dim << "\n  axis = " << r.axis << "\n  n = " << r.n << "\n";
        o << "  window = " << detail::exact(r.window.a) << ", " << detail::exact(r.window.b) << "\n";
        if (r.dim == 2)
            o << "  window_y = " << detail::exact(r.window_y.a) << ", " << detail::exact(r.window_y.b) << "\n";
        o << "  k_min = " << r.k_min << "\n";
        for (const auto& iv : r.intervals)
            o << "  interval z = " << detail::exact(iv.z) << ", y = " << detail::exact(iv.y) << ", k = " << iv.k
              << ", sign = " << iv.sign << "\n";
        for (const auto& s : r.slabs) {
            o << "  slab k = " << s.k << ", sign = " << s.sign << ", delta = " << detail::exact(s.delta)
              << ", half_width = " << s.half_width << ", unresolved = " << (s.unresolved ? 1 : 0) << "\n";
            o << "    mask =";
            for (auto r : run_lengths(s.mask)) o << " " << r;
            o << "\n";
            for (const auto& p : s.pieces)
                o << "    piece line = " << p.line << ", z = " << detail::exact(p.z) << ", y = " << detail::exact(p.y)
                  << "\n";
        }
        o << "end\n";
    }
    return o.str();
}

namespace detail {

// "a = 1, b = 2" into an ordered key map.
inline std::map<std::string, std::string> fields(const std::string& s, const std::string& where) {
    std::map<std::string, std::string> out;
    for (const auto& item : split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value in '" + item + "'");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

inline const std::string& need(const std::map<std::string, std::string>& m, const std::string& key,
                               const std::string& where) {
    const auto it = m.find(key);
    if (it == m.end()) throw ConfigError(where + ": missing '" + key + "'");
    return it->second;
}

}  // namespace detail

/// Inverse of write_families.
inline std::vector<FamilyRecord> read_families(const std::string& text) {
    std::vector<FamilyRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    FamilyRecord* cur = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "families line " + std::to_string(lineno);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t.rfind("family ", 0) == 0) {
            if (cur) throw ConfigError(where + ": nested family record");
            out.emplace_back();
            cur = &out.back();
            cur->id = detail::trim(t.substr(7));
            continue;
        }
        if (!cur) throw ConfigError(where + ": content outside a family record");
        if (t == "end") {
            cur = nullptr;
            continue;
        }
        const auto word_end = t.find(' ');
        const std::string word = t.substr(0, word_end);
        const std::string rest = word_end == std::string::npos ? "" : t.substr(word_end + 1);
        if (word == "interval") {
            const auto f = detail::fields(rest, where);
            cur->intervals.push_back({detail::parse_real(detail::need(f, "z", where), where),
                                      detail::parse_real(detail::need(f, "y", where), where),
                                      static_cast<int>(detail::parse_integer(detail::need(f, "k", where), where)),
                                      static_cast<int>(detail::parse_integer(detail::need(f, "sign", where), where))});
        } else if (word == "slab") {
            const auto f = detail::fields(rest, where);
            FamilyRecord::Slab s;
            s.k = static_cast<int>(detail::parse_integer(detail::need(f, "k", where), where));
            s.sign = static_cast<int>(detail::parse_integer(detail::need(f, "sign", where), where));
            s.delta = detail::parse_real(detail::need(f, "delta", where), where);
            s.half_width = detail::parse_count(detail::need(f, "half_width", where), where);
            s.unresolved = detail::parse_bool(detail::need(f, "unresolved", where), where);
            cur->slabs.push_back(std::move(s));
        } else if (word == "mask") {
            if (cur->slabs.empty()) throw ConfigError(where + ": mask before any slab");
            const auto eq = rest.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": mask needs '='");
            std::vector<std::size_t> runs;
            std::istringstream rs(rest.substr(eq + 1));
            std::string tok;
            while (rs >> tok) runs.push_back(detail::parse_count(tok, where));
            cur->slabs.back().mask = expand_runs(runs);
        } else if (word == "piece") {
            if (cur->slabs.empty()) throw ConfigError(where + ": piece before any slab");
            const auto f = detail::fields(rest, where);
            cur->slabs.back().pieces.push_back({detail::parse_count(detail::need(f, "line", where), where),
                                                detail::parse_real(detail::need(f, "z", where), where),
                                                detail::parse_real(detail::need(f, "y", where), where)});
        } else {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": unrecognized line");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string v = detail::trim(t.substr(eq + 1));
            if (key == "dim") cur->dim = static_cast<int>(detail::parse_integer(v, where));
            else if (key == "axis") cur->axis = static_cast<int>(detail::parse_integer(v, where));
            else if (key == "n") cur->n = detail::parse_count(v, where);
            else if (key == "window") cur->window = detail::parse_window(v, where);
            else if (key == "window_y") cur->window_y = detail::parse_window(v, where);
            else if (key == "k_min") cur->k_min = static_cast<int>(detail::parse_integer(v, where));
            else throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    if (cur) throw ConfigError("families: unterminated record " + cur->id);
    return out;
}

/// Everything a run produced, in deterministic order.
struct RunOutcome {
    std::vector<CheckRow> checks;
    std::vector<CaseResult> cases;
    std::vector<FamilyRecord> families;

    /// First failing verdict, if any.
    std::optional<std::string> first_violation() const {
        for (const auto& r : checks)
            if (!r.pass) return r.check + " " + r.subject + " (n=" + std::to_string(r.n) + "): value " +
                                detail::fmt(r.value) + " vs bound " + detail::fmt(r.bound) + "; " + r.detail;
        for (const auto& c : cases) {
            if (!c.error.empty()) return "case " + c.gncase.id + ": " + c.error;
            for (const auto& v : c.verdicts)
                if (!v.pass) return "case " + c.gncase.id + " " + v.name + ": " + v.detail;
        }
        return std::nullopt;
    }
    bool pass() const { return !first_violation().has_value(); }
};

inline std::vector<GNCase> resolve_cases(const RunConfig& cfg) {
    std::map<std::string, const FunctionEntry*> byid;
    for (const auto& f : cfg.functions) byid[f.id] = &f;
    std::vector<GNCase> out;
    for (const auto& e : cfg.cases) {
        const auto* f = byid.at(e.function);
        GNCase c;
        c.id = e.id;
        c.u = f->spec;
        c.axis = f->axis;
        c.j = e.j;
        c.k = e.k;
        c.X = e.X;
        c.Y = e.Y;
        c.mode = e.mode;
        c.n = e.n.value_or(f->spec.dim == 1 ? cfg.resolution : cfg.resolution_2d);
        c.stability_tol = e.stability;
        c.max_ratio = e.max_ratio;
        out.push_back(c);
    }
    return out;
}

/// Runs every selected check of the configuration.
inline RunOutcome execute(const RunConfig& config) {
    validate(config);
    RunOutcome out;
    CheckSettings cs;
    cs.n1 = config.resolution;
    cs.n2 = config.resolution_2d;
    auto corpus = config.functions;
    for (auto& f : random_functions(config.seed, config.random_functions)) corpus.push_back(std::move(f));
    const auto& fl = config.flags;
    for (const auto& fe : corpus) {
        try {
            auto res = fe.spec.dim == 1 ? check_function_1d(fe, fl, cs) : check_function_2d(fe, fl, cs);
            for (auto& r : res.rows) out.checks.push_back(std::move(r));
            if (res.family1d) out.families.push_back(family_record(fe.id, *res.family1d));
            if (res.family2d) out.families.push_back(family_record(fe.id, *res.family2d));
        } catch (const std::exception& e) {
            out.checks.push_back(CheckRow{"function-error", fe.id, fe.spec.dim == 1 ? cs.n1 : cs.n2, 0.0, 0.0, false,
                                          e.what()});
        }
    }
    if (fl.norms)
        for (auto& r : check_norm_closed_forms()) out.checks.push_back(std::move(r));
    if (fl.induction)
        for (auto& r : check_exponent_algebra(config.seed, config.random_tuples)) out.checks.push_back(std::move(r));
    out.cases = run_corpus(resolve_cases(config), fl);
    return out;
}

namespace detail {

inline std::string verdict_list(const CaseResult& c) {
    std::string out;
    for (const auto& v : c.verdicts) out += (out.empty() ? "" : ";") + v.name + "=" + (v.pass ? "pass" : "fail");
    if (!c.error.empty()) out += (out.empty() ? "" : ";") + std::string("error");
    return out.empty() ? "none" : out;
}

inline std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace detail

inline const std::vector<std::string>& gn_report_columns() {
    static const std::vector<std::string> cols{"case-id", "mode",  "j",           "k",             "X",
                                               "Y",       "Z",     "lhs",         "rhs-x",         "rhs-y",
                                               "ratio",   "overlap-max", "pointwise-max", "verdicts", "n",
                                               "ratio-2n", "eps",  "detail"};
    return cols;
}

inline std::vector<std::vector<std::string>> gn_report_rows(const RunOutcome& out) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : out.cases) {
        const auto& g = c.gncase;
        std::string Z, lhs, rx, ry, ratio, r2;
        if (c.report) {
            Z = c.report->Z.to_string();
            lhs = detail::fmt(c.report->lhs);
            rx = detail::fmt(c.report->rhs_x);
            ry = detail::fmt(c.report->rhs_y);
            ratio = detail::fmt(c.report->ratio);
            r2 = detail::opt(c.report->ratio_refined);
        }
        std::string det;
        for (const auto& v : c.verdicts) det += (det.empty() ? "" : " | ") + v.name + ": " + v.detail;
        if (!c.error.empty()) det += (det.empty() ? "" : " | ") + std::string("error: ") + c.error;
        rows.push_back({g.id, to_string(g.mode), std::to_string(g.j), std::to_string(g.k), g.X.to_string(),
                        g.Y.to_string(), Z, lhs, rx, ry, ratio,
                        c.overlap_max ? std::to_string(*c.overlap_max) : "", detail::opt(c.pointwise_max),
                        detail::verdict_list(c), std::to_string(g.n), r2, detail::fmt(g.stability_tol), det});
    }
    return rows;
}

inline const std::vector<std::string>& checks_report_columns() {
    static const std::vector<std::string> cols{"check", "subject", "n", "value", "bound", "verdict", "detail"};
    return cols;
}

inline std::vector<std::vector<std::string>> checks_report_rows(const RunOutcome& out) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : out.checks)
        rows.push_back({r.check, r.subject, std::to_string(r.n), detail::fmt(r.value), detail::fmt(r.bound),
                        r.pass ? "pass" : "fail", r.detail});
    return rows;
}

inline std::string render_table(const std::vector<std::string>& cols, const std::vector<std::vector<std::string>>& rows,
                                ReportFormat format, const std::string& record) {
    std::string out;
    if (format == ReportFormat::csv) {
        out = detail::csv_line(cols);
        for (const auto& r : rows) out += detail::csv_line(r);
        return out;
    }
    for (const auto& r : rows) {
        out += record + " " + r[0] + "\n";
        for (std::size_t i = 1; i < cols.size(); ++i) out += "  " + cols[i] + " = " + r[i] + "\n";
        out += "end\n";
    }
    return out;
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) throw ConfigError("cannot write '" + tmp + "'");
        o << content;
        o.flush();
        if (!o) throw ConfigError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot rename '" + tmp + "' to '" + path.string() + "': " + ec.message());
}

/// Report file names for a format.
inline std::vector<std::string> report_files(ReportFormat f) {
    const std::string ext = f == ReportFormat::csv ? ".csv" : ".txt";
    return {"gn_report" + ext, "checks_report" + ext, "families.txt"};
}

inline void write_reports(const RunOutcome& out, const std::string& dir, ReportFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    const auto names = report_files(format);
    const std::filesystem::path d(dir);
    write_atomic(d / names[0], render_table(gn_report_columns(), gn_report_rows(out), format, "case"));
    write_atomic(d / names[1], render_table(checks_report_columns(), checks_report_rows(out), format, "check"));
    write_atomic(d / names[2], write_families(out.families));
}

/// Command line entry point. `default_config` is used when --config is absent.
inline int run_cli(int argc, const char* const* argv, const std::string& default_config, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Sparse-domination verification of Gagliardo-Nirenberg inequalities in r.i. norms"};
    std::string config_path, out_dir, format, checks;
    std::optional<std::size_t> resolution;
    std::optional<std::uint32_t> seed;
    app.add_option("--config", config_path, "Run configuration (ini); the bundled default when absent");
    app.add_option("--out", out_dir, "Output directory for reports");
    app.add_option("--format", format, "Report format: csv or text");
    app.add_option("--resolution", resolution, "Override the 1D grid resolution n");
    app.add_option("--checks", checks, "Comma separated checks, or all");
    app.add_option("--seed", seed, "Seed for randomized corpus members and tuples");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    RunConfig cfg;
    try {
        cfg = config_path.empty() ? parse_config_text(default_config) : load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!format.empty()) cfg.format = parse_format(format);
        if (!checks.empty()) cfg.flags = parse_checks(checks);
        if (resolution) {
            if (*resolution < 8) throw ConfigError("--resolution must be at least 8");
            cfg.resolution = *resolution;
            for (auto& c : cfg.cases) c.n.reset();
        }
        if (seed) cfg.seed = *seed;
        validate(cfg);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }

    RunOutcome res;
    try {
        res = execute(cfg);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        write_reports(res, cfg.out_dir, cfg.format);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return 2;
    }
    std::size_t passed = 0;
    for (const auto& r : res.checks) passed += r.pass;
    std::size_t cases_passed = 0;
    for (const auto& c : res.cases) cases_passed += c.pass();
    out << "checks " << passed << "/" << res.checks.size() << " pass, cases " << cases_passed << "/"
        << res.cases.size() << " pass, reports in " << cfg.out_dir << "\n";
    if (const auto v = res.first_violation()) {
        err << "violation: " << *v << "\n";
        return 1;
    }
    return 0;
}

}  // namespace sgn
