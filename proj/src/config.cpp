#include "rmt/config.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "rmt/error.hpp"
#include "rmt/saddlepoint.hpp"

namespace rmt {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_double(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number()) bad(path(where, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(path(where, key), "must be finite");
    return x;
}

long long get_int(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::floor(x) == x && std::fabs(x) < 9e15) return (long long)x;
    }
    bad(path(where, key), "expected an integer");
}

std::vector<double> get_doubles(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array()) bad(path(where, key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number()) bad(path(where, key), "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

cplx to_cplx(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    bad(key, "expected a number or [re, im]");
}

json from_cplx(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<cplx> get_cplxs(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array()) bad(path(where, key), "expected an array");
    std::vector<cplx> out;
    for (const json& x : v) out.push_back(to_cplx(x, path(where, key)));
    return out;
}

EnsembleSpec parse_ensemble(const json& j) {
    const std::string w = "ensemble";
    reject_unknown(j, w, {"family", "N", "m", "a", "sigma", "tau", "b", "L"});
    if (!j.contains("family") || !j["family"].is_string()) bad(w + ".family", "required, one of ginibre|truncated");
    const std::string fam = j["family"];
    if (!j.contains("N")) bad(w + ".N", "required");
    EnsembleSpec s;
    s.N = int(get_int(j, w, "N"));
    if (fam == "ginibre") {
        s.family = Family::ginibre;
        if (!j.contains("a")) bad(w + ".a", "required for the ginibre family");
        s.a = get_doubles(j, w, "a");
        s.m = int(s.a.size());
        for (const char* k : {"sigma", "tau", "b", "L"})
            if (j.contains(k)) bad(path(w, k), "not allowed for the ginibre family");
    } else if (fam == "truncated") {
        s.family = Family::truncated;
        if (j.contains("a")) bad(w + ".a", "not allowed for the truncated family (use sigma and b)");
        if (j.contains("L") && !j.contains("tau")) {
            const json& L = j["L"];
            if (!L.is_array()) bad(w + ".L", "expected an array of integers");
            for (std::size_t k = 0; k < L.size(); ++k) {
                if (!L[k].is_number_integer()) bad(w + ".L", "expected an array of integers");
                s.L.push_back(L[k].get<int>());
                s.tau.push_back(double(s.L.back()) / s.N);
            }
        } else {
            if (!j.contains("tau")) bad(w + ".tau", "required for the truncated family");
            s.tau = get_doubles(j, w, "tau");
            if (j.contains("L")) {
                for (const json& x : j["L"]) {
                    if (!x.is_number_integer()) bad(w + ".L", "expected an array of integers");
                    s.L.push_back(x.get<int>());
                }
            }
        }
        s.m = int(s.tau.size());
        s.sigma = j.contains("sigma") ? get_doubles(j, w, "sigma") : std::vector<double>(s.m, 0.0);
        s.b = j.contains("b") ? get_doubles(j, w, "b") : std::vector<double>(s.m, 0.0);
    } else {
        bad(w + ".family", "must be ginibre or truncated");
    }
    if (j.contains("m") && get_int(j, w, "m") != s.m) bad(w + ".m", "disagrees with the parameter list length");
    try {
        s.validate();
    } catch (const ConfigError& e) {
        bad(w, e.what());
    }
    s.normalise();
    return s;
}

json dump_ensemble(const EnsembleSpec& s) {
    json j;
    j["family"] = family_name(s.family);
    j["N"] = s.N;
    j["m"] = s.m;
    if (s.family == Family::ginibre) {
        j["a"] = s.a;
    } else {
        j["sigma"] = s.sigma;
        j["tau"] = s.tau;
        j["b"] = s.b;
        if (!s.L.empty()) j["L"] = s.L;
    }
    return j;
}

GridSpec parse_grid(const json& j) {
    const std::string w = "grid";
    reject_unknown(j, w, {"kind", "re_min", "re_max", "im_min", "im_max", "nx", "ny", "r_max", "bins"});
    GridSpec g;
    const std::string kind = j.value("kind", std::string("rect"));
    if (kind == "rect") {
        g.kind = GridSpec::Kind::rect;
        for (const char* k : {"r_max", "bins"})
            if (j.contains(k)) bad(path(w, k), "only valid for kind radial");
        if (j.contains("re_min")) g.re_min = get_double(j, w, "re_min");
        if (j.contains("re_max")) g.re_max = get_double(j, w, "re_max");
        if (j.contains("im_min")) g.im_min = get_double(j, w, "im_min");
        if (j.contains("im_max")) g.im_max = get_double(j, w, "im_max");
        if (j.contains("nx")) g.nx = int(get_int(j, w, "nx"));
        if (j.contains("ny")) g.ny = int(get_int(j, w, "ny"));
    } else if (kind == "radial") {
        g.kind = GridSpec::Kind::radial;
        for (const char* k : {"re_min", "re_max", "im_min", "im_max", "nx", "ny"})
            if (j.contains(k)) bad(path(w, k), "only valid for kind rect");
        if (j.contains("r_max")) g.r_max = get_double(j, w, "r_max");
        if (j.contains("bins")) g.bins = int(get_int(j, w, "bins"));
    } else {
        bad(w + ".kind", "must be rect or radial");
    }
    g.validate();
    return g;
}

json dump_grid(const GridSpec& g) {
    if (g.kind == GridSpec::Kind::radial) return {{"kind", "radial"}, {"r_max", g.r_max}, {"bins", g.bins}};
    return {{"kind", "rect"}, {"re_min", g.re_min}, {"re_max", g.re_max}, {"im_min", g.im_min},
            {"im_max", g.im_max}, {"nx", g.nx},         {"ny", g.ny}};
}

LimitsSpec parse_limits(const json& j) {
    const std::string w = "limits";
    reject_unknown(j, w, {"family", "a", "delta", "sigma", "tau", "b", "regime", "u", "offsets"});
    LimitsSpec l;
    const std::string fam = j.value("family", std::string("ginibre_fixed"));
    try {
        if (fam == "ginibre_fixed") {
            if (!j.contains("a")) bad(w + ".a", "required for ginibre_fixed");
            l.params = LimitParams::fixed(get_doubles(j, w, "a"));
        } else if (fam == "ginibre_varying") {
            if (!j.contains("delta")) bad(w + ".delta", "required for ginibre_varying");
            l.params = LimitParams::varying(get_doubles(j, w, "delta"));
        } else if (fam == "truncated") {
            if (!j.contains("sigma") || !j.contains("tau")) bad(w, "sigma and tau are required for truncated");
            l.params = LimitParams::truncated(get_doubles(j, w, "sigma"), get_doubles(j, w, "tau"),
                                              j.contains("b") ? get_doubles(j, w, "b") : std::vector<double>{});
        } else {
            bad(w + ".family", "must be ginibre_fixed, ginibre_varying or truncated");
        }
        l.params.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        bad(w, e.what());
    }
    if (j.contains("regime")) {
        if (!j["regime"].is_string()) bad(w + ".regime", "expected a string");
        l.regime = j["regime"];
        if (l.regime != "bulk" && l.regime != "inner_edge" && l.regime != "outer_edge")
            bad(w + ".regime", "must be bulk, inner_edge or outer_edge");
    }
    if (j.contains("u")) l.u = to_cplx(j["u"], w + ".u");
    if (j.contains("offsets")) l.offsets = get_cplxs(j, w, "offsets");
    if (l.offsets.empty()) bad(w + ".offsets", "must not be empty");
    return l;
}

json dump_limits(const LimitsSpec& l) {
    json j;
    const LimitParams& p = l.params;
    switch (p.family) {
    case LimitFamily::ginibre_fixed:
        j["family"] = "ginibre_fixed";
        j["a"] = p.a;
        break;
    case LimitFamily::ginibre_varying:
        j["family"] = "ginibre_varying";
        j["delta"] = p.delta;
        break;
    case LimitFamily::truncated:
        j["family"] = "truncated";
        j["sigma"] = p.sigma;
        j["tau"] = p.tau;
        j["b"] = p.b;
        break;
    }
    j["regime"] = l.regime;
    j["u"] = from_cplx(l.u);
    json offs = json::array();
    for (cplx v : l.offsets) offs.push_back(from_cplx(v));
    j["offsets"] = offs;
    return j;
}

}  // namespace

const char* verb_name(Verb v) {
    switch (v) {
    case Verb::sample: return "sample";
    case Verb::kernel: return "kernel";
    case Verb::density: return "density";
    case Verb::limits: return "limits";
    case Verb::saddle_check: return "saddle-check";
    case Verb::verify: return "verify";
    }
    return "?";
}

Verb parse_verb(const std::string& s) {
    for (Verb v : {Verb::sample, Verb::kernel, Verb::density, Verb::limits, Verb::saddle_check, Verb::verify})
        if (s == verb_name(v)) return v;
    throw ConfigError("verb: unknown verb '" + s + "'");
}

void GridSpec::validate() const {
    if (kind == Kind::rect) {
        if (!(re_max >= re_min) || !(im_max >= im_min)) throw ConfigError("grid: ranges must satisfy min <= max");
        if (nx < 1 || ny < 1) throw ConfigError("grid: nx and ny must be >= 1");
        if (double(nx) * ny > 1e6) throw ConfigError("grid: at most 10^6 cells");
    } else {
        if (!(r_max > 0.0)) throw ConfigError("grid.r_max: must be positive");
        if (bins < 10) throw ConfigError("grid.bins: must be >= 10");
        if (bins > 100000) throw ConfigError("grid.bins: at most 100000");
    }
}

std::vector<cplx> GridSpec::points() const {
    std::vector<cplx> out;
    if (kind == Kind::rect) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double x = nx == 1 ? 0.5 * (re_min + re_max) : re_min + (re_max - re_min) * i / (nx - 1);
                const double y = ny == 1 ? 0.5 * (im_min + im_max) : im_min + (im_max - im_min) * j / (ny - 1);
                out.emplace_back(x, y);
            }
    } else {
        for (int k = 0; k < bins; ++k) out.emplace_back(r_max * (k + 0.5) / bins, 0.0);
    }
    return out;
}

void RunConfig::validate() const {
    ensemble.validate();
    if (trials < 1) throw ConfigError("trials: must be >= 1");
    if (trials > 1000000) throw ConfigError("trials: at most 10^6");
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
    if (grid) grid->validate();
    if (!(tolerances.rel_tol > 0.0 && tolerances.rel_tol < 1.0)) throw ConfigError("tolerances.rel_tol: must lie in (0, 1)");
    if (tolerances.max_subdivisions < 1) throw ConfigError("tolerances.max_subdivisions: must be >= 1");
    {
        bool known = false;
        for (const auto& n : builtin_problem_names()) known = known || n == saddle.problem;
        if (!known) throw ConfigError("saddle.problem: unknown problem '" + saddle.problem + "'");
    }
    if (saddle.lambdas.empty()) throw ConfigError("saddle.lambdas: must not be empty");
    for (double l : saddle.lambdas)
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("saddle.lambdas: entries must be positive");
    for (int id : acceptance_only)
        if (id < 1 || id > 13) throw ConfigError("acceptance.only: criteria are numbered 1..13");
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    reject_unknown(j, "", {"verb", "ensemble", "seed", "trials", "output_dir", "rescaled", "grid", "kernel_partners",
                           "limits", "saddle", "tolerances", "acceptance"});
    RunConfig c;
    if (j.contains("verb")) {
        if (!j["verb"].is_string()) bad("verb", "expected a string");
        c.verb = parse_verb(j["verb"]);
    }
    if (j.contains("ensemble")) c.ensemble = parse_ensemble(j["ensemble"]);
    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (s.is_number_unsigned()) c.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) c.seed = std::uint64_t(s.get<long long>());
        else bad("seed", "expected a non-negative integer");
    }
    if (j.contains("trials")) {
        const long long t = get_int(j, "", "trials");
        if (t < 1) bad("trials", "must be >= 1");
        c.trials = int(std::min<long long>(t, 1LL << 30));
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) bad("output_dir", "expected a string");
        c.output_dir = j["output_dir"];
    }
    if (j.contains("rescaled")) {
        if (!j["rescaled"].is_boolean()) bad("rescaled", "expected true or false");
        c.rescaled = j["rescaled"];
    }
    if (j.contains("grid")) c.grid = parse_grid(j["grid"]);
    if (j.contains("kernel_partners")) c.kernel_partners = get_cplxs(j, "", "kernel_partners");
    if (j.contains("limits")) c.limits = parse_limits(j["limits"]);
    if (j.contains("saddle")) {
        const json& s = j["saddle"];
        reject_unknown(s, "saddle", {"problem", "lambdas"});
        if (s.contains("problem")) {
            if (!s["problem"].is_string()) bad("saddle.problem", "expected a string");
            c.saddle.problem = s["problem"];
        }
        if (s.contains("lambdas")) c.saddle.lambdas = get_doubles(s, "saddle", "lambdas");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t, "tolerances", {"rel_tol", "max_subdivisions"});
        if (t.contains("rel_tol")) c.tolerances.rel_tol = get_double(t, "tolerances", "rel_tol");
        if (t.contains("max_subdivisions")) c.tolerances.max_subdivisions = int(get_int(t, "tolerances", "max_subdivisions"));
    }
    if (j.contains("acceptance")) {
        const json& a = j["acceptance"];
        reject_unknown(a, "acceptance", {"only"});
        if (a.contains("only")) {
            if (!a["only"].is_array()) bad("acceptance.only", "expected an array of integers");
            for (const json& x : a["only"]) {
                if (!x.is_number_integer()) bad("acceptance.only", "expected an array of integers");
                c.acceptance_only.push_back(x.get<int>());
            }
        }
    }
    c.ensemble.seed = c.seed;
    c.validate();
    return c;
}

std::string serialize_config(const RunConfig& c) {
    json j;
    if (c.verb) j["verb"] = verb_name(*c.verb);
    j["ensemble"] = dump_ensemble(c.ensemble);
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["output_dir"] = c.output_dir;
    j["rescaled"] = c.rescaled;
    if (c.grid) j["grid"] = dump_grid(*c.grid);
    if (!c.kernel_partners.empty()) {
        json arr = json::array();
        for (cplx w : c.kernel_partners) arr.push_back(from_cplx(w));
        j["kernel_partners"] = arr;
    }
    if (c.limits) j["limits"] = dump_limits(*c.limits);
    j["saddle"] = {{"problem", c.saddle.problem}, {"lambdas", c.saddle.lambdas}};
    j["tolerances"] = {{"rel_tol", c.tolerances.rel_tol}, {"max_subdivisions", c.tolerances.max_subdivisions}};
    if (!c.acceptance_only.empty()) j["acceptance"] = {{"only", c.acceptance_only}};
    return j.dump(2) + "\n";
}

}  // namespace rmt
