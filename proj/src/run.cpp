#include "rmt/run.hpp"

#include <boost/crc.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "rmt/asymptotics.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/exact_kernel.hpp"
#include "rmt/parallel.hpp"
#include "rmt/saddlepoint.hpp"

namespace rmt {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorClass c) {
    switch (c) {
    case ErrorClass::config: return exit_config;
    case ErrorClass::numeric: return exit_numeric;
    case ErrorClass::io: return exit_io;
    }
    return exit_numeric;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint32_t crc32_of(const std::string& bytes) {
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

namespace {

std::string utc_stamp(const char* fmt) {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, fmt, &tm);
    return buf;
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

void write_atomically(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

OutputDirectory OutputDirectory::create(const fs::path& base, std::uint64_t seed) {
    std::error_code ec;
    fs::create_directories(base, ec);
    if (ec) throw IoError("cannot create output directory " + base.string() + ": " + ec.message());
    const std::string stem = "run-" + utc_stamp("%Y%m%dT%H%M%SZ") + "-s" + std::to_string(seed);
    for (int k = 0; k < 10000; ++k) {
        fs::path dir = base / (k == 0 ? stem : stem + "-" + std::to_string(k + 1));
        if (fs::create_directory(dir, ec)) return OutputDirectory(dir);
        if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
    }
    throw IoError("too many runs with the same timestamp in " + base.string());
}

void OutputDirectory::write(const std::string& name, const std::string& content, const std::string& kind) {
    write_atomically(dir_ / name, content);
    entries_.push_back({name, kind, content.size(), crc32_of(content)});
}

void OutputDirectory::write_manifest(const std::string& body) {
    json j = json::parse(body);
    json files = json::array();
    for (const Entry& e : entries_)
        files.push_back({{"name", e.name}, {"kind", e.kind}, {"bytes", e.bytes}, {"crc32", hex32(e.crc32)}});
    j["files"] = files;
    write_atomically(dir_ / "manifest.json", j.dump(2) + "\n");
}

std::vector<RadialBin> radial_profile(std::span<const cplx> points, int bins, double r_max,
                                      const std::function<double(cplx)>& expected) {
    if (points.empty()) throw DomainError("radial_profile: no points");
    if (bins < 10) throw DomainError("radial_profile: bins must be >= 10");
    double top = r_max > 0.0 ? r_max : 0.0;
    for (cplx z : points) top = std::max(top, std::abs(z));
    if (!(top > 0.0)) top = 1.0;
    top = std::nextafter(top, INFINITY);
    std::vector<RadialBin> out(bins);
    for (int k = 0; k < bins; ++k) {
        out[k].r_lo = top * k / bins;
        out[k].r_hi = top * (k + 1) / bins;
        const double mid = 0.5 * (out[k].r_lo + out[k].r_hi);
        out[k].expected = expected ? expected(cplx(mid, 0.0)) : std::nan("");
    }
    for (cplx z : points) {
        int k = int(std::abs(z) / top * bins);
        out[std::min(std::max(k, 0), bins - 1)].value += 1.0;
    }
    return out;
}

std::vector<RadialBin> radial_profile(const std::function<double(cplx)>& density, int bins, double r_max,
                                      const std::function<double(cplx)>& expected) {
    if (!density) throw DomainError("radial_profile: no density");
    if (bins < 10) throw DomainError("radial_profile: bins must be >= 10");
    if (!(r_max > 0.0)) throw DomainError("radial_profile: r_max must be positive");
    std::vector<RadialBin> out(bins);
    for (int k = 0; k < bins; ++k) {
        out[k].r_lo = r_max * k / bins;
        out[k].r_hi = r_max * (k + 1) / bins;
        const cplx mid(0.5 * (out[k].r_lo + out[k].r_hi), 0.0);
        out[k].value = density(mid);
        out[k].expected = expected ? expected(mid) : std::nan("");
    }
    return out;
}

std::string radial_profile_csv(const std::vector<RadialBin>& bins) {
    std::string s = "r_lo,r_hi,count_or_density,expected_density\n";
    for (const RadialBin& b : bins)
        s += format_double(b.r_lo) + "," + format_double(b.r_hi) + "," + format_double(b.value) + "," +
             format_double(b.expected) + "\n";
    return s;
}

namespace {

struct Ctx {
    const RunConfig& cfg;
    std::uint64_t seed;
    int trials;
    int workers;
    std::ostream& log;
};

QuadratureRule rule_of(const RunConfig& c) {
    QuadratureRule r;
    r.rel_tol = c.tolerances.rel_tol;
    r.max_subdivisions = c.tolerances.max_subdivisions;
    return r;
}

std::optional<LimitParams> limit_params_for(const RunConfig& c, bool rescaled) {
    if (c.limits) return c.limits->params;
    const EnsembleSpec& s = c.ensemble;
    if (s.family == Family::ginibre) {
        if (!rescaled) return std::nullopt;
        return LimitParams::fixed(s.a);
    }
    std::vector<double> b = s.b;
    return LimitParams::truncated(s.sigma, s.tau, b);
}

std::function<double(cplx)> expected_density(const std::optional<LimitParams>& p) {
    if (!p) return {};
    LimitParams params = *p;
    return [params](cplx z) {
        try {
            return limit_density(params, z);
        } catch (const Error&) {
            return std::nan("");
        }
    };
}

GridSpec grid_or(const RunConfig& c, GridSpec fallback) { return c.grid ? *c.grid : fallback; }

std::string row(std::initializer_list<double> xs) {
    std::string s;
    bool first = true;
    for (double x : xs) {
        if (!first) s += ',';
        s += format_double(x);
        first = false;
    }
    return s + "\n";
}

json base_manifest(const Ctx& c, Verb verb, const std::string& started) {
    json j;
    j["artifact"] = "rmt";
    j["version"] = kArtifactVersion;
    j["verb"] = verb_name(verb);
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["config"] = json::parse(serialize_config(c.cfg));
    j["started"] = started;
    return j;
}

void verb_sample(const Ctx& c, OutputDirectory& out, json& manifest) {
    EnsembleSpec spec = c.cfg.ensemble;
    spec.seed = c.seed;
    std::string csv = "trial,re,im,rescaled\n";
    std::vector<cplx> all;
    const RunSummary summary = run_monte_carlo(
        spec, c.trials, c.cfg.rescaled,
        [&](const EigenvalueCloud& cloud) {
            for (cplx z : cloud.eigenvalues) {
                csv += std::to_string(cloud.trial_index) + "," + format_double(z.real()) + "," +
                       format_double(z.imag()) + "," + (cloud.rescaled ? "1" : "0") + "\n";
                all.push_back(z);
            }
        },
        c.workers);
    out.write("eigenvalues.csv", csv);
    const GridSpec g = grid_or(c.cfg, GridSpec{GridSpec::Kind::radial});
    const int bins = g.kind == GridSpec::Kind::radial ? g.bins : 40;
    const double r_max = g.kind == GridSpec::Kind::radial ? g.r_max : 0.0;
    const bool rescaled_cloud = summary.rescaled || spec.family == Family::truncated;
    out.write("radial_profile.csv",
              radial_profile_csv(radial_profile(all, bins, r_max, expected_density(limit_params_for(c.cfg, rescaled_cloud)))));
    json s = {{"trials", summary.trials},
              {"eigenvalue_count", summary.eigenvalue_count},
              {"rescaled", summary.rescaled},
              {"scale", summary.scale},
              {"wall_seconds", summary.wall_seconds}};
    out.write("summary.json", s.dump(2) + "\n", "meta");
    manifest["eigenvalue_count"] = summary.eigenvalue_count;
    c.log << "sampled " << summary.trials << " trials, " << summary.eigenvalue_count << " eigenvalues\n";
}

void verb_kernel(const Ctx& c, OutputDirectory& out) {
    const KernelContext ctx = KernelContext::make(c.cfg.ensemble, c.cfg.rescaled, rule_of(c.cfg));
    const std::vector<cplx> zs = grid_or(c.cfg, GridSpec{}).points();
    const auto& partners = c.cfg.kernel_partners;
    const std::size_t per = partners.empty() ? 1 : partners.size();
    std::vector<LogComplex> vals(zs.size() * per);
    parallel_for(zs.size(), c.workers, [&](std::size_t i) {
        for (std::size_t k = 0; k < per; ++k) {
            const cplx w = partners.empty() ? zs[i] : partners[k];
            vals[i * per + k] = log_kernel(ctx, zs[i], w);
        }
    });
    std::string csv = "re(z),im(z),re(w),im(w),log_mag,phase\n";
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t k = 0; k < per; ++k) {
            const cplx w = partners.empty() ? zs[i] : partners[k];
            const LogComplex& v = vals[i * per + k];
            csv += row({zs[i].real(), zs[i].imag(), w.real(), w.imag(), v.log_mag, v.is_zero() ? 0.0 : v.phase});
        }
    out.write("kernel.csv", csv);
    c.log << "evaluated " << vals.size() << " kernel entries\n";
}

void verb_density(const Ctx& c, OutputDirectory& out) {
    const KernelContext ctx = KernelContext::make(c.cfg.ensemble, c.cfg.rescaled, rule_of(c.cfg));
    const double N = c.cfg.ensemble.N;
    // normalised one-point density of the (rescaled) points: N^{2 rescale_exponent} K(z, z) / N
    auto density = [&](cplx z) { return std::exp(log_kernel(ctx, z, z).log_mag + 2.0 * ctx.log_scale()) / N; };
    const GridSpec g = grid_or(c.cfg, GridSpec{});
    const std::vector<cplx> zs = g.points();
    std::vector<double> vals(zs.size());
    parallel_for(zs.size(), c.workers, [&](std::size_t i) { vals[i] = density(zs[i]); });
    std::string csv = "re,im,value\n";
    for (std::size_t i = 0; i < zs.size(); ++i) csv += row({zs[i].real(), zs[i].imag(), vals[i]});
    out.write("density.csv", csv);
    if (g.kind == GridSpec::Kind::radial) {
        std::vector<RadialBin> bins = radial_profile([](cplx) { return 0.0; }, g.bins, g.r_max, {});
        const auto expected = expected_density(limit_params_for(c.cfg, ctx.rescale_exponent > 0.0 ||
                                                                           c.cfg.ensemble.family == Family::truncated));
        for (int k = 0; k < g.bins; ++k) {
            bins[k].value = vals[k];
            bins[k].expected = expected ? expected(zs[k]) : std::nan("");
        }
        out.write("radial_profile.csv", radial_profile_csv(bins));
    }
    c.log << "evaluated the one-point density at " << zs.size() << " points\n";
}

void verb_limits(const Ctx& c, OutputDirectory& out, json& manifest) {
    const std::optional<LimitParams> maybe = limit_params_for(c.cfg, true);
    const LimitParams params = *maybe;
    const RingGeometry geom = ring_geometry(params);
    const GridSpec g = grid_or(c.cfg, GridSpec{GridSpec::Kind::rect, -1.2 * geom.r_out, 1.2 * geom.r_out,
                                               -1.2 * geom.r_out, 1.2 * geom.r_out});
    const std::vector<cplx> zs = g.points();
    std::vector<double> dens(zs.size()), rho(zs.size());
    parallel_for(zs.size(), c.workers, [&](std::size_t i) {
        dens[i] = limit_density(params, zs[i]);
        const double r = std::abs(zs[i]);
        rho[i] = (r > geom.r_in && r < geom.r_out) ? rho_scale(params, zs[i]) : std::nan("");
    });
    std::string dcsv = "re,im,value\n", rcsv = "re,im,value\n";
    for (std::size_t i = 0; i < zs.size(); ++i) {
        dcsv += row({zs[i].real(), zs[i].imag(), dens[i]});
        rcsv += row({zs[i].real(), zs[i].imag(), rho[i]});
    }
    out.write("limit_density.csv", dcsv);
    out.write("rho.csv", rcsv);
    const double r_max = g.kind == GridSpec::Kind::radial ? g.r_max : 1.2 * geom.r_out;
    const int bins = g.kind == GridSpec::Kind::radial ? g.bins : 40;
    auto dfun = [&](cplx z) { return limit_density(params, z); };
    out.write("radial_profile.csv", radial_profile_csv(radial_profile(dfun, bins, r_max, dfun)));
    json ring = {{"family", limit_family_name(params.family)}, {"r_in", geom.r_in}, {"r_out", geom.r_out}};
    if (c.cfg.limits) {
        const LimitsSpec& ls = *c.cfg.limits;
        const KernelRegime regime = ls.regime == "bulk"         ? KernelRegime::bulk
                                    : ls.regime == "inner_edge" ? KernelRegime::inner_edge
                                                                : KernelRegime::outer_edge;
        std::vector<ScaledPoint> pts;
        for (cplx v : ls.offsets) pts.push_back({ls.u, v, std::arg(ls.u)});
        const LimitKernel lk = limit_kernel_matrix(pts, regime, &geom);
        std::string kcsv = "re(z),im(z),re(w),im(w),log_mag,phase\n";
        for (std::size_t j = 0; j < pts.size(); ++j)
            for (std::size_t k = 0; k < pts.size(); ++k) {
                const LogComplex e = LogComplex::from_complex(lk.matrix(Eigen::Index(j), Eigen::Index(k)));
                kcsv += row({pts[j].v.real(), pts[j].v.imag(), pts[k].v.real(), pts[k].v.imag(), e.log_mag,
                             e.is_zero() ? 0.0 : e.phase});
            }
        out.write("limit_kernel.csv", kcsv);
        ring["regime"] = ls.regime;
        ring["u"] = {ls.u.real(), ls.u.imag()};
        ring["kernel_det"] = {lk.det.real(), lk.det.imag()};
        const double ru = std::abs(ls.u);
        if (ru > geom.r_in && ru < geom.r_out) ring["rho_at_u"] = rho_scale(params, ls.u);
    }
    out.write("ring.json", ring.dump(2) + "\n");
    manifest["ring"] = ring;
    c.log << "ring radii " << geom.r_in << " .. " << geom.r_out << "\n";
}

void verb_saddle(const Ctx& c, OutputDirectory& out, json& manifest) {
    const std::string& name = c.cfg.saddle.problem;
    const SaddleProblem pr = builtin_problem(name);
    const bool edge = builtin_is_edge(name);
    for (const std::string& w : tail_probe(pr, c.cfg.saddle.lambdas.front())) c.log << "warning: " << w << "\n";
    const auto& lams = c.cfg.saddle.lambdas;
    std::vector<cplx> oracle(lams.size()), lead(lams.size());
    QuadratureRule rule = rule_of(c.cfg);
    rule.rel_tol = std::max(rule.rel_tol, 1e-11);
    for (std::size_t i = 0; i < lams.size(); ++i) {
        oracle[i] = pv_oracle(pr, lams[i], rule);
        lead[i] = (edge ? leading_term_edge(pr, lams[i]) : leading_term_interior(pr, lams[i])).to_complex();
    }
    std::string csv = "lambda,oracle_re,oracle_im,asymptotic_re,asymptotic_im,rel_err\n";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lams.size(); ++i) {
        const double rel = std::abs(oracle[i] - lead[i]) / std::abs(oracle[i]);
        csv += row({lams[i], oracle[i].real(), oracle[i].imag(), lead[i].real(), lead[i].imag(), rel});
        const double x = std::log(lams[i]), y = std::log(rel);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    out.write("saddle_check.csv", csv);
    const double n = double(lams.size());
    json s = {{"problem", name}, {"epsilon", calibrated_epsilon(pr, edge)}};
    if (lams.size() >= 2) s["log_log_slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.write("saddle_summary.json", s.dump(2) + "\n");
    manifest["saddle"] = s;
}

std::vector<CriterionResult> verb_verify(const Ctx& c, OutputDirectory& out, json& manifest) {
    std::vector<int> ids = c.cfg.acceptance_only.empty() ? criterion_ids() : c.cfg.acceptance_only;
    AcceptanceOptions opt;
    opt.seed = c.seed;
    opt.workers = c.workers;
    std::vector<CriterionResult> results;
    std::string csv = "criterion,name,measured,threshold,verdict,detail\n";
    std::string timing = "criterion,seconds\n";
    json table = json::array();
    for (int id : ids) {
        CriterionResult r = run_criterion(id, opt);
        char line[256];
        std::snprintf(line, sizeof line, "[%s] %2d %-34s measured=%-12.4g threshold=%-10.4g %.1fs", r.pass ? "PASS" : "FAIL",
                      r.id, r.name.c_str(), r.measured, r.threshold, r.seconds);
        c.log << line << "\n";
        if (!r.detail.empty()) c.log << "       " << r.detail << "\n";
        csv += std::to_string(r.id) + "," + r.name + "," + format_double(r.measured) + "," + format_double(r.threshold) +
               "," + (r.pass ? "pass" : "fail") + ",\"" + r.detail + "\"\n";
        timing += std::to_string(r.id) + "," + format_double(r.seconds) + "\n";
        table.push_back({{"criterion", r.id},
                         {"name", r.name},
                         {"measured", r.measured},
                         {"threshold", r.threshold},
                         {"pass", r.pass},
                         {"seconds", r.seconds},
                         {"detail", r.detail}});
        results.push_back(std::move(r));
    }
    out.write("acceptance.csv", csv);
    out.write("acceptance_timing.csv", timing, "meta");
    manifest["acceptance"] = table;
    return results;
}

}  // namespace

RunReport run(Verb verb, const RunConfig& cfg, const RunOverrides& ov, std::ostream& log) {
    RunReport report;
    try {
        if (cfg.verb && *cfg.verb != verb)
            throw ConfigError(std::string("verb: config names '") + verb_name(*cfg.verb) + "' but '" + verb_name(verb) +
                              "' was requested");
        if (ov.trials && *ov.trials < 1) throw ConfigError("trials: must be >= 1");
        RunConfig effective = cfg;
        if (ov.seed) effective.seed = *ov.seed;
        if (ov.trials) effective.trials = *ov.trials;
        if (ov.out) effective.output_dir = *ov.out;
        effective.ensemble.seed = effective.seed;
        effective.validate();
        Ctx c{effective, effective.seed, effective.trials, std::max(1, ov.workers), log};
        const std::string started = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
        OutputDirectory out = OutputDirectory::create(effective.output_dir, effective.seed);
        report.directory = out.path();
        json manifest = base_manifest(c, verb, started);
        switch (verb) {
        case Verb::sample: verb_sample(c, out, manifest); break;
        case Verb::kernel: verb_kernel(c, out); break;
        case Verb::density: verb_density(c, out); break;
        case Verb::limits: verb_limits(c, out, manifest); break;
        case Verb::saddle_check: verb_saddle(c, out, manifest); break;
        case Verb::verify: report.acceptance = verb_verify(c, out, manifest); break;
        }
        if (verb == Verb::verify)
            for (const CriterionResult& r : report.acceptance)
                if (!r.pass) report.exit_code = exit_acceptance;
        manifest["finished"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
        manifest["exit_code"] = report.exit_code;
        out.write_manifest(manifest.dump());
        log << "wrote " << out.path().string() << "\n";
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        report.exit_code = exit_code_for(e.error_class());
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << "\n";
        report.exit_code = exit_io;
    }
    return report;
}

}  // namespace rmt
