#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmt/asymptotics.hpp"
#include "rmt/ensembles.hpp"

namespace rmt {

enum class Verb { sample, kernel, density, limits, saddle_check, verify };

const char* verb_name(Verb v);
Verb parse_verb(const std::string& s);  // ConfigError on unknown verbs

struct GridSpec {
    enum class Kind { rect, radial } kind = Kind::rect;
    // rect: re/im ranges with nx * ny cells centred on a regular lattice
    double re_min = -1.0, re_max = 1.0, im_min = -1.0, im_max = 1.0;
    int nx = 20, ny = 20;
    // radial: bins on [0, r_max] along the positive real axis
    double r_max = 1.0;
    int bins = 40;

    void validate() const;
    std::vector<cplx> points() const;
    bool operator==(const GridSpec&) const = default;
};

struct LimitsSpec {
    LimitParams params;
    std::string regime = "bulk";  // bulk, inner_edge, outer_edge
    cplx u = 0.5;
    std::vector<cplx> offsets{0.0, cplx(1.0, 1.0)};

    bool operator==(const LimitsSpec& o) const {
        return params.family == o.params.family && params.a == o.params.a && params.delta == o.params.delta &&
               params.sigma == o.params.sigma && params.tau == o.params.tau && params.b == o.params.b &&
               regime == o.regime && u == o.u && offsets == o.offsets;
    }
};

struct SaddleSpec {
    std::string problem = "interior";
    std::vector<double> lambdas{25.0, 100.0, 400.0};
    bool operator==(const SaddleSpec&) const = default;
};

struct ToleranceSpec {
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    bool operator==(const ToleranceSpec&) const = default;
};

struct RunConfig {
    std::optional<Verb> verb;
    EnsembleSpec ensemble = EnsembleSpec::ginibre(64, {0.0, 0.0});
    std::uint64_t seed = 0;
    int trials = 10;
    std::string output_dir = "runs";
    bool rescaled = true;
    std::optional<GridSpec> grid;
    std::vector<cplx> kernel_partners;  // second arguments of K(z, w); empty means w = z
    std::optional<LimitsSpec> limits;
    SaddleSpec saddle;
    ToleranceSpec tolerances;
    std::vector<int> acceptance_only;  // empty runs every criterion

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

// Parses the JSON config. Unknown keys and constraint violations raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

}  // namespace rmt
