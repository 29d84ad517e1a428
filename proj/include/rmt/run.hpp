#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rmt/acceptance.hpp"
#include "rmt/config.hpp"
#include "rmt/error.hpp"

namespace rmt {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_io = 4, exit_acceptance = 5 };

int exit_code_for(ErrorClass c);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> trials;
    int workers = 1;
};

struct RunReport {
    int exit_code = exit_ok;
    std::filesystem::path directory;
    std::vector<CriterionResult> acceptance;
};

// Executes one verb. Errors are mapped to exit codes; messages go to `log`.
RunReport run(Verb verb, const RunConfig& cfg, const RunOverrides& overrides, std::ostream& log);

struct RadialBin {
    double r_lo = 0.0, r_hi = 0.0;
    double value = 0.0;     // count (clouds) or density (callable)
    double expected = 0.0;  // limiting density at the bin midpoint; NaN when unknown
};

// Histogram of |z|. The range is widened to hold every point so the counts sum to the total.
std::vector<RadialBin> radial_profile(std::span<const cplx> points, int bins, double r_max,
                                      const std::function<double(cplx)>& expected);
// Density callable sampled at bin midpoints on the positive real axis.
std::vector<RadialBin> radial_profile(const std::function<double(cplx)>& density, int bins, double r_max,
                                      const std::function<double(cplx)>& expected);
std::string radial_profile_csv(const std::vector<RadialBin>& bins);

// Files written through a temporary name and renamed into place; checksums collected for the manifest.
class OutputDirectory {
public:
    struct Entry {
        std::string name;
        std::string kind;  // data or meta
        std::uintmax_t bytes = 0;
        std::uint32_t crc32 = 0;
    };

    // Creates base/run-<UTC timestamp>-s<seed>, adding a numeric suffix on collision.
    static OutputDirectory create(const std::filesystem::path& base, std::uint64_t seed);
    explicit OutputDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content, const std::string& kind = "data");
    // manifest_body must be a JSON object; the file list is appended and the manifest is renamed into place last.
    void write_manifest(const std::string& manifest_body_json);

    const std::filesystem::path& path() const { return dir_; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

std::uint32_t crc32_of(const std::string& bytes);
std::string format_double(double x);

}  // namespace rmt
