#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "rmt/acceptance.hpp"
#include "rmt/parallel.hpp"

// Prints one line per criterion. --only N restricts the run; exit status is nonzero on any failure.
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) ids.push_back(std::atoi(argv[++i]));
    if (ids.empty()) ids = rmt::criterion_ids();
    rmt::AcceptanceOptions opt;
    opt.workers = rmt::worker_count();
    int failed = 0;
    for (int id : ids) {
        const rmt::CriterionResult r = rmt::run_criterion(id, opt);
        std::printf("%s criterion %2d %-22s measured=%.6g threshold=%.6g (%.1fs) %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.measured, r.threshold, r.seconds, r.detail.c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    return failed ? 1 : 0;
}
