#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rmt {

struct CriterionResult {
    int id = 0;
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;  // free-form diagnostics, one line
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    int workers = 1;
};

std::vector<int> criterion_ids();
std::string criterion_name(int id);
// Runs one criterion. Numeric failures inside a criterion are reported as a failed row.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

}  // namespace rmt
