#pragma once
// Full-architecture gradient verification: central finite differences against
// the analytic backward pass, in 64-bit with dropout off, at toy shapes.
// Shared by the CLI `gradcheck` subcommand and the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

namespace cbd {

struct ArchitectureCheck {
    std::string architecture;
    std::uint64_t seed = 0;
    double max_rel_error = 0.0;
    std::string worst_param;
};

struct VerificationReport {
    std::vector<ArchitectureCheck> checks;
    double worst = 0.0;
    double tolerance = 1e-3;

    bool passed() const { return worst < tolerance; }
};

// Runs every architecture through `seeds` independently seeded checks; each
// check builds a fresh toy model and compares every parameter gradient.
VerificationReport run_gradient_verification(std::size_t seeds);

} // namespace cbd
