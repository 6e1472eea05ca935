#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segrelab {

struct CheckResult {
    std::string suite;
    std::string check;
    bool passed = false;
    double value = 0;
    std::string detail;
};

struct VerifyResult {
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// Suite names: mesh, model, evolve, energy, steady, heatkernel.
const std::vector<std::string>& verify_suites();

/// Runs one suite, or all of them for an empty name.
VerifyResult run_verify(const std::string& suite = "");

/// One JSON line per check followed by a summary line.
void write_verify_jsonl(std::ostream& os, const VerifyResult& r);

} // namespace segrelab
