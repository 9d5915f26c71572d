#pragma once

#include <string>
#include <vector>

namespace wicksde::acc {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
};

// Runs the twelve release-gate checks in order. Every tolerance is pinned
// inside the corresponding check; a criterion that throws is reported as a
// failure with the exception text.
std::vector<CriterionResult> run_all();

// Prints one "[PASS]/[FAIL] C<n> <title>: <detail>" line per criterion and
// returns the number of failures.
int run_and_print();

}  // namespace wicksde::acc
