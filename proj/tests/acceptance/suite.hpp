#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gfam::acceptance {

enum class Scale { Small, Full };

struct Options {
    std::uint64_t seed = 20240917;
    Scale scale = Scale::Full;
    bool include_determinism = true; // criterion 10 reruns the small suite twice
};

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0; // not part of the report
};

std::vector<Result> run(const Options& options);

/// One line per criterion; deterministic for a fixed seed and scale.
std::string report(const std::vector<Result>& results);

} // namespace gfam::acceptance
