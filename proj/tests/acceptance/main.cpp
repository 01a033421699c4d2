#include "suite.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    gfam::acceptance::Options options;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--small")
            options.scale = gfam::acceptance::Scale::Small;
        else if (arg == "--seed" && i + 1 < argc)
            options.seed = std::strtoull(argv[++i], nullptr, 10);
    }
    const auto results = gfam::acceptance::run(options);
    bool all = true;
    for (const auto& r : results) {
        std::cout << gfam::acceptance::report({r});
        std::fprintf(stderr, "  criterion %d took %.2fs\n", r.id, r.seconds);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
