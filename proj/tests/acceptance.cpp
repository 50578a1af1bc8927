// Prints one line per acceptance criterion; exits non-zero when any fails.
// Optional arguments select criteria by number.

#include "mdq/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <vector>

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty()) {
        for (int i = 1; i <= 9; ++i) ids.push_back(i);
    }
    int failed = 0;
    for (int id : ids) {
        const auto results = mdq::run_acceptance({id});
        for (const auto& r : results) {
            std::printf("%s\n", mdq::format(r).c_str());
            if (!r.passed) ++failed;
        }
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(ids.size()) - failed, ids.size());
    return failed == 0 ? 0 : 1;
}
