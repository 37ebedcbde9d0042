// Acceptance suite: runs every validation criterion (quick + full) and
// prints one pass/fail line per criterion. Exits nonzero on any failure.

#include <cstdio>

#include "cachecast/validation.hpp"

int main() {
    using namespace cachecast;
    const auto results = run_validation(ValidationLevel::Full, 20240501,
                                        [](const CheckResult& r) {
                                            std::printf("[%s] %2s. %-26s (%6.2fs) %s\n",
                                                        r.pass ? "PASS" : "FAIL", r.id.c_str(),
                                                        r.name.c_str(), r.seconds,
                                                        r.detail.c_str());
                                            std::fflush(stdout);
                                        });
    int failures = 0;
    for (const auto& r : results) failures += r.pass ? 0 : 1;
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
