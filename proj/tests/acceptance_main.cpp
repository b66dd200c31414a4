#include "condgrad/selftest.hpp"

#include <cstring>
#include <iostream>

int main(int argc, char** argv) {
  const bool timing = argc > 1 && std::strcmp(argv[1], "--timing") == 0;
  const auto results = condgrad::run_acceptance([timing](const condgrad::CriterionResult& r) {
    std::cout << condgrad::format_criterion(r, timing) << std::flush;
  });
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
