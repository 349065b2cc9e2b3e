#include <iostream>

#include "barelay/verification.hpp"

int main() {
  int failures = 0;
  for (int id = 1; id <= barelay::kAcceptanceCriteria; ++id) {
    const auto result = barelay::run_criterion(id);
    barelay::print_result(std::cout, result);
    std::cout.flush();
    if (!result.passed) ++failures;
  }
  std::cout << (barelay::kAcceptanceCriteria - failures) << "/" << barelay::kAcceptanceCriteria
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
