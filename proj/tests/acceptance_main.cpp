// Acceptance runner: one pass/fail line per criterion, non-zero exit on any
// failure. Pass --heavy for the girth-6 refutation at T=2.

#include <cstring>
#include <iostream>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  sinkless::acceptance::Config cfg;
  cfg.threads = sinkless::acceptance::threads_from_env();
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--heavy") == 0) {
      cfg.heavy = true;
    } else if (std::strcmp(argv[i], "--quick") == 0) {
      cfg.quick = true;
    } else {
      std::cerr << "usage: " << argv[0] << " [--heavy] [--quick]\n";
      return 2;
    }
  }
  const auto s = sinkless::acceptance::run_acceptance(cfg, std::cout);
  std::cout << (s.pass() ? "acceptance: all criteria pass" : "acceptance: FAILED") << std::endl;
  return s.pass() ? 0 : 1;
}
