#include <CLI11.hpp>

#include <chrono>
#include <cstdio>

#include "properties/property_suite.hpp"

int main(int argc, char** argv) {
  tumor::properties::SuiteOptions opts;
  CLI::App app{"randomized invariant checks"};
  app.add_option("--cases", opts.cases, "random cases per property")->check(CLI::PositiveNumber);
  app.add_option("--seed", opts.seed, "RNG seed");
  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& r : tumor::properties::run_property_suite(opts)) {
    ok = ok && r.passed();
    std::printf("%s %-30s cases=%d worst=%.3g tol=%.3g %s\n", r.passed() ? "PASS" : "FAIL", r.name.c_str(),
                r.cases, r.worst, r.tolerance, r.first_failure.c_str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("elapsed %.1f s\n", secs);
  return ok ? 0 : 1;
}
