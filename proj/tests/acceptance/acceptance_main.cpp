#include <CLI11.hpp>
#include <iostream>

#include "pspin/acceptance.hpp"
#include "pspin/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"p-spin toolkit acceptance suite"};
  std::string level = "full";
  std::string variant = "proof";
  pspin::AcceptanceOptions options;
  app.add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  app.add_option("--seed", options.seed, "master seed");
  app.add_option("--a2-variant", variant, "proof or printed")->check(CLI::IsMember({"proof", "printed"}));
  app.add_option("--quad-order", options.quad_order, "Gauss-Hermite order");
  app.add_option("--only", options.only, "criterion ids to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  try {
    options.level = pspin::parse_level(level);
    options.a2_variant = pspin::parse_a2_variant(variant);
    const auto results = pspin::run_acceptance(options, std::cout);
    for (const auto& r : results)
      if (!r.passed) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
