#include <iostream>
#include <string>
#include <vector>

#include "amalgam/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  amalgam::cli::RunResult r = amalgam::cli::run(args);
  const bool is_gen = !args.empty() && args[0] == "gen";
  if (r.json_output) {
    std::cout << amalgam::cli::serialize(r.report);
  } else if (is_gen && r.out_path.empty() && r.exit == 0) {
    std::cout << amalgam::cli::serialize(r.report["result"]["output"]);
  } else {
    (r.exit == 0 || r.exit == 1 ? std::cout : std::cerr) << r.text << "\n";
  }
  return r.exit;
}
