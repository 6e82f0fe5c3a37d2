#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "fracpoisson/convergence.hpp"
#include "fracpoisson/errors.hpp"
#include "fracpoisson/mesh.hpp"

namespace fc = fracpoisson::convergence;

namespace {

void parse_levels(const std::string& text, fc::RunConfig& config) {
  static const std::regex range(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, range)) throw CLI::ValidationError("--levels", "expected A..B, got '" + text + "'");
  config.min_level = std::stoi(m[1]);
  config.max_level = m[2].matched ? std::stoi(m[2]) : config.min_level;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Poisson solver: hybrid FEM-spectral extension method"};
  app.require_subcommand(1);

  fc::RunConfig config;
  std::string domain = "disc";
  std::string levels = "2..6";
  std::string out = "-";
  std::string format = "csv";
  bool mask_timings = false;
  bool quiet = false;

  auto* conv = app.add_subcommand("convergence", "solve on a range of refinement levels and report H1_alpha errors");
  conv->add_option("--domain", domain, "disc, square or cube")
      ->check(CLI::IsMember({"disc", "square", "cube"}))
      ->capture_default_str();
  conv->add_option("--s", config.s, "fractional order in (0,1)")->capture_default_str();
  conv->add_option("--r", config.r, "data regularity; built-in f has r >= 1/2")->capture_default_str();
  conv->add_option("--order", config.k, "finite element order (1 or 2)")->capture_default_str();
  conv->add_option("--levels", levels, "refinement levels A..B")->capture_default_str();
  conv->add_option("--cg-tol", config.cg_tol, "relative residual of the shifted solves")->capture_default_str();
  conv->add_option("--cm", config.constants.c_m, "spectral truncation constant")->capture_default_str();
  conv->add_option("--ccross", config.constants.c_cross, "FEM/Weyl crossover constant")->capture_default_str();
  conv->add_option("--ch", config.constants.c_h, "coarse eigenvalue mesh constant")->capture_default_str();
  conv->add_option("--out", out, "results file, - for stdout")->capture_default_str();
  conv->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  conv->add_option("--threads", config.threads, "shifted solves run concurrently")->capture_default_str();
  conv->add_flag("--mask-timings", mask_timings, "write zeros for the timing columns");
  conv->add_flag("-q,--quiet", quiet, "no per-level progress on stderr");

  try {
    app.parse(argc, argv);
    parse_levels(levels, config);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  fc::RunResult result;
  try {
    config.domain = fracpoisson::mesh::parse_domain(domain);
    fc::validate(config);
    result = fc::run_convergence(config, [&](const fc::LevelRow& row) {
      if (!quiet) {
        std::fprintf(stderr, "level %d  n=%zu  M=%zu  M~=%zu  error=%.6e  cg=%.1f\n", row.level, row.n, row.M,
                     row.M_tilde, row.h1alpha_error, row.mean_cg_iters);
      }
    });
  } catch (const fracpoisson::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  auto write = [&](std::ostream& os) {
    if (format == "json")
      fc::write_json(os, config, result, mask_timings);
    else
      fc::write_csv(os, config, result, mask_timings);
  };
  if (out == "-") {
    write(std::cout);
  } else {
    std::ofstream file(out);
    if (!file) {
      std::cerr << "error: cannot open " << out << "\n";
      return 2;
    }
    write(file);
  }
  if (!result.ok()) {
    std::cerr << "error: " << result.failure << "\n";
    return 1;
  }
  return 0;
}
