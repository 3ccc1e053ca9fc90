#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tumor/disk_solver.hpp"
#include "tumor/nonlinear_evolution.hpp"

namespace tumor {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_solver = 3, exit_left_neighbourhood = 4 };

struct RunConfig {
  std::string model = "identity";
  std::optional<double> A;
  double G = 0.0;
  /// Domain radius; the steady radius R_A(A) when absent.
  std::optional<double> R;
  int k_max = 64;
  GridSettings grid;
  StepperSettings stepper;
  std::string out_dir = ".";
  std::string seed_shape;
  double t_end = 1.0;
  std::string mode = "linear";
  /// Growth rates in evolve reports are fitted over records with ||rho||_inf at most this.
  double fit_sup_norm = 5e-3;
  std::vector<double> sweep_A;
  std::vector<double> sweep_G;
};

/// Reads a JSON config; unknown keys are rejected.
RunConfig load_config(const std::string& path);

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tumor
