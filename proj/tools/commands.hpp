#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gpsurv::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitNumeric = 4;

struct SimulateArgs {
  std::string spec;
  std::string out;  // prefix: <out>.csv, <out>.truth.csv[, <out>.holdout.csv, <out>.holdout.truth.csv]
  std::optional<std::uint64_t> seed;
};

struct FitArgs {
  std::string data;
  std::string model = "gp-aft";  // a GP model kind or "wphm"
  std::string out;
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_evals = 600;
  bool independent = false;  // competing: pin omega = 0
  bool ard = false;          // competing: one length scale per covariate
  std::optional<double> gamma;
  int risk = 1;  // wphm: which risk counts as the event
};

struct PredictArgs {
  std::string model;
  std::string covariates;
  std::string out;
  bool omit_prior_mean = false;
};

struct CurvesArgs {
  std::string model;
  std::string x;     // comma-separated covariate row
  std::string grid;  // start:stop:count
  std::string out;
  int risk = 1;
  bool disabled = false;  // competing: add disabled-risk survival and incidence columns
};

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::optional<std::string> predictions;
};

struct EvalRow {
  int risk = 1;
  std::size_t events = 0;
  double mse = 0.0;
};

int run_simulate(const SimulateArgs& args, std::ostream& log);
int run_fit(const FitArgs& args, std::ostream& log);
int run_predict(const PredictArgs& args, std::ostream& log);
int run_curves(const CurvesArgs& args, std::ostream& log);
/// Writes the table to `log`; `rows` (optional) receives the metrics.
int run_evaluate(const EvaluateArgs& args, std::ostream& log, std::vector<EvalRow>* rows = nullptr);

/// Runs `body`, mapping library exceptions to exit codes and messages on `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

/// Parses "start:stop:count" into an evenly spaced grid.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gpsurv::cli
