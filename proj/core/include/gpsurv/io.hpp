#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpsurv/baselines.hpp"
#include "gpsurv/dataset.hpp"
#include "gpsurv/inference.hpp"
#include "gpsurv/simulate.hpp"

namespace gpsurv {

/// Shortest "%.17g" rendering; "inf" for +infinity.
std::string format_double(double v);
/// Parses a finite double or "inf"; throws ValidationError naming `what` otherwise.
double parse_double(const std::string& text, const std::string& what);

// ---- datasets ---------------------------------------------------------------
//
// Right-censored layout:  id,time,event,x1,...,xd
// Interval layout:        id,t_lower,t_upper,event,x1,...,xd
//   (censored rows: t_upper = inf, event = 0)
// event is 0 for censored rows, otherwise the risk label 1..R.

struct DatasetFile {
  SurvivalDataset data;
  std::vector<std::string> ids;
};

DatasetFile read_dataset_csv(std::istream& in);
DatasetFile read_dataset_csv(const std::string& path);
/// Ids default to 1..N when `ids` is empty.
void write_dataset_csv(std::ostream& out, const SurvivalDataset& data,
                       const std::vector<std::string>& ids = {});
void write_dataset_csv(const std::string& path, const SurvivalDataset& data,
                       const std::vector<std::string>& ids = {});

/// Covariate table: columns x1..xd (other columns ignored, `id` kept when present).
struct CovariateFile {
  Eigen::MatrixXd x;
  std::vector<std::string> ids;
};
CovariateFile read_covariates_csv(std::istream& in);
CovariateFile read_covariates_csv(const std::string& path);

// ---- ground truth sidecar ---------------------------------------------------
//
// "# key=value" comment lines with the generating parameters, then
// id,f1[,f2],tau1[,tau2].

struct TruthFile {
  std::map<std::string, std::string> params;
  std::vector<std::string> ids;
  SimTruth truth;
};

void write_truth_csv(std::ostream& out, const TruthFile& truth);
void write_truth_csv(const std::string& path, const TruthFile& truth);
TruthFile read_truth_csv(std::istream& in);
TruthFile read_truth_csv(const std::string& path);

// ---- simulation spec files -------------------------------------------------
//
// key=value lines, '#' starts a comment. Keys:
//   kind            gp-single | gp-competing | wphm
//   n, seed, holdout
//   box             lo:hi[,lo:hi...]   one range per covariate dimension
//   eta, beta, sigma, omega, mu, lengthscale (comma list), gamma
//   wphm_beta (comma list), rho, nu
//   censor_fraction, censored_total, cutoff
//   interval_width  convert exact events to intervals after simulating

struct SpecFile {
  SimSpec spec;
  std::optional<double> interval_width;
};

SpecFile parse_spec(std::istream& in);
SpecFile parse_spec_file(const std::string& path);
/// Parameter summary for the truth sidecar.
std::map<std::string, std::string> describe_spec(const SimSpec& spec);

// ---- model files --------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

/// Either a GP fit or a WPHM fit, plus fit diagnostics.
struct SavedModel {
  bool is_wphm = false;
  FittedModel gp;
  WphmFit wphm;
  int wphm_dim = 0;
  double laplace = 0.0;  // GP only
  std::map<std::string, double> diagnostics;

  std::string kind_name() const;
  Eigen::Index dim() const;
};

std::string model_to_json(const SavedModel& model);
/// Parses and rebuilds the Gram matrix and posterior factors.
SavedModel model_from_json(const std::string& text);
void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace gpsurv
