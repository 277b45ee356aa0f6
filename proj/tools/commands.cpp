#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "gpsurv/baselines.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/inference.hpp"
#include "gpsurv/io.hpp"
#include "gpsurv/prediction.hpp"
#include "gpsurv/simulate.hpp"

namespace gpsurv::cli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Eigen::VectorXd parse_row(const std::string& text) {
  const std::vector<std::string> cells = split_csv(text);
  Eigen::VectorXd x(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    x[static_cast<Eigen::Index>(k)] = parse_double(cells[k], "covariate");
  }
  return x;
}

void check_dim(const SavedModel& model, Eigen::Index dim) {
  if (dim != model.dim()) {
    throw ValidationError("covariates have dimension " + std::to_string(dim) + ", model expects " +
                          std::to_string(model.dim()));
  }
}

int num_outputs(const SavedModel& m) { return !m.is_wphm && is_competing(m.gp.hyper.kind) ? 2 : 1; }

Moments event_moments(const SavedModel& m, const Eigen::VectorXd& x, int risk, bool strict) {
  if (m.is_wphm) return wphm_predict_mean(x, m.wphm.params);
  PredictOptions po;
  po.omit_prior_mean = strict;
  return predict_event_time(x, m.gp, risk, po);
}

PredictiveDensity density_for(const SavedModel& m, const Eigen::VectorXd& x, int risk) {
  if (m.is_wphm) return wphm_density(x, m.wphm.params);
  return predictive_density(x, m.gp, risk);
}

// Predicted times per id from a predictions CSV: columns mean{r} or tau{r}
// (plain "mean" for risk 1).
std::map<std::string, std::vector<double>> read_predictions(const std::string& path, int outputs) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::string line;
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> out;
  std::vector<int> cols(static_cast<std::size_t>(outputs), -1);
  int c_id = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h == "id") c_id = static_cast<int>(c);
        for (int r = 1; r <= outputs; ++r) {
          if (h == "mean" + std::to_string(r) || h == "tau" + std::to_string(r) ||
              (r == 1 && h == "mean")) {
            cols[static_cast<std::size_t>(r - 1)] = static_cast<int>(c);
          }
        }
      }
      if (c_id < 0) throw ValidationError("predictions file needs an id column");
      for (int r = 1; r <= outputs; ++r) {
        if (cols[static_cast<std::size_t>(r - 1)] < 0) {
          throw ValidationError("predictions file lacks mean" + std::to_string(r) + " (or tau" +
                                std::to_string(r) + ")");
        }
      }
      continue;
    }
    if (cells.size() != header.size()) throw ValidationError("predictions row has the wrong number of fields");
    std::vector<double> v;
    for (int c : cols) v.push_back(parse_double(cells[static_cast<std::size_t>(c)], "prediction"));
    out[cells[static_cast<std::size_t>(c_id)]] = v;
  }
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() != 3) throw ValidationError("grid takes the form start:stop:count");
  const double a = parse_double(parts[0], "grid start");
  const double b = parse_double(parts[1], "grid stop");
  const double count = parse_double(parts[2], "grid count");
  if (!(a >= 0.0) || !(b > a) || count < 2 || count != std::floor(count)) {
    throw ValidationError("grid needs 0 <= start < stop and an integer count >= 2");
  }
  const auto n = static_cast<std::size_t>(count);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

int run_simulate(const SimulateArgs& args, std::ostream& log) {
  SpecFile sf = parse_spec_file(args.spec);
  if (args.seed) sf.spec.seed = *args.seed;
  const SimResult res = simulate(sf.spec);
  SurvivalDataset data = res.data;
  if (sf.interval_width) data = intervalize(data, *sf.interval_width, sf.spec.seed + 1);

  TruthFile truth;
  truth.params = describe_spec(sf.spec);
  truth.truth = res.truth;
  write_dataset_csv(args.out + ".csv", data);
  write_truth_csv(args.out + ".truth.csv", truth);
  if (sf.spec.holdout > 0) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < sf.spec.holdout; ++i) ids.push_back(std::to_string(sf.spec.n + i + 1));
    write_dataset_csv(args.out + ".holdout.csv", res.holdout, ids);
    TruthFile ht;
    ht.params = truth.params;
    ht.ids = ids;
    ht.truth = res.holdout_truth;
    write_truth_csv(args.out + ".holdout.truth.csv", ht);
  }
  log << "simulated " << data.size() << " subjects (" << data.count(RecordKind::kCensored)
      << " censored)";
  if (sf.spec.holdout > 0) log << " plus " << sf.spec.holdout << " holdout";
  log << " -> " << args.out << ".csv\n";
  return kExitOk;
}

int run_fit(const FitArgs& args, std::ostream& log) {
  const DatasetFile df = read_dataset_csv(args.data);
  SavedModel saved;
  log << std::setprecision(6);
  if (args.model == "wphm") {
    saved.is_wphm = true;
    saved.wphm = fit_wphm(df.data, args.risk);
    saved.wphm_dim = static_cast<int>(df.data.dim());
    saved.diagnostics["grad_norm"] = saved.wphm.grad_norm;
    save_model(args.out, saved);
    log << "wphm: beta=[" << saved.wphm.params.beta.transpose() << "] rho=" << saved.wphm.params.rho
        << " nu=" << saved.wphm.params.nu << "\nnll=" << saved.wphm.nll
        << " converged=" << (saved.wphm.converged ? "yes" : "no")
        << " iterations=" << saved.wphm.iterations << " grad_norm=" << saved.wphm.grad_norm << '\n';
    return saved.wphm.converged ? kExitOk : kExitNotConverged;
  }

  const ModelKind kind = parse_model_kind(args.model);
  check_compatible(df.data, kind);
  HyperParams templ = make_template(kind, df.data, args.ard);
  if (args.gamma) templ.transform.gamma = *args.gamma;
  if (args.independent) {
    if (!is_competing(kind)) throw UnsupportedError("--independent applies to gp-competing only");
    templ.omega_pinned = true;
    templ.multi.omega = 0.0;
  }
  HyperFitOptions opts;
  opts.restarts = args.restarts;
  opts.seed = args.seed;
  opts.max_evals = args.max_evals;
  const HyperBounds bounds = default_bounds(df.data, templ);
  HyperFit fit = fit_hyperparameters(df.data, templ, bounds, opts);

  saved.gp = std::move(fit.model);
  saved.laplace = fit.value;
  saved.diagnostics["best_restart"] = fit.best_restart;
  saved.diagnostics["restarts"] = static_cast<double>(fit.restarts.size());
  save_model(args.out, saved);
  log << to_string(kind) << ": " << fit.theta.describe() << "\nL_hyp=" << fit.value
      << " best_restart=" << fit.best_restart << " map_converged="
      << (saved.gp.converged ? "yes" : "no") << " grad_norm=" << saved.gp.final_grad_norm
      << " jitter=" << saved.gp.gram.jitter() << '\n';
  for (std::size_t r = 0; r < fit.restarts.size(); ++r) {
    const RestartRecord& rec = fit.restarts[r];
    log << "  restart " << r << ": L_hyp=" << rec.value << " evals=" << rec.evaluations
        << (rec.value >= kLaplaceFailure ? " (start failed)" : rec.converged ? "" : " (budget exhausted)")
        << '\n';
  }
  return saved.gp.converged ? kExitOk : kExitNotConverged;
}

int run_predict(const PredictArgs& args, std::ostream& log) {
  const SavedModel model = load_model(args.model);
  const CovariateFile cf = read_covariates_csv(args.covariates);
  if (cf.x.rows() > 0) check_dim(model, cf.x.cols());
  const int outputs = num_outputs(model);
  std::ofstream out = open_out(args.out);
  out << "id";
  if (outputs == 1) {
    out << ",mean,stdev";
  } else {
    out << ",mean1,stdev1,mean2,stdev2";
  }
  out << '\n';
  std::size_t wide = 0;
  for (Eigen::Index i = 0; i < cf.x.rows(); ++i) {
    const Eigen::VectorXd x = cf.x.row(i).transpose();
    out << cf.ids[static_cast<std::size_t>(i)];
    for (int r = 1; r <= outputs; ++r) {
      const Moments m = event_moments(model, x, r, args.omit_prior_mean);
      if (m.wide) ++wide;
      out << ',' << format_double(m.mean) << ',' << format_double(std::sqrt(m.variance));
    }
    out << '\n';
  }
  log << "predicted " << cf.x.rows() << " rows -> " << args.out << '\n';
  if (wide > 0) log << "warning: " << wide << " predictive densities were too wide for the quadrature tolerance\n";
  if (!model.is_wphm && is_hazard(model.gp.hyper.kind)) {
    log << "note: GP hazard predictions plug in the posterior mean and understate the variance\n";
  }
  return kExitOk;
}

int run_curves(const CurvesArgs& args, std::ostream& log) {
  const SavedModel model = load_model(args.model);
  const Eigen::VectorXd x = parse_row(args.x);
  check_dim(model, x.size());
  const std::vector<double> grid = parse_grid(args.grid);
  const bool competing = num_outputs(model) == 2;
  if (args.disabled && !competing) throw UnsupportedError("--disabled needs a competing-risks model");
  if (args.risk < 1 || args.risk > num_outputs(model)) throw ValidationError("risk index out of range");

  const PredictiveDensity pd = density_for(model, x, args.risk);
  std::vector<double> disabled;
  if (args.disabled) disabled = disabled_risk_survival(x, model.gp, args.risk, grid);
  std::ofstream out = open_out(args.out);
  out << "tau,pdf,survival,hazard";
  if (args.disabled) out << ",disabled_survival" << args.risk << ",cumulative_incidence" << args.risk;
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    out << format_double(tau) << ',' << format_double(predictive_pdf(tau, pd)) << ','
        << format_double(predictive_survival(tau, pd)) << ','
        << format_double(predictive_hazard(tau, pd));
    if (args.disabled) out << ',' << format_double(disabled[i]) << ',' << format_double(1.0 - disabled[i]);
    out << '\n';
  }
  log << "wrote " << grid.size() << " curve points -> " << args.out << '\n';
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& args, std::ostream& log, std::vector<EvalRow>* rows) {
  const SavedModel model = load_model(args.model);
  const DatasetFile df = read_dataset_csv(args.data);
  check_dim(model, df.data.dim());
  const int outputs = num_outputs(model);
  std::map<std::string, std::vector<double>> given;
  if (args.predictions) given = read_predictions(*args.predictions, outputs);

  std::vector<EvalRow> table;
  for (int r = 1; r <= outputs; ++r) table.push_back({r, 0, 0.0});
  std::size_t skipped = 0;
  for (Eigen::Index i = 0; i < df.data.size(); ++i) {
    const Record& rec = df.data.records[static_cast<std::size_t>(i)];
    if (rec.kind != RecordKind::kExact) {
      skipped += rec.kind == RecordKind::kInterval;
      continue;
    }
    int slot = rec.risk;
    if (model.is_wphm) {
      if (rec.risk != model.wphm.risk) continue;
      slot = 1;
    }
    if (slot < 1 || slot > outputs) continue;
    double pred = 0.0;
    const std::string& id = df.ids[static_cast<std::size_t>(i)];
    if (args.predictions) {
      const auto it = given.find(id);
      if (it == given.end()) throw ValidationError("no prediction for id " + id);
      pred = it->second[static_cast<std::size_t>(slot - 1)];
    } else {
      pred = event_moments(model, df.data.x.row(i).transpose(), slot, false).mean;
    }
    EvalRow& row = table[static_cast<std::size_t>(slot - 1)];
    const double e = pred - rec.time;
    row.mse += e * e;
    ++row.events;
  }
  std::size_t total = 0;
  for (EvalRow& row : table) {
    if (row.events > 0) row.mse /= static_cast<double>(row.events);
    total += row.events;
  }
  if (total == 0) throw ValidationError("validation data has no uncensored events to evaluate");

  log << "model " << model.kind_name() << '\n' << std::left << std::setw(6) << "risk"
      << std::setw(8) << "events" << "mse\n";
  for (const EvalRow& row : table) {
    log << std::setw(6) << row.risk << std::setw(8) << row.events << format_double(row.mse) << '\n';
  }
  if (skipped > 0) log << "skipped " << skipped << " interval-censored rows\n";
  if (rows) *rows = table;
  return kExitOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NotConvergedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const IllConditionedError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace gpsurv::cli
