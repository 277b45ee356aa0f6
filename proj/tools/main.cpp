#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace gpsurv::cli;

  CLI::App app{"Gaussian-process survival analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a spec file");
  c_sim->add_option("spec", sim.spec, "Spec file (key=value lines)")->required()->check(CLI::ExistingFile);
  c_sim->add_option("-o,--out", sim.out, "Output prefix")->required();
  c_sim->add_option("--seed", sim.seed, "Override the spec's seed");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit a model to a dataset");
  c_fit->add_option("data", fit.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  c_fit->add_option("-m,--model", fit.model,
                    "gp-aft | gp-aft-interval | gp-competing | gp-hazard | gp-hazard-interval | wphm")
      ->capture_default_str();
  c_fit->add_option("-o,--out", fit.out, "Model file to write")->required();
  c_fit->add_option("--restarts", fit.restarts, "Hyperparameter restarts")->capture_default_str();
  c_fit->add_option("--seed", fit.seed, "Seed for restart draws")->capture_default_str();
  c_fit->add_option("--max-evals", fit.max_evals, "Objective evaluations per restart")->capture_default_str();
  c_fit->add_flag("--independent", fit.independent, "Competing risks: pin omega to 0");
  c_fit->add_flag("--ard", fit.ard, "Competing risks: one length scale per covariate");
  c_fit->add_option("--gamma", fit.gamma, "Time-transform scale (default: half the smallest time)");
  c_fit->add_option("--risk", fit.risk, "WPHM: risk treated as the event")->capture_default_str();

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Predict event-time mean and stdev");
  c_pred->add_option("model", pred.model, "Model file")->required()->check(CLI::ExistingFile);
  c_pred->add_option("covariates", pred.covariates, "CSV with columns x1..xd")->required()->check(CLI::ExistingFile);
  c_pred->add_option("-o,--out", pred.out, "Predictions CSV")->required();
  c_pred->add_flag("--omit-prior-mean", pred.omit_prior_mean,
                   "Latent mean k*^T K^-1 f without the prior-mean correction");

  CurvesArgs curves;
  auto* c_cur = app.add_subcommand("curves", "Density, survival and hazard curves for one covariate row");
  c_cur->add_option("model", curves.model, "Model file")->required()->check(CLI::ExistingFile);
  c_cur->add_option("--x", curves.x, "Covariate row, comma separated")->required();
  c_cur->add_option("--grid", curves.grid, "start:stop:count")->required();
  c_cur->add_option("-o,--out", curves.out, "Curves CSV")->required();
  c_cur->add_option("--risk", curves.risk, "Risk (competing models)")->capture_default_str();
  c_cur->add_flag("--disabled", curves.disabled, "Add disabled-risk survival and cumulative incidence");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Per-risk event-time MSE on validation data");
  c_ev->add_option("model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  c_ev->add_option("data", ev.data, "Validation dataset CSV")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--predictions", ev.predictions, "Use these predictions (id, mean[r] or tau[r]) instead of the model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  return guarded(
      [&]() -> int {
        if (*c_sim) return run_simulate(sim, std::cout);
        if (*c_fit) return run_fit(fit, std::cout);
        if (*c_pred) return run_predict(pred, std::cout);
        if (*c_cur) return run_curves(curves, std::cout);
        return run_evaluate(ev, std::cout);
      },
      std::cerr);
}
