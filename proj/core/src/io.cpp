#include "gpsurv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpsurv/error.hpp"

namespace gpsurv {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

// Non-empty lines that are not '#' comments; comment lines go to `comments`.
std::vector<std::string> content_lines(std::istream& in, std::vector<std::string>* comments = nullptr) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      if (comments) comments->push_back(t);
      continue;
    }
    lines.push_back(t);
  }
  return lines;
}

int parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("invalid integer '" + text + "' for " + what);
  }
  if (used != text.size()) throw ValidationError("invalid integer '" + text + "' for " + what);
  return static_cast<int>(v);
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

// Covariate columns x1..xd in order, stopping at the first missing index.
std::vector<int> covariate_columns(const std::vector<std::string>& header) {
  std::vector<int> cols;
  for (int k = 1;; ++k) {
    const int c = find_column(header, "x" + std::to_string(k));
    if (c < 0) break;
    cols.push_back(c);
  }
  return cols;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "Inf" || text == "INF") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("invalid number '" + text + "' for " + what);
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ValidationError("invalid number '" + text + "' for " + what);
  }
  return v;
}

// ---- datasets ---------------------------------------------------------------

DatasetFile read_dataset_csv(std::istream& in) {
  const std::vector<std::string> lines = content_lines(in);
  if (lines.empty()) throw ValidationError("dataset file is empty");
  const std::vector<std::string> header = split(lines[0], ',');
  const int c_id = find_column(header, "id");
  const int c_time = find_column(header, "time");
  const int c_lo = find_column(header, "t_lower");
  const int c_hi = find_column(header, "t_upper");
  const int c_event = find_column(header, "event");
  const bool interval_layout = c_lo >= 0 && c_hi >= 0;
  if (c_id < 0 || c_event < 0 || (!interval_layout && c_time < 0)) {
    throw ValidationError("dataset header needs id, event and time (or t_lower,t_upper) columns");
  }
  const std::vector<int> xcols = covariate_columns(header);
  if (xcols.empty()) throw ValidationError("dataset header has no covariate columns x1..xd");

  DatasetFile out;
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  out.data.x.resize(n, static_cast<Eigen::Index>(xcols.size()));
  int max_risk = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(lines[static_cast<std::size_t>(i + 1)], ',');
    const std::string row = "row " + std::to_string(i + 1);
    if (cells.size() != header.size()) throw ValidationError(row + " has the wrong number of fields");
    out.ids.push_back(cells[static_cast<std::size_t>(c_id)]);
    const int event = parse_int(cells[static_cast<std::size_t>(c_event)], "event (" + row + ")");
    if (event < 0) throw ValidationError("event must be 0 or a risk label (" + row + ")");
    max_risk = std::max(max_risk, event);
    for (std::size_t k = 0; k < xcols.size(); ++k) {
      const double v = parse_double(cells[static_cast<std::size_t>(xcols[k])], "x" + std::to_string(k + 1) + " (" + row + ")");
      if (std::isinf(v)) throw ValidationError("covariates must be finite (" + row + ")");
      out.data.x(i, static_cast<Eigen::Index>(k)) = v;
    }
    if (interval_layout) {
      const double lo = parse_double(cells[static_cast<std::size_t>(c_lo)], "t_lower (" + row + ")");
      const double hi = parse_double(cells[static_cast<std::size_t>(c_hi)], "t_upper (" + row + ")");
      if (event == 0) {
        if (!std::isinf(hi)) throw ValidationError("censored rows need t_upper = inf (" + row + ")");
        out.data.records.push_back(Record::censored(lo));
      } else {
        Record r = Record::interval(lo, hi);
        r.risk = event;
        out.data.records.push_back(r);
      }
    } else {
      const double t = parse_double(cells[static_cast<std::size_t>(c_time)], "time (" + row + ")");
      out.data.records.push_back(event == 0 ? Record::censored(t) : Record::exact(t, event));
    }
  }
  out.data.num_risks = max_risk;
  out.data.validate();
  return out;
}

DatasetFile read_dataset_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const SurvivalDataset& data,
                       const std::vector<std::string>& ids) {
  const bool intervals = data.has(RecordKind::kInterval);
  if (intervals && data.has(RecordKind::kExact)) {
    throw ValidationError("a dataset file holds either exact or interval events, not both");
  }
  out << (intervals ? "id,t_lower,t_upper,event" : "id,time,event");
  for (Eigen::Index k = 0; k < data.dim(); ++k) out << ",x" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Record& r = data.records[static_cast<std::size_t>(i)];
    out << (ids.empty() ? std::to_string(i + 1) : ids[static_cast<std::size_t>(i)]) << ',';
    const int event = r.kind == RecordKind::kCensored ? 0 : r.risk;
    if (intervals) {
      const double hi = r.kind == RecordKind::kInterval ? r.upper : std::numeric_limits<double>::infinity();
      out << format_double(r.time) << ',' << format_double(hi) << ',' << event;
    } else {
      out << format_double(r.time) << ',' << event;
    }
    for (Eigen::Index k = 0; k < data.dim(); ++k) out << ',' << format_double(data.x(i, k));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const SurvivalDataset& data,
                       const std::vector<std::string>& ids) {
  std::ofstream out = open_out(path);
  write_dataset_csv(out, data, ids);
}

CovariateFile read_covariates_csv(std::istream& in) {
  const std::vector<std::string> lines = content_lines(in);
  if (lines.empty()) throw ValidationError("covariate file has no header");
  const std::vector<std::string> header = split(lines[0], ',');
  const std::vector<int> xcols = covariate_columns(header);
  if (xcols.empty()) throw ValidationError("covariate header has no columns x1..xd");
  const int c_id = find_column(header, "id");
  CovariateFile out;
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  out.x.resize(n, static_cast<Eigen::Index>(xcols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(lines[static_cast<std::size_t>(i + 1)], ',');
    const std::string row = "row " + std::to_string(i + 1);
    if (cells.size() != header.size()) throw ValidationError(row + " has the wrong number of fields");
    out.ids.push_back(c_id >= 0 ? cells[static_cast<std::size_t>(c_id)] : std::to_string(i + 1));
    for (std::size_t k = 0; k < xcols.size(); ++k) {
      const double v = parse_double(cells[static_cast<std::size_t>(xcols[k])], "x" + std::to_string(k + 1) + " (" + row + ")");
      if (std::isinf(v)) throw ValidationError("covariates must be finite (" + row + ")");
      out.x(i, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return out;
}

CovariateFile read_covariates_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_covariates_csv(in);
}

// ---- truth sidecar -------------------------------------------------------------

void write_truth_csv(std::ostream& out, const TruthFile& t) {
  for (const auto& [k, v] : t.params) out << "# " << k << '=' << v << '\n';
  const Eigen::Index risks = t.truth.f.cols();
  out << "id";
  for (Eigen::Index r = 0; r < risks; ++r) out << ",f" << r + 1;
  for (Eigen::Index r = 0; r < risks; ++r) out << ",tau" << r + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < t.truth.f.rows(); ++i) {
    out << (t.ids.empty() ? std::to_string(i + 1) : t.ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index r = 0; r < risks; ++r) out << ',' << format_double(t.truth.f(i, r));
    for (Eigen::Index r = 0; r < risks; ++r) out << ',' << format_double(t.truth.tau(i, r));
    out << '\n';
  }
}

void write_truth_csv(const std::string& path, const TruthFile& truth) {
  std::ofstream out = open_out(path);
  write_truth_csv(out, truth);
}

TruthFile read_truth_csv(std::istream& in) {
  std::vector<std::string> comments;
  const std::vector<std::string> lines = content_lines(in, &comments);
  TruthFile t;
  for (const std::string& c : comments) {
    const std::string body = trim(c.substr(1));
    const auto eq = body.find('=');
    if (eq != std::string::npos) t.params[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  if (lines.empty()) throw ValidationError("truth file has no header");
  const std::vector<std::string> header = split(lines[0], ',');
  std::vector<int> fcols, tcols;
  for (int r = 1;; ++r) {
    const int fc = find_column(header, "f" + std::to_string(r));
    const int tc = find_column(header, "tau" + std::to_string(r));
    if (fc < 0 || tc < 0) break;
    fcols.push_back(fc);
    tcols.push_back(tc);
  }
  const int c_id = find_column(header, "id");
  if (fcols.empty() || c_id < 0) throw ValidationError("truth header needs id, f1 and tau1 columns");
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto risks = static_cast<Eigen::Index>(fcols.size());
  t.truth.f.resize(n, risks);
  t.truth.tau.resize(n, risks);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(lines[static_cast<std::size_t>(i + 1)], ',');
    if (cells.size() != header.size()) throw ValidationError("truth row " + std::to_string(i + 1) + " has the wrong number of fields");
    t.ids.push_back(cells[static_cast<std::size_t>(c_id)]);
    for (Eigen::Index r = 0; r < risks; ++r) {
      t.truth.f(i, r) = parse_double(cells[static_cast<std::size_t>(fcols[static_cast<std::size_t>(r)])], "f");
      t.truth.tau(i, r) = parse_double(cells[static_cast<std::size_t>(tcols[static_cast<std::size_t>(r)])], "tau");
    }
  }
  return t;
}

TruthFile read_truth_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_truth_csv(in);
}

// ---- spec files ------------------------------------------------------------------

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& cell : split(text, ',')) out.push_back(parse_double(cell, what));
  if (out.empty()) throw ValidationError("empty list for " + what);
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

SpecFile parse_spec(std::istream& in) {
  SpecFile sf;
  SimSpec& s = sf.spec;
  s.theta.transform.gamma = 1.0;
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError("spec line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(t.substr(0, eq));
    if (kv.count(key)) throw ValidationError("spec key '" + key + "' given twice");
    kv[key] = trim(t.substr(eq + 1));
  }

  std::optional<std::vector<double>> lengthscale, wphm_beta;
  for (const auto& [key, value] : kv) {
    if (key == "kind") {
      s.kind = parse_sim_kind(value);
    } else if (key == "n") {
      s.n = parse_int(value, key);
    } else if (key == "seed") {
      const double v = parse_double(value, key);
      if (v < 0 || v != std::floor(v)) throw ValidationError("seed must be a nonnegative integer");
      s.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "holdout") {
      s.holdout = parse_int(value, key);
    } else if (key == "box") {
      s.box.clear();
      for (const std::string& part : split(value, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string::npos) throw ValidationError("box entries take the form lo:hi");
        s.box.push_back({parse_double(trim(part.substr(0, colon)), "box"),
                         parse_double(trim(part.substr(colon + 1)), "box")});
      }
    } else if (key == "eta") {
      s.theta.eta = parse_double(value, key);
    } else if (key == "beta") {
      s.theta.beta = parse_double(value, key);
    } else if (key == "sigma") {
      s.theta.single.sigma = s.theta.multi.sigma = parse_double(value, key);
    } else if (key == "omega") {
      s.theta.multi.omega = parse_double(value, key);
    } else if (key == "mu") {
      s.theta.multi.mu = parse_double(value, key);
    } else if (key == "lengthscale") {
      lengthscale = parse_list(value, key);
    } else if (key == "gamma") {
      s.theta.transform.gamma = parse_double(value, key);
    } else if (key == "wphm_beta") {
      wphm_beta = parse_list(value, key);
    } else if (key == "rho") {
      s.wphm.rho = parse_double(value, key);
    } else if (key == "nu") {
      s.wphm.nu = parse_double(value, key);
    } else if (key == "censor_fraction") {
      s.censor_fraction = parse_double(value, key);
    } else if (key == "censored_total") {
      s.censored_total = parse_int(value, key);
    } else if (key == "cutoff") {
      s.cutoff = parse_double(value, key);
    } else if (key == "interval_width") {
      sf.interval_width = parse_double(value, key);
    } else {
      throw ValidationError("unknown spec key '" + key + "'");
    }
  }
  const Eigen::Index d = s.dim();
  if (lengthscale) {
    const Eigen::VectorXd l = to_vector(*lengthscale);
    s.theta.multi.lengthscales = l;
    s.theta.single.lengthscales = l.size() == 1 && d > 1 ? Eigen::VectorXd::Constant(d, l[0]) : l;
  } else {
    s.theta.single.lengthscales = Eigen::VectorXd::Ones(d);
    s.theta.multi.lengthscales = Eigen::VectorXd::Ones(1);
  }
  s.wphm.beta = wphm_beta ? to_vector(*wphm_beta) : Eigen::VectorXd::Zero(d);
  s.validate();
  return sf;
}

SpecFile parse_spec_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_spec(in);
}

std::map<std::string, std::string> describe_spec(const SimSpec& s) {
  std::map<std::string, std::string> m;
  auto list = [](const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
  };
  m["kind"] = std::string(to_string(s.kind));
  m["n"] = std::to_string(s.n);
  m["seed"] = std::to_string(s.seed);
  switch (s.kind) {
    case SimKind::kGpSingle:
      m["eta"] = format_double(s.theta.eta);
      m["beta"] = format_double(s.theta.beta);
      m["sigma"] = format_double(s.theta.single.sigma);
      m["lengthscale"] = list(s.theta.single.lengthscales);
      m["gamma"] = format_double(s.theta.transform.gamma);
      break;
    case SimKind::kGpCompeting:
      m["eta"] = format_double(s.theta.eta);
      m["mu"] = format_double(s.theta.multi.mu);
      m["beta"] = format_double(s.theta.beta);
      m["sigma"] = format_double(s.theta.multi.sigma);
      m["omega"] = format_double(s.theta.multi.omega);
      m["lengthscale"] = list(s.theta.multi.lengthscales);
      m["gamma"] = format_double(s.theta.transform.gamma);
      break;
    case SimKind::kWphm:
      m["wphm_beta"] = list(s.wphm.beta);
      m["rho"] = format_double(s.wphm.rho);
      m["nu"] = format_double(s.wphm.nu);
      break;
  }
  return m;
}

// ---- model files ---------------------------------------------------------------

std::string SavedModel::kind_name() const {
  return is_wphm ? "wphm" : std::string(to_string(gp.hyper.kind));
}

Eigen::Index SavedModel::dim() const { return is_wphm ? wphm_dim : gp.data.dim(); }

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return to_vector(v);
}

std::string record_kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::kExact: return "exact";
    case RecordKind::kCensored: return "censored";
    case RecordKind::kInterval: return "interval";
  }
  return "exact";
}

RecordKind parse_record_kind(const std::string& s) {
  if (s == "exact") return RecordKind::kExact;
  if (s == "censored") return RecordKind::kCensored;
  if (s == "interval") return RecordKind::kInterval;
  throw ValidationError("unknown record kind '" + s + "' in model file");
}

json data_json(const SurvivalDataset& d) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < d.size(); ++i) rows.push_back(vec_json(d.x.row(i).transpose()));
  json recs = json::array();
  for (const Record& r : d.records) {
    json jr{{"kind", record_kind_name(r.kind)}, {"risk", r.risk}, {"time", r.time}};
    if (r.kind == RecordKind::kInterval) jr["upper"] = r.upper;
    recs.push_back(jr);
  }
  return {{"num_risks", d.num_risks}, {"dim", d.dim()}, {"x", rows}, {"records", recs}};
}

SurvivalDataset json_data(const json& j) {
  SurvivalDataset d;
  d.num_risks = j.at("num_risks").get<int>();
  const auto& rows = j.at("x");
  const auto dim = j.at("dim").get<Eigen::Index>();
  d.x.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::VectorXd r = json_vec(rows[i]);
    if (r.size() != dim) throw ValidationError("model file covariate row has the wrong length");
    d.x.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  for (const auto& jr : j.at("records")) {
    Record r;
    r.kind = parse_record_kind(jr.at("kind").get<std::string>());
    r.risk = jr.at("risk").get<int>();
    r.time = jr.at("time").get<double>();
    r.upper = jr.contains("upper") ? jr.at("upper").get<double>() : 0.0;
    d.records.push_back(r);
  }
  d.validate();
  return d;
}

json hyper_json(const HyperParams& h) {
  json j{{"eta", h.eta},
         {"beta", h.beta},
         {"nu", h.nu},
         {"gamma", h.transform.gamma},
         {"omega_pinned", h.omega_pinned}};
  if (is_competing(h.kind)) {
    j["sigma"] = h.multi.sigma;
    j["omega"] = h.multi.omega;
    j["mu"] = h.multi.mu;
    j["lengthscales"] = vec_json(h.multi.lengthscales);
  } else {
    j["sigma"] = h.single.sigma;
    j["lengthscales"] = vec_json(h.single.lengthscales);
  }
  return j;
}

HyperParams json_hyper(const json& j, ModelKind kind) {
  HyperParams h;
  h.kind = kind;
  h.eta = j.at("eta").get<double>();
  h.beta = j.at("beta").get<double>();
  h.nu = j.at("nu").get<double>();
  h.transform.gamma = j.at("gamma").get<double>();
  h.omega_pinned = j.at("omega_pinned").get<bool>();
  if (is_competing(kind)) {
    h.multi.sigma = j.at("sigma").get<double>();
    h.multi.omega = j.at("omega").get<double>();
    h.multi.mu = j.at("mu").get<double>();
    h.multi.lengthscales = json_vec(j.at("lengthscales"));
  } else {
    h.single.sigma = j.at("sigma").get<double>();
    h.single.lengthscales = json_vec(j.at("lengthscales"));
  }
  return h;
}

}  // namespace

std::string model_to_json(const SavedModel& m) {
  json j;
  j["format"] = "gpsurv-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = m.kind_name();
  j["diagnostics"] = m.diagnostics;
  if (m.is_wphm) {
    j["wphm"] = {{"beta", vec_json(m.wphm.params.beta)},
                 {"rho", m.wphm.params.rho},
                 {"nu", m.wphm.params.nu},
                 {"risk", m.wphm.risk},
                 {"nll", m.wphm.nll},
                 {"converged", m.wphm.converged},
                 {"iterations", m.wphm.iterations},
                 {"grad_norm", m.wphm.grad_norm}};
  } else {
    const FittedModel& g = m.gp;
    j["hyper"] = hyper_json(g.hyper);
    j["laplace"] = m.laplace;
    j["fit"] = {{"converged", g.converged},
                {"final_grad_norm", g.final_grad_norm},
                {"iterations", g.iterations},
                {"nll", g.nll_value},
                {"jitter", g.gram.jitter()}};
    j["f_hat"] = vec_json(g.f_hat);
    j["alpha"] = vec_json(g.alpha);
    j["w_diag"] = vec_json(g.w_diag);
    j["data"] = data_json(g.data);
  }
  return j.dump(2) + "\n";
}

SavedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "gpsurv-model") throw ValidationError("not a gpsurv model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ValidationError("unsupported model file version " + std::to_string(version));
    }
    SavedModel m;
    m.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "wphm") {
      const json& w = j.at("wphm");
      m.is_wphm = true;
      m.wphm.params.beta = json_vec(w.at("beta"));
      m.wphm.params.rho = w.at("rho").get<double>();
      m.wphm.params.nu = w.at("nu").get<double>();
      m.wphm.risk = w.at("risk").get<int>();
      m.wphm.nll = w.at("nll").get<double>();
      m.wphm.converged = w.at("converged").get<bool>();
      m.wphm.iterations = w.at("iterations").get<int>();
      m.wphm.grad_norm = w.at("grad_norm").get<double>();
      m.wphm_dim = static_cast<int>(m.wphm.params.beta.size());
      m.wphm.params.validate(m.wphm_dim);
      return m;
    }
    FittedModel& g = m.gp;
    g.hyper = json_hyper(j.at("hyper"), parse_model_kind(kind));
    m.laplace = j.at("laplace").get<double>();
    const json& fit = j.at("fit");
    g.converged = fit.at("converged").get<bool>();
    g.final_grad_norm = fit.at("final_grad_norm").get<double>();
    g.iterations = fit.at("iterations").get<int>();
    g.nll_value = fit.at("nll").get<double>();
    g.f_hat = json_vec(j.at("f_hat"));
    g.alpha = json_vec(j.at("alpha"));
    g.w_diag = json_vec(j.at("w_diag"));
    g.data = json_data(j.at("data"));
    g.hyper.validate(g.data.dim());
    const Eigen::Index len = g.hyper.latent_size(g.data.size());
    if (g.f_hat.size() != len || g.alpha.size() != len || g.w_diag.size() != len) {
      throw ValidationError("model file latent vectors do not match the training data");
    }
    g.refresh_factors();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_model(const std::string& path, const SavedModel& model) {
  std::ofstream out = open_out(path);
  out << model_to_json(model);
}

SavedModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

}  // namespace gpsurv
