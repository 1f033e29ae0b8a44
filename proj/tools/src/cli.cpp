#include "tmap_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmap/adapt.hpp"
#include "tmap/error.hpp"
#include "tmap/optimize.hpp"
#include "tmap/serialization.hpp"
#include "tmap/targets.hpp"
#include "tmap/templates.hpp"
#include "tmap_cli/csv.hpp"

namespace tmap::cli {

namespace {

using nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
};

struct TemplateArgs {
  std::string kind = "separable";
  int degree = 1;
  std::string family = "hermite_function";
  double edge_radius = 4.0;
  int rbf = 0;
  bool edge_terms = false;
  std::string rectifier = "softplus";
  int quadrature_order = kDefaultQuadratureOrder;
  std::string sparsity = "dense";
  int markov_order = 1;
  std::string ordering;
};

struct FitArgs {
  std::string regularization = "l2";
  double lambda = 1e-8;
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  bool no_closed_form = false;
};

void add_template_options(CLI::App* cmd, TemplateArgs& t) {
  cmd->add_option("--kind", t.kind, "Component parameterization")
      ->check(CLI::IsMember({"marginal", "separable", "crossterm"}))
      ->capture_default_str();
  cmd->add_option("--degree", t.degree, "Maximum total degree of the terms")->capture_default_str();
  cmd->add_option("--family", t.family, "Basis for degree >= 1 factors")
      ->check(CLI::IsMember({"hermite_poly", "hermite_function", "edge_controlled_hermite"}))
      ->capture_default_str();
  cmd->add_option("--edge-radius", t.edge_radius, "Radius of the edge-controlled weight")
      ->capture_default_str();
  cmd->add_option("--rbf", t.rbf, "Integrated RBFs in separable/marginal monotone parts")
      ->capture_default_str();
  cmd->add_flag("--edge-terms", t.edge_terms, "Add LET/RET terms at the outer RBF centers");
  cmd->add_option("--rectifier", t.rectifier, "Cross-term rectifier")
      ->check(CLI::IsMember({"softplus", "exponential", "shifted_elu"}))
      ->capture_default_str();
  cmd->add_option("--quadrature-order", t.quadrature_order, "Gauss-Legendre nodes for cross-terms")
      ->capture_default_str();
  cmd->add_option("--sparsity", t.sparsity, "Dependence pattern")
      ->check(CLI::IsMember({"dense", "markov"}))
      ->capture_default_str();
  cmd->add_option("--markov-order", t.markov_order, "Lag of the Markov pattern")->capture_default_str();
  cmd->add_option("--ordering", t.ordering,
                  "Comma-separated column permutation; position j of the map uses column ordering[j]");
}

void add_fit_options(CLI::App* cmd, FitArgs& f) {
  cmd->add_option("--regularization", f.regularization, "Penalty kind")
      ->check(CLI::IsMember({"none", "l1", "l2"}))
      ->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Penalty weight")->capture_default_str();
  cmd->add_option("--max-iterations", f.max_iterations, "Optimizer iteration cap")->capture_default_str();
  cmd->add_option("--gradient-tolerance", f.gradient_tolerance, "Relative projected-gradient tolerance")
      ->capture_default_str();
  cmd->add_flag("--no-closed-form", f.no_closed_form, "Use the generic optimizer for separable components");
}

TemplateOptions to_template(const TemplateArgs& t, int dim) {
  TemplateOptions o;
  o.kind = component_kind_from_name(t.kind);
  o.degree = t.degree;
  o.family = term_family_from_name(t.family);
  o.edge_radius = t.edge_radius;
  o.rbf_count = t.rbf;
  o.edge_terms = t.edge_terms;
  o.rectifier = rectifier_from_name(t.rectifier);
  o.quadrature_order = t.quadrature_order;
  o.sparsity = t.sparsity == "markov" ? Sparsity::Markov : Sparsity::Dense;
  o.markov_order = t.markov_order;
  if (o.degree < 1) throw ConfigError("--degree must be >= 1");
  if (o.rbf_count < 0) throw ConfigError("--rbf must be >= 0");
  if (o.edge_terms && o.rbf_count == 0) throw ConfigError("--edge-terms needs --rbf > 0");
  if (o.markov_order < 0) throw ConfigError("--markov-order must be >= 0");
  (void)dim;
  return o;
}

FitOptions to_fit(const FitArgs& f, const Globals& g, int quadrature_order) {
  FitOptions o;
  o.regularization.kind = regularization_from_name(f.regularization);
  o.regularization.lambda = f.lambda;
  o.regularization.validate();
  o.max_iterations = f.max_iterations;
  o.gradient_tolerance = f.gradient_tolerance;
  if (o.max_iterations < 1) throw ConfigError("--max-iterations must be >= 1");
  if (!(o.gradient_tolerance > 0.0)) throw ConfigError("--gradient-tolerance must be positive");
  o.quadrature_order = quadrature_order;
  o.threads = g.threads;
  o.use_closed_form = !f.no_closed_form;
  return o;
}

std::vector<int> parse_ordering(const std::string& text, int dim) {
  std::vector<int> ordering(static_cast<std::size_t>(dim));
  std::iota(ordering.begin(), ordering.end(), 0);
  if (text.empty()) return ordering;
  ordering.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ordering.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--ordering entry '" + item + "' is not an integer");
    }
  }
  std::vector<int> sorted = ordering;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(static_cast<std::size_t>(dim));
  std::iota(expected.begin(), expected.end(), 0);
  if (sorted != expected) {
    throw ConfigError("--ordering must be a permutation of 0.." + std::to_string(dim - 1));
  }
  return ordering;
}

// Columns in map order: out[:, j] = in[:, ordering[j]].
SampleMatrix to_map_order(const SampleMatrix& x, const std::vector<int>& ordering) {
  SampleMatrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < ordering.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(ordering[j]);
  }
  return out;
}

SampleMatrix to_original_order(const SampleMatrix& x, const std::vector<int>& ordering) {
  SampleMatrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < ordering.size(); ++j) {
    out.col(ordering[j]) = x.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos) throw ConfigError("--target-param expects key=value, got '" + it + "'");
    try {
      std::size_t used = 0;
      const std::string v = it.substr(eq + 1);
      out[it.substr(0, eq)] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw ConfigError("--target-param value in '" + it + "' is not a number");
    }
  }
  return out;
}

std::string joined(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ' ';
    s += args[i];
  }
  return s;
}

std::string report_path(const std::string& map_path, const std::string& report) {
  if (!report.empty()) return report;
  const auto dot = map_path.rfind(".json");
  return (dot != std::string::npos && dot + 5 == map_path.size() ? map_path.substr(0, dot) : map_path) +
         ".report.json";
}

std::string failure_report(const FitError& e) {
  json j;
  j["success"] = false;
  j["error"] = e.what();
  json f = json::array();
  for (const auto& [k, what] : e.failures()) f.push_back({{"component", k}, {"message", what}});
  j["failures"] = f;
  return j.dump(2) + "\n";
}

MapDocument load_map(const std::string& path) { return map_from_json(read_file(path)); }

SampleMatrix require_width(const Table& t, int dim, const std::string& what) {
  if (t.values.cols() != dim) {
    throw MalformedInputError(what + " has " + std::to_string(t.values.cols()) +
                              " columns; the map has " + std::to_string(dim));
  }
  if (t.values.rows() == 0) throw MalformedInputError(what + " has no data rows");
  return t.values;
}

// ---------------------------------------------------------------- fit

struct FitCommand {
  std::string data, target, out, report;
  std::vector<std::string> target_params;
  long long n_ref = kDefaultReferenceSamples;
  TemplateArgs templ;
  FitArgs fit;
};

int cmd_fit(const FitCommand& c, const Globals& g, const std::vector<std::string>& args,
            std::ostream& out) {
  if (c.data.empty() == c.target.empty()) throw ConfigError("fit needs exactly one of --data or --target");
  FitOptions fo = to_fit(c.fit, g, c.templ.quadrature_order);
  const std::string rpath = report_path(c.out, c.report);
  MapProvenance prov{joined(args), g.seed, ""};
  MapFit result{TriangularMap::identity(1), {}};
  std::vector<int> ordering;
  try {
    if (!c.data.empty()) {
      const std::string bytes = read_file(c.data);
      prov.data_hash = fnv1a_hex(bytes);
      const Table t = parse_csv(bytes);
      const int dim = static_cast<int>(t.values.cols());
      if (t.values.rows() == 0) throw MalformedInputError("data has no rows");
      ordering = parse_ordering(c.templ.ordering, dim);
      const SampleMatrix x = to_map_order(t.values, ordering);
      const Standardizer st = Standardizer::fit(x);
      const SampleMatrix xs = st.standardize(x);
      std::vector<std::string> warnings;
      const auto templ = make_template(dim, to_template(c.templ, dim), &xs, &warnings);
      for (const auto& w : warnings) out << "warning: " << w << '\n';
      result = fit_map_standardized(templ, xs, st, fo);
    } else {
      const TargetSpec spec = target_from_name(c.target, parse_params(c.target_params));
      const int dim = spec.dim();
      prov.data_hash = fnv1a_hex(c.target + ":" + joined(c.target_params));
      ordering = parse_ordering(c.templ.ordering, dim);
      if (c.n_ref < 1) throw ConfigError("--n-ref must be positive");
      LogDensity base = make_log_density(spec);
      LogDensity target = base;
      // Evaluate the density with coordinates put back in their original places.
      target.value = [base, ordering](std::span<const double> x) {
        std::vector<double> y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) y[static_cast<std::size_t>(ordering[j])] = x[j];
        return base.value(y);
      };
      target.gradient = [base, ordering](std::span<const double> x, std::span<double> gout) {
        std::vector<double> y(x.size()), gy(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) y[static_cast<std::size_t>(ordering[j])] = x[j];
        base.gradient(y, gy);
        for (std::size_t j = 0; j < x.size(); ++j) gout[j] = gy[static_cast<std::size_t>(ordering[j])];
      };
      const SampleMatrix ref = standard_normal_samples(static_cast<Eigen::Index>(c.n_ref), dim, g.seed);
      const auto templ = make_template(dim, to_template(c.templ, dim), &ref);
      result = fit_map_from_density(templ, target, static_cast<Eigen::Index>(c.n_ref), g.seed, fo);
    }
  } catch (const FitError& e) {
    write_file_atomic(rpath, failure_report(e));
    throw;
  }
  write_file_atomic(c.out, map_to_json(result.map, ordering, prov));
  write_file_atomic(rpath, result.report.to_json() + "\n");
  out << "wrote " << c.out << " (" << result.map.num_coefficients() << " coefficients, objective "
      << result.report.total_objective << ")\n";
  if (!result.report.success()) {
    out << "optimizer did not converge for every component; see " << rpath << '\n';
    return kExitFitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- adapt

struct AdaptCommand {
  std::string data, out, report;
  TemplateArgs templ;
  FitArgs fit;
  int max_terms = 10;
  int max_degree = 8;
  double validation_fraction = 0.2;
  int patience = 2;
};

int cmd_adapt(const AdaptCommand& c, const Globals& g, const std::vector<std::string>& args,
              std::ostream& out) {
  FitOptions fo = to_fit(c.fit, g, c.templ.quadrature_order);
  AdaptOptions ao;
  ao.max_terms = c.max_terms;
  ao.max_total_degree = c.max_degree;
  ao.validation_fraction = c.validation_fraction;
  ao.patience = c.patience;
  ao.seed = g.seed;
  try {
    ao.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  const std::string bytes = read_file(c.data);
  const Table t = parse_csv(bytes);
  const int dim = static_cast<int>(t.values.cols());
  if (t.values.rows() == 0) throw MalformedInputError("data has no rows");
  const auto ordering = parse_ordering(c.templ.ordering, dim);
  const std::string rpath = report_path(c.out, c.report);
  const AdaptResult result = [&] {
    try {
      return adapt_map(dim, to_template(c.templ, dim), to_map_order(t.values, ordering), ao, fo);
    } catch (const FitError& e) {
      write_file_atomic(rpath, failure_report(e));
      throw;
    }
  }();
  write_file_atomic(c.out, map_to_json(result.fit.map, ordering, {joined(args), g.seed, fnv1a_hex(bytes)}));
  write_file_atomic(rpath, result.fit.report.to_json() + "\n");
  out << "wrote " << c.out << " after " << result.fit.report.adaptation.size()
      << " accepted candidates (" << result.fit.map.num_coefficients() << " coefficients)\n";
  return result.fit.report.success() ? kExitOk : kExitFitFailure;
}

// ---------------------------------------------------------------- sample

struct SampleCommand {
  std::string map, out;
  long long n = 1000;
};

int cmd_sample(const SampleCommand& c, const Globals& g, std::ostream& out) {
  if (c.n < 1) throw ConfigError("--n must be positive");
  const auto doc = load_map(c.map);
  const SampleMatrix x = doc.map.sample_target(static_cast<Eigen::Index>(c.n), g.seed, g.threads);
  write_file_atomic(c.out, format_csv(default_header(doc.map.dim()), to_original_order(x, doc.ordering)));
  out << "wrote " << c.n << " samples to " << c.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- condition

struct ConditionCommand {
  std::string map, out, method = "plain", joint;
  std::vector<double> given;
  long long n = 1000;
};

int cmd_condition(const ConditionCommand& c, const Globals& g, std::ostream& out) {
  const auto doc = load_map(c.map);
  const int K = doc.map.dim();
  const int k = static_cast<int>(c.given.size());
  if (k >= K) {
    throw ConfigError("conditioning on " + std::to_string(k) + " values leaves nothing to sample in a " +
                      std::to_string(K) + "-dimensional map");
  }
  if (c.n < 1) throw ConfigError("--n must be positive");
  SampleMatrix tail;
  if (c.method == "plain") {
    tail = doc.map.sample_conditional(c.given, static_cast<Eigen::Index>(c.n), g.seed, g.threads);
  } else {
    if (c.joint.empty()) throw ConfigError("composite conditioning needs --joint samples");
    const SampleMatrix joint = to_map_order(require_width(read_csv(c.joint), K, "joint sample file"),
                                            doc.ordering);
    const Eigen::Index rows = std::min<Eigen::Index>(joint.rows(), static_cast<Eigen::Index>(c.n));
    tail.resize(rows, K - k);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto t = doc.map.composite_conditional(row_span(joint, i), c.given);
      for (int j = 0; j < K - k; ++j) tail(i, j) = t[static_cast<std::size_t>(j)];
    }
  }
  SampleMatrix full(tail.rows(), K);
  for (int j = 0; j < k; ++j) full.col(j).setConstant(c.given[static_cast<std::size_t>(j)]);
  full.rightCols(K - k) = tail;
  write_file_atomic(c.out, format_csv(default_header(K), to_original_order(full, doc.ordering)));
  out << "wrote " << tail.rows() << " conditional samples to " << c.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- logpdf

struct LogpdfCommand {
  std::string map, points, out;
};

int cmd_logpdf(const LogpdfCommand& c, std::ostream& out) {
  const auto doc = load_map(c.map);
  const Table t = read_csv(c.points);
  const SampleMatrix x = to_map_order(require_width(t, doc.map.dim(), "points file"), doc.ordering);
  SampleMatrix result(t.values.rows(), t.values.cols() + 1);
  result.leftCols(t.values.cols()) = t.values;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    result(i, t.values.cols()) = doc.map.target_logpdf(row_span(x, i));
  }
  auto header = t.header;
  header.push_back("logpdf");
  write_file_atomic(c.out, format_csv(header, result));
  out << "wrote " << x.rows() << " log-densities to " << c.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseCommand {
  std::string map, data, out, grid, scatter;
  int grid_size = 101;
  long long n = 2000;
};

int cmd_diagnose(const DiagnoseCommand& c, const Globals& g, std::ostream& out) {
  const auto doc = load_map(c.map);
  const auto& map = doc.map;
  const int K = map.dim();
  if (c.n < 2) throw ConfigError("--n must be at least 2");
  if (c.grid_size < 2) throw ConfigError("--grid-size must be at least 2");
  if (!c.grid.empty() && K != 2) throw ConfigError("--grid needs a 2-dimensional map");

  const SampleMatrix draws = map.sample_target(static_cast<Eigen::Index>(c.n), g.seed, g.threads);
  json report;
  report["K"] = K;
  report["direction"] = map.direction() == MapDirection::TargetToReference ? "target_to_reference"
                                                                           : "reference_to_target";
  report["num_coefficients"] = map.num_coefficients();
  report["map_samples"] = c.n;

  SampleMatrix data;
  if (!c.data.empty()) data = to_map_order(require_width(read_csv(c.data), K, "data file"), doc.ordering);

  json moments = json::array();
  for (int j = 0; j < K; ++j) {
    const auto col = draws.col(j);
    const double m = col.mean();
    json row{{"column", "x" + std::to_string(doc.ordering[static_cast<std::size_t>(j)] + 1)},
             {"map_mean", m},
             {"map_var", (col.array() - m).square().sum() / static_cast<double>(col.size() - 1)}};
    if (data.rows() > 1) {
      const auto dc = data.col(j);
      const double dm = dc.mean();
      row["data_mean"] = dm;
      row["data_var"] = (dc.array() - dm).square().sum() / static_cast<double>(dc.size() - 1);
    }
    moments.push_back(row);
  }
  report["moments"] = moments;

  if (data.rows() > 0) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) nll -= map.target_logpdf(row_span(data, i));
    report["heldout_nll"] = nll / static_cast<double>(data.rows());
    if (map.direction() == MapDirection::TargetToReference) {
      const SampleMatrix xs = map.standardizer().standardize(data);
      json per = json::array();
      for (const auto& comp : map.components()) {
        per.push_back(nll_objective(comp, xs) / static_cast<double>(xs.rows()));
      }
      report["component_objectives"] = per;
    }
  }

  if (!c.grid.empty()) {
    const SampleMatrix& ref = data.rows() > 1 ? data : draws;
    SampleMatrix grid(static_cast<Eigen::Index>(c.grid_size) * c.grid_size, 3);
    double lo[2], hi[2];
    for (int j = 0; j < 2; ++j) {
      const double a = ref.col(j).minCoeff(), b = ref.col(j).maxCoeff();
      const double pad = 0.1 * std::max(b - a, 1e-12);
      lo[j] = a - pad;
      hi[j] = b + pad;
    }
    Eigen::Index r = 0;
    for (int i = 0; i < c.grid_size; ++i) {
      for (int j = 0; j < c.grid_size; ++j, ++r) {
        const double p[2] = {lo[0] + (hi[0] - lo[0]) * i / (c.grid_size - 1),
                             lo[1] + (hi[1] - lo[1]) * j / (c.grid_size - 1)};
        grid(r, 0) = p[0];
        grid(r, 1) = p[1];
        grid(r, 2) = map.target_logpdf(p);
      }
    }
    // Grid points are in map order; put the coordinate columns back.
    SampleMatrix coords = to_original_order(grid.leftCols(2), doc.ordering);
    grid.leftCols(2) = coords;
    write_file_atomic(c.grid, format_csv({"x1", "x2", "logpdf"}, grid));
    report["grid_file"] = c.grid;
  }
  if (!c.scatter.empty()) {
    write_file_atomic(c.scatter, format_csv(default_header(K), to_original_order(draws, doc.ordering)));
    report["scatter_file"] = c.scatter;
  }
  write_file_atomic(c.out, report.dump(2) + "\n");
  out << "wrote diagnostics to " << c.out << '\n';
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaVersionError*>(&e)) return kExitMapVersion;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PathError*>(&e) ||
      dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const CapabilityError*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const MalformedInputError*>(&e) || dynamic_cast<const DegenerateDataError*>(&e) ||
      dynamic_cast<const ContractViolation*>(&e)) {
    return kExitMalformedInput;
  }
  return kExitFitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monotone triangular transport maps: fit, sample, condition and evaluate densities."};
  app.name(args.empty() ? "tmap" : args.front());
  app.set_config("--config", "", "TOML-style configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0: TMAP_THREADS or all cores)")
      ->capture_default_str();

  FitCommand fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a map from samples (--data) or a built-in density (--target)");
  fit_cmd->add_option("--data", fit.data, "CSV samples with a header row");
  fit_cmd->add_option("--target", fit.target, "Built-in target for density mode")
      ->check(CLI::IsMember({"std_gauss", "corr_gauss", "ar1", "banana", "mixture_corners", "wavy",
                             "wavy_rotated"}));
  fit_cmd->add_option("--target-param", fit.target_params, "Target parameter key=value (repeatable)");
  fit_cmd->add_option("--n-ref", fit.n_ref, "Reference samples in density mode")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output map file")->required();
  fit_cmd->add_option("--report", fit.report, "Output fit report (default: <out>.report.json)");
  add_template_options(fit_cmd, fit.templ);
  add_fit_options(fit_cmd, fit.fit);

  AdaptCommand adapt;
  adapt.templ.kind = "crossterm";
  auto* adapt_cmd = app.add_subcommand("adapt", "Grow a map greedily from the identity");
  adapt_cmd->add_option("--data", adapt.data, "CSV samples with a header row")->required();
  adapt_cmd->add_option("--out", adapt.out, "Output map file")->required();
  adapt_cmd->add_option("--report", adapt.report, "Output fit report (default: <out>.report.json)");
  adapt_cmd->add_option("--max-terms", adapt.max_terms, "Accepted candidates per component")
      ->capture_default_str();
  adapt_cmd->add_option("--max-degree", adapt.max_degree, "Maximum total degree")->capture_default_str();
  adapt_cmd->add_option("--validation-fraction", adapt.validation_fraction, "Held-out share")
      ->capture_default_str();
  adapt_cmd->add_option("--patience", adapt.patience, "Non-improving acceptances before stopping")
      ->capture_default_str();
  add_template_options(adapt_cmd, adapt.templ);
  add_fit_options(adapt_cmd, adapt.fit);

  SampleCommand sample_c;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples of the approximated target");
  sample_cmd->add_option("--map", sample_c.map, "Map file")->required();
  sample_cmd->add_option("--n", sample_c.n, "Number of samples")->capture_default_str();
  sample_cmd->add_option("--out", sample_c.out, "Output CSV")->required();

  ConditionCommand cond;
  auto* cond_cmd = app.add_subcommand("condition", "Sample the trailing variables given the leading ones");
  cond_cmd->add_option("--map", cond.map, "Map file")->required();
  cond_cmd->add_option("--given", cond.given,
                       "Values of the first k map variables (comma-separated, map order)")
      ->delimiter(',');
  cond_cmd->add_option("--n", cond.n, "Number of samples (composite: at most this many joint rows)")
      ->capture_default_str();
  cond_cmd->add_option("--method", cond.method, "plain or composite")
      ->check(CLI::IsMember({"plain", "composite"}))
      ->capture_default_str();
  cond_cmd->add_option("--joint", cond.joint, "CSV of joint samples for composite conditioning");
  cond_cmd->add_option("--out", cond.out, "Output CSV")->required();

  LogpdfCommand lp;
  auto* lp_cmd = app.add_subcommand("logpdf", "Append the log-density of each row");
  lp_cmd->add_option("--map", lp.map, "Map file")->required();
  lp_cmd->add_option("--points", lp.points, "CSV of points")->required();
  lp_cmd->add_option("--out", lp.out, "Output CSV")->required();

  DiagnoseCommand diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Held-out NLL, moments and plot-ready CSV");
  diag_cmd->add_option("--map", diag.map, "Map file")->required();
  diag_cmd->add_option("--data", diag.data, "Held-out CSV samples");
  diag_cmd->add_option("--out", diag.out, "Output JSON")->required();
  diag_cmd->add_option("--grid", diag.grid, "Log-density grid CSV (2-D maps)");
  diag_cmd->add_option("--grid-size", diag.grid_size, "Grid points per axis")->capture_default_str();
  diag_cmd->add_option("--scatter", diag.scatter, "Scatter CSV of map samples");
  diag_cmd->add_option("--n", diag.n, "Map samples for moments and scatter")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, g, args, out);
    if (adapt_cmd->parsed()) return cmd_adapt(adapt, g, args, out);
    if (sample_cmd->parsed()) return cmd_sample(sample_c, g, out);
    if (cond_cmd->parsed()) return cmd_condition(cond, g, out);
    if (lp_cmd->parsed()) return cmd_logpdf(lp, out);
    if (diag_cmd->parsed()) return cmd_diagnose(diag, g, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitConfig;
}

}  // namespace tmap::cli
