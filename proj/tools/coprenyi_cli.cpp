// coprenyi command-line interface.
//
// Subcommands: measure, bounds, fit, sample, select, simulate, run.
// Every subcommand except `sample` emits exactly one JSON record per task
// (single line, insertion-ordered keys) to stdout or --out; `sample` emits
// CSV. Records never contain timestamps or machine state, so reruns with the
// same inputs are byte-identical.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 numeric failure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coprenyi/bounds.hpp"
#include "coprenyi/copula.hpp"
#include "coprenyi/estimation.hpp"
#include "coprenyi/marginals.hpp"
#include "coprenyi/measures.hpp"
#include "coprenyi/quadrature.hpp"
#include "coprenyi/simulation.hpp"

namespace {

using nlohmann::ordered_json;
namespace cop = coprenyi::copula;
namespace marg = coprenyi::marginals;
namespace meas = coprenyi::measures;
namespace est = coprenyi::estimation;
namespace quad = coprenyi::quadrature;
namespace bnd = coprenyi::bounds;
namespace sim = coprenyi::simulation;

[[noreturn]] void usage_error(const std::string& msg) {
  throw std::invalid_argument(msg);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) usage_error("trailing characters in " + what + ": '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    usage_error("cannot parse " + what + ": '" + s + "'");
  } catch (const std::out_of_range&) {
    usage_error("value out of range for " + what + ": '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) usage_error("trailing characters in " + what + ": '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    usage_error("cannot parse " + what + ": '" + s + "'");
  } catch (const std::out_of_range&) {
    usage_error("value out of range for " + what + ": '" + s + "'");
  }
}

// "family:theta:dim"; theta may be empty for the product copula.
cop::CopulaModel parse_copula_spec(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.empty() || parts.size() > 3)
    usage_error("copula spec must look like family:theta:dim, got '" + spec + "'");
  cop::CopulaModel m;
  m.family = cop::family_from_name(trim(parts[0]));
  m.parameter = 0.0;
  if (parts.size() >= 2 && !trim(parts[1]).empty())
    m.parameter = parse_double(trim(parts[1]), "copula parameter");
  m.dimension = 2;
  if (parts.size() == 3) {
    long d = parse_long(trim(parts[2]), "copula dimension");
    m.dimension = static_cast<int>(d);
  }
  m.validate();
  return m;
}

std::string copula_spec_string(const cop::CopulaModel& m) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", m.parameter);
  return std::string(cop::family_name(m.family)) + ":" + buf + ":" +
         std::to_string(m.dimension);
}

// "uniform" | "exp:rate" | "prhr:exponent[:base-spec...]"
marg::MarginalModel parse_marginal_tokens(const std::vector<std::string>& toks,
                                          std::size_t at) {
  if (at >= toks.size()) usage_error("empty marginal spec");
  const std::string head = trim(toks[at]);
  if (head == "uniform") {
    if (at + 1 != toks.size()) usage_error("'uniform' takes no arguments");
    return marg::MarginalModel::uniform01();
  }
  if (head == "exp") {
    if (at + 2 != toks.size()) usage_error("'exp' needs exactly one rate, as exp:rate");
    return marg::MarginalModel::exponential(parse_double(trim(toks[at + 1]), "exponential rate"));
  }
  if (head == "prhr") {
    if (at + 2 > toks.size()) usage_error("'prhr' needs an exponent, as prhr:exponent");
    double expo = parse_double(trim(toks[at + 1]), "prhr exponent");
    marg::MarginalModel base = (at + 2 == toks.size())
                                   ? marg::MarginalModel::uniform01()
                                   : parse_marginal_tokens(toks, at + 2);
    return marg::MarginalModel::prhr_power(expo, std::move(base));
  }
  usage_error("unknown marginal kind '" + head + "' (expected uniform, exp:rate or prhr:exponent)");
}

// Comma-separated list of marginal specs, one per coordinate.
std::vector<marg::MarginalModel> parse_marginal_list(const std::string& list) {
  std::vector<marg::MarginalModel> out;
  for (const auto& piece : split(list, ',')) {
    auto toks = split(piece, ':');
    out.push_back(parse_marginal_tokens(toks, 0));
  }
  return out;
}

// ---- CSV ------------------------------------------------------------------

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

bool parses_as_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    (void)std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) usage_error("cannot open data file '" + path + "'");
  Csv csv;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (!have_header) {
      bool all_numeric = true;
      for (const auto& c : cells) all_numeric = all_numeric && parses_as_double(c);
      if (all_numeric)
        usage_error("data file '" + path + "' must start with a header row of column names");
      csv.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != csv.header.size())
      usage_error("row with " + std::to_string(cells.size()) + " fields but " +
                  std::to_string(csv.header.size()) + " columns in '" + path + "'");
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      row.push_back(parse_double(cells[i], "column '" + csv.header[i] + "'"));
    csv.rows.push_back(std::move(row));
  }
  if (!have_header) usage_error("data file '" + path + "' is empty");
  return csv;
}

est::DataMatrix matrix_from_csv(const Csv& csv, const std::vector<std::string>& columns) {
  std::vector<int> idx;
  if (columns.empty()) {
    for (std::size_t i = 0; i < csv.header.size(); ++i) idx.push_back(static_cast<int>(i));
  } else {
    for (const auto& name : columns) {
      auto it = std::find(csv.header.begin(), csv.header.end(), name);
      if (it == csv.header.end())
        usage_error("column '" + name + "' not found in data file header");
      idx.push_back(static_cast<int>(it - csv.header.begin()));
    }
  }
  std::vector<double> values;
  values.reserve(csv.rows.size() * idx.size());
  for (const auto& row : csv.rows)
    for (int c : idx) values.push_back(row[static_cast<std::size_t>(c)]);
  return est::DataMatrix::from_rows(static_cast<long>(csv.rows.size()),
                                    static_cast<int>(idx.size()), std::move(values));
}

std::vector<std::string> resolved_columns(const Csv& csv,
                                          const std::vector<std::string>& columns) {
  return columns.empty() ? csv.header : columns;
}

// ---- output ---------------------------------------------------------------

void render_pretty(const ordered_json& j, const std::string& prefix,
                   std::vector<std::pair<std::string, std::string>>& lines) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      render_pretty(v, key, lines);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      render_pretty(j[i], prefix + "[" + std::to_string(i) + "]", lines);
  } else {
    lines.emplace_back(prefix, j.dump());
  }
}

void emit_record(const ordered_json& record, const std::string& out_path, bool pretty,
                 std::ostream* stream_override = nullptr) {
  std::string text;
  if (pretty) {
    std::vector<std::pair<std::string, std::string>> lines;
    render_pretty(record, "", lines);
    std::size_t width = 0;
    for (const auto& [k, v] : lines) width = std::max(width, k.size());
    std::ostringstream os;
    for (const auto& [k, v] : lines)
      os << k << std::string(width - k.size() + 2, ' ') << v << "\n";
    text = os.str();
  } else {
    text = record.dump() + "\n";
  }
  if (stream_override != nullptr) {
    *stream_override << text;
  } else if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::app);
    if (!out) usage_error("cannot open output file '" + out_path + "'");
    out << text;
  } else {
    std::cout << text;
  }
}

// Truncate an --out target once, before the first record is appended.
void reset_out(const std::string& out_path) {
  if (out_path.empty()) return;
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) usage_error("cannot open output file '" + out_path + "'");
}

ordered_json copula_json(const cop::CopulaModel& m) {
  return ordered_json{{"family", cop::family_name(m.family)},
                      {"parameter", m.parameter},
                      {"dimension", m.dimension}};
}

ordered_json integration_json(const quad::IntegrationConfig& cfg) {
  ordered_json j;
  j["method"] = cfg.method == quad::Method::TensorGauss ? "tensor" : "monte-carlo";
  if (cfg.method == quad::Method::TensorGauss) {
    j["nodes_per_axis"] = cfg.nodes_per_axis;
    j["rel_tol"] = cfg.rel_tol;
    j["max_refinements"] = cfg.max_refinements;
  } else {
    j["mc_samples"] = cfg.mc_samples;
    j["seed"] = cfg.seed;
  }
  return j;
}

ordered_json integral_json(const quad::IntegralEstimate& est_) {
  return ordered_json{{"value", est_.value},
                      {"standard_error", est_.standard_error},
                      {"refinements_used", est_.refinements_used}};
}

ordered_json fit_json(const est::EstimationResult& r) {
  return ordered_json{
      {"family", cop::family_name(r.family)},
      {"theta_hat", r.theta_hat},
      {"log_pseudo_likelihood", r.log_pseudo_likelihood},
      {"method", r.method == est::FitMethod::MPL ? "mpl" : "tau-inversion"},
      {"iterations", r.iterations},
      {"converged", r.converged}};
}

// ---- shared option bundles ------------------------------------------------

struct IntegrationFlags {
  std::string method = "tensor";
  int nodes = 0;            // 0 = library default
  double rel_tol = -1.0;    // <0 = library default
  int max_refinements = -1; // <0 = library default
  long mc_samples = 0;      // 0 = library default
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--method", method, "integration rule: tensor or mc")
        ->check(CLI::IsMember({"tensor", "mc", "monte-carlo"}));
    app->add_option("--nodes", nodes, "tensor rule: Gauss-Legendre nodes per axis");
    app->add_option("--rel-tol", rel_tol, "tensor rule: relative refinement tolerance");
    app->add_option("--max-refinements", max_refinements, "tensor rule: node-doubling cap");
    app->add_option("--mc-samples", mc_samples, "monte-carlo rule: sample count");
    app->add_option("--seed", seed, "monte-carlo rule: stream seed");
  }

  quad::IntegrationConfig build() const {
    quad::IntegrationConfig cfg;
    cfg.method = (method == "tensor") ? quad::Method::TensorGauss : quad::Method::MonteCarlo;
    if (nodes > 0) cfg.nodes_per_axis = nodes;
    if (rel_tol >= 0.0) cfg.rel_tol = rel_tol;
    if (max_refinements >= 0) cfg.max_refinements = max_refinements;
    if (mc_samples > 0) cfg.mc_samples = mc_samples;
    cfg.seed = seed;
    return cfg;
  }
};

// ---- measure --------------------------------------------------------------

struct MeasureArgs {
  std::string kind;
  std::optional<double> gamma;
  std::string copula_x;
  std::string copula_y;
  std::string marginals_x;
  std::string marginals_y;
  IntegrationFlags integration;
};

ordered_json run_measure(const MeasureArgs& a) {
  meas::MeasureRequest req;
  req.kind = meas::kind_from_name(a.kind);
  req.gamma = a.gamma;
  req.truth_copula = parse_copula_spec(a.copula_x);
  if (!a.copula_y.empty()) req.reference_copula = parse_copula_spec(a.copula_y);
  req.integration = a.integration.build();

  const marg::Scale scale = meas::kind_scale(req.kind);
  if (a.marginals_x.empty() != a.marginals_y.empty())
    usage_error("--marginals-x and --marginals-y must be given together");
  if (!a.marginals_x.empty()) {
    if (!meas::kind_uses_reference(req.kind))
      usage_error("marginal specifications are not used by entropy measures");
    req.distortion = marg::build_distortion(parse_marginal_list(a.marginals_x),
                                            parse_marginal_list(a.marginals_y), scale);
  } else {
    req.distortion = marg::DistortionProfile::identity(req.truth_copula.dimension, scale);
  }

  meas::MeasureValue v = meas::evaluate(req);

  ordered_json rec;
  rec["command"] = "measure";
  rec["kind"] = meas::kind_name(v.kind);
  if (req.gamma.has_value()) rec["gamma"] = *req.gamma;
  rec["value"] = v.value;
  rec["integral"] = integral_json(v.integral);
  rec["truth_copula"] = copula_json(req.truth_copula);
  if (req.reference_copula.has_value())
    rec["reference_copula"] = copula_json(*req.reference_copula);
  if (!a.marginals_x.empty()) {
    rec["marginals"] = ordered_json{{"truth", a.marginals_x}, {"reference", a.marginals_y}};
  } else {
    rec["marginals"] = "identity";
  }
  rec["integration"] = integration_json(req.integration);
  return rec;
}

// ---- bounds ---------------------------------------------------------------

ordered_json run_bounds(double gamma, double alpha, double beta, const std::string& target) {
  bnd::BoundRequest req;
  req.gamma = gamma;
  req.alpha = alpha;
  req.beta = beta;
  if (target == "mccri") {
    req.target = bnd::Target::MCCRI;
  } else if (target == "mscri") {
    req.target = bnd::Target::MSCRI;
  } else {
    usage_error("--target must be mccri or mscri");
  }
  bnd::BoundReport rep = bnd::build_report(req);

  ordered_json rec;
  rec["command"] = "bounds";
  rec["target"] = target;
  rec["gamma"] = gamma;
  rec["alpha"] = alpha;
  rec["beta"] = beta;
  rec["numeric"] = ordered_json{{"lower", rep.numeric_lower}, {"upper", rep.numeric_upper}};
  rec["claimed"] = ordered_json{{"lower", rep.claimed_lower}, {"upper", rep.claimed_upper}};
  rec["agreement"] = ordered_json{{"lower", rep.lower_agrees},
                                  {"upper", rep.upper_agrees},
                                  {"lower_discrepancy", rep.lower_discrepancy},
                                  {"upper_discrepancy", rep.upper_discrepancy}};
  rec["kernel_integrals"] = ordered_json{{"max_kernel", rep.kernel_max_integral},
                                         {"min_kernel", rep.kernel_min_integral}};
  return rec;
}

// ---- fit ------------------------------------------------------------------

ordered_json run_fit(const std::string& data_path, const std::string& family,
                     const std::vector<std::string>& columns, const std::string& method) {
  Csv csv = read_csv(data_path);
  est::DataMatrix data = matrix_from_csv(csv, columns);
  cop::Family fam = cop::family_from_name(family);
  est::EstimationResult r;
  if (method == "mpl") {
    r = est::fit_mpl(fam, est::pseudo_observations(data));
  } else if (method == "tau") {
    r = est::fit_tau_inversion(fam, data);
  } else {
    usage_error("--fit-method must be mpl or tau");
  }
  ordered_json rec;
  rec["command"] = "fit";
  rec["data"] = data_path;
  rec["columns"] = resolved_columns(csv, columns);
  rec["rows"] = data.rows;
  rec["fit"] = fit_json(r);
  return rec;
}

// ---- sample ---------------------------------------------------------------

void run_sample(const std::string& family, double theta, int dimension, long count,
                std::uint64_t seed, const std::string& out_path) {
  cop::CopulaModel m;
  m.family = cop::family_from_name(family);
  m.parameter = theta;
  m.dimension = dimension;
  m.validate();
  if (count <= 0) usage_error("--count must be positive");
  std::vector<double> draws = cop::sample(m, count, seed);

  std::ostringstream os;
  for (int c = 0; c < dimension; ++c) os << (c ? "," : "") << "u" << (c + 1);
  os << "\n";
  char buf[64];
  for (long r = 0; r < count; ++r) {
    for (int c = 0; c < dimension; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    draws[static_cast<std::size_t>(r) * dimension + c]);
      os << (c ? "," : "") << buf;
    }
    os << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) usage_error("cannot open output file '" + out_path + "'");
    out << os.str();
  } else {
    std::cout << os.str();
  }
}

// ---- select ---------------------------------------------------------------

ordered_json run_select(const std::string& data_path, const std::vector<std::string>& columns,
                        const std::vector<std::string>& family_names, double gamma,
                        const std::string& baseline_flag, const IntegrationFlags& integ) {
  Csv csv = read_csv(data_path);
  est::DataMatrix data = matrix_from_csv(csv, columns);
  est::DataMatrix pobs = est::pseudo_observations(data);

  struct Candidate {
    std::string name;
    cop::Family family;
    est::EstimationResult fit;
  };
  std::vector<Candidate> fitted;
  ordered_json dropped = ordered_json::array();
  for (const auto& name : family_names) {
    cop::Family fam = cop::family_from_name(name);
    try {
      Candidate c{std::string(cop::family_name(fam)), fam, est::fit_mpl(fam, pobs)};
      fitted.push_back(std::move(c));
    } catch (const std::exception& e) {
      dropped.push_back(ordered_json{{"family", cop::family_name(fam)}, {"error", e.what()}});
    }
  }
  if (fitted.size() < 2)
    usage_error("model selection needs at least two candidate families that fit");

  // Baseline: explicit flag, otherwise the highest pseudo-likelihood
  // (family-name order breaks exact ties deterministically).
  std::size_t base_idx = 0;
  std::string baseline_source;
  if (!baseline_flag.empty()) {
    cop::Family fam = cop::family_from_name(baseline_flag);
    bool found = false;
    for (std::size_t i = 0; i < fitted.size(); ++i)
      if (fitted[i].family == fam) {
        base_idx = i;
        found = true;
      }
    if (!found) usage_error("--baseline family '" + baseline_flag + "' is not among the fitted candidates");
    baseline_source = "flag";
  } else {
    for (std::size_t i = 1; i < fitted.size(); ++i) {
      const bool better = fitted[i].fit.log_pseudo_likelihood >
                          fitted[base_idx].fit.log_pseudo_likelihood;
      const bool tie = fitted[i].fit.log_pseudo_likelihood ==
                           fitted[base_idx].fit.log_pseudo_likelihood &&
                       fitted[i].name < fitted[base_idx].name;
      if (better || tie) base_idx = i;
    }
    baseline_source = "best_likelihood";
  }

  const Candidate& base = fitted[base_idx];
  cop::CopulaModel base_model{base.family, data.cols, base.fit.theta_hat};

  const quad::IntegrationConfig icfg = integ.build();
  auto reduced_mccri = [&](const cop::CopulaModel& truth, const cop::CopulaModel& ref) {
    meas::MeasureRequest req;
    req.kind = meas::Kind::MCCRI;
    req.gamma = gamma;
    req.truth_copula = truth;
    req.reference_copula = ref;
    req.distortion = marg::DistortionProfile::identity(truth.dimension, marg::Scale::Cdf);
    req.integration = icfg;
    return meas::evaluate(req).value;
  };

  struct Row {
    std::string name;
    double b2c;
    double c2b;
  };
  std::vector<Row> rows;
  for (const auto& c : fitted) {
    if (&c == &base) continue;
    cop::CopulaModel cand_model{c.family, data.cols, c.fit.theta_hat};
    rows.push_back(Row{c.name, reduced_mccri(base_model, cand_model),
                       reduced_mccri(cand_model, base_model)});
  }
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].b2c != rows[b].b2c) return rows[a].b2c < rows[b].b2c;
    return rows[a].name < rows[b].name;
  });

  ordered_json rec;
  rec["command"] = "select";
  rec["data"] = data_path;
  rec["columns"] = resolved_columns(csv, columns);
  rec["rows"] = data.rows;
  rec["gamma"] = gamma;
  ordered_json fits = ordered_json::array();
  for (const auto& c : fitted) fits.push_back(fit_json(c.fit));
  rec["fits"] = fits;
  if (!dropped.empty()) rec["dropped"] = dropped;
  rec["baseline"] = base.name;
  rec["baseline_source"] = baseline_source;
  ordered_json comps = ordered_json::array();
  for (std::size_t i : order)
    comps.push_back(ordered_json{{"family", rows[i].name},
                                 {"mccri_baseline_to_candidate", rows[i].b2c},
                                 {"mccri_candidate_to_baseline", rows[i].c2b}});
  rec["comparisons"] = comps;
  ordered_json ranking = ordered_json::array();
  for (std::size_t i : order) ranking.push_back(rows[i].name);
  rec["ranking"] = ranking;
  rec["integration"] = integration_json(icfg);
  return rec;
}

// ---- simulate -------------------------------------------------------------

void require_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) usage_error(where + " must be a JSON object");
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (allowed.find(k) == allowed.end())
      usage_error("unknown key '" + k + "' in " + where);
  }
}

cop::CopulaModel copula_from_json(const ordered_json& j, const std::string& where) {
  require_keys(j, {"family", "parameter", "dimension"}, where);
  if (!j.contains("family")) usage_error(where + " needs a 'family'");
  cop::CopulaModel m;
  m.family = cop::family_from_name(j.at("family").get<std::string>());
  m.parameter = j.value("parameter", 0.0);
  m.dimension = j.value("dimension", 2);
  m.validate();
  return m;
}

quad::IntegrationConfig integration_from_json(const ordered_json& j, const std::string& where) {
  require_keys(j, {"method", "nodes_per_axis", "rel_tol", "max_refinements", "mc_samples", "seed"},
               where);
  quad::IntegrationConfig cfg;
  const std::string method = j.value("method", std::string("tensor"));
  if (method == "tensor") {
    cfg.method = quad::Method::TensorGauss;
  } else if (method == "mc" || method == "monte-carlo") {
    cfg.method = quad::Method::MonteCarlo;
  } else {
    usage_error("unknown integration method '" + method + "' in " + where);
  }
  cfg.nodes_per_axis = j.value("nodes_per_axis", cfg.nodes_per_axis);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.max_refinements = j.value("max_refinements", cfg.max_refinements);
  cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

sim::SimulationConfig simulation_from_json(const ordered_json& j, const std::string& where) {
  require_keys(j,
               {"truth_x", "truth_y", "gamma", "sample_sizes", "replications", "master_seed",
                "integration"},
               where);
  if (!j.contains("truth_x") || !j.contains("truth_y"))
    usage_error(where + " needs 'truth_x' and 'truth_y'");
  sim::SimulationConfig cfg;
  cfg.truth_x = copula_from_json(j.at("truth_x"), where + ".truth_x");
  cfg.truth_y = copula_from_json(j.at("truth_y"), where + ".truth_y");
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("sample_sizes"))
    cfg.sample_sizes = j.at("sample_sizes").get<std::vector<long>>();
  cfg.replications = j.value("replications", cfg.replications);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("integration"))
    cfg.integration = integration_from_json(j.at("integration"), where + ".integration");
  cfg.validate();
  return cfg;
}

ordered_json simulation_record(const sim::SimulationReport& rep) {
  ordered_json rec;
  rec["command"] = "simulate";
  rec["truth_x"] = copula_json(rep.config.truth_x);
  rec["truth_y"] = copula_json(rep.config.truth_y);
  rec["gamma"] = rep.config.gamma;
  rec["replications"] = rep.config.replications;
  rec["master_seed"] = rep.config.master_seed;
  rec["integration"] = integration_json(rep.config.integration);
  rec["reference_value"] = rep.reference_value;
  ordered_json cells = ordered_json::array();
  for (const auto& c : rep.cells)
    cells.push_back(ordered_json{{"sample_size", c.sample_size},
                                 {"mean_estimate", c.mean_estimate},
                                 {"sd", c.sd},
                                 {"ab", c.ab},
                                 {"mse", c.mse},
                                 {"replications_used", c.replications_used},
                                 {"exclusions", c.exclusions}});
  rec["cells"] = cells;
  return rec;
}

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) usage_error("cannot open config file '" + path + "'");
  return ordered_json::parse(in);
}

ordered_json run_simulate(const std::string& config_path) {
  ordered_json j = load_json_file(config_path);
  sim::SimulationConfig cfg = simulation_from_json(j, "simulation config");
  return simulation_record(sim::run_study(cfg));
}

// ---- run (batch config) ---------------------------------------------------

ordered_json run_one_job(const ordered_json& job, std::size_t index) {
  const std::string where = "jobs[" + std::to_string(index) + "]";
  if (!job.is_object() || !job.contains("task"))
    usage_error(where + " must be an object with a 'task' key");
  const std::string task = job.at("task").get<std::string>();

  ordered_json rec;
  if (task == "measure") {
    require_keys(job,
                 {"task", "label", "kind", "gamma", "copula_x", "copula_y", "marginals_x",
                  "marginals_y", "integration"},
                 where);
    meas::MeasureRequest req;
    req.kind = meas::kind_from_name(job.at("kind").get<std::string>());
    if (job.contains("gamma")) req.gamma = job.at("gamma").get<double>();
    if (!job.contains("copula_x")) usage_error(where + " needs 'copula_x'");
    req.truth_copula = copula_from_json(job.at("copula_x"), where + ".copula_x");
    if (job.contains("copula_y"))
      req.reference_copula = copula_from_json(job.at("copula_y"), where + ".copula_y");
    if (job.contains("integration"))
      req.integration = integration_from_json(job.at("integration"), where + ".integration");
    const marg::Scale scale = meas::kind_scale(req.kind);
    if (job.contains("marginals_x") != job.contains("marginals_y"))
      usage_error(where + ": 'marginals_x' and 'marginals_y' must be given together");
    std::string mx, my;
    if (job.contains("marginals_x")) {
      mx = job.at("marginals_x").get<std::string>();
      my = job.at("marginals_y").get<std::string>();
      req.distortion = marg::build_distortion(parse_marginal_list(mx), parse_marginal_list(my),
                                              scale);
    } else {
      req.distortion = marg::DistortionProfile::identity(req.truth_copula.dimension, scale);
    }
    meas::MeasureValue v = meas::evaluate(req);
    rec["command"] = "measure";
    rec["kind"] = meas::kind_name(v.kind);
    if (req.gamma.has_value()) rec["gamma"] = *req.gamma;
    rec["value"] = v.value;
    rec["integral"] = integral_json(v.integral);
    rec["truth_copula"] = copula_json(req.truth_copula);
    if (req.reference_copula.has_value())
      rec["reference_copula"] = copula_json(*req.reference_copula);
    rec["marginals"] = mx.empty() ? ordered_json("identity")
                                  : ordered_json{{"truth", mx}, {"reference", my}};
    rec["integration"] = integration_json(req.integration);
  } else if (task == "bounds") {
    require_keys(job, {"task", "label", "gamma", "alpha", "beta", "target"}, where);
    rec = run_bounds(job.value("gamma", 3.0), job.value("alpha", 1.0), job.value("beta", 1.0),
                     job.value("target", std::string("mccri")));
  } else if (task == "fit") {
    require_keys(job, {"task", "label", "data", "family", "columns", "method"}, where);
    if (!job.contains("data") || !job.contains("family"))
      usage_error(where + " needs 'data' and 'family'");
    std::vector<std::string> columns;
    if (job.contains("columns")) columns = job.at("columns").get<std::vector<std::string>>();
    rec = run_fit(job.at("data").get<std::string>(), job.at("family").get<std::string>(),
                  columns, job.value("method", std::string("mpl")));
  } else if (task == "select") {
    require_keys(job, {"task", "label", "data", "columns", "families", "gamma", "baseline",
                       "integration"},
                 where);
    if (!job.contains("data")) usage_error(where + " needs 'data'");
    std::vector<std::string> columns;
    if (job.contains("columns")) columns = job.at("columns").get<std::vector<std::string>>();
    std::vector<std::string> families = {"frank", "gumbel", "joe", "product"};
    if (job.contains("families")) families = job.at("families").get<std::vector<std::string>>();
    IntegrationFlags integ;
    if (job.contains("integration")) {
      quad::IntegrationConfig cfg = integration_from_json(job.at("integration"), where);
      integ.method = cfg.method == quad::Method::TensorGauss ? "tensor" : "mc";
      integ.nodes = cfg.nodes_per_axis;
      integ.rel_tol = cfg.rel_tol;
      integ.max_refinements = cfg.max_refinements;
      integ.mc_samples = cfg.mc_samples;
      integ.seed = cfg.seed;
    }
    rec = run_select(job.at("data").get<std::string>(), columns, families,
                     job.value("gamma", 3.0), job.value("baseline", std::string()), integ);
  } else if (task == "simulate") {
    require_keys(job, {"task", "label", "truth_x", "truth_y", "gamma", "sample_sizes",
                       "replications", "master_seed", "integration"},
                 where);
    ordered_json cfg_json = job;
    cfg_json.erase("task");
    cfg_json.erase("label");
    sim::SimulationConfig cfg = simulation_from_json(cfg_json, where);
    rec = simulation_record(sim::run_study(cfg));
  } else if (task == "sample") {
    require_keys(job, {"task", "label", "family", "parameter", "dimension", "count", "seed",
                       "out"},
                 where);
    if (!job.contains("family") || !job.contains("out"))
      usage_error(where + " needs 'family' and 'out'");
    const std::string out = job.at("out").get<std::string>();
    run_sample(job.at("family").get<std::string>(), job.value("parameter", 0.0),
               job.value("dimension", 2), job.value("count", 100L),
               job.value("seed", std::uint64_t{0}), out);
    rec["command"] = "sample";
    rec["out"] = out;
    rec["rows"] = job.value("count", 100L);
  } else {
    usage_error("unknown task '" + task + "' in " + where);
  }
  if (job.contains("label")) {
    ordered_json labelled;
    labelled["label"] = job.at("label").get<std::string>();
    for (auto& [k, v] : rec.items()) labelled[k] = v;
    return labelled;
  }
  return rec;
}

int run_batch(const std::string& config_path, std::string out_path, bool pretty) {
  ordered_json cfg = load_json_file(config_path);
  require_keys(cfg, {"output", "jobs"}, "run config");
  if (!cfg.contains("jobs") || !cfg.at("jobs").is_array())
    usage_error("run config needs a 'jobs' array");
  if (out_path.empty() && cfg.contains("output"))
    out_path = cfg.at("output").get<std::string>();
  // Validate every job's schema before executing any of them, so a typo late
  // in the file cannot leave a half-written output.
  const auto& jobs = cfg.at("jobs");
  reset_out(out_path);
  std::ostringstream collected;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ordered_json rec = run_one_job(jobs[i], i);
    emit_record(rec, "", pretty, &collected);
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) usage_error("cannot open output file '" + out_path + "'");
    out << collected.str();
  } else {
    std::cout << collected.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copula-based Renyi inaccuracy toolkit"};
  app.require_subcommand(1);
  std::string out_path;
  bool pretty = false;
  app.add_option("--out", out_path, "write records to this file instead of stdout");
  app.add_flag("--pretty", pretty, "render records as aligned key/value tables");

  // measure
  auto* c_measure = app.add_subcommand("measure", "evaluate one divergence/entropy measure");
  MeasureArgs ma;
  c_measure->add_option("--kind", ma.kind,
                        "mccri, mscri, cocri, dcri, cci, sci, mccre or mscre")
      ->required();
  c_measure->add_option("--gamma", ma.gamma, "Renyi order (omit for cci/sci)");
  c_measure->add_option("--copula-x", ma.copula_x, "truth copula, family:theta:dim")->required();
  c_measure->add_option("--copula-y", ma.copula_y, "reference copula, family:theta:dim");
  c_measure->add_option("--marginals-x", ma.marginals_x,
                        "truth marginals, comma-separated (uniform | exp:rate | prhr:exponent)");
  c_measure->add_option("--marginals-y", ma.marginals_y, "reference marginals, same syntax");
  ma.integration.attach(c_measure);

  // bounds
  auto* c_bounds = app.add_subcommand("bounds", "Frechet-Hoeffding envelope for a measure");
  double b_gamma = 3.0, b_alpha = 1.0, b_beta = 1.0;
  std::string b_target = "mccri";
  c_bounds->add_option("--gamma", b_gamma, "Renyi order (> 0, != 1)");
  c_bounds->add_option("--alpha", b_alpha, "first power-distortion exponent");
  c_bounds->add_option("--beta", b_beta, "second power-distortion exponent");
  c_bounds->add_option("--target", b_target, "mccri or mscri");

  // fit
  auto* c_fit = app.add_subcommand("fit", "fit one copula family to a CSV data set");
  std::string f_data, f_family, f_method = "mpl";
  std::vector<std::string> f_columns;
  c_fit->add_option("data", f_data, "CSV file with a header row")->required();
  c_fit->add_option("--family", f_family, "copula family")->required();
  c_fit->add_option("--columns", f_columns, "column names (default: all)")->delimiter(',');
  c_fit->add_option("--fit-method", f_method, "mpl or tau");

  // sample
  auto* c_sample = app.add_subcommand("sample", "draw from a copula, CSV output");
  std::string s_family;
  double s_theta = 0.0;
  int s_dim = 2;
  long s_count = 100;
  std::uint64_t s_seed = 0;
  c_sample->add_option("--family", s_family, "copula family")->required();
  c_sample->add_option("--theta", s_theta, "family parameter");
  c_sample->add_option("--dimension", s_dim, "number of coordinates");
  c_sample->add_option("--count", s_count, "rows to draw")->required();
  c_sample->add_option("--seed", s_seed, "stream seed");

  // select
  auto* c_select = app.add_subcommand("select", "rank candidate families against a baseline");
  std::string sel_data, sel_baseline;
  std::vector<std::string> sel_columns;
  std::vector<std::string> sel_families = {"frank", "gumbel", "joe", "product"};
  double sel_gamma = 3.0;
  IntegrationFlags sel_integ;
  c_select->add_option("data", sel_data, "CSV file with a header row")->required();
  c_select->add_option("--columns", sel_columns, "column names (default: all)")->delimiter(',');
  c_select->add_option("--families", sel_families, "candidate families")->delimiter(',');
  c_select->add_option("--gamma", sel_gamma, "Renyi order for the comparisons");
  c_select->add_option("--baseline", sel_baseline,
                       "baseline family (default: highest pseudo-likelihood)");
  sel_integ.attach(c_select);

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "replicated estimation-error study");
  std::string sim_config;
  c_sim->add_option("config", sim_config, "JSON study configuration")->required();

  // run
  auto* c_run = app.add_subcommand("run", "execute a batch of tasks from a JSON config");
  std::string run_config;
  c_run->add_option("config", run_config, "JSON batch configuration")->required();

  // Let --out/--pretty appear after the subcommand name.
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(c_measure)) {
      reset_out(out_path);
      emit_record(run_measure(ma), out_path, pretty);
    } else if (app.got_subcommand(c_bounds)) {
      reset_out(out_path);
      emit_record(run_bounds(b_gamma, b_alpha, b_beta, b_target), out_path, pretty);
    } else if (app.got_subcommand(c_fit)) {
      reset_out(out_path);
      emit_record(run_fit(f_data, f_family, f_columns, f_method), out_path, pretty);
    } else if (app.got_subcommand(c_sample)) {
      run_sample(s_family, s_theta, s_dim, s_count, s_seed, out_path);
    } else if (app.got_subcommand(c_select)) {
      reset_out(out_path);
      emit_record(run_select(sel_data, sel_columns, sel_families, sel_gamma, sel_baseline,
                             sel_integ),
                  out_path, pretty);
    } else if (app.got_subcommand(c_sim)) {
      reset_out(out_path);
      emit_record(run_simulate(sim_config), out_path, pretty);
    } else if (app.got_subcommand(c_run)) {
      return run_batch(run_config, out_path, pretty);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
