#include "lsmd/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsmd/asymptotics.hpp"
#include "lsmd/dgp.hpp"
#include "lsmd/errors.hpp"
#include "lsmd/estimator.hpp"
#include "lsmd/montecarlo.hpp"
#include "lsmd/panel_io.hpp"

namespace lsmd {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string mode_name(InstrumentMode m) { return m == InstrumentMode::presample ? "presample" : "trim"; }

// ---------------------------------------------------------------------------
// Parameters of each subcommand

struct DesignParams {
  double sigma_eps2 = 1.0;
  double sigma_eta2 = 0.4;
  double sigma_lambda2 = 0.4;
  double sigma_f2 = 0.4;
  int burn_in = 100;
  bool demean_factors = false;
  double factor_mean = 0.0;

  void add(CLI::App* app) {
    app->add_option("--sigma-eps2", sigma_eps2, "innovation variance")->capture_default_str();
    app->add_option("--sigma-eta2", sigma_eta2, "measurement-error variance")->capture_default_str();
    app->add_option("--sigma-lambda2,--sig-lambda2", sigma_lambda2, "loading variance")->capture_default_str();
    app->add_option("--sigma-f2,--sig-f2", sigma_f2, "factor variance")->capture_default_str();
    app->add_option("--burn-in", burn_in, "burn-in periods")->capture_default_str();
    app->add_flag("--demean-factors", demean_factors, "demean the simulated factor path");
    app->add_option("--factor-mean", factor_mean, "mean of the factor draws")->capture_default_str();
  }
  void apply(DgpConfig& c) const {
    c.sigma_eps2 = sigma_eps2;
    c.sigma_eta2 = sigma_eta2;
    c.sigma_lambda2 = sigma_lambda2;
    c.sigma_f2 = sigma_f2;
    c.burn_in = burn_in;
    c.demean_factors = demean_factors;
    c.factor_mean = factor_mean;
  }
  json to_json() const {
    return {{"sigma_eps2", sigma_eps2}, {"sigma_eta2", sigma_eta2},   {"sigma_lambda2", sigma_lambda2},
            {"sigma_f2", sigma_f2},     {"burn_in", burn_in},         {"demean_factors", demean_factors},
            {"factor_mean", factor_mean}};
  }
};

struct SearchParams {
  int lags = 1;
  std::string weight = "identity";
  std::vector<double> bracket{-0.95, 0.95};
  double step = 0.02;
  double tol = 1e-5;
  std::string mode = "presample";
  std::string plugin = "closed";
  std::string omega = "exact";
  int starts = 5;

  void add(CLI::App* app) {
    app->add_option("--lags", lags, "number of lagged instruments L")->capture_default_str();
    app->add_option("--weight", weight, "identity | gram")
        ->check(CLI::IsMember({"identity", "gram"}))
        ->capture_default_str();
    app->add_option("--bracket", bracket, "alpha search bracket lo hi")->expected(2)->capture_default_str();
    app->add_option("--step", step, "coarse grid step")->capture_default_str();
    app->add_option("--tol", tol, "golden-section tolerance")->capture_default_str();
    app->add_option("--mode", mode, "presample | trim")
        ->check(CLI::IsMember({"presample", "trim"}))
        ->capture_default_str();
    app->add_option("--plugin", plugin, "closed | sample")
        ->check(CLI::IsMember({"closed", "sample"}))
        ->capture_default_str();
    app->add_option("--omega", omega, "exact | displayed")
        ->check(CLI::IsMember({"exact", "displayed"}))
        ->capture_default_str();
    app->add_option("--starts", starts, "random starts of the inner step at alpha_hat")->capture_default_str();
  }
  WeightSpec weight_spec() const { return weight == "gram" ? WeightSpec::inverse_gram() : WeightSpec::identity(); }
  SearchSpec search_spec() const {
    SearchSpec s;
    s.lo = bracket.at(0);
    s.hi = bracket.at(1);
    s.step = step;
    s.tol = tol;
    s.mode = mode == "trim" ? InstrumentMode::trim : InstrumentMode::presample;
    s.plugin = plugin == "sample" ? PluginMode::sample_moments : PluginMode::closed_form;
    s.omega_form = omega == "displayed" ? OmegaForm::displayed : OmegaForm::exact;
    if (starts < 0) throw ValidationError("--starts must be >= 0");
    s.inner.random_starts = starts;
    return s;
  }
  json to_json() const {
    return {{"lags", lags},   {"weight", weight}, {"bracket", bracket}, {"step", step}, {"tol", tol},
            {"mode", mode},   {"plugin", plugin}, {"omega", omega},     {"starts", starts}};
  }
};

json report_json(const AsymptoticReport& r) {
  return {{"G", to_json(r.g)},
          {"W", to_json(r.w)},
          {"Omega", to_json(r.omega)},
          {"b", to_json(r.b)},
          {"avar", r.avar},
          {"bias_scaled", r.bias_scaled},
          {"se_alpha", r.se_alpha},
          {"alpha_shift", r.alpha_shift},
          {"alpha_bc", r.alpha_bc}};
}

json fit_json(const LsmdFit& fit, bool bias_correct, bool with_curve) {
  json j;
  j["alpha_hat"] = fit.alpha_hat;
  j["alpha_bc"] = opt_json(fit.alpha_bc);
  j["alpha"] = bias_correct && fit.alpha_bc ? *fit.alpha_bc : fit.alpha_hat;
  j["se"] = opt_json(fit.se);
  j["sigma_eps2_hat"] = opt_json(fit.sigma_eps2_hat);
  j["sigma_eta2_hat"] = opt_json(fit.sigma_eta2_hat);
  j["gamma"] = to_json(fit.inner.gamma);
  if (fit.inner.beta.size() > 0) {
    j["beta"] = to_json(fit.inner.beta);
    j["beta_se"] = to_json(fit.beta_se);
  }
  j["n"] = fit.n;
  j["t_eff"] = fit.t_eff;
  j["lags"] = fit.lags;
  j["instrument_mode"] = mode_name(fit.mode);
  j["weight"] = {{"kind", to_string(fit.weight.kind)}, {"matrix", to_json(fit.weight_matrix)}};
  j["profile_evaluations"] = fit.profile_evaluations;
  j["inner"] = {{"ssr", fit.inner.ssr},
                {"converged", fit.inner.converged},
                {"iterations", fit.inner.iterations},
                {"n_starts", fit.inner.n_starts},
                {"n_starts_agreeing", fit.inner.n_starts_agreeing}};
  j["flags"] = {{"boundary_minimum", fit.boundary_minimum}, {"inner_nonconverged", fit.inner_nonconverged},
                {"eta_clamped", fit.eta_clamped},           {"eps_clamped", fit.eps_clamped},
                {"near_zero_alpha", fit.near_zero_alpha},   {"weak_identification", fit.weak_identification}};
  j["warnings"] = fit.warnings;
  j["report"] = fit.report ? report_json(*fit.report) : json(nullptr);
  if (with_curve) {
    json curve = json::array();
    for (const ProfilePoint& p : fit.profile_curve) curve.push_back({p.alpha, p.value});
    j["profile_curve"] = curve;
  }
  return j;
}

json stats_json(const CellStats& s) {
  return {{"bias", s.bias}, {"sd", opt_json(s.sd)}, {"rmse", s.rmse}, {"n_used", s.n_used}};
}

json table_json(const McTable& t) {
  json cells = json::array();
  for (const McCell& c : t.cells) {
    json j = {{"alpha0", c.alpha0},
              {"n", c.n},
              {"t", c.t},
              {"reps", c.reps},
              {"n_converged", c.n_converged},
              {"n_failed", c.n_failed},
              {"unreliable", c.unreliable},
              {"mean_runtime", c.mean_runtime},
              {"alpha_hat", stats_json(c.plain)},
              {"coverage95", opt_json(c.coverage)}};
    if (c.corrected) j["alpha_bc"] = stats_json(*c.corrected);
    if (c.mean_truth_shift) j["mean_truth_shift"] = *c.mean_truth_shift;
    cells.push_back(j);
  }
  return {{"cells", cells}, {"reps_used", t.reps_used}, {"workers", t.workers}};
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      const int n = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return {n, n};
    }
    const std::string a = s.substr(0, x);
    const std::string b = s.substr(x + 1);
    const int n = std::stoi(a, &used);
    if (used != a.size()) throw std::invalid_argument(s);
    const int t = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument(s);
    return {n, t};
  } catch (const std::logic_error&) {
    throw ValidationError("bad panel size '" + s + "', expected NxT");
  }
}

// ---------------------------------------------------------------------------
// Configuration files

const std::set<std::string> kPathKeys{"input", "out", "csv", "json", "manifest", "factor-file"};

std::string json_scalar(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
    return v[0].dump() + "x" + v[1].dump();  // panel size
  }
  throw ValidationError("config key '" + key + "' has an unsupported value");
}

// Expands a config file into extra arguments for keys not given on the
// command line.
std::vector<std::string> config_arguments(CLI::App* sub, const std::string& path,
                                          const std::vector<std::string>& user_args) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ValidationError("config file must hold a JSON object");

  std::set<const CLI::Option*> given;
  for (const std::string& a : user_args) {
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = a.substr(0, a.find('='));
    if (const CLI::Option* o = sub->get_option_no_throw(name)) given.insert(o);
  }

  const fs::path base = fs::absolute(path).parent_path();
  std::vector<std::string> args;
  for (const auto& [raw_key, value] : cfg.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = key == "config" || key == "help" ? nullptr : sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ValidationError("unknown config key '" + raw_key + "'");
    if (given.count(opt) != 0) continue;
    if (value.is_boolean()) {
      args.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
      continue;
    }
    args.push_back("--" + key);
    std::vector<std::string> items;
    if (value.is_array() && !(value.size() == 2 && value[0].is_number_integer() && key == "sizes")) {
      for (const json& v : value) items.push_back(json_scalar(v, raw_key));
    } else {
      items.push_back(json_scalar(value, raw_key));
    }
    for (std::string& s : items) {
      if (kPathKeys.count(key) != 0 && s != "-" && fs::path(s).is_relative()) s = (base / s).string();
      args.push_back(s);
    }
  }
  return args;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& out) {
  if (path.empty() || path == "-") return out;
  file.open(path);
  if (!file) throw ValidationError("cannot write " + path);
  return file;
}

Vector read_factor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open factor file " + path);
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::logic_error&) {
        if (values.empty() && lineno == 1) continue;  // header
        throw ParseError("bad factor value '" + cell + "'", lineno);
      }
    }
  }
  if (values.empty()) throw ValidationError("factor file " + path + " is empty");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Estimation of dynamic panels with an interactive fixed effect and measurement error", "lsmd"};
  app.require_subcommand(1);
  std::string config_path;

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a panel and write it as CSV");
  double sim_alpha0 = 0.5;
  int sim_n = 20;
  int sim_t = 20;
  std::uint64_t sim_seed = 1;
  int sim_max_lag = 2;
  bool sim_latent = false;
  std::string sim_out = "-";
  DesignParams sim_design;
  sim->add_option("--alpha0", sim_alpha0, "autoregressive parameter")->capture_default_str();
  sim->add_option("--n", sim_n, "number of units")->capture_default_str();
  sim->add_option("--t", sim_t, "number of periods")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--max-lag", sim_max_lag, "retained pre-sample periods")->capture_default_str();
  sim->add_flag("--latent", sim_latent, "include the latent series as y_latent");
  sim->add_option("--out", sim_out, "output CSV (- for stdout)")->capture_default_str();
  sim_design.add(sim);

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate alpha from a panel CSV; JSON report on stdout");
  std::string est_input;
  bool est_bc = false;
  bool est_cov = false;
  bool est_curve = false;
  std::uint64_t est_seed = 0;
  SearchParams est_search;
  est->add_option("input,--input", est_input, "panel CSV")->required();
  est->add_flag("--bias-correct", est_bc, "report the bias-corrected estimate as alpha");
  est->add_flag("--covariates", est_cov, "include the x columns as exogenous regressors");
  est->add_flag("--profile", est_curve, "include the profile objective curve");
  est->add_option("--seed", est_seed, "seed for random inner starts")->capture_default_str();
  est_search.add(est);

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo experiment; bias/sd/rmse CSV and JSON");
  std::vector<double> mc_alpha{0.2, 0.5, 0.8};
  std::vector<std::string> mc_sizes{"20x20", "50x50", "100x100"};
  int mc_reps = 500;
  std::uint64_t mc_seed = 1;
  bool mc_bc = false;
  bool mc_truth = false;
  int mc_workers = 0;
  std::string mc_csv = "-";
  std::string mc_json;
  std::string mc_manifest;
  DesignParams mc_design;
  SearchParams mc_search;
  mc->add_option("--alpha0", mc_alpha, "true alpha values")->capture_default_str();
  mc->add_option("--sizes", mc_sizes, "panel sizes NxT")->capture_default_str();
  mc->add_option("--reps", mc_reps, "replications per cell")->capture_default_str();
  mc->add_option("--seed", mc_seed, "base seed; rep r uses seed + r")->capture_default_str();
  mc->add_flag("--bias-correct", mc_bc, "also tabulate the bias-corrected estimator");
  mc->add_flag("--truth-shift", mc_truth, "tabulate the predicted bias at the true parameters");
  mc->add_option("--workers", mc_workers, "worker threads (0: LSMD_THREADS or all cores)")->capture_default_str();
  mc->add_option("--csv", mc_csv, "bias/sd/rmse CSV output (- for stdout)")->capture_default_str();
  mc->add_option("--json", mc_json, "JSON output (- for stdout)");
  mc->add_option("--manifest", mc_manifest, "per-rep seed manifest CSV");
  mc_design.add(mc);
  mc_search.add(mc);

  // relevance
  auto* rel = app.add_subcommand("relevance", "closed-form instrument relevance check");
  double rel_alpha = 0.5;
  DesignParams rel_design;
  rel->add_option("--alpha", rel_alpha, "autoregressive parameter")->capture_default_str();
  rel->add_option("--sigma-eps2", rel_design.sigma_eps2)->capture_default_str();
  rel->add_option("--sigma-eta2", rel_design.sigma_eta2)->capture_default_str();
  rel->add_option("--sigma-lambda2,--sig-lambda2", rel_design.sigma_lambda2)->capture_default_str();
  rel->add_option("--sigma-f2,--sig-f2", rel_design.sigma_f2)->capture_default_str();

  // asymptotics
  auto* asy = app.add_subcommand("asymptotics", "closed-form limit quantities as JSON");
  double asy_alpha = 0.5;
  double asy_eps = 1.0;
  double asy_eta = 0.4;
  int asy_lags = 1;
  long asy_n = 100;
  long asy_t = 100;
  std::string asy_omega = "exact";
  std::string asy_factor;
  asy->add_option("--alpha", asy_alpha)->capture_default_str();
  asy->add_option("--sigma-eps2", asy_eps)->capture_default_str();
  asy->add_option("--sigma-eta2", asy_eta)->capture_default_str();
  asy->add_option("--lags", asy_lags)->capture_default_str();
  asy->add_option("--n", asy_n)->capture_default_str();
  asy->add_option("--t", asy_t)->capture_default_str();
  asy->add_option("--omega", asy_omega)->check(CLI::IsMember({"exact", "displayed"}))->capture_default_str();
  asy->add_option("--factor-file", asy_factor, "factor path (one value per line) for the bias vector b");

  for (CLI::App* sub : {sim, est, mc, rel, asy}) {
    sub->add_option("--config", config_path, "JSON file with option values");
  }

  try {
    std::vector<std::string> args(argv, argv + argc);
    // Merge a config file for the chosen subcommand.
    if (args.size() > 1) {
      CLI::App* sub = app.get_subcommand_no_throw(args[1]);
      std::string cfg;
      for (std::size_t k = 2; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) cfg = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) cfg = args[k].substr(9);
      }
      if (sub != nullptr && !cfg.empty()) {
        const std::vector<std::string> user(args.begin() + 2, args.end());
        const std::vector<std::string> extra = config_arguments(sub, cfg, user);
        args.insert(args.end(), extra.begin(), extra.end());
      }
    }
    std::vector<const char*> cargs;
    for (const std::string& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n\n";
      const CLI::App* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
      err << failed->help();
      return kExitValidation;
    }

    if (sim->parsed()) {
      DgpConfig c = table1_config(sim_alpha0, sim_n, sim_t, sim_seed);
      sim_design.apply(c);
      c.max_lag = sim_max_lag;
      PanelData panel = generate_panel(c);
      if (!sim_latent) panel.truth.reset();
      std::ofstream file;
      write_panel(panel, open_output(sim_out, file, out));
      return kExitOk;
    }

    if (est->parsed()) {
      PanelData panel = read_panel(est_input);
      SearchSpec search = est_search.search_spec();
      search.inner.seed = est_seed;
      LsmdFit fit;
      if (est_cov) {
        if (panel.covariates.empty()) throw ValidationError("--covariates given but the panel has no x columns");
        fit = lsmd_estimate_with_covariates(panel, panel.covariates, est_search.lags, est_search.weight_spec(), search);
      } else {
        fit = lsmd_estimate(panel, est_search.lags, est_search.weight_spec(), search);
      }
      json j = fit_json(fit, est_bc, est_curve);
      json cfg = est_search.to_json();
      cfg["input"] = est_input;
      cfg["bias_correct"] = est_bc;
      cfg["covariates"] = est_cov;
      cfg["seed"] = est_seed;
      j["config"] = cfg;
      j["panel"] = {{"n", panel.n()}, {"t", panel.t()}, {"pre_periods", panel.pre_periods()},
                    {"covariates", panel.covariate_names}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (mc->parsed()) {
      McConfig c;
      c.alpha_grid = mc_alpha;
      c.sizes.clear();
      for (const std::string& s : mc_sizes) c.sizes.push_back(parse_size(s));
      c.reps = mc_reps;
      c.base_seed = mc_seed;
      c.lags = mc_search.lags;
      c.weight = mc_search.weight_spec();
      c.bias_correct = mc_bc;
      c.truth_shift = mc_truth;
      c.search = mc_search.search_spec();
      c.search.search_random_starts = 0;
      mc_design.apply(c.design);
      c.design.max_lag = c.lags + 1;
      c.parallel_workers = mc_workers;
      if (c.parallel_workers == 0) {
        if (const char* env = std::getenv("LSMD_THREADS")) {
          const int hint = std::atoi(env);
          if (hint > 0) c.parallel_workers = hint;
        }
      }
      const McTable table = run_mc(c);
      {
        std::ofstream file;
        std::ostream& csv = open_output(mc_csv, file, out);
        write_table_csv(table, csv);
        if (mc_bc) {
          csv << "# bias-corrected\n";
          write_table_csv(table, csv, true);
        }
      }
      if (!mc_manifest.empty()) {
        std::ofstream file;
        write_seed_manifest(table, open_output(mc_manifest, file, out));
      }
      if (!mc_json.empty()) {
        json j = table_json(table);
        json cfg = mc_search.to_json();
        for (const auto& [k, v] : mc_design.to_json().items()) cfg[k] = v;
        cfg["alpha0"] = mc_alpha;
        cfg["sizes"] = mc_sizes;
        cfg["reps"] = mc_reps;
        cfg["seed"] = mc_seed;
        cfg["bias_correct"] = mc_bc;
        cfg["truth_shift"] = mc_truth;
        cfg["workers"] = table.workers;
        j["config"] = cfg;
        j["seed_manifest"] = table.seed_manifest;
        std::ofstream file;
        open_output(mc_json, file, out) << j.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (rel->parsed()) {
      const RelevanceReport r = relevance_bound(rel_alpha, rel_design.sigma_eps2, rel_design.sigma_eta2,
                                                rel_design.sigma_lambda2, rel_design.sigma_f2);
      json j = {{"alpha", rel_alpha},
                {"alpha_squared", rel_alpha * rel_alpha},
                {"bound", r.bound},
                {"satisfied", r.satisfied},
                {"no_factor", r.no_factor}};
      if (!r.no_factor) {
        const MomentLimits m = appendix_moment_limits(rel_alpha, rel_design.sigma_eps2, rel_design.sigma_eta2,
                                                      rel_design.sigma_lambda2, rel_design.sigma_f2);
        j["moment_limits"] = {{"m_yz", m.m_yz}, {"m_zz", m.m_zz}, {"m_factor", m.m_factor}, {"margin", m.margin}};
      }
      j["config"] = {{"alpha", rel_alpha},
                     {"sigma_eps2", rel_design.sigma_eps2},
                     {"sigma_eta2", rel_design.sigma_eta2},
                     {"sigma_lambda2", rel_design.sigma_lambda2},
                     {"sigma_f2", rel_design.sigma_f2}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (asy->parsed()) {
      if (asy_n < 1 || asy_t < 1) throw ValidationError("--n and --t must be positive");
      AsymptoticInputs in;
      in.alpha = asy_alpha;
      in.sigma_eps2 = asy_eps;
      in.sigma_eta2 = asy_eta;
      in.lags = asy_lags;
      in.kappa = std::sqrt(static_cast<double>(asy_n) / static_cast<double>(asy_t));
      Vector b;
      if (!asy_factor.empty()) {
        BiasInputs bi;
        bi.alpha = asy_alpha;
        bi.sigma_eps2 = asy_eps;
        bi.sigma_eta2 = asy_eta;
        bi.lags = asy_lags;
        bi.f = read_factor_file(asy_factor);
        b = bias_b(bi);
      }
      const OmegaForm form = asy_omega == "displayed" ? OmegaForm::displayed : OmegaForm::exact;
      json j = report_json(asymptotic_report(in, asy_n, asy_t, b, form));
      j["config"] = {{"alpha", asy_alpha}, {"sigma_eps2", asy_eps}, {"sigma_eta2", asy_eta},
                     {"lags", asy_lags},   {"n", asy_n},            {"t", asy_t},
                     {"omega", asy_omega}, {"factor_file", asy_factor}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.error_class() == ErrorClass::validation ? kExitValidation : kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace lsmd
