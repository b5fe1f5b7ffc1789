#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef KREINLAB_BUILD_ID
#define KREINLAB_BUILD_ID "unknown"
#endif

namespace kreinlab::cli {

namespace ex = kreinlab::experiments;
using nlohmann::json;

std::string build_id() { return KREINLAB_BUILD_ID; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string format_name(Format f) { return f == Format::csv ? "csv" : "json"; }

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ex::ConfigError("format must be csv or json, got " + s);
}

double parse_k(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return 0.0;
    throw ex::ConfigError("k must be a number or \"auto\"");
  }
  return v.get<double>();
}

double parse_k(const std::string& s) {
  if (s == "auto") return 0.0;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ex::ConfigError("k must be a number or auto, got " + s);
}

json config_object(const RunConfig& cfg) {
  const auto& c = cfg.experiment;
  json j;
  j["experiment"] = c.name;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["t"] = c.t;
  j["lambda_grid"] = c.lambda_grid;
  j["n_paths"] = c.n_paths;
  j["dt"] = c.dt;
  j["eta"] = c.eta;
  j["v0"] = c.v0;
  j["x_grid"] = c.x_grid;
  j["gamma_grid"] = c.gamma_grid;
  j["x0"] = c.x0;
  j["level"] = c.level;
  if (c.k == 0.0) {
    j["k"] = "auto";
  } else {
    j["k"] = c.k;
  }
  j["floor_scale"] = c.floor_scale;
  j["limit_x"] = c.limit_x;
  j["seed"] = c.seed;
  j["z_max"] = c.z_max;
  j["threads"] = c.threads;
  j["output"] = cfg.output;
  j["format"] = format_name(cfg.format);
  return j;
}

// nlohmann prints the shortest round-trip form; floats here always get 17 digits.
void dump(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump(os, it.value(), indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        dump(os, j[i], indent, depth + 1);
      }
      os << nl << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        os << format_double(v);
      } else {
        os << "null";
      }
      return;
    }
    default:
      os << j.dump();
  }
}

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json row_object(const std::string& name, double alpha, double beta, const ex::Row& row) {
  json j;
  j["experiment"] = name;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["param"] = row.param;
  j["estimate"] = row.estimate;
  j["std_error"] = row.std_error;
  j["analytic"] = optional_number(row.analytic);
  j["z"] = optional_number(row.z);
  j["verdict"] = std::string(ex::verdict_label(row));
  return j;
}

void csv_row(std::ostream& os, const std::string& name, double alpha, double beta, const ex::Row& row,
             std::string_view verdict) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << name << ',' << format_double(alpha) << ',' << format_double(beta) << ',' << row.param << ','
     << format_double(row.estimate) << ',' << format_double(row.std_error) << ',' << opt(row.analytic) << ','
     << opt(row.z) << ',' << verdict << '\n';
}

void echo_config(std::ostream& os, const RunConfig& cfg) {
  os << "# build " << build_id() << '\n';
  const json j = config_object(cfg);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::ostringstream v;
    dump(v, it.value(), 0, 0);
    os << "# " << it.key() << '=' << v.str() << '\n';
  }
}

json metadata_object(const RunConfig& cfg) {
  json m;
  m["seed"] = cfg.experiment.seed;
  m["build_id"] = build_id();
  m["config"] = config_object(cfg);
  return m;
}

// ---------------------------------------------------------------------------

struct Flags {
  std::string config_file;
  std::string experiment;
  double alpha = 0;
  double beta = 0;
  double t = 0;
  std::vector<double> lambda_grid;
  std::uint64_t n_paths = 0;
  double dt = 0;
  double eta = 0;
  double v0 = 0;
  std::vector<double> x_grid;
  std::vector<double> gamma_grid;
  double x0 = 0;
  double level = 0;
  std::string k;
  double floor_scale = 0;
  double limit_x = 0;
  std::uint64_t seed = 0;
  double z_max = 0;
  unsigned threads = 0;
  std::string output;
  std::string format;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App& app, bool simulation) {
    auto reg = [&](const std::string& key, CLI::Option* o) { options.emplace_back(key, o); };
    app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    reg("experiment", app.add_option("--experiment,-e", experiment, "experiment name"));
    reg("alpha", app.add_option("--alpha", alpha, "stability index in [0, 1)"));
    reg("beta", app.add_option("--beta", beta, "tempering parameter"));
    reg("lambda_grid", app.add_option("--lambda", lambda_grid, "Laplace arguments")->delimiter(','));
    reg("x_grid", app.add_option("--x", x_grid, "levels / points")->delimiter(','));
    reg("gamma_grid", app.add_option("--gamma", gamma_grid, "GIG Laplace arguments")->delimiter(','));
    reg("x0", app.add_option("--x0", x0, "GIG starting point"));
    reg("output", app.add_option("--output,-o", output, "output file (default: stdout)"));
    reg("format", app.add_option("--format", format, "csv or json"));
    if (!simulation) return;
    reg("t", app.add_option("--t", t, "local-time level or increment length"));
    reg("n_paths", app.add_option("--n,--n-paths", n_paths, "number of paths or draws"));
    reg("dt", app.add_option("--dt", dt, "time step near 0"));
    reg("eta", app.add_option("--eta", eta, "relative step away from 0"));
    reg("v0", app.add_option("--v0", v0, "excursion lifetime cut"));
    reg("level", app.add_option("--level", level, "first-passage level"));
    reg("k", app.add_option("--k", k, "multiplier of h, or auto"));
    reg("floor_scale", app.add_option("--floor-scale", floor_scale, "singular floor in units of dt^0.4"));
    reg("limit_x", app.add_option("--limit-x", limit_x, "x for the beta -> 0 check"));
    reg("seed", app.add_option("--seed", seed, "master seed"));
    reg("z_max", app.add_option("--z-max", z_max, "per-estimate |z| bound"));
    reg("threads", app.add_option("--threads,-j", threads, "worker threads (0: all cores)"));
  }

  bool given(const std::string& key) const {
    for (const auto& [k2, o] : options) {
      if (k2 == key) return o->count() > 0;
    }
    return false;
  }

  void apply(RunConfig& cfg) const {
    auto& c = cfg.experiment;
    if (given("alpha")) c.alpha = alpha;
    if (given("beta")) c.beta = beta;
    if (given("t")) c.t = t;
    if (given("lambda_grid")) c.lambda_grid = lambda_grid;
    if (given("n_paths")) c.n_paths = n_paths;
    if (given("dt")) c.dt = dt;
    if (given("eta")) c.eta = eta;
    if (given("v0")) c.v0 = v0;
    if (given("x_grid")) c.x_grid = x_grid;
    if (given("gamma_grid")) c.gamma_grid = gamma_grid;
    if (given("x0")) c.x0 = x0;
    if (given("level")) c.level = level;
    if (given("k")) c.k = parse_k(k);
    if (given("floor_scale")) c.floor_scale = floor_scale;
    if (given("limit_x")) c.limit_x = limit_x;
    if (given("seed")) c.seed = seed;
    if (given("z_max")) c.z_max = z_max;
    if (given("threads")) c.threads = threads;
    if (given("output")) cfg.output = output;
    if (given("format")) cfg.format = parse_format(format);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ex::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t env_seed(std::uint64_t fallback) {
  const char* s = std::getenv(kSeedEnv);
  if (!s || !*s) return fallback;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos == std::string(s).size()) return v;
  } catch (const std::exception&) {
  }
  throw ex::ConfigError(std::string(kSeedEnv) + " is not an unsigned integer: " + s);
}

// defaults < environment seed < file < flags
RunConfig resolve(const Flags& flags, bool tables) {
  std::string name = flags.experiment;
  json file;
  if (!flags.config_file.empty()) {
    try {
      file = json::parse(read_file(flags.config_file));
    } catch (const json::exception& e) {
      throw ex::ConfigError("config file: " + std::string(e.what()));
    }
    if (!file.is_object()) throw ex::ConfigError("config file must hold a JSON object");
    if (name.empty() && file.contains("experiment")) name = file["experiment"].get<std::string>();
  }
  RunConfig cfg;
  if (name.empty()) {
    if (!tables) throw ex::ConfigError("no experiment given (use --experiment)");
    cfg.experiment = ex::default_config("exponent_tables");
    cfg.experiment.name.clear();
  } else {
    cfg.experiment = ex::default_config(name);
  }
  cfg.experiment.seed = env_seed(cfg.experiment.seed);
  if (!file.is_null()) {
    json f = file;
    f.erase("experiment");
    apply_config_json(f.dump(), cfg);
  }
  flags.apply(cfg);
  return cfg;
}

template <class Writer>
void emit(const RunConfig& cfg, std::ostream& out, Writer&& w) {
  if (cfg.output.empty()) {
    w(out);
    return;
  }
  std::ofstream f(cfg.output);
  if (!f) throw ex::ConfigError("cannot write " + cfg.output);
  w(f);
  if (!f) throw ex::ConfigError("write failed: " + cfg.output);
}

int cmd_run(const Flags& flags, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(flags, false);
  const auto r = ex::run_experiment(cfg.experiment);
  emit(cfg, out, [&](std::ostream& os) {
    if (cfg.format == Format::csv) {
      write_csv(os, r, cfg);
    } else {
      write_json(os, r, cfg);
    }
  });
  err << r.name << ": " << (r.verdict ? "pass" : "fail") << " (" << r.rows.size() << " rows, "
      << format_double(r.wall_seconds) << " s)\n";
  return r.verdict ? ok : statistical_failure;
}

int cmd_tables(const Flags& flags, std::ostream& out) {
  const auto cfg = resolve(flags, true);
  const auto rows = ex::analytic_tables(cfg.experiment);
  emit(cfg, out, [&](std::ostream& os) {
    if (cfg.format == Format::csv) {
      write_table_csv(os, rows, cfg);
    } else {
      write_table_json(os, rows, cfg);
    }
  });
  return ok;
}

int cmd_list(std::ostream& out) {
  for (const auto& e : ex::list_experiments()) out << e.name << "\t" << e.checks << '\n';
  return ok;
}

int cmd_selftest(std::ostream& out) {
  auto items = ex::run_selftest();
  {
    // config file round trip through the resolver's JSON reader
    RunConfig a;
    a.experiment = ex::default_config("excursion_max");
    a.experiment.seed = 977;
    a.experiment.x_grid = {0.25, 0.75};
    RunConfig b;
    b.experiment = ex::default_config("excursion_max");
    apply_config_json(resolved_config_json(a), b);
    const bool same = resolved_config_json(a) == resolved_config_json(b);
    items.push_back({"cli_config_round_trip", same ? 0.0 : 1.0, 0.0, same});
  }
  bool all = true;
  for (const auto& it : items) {
    out << (it.pass ? "pass " : "FAIL ") << it.name << " error=" << format_double(it.error)
        << " tolerance=" << format_double(it.tolerance) << '\n';
    all = all && it.pass;
  }
  out << (all ? "selftest passed" : "selftest FAILED") << '\n';
  return all ? ok : statistical_failure;
}

}  // namespace

void apply_config_json(const std::string& text, RunConfig& cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ex::ConfigError("config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ex::ConfigError("config must be a JSON object");
  auto& c = cfg.experiment;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "experiment") {
        if (v.get<std::string>() != c.name) throw ex::ConfigError("config names experiment " + v.get<std::string>());
      } else if (key == "alpha") {
        c.alpha = v.get<double>();
      } else if (key == "beta") {
        c.beta = v.get<double>();
      } else if (key == "t") {
        c.t = v.get<double>();
      } else if (key == "lambda_grid") {
        c.lambda_grid = v.get<std::vector<double>>();
      } else if (key == "n_paths") {
        if (!v.is_number_unsigned()) throw ex::ConfigError("n_paths must be a non-negative integer");
        c.n_paths = v.get<std::uint64_t>();
      } else if (key == "dt") {
        c.dt = v.get<double>();
      } else if (key == "eta") {
        c.eta = v.get<double>();
      } else if (key == "v0") {
        c.v0 = v.get<double>();
      } else if (key == "x_grid") {
        c.x_grid = v.get<std::vector<double>>();
      } else if (key == "gamma_grid") {
        c.gamma_grid = v.get<std::vector<double>>();
      } else if (key == "x0") {
        c.x0 = v.get<double>();
      } else if (key == "level") {
        c.level = v.get<double>();
      } else if (key == "k") {
        c.k = parse_k(v);
      } else if (key == "floor_scale") {
        c.floor_scale = v.get<double>();
      } else if (key == "limit_x") {
        c.limit_x = v.get<double>();
      } else if (key == "seed") {
        if (!v.is_number_unsigned()) throw ex::ConfigError("seed must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
      } else if (key == "z_max") {
        c.z_max = v.get<double>();
      } else if (key == "threads") {
        if (!v.is_number_unsigned()) throw ex::ConfigError("threads must be a non-negative integer");
        c.threads = v.get<unsigned>();
      } else if (key == "output") {
        cfg.output = v.get<std::string>();
      } else if (key == "format") {
        cfg.format = parse_format(v.get<std::string>());
      } else {
        throw ex::ConfigError("unknown config key: " + key);
      }
    }
  } catch (const json::exception& e) {
    throw ex::ConfigError("config: " + std::string(e.what()));
  }
}

std::string resolved_config_json(const RunConfig& cfg) {
  std::ostringstream os;
  dump(os, config_object(cfg), 0, 0);
  return os.str();
}

void write_csv(std::ostream& os, const ex::ExperimentResult& r, const RunConfig& cfg) {
  echo_config(os, cfg);
  for (const auto& [k, v] : r.metadata) os << "# " << k << '=' << format_double(v) << '\n';
  os << "# z_threshold=" << format_double(r.z_threshold) << '\n';
  os << "# verdict=" << (r.verdict ? "pass" : "fail") << '\n';
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) csv_row(os, r.name, r.config.alpha, r.config.beta, row, ex::verdict_label(row));
}

void write_json(std::ostream& os, const ex::ExperimentResult& r, const RunConfig& cfg) {
  json doc;
  auto m = metadata_object(cfg);
  m["k"] = r.metadata.count("k") ? json(r.metadata.at("k")) : json(nullptr);
  json extra = json::object();
  for (const auto& [k, v] : r.metadata) {
    if (k != "k") extra[k] = v;
  }
  m["details"] = extra;
  m["z_threshold"] = r.z_threshold;
  m["verdict"] = r.verdict ? "pass" : "fail";
  m["wall_seconds"] = r.wall_seconds;
  doc["metadata"] = m;
  doc["rows"] = json::array();
  for (const auto& row : r.rows) doc["rows"].push_back(row_object(r.name, r.config.alpha, r.config.beta, row));
  dump(os, doc, 2, 0);
  os << '\n';
}

void write_table_csv(std::ostream& os, const std::vector<ex::Row>& rows, const RunConfig& cfg) {
  echo_config(os, cfg);
  os << kCsvHeader << '\n';
  const auto name = cfg.experiment.name.empty() ? std::string("tables") : cfg.experiment.name;
  for (const auto& row : rows) csv_row(os, name, cfg.experiment.alpha, cfg.experiment.beta, row, "table");
}

void write_table_json(std::ostream& os, const std::vector<ex::Row>& rows, const RunConfig& cfg) {
  json doc;
  doc["metadata"] = metadata_object(cfg);
  doc["metadata"]["k"] = nullptr;
  doc["rows"] = json::array();
  const auto name = cfg.experiment.name.empty() ? std::string("tables") : cfg.experiment.name;
  for (const auto& row : rows) {
    auto j = row_object(name, cfg.experiment.alpha, cfg.experiment.beta, row);
    j["verdict"] = "table";
    doc["rows"].push_back(j);
  }
  dump(os, doc, 2, 0);
  os << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kreinlab: verification experiments for Brownian additive functionals and subordinators"};
  app.require_subcommand(1);
  Flags run_flags;
  Flags table_flags;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write its result rows");
  run_flags.add(*run_cmd, true);
  auto* tables_cmd = app.add_subcommand("tables", "print closed-form values on parameter grids");
  table_flags.add(*tables_cmd, false);
  auto* list_cmd = app.add_subcommand("list", "list experiments and the identity each one checks");
  auto* self_cmd = app.add_subcommand("selftest", "fast deterministic invariant suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }
  try {
    if (run_cmd->parsed()) return cmd_run(run_flags, out, err);
    if (tables_cmd->parsed()) return cmd_tables(table_flags, out);
    if (list_cmd->parsed()) return cmd_list(out);
    if (self_cmd->parsed()) return cmd_selftest(out);
  } catch (const ex::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return statistical_failure;
  }
  return usage_error;
}

}  // namespace kreinlab::cli
