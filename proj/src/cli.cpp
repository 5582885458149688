#include "regcomplex/cli.hpp"
#include "regcomplex/diagnostics.hpp"
#include "regcomplex/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace regcomplex::cli {

namespace {

using nlohmann::json;

const std::vector<std::pair<std::string, std::string>>& key_help() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"experiment", "tikhonov | lasso | tv-deblur | check-source | check-subreg | check-fidelity"},
      {"seed", "64-bit seed for instances and noise (default 0)"},
      {"alpha-rule", "half-delta | power:c:p (default half-delta; lasso power:1:1)"},
      {"n-rule", "iterated-log | power:c:q | fixed:N (default iterated-log; lasso power:1:1.5)"},
      {"delta-grid", "comma-separated, strictly descending corruption levels"},
      {"size", "tv-deblur disk phantom size WxH, or N for NxN (default 64x64)"},
      {"dims", "tikhonov instance size MxN (default 10x10)"},
      {"image", "tv-deblur ground truth as a PGM file instead of the disk"},
      {"curve", "tv-deblur curve, repeatable: n-delta | fixed:N (default n-delta, fixed:100, fixed:1000)"},
      {"fixed-n", "single-curve shorthand for --curve fixed:N"},
      {"schedule", "single-curve shorthand for --n-rule with the n-delta curve"},
      {"out", "CSV output path (sweeps)"},
      {"report", "JSON report path (default: <out>.json)"},
      {"cap-seconds", "tv-deblur solver-time cap; the grid is truncated to fit"},
      {"max-total-iterations", "tv-deblur iteration cap; the grid is truncated to fit"},
      {"noise-streams", "common | per-row (default common)"},
      {"matrix", "check-*: forward matrix, rows split by ';', entries by ','"},
      {"xhat", "check-*: ground truth, comma-separated"},
      {"radius", "check-subreg: sampling radius (default 0.1)"},
      {"samples", "check-subreg / check-fidelity sample count (default 1000 / 10000)"},
      {"gamma", "check-subreg: tested gamma (default 0.99 of the admissible supremum)"},
      {"alpha", "check-subreg: alpha_delta (default 1/2 - gamma)"},
      {"c", "check-fidelity: constant C (default 3)"},
      {"p", "check-fidelity: exponent p (default 2)"},
      {"q", "check-fidelity: exponent q (default 2)"},
      {"c-prime", "check-fidelity: constant C' (default 0.5)"},
      {"dim", "check-fidelity: dimension (default 3)"},
      {"paper-grid", "true: use {1, 0.5} x 10^-p for p = 0..8"},
  };
  return keys;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("invalid value '" + value + "' for " + key + ": " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad_value(key, text, "expected a real number");
  if (!std::isfinite(v)) bad_value(key, text, "expected a finite number");
  return v;
}

double parse_positive(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (!(v > 0.0)) bad_value(key, text, "must be positive");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text, std::int64_t min) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad_value(key, text, "expected an integer");
  if (v < min) bad_value(key, text, "must be at least " + std::to_string(min));
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad_value("seed", text, "expected an unsigned integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad_value(key, text, "expected true or false");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const std::string& part : split(text, ',')) grid.push_back(parse_double("delta-grid", part));
  if (grid.empty()) bad_value("delta-grid", text, "the grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) bad_value("delta-grid", text, "levels must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1])) bad_value("delta-grid", text, "levels must be strictly descending");
  }
  return grid;
}

std::pair<Index, Index> parse_size(const std::string& key, const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const Index n = parse_int(key, text, 1);
    return {n, n};
  }
  return {parse_int(key, text.substr(0, x), 1), parse_int(key, text.substr(x + 1), 1)};
}

Vector parse_vector(const std::string& key, const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  Vector v(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Index>(i)] = parse_double(key, parts[i]);
  if (v.size() == 0) bad_value(key, text, "empty vector");
  return v;
}

Matrix parse_matrix(const std::string& text) {
  const std::vector<std::string> rows = split(text, ';');
  std::vector<Vector> parsed;
  for (const std::string& row : rows) parsed.push_back(parse_vector("matrix", row));
  if (parsed.empty()) bad_value("matrix", text, "empty matrix");
  Matrix m(static_cast<Index>(parsed.size()), parsed[0].size());
  for (std::size_t r = 0; r < parsed.size(); ++r) {
    if (parsed[r].size() != m.cols()) bad_value("matrix", text, "rows differ in length");
    m.row(static_cast<Index>(r)) = parsed[r].transpose();
  }
  return m;
}

// Shortest round-trip text, for settings a human may edit.
std::string short_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + short_double(values[i]);
  return out;
}

std::string join_vector(const Vector& v) {
  return join_doubles(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string matrix_text(const Matrix& m) {
  std::string out;
  for (Index r = 0; r < m.rows(); ++r) out += (r ? ";" : "") + join_vector(m.row(r).transpose());
  return out;
}

void check_known(const ConfigMap& map) {
  std::vector<std::string> unknown;
  const auto& keys = known_keys();
  for (const auto& [key, value] : map)
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = "unknown configuration keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

std::optional<std::string> lookup(const ConfigMap& map, const std::string& key) {
  const auto it = map.find(key);
  if (it == map.end()) return std::nullopt;
  return it->second;
}

std::int64_t fixed_curve_n(const std::string& curve) {
  if (curve.rfind("fixed:", 0) != 0) throw ConfigError("unknown curve '" + curve + "' (use n-delta or fixed:N)");
  return parse_int("curve", curve.substr(6), 1);
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Tikhonov: return "tikhonov";
    case Experiment::Lasso: return "lasso";
    case Experiment::TvDeblur: return "tv-deblur";
    case Experiment::CheckSource: return "check-source";
    case Experiment::CheckSubreg: return "check-subreg";
    case Experiment::CheckFidelity: return "check-fidelity";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::Tikhonov, Experiment::Lasso, Experiment::TvDeblur, Experiment::CheckSource,
                       Experiment::CheckSubreg, Experiment::CheckFidelity})
    if (to_string(e) == name) return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& kv : key_help()) out.push_back(kv.first);
    return out;
  }();
  return keys;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  ConfigMap map;
  if (trim(text).rfind('{', 0) == 0) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("malformed JSON config " + path + ": " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError(path + " has no \"config\" object");
    for (const auto& [key, value] : j["config"].items()) {
      if (!value.is_string()) throw ConfigError("config value for " + key + " in " + path + " is not a string");
      map[key] = value.get<std::string>();
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    int number = 0;
    while (std::getline(lines, line)) {
      ++number;
      const std::string body = trim(line.substr(0, line.find('#')));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(number) + ": expected key=value, got '" + body + "'");
      }
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "curve" && map.count(key)) {
        map[key] += "," + value;
      } else {
        map[key] = value;
      }
    }
  }
  check_known(map);
  return map;
}

RunConfig config_from_map(const ConfigMap& map) {
  check_known(map);
  RunConfig cfg;
  const auto experiment = lookup(map, "experiment");
  if (!experiment) throw ConfigError("missing required key 'experiment'");
  cfg.experiment = parse_experiment(*experiment);
  const Experiment ex = cfg.experiment;
  const bool is_sweep = ex == Experiment::Tikhonov || ex == Experiment::Lasso || ex == Experiment::TvDeblur;

  ConfigMap& s = cfg.settings;
  s["experiment"] = to_string(ex);
  if (auto v = lookup(map, "seed")) cfg.seed = parse_seed(*v);
  s["seed"] = std::to_string(cfg.seed);
  if (auto v = lookup(map, "noise-streams")) {
    if (*v == "common") cfg.streams = NoiseStreams::Common;
    else if (*v == "per-row") cfg.streams = NoiseStreams::PerRow;
    else bad_value("noise-streams", *v, "expected common or per-row");
  }

  // Output paths.
  if (auto v = lookup(map, "out")) cfg.out = *v;
  if (auto v = lookup(map, "report")) cfg.report = *v;
  if (is_sweep && cfg.out.empty()) throw ConfigError("missing required key 'out' for " + to_string(ex));
  if (cfg.report.empty()) {
    if (cfg.out.empty()) throw ConfigError("missing required key 'report' for " + to_string(ex));
    cfg.report = cfg.out + ".json";
  }
  if (!cfg.out.empty()) s["out"] = cfg.out;
  s["report"] = cfg.report;

  if (is_sweep) {
    s["noise-streams"] = cfg.streams == NoiseStreams::Common ? "common" : "per-row";

    // Curves and single-curve shorthands.
    const auto fixed_n = lookup(map, "fixed-n");
    const auto schedule_text = lookup(map, "schedule");
    const auto curve_text = lookup(map, "curve");
    if (fixed_n && schedule_text) {
      throw ConfigError("conflicting fixed-n and schedule for a single curve; declare curves with repeated --curve");
    }
    if ((fixed_n || schedule_text) && curve_text) {
      throw ConfigError("fixed-n / schedule cannot be combined with curve; use repeated --curve only");
    }

    std::string alpha_text = ex == Experiment::Lasso ? "power:1:1" : "half-delta";
    std::string n_text = ex == Experiment::Lasso ? "power:1:1.5" : "iterated-log";
    if (auto v = lookup(map, "alpha-rule")) alpha_text = *v;
    if (auto v = lookup(map, "n-rule")) n_text = *v;
    if (schedule_text) {
      if (lookup(map, "n-rule") && *lookup(map, "n-rule") != *schedule_text) {
        throw ConfigError("conflicting schedule and n-rule");
      }
      n_text = *schedule_text;
    }
    try {
      cfg.schedule.alpha_rule = parse_alpha_rule(alpha_text);
      cfg.schedule.n_rule = parse_n_rule(n_text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    s["alpha-rule"] = describe(cfg.schedule.alpha_rule);
    if (ex != Experiment::Tikhonov) s["n-rule"] = describe(cfg.schedule.n_rule);

    // Grid.
    const auto grid_text = lookup(map, "delta-grid");
    const bool paper = lookup(map, "paper-grid") && parse_bool("paper-grid", *lookup(map, "paper-grid"));
    if (grid_text && paper) throw ConfigError("give either delta-grid or paper-grid, not both");
    if (grid_text) {
      cfg.delta_grid = parse_grid(*grid_text);
    } else if (paper) {
      cfg.delta_grid = paper_delta_grid(8);
    } else if (ex == Experiment::Tikhonov) {
      cfg.delta_grid = {1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 1e-4};
    } else if (ex == Experiment::Lasso) {
      cfg.delta_grid = {1e-1, 1e-2, 1e-3, 1e-4};
    } else {
      cfg.delta_grid = paper_delta_grid(5);
    }
    if (ex == Experiment::TvDeblur && cfg.delta_grid.size() < 1) throw ConfigError("delta grid is empty");
    s["delta-grid"] = join_doubles(cfg.delta_grid);
  }

  switch (ex) {
    case Experiment::Tikhonov:
      if (auto v = lookup(map, "dims")) std::tie(cfg.rows, cfg.cols) = parse_size("dims", *v);
      s["dims"] = std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols);
      break;
    case Experiment::Lasso:
      break;
    case Experiment::TvDeblur: {
      if (auto v = lookup(map, "image")) {
        cfg.image = *v;
        s["image"] = *v;
      } else {
        if (auto v = lookup(map, "size")) std::tie(cfg.width, cfg.height) = parse_size("size", *v);
        s["size"] = std::to_string(cfg.width) + "x" + std::to_string(cfg.height);
      }
      if (auto v = lookup(map, "curve")) {
        cfg.curves = split(*v, ',');
      } else if (auto f = lookup(map, "fixed-n")) {
        cfg.curves = {"fixed:" + std::to_string(parse_int("fixed-n", *f, 1))};
      } else if (lookup(map, "schedule")) {
        cfg.curves = {"n-delta"};
      } else {
        cfg.curves = {"n-delta", "fixed:100", "fixed:1000"};
      }
      std::set<std::string> seen;
      std::string canonical;
      for (std::string& c : cfg.curves) {
        if (c != "n-delta") c = "fixed:" + std::to_string(fixed_curve_n(c));
        if (!seen.insert(c).second) throw ConfigError("curve '" + c + "' given twice");
        canonical += (canonical.empty() ? "" : ",") + c;
      }
      if (cfg.curves.empty()) throw ConfigError("no curves requested");
      s["curve"] = canonical;
      if (auto v = lookup(map, "cap-seconds")) {
        cfg.cap_seconds = parse_positive("cap-seconds", *v);
        s["cap-seconds"] = short_double(*cfg.cap_seconds);
      }
      if (auto v = lookup(map, "max-total-iterations")) {
        cfg.max_total_iterations = parse_int("max-total-iterations", *v, 1);
        s["max-total-iterations"] = std::to_string(*cfg.max_total_iterations);
      }
      break;
    }
    case Experiment::CheckSource:
    case Experiment::CheckSubreg: {
      const bool source = ex == Experiment::CheckSource;
      cfg.matrix = parse_matrix(lookup(map, "matrix").value_or(source ? "1,1" : "1,0"));
      cfg.xhat = parse_vector("xhat", lookup(map, "xhat").value_or("1,0"));
      if (cfg.xhat.size() != cfg.matrix.cols()) {
        throw ConfigError("xhat has " + std::to_string(cfg.xhat.size()) + " entries but the matrix has " +
                          std::to_string(cfg.matrix.cols()) + " columns");
      }
      s["matrix"] = matrix_text(cfg.matrix);
      s["xhat"] = join_vector(cfg.xhat);
      if (!source) {
        if (auto v = lookup(map, "radius")) cfg.radius = parse_positive("radius", *v);
        if (auto v = lookup(map, "samples")) cfg.samples = static_cast<int>(parse_int("samples", *v, 1));
        if (auto v = lookup(map, "gamma")) cfg.gamma = parse_positive("gamma", *v);
        if (auto v = lookup(map, "alpha")) cfg.alpha = parse_positive("alpha", *v);
        s["radius"] = short_double(cfg.radius);
        s["samples"] = std::to_string(cfg.samples);
        if (cfg.gamma) s["gamma"] = short_double(*cfg.gamma);
        if (cfg.alpha) s["alpha"] = short_double(*cfg.alpha);
      }
      break;
    }
    case Experiment::CheckFidelity:
      cfg.samples = 10000;
      if (auto v = lookup(map, "samples")) cfg.samples = static_cast<int>(parse_int("samples", *v, 1));
      if (auto v = lookup(map, "c")) cfg.c = parse_positive("c", *v);
      if (auto v = lookup(map, "p")) cfg.p = parse_positive("p", *v);
      if (auto v = lookup(map, "q")) cfg.q = parse_positive("q", *v);
      if (auto v = lookup(map, "c-prime")) cfg.c_prime = parse_positive("c-prime", *v);
      if (auto v = lookup(map, "dim")) cfg.dim = parse_int("dim", *v, 1);
      s["samples"] = std::to_string(cfg.samples);
      s["c"] = short_double(cfg.c);
      s["p"] = short_double(cfg.p);
      s["q"] = short_double(cfg.q);
      s["c-prime"] = short_double(cfg.c_prime);
      s["dim"] = std::to_string(cfg.dim);
      break;
  }
  return cfg;
}

ParsedArgs parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Regularisation experiments and theory checks.\n"
               "Flags override values read with --config (key=value lines or a JSON sidecar)."};
  app.set_help_flag("-h,--help", "Show this help and exit");
  std::string positional;
  app.add_option("experiment_name", positional, "Same as --experiment");
  std::string config_path;
  app.add_option("--config", config_path, "Read settings from a key=value file or JSON sidecar");

  std::map<std::string, std::string> values;
  std::vector<std::string> curves;
  bool paper_grid = false;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [key, help] : key_help()) {
    if (key == "curve") {
      options[key] = app.add_option("--curve", curves, help);
    } else if (key == "paper-grid") {
      options[key] = app.add_flag("--paper-grid", paper_grid, "Use the full grid {1, 0.5} x 10^-p, p = 0..8");
    } else {
      options[key] = app.add_option("--" + key, values[key], help);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  ConfigMap map;
  if (!config_path.empty()) map = read_config_file(config_path);
  if (!positional.empty()) {
    if (options["experiment"]->count() && values["experiment"] != positional) {
      throw ConfigError("experiment given twice: '" + positional + "' and '" + values["experiment"] + "'");
    }
    map["experiment"] = positional;
  }
  for (const auto& [key, opt] : options) {
    if (!opt->count()) continue;
    if (key == "curve") {
      std::string joined;
      for (const auto& c : curves) joined += (joined.empty() ? "" : ",") + c;
      map[key] = joined;
    } else if (key == "paper-grid") {
      map[key] = paper_grid ? "true" : "false";
    } else {
      map[key] = values[key];
    }
  }
  // Flags for shorthands replace file-level curve declarations and vice versa.
  if (options["fixed-n"]->count() || options["schedule"]->count()) {
    if (!options["curve"]->count()) map.erase("curve");
  }
  if (options["delta-grid"]->count() && !options["paper-grid"]->count()) map.erase("paper-grid");
  if (options["paper-grid"]->count() && paper_grid && !options["delta-grid"]->count()) map.erase("delta-grid");
  return {config_from_map(map), ""};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepResult>& results) {
  out << "curve,level,alpha,n_iters,dist_to_truth,normalized_dist,ergodic_normalized_dist,set_dist,data_dist,"
         "data_normalized,objective,e_delta,bound_lhs,bound_rhs,bound_holds\r\n";
  for (const SweepResult& r : results) {
    for (const SweepRow& row : r.rows) {
      out << csv_field(r.label) << ',' << format_double(row.level) << ',' << format_double(row.alpha) << ','
          << row.n_iters << ',' << format_double(row.dist_to_truth) << ',' << format_double(row.normalized_dist)
          << ',' << opt_field(row.ergodic_normalized_dist) << ',' << opt_field(row.set_dist) << ','
          << format_double(row.data_dist) << ',' << format_double(row.data_normalized) << ','
          << format_double(row.objective) << ',' << opt_field(row.e_delta) << ',' << opt_field(row.bound_lhs)
          << ',' << opt_field(row.bound_rhs) << ','
          << (row.bound_holds ? (*row.bound_holds ? "true" : "false") : "") << "\r\n";
    }
  }
}

namespace {

json conditions_json(const ConvergenceReport& c) {
  json seq = json::array();
  for (const auto& s : c.ratios) seq.push_back({{"name", s.name}, {"values", s.values}, {"tail_decreasing", s.tail_decreasing}});
  return {{"passes", c.passes}, {"tail_start", c.tail_start}, {"sequences", seq}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<SweepResult> run_sweep(const RunConfig& cfg, std::ostream& log) {
  const SweepOptions options{cfg.seed, cfg.streams};
  switch (cfg.experiment) {
    case Experiment::Tikhonov: {
      Xoshiro256 rng(derive_seed(cfg.seed, 1000));
      Matrix a(cfg.rows, cfg.cols);
      for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
      const Vector v = standard_normals(cfg.rows, rng);
      const LinearMap op = make_dense(a);
      const Vector xhat = op.adjoint_apply(v);
      log << "tikhonov: " << cfg.rows << "x" << cfg.cols << " instance, " << cfg.delta_grid.size() << " levels\n";
      return {run_tikhonov_sweep(op, xhat, -v, cfg.schedule, cfg.delta_grid, options)};
    }
    case Experiment::Lasso: {
      // The row-of-ones toy: Xhat is the segment between (1, 0) and (0, 1).
      Matrix m(1, 2);
      m << 1.0, 1.0;
      const LinearMap op = make_dense(m);
      Vector xhat(2), p(2), q(2);
      xhat << 1.0, 0.0;
      p << 1.0, 0.0;
      q << 0.0, 1.0;
      const SourceCertificate cert = find_l1_certificate(op, xhat);
      if (!cert.found) throw std::runtime_error("lasso: no source certificate for the toy instance");
      log << "lasso: row-of-ones toy, " << cfg.delta_grid.size() << " levels\n";
      return {run_lasso_sweep(op, xhat, cfg.schedule, cfg.delta_grid, segment_distance(p, q), cert, options)};
    }
    case Experiment::TvDeblur: {
      TvSweepConfig tv;
      tv.phantom = cfg.image ? make_phantom({PhantomKind::LoadedPGM, 0, 0, *cfg.image})
                             : make_phantom({PhantomKind::Disk, cfg.width, cfg.height, ""});
      tv.schedule = cfg.schedule;
      tv.delta_breves = cfg.delta_grid;
      tv.options = options;
      tv.cap_seconds = cfg.cap_seconds;
      tv.max_total_iterations = cfg.max_total_iterations;
      tv.fixed_ns.clear();
      for (const std::string& c : cfg.curves)
        if (c != "n-delta") tv.fixed_ns.push_back(fixed_curve_n(c));
      log << "tv-deblur: " << tv.phantom.image.width << "x" << tv.phantom.image.height << " image, "
          << cfg.delta_grid.size() << " levels\n";
      std::vector<SweepResult> all = run_tv_deblur_sweep(tv);
      if (std::find(cfg.curves.begin(), cfg.curves.end(), "n-delta") == cfg.curves.end()) all.erase(all.begin());
      return all;
    }
    default:
      throw std::logic_error("run_sweep: not a sweep");
  }
}

int run_check(const RunConfig& cfg, std::ostream& log) {
  json report = {{"library_version", kLibraryVersion}, {"experiment", to_string(cfg.experiment)}};
  report["config"] = cfg.settings;
  switch (cfg.experiment) {
    case Experiment::CheckSource: {
      const SourceCertificate cert = find_l1_certificate(make_dense(cfg.matrix), cfg.xhat);
      report["certificate"] = to_json(cert);
      report["holds"] = cert.found;
      if (cert.found) {
        const Complementarity comp = strict_complementarity(cfg.xhat, cert.d);
        report["strictly_complementary"] = comp.strictly_complementary;
        report["z"] = comp.z;
        report["m_smallest_nonzero_eigenvalue"] = smallest_nonzero_eigenvalue(lasso_m_matrix(cfg.matrix, comp.z));
      }
      log << "check-source: certificate " << (cert.found ? "found" : "not found") << ", residual "
          << format_double(cert.residual) << "\n";
      break;
    }
    case Experiment::CheckSubreg: {
      const LinearMap op = make_dense(cfg.matrix);
      const SourceCertificate cert = find_l1_certificate(op, cfg.xhat);
      if (!cert.found) throw std::runtime_error("check-subreg: no source certificate for xhat");
      const LassoGammaBound bound = lasso_admissible_gamma(cfg.matrix, cfg.xhat, cert.d, cfg.radius);
      const double gamma = cfg.gamma.value_or(0.99 * bound.gamma_sup);
      if (!(gamma > 0.0 && gamma < 0.5)) throw std::runtime_error("check-subreg: gamma must lie in (0, 1/2)");
      const double alpha = cfg.alpha.value_or(0.5 - gamma);
      SubdiffCheck chk{.a = op,
                       .r = Functional::l1(),
                       .alpha = alpha,
                       .xhat = cfg.xhat,
                       .d = cert.d,
                       .gamma = gamma,
                       .gamma_delta = alpha,
                       .radius = cfg.radius,
                       .n_samples = cfg.samples,
                       .seed = cfg.seed,
                       .target = SubregTarget::StrongNorm,
                       .distance = {},
                       .rho = std::nullopt,
                       .probe_points = {},
                       .tol = 1e-12};
      const SubregularityReport r = check_strong_subdiff_sampled(chk);
      report["certificate"] = to_json(cert);
      report["gamma_bound"] = to_json(bound);
      report["alpha"] = alpha;
      report["subregularity"] = to_json(r);
      report["holds"] = !r.violated_at.has_value();
      log << "check-subreg: gamma " << format_double(gamma) << ", min slack " << format_double(r.min_slack)
          << (r.violated_at ? " (violated)" : "") << "\n";
      break;
    }
    case Experiment::CheckFidelity: {
      const FidelityReport r = check_fidelity_conditions(Functional::squared_norm(), cfg.dim, cfg.p, cfg.q, cfg.c,
                                                         cfg.c_prime, cfg.samples, cfg.seed);
      report["fidelity"] = to_json(r);
      report["holds"] = r.holds;
      log << "check-fidelity: " << (r.holds ? "holds" : "fails") << ", min slack "
          << format_double(r.holder_min_slack) << "\n";
      break;
    }
    default:
      throw std::logic_error("run_check: not a check");
  }
  write_json(cfg.report, report);
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.experiment == Experiment::CheckSource || cfg.experiment == Experiment::CheckSubreg ||
      cfg.experiment == Experiment::CheckFidelity) {
    return run_check(cfg, log);
  }
  const std::vector<SweepResult> results = run_sweep(cfg, log);
  {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + cfg.out);
    write_csv(out, results);
    if (!out) throw std::runtime_error("write failed for " + cfg.out);
  }

  const bool truncated = std::any_of(results.begin(), results.end(), [](const SweepResult& r) { return r.truncated; });
  const bool bounds_ok = std::all_of(results.begin(), results.end(), [](const SweepResult& r) { return bounds_hold(r); });
  std::vector<double> effective, measured;
  if (!results.empty()) {
    for (const SweepRow& row : results.front().rows) {
      effective.push_back(row.level);
      measured.push_back(row.data_dist);
    }
  }

  json sidecar = {{"library_version", kLibraryVersion},
                  {"experiment", to_string(cfg.experiment)},
                  {"csv", cfg.out},
                  {"truncated", truncated},
                  {"bounds_hold", bounds_ok},
                  {"effective_delta_grid", effective},
                  {"measured_deltas", measured}};
  ConfigMap reproducible = cfg.settings;
  if (truncated) {
    // Pin the levels that actually ran so that a rerun does not depend on timing.
    reproducible["delta-grid"] = join_doubles(effective);
    reproducible.erase("cap-seconds");
    reproducible.erase("max-total-iterations");
    sidecar["requested_config"] = cfg.settings;
  }
  sidecar["config"] = reproducible;
  json runtimes = json::object();
  json conditions = nullptr;
  for (const SweepResult& r : results) {
    std::vector<double> ms;
    for (const SweepRow& row : r.rows) ms.push_back(row.runtime_ms);
    runtimes[r.label] = ms;
    if (r.conditions && conditions.is_null()) conditions = conditions_json(*r.conditions);
  }
  sidecar["runtime_ms"] = runtimes;
  sidecar["convergence_conditions"] = conditions;
  write_json(cfg.report, sidecar);

  log << "wrote " << cfg.out << " and " << cfg.report << (truncated ? " (grid truncated by cap)" : "") << "\n";
  if (!conditions.is_null() && !conditions["passes"].get<bool>()) {
    log << "note: the schedule fails the convergence-condition check on this grid (advisory)\n";
  }
  if (!bounds_ok) {
    log << "theorem bound violated on at least one row\n";
    return 2;
  }
  return 0;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const ParsedArgs parsed = parse_config(args);
    if (!parsed.config) {
      std::cout << parsed.help;
      return 0;
    }
    return run(*parsed.config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace regcomplex::cli
