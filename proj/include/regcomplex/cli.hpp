#pragma once

#include "regcomplex/experiments.hpp"
#include "regcomplex/schedules.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace regcomplex::cli {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class Experiment { Tikhonov, Lasso, TvDeblur, CheckSource, CheckSubreg, CheckFidelity };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

/// Invalid or incomplete configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value settings; keys are the long flag names without dashes.
using ConfigMap = std::map<std::string, std::string>;

struct RunConfig {
  Experiment experiment = Experiment::TvDeblur;
  std::uint64_t seed = 0;
  Schedule schedule{};
  std::vector<double> delta_grid;
  Index width = 64;   // tv-deblur image size
  Index height = 64;
  Index rows = 10;    // tikhonov instance
  Index cols = 10;
  std::optional<std::string> image;
  std::vector<std::string> curves;  // tv-deblur: "n-delta" or "fixed:N"
  std::string out;
  std::string report;
  std::optional<double> cap_seconds;
  std::optional<std::int64_t> max_total_iterations;
  NoiseStreams streams = NoiseStreams::Common;
  // diagnostics
  Matrix matrix;
  Vector xhat;
  double radius = 0.1;
  int samples = 1000;
  std::optional<double> gamma;
  std::optional<double> alpha;
  double c = 3.0;
  double p = 2.0;
  double q = 2.0;
  double c_prime = 0.5;
  Index dim = 3;
  /// Canonical settings with every default filled in; feeding them back
  /// through config_from_map gives the same run.
  ConfigMap settings;
};

/// Every accepted key.
const std::vector<std::string>& known_keys();

/// Reads `key = value` lines ('#' starts a comment), or the "config" object of
/// a JSON sidecar when the file starts with '{'. Unknown keys raise a
/// ConfigError naming all of them.
ConfigMap read_config_file(const std::string& path);

/// Validates and fills defaults for the chosen experiment.
RunConfig config_from_map(const ConfigMap& map);

struct ParsedArgs {
  std::optional<RunConfig> config;  // empty when help was requested
  std::string help;
};

/// Command-line flags override values from --config. Throws ConfigError.
ParsedArgs parse_config(const std::vector<std::string>& args);

/// Runs the experiment, writing CSV and the JSON sidecar. Returns 0, or 2 when
/// a theorem bound fails on some row. Operational failures throw.
int run(const RunConfig& config, std::ostream& log);

/// Full entry point: parse, run, map exceptions to exit code 1.
int main_entry(int argc, char** argv);

/// 17 significant digits, '.' separator; "nan" and "inf"/"-inf" otherwise.
std::string format_double(double v);

/// RFC 4180 CSV: one header row, then the rows of every result in order.
void write_csv(std::ostream& out, const std::vector<SweepResult>& results);

}  // namespace regcomplex::cli
