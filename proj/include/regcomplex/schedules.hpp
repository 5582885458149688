#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace regcomplex {

namespace rules {

/// alpha = delta / 2.
struct HalfDelta {};
/// alpha = c * delta^p.
struct PowerRule {
  double c = 1.0;
  double p = 1.0;
};
/// N = base + ceil(iterated_log(1 / delta, folds) / alpha).
struct IteratedLog {
  int folds = 1000;
  std::int64_t base = 100;
};
/// N = ceil(c * delta^{-q}).
struct PowerN {
  double c = 1.0;
  double q = 1.0;
};
struct FixedN {
  std::int64_t n = 100;
};
/// gamma = alpha.
struct EqualAlpha {};
/// Explicit (delta, value) pairs, looked up to a relative tolerance of 1e-12.
struct Table {
  std::vector<std::pair<double, double>> entries;
};

}  // namespace rules

using AlphaRule = std::variant<rules::HalfDelta, rules::PowerRule, rules::Table>;
using NRule = std::variant<rules::IteratedLog, rules::PowerN, rules::FixedN>;
using GammaRule = std::variant<rules::EqualAlpha, rules::Table>;

/// Couples a corruption level to (alpha, gamma, N). Whether delta is the
/// overall or the pixelwise level is up to the caller.
struct Schedule {
  AlphaRule alpha_rule = rules::HalfDelta{};
  NRule n_rule = rules::IteratedLog{};
  GammaRule gamma_rule = rules::EqualAlpha{};
};

/// Short textual forms also accepted by the parsers below:
/// "half-delta", "power:c:p", "iterated-log", "power:c:q", "fixed:N".
std::string describe(const AlphaRule& rule);
std::string describe(const NRule& rule);
AlphaRule parse_alpha_rule(const std::string& text);
NRule parse_n_rule(const std::string& text);

/// u <- ln(1 + u), applied `folds` times to t.
double iterated_log(double t, int folds);

double alpha_of(const Schedule& schedule, double delta);
double gamma_of(const Schedule& schedule, double delta);
/// Iteration count, rounded up; always >= 1.
std::int64_t n_of(const Schedule& schedule, double delta);

struct ConditionSequence {
  std::string name;
  std::vector<double> values;
  bool tail_decreasing = false;
};

/// The ratios alpha^2 / m, delta^2 / m and 1 / (N m) with m = min(alpha, gamma)
/// on a descending grid. A limit cannot be observed on a finite grid, so each
/// sequence must instead decrease strictly (relative slack 1e-12) over the
/// tail, the last max(2, ceil(n / 3)) grid points.
struct ConvergenceReport {
  std::vector<double> deltas;
  std::vector<ConditionSequence> ratios;
  std::size_t tail_start = 0;
  bool passes = false;
};

ConvergenceReport check_convergence_conditions(const Schedule& schedule, const std::vector<double>& deltas);

/// Throws std::invalid_argument unless values are positive and strictly decreasing.
void require_descending_grid(const std::vector<double>& deltas, const char* what);

}  // namespace regcomplex
