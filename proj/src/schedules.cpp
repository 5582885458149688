#include "regcomplex/schedules.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace regcomplex {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_delta(double delta, const char* what) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument(std::string(what) + ": delta must be positive and finite");
  }
}

double table_lookup(const rules::Table& table, double delta, const char* what) {
  for (const auto& [d, v] : table.entries) {
    if (std::abs(d - delta) <= 1e-12 * std::max(std::abs(d), std::abs(delta))) return v;
  }
  throw std::invalid_argument(std::string(what) + ": no table entry for delta = " + std::to_string(delta));
}

// Round-off in pow() can push an exact integer just above itself; ceil with a
// relative slack of 1e-12 so that e.g. 0.01^-1.5 gives 1000, not 1001.
std::int64_t ceil_count(double value, const char* what) {
  if (!std::isfinite(value) || value > 9.0e18) {
    throw std::overflow_error(std::string(what) + ": iteration count is not representable");
  }
  const double rounded = std::ceil(value - 1e-12 * std::abs(value));
  return static_cast<std::int64_t>(rounded);
}

double parse_number(const std::string& text, const std::string& whole) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("cannot parse number '" + text + "' in '" + whole + "'");
  return v;
}

std::vector<std::string> split_colon(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string describe(const AlphaRule& rule) {
  return std::visit(overloaded{[](const rules::HalfDelta&) { return std::string("half-delta"); },
                               [](const rules::PowerRule& r) {
                                 return "power:" + format_number(r.c) + ":" + format_number(r.p);
                               },
                               [](const rules::Table& t) {
                                 return "table(" + std::to_string(t.entries.size()) + " entries)";
                               }},
                    rule);
}

std::string describe(const NRule& rule) {
  return std::visit(overloaded{[](const rules::IteratedLog& r) {
                                 return r.folds == 1000 && r.base == 100
                                            ? std::string("iterated-log")
                                            : "iterated-log:" + std::to_string(r.folds) + ":" + std::to_string(r.base);
                               },
                               [](const rules::PowerN& r) {
                                 return "power:" + format_number(r.c) + ":" + format_number(r.q);
                               },
                               [](const rules::FixedN& r) { return "fixed:" + std::to_string(r.n); }},
                    rule);
}

AlphaRule parse_alpha_rule(const std::string& text) {
  if (text == "half-delta") return rules::HalfDelta{};
  const auto parts = split_colon(text);
  if (parts.size() == 3 && parts[0] == "power") {
    const rules::PowerRule r{parse_number(parts[1], text), parse_number(parts[2], text)};
    if (!(r.c > 0.0)) throw std::invalid_argument("alpha rule '" + text + "': c must be positive");
    return r;
  }
  throw std::invalid_argument("unknown alpha rule '" + text + "' (expected half-delta or power:c:p)");
}

NRule parse_n_rule(const std::string& text) {
  if (text == "iterated-log") return rules::IteratedLog{};
  const auto parts = split_colon(text);
  if (parts.size() == 3 && parts[0] == "iterated-log") {
    const double folds = parse_number(parts[1], text), base = parse_number(parts[2], text);
    if (folds < 1 || base < 0 || folds != std::floor(folds) || base != std::floor(base)) {
      throw std::invalid_argument("n rule '" + text + "': folds must be a positive and base a nonnegative integer");
    }
    return rules::IteratedLog{static_cast<int>(folds), static_cast<std::int64_t>(base)};
  }
  if (parts.size() == 3 && parts[0] == "power") {
    const rules::PowerN r{parse_number(parts[1], text), parse_number(parts[2], text)};
    if (!(r.c > 0.0)) throw std::invalid_argument("n rule '" + text + "': c must be positive");
    return r;
  }
  if (parts.size() == 2 && parts[0] == "fixed") {
    const double n = parse_number(parts[1], text);
    if (n < 1 || n != std::floor(n)) throw std::invalid_argument("n rule '" + text + "': N must be a positive integer");
    return rules::FixedN{static_cast<std::int64_t>(n)};
  }
  throw std::invalid_argument("unknown n rule '" + text + "' (expected iterated-log, power:c:q or fixed:N)");
}

double iterated_log(double t, int folds) {
  if (!(t >= 0.0)) throw std::invalid_argument("iterated_log: t must be nonnegative");
  if (folds < 0) throw std::invalid_argument("iterated_log: folds must be nonnegative");
  double u = t;
  for (int i = 0; i < folds; ++i) u = std::log1p(u);
  return u;
}

double alpha_of(const Schedule& schedule, double delta) {
  require_positive_delta(delta, "alpha_of");
  const double alpha =
      std::visit(overloaded{[&](const rules::HalfDelta&) { return 0.5 * delta; },
                            [&](const rules::PowerRule& r) { return r.c * std::pow(delta, r.p); },
                            [&](const rules::Table& t) { return table_lookup(t, delta, "alpha_of"); }},
                 schedule.alpha_rule);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha_of: rule produced a nonpositive alpha");
  return alpha;
}

double gamma_of(const Schedule& schedule, double delta) {
  require_positive_delta(delta, "gamma_of");
  const double gamma =
      std::visit(overloaded{[&](const rules::EqualAlpha&) { return alpha_of(schedule, delta); },
                            [&](const rules::Table& t) { return table_lookup(t, delta, "gamma_of"); }},
                 schedule.gamma_rule);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma_of: rule produced a nonpositive gamma");
  return gamma;
}

std::int64_t n_of(const Schedule& schedule, double delta) {
  require_positive_delta(delta, "n_of");
  const std::int64_t n = std::visit(
      overloaded{[&](const rules::IteratedLog& r) {
                   return r.base + ceil_count(iterated_log(1.0 / delta, r.folds) / alpha_of(schedule, delta), "n_of");
                 },
                 [&](const rules::PowerN& r) { return ceil_count(r.c * std::pow(delta, -r.q), "n_of"); },
                 [&](const rules::FixedN& r) { return r.n; }},
      schedule.n_rule);
  return std::max<std::int64_t>(n, 1);
}

void require_descending_grid(const std::vector<double>& deltas, const char* what) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require_positive_delta(deltas[i], what);
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw std::invalid_argument(std::string(what) + ": grid must be strictly decreasing (entry " +
                                  std::to_string(i) + ")");
    }
  }
}

ConvergenceReport check_convergence_conditions(const Schedule& schedule, const std::vector<double>& deltas) {
  if (deltas.size() < 3) throw std::invalid_argument("check_convergence_conditions: need at least 3 grid points");
  require_descending_grid(deltas, "check_convergence_conditions");

  ConvergenceReport report;
  report.deltas = deltas;
  ConditionSequence a{"alpha^2/min(alpha,gamma)", {}, false};
  ConditionSequence d{"delta^2/min(alpha,gamma)", {}, false};
  ConditionSequence n{"1/(N*min(alpha,gamma))", {}, false};
  for (double delta : deltas) {
    const double alpha = alpha_of(schedule, delta);
    const double m = std::min(alpha, gamma_of(schedule, delta));
    a.values.push_back(alpha * alpha / m);
    d.values.push_back(delta * delta / m);
    n.values.push_back(1.0 / (static_cast<double>(n_of(schedule, delta)) * m));
  }
  const std::size_t count = deltas.size();
  const std::size_t tail = std::max<std::size_t>(2, (count + 2) / 3);
  report.tail_start = count - tail;
  report.passes = true;
  for (ConditionSequence* seq : {&a, &d, &n}) {
    seq->tail_decreasing = true;
    for (std::size_t i = report.tail_start + 1; i < count; ++i) {
      if (!(seq->values[i] < seq->values[i - 1] * (1.0 - 1e-12))) seq->tail_decreasing = false;
    }
    report.passes = report.passes && seq->tail_decreasing;
  }
  report.ratios = {std::move(a), std::move(d), std::move(n)};
  return report;
}

}  // namespace regcomplex
