#pragma once

#include "regcomplex/diagnostics.hpp"
#include "regcomplex/linop.hpp"
#include "regcomplex/schedules.hpp"
#include "regcomplex/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace regcomplex {

// ---------------------------------------------------------------------------
// Noise and data

enum class NoiseKind {
  PixelwiseGaussianThenBlur,  // b = A (xhat + noise)
  AdditiveGaussianOnData,     // b = A xhat + noise
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::AdditiveGaussianOnData;
  double level = 0.0;  // standard deviation of each noise entry
  std::uint64_t seed = 0;
};

/// n i.i.d. N(0, std_dev^2) draws: xoshiro256** seeded through splitmix64,
/// Box-Muller pairs (first value r cos t, then r sin t). The standard normals
/// are drawn first and then scaled, so gaussian_noise(n, s, seed) equals
/// s * gaussian_noise(n, 1, seed) bit for bit. std_dev = 0 gives zeros.
Vector gaussian_noise(Index n, double std_dev, std::uint64_t seed);

struct GeneratedData {
  Vector b_delta;
  Vector b_hat;           // A xhat
  double delta_measured;  // |b_delta - b_hat|
};

GeneratedData generate_data(const Vector& xhat, const LinearMap& a, const NoiseModel& model);

/// Whether sweep rows share one noise pattern scaled by the level (Common) or
/// draw row r from stream derive_seed(seed, r) (PerRow).
enum class NoiseStreams { Common, PerRow };

// ---------------------------------------------------------------------------
// Phantoms and PGM

enum class PhantomKind { Disk, Steps1D, LoadedPGM };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Disk;
  Index width = 64;
  Index height = 64;  // ignored by Steps1D (always 1)
  std::string path;   // LoadedPGM only
};

struct Phantom {
  ImageGrid image;
  FlatAreaCollection flat_areas;
};

/// Disk: 1 inside the centred disk of radius min(width, height) / 4, else 0;
/// flat areas are the interior and exterior eroded by 2 pixels.
/// Steps1D: width x 1 with the upper half set to 1, regions eroded likewise.
/// LoadedPGM: the image scaled to [0, 1], with no flat areas.
/// Throws std::invalid_argument for synthetic dims below 8.
Phantom make_phantom(const PhantomSpec& spec);

/// Reads binary (P5, maxval up to 65535) or plain (P2) greymaps, scaling by
/// maxval. Throws std::runtime_error on malformed input.
ImageGrid read_pgm(const std::string& path);
/// Writes P5 with maxval 255, clamping values to [0, 1].
void write_pgm(const std::string& path, const ImageGrid& image);

// ---------------------------------------------------------------------------
// Sweeps

/// One corruption level. Quantities that a sweep does not compute are empty.
struct SweepRow {
  double level = 0.0;  // delta, or the pixelwise delta-breve for TV
  double alpha = 0.0;
  std::int64_t n_iters = 0;  // 0 for closed-form solves
  double dist_to_truth = 0.0;
  double normalized_dist = 0.0;  // |x - xhat| / |xhat|
  std::optional<double> ergodic_normalized_dist;
  std::optional<double> set_dist;  // dist(x, Xhat)
  double data_dist = 0.0;          // |b_delta - b_hat|, the measured delta
  double data_normalized = 0.0;    // |b_delta - b_hat| / |b_hat|
  double objective = 0.0;
  std::optional<double> e_delta;  // certified suboptimality
  std::optional<double> bound_lhs;
  std::optional<double> bound_rhs;
  std::optional<bool> bound_holds;
  double runtime_ms = 0.0;
};

struct SweepResult {
  std::string label;
  std::vector<SweepRow> rows;  // descending level
  bool truncated = false;
  std::optional<ConvergenceReport> conditions;  // advisory; needs at least 3 levels
};

/// True iff every row that carries a bound check holds.
bool bounds_hold(const SweepResult& result);

struct SweepOptions {
  std::uint64_t seed = 0;
  NoiseStreams streams = NoiseStreams::Common;
};

/// Closed-form Tikhonov over a descending delta grid. xhat = -A^T w_hat must
/// hold to 1e-10 relative (std::invalid_argument otherwise). Noise is additive
/// with per-entry level delta / sqrt(m), so |b_delta - b_hat| is about delta.
/// The bound column is |x - xhat|^2 against delta^2 / (2 alpha) + alpha |w|^2 / 2
/// with the measured delta.
SweepResult run_tikhonov_sweep(const LinearMap& a, const Vector& xhat, const Vector& w_hat, const Schedule& schedule,
                               const std::vector<double>& deltas, const SweepOptions& options = {});

/// Upper bound on the Lasso suboptimality of x for 1/2 |A x - b|^2 + alpha |x|_1,
/// the duality gap against the rescaled residual.
double lasso_duality_gap(const LinearMap& a, const Vector& b, double alpha, const Vector& x);

/// Forward-backward from zero with tau = 0.99 / |A|^2 for N_delta iterations.
/// With a certificate the bound columns hold the Bregman bound with e_delta
/// from lasso_duality_gap. The convergence-condition report is attached
/// but never enforced.
SweepResult run_lasso_sweep(const LinearMap& a, const Vector& xhat, const Schedule& schedule,
                            const std::vector<double>& deltas, const SetDistance& xhat_set_distance,
                            const std::optional<SourceCertificate>& certificate = std::nullopt,
                            const SweepOptions& options = {});

struct TvSweepConfig {
  Phantom phantom;
  double blur_std = 2.0;
  int blur_window = 7;
  Schedule schedule{};                       // the N_delta curve
  std::vector<std::int64_t> fixed_ns{100, 1000};
  std::vector<double> delta_breves;          // descending
  SweepOptions options{};
  std::optional<std::int64_t> max_total_iterations;
  std::optional<double> cap_seconds;  // converted with a measured per-iteration cost
};

/// PDPS on K = (blur, grad) with tau = 5/L, sigma = 0.99/(5L) and zero
/// initialisation. Returns the N_delta curve first, then one result per fixed
/// N. Data are b = A (xhat + noise(delta_breve)). If the projected iteration
/// total exceeds a cap, the grid is cut after the last level that fits and
/// every result is flagged truncated.
std::vector<SweepResult> run_tv_deblur_sweep(const TvSweepConfig& config);

/// The grid {f 10^-p : f in {1, 0.5}, p = 0..max_power}, descending.
std::vector<double> paper_delta_grid(int max_power = 8);

}  // namespace regcomplex
