#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "apsk/constellation.hpp"

namespace apsk {

// AM/AM curve A(rho) = a*rho / (1 + b*rho^2). AM/PM is assumed compensated at
// the receiver and is not modeled.
struct SalehParams {
  double a = 2.1587;
  double b = 1.1517;
};

struct ChannelParams {
  double snr_db = 10.0;
  SalehParams saleh;
};

// Derived noise level. SNR is defined as Es/N0 with Es the post-amplifier
// average symbol energy, so N0 adapts to each candidate's amplified geometry.
struct NoiseParams {
  double n0;
  double sigma_per_dim;  // sqrt(n0/2)
};

// Amplified points indexed by alphabet value (index k holds the point whose
// label is k), which makes the lowest-label tie-break a plain first-wins scan.
struct AmplifiedConstellation {
  Constellation source;
  std::vector<double> re;
  std::vector<double> im;
  double es_avg = 0.0;

  int order() const { return static_cast<int>(re.size()); }
  std::complex<double> point(int value) const { return {re[value], im[value]}; }
};

struct EvalSettings {
  std::int64_t n_symbols = 200000;
  std::uint64_t seed = 1;
  bool crn = true;  // common random numbers: one stream per GA generation
};

double amam(double rho, const SalehParams& p);

AmplifiedConstellation amplify(const Constellation& c, const SalehParams& p);

NoiseParams snr_to_noise(double snr_db, double es_avg);

// Nearest amplified point; exact distance ties resolve to the lowest label.
int ml_detect(std::complex<double> r, const AmplifiedConstellation& amp);

// R = 1/mse; mse of exactly 0 maps to the 1e12 sentinel.
double fitness(double mse);

// Pre-drawn symbol indices and unit normal pairs. One filled stream can score
// every chromosome of a generation (common random numbers); per-candidate
// noise is obtained by scaling the stored unit normals.
struct NoiseStream {
  std::vector<std::int32_t> symbols;
  std::vector<double> noise;  // 2 entries per symbol

  void fill(std::uint64_t seed, std::int64_t n, int m);
  std::int64_t size() const { return static_cast<std::int64_t>(symbols.size()); }
};

double mse_with_stream(const AmplifiedConstellation& amp, double sigma_per_dim,
                       const NoiseStream& stream);

// Monte Carlo estimate of E[(u - u_hat)^2] over uniform symbols.
// Deterministic given ev.seed.
double estimate_mse(const Constellation& c, const ChannelParams& ch,
                    const EvalSettings& ev);

// Independent quadrature oracle: midpoint rule over a +-6 sigma Cartesian grid
// around each transmitted point, weighting each cell's Gaussian mass by
// (u - u_hat)^2 of the detected label. grid_step_sigma_frac is the cell edge
// in units of sigma_per_dim; anything coarser than 1/25 is rejected.
double exact_mse(const Constellation& c, const ChannelParams& ch,
                 double grid_step_sigma_frac = 0.02);

}  // namespace apsk
