#include "apsk/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace apsk {

double amam(double rho, const SalehParams& p) {
  if (rho < 0.0) throw std::domain_error("amplitude must be non-negative");
  return p.a * rho / (1.0 + p.b * rho * rho);
}

AmplifiedConstellation amplify(const Constellation& c, const SalehParams& p) {
  auto violations = validate(c);
  if (!violations.empty()) {
    std::string msg = "cannot amplify invalid constellation:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw std::invalid_argument(msg);
  }
  const int m = c.layout.order();
  AmplifiedConstellation out;
  out.source = c;
  out.re.assign(m, 0.0);
  out.im.assign(m, 0.0);
  double es = 0.0;
  // Index by label so detection lookups are O(1) and ties resolve to the
  // lowest label by a plain first-wins scan.
  for (const auto& pt : c.points) {
    const double r = amam(pt.radius, p);
    out.re[pt.value] = r * std::cos(pt.phase);
    out.im[pt.value] = r * std::sin(pt.phase);
    es += r * r;
  }
  out.es_avg = es / m;
  return out;
}

NoiseParams snr_to_noise(double snr_db, double es_avg) {
  if (!(es_avg > 0.0)) throw std::domain_error("average symbol energy must be positive");
  NoiseParams n;
  n.n0 = es_avg / std::pow(10.0, snr_db / 10.0);
  n.sigma_per_dim = std::sqrt(n.n0 / 2.0);
  return n;
}

int ml_detect(std::complex<double> r, const AmplifiedConstellation& amp) {
  const int m = amp.order();
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int v = 0; v < m; ++v) {
    const double dr = r.real() - amp.re[v];
    const double di = r.imag() - amp.im[v];
    const double d2 = dr * dr + di * di;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = v;
    }
  }
  return best;
}

double fitness(double mse) {
  if (mse < 0.0) throw std::domain_error("mse must be non-negative");
  if (mse == 0.0) return 1e12;
  return 1.0 / mse;
}

void NoiseStream::fill(std::uint64_t seed, std::int64_t n, int m) {
  if (n <= 0) throw std::invalid_argument("stream length must be positive");
  symbols.resize(n);
  noise.resize(2 * n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int32_t> sym(0, m - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::int64_t i = 0; i < n; ++i) {
    symbols[i] = sym(rng);
    noise[2 * i] = gauss(rng);
    noise[2 * i + 1] = gauss(rng);
  }
}

double mse_with_stream(const AmplifiedConstellation& amp, double sigma_per_dim,
                       const NoiseStream& stream) {
  if (stream.size() == 0) throw std::invalid_argument("empty noise stream");
  const std::int64_t n = stream.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const int u = stream.symbols[i];
    const double re = amp.re[u] + sigma_per_dim * stream.noise[2 * i];
    const double im = amp.im[u] + sigma_per_dim * stream.noise[2 * i + 1];
    const int u_hat = ml_detect({re, im}, amp);
    const double d = static_cast<double>(u - u_hat);
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

double estimate_mse(const Constellation& c, const ChannelParams& ch,
                    const EvalSettings& ev) {
  if (ev.n_symbols <= 0) throw std::invalid_argument("n_symbols must be positive");
  const auto amp = amplify(c, ch.saleh);
  const auto np = snr_to_noise(ch.snr_db, amp.es_avg);
  NoiseStream stream;
  stream.fill(ev.seed, ev.n_symbols, amp.order());
  return mse_with_stream(amp, np.sigma_per_dim, stream);
}

double exact_mse(const Constellation& c, const ChannelParams& ch,
                 double grid_step_sigma_frac) {
  if (!(grid_step_sigma_frac > 0.0) || grid_step_sigma_frac > 1.0 / 25.0 + 1e-12)
    throw std::invalid_argument("grid too coarse: step must be in (0, sigma/25]");
  const auto amp = amplify(c, ch.saleh);
  const auto np = snr_to_noise(ch.snr_db, amp.es_avg);
  const double sigma = np.sigma_per_dim;
  const double h = grid_step_sigma_frac * sigma;
  const int half = static_cast<int>(std::ceil(6.0 / grid_step_sigma_frac));
  const int n = 2 * half;

  // Midpoint rule over [-6 sigma, +6 sigma] per dimension; separable weights.
  std::vector<double> off(n), w1(n);
  for (int i = 0; i < n; ++i) {
    off[i] = (i - half + 0.5) * h;
    w1[i] = std::exp(-off[i] * off[i] / (2.0 * sigma * sigma));
  }

  const int m = amp.order();
  double total = 0.0;
  for (int u = 0; u < m; ++u) {
    double dsum = 0.0, wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double re = amp.re[u] + off[i];
      for (int j = 0; j < n; ++j) {
        const double im = amp.im[u] + off[j];
        const double w = w1[i] * w1[j];
        const int u_hat = ml_detect({re, im}, amp);
        const double d = static_cast<double>(u - u_hat);
        dsum += w * d * d;
        wsum += w;
      }
    }
    total += dsum / wsum;
  }
  return total / m;
}

}  // namespace apsk
