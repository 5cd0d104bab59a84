#include "watermpc/sim/profiles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace watermpc::sim {

DemandRealization synth_demand(const Eigen::VectorXd& base_daily,
                               std::uint64_t seed, double amplitude, int days) {
  if (amplitude < 0.0 || amplitude > 0.5) {
    throw std::invalid_argument("perturbation amplitude outside [0, 0.5]");
  }
  if (days <= 0) throw std::invalid_argument("days must be positive");
  const int T = static_cast<int>(base_daily.size());
  const int len = T * days;

  DemandRealization out;
  out.realized.resize(len);
  for (int k = 0; k < len; ++k) out.realized[k] = base_daily[k % T];
  out.forecast = out.realized;
  if (amplitude == 0.0) return out;

  // Smooth deviation from a handful of random Fourier modes over the whole
  // run, rescaled so the peak deviation equals the requested amplitude.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  constexpr int kModes = 4;
  double a[kModes], b[kModes];
  for (int k = 0; k < kModes; ++k) {
    a[k] = coeff(rng);
    b[k] = coeff(rng);
  }
  Eigen::VectorXd raw(len);
  for (int j = 0; j < len; ++j) {
    double v = 0.0;
    for (int k = 0; k < kModes; ++k) {
      const double w = 2.0 * M_PI * (k + 1) * j / len;
      v += a[k] * std::cos(w) + b[k] * std::sin(w);
    }
    raw[j] = v;
  }
  const double peak = raw.cwiseAbs().maxCoeff();
  if (peak > 0.0) {
    const double scale = amplitude / peak;
    for (int j = 0; j < len; ++j) {
      out.forecast[j] = std::max(0.0, out.realized[j] * (1.0 + scale * raw[j]));
    }
  }
  return out;
}

}  // namespace watermpc::sim
