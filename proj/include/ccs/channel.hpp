#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "ccs/codebook.hpp"
#include "ccs/rng.hpp"
#include "ccs/tree_code.hpp"

namespace ccs {

// Fading Model I: |h| ~ U[h_lower, 2*h_lower], uniform phase.
// SNR = P * h_lower^2 / 2, so P = 2 * snr_linear / h_lower^2.
struct FadingModelI {
  double h_lower = 1.0;
  double snr_linear = 1.0;

  double power() const {
    if (!(h_lower > 0) || !(snr_linear > 0))
      throw std::invalid_argument("fading I: parameters must be positive");
    return 2.0 * snr_linear / (h_lower * h_lower);
  }
};

// Fading Model II: power gain g = |h|^2 follows Pareto(eta, alpha), phase
// uniform. SNR = P * eta / 2, so P = 2 * snr_linear / eta.
struct FadingModelII {
  double eta = 0.05;
  double alpha = 2.0;
  double snr_linear = 1.0;

  double power() const {
    if (!(eta > 0) || !(snr_linear > 0))
      throw std::invalid_argument("fading II: parameters must be positive");
    if (!(alpha > 1)) throw std::invalid_argument("fading II: need alpha > 1");
    return 2.0 * snr_linear / eta;
  }
};

struct DeviceRealization {
  std::uint64_t identity = 0;       // B-bit message
  std::complex<double> h;           // complex fading coefficient
  int tau = 0;                      // symbol delay in [0, T]
};

// K distinct uniform B-bit identities.
inline std::vector<std::uint64_t> sample_active_set(int k, int message_bits, SeededRng& rng) {
  if (k < 0 || message_bits < 1 || message_bits > 62)
    throw std::invalid_argument("sample_active_set: bad arguments");
  std::uint64_t space = 1ull << message_bits;
  if (static_cast<std::uint64_t>(k) > space)
    throw std::invalid_argument("sample_active_set: K exceeds identity space");
  std::vector<std::uint64_t> ids;
  ids.reserve(k);
  if (static_cast<std::uint64_t>(k) * 2 >= space) {
    // dense regime: partial Fisher-Yates over the whole space
    std::vector<std::uint64_t> all(space);
    for (std::uint64_t i = 0; i < space; ++i) all[i] = i;
    for (int i = 0; i < k; ++i)
      std::swap(all[i], all[i + rng.below(space - i)]);
    ids.assign(all.begin(), all.begin() + k);
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (static_cast<int>(ids.size()) < k) {
      std::uint64_t v = rng.below(space);
      if (seen.insert(v).second) ids.push_back(v);
    }
  }
  return ids;
}

inline std::complex<double> sample_fading_i(const FadingModelI& model, SeededRng& rng) {
  model.power();  // validates
  double mag = rng.uniform(model.h_lower, 2.0 * model.h_lower);
  double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return std::polar(mag, phase);
}

inline std::complex<double> sample_fading_ii(const FadingModelII& model, SeededRng& rng) {
  model.power();  // validates, rejects alpha <= 1
  double u = 1.0 - rng.uniform01();  // (0,1]
  double gain = model.eta * std::pow(u, -1.0 / model.alpha);
  double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return std::polar(std::sqrt(gain), phase);
}

// Received frame y of N = n * slot_len samples with per-slot views.
struct ReceivedFrame {
  Eigen::VectorXcd y;
  int slot_len = 0;

  int num_slots() const { return static_cast<int>(y.size()) / slot_len; }
  Eigen::VectorXcd slot(int i) const { return y.segment(i * slot_len, slot_len); }
};

// y_t = sum_k sqrt(P) h_k x_{k, t - tau_k} + w_t, where device k's frame is
// the concatenation of its zero-padded codebook columns and w is unit-variance
// circularly-symmetric complex Gaussian noise (omitted when noise_on=false).
inline ReceivedFrame synthesize_frame(const std::vector<DeviceRealization>& devices,
                                      const std::vector<CodedBlock>& blocks,
                                      const Codebook& cb, int num_slots, double power,
                                      bool noise_on, SeededRng& rng) {
  if (devices.size() != blocks.size())
    throw std::invalid_argument("synthesize_frame: devices/blocks size mismatch");
  int n = num_slots;
  if (n < 1) throw std::invalid_argument("synthesize_frame: need at least one slot");
  for (const auto& b : blocks)
    if (static_cast<int>(b.values.size()) != n)
      throw std::invalid_argument("synthesize_frame: inconsistent sub-block counts");
  for (const auto& d : devices)
    if (d.tau < 0 || d.tau > cb.max_delay)
      throw std::invalid_argument("synthesize_frame: delay outside [0, T]");

  ReceivedFrame frame;
  frame.slot_len = cb.slot_len;
  frame.y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * cb.slot_len);
  double amp = std::sqrt(power);
  for (std::size_t k = 0; k < devices.size(); ++k) {
    std::complex<double> gain = amp * devices[k].h;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXcd col = cb.column(blocks[k].values[i]);
      frame.y.segment(static_cast<Eigen::Index>(i) * cb.slot_len + devices[k].tau,
                      cb.num_rows()) += gain * col;
    }
  }
  if (noise_on)
    for (Eigen::Index t = 0; t < frame.y.size(); ++t) frame.y(t) += rng.cnormal();
  return frame;
}

// Convenience overload seeding its own stream.
inline ReceivedFrame synthesize_frame(const std::vector<DeviceRealization>& devices,
                                      const std::vector<CodedBlock>& blocks,
                                      const Codebook& cb, int num_slots, double power,
                                      bool noise_on, std::uint64_t seed) {
  SeededRng rng(seed);
  return synthesize_frame(devices, blocks, cb, num_slots, power, noise_on, rng);
}

}  // namespace ccs
