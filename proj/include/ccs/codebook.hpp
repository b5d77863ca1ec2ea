#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "ccs/rng.hpp"

namespace ccs {

// CS codebook: a random (slot_len - max_delay) x 2^J sub-matrix of the
// 2^J-point DFT matrix. Entry (r, c) = scale * exp(-2*pi*i * rows[r] * c / 2^J).
// scale is chosen so every zero-padded column has squared norm slot_len,
// which makes n slots carry exactly N units of energy per frame.
struct Codebook {
  int sub_block_bits = 0;            // J
  int slot_len = 0;                  // N~, symbols per slot
  int max_delay = 0;                 // T
  std::vector<std::uint32_t> rows;   // distinct DFT row indices, ascending
  double scale = 1.0;

  int num_rows() const { return slot_len - max_delay; }
  std::uint32_t num_columns() const { return 1u << sub_block_bits; }

  // column j (the transmit vector for sub-block value j), length num_rows()
  Eigen::VectorXcd column(std::uint32_t j) const {
    if (j >= num_columns()) throw std::invalid_argument("codebook: column index out of range");
    Eigen::VectorXcd s(num_rows());
    double base = -2.0 * std::numbers::pi * static_cast<double>(j) / num_columns();
    for (int r = 0; r < num_rows(); ++r)
      s(r) = std::polar(scale, base * static_cast<double>(rows[r]));
    return s;
  }
};

inline Codebook build_codebook(int sub_block_bits, int slot_len, int max_delay,
                               std::uint64_t seed) {
  if (sub_block_bits < 1 || sub_block_bits > 30)
    throw std::invalid_argument("codebook: need 1 <= J <= 30");
  if (slot_len <= max_delay || max_delay < 0)
    throw std::invalid_argument("codebook: need slot_len > max_delay >= 0");
  std::uint32_t m = 1u << sub_block_bits;
  std::uint32_t r = static_cast<std::uint32_t>(slot_len - max_delay);
  if (r > m) throw std::invalid_argument("codebook: more rows than DFT dimension");

  Codebook cb;
  cb.sub_block_bits = sub_block_bits;
  cb.slot_len = slot_len;
  cb.max_delay = max_delay;
  // rows uniform without replacement: partial Fisher-Yates over [0, 2^J)
  std::vector<std::uint32_t> all(m);
  for (std::uint32_t i = 0; i < m; ++i) all[i] = i;
  SeededRng rng(seed_chain(seed, 0x636f6465626f6f6bULL));  // "codebook"
  for (std::uint32_t i = 0; i < r; ++i)
    std::swap(all[i], all[i + rng.below(m - i)]);
  cb.rows.assign(all.begin(), all.begin() + r);
  std::sort(cb.rows.begin(), cb.rows.end());
  cb.scale = std::sqrt(static_cast<double>(slot_len) / r);
  return cb;
}

// [ s_j ; zeros(T) ], length slot_len. Padding keeps a delayed column inside
// its own slot for any delay <= T.
inline Eigen::VectorXcd zero_pad(const Codebook& cb, std::uint32_t j) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(cb.slot_len);
  out.head(cb.num_rows()) = cb.column(j);
  return out;
}

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  static thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace detail

// Shifted dictionary S~: slot_len x 2^J*(T+1). Column (j, tau) is codebook
// column j delayed by tau symbols: [zeros(tau); s_j; zeros(T-tau)].
// Flat index = j*(T+1) + tau. Matrix-vector products are evaluated
// implicitly with one 2^J-point FFT per delay; columns are materialized on
// demand. dense() exists for small cases and tests.
class ShiftedDictionary {
 public:
  explicit ShiftedDictionary(Codebook cb) : cb_(std::move(cb)) {
    op_norm_sq_ = estimate_op_norm_sq();
  }

  const Codebook& codebook() const { return cb_; }
  int slot_len() const { return cb_.slot_len; }
  int num_delays() const { return cb_.max_delay + 1; }
  std::size_t width() const {
    return static_cast<std::size_t>(cb_.num_columns()) * num_delays();
  }

  std::size_t flat_index(std::uint32_t j, int tau) const {
    if (j >= cb_.num_columns() || tau < 0 || tau > cb_.max_delay)
      throw std::invalid_argument("dictionary: (column, delay) out of range");
    return static_cast<std::size_t>(j) * num_delays() + tau;
  }
  std::pair<std::uint32_t, int> column_of(std::size_t flat) const {
    if (flat >= width()) throw std::invalid_argument("dictionary: flat index out of range");
    return {static_cast<std::uint32_t>(flat / num_delays()),
            static_cast<int>(flat % num_delays())};
  }

  Eigen::VectorXcd column(std::uint32_t j, int tau) const {
    flat_index(j, tau);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(cb_.slot_len);
    out.segment(tau, cb_.num_rows()) = cb_.column(j);
    return out;
  }
  Eigen::VectorXcd column(std::size_t flat) const {
    auto [j, tau] = column_of(flat);
    return column(j, tau);
  }

  // y = S~ x
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    if (static_cast<std::size_t>(x.size()) != width())
      throw std::invalid_argument("dictionary: apply size mismatch");
    const int d = num_delays();
    const std::uint32_t m = cb_.num_columns();
    const int nr = cb_.num_rows();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(cb_.slot_len);
    Eigen::VectorXcd grouped(m), spectrum(m);
    for (int tau = 0; tau < d; ++tau) {
      for (std::uint32_t j = 0; j < m; ++j) grouped(j) = x(static_cast<std::size_t>(j) * d + tau);
      detail::fft_engine().fwd(spectrum, grouped);
      for (int r = 0; r < nr; ++r) y(tau + r) += cb_.scale * spectrum(cb_.rows[r]);
    }
    return y;
  }

  // out = S~^H y
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const {
    if (y.size() != cb_.slot_len)
      throw std::invalid_argument("dictionary: adjoint size mismatch");
    const int d = num_delays();
    const std::uint32_t m = cb_.num_columns();
    const int nr = cb_.num_rows();
    Eigen::VectorXcd out(width());
    Eigen::VectorXcd scattered(m), spectrum(m);
    for (int tau = 0; tau < d; ++tau) {
      scattered.setZero();
      for (int r = 0; r < nr; ++r)
        scattered(cb_.rows[r]) = cb_.scale * std::conj(y(tau + r));
      detail::fft_engine().fwd(spectrum, scattered);
      for (std::uint32_t j = 0; j < m; ++j)
        out(static_cast<std::size_t>(j) * d + tau) = std::conj(spectrum(j));
    }
    return out;
  }

  Eigen::MatrixXcd dense() const {
    Eigen::MatrixXcd s(cb_.slot_len, width());
    for (std::size_t c = 0; c < width(); ++c) s.col(c) = column(c);
    return s;
  }

  // ||S~||_2^2, power-iteration estimate fixed at construction
  double operator_norm_sq() const { return op_norm_sq_; }

 private:
  double estimate_op_norm_sq() const {
    SeededRng rng(seed_chain(0x7370656374726d00ULL, cb_.sub_block_bits,
                             static_cast<std::uint64_t>(cb_.slot_len),
                             static_cast<std::uint64_t>(cb_.max_delay)));
    Eigen::VectorXcd b(width());
    for (std::size_t i = 0; i < width(); ++i) b(i) = rng.cnormal();
    b /= b.norm();
    double lam = 0.0;
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXcd w = apply_adjoint(apply(b));
      lam = w.norm();
      if (lam == 0.0) break;
      b = w / lam;
    }
    return lam;
  }

  Codebook cb_;
  double op_norm_sq_ = 0.0;
};

inline ShiftedDictionary build_shifted_dictionary(const Codebook& cb) {
  return ShiftedDictionary(cb);
}

}  // namespace ccs
