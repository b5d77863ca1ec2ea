#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccs/rng.hpp"

namespace ccs {

// Outer tree code: a B-bit message is split across n sub-blocks of J coded
// bits each; sub-block i carries m_i = J - l_i message bits followed by l_i
// parity bits computed over all message bits of earlier sub-blocks.
struct TreeCodeParams {
  int n = 0;                 // number of sub-blocks
  int J = 0;                 // coded bits per sub-block
  std::vector<int> l;        // parity bits per sub-block, l[0] == 0
  int B = 0;                 // message bits, B = sum_i (J - l[i])

  TreeCodeParams() = default;
  TreeCodeParams(int n_, int J_, std::vector<int> l_, int B_)
      : n(n_), J(J_), l(std::move(l_)), B(B_) {
    validate();
  }

  void validate() const {
    if (n < 1 || J < 1 || J > 30) throw std::invalid_argument("tree: need n >= 1, 1 <= J <= 30");
    if (static_cast<int>(l.size()) != n) throw std::invalid_argument("tree: l must have n entries");
    if (l[0] != 0) throw std::invalid_argument("tree: l[0] must be 0");
    int b = 0;
    for (int i = 0; i < n; ++i) {
      if (l[i] < 0 || l[i] > J) throw std::invalid_argument("tree: need 0 <= l[i] <= J");
      b += J - l[i];
    }
    if (b != B) throw std::invalid_argument("tree: sum of message bits != B");
    if (B < 1 || B > 62) throw std::invalid_argument("tree: need 1 <= B <= 62");
  }

  int message_bits(int stage) const { return J - l[stage]; }
  // message bits in sub-blocks before `stage`
  int prefix_bits(int stage) const {
    int p = 0;
    for (int t = 0; t < stage; ++t) p += message_bits(t);
    return p;
  }
};

// Random parity-check matrices, one per stage i in [1, n). Row r of stage i
// is stored as a bit mask over the prefix message bits: column c (the c-th
// message bit in transmission order) sits at bit position prefix_bits(i)-1-c,
// so a parity bit is popcount(mask & prefix) mod 2 with the prefix packed
// first-bit-most-significant.
//
// Entries are fair coin flips drawn row-major from SeededRng(seed_chain(seed,
// stage)) via coin(); encoder and decoder derive identical matrices from
// equal (params, seed).
struct ParityGenerators {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint64_t>> stage_masks;  // [stage-1][row]

  const std::vector<std::uint64_t>& masks(int stage) const { return stage_masks[stage - 1]; }
};

inline ParityGenerators derive_parity_generators(const TreeCodeParams& params,
                                                 std::uint64_t seed) {
  params.validate();
  ParityGenerators g;
  g.seed = seed;
  g.stage_masks.resize(params.n - 1);
  for (int i = 1; i < params.n; ++i) {
    int rows = params.l[i];
    int cols = params.prefix_bits(i);
    SeededRng rng(seed_chain(seed, static_cast<std::uint64_t>(i)));
    auto& masks = g.stage_masks[i - 1];
    masks.resize(rows);
    for (int r = 0; r < rows; ++r) {
      std::uint64_t m = 0;
      for (int c = 0; c < cols; ++c) m = (m << 1) | static_cast<std::uint64_t>(rng.coin());
      masks[r] = m;
    }
  }
  return g;
}

// One encoded message: n sub-block values, each J bits, laid out as
// (message field << l[i]) | parity field.
struct CodedBlock {
  std::vector<std::uint32_t> values;
};

namespace detail {

inline std::uint64_t parity_bits_for(std::uint64_t prefix, int stage,
                                     const ParityGenerators& gens) {
  std::uint64_t p = 0;
  for (std::uint64_t mask : gens.masks(stage))
    p = (p << 1) | (static_cast<std::uint64_t>(std::popcount(prefix & mask)) & 1u);
  return p;
}

}  // namespace detail

inline CodedBlock tree_encode(std::uint64_t message, const TreeCodeParams& params,
                              const ParityGenerators& gens) {
  if (params.B < 62 && (message >> params.B) != 0)
    throw std::invalid_argument("tree_encode: message wider than B bits");
  CodedBlock out;
  out.values.resize(params.n);
  int consumed = 0;
  for (int i = 0; i < params.n; ++i) {
    int mi = params.message_bits(i);
    int li = params.l[i];
    std::uint64_t mfield = (message >> (params.B - consumed - mi)) & ((1ull << mi) - 1);
    std::uint64_t pfield = 0;
    if (li > 0) {
      std::uint64_t prefix = message >> (params.B - consumed);
      pfield = detail::parity_bits_for(prefix, i, gens);
    }
    out.values[i] = static_cast<std::uint32_t>((mfield << li) | pfield);
    consumed += mi;
  }
  return out;
}

// Recovers the message bits from sub-block values (inverse of the encoder's
// message layout; parity fields are ignored).
inline std::uint64_t extract_message(std::span<const std::uint32_t> values,
                                     const TreeCodeParams& params) {
  std::uint64_t msg = 0;
  for (int i = 0; i < params.n; ++i) {
    int mi = params.message_bits(i);
    msg = (msg << mi) | ((values[i] >> params.l[i]) & ((1ull << mi) - 1));
  }
  return msg;
}

// True iff the parity field of values[stage] matches the generators applied
// to the message bits of stages 0..stage-1. Vacuously true when l[stage]==0.
inline bool check_parity(std::span<const std::uint32_t> path, int stage,
                         const TreeCodeParams& params, const ParityGenerators& gens) {
  if (static_cast<int>(path.size()) < stage + 1)
    throw std::invalid_argument("check_parity: path too short for stage");
  int li = params.l[stage];
  if (li == 0) return true;
  std::uint64_t prefix = 0;
  for (int t = 0; t < stage; ++t) {
    int mt = params.message_bits(t);
    prefix = (prefix << mt) | ((path[t] >> params.l[t]) & ((1ull << mt) - 1));
  }
  std::uint64_t want = detail::parity_bits_for(prefix, stage, gens);
  return want == (path[stage] & ((1ull << li) - 1));
}

// Per-slot CS decoder output: up to K (value, delay, coefficient) triples,
// unique as (value, delay) pairs.
struct SlotCandidateList {
  struct Candidate {
    std::uint32_t value = 0;
    int delay = 0;
    std::complex<double> coeff;
  };
  int slot = 0;
  std::vector<Candidate> entries;
};

// Fade-consistency pruning for the tree decoder. When enabled, a candidate
// survives a stage only if its coefficient magnitude is within rel_tolerance
// (relative) of the running mean magnitude along the path; check_delay
// additionally requires the candidate delay to equal the path's delay.
struct FadePruneConfig {
  bool enabled = false;
  double rel_tolerance = 0.5;
  bool check_delay = false;

  void validate() const {
    if (enabled && !(rel_tolerance > 0))
      throw std::invalid_argument("fade prune: rel_tolerance must be positive");
  }
};

// What a root contributes when path extension finishes:
//   kUniquePath: a message only if exactly one full path survived
//   kAllPaths:   every surviving path's message
enum class RootPolicy { kUniquePath, kAllPaths };

struct DecodedMessage {
  std::uint64_t message = 0;
  std::complex<double> mean_coeff;
  // dispersion of the path's complex coefficients around their mean,
  // normalized by the mean magnitude; small = consistent fade
  double coeff_dispersion = 0.0;
};

// One surviving root-to-leaf path, exposed for diagnostics and tests.
struct SurvivorPath {
  std::vector<std::uint32_t> values;
  std::vector<std::complex<double>> coeffs;
  int delay = 0;
};

namespace detail {

struct PathState {
  std::uint64_t prefix = 0;       // message bits so far, packed MSB-first
  std::complex<double> coeff_sum;
  double mag_sum = 0.0;
  double mag2_sum = 0.0;
  int count = 0;
  double worst_dev = 0.0;         // largest relative fade deviation seen
  std::vector<std::uint32_t> values;
  std::vector<std::complex<double>> coeffs;
};

}  // namespace detail

// Runs path extension for a single root (an entry of lists[0]) and returns
// the surviving full paths. Stage i keeps a (path, candidate) pair only if
// check_parity passes, the optional fade/delay checks pass, and the frontier
// is cut to the max_paths most fade-consistent paths when it overflows.
inline std::vector<SurvivorPath> tree_decode_root(
    std::span<const SlotCandidateList> lists, std::size_t root_index,
    const TreeCodeParams& params, const ParityGenerators& gens,
    const FadePruneConfig& fade, std::size_t max_paths = std::size_t{1} << 14) {
  fade.validate();
  if (static_cast<int>(lists.size()) != params.n)
    throw std::invalid_argument("tree_decode: need one candidate list per sub-block");
  const auto& root = lists[0].entries.at(root_index);

  detail::PathState seed_path;
  seed_path.prefix = (root.value >> params.l[0]) & ((1ull << params.message_bits(0)) - 1);
  seed_path.coeff_sum = root.coeff;
  seed_path.mag_sum = std::abs(root.coeff);
  seed_path.mag2_sum = std::norm(root.coeff);
  seed_path.count = 1;
  seed_path.values = {root.value};
  seed_path.coeffs = {root.coeff};

  std::vector<detail::PathState> frontier{std::move(seed_path)};
  std::vector<detail::PathState> next;
  for (int i = 1; i < params.n && !frontier.empty(); ++i) {
    int mi = params.message_bits(i);
    int li = params.l[i];
    next.clear();
    for (const auto& path : frontier) {
      std::uint64_t want = li > 0 ? detail::parity_bits_for(path.prefix, i, gens) : 0;
      for (const auto& cand : lists[i].entries) {
        if (li > 0 && (cand.value & ((1u << li) - 1)) != want) continue;
        if (fade.check_delay && cand.delay != root.delay) continue;
        double mean_mag = path.mag_sum / path.count;
        double dev = std::abs(std::abs(cand.coeff) - mean_mag);
        if (fade.enabled && dev > fade.rel_tolerance * mean_mag) continue;
        dev = mean_mag > 0 ? dev / mean_mag : 0.0;
        detail::PathState ext = path;
        ext.prefix = (ext.prefix << mi) | ((cand.value >> li) & ((1ull << mi) - 1));
        ext.coeff_sum += cand.coeff;
        ext.mag_sum += std::abs(cand.coeff);
        ext.mag2_sum += std::norm(cand.coeff);
        ext.count += 1;
        ext.worst_dev = std::max(ext.worst_dev, dev);
        ext.values.push_back(cand.value);
        ext.coeffs.push_back(cand.coeff);
        next.push_back(std::move(ext));
      }
    }
    if (next.size() > max_paths) {
      std::sort(next.begin(), next.end(),
                [](const detail::PathState& a, const detail::PathState& b) {
                  if (a.worst_dev != b.worst_dev) return a.worst_dev < b.worst_dev;
                  return a.values < b.values;
                });
      next.resize(max_paths);
    }
    frontier.swap(next);
  }

  std::vector<SurvivorPath> out;
  out.reserve(frontier.size());
  for (auto& p : frontier)
    out.push_back({std::move(p.values), std::move(p.coeffs), root.delay});
  return out;
}

namespace detail {

inline DecodedMessage summarize_path(const SurvivorPath& path, const TreeCodeParams& params) {
  DecodedMessage d;
  d.message = extract_message(path.values, params);
  int cnt = static_cast<int>(path.coeffs.size());
  std::complex<double> mean{0, 0};
  double mag_mean = 0, mag2 = 0;
  for (auto c : path.coeffs) {
    mean += c;
    mag_mean += std::abs(c);
    mag2 += std::norm(c);
  }
  mean /= static_cast<double>(cnt);
  mag_mean /= cnt;
  mag2 /= cnt;
  d.mean_coeff = mean;
  double var = std::max(mag2 - std::norm(mean), 0.0);
  d.coeff_dispersion = mag_mean > 0 ? std::sqrt(var) / mag_mean : 0.0;
  return d;
}

}  // namespace detail

// Full tree decode: runs tree_decode_root for every entry of lists[0] and
// merges each root's contribution per `policy`. Returns decoded messages
// sorted by message value; duplicates keep the most fade-consistent path.
// An empty result is a legal outcome (decoding failed for every root).
inline std::vector<DecodedMessage> tree_decode(
    std::span<const SlotCandidateList> lists, const TreeCodeParams& params,
    const ParityGenerators& gens, const FadePruneConfig& fade,
    std::size_t max_paths = std::size_t{1} << 14,
    RootPolicy policy = RootPolicy::kUniquePath) {
  std::vector<DecodedMessage> out;
  for (std::size_t r = 0; r < lists[0].entries.size(); ++r) {
    auto paths = tree_decode_root(lists, r, params, gens, fade, max_paths);
    if (policy == RootPolicy::kUniquePath && paths.size() != 1) continue;
    for (const auto& p : paths) out.push_back(detail::summarize_path(p, params));
  }
  std::sort(out.begin(), out.end(), [](const DecodedMessage& a, const DecodedMessage& b) {
    if (a.message != b.message) return a.message < b.message;
    return a.coeff_dispersion < b.coeff_dispersion;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const DecodedMessage& a, const DecodedMessage& b) {
                          return a.message == b.message;
                        }),
            out.end());
  return out;
}

}  // namespace ccs
