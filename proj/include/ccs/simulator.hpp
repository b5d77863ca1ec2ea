#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ccs/channel.hpp"
#include "ccs/codebook.hpp"
#include "ccs/cs_decoder.hpp"
#include "ccs/rng.hpp"
#include "ccs/tree_code.hpp"

namespace ccs {

struct ChannelConfig {
  enum class Model { kFadingI, kFadingII };
  Model model = Model::kFadingI;
  double h_lower = 1.0;   // Model I
  double eta = 0.05;      // Model II
  double alpha = 2.0;     // Model II
  bool noise_on = true;
};

// Full Monte Carlo experiment description: outer code, codebook geometry,
// device population, channel model, SNR grid, and decoder settings.
struct ExperimentConfig {
  TreeCodeParams tree;
  int slot_len = 0;                       // N~
  int max_delay = 0;                      // T
  int k_active = 0;                       // K
  std::optional<std::uint64_t> k_total;   // when set, must equal 2^B
  ChannelConfig channel;
  std::vector<double> snr_db;
  int trials = 0;
  std::uint64_t master_seed = 1;
  LassoConfig lasso;
  FadePruneConfig fade;
  std::size_t max_paths = std::size_t{1} << 14;
  RootPolicy root_policy = RootPolicy::kUniquePath;
  bool keep_best_k = false;               // cut oversized decoded sets to the K
                                          // most fade-consistent messages
  bool per_slot_codebooks = false;        // independent row draws per slot

  int num_samples() const { return tree.n * slot_len; }

  void validate() const {
    tree.validate();
    fade.validate();
    lasso.validate();
    if (slot_len <= max_delay || max_delay < 0)
      throw std::invalid_argument("config: need slot_len > max_delay >= 0");
    if (slot_len - max_delay > (1 << tree.J))
      throw std::invalid_argument("config: slot_len - max_delay exceeds 2^J");
    if (k_active < 0) throw std::invalid_argument("config: K must be >= 0");
    if (tree.B < 62 && static_cast<std::uint64_t>(k_active) > (1ull << tree.B))
      throw std::invalid_argument("config: K exceeds 2^B identities");
    if (k_total && *k_total != (1ull << tree.B))
      throw std::invalid_argument("config: k_total must equal 2^B");
    if (trials < 0) throw std::invalid_argument("config: trials must be >= 0");
    if (snr_db.empty()) throw std::invalid_argument("config: empty SNR grid");
  }
};

struct TrialResult {
  std::vector<std::uint64_t> transmitted;  // sorted
  std::vector<std::uint64_t> decoded;      // sorted
  std::vector<int> slot_hits;              // true (value, delay) pairs found per slot
  std::vector<std::uint8_t> slot_converged;
  double decode_ms = 0.0;
};

struct ErrorStats {
  double snr_db = 0.0;
  int trials = 0;
  double pe = 0.0;                 // fraction of trials with decoded set != true set
  double pe_ci95 = 0.0;            // Wilson 95% half-width
  double missed_rate = 0.0;        // mean |K \ K^| / K
  double missed_ci95 = 0.0;        // normal-approx 95% half-width of the mean
  double false_alarm_rate = 0.0;   // mean |K^ \ K| / K
  double mean_decode_ms = 0.0;
  long nonconverged_slots = 0;
};

// Prebuilt per-experiment state shared across trials.
struct ExperimentContext {
  TreeCodeParams params;
  ParityGenerators gens;
  std::vector<Codebook> codebooks;            // one, or n when per_slot_codebooks
  std::vector<ShiftedDictionary> dictionaries;

  const Codebook& codebook_for(int slot) const {
    return codebooks[codebooks.size() == 1 ? 0 : slot];
  }
  const ShiftedDictionary& dictionary_for(int slot) const {
    return dictionaries[dictionaries.size() == 1 ? 0 : slot];
  }
};

inline ExperimentContext make_context(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentContext ctx;
  ctx.params = cfg.tree;
  ctx.gens = derive_parity_generators(cfg.tree, seed_chain(cfg.master_seed, 0x706172697479ULL));
  int ncb = cfg.per_slot_codebooks ? cfg.tree.n : 1;
  for (int i = 0; i < ncb; ++i) {
    ctx.codebooks.push_back(build_codebook(
        cfg.tree.J, cfg.slot_len, cfg.max_delay,
        seed_chain(cfg.master_seed, 0x636f6465626bULL, static_cast<std::uint64_t>(i))));
    ctx.dictionaries.emplace_back(ctx.codebooks.back());
  }
  return ctx;
}

// One end-to-end trial: sample devices, encode, pass through the channel,
// decode every slot, stitch with the tree decoder. Deterministic in
// (cfg, snr_index, trial_index) through the master seed.
inline TrialResult run_trial(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                             int snr_index, int trial_index) {
  const std::uint64_t trial_seed = seed_chain(cfg.master_seed,
                                              static_cast<std::uint64_t>(snr_index),
                                              static_cast<std::uint64_t>(trial_index));
  const double snr_linear = std::pow(10.0, cfg.snr_db.at(snr_index) / 10.0);
  const int n = cfg.tree.n;
  const int k = cfg.k_active;

  SeededRng id_rng(seed_chain(trial_seed, 1));
  SeededRng fade_rng(seed_chain(trial_seed, 2));
  SeededRng delay_rng(seed_chain(trial_seed, 3));
  SeededRng noise_rng(seed_chain(trial_seed, 4));

  auto identities = sample_active_set(k, cfg.tree.B, id_rng);
  double power = 0.0;
  std::vector<DeviceRealization> devices(k);
  if (cfg.channel.model == ChannelConfig::Model::kFadingI) {
    FadingModelI model{cfg.channel.h_lower, snr_linear};
    power = model.power();
    for (int i = 0; i < k; ++i)
      devices[i] = {identities[i], sample_fading_i(model, fade_rng), 0};
  } else {
    FadingModelII model{cfg.channel.eta, cfg.channel.alpha, snr_linear};
    power = model.power();
    for (int i = 0; i < k; ++i)
      devices[i] = {identities[i], sample_fading_ii(model, fade_rng), 0};
  }
  for (auto& d : devices)
    d.tau = static_cast<int>(delay_rng.below(static_cast<std::uint64_t>(cfg.max_delay) + 1));

  std::vector<CodedBlock> blocks(k);
  for (int i = 0; i < k; ++i) blocks[i] = tree_encode(devices[i].identity, ctx.params, ctx.gens);

  ReceivedFrame frame;
  if (cfg.per_slot_codebooks) {
    // synthesize slot by slot, each with its own codebook
    frame.slot_len = cfg.slot_len;
    frame.y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * cfg.slot_len);
    double amp = std::sqrt(power);
    for (int i = 0; i < n; ++i) {
      const Codebook& cb = ctx.codebook_for(i);
      for (int d = 0; d < k; ++d)
        frame.y.segment(static_cast<Eigen::Index>(i) * cfg.slot_len + devices[d].tau,
                        cb.num_rows()) += amp * devices[d].h * cb.column(blocks[d].values[i]);
    }
    if (cfg.channel.noise_on)
      for (Eigen::Index t = 0; t < frame.y.size(); ++t) frame.y(t) += noise_rng.cnormal();
  } else {
    frame = synthesize_frame(devices, blocks, ctx.codebook_for(0), n, power,
                             cfg.channel.noise_on, noise_rng);
  }

  auto t0 = std::chrono::steady_clock::now();
  std::vector<SlotCandidateList> lists(n);
  TrialResult result;
  result.slot_hits.resize(n, 0);
  result.slot_converged.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    bool conv = true;
    lists[i] = decode_slot(frame.slot(i), ctx.dictionary_for(i), k, 1.0, cfg.lasso, i, &conv);
    result.slot_converged[i] = conv ? 1 : 0;
    for (int d = 0; d < k; ++d)
      for (const auto& e : lists[i].entries)
        if (e.value == blocks[d].values[i] && e.delay == devices[d].tau) {
          ++result.slot_hits[i];
          break;
        }
  }

  auto decoded = tree_decode(lists, ctx.params, ctx.gens, cfg.fade, cfg.max_paths,
                             cfg.root_policy);
  if (cfg.keep_best_k && static_cast<int>(decoded.size()) > k) {
    std::sort(decoded.begin(), decoded.end(),
              [](const DecodedMessage& a, const DecodedMessage& b) {
                if (a.coeff_dispersion != b.coeff_dispersion)
                  return a.coeff_dispersion < b.coeff_dispersion;
                return a.message < b.message;
              });
    decoded.resize(k);
  }
  auto t1 = std::chrono::steady_clock::now();
  result.decode_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  result.transmitted = identities;
  std::sort(result.transmitted.begin(), result.transmitted.end());
  for (const auto& d : decoded) result.decoded.push_back(d.message);
  std::sort(result.decoded.begin(), result.decoded.end());
  return result;
}

// Standalone variant building its own context (tests, one-off trials).
inline TrialResult run_trial(const ExperimentConfig& cfg, int snr_index, int trial_index) {
  ExperimentContext ctx = make_context(cfg);
  return run_trial(cfg, ctx, snr_index, trial_index);
}

inline ErrorStats compute_stats(const std::vector<TrialResult>& results) {
  if (results.empty()) throw std::invalid_argument("compute_stats: no trials");
  ErrorStats s;
  s.trials = static_cast<int>(results.size());
  double miss_sum = 0, miss_sq = 0, fa_sum = 0, ms_sum = 0;
  int wrong = 0;
  for (const auto& r : results) {
    std::size_t k = r.transmitted.size();
    std::vector<std::uint64_t> missed, extra;
    std::set_difference(r.transmitted.begin(), r.transmitted.end(), r.decoded.begin(),
                        r.decoded.end(), std::back_inserter(missed));
    std::set_difference(r.decoded.begin(), r.decoded.end(), r.transmitted.begin(),
                        r.transmitted.end(), std::back_inserter(extra));
    if (!missed.empty() || !extra.empty()) ++wrong;
    double denom = k > 0 ? static_cast<double>(k) : 1.0;
    double miss = static_cast<double>(missed.size()) / denom;
    miss_sum += miss;
    miss_sq += miss * miss;
    fa_sum += static_cast<double>(extra.size()) / denom;
    ms_sum += r.decode_ms;
    for (auto c : r.slot_converged)
      if (!c) ++s.nonconverged_slots;
  }
  double nt = static_cast<double>(s.trials);
  s.pe = wrong / nt;
  // Wilson 95% half-width
  const double z = 1.959963984540054;
  double z2n = z * z / nt;
  s.pe_ci95 = (z / (1.0 + z2n)) * std::sqrt(s.pe * (1.0 - s.pe) / nt + z2n / (4.0 * nt));
  s.missed_rate = miss_sum / nt;
  double var = std::max(miss_sq / nt - s.missed_rate * s.missed_rate, 0.0);
  s.missed_ci95 = nt > 1 ? z * std::sqrt(var / (nt - 1.0)) : 0.0;
  s.false_alarm_rate = fa_sum / nt;
  s.mean_decode_ms = ms_sum / nt;
  return s;
}

// Runs every SNR point of the sweep. Trials fan out over `threads` workers;
// per-trial seeds depend only on (master_seed, snr_index, trial_index), and
// aggregation happens in trial order, so the result is identical for any
// worker count. `progress`, when given, fires after each finished SNR point.
inline std::vector<ErrorStats> run_experiment(
    const ExperimentConfig& cfg, int threads = 1,
    const std::function<void(const ErrorStats&)>& progress = {}) {
  cfg.validate();
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: need at least one trial");
  if (threads < 1) threads = 1;
  ExperimentContext ctx = make_context(cfg);

  std::vector<ErrorStats> out;
  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    std::vector<TrialResult> results(cfg.trials);
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        int t = next.fetch_add(1);
        if (t >= cfg.trials) return;
        results[t] = run_trial(cfg, ctx, static_cast<int>(si), t);
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    ErrorStats stats = compute_stats(results);
    stats.snr_db = cfg.snr_db[si];
    if (progress) progress(stats);
    out.push_back(stats);
  }
  return out;
}

}  // namespace ccs
