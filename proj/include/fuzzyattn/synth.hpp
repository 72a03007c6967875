// Synthetic paired two-stream corpus. Trials carry an HRF-shaped response on
// a small set of active sites, physiological HbO/HbR anti-correlation, slow
// drift and white noise. The positive condition strengthens the response on
// the active sites and couples the two participants' jitter and noise, so a
// classifier has a marginal cue to learn and the synchrony analysis has a
// joint cue to detect.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuzzyattn/encoder.hpp"
#include "fuzzyattn/rng.hpp"
#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

struct ChannelLayout {
  static constexpr int kSites = 20;
  static constexpr int kFeatures = 40;  // HbO sites then HbR sites
  static constexpr double kSampleRateHz = 7.8125;

  // feature 0..19 -> HbO site f+1; feature 20..39 -> HbR site f-19
  static bool is_hbo(int feature) { return feature < kSites; }
  static int site_of(int feature) {
    return is_hbo(feature) ? feature + 1 : feature - kSites + 1;
  }
  static int hbo_feature(int site) { return site - 1; }
  static int hbr_feature(int site) { return site - 1 + kSites; }

  static std::string region(int site);        // 1-based site
  static std::string feature_name(int feature);  // 0-based feature
};

struct GenConfig {
  double amplitude = 1.0;        // HRF peak height on active HbO sites
  double amplitude_shift = 0.5;  // added under the positive condition
  double jitter_sd = 0.08;       // per-participant amplitude jitter
  double noise_sd = 0.3;         // white noise on every feature
  double hbr_ratio = 0.5;        // HbR response = -ratio * HbO response
  double couple_h1 = 0.7;        // jitter/noise correlation, positive trials
  double couple_h0 = 0.2;        // jitter/noise correlation, negative trials
  double drift_amplitude = 0.15;
  double onset_s = 0.0;
  double window_seconds = 11.0;
  std::vector<int> active_sites = {5, 11};  // 1-based; HbR pairs follow

  void validate() const;  // throws ContractError
  std::vector<int> active_features() const;  // HbO then HbR, 0-based
};

struct Trial {
  Tensor d1, d2;  // [features, t_samples], feature-major
  int label = 0;  // 1 = coupled condition
  std::string image_type;    // negative | neutral
  std::string relationship;  // friend | stranger
  int dyad = 0;
  int trial_id = 0;
};

struct TrialSet {
  std::vector<Trial> trials;
  GenConfig gen;
  std::uint64_t seed = 0;

  std::int64_t t_samples() const;
  std::vector<int> labels() const;
};

// Number of samples in a window: round(seconds * 7.8125 Hz), half up.
std::int64_t window_samples(double window_seconds);

// Canonical biphasic impulse response (difference of two gamma densities,
// shape 6 and 16, unit scale), normalized so the peak equals 1. Zero at t=0,
// peak near 5 s, negative undershoot afterwards.
double canonical_hrf(double t_seconds);

Trial generate_dyad_trial(CounterRng& rng, int condition, const GenConfig& config);

// Balanced corpus: n_dyads * 2 conditions * trials_per_condition trials, with
// image type and relationship metadata cycled deterministically.
TrialSet build_dataset(std::uint64_t seed, int n_dyads, int trials_per_condition,
                       const GenConfig& config = GenConfig{});

// Channel-first keeps [features, t]; time-first transposes to [t, features].
std::pair<Tensor, Tensor> orient(const Trial& trial, InputStructure structure);

// Binary file format "FTRIAL v1": magic "FTRIAL01", little-endian u32 JSON
// header length, JSON header, then per-trial raw float32 data (d1 then d2,
// feature-major).
void write_ftrial(const std::string& path, const TrialSet& set);
TrialSet read_ftrial(const std::string& path);

// In-sample accuracy of a one-feature logistic fit on the mean active-site
// amplitude. Confirms the planted effect is recoverable before any encoder
// is involved.
double probe_accuracy(const TrialSet& set);

}  // namespace fuzzyattn
