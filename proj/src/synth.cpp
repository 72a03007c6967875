#include "fuzzyattn/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "fuzzyattn/hashing.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace fuzzyattn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'T', 'R', 'I', 'A', 'L', '0', '1'};

json gen_to_json(const GenConfig& g) {
  return json{{"amplitude", g.amplitude},
              {"amplitude_shift", g.amplitude_shift},
              {"jitter_sd", g.jitter_sd},
              {"noise_sd", g.noise_sd},
              {"hbr_ratio", g.hbr_ratio},
              {"couple_h1", g.couple_h1},
              {"couple_h0", g.couple_h0},
              {"drift_amplitude", g.drift_amplitude},
              {"onset_s", g.onset_s},
              {"window_seconds", g.window_seconds},
              {"active_sites", g.active_sites}};
}

GenConfig gen_from_json(const json& j) {
  GenConfig g;
  g.amplitude = j.at("amplitude").get<double>();
  g.amplitude_shift = j.at("amplitude_shift").get<double>();
  g.jitter_sd = j.at("jitter_sd").get<double>();
  g.noise_sd = j.at("noise_sd").get<double>();
  g.hbr_ratio = j.at("hbr_ratio").get<double>();
  g.couple_h1 = j.at("couple_h1").get<double>();
  g.couple_h0 = j.at("couple_h0").get<double>();
  g.drift_amplitude = j.at("drift_amplitude").get<double>();
  g.onset_s = j.at("onset_s").get<double>();
  g.window_seconds = j.at("window_seconds").get<double>();
  g.active_sites = j.at("active_sites").get<std::vector<int>>();
  return g;
}

constexpr double kDriftFreqsHz[3] = {0.02, 0.05, 0.09};
constexpr double kDriftWeights[3] = {1.0, 0.6, 0.35};

double hrf_raw(double t) {
  if (t <= 0.0) return 0.0;
  // gamma(k, theta=1) densities with the lgamma in log space
  auto gamma_pdf = [](double x, double k) {
    return std::exp((k - 1.0) * std::log(x) - x - std::lgamma(k));
  };
  return gamma_pdf(t, 6.0) - gamma_pdf(t, 16.0) / 6.0;
}

double hrf_peak_value() {
  static const double peak = [] {
    double best = 0.0;
    for (double t = 0.0; t <= 35.0; t += 1e-3) best = std::max(best, hrf_raw(t));
    return best;
  }();
  return peak;
}

}  // namespace

std::string ChannelLayout::region(int site) {
  if (site < 1 || site > kSites) {
    throw ContractError("ChannelLayout::region: site " + std::to_string(site) +
                        " outside [1, " + std::to_string(kSites) + "]");
  }
  // left hemisphere sites 1-11, right 12-20
  if (site <= 3) return "lPFC L";
  if (site <= 6) return "vmPFC L";
  if (site <= 10) return "dlPFC L";
  if (site == 11) return "FPA L";
  if (site <= 14) return "lPFC R";
  if (site <= 16) return "dlPFC R";
  if (site <= 18) return "vmPFC R";
  return "FPA R";
}

std::string ChannelLayout::feature_name(int feature) {
  if (feature < 0 || feature >= kFeatures) {
    throw ContractError("ChannelLayout::feature_name: feature " +
                        std::to_string(feature) + " outside [0, " +
                        std::to_string(kFeatures) + ")");
  }
  const int site = site_of(feature);
  return std::string("CH") + std::to_string(site) +
         (is_hbo(feature) ? "-HbO (" : "-HbR (") + region(site) + ")";
}

void GenConfig::validate() const {
  if (active_sites.empty()) throw ContractError("GenConfig: no active sites");
  for (int site : active_sites) {
    if (site < 1 || site > ChannelLayout::kSites) {
      throw ContractError("GenConfig: active site " + std::to_string(site) +
                          " outside [1, " + std::to_string(ChannelLayout::kSites) + "]");
    }
  }
  if (amplitude < 0.0 || noise_sd < 0.0 || jitter_sd < 0.0 ||
      drift_amplitude < 0.0 || amplitude_shift < 0.0) {
    throw ContractError("GenConfig: amplitudes and deviations must be >= 0");
  }
  if (couple_h0 < -1.0 || couple_h0 > 1.0 || couple_h1 < -1.0 || couple_h1 > 1.0) {
    throw ContractError("GenConfig: coupling must lie in [-1, 1]");
  }
  if (hbr_ratio < 0.0) throw ContractError("GenConfig: hbr_ratio must be >= 0");
  if (window_seconds <= 0.0) throw ContractError("GenConfig: window must be positive");
}

std::vector<int> GenConfig::active_features() const {
  std::vector<int> features;
  for (int site : active_sites) features.push_back(ChannelLayout::hbo_feature(site));
  for (int site : active_sites) features.push_back(ChannelLayout::hbr_feature(site));
  return features;
}

std::int64_t TrialSet::t_samples() const { return window_samples(gen.window_seconds); }

std::vector<int> TrialSet::labels() const {
  std::vector<int> out;
  out.reserve(trials.size());
  for (const Trial& t : trials) out.push_back(t.label);
  return out;
}

std::int64_t window_samples(double window_seconds) {
  return static_cast<std::int64_t>(
      std::llround(window_seconds * ChannelLayout::kSampleRateHz));
}

double canonical_hrf(double t_seconds) {
  if (t_seconds < 0.0) {
    throw ContractError("canonical_hrf: negative time");
  }
  return hrf_raw(t_seconds) / hrf_peak_value();
}

Trial generate_dyad_trial(CounterRng& rng, int condition, const GenConfig& config) {
  config.validate();
  if (condition != 0 && condition != 1) {
    throw ContractError("generate_dyad_trial: condition must be 0 or 1");
  }
  const std::int64_t t_count = window_samples(config.window_seconds);
  const int features = ChannelLayout::kFeatures;
  const double rho = condition == 1 ? config.couple_h1 : config.couple_h0;

  // participant amplitude jitters with correlation rho
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  const double jitter[2] = {
      config.jitter_sd * z0,
      config.jitter_sd * (rho * z0 + std::sqrt(1.0 - rho * rho) * z1)};

  // drift phases, fixed draw order: dyad-shared first, then per participant
  std::vector<double> shared_phases(features * 3);
  for (double& p : shared_phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(2 * features * 3);
  for (double& p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

  const double base_amp = config.amplitude + config.amplitude_shift * condition;
  std::vector<char> is_active(static_cast<size_t>(features), 0);
  std::vector<double> response_scale(static_cast<size_t>(features), 0.0);
  for (int site : config.active_sites) {
    is_active[static_cast<size_t>(ChannelLayout::hbo_feature(site))] = 1;
    is_active[static_cast<size_t>(ChannelLayout::hbr_feature(site))] = 1;
    response_scale[static_cast<size_t>(ChannelLayout::hbo_feature(site))] = 1.0;
    response_scale[static_cast<size_t>(ChannelLayout::hbr_feature(site))] =
        -config.hbr_ratio;
  }

  Trial trial;
  trial.label = condition;
  trial.d1 = Tensor::zeros({features, t_count});
  trial.d2 = Tensor::zeros({features, t_count});
  Tensor* streams[2] = {&trial.d1, &trial.d2};

  const double shared_w = std::sqrt(std::max(rho, 0.0));
  const double own_w = std::sqrt(1.0 - std::max(rho, 0.0));
  for (int f = 0; f < features; ++f) {
    for (std::int64_t ti = 0; ti < t_count; ++ti) {
      const double t_s = static_cast<double>(ti) / ChannelLayout::kSampleRateHz;
      const double rel = t_s - config.onset_s;
      const double hrf = rel >= 0.0 ? canonical_hrf(rel) : 0.0;

      double noise[2];
      if (is_active[static_cast<size_t>(f)]) {
        const double shared = rng.normal();
        const double own1 = rng.normal();
        const double own2 = rng.normal();
        noise[0] = config.noise_sd * (shared_w * shared + own_w * own1);
        noise[1] = config.noise_sd * (shared_w * shared + own_w * own2);
      } else {
        noise[0] = config.noise_sd * rng.normal();
        noise[1] = config.noise_sd * rng.normal();
      }

      for (int p = 0; p < 2; ++p) {
        // drift mixes a dyad-shared process with a personal one; the mix
        // keeps the marginal variance fixed while the shared fraction rho
        // makes the pair's slow dynamics co-vary under coupling
        double drift = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double arg = 2.0 * std::numbers::pi * kDriftFreqsHz[c] * t_s;
          const double shared =
              std::sin(arg + shared_phases[static_cast<size_t>(f * 3 + c)]);
          const double own =
              std::sin(arg + phases[static_cast<size_t>((p * features + f) * 3 + c)]);
          drift += config.drift_amplitude * kDriftWeights[c] *
                   (shared_w * shared + own_w * own);
        }
        const double amp = base_amp * (1.0 + jitter[p]);
        const double signal = response_scale[static_cast<size_t>(f)] * amp * hrf;
        streams[p]->data()[static_cast<size_t>(f * t_count + ti)] =
            signal + drift + noise[p];
      }
    }
  }
  return trial;
}

TrialSet build_dataset(std::uint64_t seed, int n_dyads, int trials_per_condition,
                       const GenConfig& config) {
  if (n_dyads < 1 || trials_per_condition < 1) {
    throw ContractError("build_dataset: counts must be >= 1");
  }
  config.validate();

  TrialSet set;
  set.gen = config;
  set.seed = seed;
  const CounterRng root(seed);
  int index = 0;
  for (int dyad = 0; dyad < n_dyads; ++dyad) {
    const std::string relationship = dyad % 2 == 0 ? "friend" : "stranger";
    for (int condition = 0; condition < 2; ++condition) {
      for (int k = 0; k < trials_per_condition; ++k) {
        CounterRng rng = root.substream("trial", static_cast<std::uint64_t>(index));
        Trial trial = generate_dyad_trial(rng, condition, config);
        trial.dyad = dyad;
        trial.trial_id = index;
        trial.image_type = k % 2 == 0 ? "negative" : "neutral";
        trial.relationship = relationship;
        set.trials.push_back(std::move(trial));
        ++index;
      }
    }
  }
  return set;
}

std::pair<Tensor, Tensor> orient(const Trial& trial, InputStructure structure) {
  if (structure == InputStructure::kChannelFirst) {
    return {Tensor::from_vector(trial.d1.shape(), trial.d1.data()),
            Tensor::from_vector(trial.d2.shape(), trial.d2.data())};
  }
  return {transpose(trial.d1), transpose(trial.d2)};
}

void write_ftrial(const std::string& path, const TrialSet& set) {
  const std::int64_t t_count = set.t_samples();
  const std::int64_t per_stream = ChannelLayout::kFeatures * t_count;
  const std::int64_t bytes_per_trial = 2 * per_stream * 4;

  json header;
  header["format"] = "FTRIAL";
  header["version"] = 1;
  header["seed"] = set.seed;
  const std::string gen_text = gen_to_json(set.gen).dump();
  header["config_hash"] = hash_hex(fnv1a_bytes(gen_text.data(), gen_text.size()));
  header["sample_rate_hz"] = ChannelLayout::kSampleRateHz;
  header["window_seconds"] = set.gen.window_seconds;
  header["t_samples"] = t_count;
  header["n_features"] = ChannelLayout::kFeatures;
  header["gen_config"] = gen_to_json(set.gen);
  json manifest = json::array();
  std::int64_t offset = 0;
  for (const Trial& t : set.trials) {
    manifest.push_back(json{{"dyad", t.dyad},
                            {"trial", t.trial_id},
                            {"label", t.label},
                            {"image_type", t.image_type},
                            {"relationship", t.relationship},
                            {"offset", offset},
                            {"bytes", bytes_per_trial}});
    offset += bytes_per_trial;
  }
  header["trials"] = std::move(manifest);

  const std::string header_text = header.dump();
  if (header_text.size() > 0xffffffffULL) {
    throw ContractError("write_ftrial: header too large");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("write_ftrial: cannot open '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  std::vector<float> buffer(static_cast<size_t>(per_stream));
  for (const Trial& t : set.trials) {
    for (const Tensor* stream : {&t.d1, &t.d2}) {
      const auto& values = stream->data();
      for (size_t i = 0; i < buffer.size(); ++i)
        buffer[i] = static_cast<float>(values[i]);
      out.write(reinterpret_cast<const char*>(buffer.data()),
                static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    }
  }
  if (!out) throw ContractError("write_ftrial: write failed for '" + path + "'");
}

TrialSet read_ftrial(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("read_ftrial: cannot open '" + path + "'");

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ContractError("read_ftrial: '" + path + "' is not an FTRIAL v1 file");
  }
  std::uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw ContractError("read_ftrial: truncated header length");

  in.seekg(0, std::ios::end);
  const std::int64_t file_size = static_cast<std::int64_t>(in.tellg());
  if (static_cast<std::int64_t>(header_len) + 12 > file_size) {
    throw ContractError("read_ftrial: header length exceeds file size");
  }
  in.seekg(12, std::ios::beg);

  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) throw ContractError("read_ftrial: truncated header");
  json header = json::parse(header_text);
  if (header.at("format") != "FTRIAL" || header.at("version") != 1) {
    throw ContractError("read_ftrial: unsupported format/version");
  }

  TrialSet set;
  set.seed = header.at("seed").get<std::uint64_t>();
  set.gen = gen_from_json(header.at("gen_config"));
  const std::int64_t t_count = header.at("t_samples").get<std::int64_t>();
  if (t_count != set.t_samples()) {
    throw ContractError("read_ftrial: t_samples does not match window");
  }
  const std::int64_t per_stream = ChannelLayout::kFeatures * t_count;
  const std::int64_t data_start = 12 + static_cast<std::int64_t>(header_len);

  std::vector<float> buffer(static_cast<size_t>(per_stream));
  for (const json& meta : header.at("trials")) {
    Trial trial;
    trial.dyad = meta.at("dyad").get<int>();
    trial.trial_id = meta.at("trial").get<int>();
    trial.label = meta.at("label").get<int>();
    trial.image_type = meta.at("image_type").get<std::string>();
    trial.relationship = meta.at("relationship").get<std::string>();
    const std::int64_t offset = meta.at("offset").get<std::int64_t>();
    const std::int64_t bytes = meta.at("bytes").get<std::int64_t>();
    if (bytes != 2 * per_stream * 4 || data_start + offset + bytes > file_size) {
      throw ContractError("read_ftrial: trial record out of bounds");
    }
    in.seekg(data_start + offset, std::ios::beg);
    for (Tensor* stream : {&trial.d1, &trial.d2}) {
      *stream = Tensor::zeros({ChannelLayout::kFeatures, t_count});
      in.read(reinterpret_cast<char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
      if (!in) throw ContractError("read_ftrial: truncated trial data");
      for (size_t i = 0; i < buffer.size(); ++i)
        stream->data()[i] = static_cast<double>(buffer[i]);
    }
    set.trials.push_back(std::move(trial));
  }
  return set;
}

double probe_accuracy(const TrialSet& set) {
  if (set.trials.empty()) throw ContractError("probe_accuracy: empty corpus");
  const std::vector<int> features = set.gen.active_features();
  const std::int64_t t_count = set.t_samples();

  std::vector<double> x(set.trials.size());
  std::vector<int> y(set.trials.size());
  for (size_t i = 0; i < set.trials.size(); ++i) {
    const Trial& t = set.trials[i];
    double acc = 0.0;
    for (const Tensor* stream : {&t.d1, &t.d2}) {
      for (int f : features) {
        // HbR responses are negative; fold them in with their sign
        const double sign = ChannelLayout::is_hbo(f) ? 1.0 : -1.0;
        for (std::int64_t ti = 0; ti < t_count; ++ti)
          acc += sign * stream->data()[static_cast<size_t>(f * t_count + ti)];
      }
    }
    x[i] = acc / static_cast<double>(2 * features.size() * t_count);
    y[i] = t.label;
  }

  // standardize, then a few Newton steps of 1-D logistic regression
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double sd = std::sqrt(std::max(var, 1e-12));
  for (double& v : x) v = (v - mean) / sd;

  double w = 0.0, b = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    double gw = 0.0, gb = 0.0, hww = 0.0, hwb = 0.0, hbb = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(w * x[i] + b)));
      const double r = p - static_cast<double>(y[i]);
      gw += r * x[i];
      gb += r;
      const double q = p * (1.0 - p);
      hww += q * x[i] * x[i];
      hwb += q * x[i];
      hbb += q;
    }
    const double det = hww * hbb - hwb * hwb;
    if (std::abs(det) < 1e-12) break;
    const double dw = (hbb * gw - hwb * gb) / det;
    const double db = (hww * gb - hwb * gw) / det;
    w -= dw;
    b -= db;
    if (std::abs(dw) + std::abs(db) < 1e-10) break;
  }

  std::int64_t correct = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const int pred = w * x[i] + b >= 0.0 ? 1 : 0;
    if (pred == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

}  // namespace fuzzyattn
