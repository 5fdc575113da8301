#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "pdc/gaussian.hpp"

namespace pdc {

struct ExperimentConfig {
    GaussianBiphoton biphoton;
    double mean_pairs = 0.1;          // mu per pulse, plays the role of P_b
    double magnification = 1000.0;    // temporal magnification M
    double repetition_rate_mhz = 10.0;
    std::uint64_t n_pulses = 0;
    double jitter_sigma_ps = 0.0;     // post-magnification detector jitter
    double herald_efficiency = 1.0;   // D3 bucket efficiency
    std::uint64_t seed = 1;
    int n_threads = 1;

    double period_ns() const { return 1000.0 / repetition_rate_mhz; }
};

// Throws ConfigInvalid on out-of-range settings (mu cap 0.3, pulse-separation
// sanity, etc.).
void validate(const ExperimentConfig& cfg);

enum class Detector : std::uint8_t { d1 = 1, d2 = 2, d3 = 3 };

struct Click {
    std::uint64_t pulse = 0;
    Detector det = Detector::d1;
    // Absolute time for D1/D2. D3 is a bucket with no time resolution; the
    // stored value is the pulse epoch, used only for ordering.
    double time_ns = 0;
};

struct PairCounters {
    std::uint64_t zero = 0, one = 0, two = 0, three_plus = 0;
};

struct DetectionRecord {
    std::vector<Click> clicks; // sorted by time (epoch for D3), then detector
    ExperimentConfig truth;
    PairCounters counters;
};

// Counter-based per-pulse random stream: the state is a hash of
// (seed, pulse_index), so any partition of pulses across workers reproduces
// the identical record.
class PulseRng {
public:
    PulseRng(std::uint64_t seed, std::uint64_t pulse);
    std::uint64_t next_u64();
    double next_double(); // [0, 1)
    double next_open();   // (0, 1)
    double next_normal(); // Box-Muller, two uniforms per call

private:
    std::uint64_t state_;
};

// Per-pulse generator: compound per-mode geometric pair count (mode n has
// mean mu * lambda_n) and ordinary-photon times with the full exchange
// (permanent) weighting; the m = 2 case reduces to accepting an independent
// proposal with probability (1 + exp(-tau^2/dtau_o^2))/2.
class PulseSampler {
public:
    explicit PulseSampler(const ExperimentConfig& cfg);

    // Returns ordinary-photon times (ps, pulse-local) and the herald flag.
    std::pair<std::vector<double>, bool> sample_pulse(PulseRng& rng) const;

    int n_modes() const { return static_cast<int>(p_mode_.size()); }

private:
    double delta_t_o_;
    double delta_tau_o_;
    double herald_efficiency_;
    std::vector<double> p_mode_; // per-mode geometric parameter mu_n/(1+mu_n)
};

// Routes photons through the balanced splitter, applies magnification and
// jitter, latches the earliest photon per detector, records the herald.
void detect(const std::vector<double>& ordinary_times_ps, bool herald,
            std::uint64_t pulse, PulseRng& rng, const ExperimentConfig& cfg,
            std::vector<Click>& out);

// Runs n_pulses pulses, cfg.n_threads workers. Deterministic given the seed;
// output is bit-identical for any worker count.
DetectionRecord run_experiment(const ExperimentConfig& cfg);

// CSV record with header, times printed with 17 significant digits.
void write_record_csv(const DetectionRecord& rec, std::ostream& os);

// Reads a record CSV back; truth must be supplied from the config sidecar.
DetectionRecord read_record_csv(std::istream& is, const ExperimentConfig& truth);

} // namespace pdc
