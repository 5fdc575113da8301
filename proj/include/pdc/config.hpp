#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pdc/simulate.hpp"

namespace pdc {

// Batch-run configuration, mirroring PdcParams + ExperimentConfig + estimator
// settings. Schema-validated JSON: unknown keys are rejected, defaults are
// explicit in the emitted resolved copy.
struct RunConfig {
    int schema_version = 1;
    std::string preset = "ppktp-30ps"; // "" means explicit params below

    double pump_fwhm_ps = 30.0;
    double tau_o_ps = 2.95;
    double tau_e_ps = -2.95;
    double sigma_s = 1.61;
    double crystal_length_mm = 40.0;
    double poling_period_um = 47.6;

    double mean_pairs = 0.1;
    double magnification = 1000.0;
    double repetition_rate_mhz = 10.0;
    std::uint64_t n_pulses = 1000000;
    double jitter_sigma_ps = 0.0;
    double herald_efficiency = 1.0;
    std::uint64_t seed = 1;
    int threads = 1;

    double window_ns = 0.0; // 0 = repetition period / 200

    int grid_n = 512;

    double sweep_min_ps = 0.3;
    double sweep_max_ps = 30.0;
    int sweep_points = 121;

    std::string format = "csv"; // csv | json

    PdcParams params() const;
    ExperimentConfig experiment() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig config_from_file(const std::string& path);
std::string config_to_json_text(const RunConfig& cfg);
void write_resolved_config(const RunConfig& cfg, std::ostream& os);

} // namespace pdc
