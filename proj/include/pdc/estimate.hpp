#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pdc/simulate.hpp"

namespace pdc {

struct Curve {
    std::vector<double> tau_ns;
    std::vector<double> value;
    std::vector<double> stderr_; // binomial propagation on the coincidences
};

struct Hist {
    double bin_width_ns = 0;
    std::vector<double> center_ns;
    std::vector<std::uint64_t> counts;
};

struct IntegratedG2 {
    double g2_int = 0;
    double k_est = 0;       // 1/(g2_int - 1); +inf when degenerate
    bool degenerate = false; // g2_int <= 1: unbounded-K signal
};

struct EstimateReport {
    Hist intensity_hist;
    Curve g2_curve;    // tau from -period to +2 periods (next-pulse branch)
    Curve g2_sh_curve; // single-heralded
    Curve g2_dh_curve; // double-heralded

    double delta_t_m_ns = 0;   // fitted arrival-time std dev, jitter deconvolved
    double delta_tau_m_ns = 0; // fitted std dev of g2 - baseline, jitter deconvolved
    double c_est = 0;          // sqrt(2) delta_tau_m / delta_t_m
    double k_est_from_c = 0;   // sqrt(1 + 4/c_est^2)
    double g2_zero_fit = 0;    // baseline-normalized fitted peak (b + a)/b

    double se_delta_t_m = 0;
    double se_delta_tau_m = 0;
    double se_c_est = 0;
    double se_g2_zero = 0;

    double g2_int = 0;
    double k_est_from_g2int = 0;
    bool g2_int_degenerate = false;

    double fit_residual_intensity = 0; // rms residual of the histogram fit
    double fit_residual_g2 = 0;        // rms residual of the g2 fit
};

// Count-ratio estimator N12 N / (N1 N2), accumulated per absolute-time bin
// and summed over bins; the same-pulse branch covers |tau| < period and the
// next-pulse branch tau in (0, 2 periods). Empty tau_grid returns every
// internal bin; otherwise values at the nearest internal bins.
Curve g2_from_counts(const DetectionRecord& rec, double window_ns,
                     const std::vector<double>& tau_grid = {});

// Heralded variants: sh = N12h N / (N1h N2), dh = N12h Nh / (N1h N2h).
// Interval 2 falls in the next pump period on the cross-period branch.
std::pair<Curve, Curve> heralded_g2_from_counts(
    const DetectionRecord& rec, double window_ns,
    const std::vector<double>& tau_grid = {});

// Whole-pulse time-integrated ratio and K = 1/(g2_int - 1).
IntegratedG2 g2_integrated(const DetectionRecord& rec);

// Full pipeline: histograms, curves, Gaussian fits, C and K inference.
// window_ns = 0 selects the default repetition period / 200.
EstimateReport fit_report(const DetectionRecord& rec, double window_ns = 0);

// Drops each click independently with probability (1 - keep_prob).
DetectionRecord thin_record(const DetectionRecord& rec, double keep_prob,
                            std::uint64_t seed);

// Concatenates two records over disjoint pulse ranges of the same experiment.
DetectionRecord merge_records(const DetectionRecord& a, const DetectionRecord& b);

void write_curve_csv(const Curve& c, std::ostream& os);
void write_report_json(const EstimateReport& r, std::ostream& os);

} // namespace pdc
