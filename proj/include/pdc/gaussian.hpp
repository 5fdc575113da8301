#pragma once

#include "pdc/params.hpp"

namespace pdc {

// Double-Gaussian joint temporal amplitude and every closed-form quantity
// derived from it. Coupling prefactor gamma*L*alpha0 is factored out
// throughout: *_shape fields are the corresponding expressions with that
// factor set to 1.
struct GaussianBiphoton {
    PdcParams params;

    // JTA exponent matrix M (ps^-2), JTA = exp(-m11 t^2 - m22 t'^2 - 2 m12 t t')
    double m11 = 0, m22 = 0, m12 = 0;
    // JSA exponent matrix Lambda (ps^2); M = Lambda^-1 / 2
    double lam11 = 0, lam22 = 0, lam12 = 0;

    double delta_t_o = 0;       // intensity std dev (ps)
    double delta_tau_o = 0;     // coherence time (ps)
    double coherence_c = 0;     // degree of global coherence
    double pair_prob_shape = 0; // P_b / (gamma L alpha0)^2 = omega_p^2 / (2 pi |t_e - t_o|)
    double j1_shape = 0;        // JTA prefactor / (gamma L alpha0) = omega_p^2 / (pi |t_o - t_e|)
};

GaussianBiphoton build_biphoton(const PdcParams& params);

// JTA in relative units, 1 at the origin.
double jta(const GaussianBiphoton& b, double t, double t_prime);

// Normalized intensity density (ps^-1): Gaussian, mean 0, std dev delta_t_o.
// Physical flux is P_b times this density.
double intensity(const GaussianBiphoton& b, double t);

// |g1(tau)| = exp(-tau^2 / 2 delta_tau_o^2).
double g1_normalized(const GaussianBiphoton& b, double tau);

// g2(tau) = 1 + g1(tau)^2.
double g2(const GaussianBiphoton& b, double tau);

// g2 after temporal magnification m: g2(tau/m).
double g2_magnified(const GaussianBiphoton& b, double m, double tau);

struct HeraldedG2 {
    double sh = 1; // single-heralded
    double dh = 1; // double-heralded
};

// Closed forms for the single- and double-heralded autocorrelation functions
// at pair probability p_b. Outside the heralding period both equal 1.
HeraldedG2 heralded_g2(const GaussianBiphoton& b, double p_b, double tau,
                       bool in_same_period);

// 1 + 1/p_b in the heralding period, 1 outside.
double integrated_cross_correlation(double p_b, bool in_same_period);

struct Feasibility {
    double n_out = 0;          // expected events outside the fit sigma-area
    double max_rep_rate_mhz = 0; // same-pulse pairing bound on the repetition rate
};

Feasibility feasibility(const GaussianBiphoton& b, double n_events, double m);

struct ImagingSystem {
    double d_in = 0, d_out = 0, d_f = 0; // group delay dispersion (ps^2)
    double magnification = 0;            // -d_out/d_in
};

// Verifies 1/d_in + 1/d_out = 1/d_f within tol (relative) and returns the
// magnification. Throws ZeroDispersion, ImagingConditionViolated.
ImagingSystem check_imaging(double d_in, double d_out, double d_f,
                            double tol = 1e-9);

} // namespace pdc
