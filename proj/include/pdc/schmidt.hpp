#pragma once

#include <vector>

#include "pdc/params.hpp"

namespace pdc {

// K = sqrt((1+t_o^2)(1+t_e^2)) / |t_o - t_e|, always >= 1.
double schmidt_number(const PdcParams& params);

// Symmetric GVM (t_e = -t_o): K = (1/t_o + t_o)/2, minimum 1 at t_o = 1.
double k_symmetric(double t_o);

// Symmetric GVM: 1/C = |1/t_o - t_o| / 4, zero at t_o = 1.
double inv_coherence_symmetric(double t_o);

// K from the degree of global coherence: K = sqrt(1 + 4/c^2).
double k_from_c(double c);

struct SchmidtSpectrum {
    double k_number = 1;         // Schmidt number K
    double q = 0;                // sqrt((K-1)/(K+1)), in [0,1)
    std::vector<double> lambdas; // lambda_n = 2/(K+1) * q^(2n), n = 0..n_max
    double tau1 = 0, tau2 = 0;   // mode time scales (ps)
    int n_max = 0;
};

SchmidtSpectrum schmidt_spectrum(const PdcParams& params, int n_max);

// Smallest n_max with cumulative lambda tail below `tail`.
int default_n_max(double k_number, double tail = 1e-6);

enum class Wave { ordinary, extraordinary };

// Normalized Hermite-Gauss function h_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)),
// evaluated by the normalized three-term recurrence (no overflow at large n).
double hermite_gauss(int n, double x);

// Schmidt modal function psi_n(t) = h_n(t/tau)/sqrt(tau) with tau = tau1
// (ordinary) or tau2 (extraordinary). Units ps^-1/2.
double mode_function(const SchmidtSpectrum& s, int n, double t, Wave which);

// Mercer expansion sum_n lambda_n psi_n(t) psi_n(t+tau), truncated at n_max.
// Converges to sqrt(I(t) I(t+tau)) * g1(tau) with I the normalized intensity.
double mercer_g1(const SchmidtSpectrum& s, double t, double tau);

} // namespace pdc
