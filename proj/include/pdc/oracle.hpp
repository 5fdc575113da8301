#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include "pdc/gaussian.hpp"
#include "pdc/params.hpp"
#include "pdc/schmidt.hpp"

namespace pdc {

// Uniform 2-D sample grid. Frequency axes in rad/ps, time axes in ps.
// Row-major: values[i * n2 + j] is the sample at (axis1[i], axis2[j]).
struct Grid2D {
    int n1 = 0, n2 = 0;
    double step1 = 0, step2 = 0;
    std::vector<double> axis1, axis2;
    std::vector<std::complex<double>> values;

    std::complex<double> at(int i, int j) const {
        return values[static_cast<size_t>(i) * n2 + j];
    }
    std::complex<double>& at(int i, int j) {
        return values[static_cast<size_t>(i) * n2 + j];
    }
};

// Discretized JSA with the sinc phase-matching factor, peak 1 at the origin.
// Auto-sized grid: step resolves the ridge cross-section (4 samples per
// conditional sigma); the Gaussian envelope must decay below 1e-8 of the peak
// at the grid boundary, else GridTooCoarse.
Grid2D jsa_sinc(const PdcParams& params, int n);

// Same grid with the Gaussian e^{-x^2/2 sigma_s^2} replacement of sinc(x).
Grid2D jsa_gaussian(const PdcParams& params, int n);

struct SvdSchmidt {
    double k_num = 1;              // 1 / sum s_n^4 with sum s_n^2 = 1
    std::vector<double> singulars; // normalized singular values
};

// SVD Schmidt analysis of a sampled amplitude, scaled by sqrt(step1*step2)
// so singular values approximate the continuous decomposition.
SvdSchmidt svd_schmidt(const Grid2D& g);

// 2-D Fourier transform to the time domain with the e^{-i Omega t} convention
// and 1/(2 pi)^2 measure.
Grid2D jta_numeric(const Grid2D& jsa);

// Quadrature of int J*(t, t') J(t+tau, t') dt' on a sampled JTA.
std::complex<double> g1_numeric(const Grid2D& jta, double t, double tau);

struct GaussIntegralCheck {
    double closed = 0;
    std::complex<double> numeric;
    double residual = 0; // |closed - numeric| / |closed|
};

// Closed-form 2-D Gaussian integral with linear phase vs adaptive quadrature.
// lam = {l11, l22, l12} symmetric positive definite, v = phase vector.
GaussIntegralCheck verify_gaussian_integral(const std::array<double, 3>& lam,
                                            const std::array<double, 2>& v);

// Sup-norm deviation of the truncated Schmidt sum
// sum_{n<=n_max} sqrt(lambda_n) psi_n(t) phi_n(t') from the normalized
// double-Gaussian JTA (unit Hilbert-Schmidt norm).
double mehler_check(const SchmidtSpectrum& s, const GaussianBiphoton& b,
                    int n_max);

// Row-major CSV with axes metadata in the header.
void dump_csv(const Grid2D& g, std::ostream& os);

} // namespace pdc
