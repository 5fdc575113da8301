#include "pdc/schmidt.hpp"

#include <cmath>
#include <numbers>

#include "pdc/errors.hpp"

namespace pdc {

double schmidt_number(const PdcParams& p) {
    const double to = p.t_o, te = p.t_e;
    return std::sqrt((1.0 + to * to) * (1.0 + te * te)) / std::abs(to - te);
}

double k_symmetric(double t_o) {
    if (!(t_o > 0)) throw NonPositiveInput("t_o must be > 0");
    return 0.5 * (1.0 / t_o + t_o);
}

double inv_coherence_symmetric(double t_o) {
    if (!(t_o > 0)) throw NonPositiveInput("t_o must be > 0");
    return 0.25 * std::abs(1.0 / t_o - t_o);
}

double k_from_c(double c) {
    if (!(c > 0)) throw NonPositiveInput("c must be > 0");
    return std::sqrt(1.0 + 4.0 / (c * c));
}

int default_n_max(double k_number, double tail) {
    // lambda tail after n_max is ((K-1)/(K+1))^(n_max+1)
    const double q2 = (k_number - 1.0) / (k_number + 1.0);
    if (q2 <= 0) return 0;
    const int n = static_cast<int>(std::ceil(std::log(tail) / std::log(q2))) - 1;
    return n < 0 ? 0 : n;
}

SchmidtSpectrum schmidt_spectrum(const PdcParams& p, int n_max) {
    if (n_max < 0) throw OrderOutOfRange("n_max must be >= 0");
    SchmidtSpectrum s;
    s.k_number = schmidt_number(p);
    s.q = std::sqrt((s.k_number - 1.0) / (s.k_number + 1.0));
    s.n_max = n_max;
    s.lambdas.resize(static_cast<size_t>(n_max) + 1);
    const double q2 = s.q * s.q;
    double l = 2.0 / (s.k_number + 1.0);
    for (auto& lam : s.lambdas) {
        lam = l;
        l *= q2;
    }
    const double to = p.t_o, te = p.t_e;
    const double base = std::sqrt(std::abs(to - te)) / (std::sqrt(2.0) * p.omega_p);
    const double ratio = (1.0 + to * to) / (1.0 + te * te);
    s.tau1 = base * std::pow(ratio, 0.25);
    s.tau2 = base * std::pow(ratio, -0.25);
    return s;
}

double hermite_gauss(int n, double x) {
    const double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0) return h0;
    double hm = h0;
    double h = std::sqrt(2.0) * x * h0;
    for (int k = 1; k < n; ++k) {
        const double next =
            std::sqrt(2.0 / (k + 1.0)) * x * h - std::sqrt(k / (k + 1.0)) * hm;
        hm = h;
        h = next;
    }
    return h;
}

double mode_function(const SchmidtSpectrum& s, int n, double t, Wave which) {
    if (n < 0 || n > s.n_max) throw OrderOutOfRange("mode order out of range");
    const double tau = which == Wave::ordinary ? s.tau1 : s.tau2;
    return hermite_gauss(n, t / tau) / std::sqrt(tau);
}

double mercer_g1(const SchmidtSpectrum& s, double t, double tau) {
    // One recurrence pass per argument, accumulate lambda_n h_n(x) h_n(y).
    const double x = t / s.tau1, y = (t + tau) / s.tau1;
    double hx0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    double hy0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
    double sum = s.lambdas[0] * hx0 * hy0;
    if (s.n_max == 0) return sum / s.tau1;
    double hx = std::sqrt(2.0) * x * hx0, hy = std::sqrt(2.0) * y * hy0;
    sum += s.lambdas[1] * hx * hy;
    for (int k = 1; k < s.n_max; ++k) {
        const double a = std::sqrt(2.0 / (k + 1.0)), c = std::sqrt(k / (k + 1.0));
        const double nx = a * x * hx - c * hx0;
        const double ny = a * y * hy - c * hy0;
        hx0 = hx;
        hy0 = hy;
        hx = nx;
        hy = ny;
        sum += s.lambdas[static_cast<size_t>(k) + 1] * hx * hy;
    }
    return sum / s.tau1;
}

} // namespace pdc
