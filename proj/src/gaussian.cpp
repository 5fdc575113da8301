#include "pdc/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "pdc/errors.hpp"

namespace pdc {

namespace {
constexpr double kPi = std::numbers::pi;
}

GaussianBiphoton build_biphoton(const PdcParams& p) {
    GaussianBiphoton b;
    b.params = p;
    const double to = p.t_o, te = p.t_e, op = p.omega_p;
    const double dT = to - te;

    const double mpref = op * op / (dT * dT);
    b.m11 = mpref * (1.0 + te * te);
    b.m22 = mpref * (1.0 + to * to);
    b.m12 = -mpref * (1.0 + to * te);

    const double lpref = 1.0 / (2.0 * op * op);
    b.lam11 = lpref * (1.0 + to * to);
    b.lam22 = lpref * (1.0 + te * te);
    b.lam12 = lpref * (1.0 + to * te);

    b.delta_t_o = std::sqrt(1.0 + to * to) / (2.0 * op);
    b.delta_tau_o =
        std::abs(dT) * std::sqrt(1.0 + to * to) / (op * std::abs(1.0 + to * te));
    b.coherence_c = b.delta_tau_o / b.delta_t_o;
    b.pair_prob_shape = op * op / (2.0 * kPi * std::abs(dT));
    b.j1_shape = op * op / (kPi * std::abs(dT));
    return b;
}

double jta(const GaussianBiphoton& b, double t, double t_prime) {
    return std::exp(-b.m11 * t * t - b.m22 * t_prime * t_prime -
                    2.0 * b.m12 * t * t_prime);
}

double intensity(const GaussianBiphoton& b, double t) {
    const double s = b.delta_t_o;
    return std::exp(-t * t / (2.0 * s * s)) / (std::sqrt(2.0 * kPi) * s);
}

double g1_normalized(const GaussianBiphoton& b, double tau) {
    const double s = b.delta_tau_o;
    return std::exp(-tau * tau / (2.0 * s * s));
}

double g2(const GaussianBiphoton& b, double tau) {
    const double g1 = g1_normalized(b, tau);
    return 1.0 + g1 * g1;
}

double g2_magnified(const GaussianBiphoton& b, double m, double tau) {
    if (m == 0) throw ZeroMagnification("magnification must be nonzero");
    return g2(b, tau / m);
}

HeraldedG2 heralded_g2(const GaussianBiphoton& b, double p_b, double tau,
                       bool in_same_period) {
    if (!(p_b > 0 && p_b < 1))
        throw InvalidProbability("p_b must be in (0, 1)");
    HeraldedG2 h;
    if (!in_same_period) return h;
    const double g = g2(b, tau);
    h.sh = g * (1.0 + 0.5 * p_b) / (1.0 + p_b);
    h.dh = g * (1.0 + 0.5 * p_b) * p_b / ((1.0 + p_b) * (1.0 + p_b));
    return h;
}

double integrated_cross_correlation(double p_b, bool in_same_period) {
    if (!(p_b > 0 && p_b < 1))
        throw InvalidProbability("p_b must be in (0, 1)");
    return in_same_period ? 1.0 + 1.0 / p_b : 1.0;
}

Feasibility feasibility(const GaussianBiphoton& b, double n_events, double m) {
    if (!(n_events > 0)) throw NonPositiveInput("n_events must be > 0");
    if (m == 0) throw ZeroMagnification("magnification must be nonzero");
    Feasibility f;
    f.n_out = n_events * std::erfc(b.coherence_c / std::sqrt(2.0));
    // 1/(sqrt(2) |M| C dt_o); dt_o in ps -> rate in 1/ps, converted to MHz.
    const double period_ps =
        std::sqrt(2.0) * std::abs(m) * b.coherence_c * b.delta_t_o;
    f.max_rep_rate_mhz = 1e6 / period_ps;
    return f;
}

ImagingSystem check_imaging(double d_in, double d_out, double d_f, double tol) {
    if (d_in == 0 || d_out == 0 || d_f == 0)
        throw ZeroDispersion("all GDDs must be nonzero");
    const double lhs = 1.0 / d_in + 1.0 / d_out;
    const double rhs = 1.0 / d_f;
    const double resid = std::abs(lhs - rhs) /
                         std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    if (resid > tol)
        throw ImagingConditionViolated(
            "imaging condition violated, relative residual " +
            std::to_string(resid));
    ImagingSystem sys;
    sys.d_in = d_in;
    sys.d_out = d_out;
    sys.d_f = d_f;
    sys.magnification = -d_out / d_in;
    return sys;
}

} // namespace pdc
