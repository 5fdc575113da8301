#include "pdc/oracle.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBoundaryDecay = 1e-8;
constexpr double kSamplesPerCondSigma = 4.0;

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

enum class Family { sinc_pm, gaussian_pm };

Grid2D jsa_grid(const PdcParams& p, int n, Family family) {
    if (n < 64) throw GridTooCoarse("grid size must be >= 64");
    const GaussianBiphoton b = build_biphoton(p);

    // JSA amplitude = exp(-1/2 u^T Lambda u) in the Gaussian model; the grid
    // is sized from it for both families.  Conditional sigma (ridge
    // cross-section) fixes the step, marginal sigma fixes the needed span.
    const double cond1 = 1.0 / std::sqrt(b.lam11);
    const double cond2 = 1.0 / std::sqrt(b.lam22);
    const double marg1 = std::sqrt(2.0 * b.m11);
    const double marg2 = std::sqrt(2.0 * b.m22);

    Grid2D g;
    g.n1 = g.n2 = n;
    g.step1 = cond1 / kSamplesPerCondSigma;
    g.step2 = cond2 / kSamplesPerCondSigma;

    const double half1 = (n / 2 - 1) * g.step1;
    const double half2 = (n / 2 - 1) * g.step2;
    const double edge = std::max(std::exp(-0.5 * half1 * half1 / (marg1 * marg1)),
                                 std::exp(-0.5 * half2 * half2 / (marg2 * marg2)));
    if (edge > kBoundaryDecay)
        throw GridTooCoarse("JSA boundary decay " + std::to_string(edge) +
                            " exceeds 1e-8 of peak; increase grid size");

    g.axis1.resize(n);
    g.axis2.resize(n);
    for (int i = 0; i < n; ++i) {
        g.axis1[i] = (i - n / 2) * g.step1;
        g.axis2[i] = (i - n / 2) * g.step2;
    }
    g.values.resize(static_cast<size_t>(n) * n);
    const double inv4op2 = 1.0 / (4.0 * p.omega_p * p.omega_p);
    const double inv2s2 = 1.0 / (2.0 * p.sigma_s * p.sigma_s);
    for (int i = 0; i < n; ++i) {
        const double w = g.axis1[i];
        for (int j = 0; j < n; ++j) {
            const double wp = g.axis2[j];
            const double pump = std::exp(-(w + wp) * (w + wp) * inv4op2);
            const double x = p.tau_o * w + p.tau_e * wp;
            const double pm = family == Family::sinc_pm
                                  ? sinc(x)
                                  : std::exp(-x * x * inv2s2);
            g.at(i, j) = pump * pm;
        }
    }
    return g;
}

} // namespace

Grid2D jsa_sinc(const PdcParams& p, int n) { return jsa_grid(p, n, Family::sinc_pm); }

Grid2D jsa_gaussian(const PdcParams& p, int n) {
    return jsa_grid(p, n, Family::gaussian_pm);
}

SvdSchmidt svd_schmidt(const Grid2D& g) {
    Eigen::MatrixXd a(g.n1, g.n2);
    const double scale = std::sqrt(g.step1 * g.step2);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) a(i, j) = g.at(i, j).real() * scale;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    if (svd.info() != Eigen::Success) throw SvdFailure("SVD did not converge");
    SvdSchmidt out;
    const auto& s = svd.singularValues();
    double norm2 = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) norm2 += s[i] * s[i];
    if (norm2 <= 0) throw SvdFailure("all singular values vanish");
    out.singulars.resize(static_cast<size_t>(s.size()));
    double sum4 = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double sn = s[i] * s[i] / norm2;
        out.singulars[static_cast<size_t>(i)] = std::sqrt(sn);
        sum4 += sn * sn;
    }
    out.k_num = 1.0 / sum4;
    return out;
}

Grid2D jta_numeric(const Grid2D& jsa) {
    const int n = jsa.n1;
    if (n != jsa.n2 || n < 4 || n % 4 != 0)
        throw GridTooCoarse("jta_numeric expects a square grid, n multiple of 4");

    Grid2D out;
    out.n1 = out.n2 = n;
    out.step1 = 2.0 * kPi / (n * jsa.step1);
    out.step2 = 2.0 * kPi / (n * jsa.step2);
    out.axis1.resize(n);
    out.axis2.resize(n);
    for (int i = 0; i < n; ++i) {
        out.axis1[i] = (i - n / 2) * out.step1;
        out.axis2[i] = (i - n / 2) * out.step2;
    }

    // Centered-grid DFT: with Omega_j = (j - n/2) dW and t_k = (k - n/2) dt,
    // dt = 2 pi/(n dW), the continuous kernel e^{-i Omega t} maps onto the
    // plain forward DFT after (-1)^j pre- and (-1)^k post-multiplication
    // (global phase i^{-n} = 1 for n divisible by 4).
    std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double sign = ((i + j) & 1) ? -1.0 : 1.0;
            buf[static_cast<size_t>(i) * n + j] = sign * jsa.at(i, j);
        }
    fftw_plan plan = fftw_plan_dft_2d(
        n, n, reinterpret_cast<fftw_complex*>(buf.data()),
        reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    out.values.resize(buf.size());
    const double measure =
        jsa.step1 * jsa.step2 / (4.0 * kPi * kPi);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double sign = ((k + l) & 1) ? -1.0 : 1.0;
            out.at(k, l) = sign * measure * buf[static_cast<size_t>(k) * n + l];
        }
    return out;
}

namespace {

// Cubic (4-point Lagrange) interpolation along axis1 at an on-grid axis2
// index; linear interpolation is too coarse for the 1e-4 quadrature targets.
std::complex<double> interp_row(const Grid2D& g, double x, int j) {
    const double pos = x / g.step1 + g.n1 / 2;
    if (pos < 1 || pos > g.n1 - 3) throw OutOfGrid("time outside JTA grid");
    const int i1 = std::min(static_cast<int>(pos), g.n1 - 3);
    const double a = pos - i1;
    const double w0 = -a * (a - 1.0) * (a - 2.0) / 6.0;
    const double w1 = (a + 1.0) * (a - 1.0) * (a - 2.0) / 2.0;
    const double w2 = -(a + 1.0) * a * (a - 2.0) / 2.0;
    const double w3 = (a + 1.0) * a * (a - 1.0) / 6.0;
    return w0 * g.at(i1 - 1, j) + w1 * g.at(i1, j) + w2 * g.at(i1 + 1, j) +
           w3 * g.at(i1 + 2, j);
}

} // namespace

std::complex<double> g1_numeric(const Grid2D& jta, double t, double tau) {
    std::complex<double> acc = 0;
    for (int j = 0; j < jta.n2; ++j) {
        const double w = (j == 0 || j == jta.n2 - 1) ? 0.5 : 1.0;
        acc += w * std::conj(interp_row(jta, t, j)) * interp_row(jta, t + tau, j);
    }
    return acc * jta.step2;
}

GaussIntegralCheck verify_gaussian_integral(const std::array<double, 3>& lam,
                                            const std::array<double, 2>& v) {
    const double l11 = lam[0], l22 = lam[1], l12 = lam[2];
    const double det = l11 * l22 - l12 * l12;
    if (!(l11 > 0) || !(det > 0))
        throw NotPositiveDefinite("lam must be symmetric positive definite");

    GaussIntegralCheck chk;
    const double quad =
        (l22 * v[0] * v[0] - 2.0 * l12 * v[0] * v[1] + l11 * v[1] * v[1]) / det;
    chk.closed = 2.0 * kPi / std::sqrt(det) * std::exp(-0.5 * quad);

    const double s1 = std::sqrt(l22 / det), s2 = std::sqrt(l11 / det);
    const double L1 = 8.0 * s1, L2 = 8.0 * s2;
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [&](double u1, bool re) {
        auto f = [&](double u2) {
            const double e = std::exp(
                -0.5 * (l11 * u1 * u1 + 2.0 * l12 * u1 * u2 + l22 * u2 * u2));
            const double ph = v[0] * u1 + v[1] * u2;
            return e * (re ? std::cos(ph) : std::sin(ph));
        };
        return gauss_kronrod<double, 61>::integrate(f, -L2, L2, 10, 1e-12);
    };
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double u1) { return inner(u1, true); }, -L1, L1, 10, 1e-12);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double u1) { return inner(u1, false); }, -L1, L1, 10, 1e-12);
    chk.numeric = {re, im};
    chk.residual = std::abs(chk.numeric - std::complex<double>(chk.closed)) /
                   std::abs(chk.closed);
    return chk;
}

double mehler_check(const SchmidtSpectrum& s, const GaussianBiphoton& b,
                    int n_max) {
    if (1.0 + b.params.t_o * b.params.t_e < 0)
        throw InvalidSchmidtDomain(
            "mehler_check requires 1 + t_o t_e > 0 (positive q)");
    if (n_max > s.n_max) throw OrderOutOfRange("n_max exceeds spectrum order");

    const double scale = b.j1_shape / std::sqrt(b.pair_prob_shape);
    const double span1 = 4.5 * s.tau1 * std::sqrt(s.k_number);
    const double span2 = 4.5 * s.tau2 * std::sqrt(s.k_number);
    const int ng = 61;
    double worst = 0;
    std::vector<double> h1(static_cast<size_t>(n_max) + 1),
        h2(static_cast<size_t>(n_max) + 1);
    for (int a = 0; a < ng; ++a) {
        const double t = -span1 + 2.0 * span1 * a / (ng - 1);
        for (int n = 0; n <= n_max; ++n)
            h1[static_cast<size_t>(n)] =
                hermite_gauss(n, t / s.tau1) / std::sqrt(s.tau1);
        for (int c = 0; c < ng; ++c) {
            const double tp = -span2 + 2.0 * span2 * c / (ng - 1);
            for (int n = 0; n <= n_max; ++n)
                h2[static_cast<size_t>(n)] =
                    hermite_gauss(n, tp / s.tau2) / std::sqrt(s.tau2);
            double sum = 0;
            for (int n = 0; n <= n_max; ++n)
                sum += std::sqrt(s.lambdas[static_cast<size_t>(n)]) *
                       h1[static_cast<size_t>(n)] * h2[static_cast<size_t>(n)];
            const double target = scale * jta(b, t, tp);
            worst = std::max(worst, std::abs(sum - target));
        }
    }
    return worst;
}

void dump_csv(const Grid2D& g, std::ostream& os) {
    os << "# n1=" << g.n1 << " n2=" << g.n2 << " step1=" << g.step1
       << " step2=" << g.step2 << "\n";
    os << "# axis1_min=" << g.axis1.front() << " axis2_min=" << g.axis2.front()
       << "\n";
    for (int i = 0; i < g.n1; ++i) {
        for (int j = 0; j < g.n2; ++j) {
            if (j) os << ',';
            os << g.at(i, j).real();
        }
        os << '\n';
    }
}

} // namespace pdc
