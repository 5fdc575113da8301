#include "pdc/estimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "pdc/errors.hpp"

namespace pdc {

namespace {

struct PulseBin {
    std::uint64_t pulse;
    int bin;
};

struct Tables {
    int nb = 0;          // bins per period
    double dt = 0;       // bin width (ns)
    double period = 0;   // ns
    std::uint64_t n_pulses = 0;
    std::uint64_t n_heralds = 0;

    std::vector<PulseBin> v1, v2;      // per-pulse latched clicks, sorted by pulse
    std::vector<std::uint64_t> vh;     // heralded pulses, sorted

    std::vector<double> s1, s2;        // singles histograms
    std::vector<double> s1h, s2h;      // singles in heralded pulses
    std::vector<double> s2h_prev;      // D2 clicks whose previous pulse heralded
    std::vector<double> c_same, c_next;    // coincidence counts vs bin offset
    std::vector<double> ch_same, ch_next;  // heralded coincidences

    // raw whole-pulse counts for the integrated estimator
    std::uint64_t n1_raw = 0, n2_raw = 0, n12_raw = 0;
};

bool has_pulse(const std::vector<std::uint64_t>& sorted, std::uint64_t p) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), p);
    return it != sorted.end() && *it == p;
}

Tables build_tables(const DetectionRecord& rec, double window_ns) {
    const double period = rec.truth.period_ns();
    if (!(window_ns > 0)) throw ConfigInvalid("window must be > 0");
    if (window_ns > period)
        throw WindowTooWide("analysis window exceeds the repetition period");

    Tables t;
    t.period = period;
    t.nb = std::max(2, static_cast<int>(std::llround(period / window_ns)));
    t.dt = period / t.nb;
    t.n_pulses = rec.truth.n_pulses;

    std::vector<PulseBin> v1raw, v2raw;
    for (const Click& c : rec.clicks) {
        if (c.det == Detector::d3) {
            t.vh.push_back(c.pulse);
            continue;
        }
        const double rel = c.time_ns - static_cast<double>(c.pulse) * period;
        const double pos = (rel + 0.5 * period) / t.dt;
        if (pos < 0 || pos >= t.nb) continue; // beyond half a period from the peak
        PulseBin pb{c.pulse, static_cast<int>(pos)};
        (c.det == Detector::d1 ? v1raw : v2raw).push_back(pb);
        if (c.det == Detector::d1)
            ++t.n1_raw;
        else
            ++t.n2_raw;
    }
    auto by_pulse = [](const PulseBin& a, const PulseBin& b) {
        return a.pulse < b.pulse;
    };
    std::sort(v1raw.begin(), v1raw.end(), by_pulse);
    std::sort(v2raw.begin(), v2raw.end(), by_pulse);
    std::sort(t.vh.begin(), t.vh.end());
    t.n_heralds = t.vh.size();
    t.v1 = std::move(v1raw);
    t.v2 = std::move(v2raw);

    t.s1.assign(static_cast<size_t>(t.nb), 0.0);
    t.s2.assign(static_cast<size_t>(t.nb), 0.0);
    t.s1h.assign(static_cast<size_t>(t.nb), 0.0);
    t.s2h.assign(static_cast<size_t>(t.nb), 0.0);
    t.s2h_prev.assign(static_cast<size_t>(t.nb), 0.0);
    const size_t ncorr = 2 * static_cast<size_t>(t.nb) - 1;
    t.c_same.assign(ncorr, 0.0);
    t.c_next.assign(ncorr, 0.0);
    t.ch_same.assign(ncorr, 0.0);
    t.ch_next.assign(ncorr, 0.0);

    for (const auto& pb : t.v1) {
        t.s1[static_cast<size_t>(pb.bin)] += 1;
        if (has_pulse(t.vh, pb.pulse)) t.s1h[static_cast<size_t>(pb.bin)] += 1;
    }
    for (const auto& pb : t.v2) {
        t.s2[static_cast<size_t>(pb.bin)] += 1;
        if (has_pulse(t.vh, pb.pulse)) t.s2h[static_cast<size_t>(pb.bin)] += 1;
        if (pb.pulse > 0 && has_pulse(t.vh, pb.pulse - 1))
            t.s2h_prev[static_cast<size_t>(pb.bin)] += 1;
    }

    // same-pulse and next-pulse coincidences by two-pointer sweeps
    auto sweep = [&](std::uint64_t shift, std::vector<double>& out,
                     std::vector<double>& out_h, bool herald_on_first) {
        size_t i = 0, j = 0;
        while (i < t.v1.size() && j < t.v2.size()) {
            const std::uint64_t p1 = t.v1[i].pulse + shift;
            const std::uint64_t p2 = t.v2[j].pulse;
            if (p1 < p2) {
                ++i;
            } else if (p1 > p2) {
                ++j;
            } else {
                const size_t k = static_cast<size_t>(t.v2[j].bin - t.v1[i].bin +
                                                     t.nb - 1);
                out[k] += 1;
                if (herald_on_first && has_pulse(t.vh, t.v1[i].pulse))
                    out_h[k] += 1;
                ++i;
                ++j;
            }
        }
    };
    sweep(0, t.c_same, t.ch_same, true);
    sweep(1, t.c_next, t.ch_next, true);

    // integrated coincidences: pulses with clicks on both detectors
    {
        size_t i = 0, j = 0;
        while (i < t.v1.size() && j < t.v2.size()) {
            if (t.v1[i].pulse < t.v2[j].pulse)
                ++i;
            else if (t.v1[i].pulse > t.v2[j].pulse)
                ++j;
            else {
                ++t.n12_raw;
                ++i;
                ++j;
            }
        }
    }
    return t;
}

// denominator sum_i a[i] * b[i+k], k in [-(nb-1), nb-1]
double shifted_product(const std::vector<double>& a, const std::vector<double>& b,
                       int k) {
    const int nb = static_cast<int>(a.size());
    double acc = 0;
    for (int i = std::max(0, -k); i < std::min(nb, nb - k); ++i)
        acc += a[static_cast<size_t>(i)] * b[static_cast<size_t>(i + k)];
    return acc;
}

Curve assemble_curve(const Tables& t, const std::vector<double>& num_same,
                     const std::vector<double>& num_next,
                     const std::vector<double>& den1,
                     const std::vector<double>& den2_same,
                     const std::vector<double>& den2_next, double scale_same,
                     double scale_next) {
    Curve c;
    const int nb = t.nb;
    c.tau_ns.reserve(2 * (2 * static_cast<size_t>(nb) - 1));
    for (int k = -(nb - 1); k <= nb - 1; ++k) {
        const double den = shifted_product(den1, den2_same, k);
        if (den <= 0) continue;
        const double n = num_same[static_cast<size_t>(k + nb - 1)];
        c.tau_ns.push_back(k * t.dt);
        c.value.push_back(n * scale_same / den);
        c.stderr_.push_back(std::sqrt(std::max(n, 1.0)) * scale_same / den);
    }
    for (int k = -(nb - 1); k <= nb - 1; ++k) {
        const double den = shifted_product(den1, den2_next, k);
        if (den <= 0) continue;
        const double n = num_next[static_cast<size_t>(k + nb - 1)];
        c.tau_ns.push_back(t.period + k * t.dt);
        c.value.push_back(n * scale_next / den);
        c.stderr_.push_back(std::sqrt(std::max(n, 1.0)) * scale_next / den);
    }
    return c;
}

Curve sample_at(const Curve& full, const std::vector<double>& tau_grid) {
    if (tau_grid.empty()) return full;
    if (full.tau_ns.empty()) throw EmptyRecord("no estimable bins");
    Curve out;
    for (double tau : tau_grid) {
        size_t best = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < full.tau_ns.size(); ++i) {
            const double d = std::abs(full.tau_ns[i] - tau);
            if (d < bestd) bestd = d, best = i;
        }
        out.tau_ns.push_back(full.tau_ns[best]);
        out.value.push_back(full.value[best]);
        out.stderr_.push_back(full.stderr_[best]);
    }
    return out;
}

Curve g2_curve_from_tables(const Tables& t) {
    if (t.v1.empty() || t.v2.empty())
        throw EmptyRecord("need clicks on both D1 and D2");
    const double n = static_cast<double>(t.n_pulses);
    return assemble_curve(t, t.c_same, t.c_next, t.s1, t.s2, t.s2, n, n);
}

std::pair<Curve, Curve> heralded_curves_from_tables(const Tables& t) {
    if (t.n_heralds == 0) throw NoHeralds("record contains no D3 clicks");
    if (t.v1.empty() || t.v2.empty())
        throw EmptyRecord("need clicks on both D1 and D2");
    const double n = static_cast<double>(t.n_pulses);
    const double nh = static_cast<double>(t.n_heralds);
    Curve sh = assemble_curve(t, t.ch_same, t.ch_next, t.s1h, t.s2, t.s2, n, n);
    Curve dh = assemble_curve(t, t.ch_same, t.ch_next, t.s1h, t.s2h, t.s2h_prev,
                              nh, nh);
    return {std::move(sh), std::move(dh)};
}

double default_window(const DetectionRecord& rec) {
    return rec.truth.period_ns() / 200.0;
}

// Unweighted Gauss-Newton for y = b + a exp(-x^2 / 2 s^2); fit_baseline=false
// pins b. Returns (a, s, b) and the sandwich standard errors from per-point
// noise sigmas.
struct GaussFit {
    double a = 0, s = 0, b = 0;
    double se_a = 0, se_s = 0;
    double rms = 0;
};

GaussFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& noise, bool fit_baseline,
                      double a0, double s0, double b0) {
    const int np = fit_baseline ? 3 : 2;
    Eigen::VectorXd th(np);
    th[0] = a0;
    th[1] = s0;
    if (fit_baseline) th[2] = b0;
    const size_t n = x.size();
    if (n < static_cast<size_t>(np) + 1) throw FitDiverged("too few fit points");

    auto ssq = [&](const Eigen::VectorXd& v) {
        double acc = 0;
        for (size_t i = 0; i < n; ++i) {
            const double e = std::exp(-x[i] * x[i] / (2.0 * v[1] * v[1]));
            const double f = v[0] * e + (fit_baseline ? v[2] : b0);
            acc += (y[i] - f) * (y[i] - f);
        }
        return acc;
    };

    for (int it = 0; it < 80; ++it) {
        Eigen::MatrixXd jac(n, np);
        Eigen::VectorXd r(n);
        for (size_t i = 0; i < n; ++i) {
            const double s = th[1];
            const double e = std::exp(-x[i] * x[i] / (2.0 * s * s));
            const double f = th[0] * e + (fit_baseline ? th[2] : b0);
            r[static_cast<Eigen::Index>(i)] = y[i] - f;
            jac(static_cast<Eigen::Index>(i), 0) = e;
            jac(static_cast<Eigen::Index>(i), 1) =
                th[0] * e * x[i] * x[i] / (s * s * s);
            if (fit_baseline) jac(static_cast<Eigen::Index>(i), 2) = 1.0;
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        jtj.diagonal().array() += 1e-12 * jtj.trace();
        Eigen::VectorXd step = jtj.ldlt().solve(jac.transpose() * r);
        const double cur = ssq(th);
        Eigen::VectorXd cand = th + step;
        int back = 0;
        while ((!cand.allFinite() || cand[1] <= 0 || ssq(cand) > cur) &&
               back < 40) {
            step *= 0.5;
            cand = th + step;
            ++back;
        }
        if (!cand.allFinite() || cand[1] <= 0)
            throw FitDiverged("Gaussian fit diverged");
        th = cand;
        if (step.norm() < 1e-12 * (1.0 + th.norm())) break;
    }

    GaussFit out;
    out.a = th[0];
    out.s = th[1];
    out.b = fit_baseline ? th[2] : b0;

    Eigen::MatrixXd jac(n, np);
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        const double e = std::exp(-x[i] * x[i] / (2.0 * out.s * out.s));
        const double f = out.a * e + out.b;
        ss += (y[i] - f) * (y[i] - f);
        jac(static_cast<Eigen::Index>(i), 0) = e;
        jac(static_cast<Eigen::Index>(i), 1) =
            out.a * e * x[i] * x[i] / (out.s * out.s * out.s);
        if (fit_baseline) jac(static_cast<Eigen::Index>(i), 2) = 1.0;
    }
    out.rms = std::sqrt(ss / static_cast<double>(n));
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    jtj.diagonal().array() += 1e-12 * jtj.trace();
    Eigen::MatrixXd inv = jtj.inverse();
    Eigen::MatrixXd mid = Eigen::MatrixXd::Zero(np, np);
    for (size_t i = 0; i < n; ++i) {
        const double w = noise.empty() ? out.rms * out.rms
                                       : noise[i] * noise[i];
        mid += w * jac.row(static_cast<Eigen::Index>(i)).transpose() *
               jac.row(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd cov = inv * mid * inv;
    out.se_a = std::sqrt(std::max(0.0, cov(0, 0)));
    out.se_s = std::sqrt(std::max(0.0, cov(1, 1)));
    return out;
}

} // namespace

Curve g2_from_counts(const DetectionRecord& rec, double window_ns,
                     const std::vector<double>& tau_grid) {
    const Tables t = build_tables(rec, window_ns);
    return sample_at(g2_curve_from_tables(t), tau_grid);
}

std::pair<Curve, Curve> heralded_g2_from_counts(
    const DetectionRecord& rec, double window_ns,
    const std::vector<double>& tau_grid) {
    const Tables t = build_tables(rec, window_ns);
    auto [sh, dh] = heralded_curves_from_tables(t);
    return {sample_at(sh, tau_grid), sample_at(dh, tau_grid)};
}

IntegratedG2 g2_integrated(const DetectionRecord& rec) {
    const Tables t = build_tables(rec, default_window(rec));
    if (t.n1_raw == 0 || t.n2_raw == 0)
        throw EmptyRecord("need clicks on both D1 and D2");
    IntegratedG2 out;
    out.g2_int = static_cast<double>(t.n12_raw) *
                 static_cast<double>(t.n_pulses) /
                 (static_cast<double>(t.n1_raw) * static_cast<double>(t.n2_raw));
    if (out.g2_int <= 1.0) {
        out.degenerate = true;
        out.k_est = std::numeric_limits<double>::infinity();
    } else {
        out.k_est = 1.0 / (out.g2_int - 1.0);
    }
    return out;
}

EstimateReport fit_report(const DetectionRecord& rec, double window_ns) {
    const double window = window_ns > 0 ? window_ns : default_window(rec);
    const Tables t = build_tables(rec, window);
    EstimateReport rep;

    // arrival-time histogram over both detectors
    rep.intensity_hist.bin_width_ns = t.dt;
    rep.intensity_hist.center_ns.resize(static_cast<size_t>(t.nb));
    rep.intensity_hist.counts.resize(static_cast<size_t>(t.nb));
    for (int i = 0; i < t.nb; ++i) {
        rep.intensity_hist.center_ns[static_cast<size_t>(i)] =
            (i + 0.5) * t.dt - 0.5 * t.period;
        rep.intensity_hist.counts[static_cast<size_t>(i)] =
            static_cast<std::uint64_t>(t.s1[static_cast<size_t>(i)] +
                                       t.s2[static_cast<size_t>(i)]);
    }

    rep.g2_curve = g2_curve_from_tables(t);
    try {
        auto [sh, dh] = heralded_curves_from_tables(t);
        rep.g2_sh_curve = std::move(sh);
        rep.g2_dh_curve = std::move(dh);
    } catch (const NoHeralds&) {
        // unheralded record: leave the heralded curves empty
    }

    // intensity fit on bins with at least 10 counts
    {
        std::vector<double> x, y;
        double wsum = 0, wx2 = 0, peak = 0;
        for (size_t i = 0; i < rep.intensity_hist.counts.size(); ++i) {
            const double cnt =
                static_cast<double>(rep.intensity_hist.counts[i]);
            if (cnt < 10) continue;
            x.push_back(rep.intensity_hist.center_ns[i]);
            y.push_back(cnt);
            wsum += cnt;
            wx2 += cnt * rep.intensity_hist.center_ns[i] *
                   rep.intensity_hist.center_ns[i];
            peak = std::max(peak, cnt);
        }
        if (x.size() < 4) throw FitDiverged("intensity histogram too sparse");
        const double s0 = std::sqrt(std::max(wx2 / std::max(wsum, 1.0), 1e-12));
        std::vector<double> noise(x.size());
        for (size_t i = 0; i < y.size(); ++i) noise[i] = std::sqrt(y[i]);
        const GaussFit f = fit_gaussian(x, y, noise, false, peak, s0, 0.0);
        rep.fit_residual_intensity = f.rms;
        const double j = rec.truth.jitter_sigma_ps / 1000.0;
        rep.delta_t_m_ns = std::sqrt(std::max(f.s * f.s - j * j, 0.0));
        rep.se_delta_t_m = f.se_s * f.s / std::max(rep.delta_t_m_ns, 1e-300);
    }

    // g2 - baseline fit on the same-period branch, restricted to bins whose
    // coincidence count is at least 10; domain |tau| <= 3 sigma, one pass
    {
        std::vector<double> x, y, noise;
        for (size_t i = 0; i < rep.g2_curve.tau_ns.size(); ++i) {
            const double tau = rep.g2_curve.tau_ns[i];
            if (std::abs(tau) >= 0.5 * t.period) continue;
            const double cnt = t.c_same[static_cast<size_t>(
                std::llround(tau / t.dt) + t.nb - 1)];
            if (cnt < 10) continue;
            x.push_back(tau);
            y.push_back(rep.g2_curve.value[i]);
            noise.push_back(rep.g2_curve.stderr_[i]);
        }
        if (x.size() < 8) throw FitDiverged("g2 curve too sparse to fit");
        // seed the width from the half-maximum crossing around tau = 0
        const double b0 = 1.0;
        double peak = 0;
        for (size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) <= 2.0 * t.dt) peak = std::max(peak, y[i]);
        if (peak <= b0) peak = b0 + 0.1;
        double half_tau = 0;
        {
            std::vector<size_t> order(x.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
                return std::abs(x[i]) < std::abs(x[j]);
            });
            for (size_t idx : order) {
                half_tau = std::abs(x[idx]);
                if (y[idx] - b0 < 0.5 * (peak - b0) && half_tau > 0) break;
            }
        }
        double s0 = std::max(half_tau / 1.177, 2.0 * t.dt);
        GaussFit f = fit_gaussian(x, y, noise, true, peak - b0, s0, b0);
        // second pass: peak domain plus the plateau that pins the baseline
        std::vector<double> x2, y2, n2;
        for (size_t i = 0; i < x.size(); ++i) {
            if (std::abs(x[i]) <= 3.0 * f.s || std::abs(x[i]) >= 5.0 * f.s) {
                x2.push_back(x[i]);
                y2.push_back(y[i]);
                n2.push_back(noise[i]);
            }
        }
        f = fit_gaussian(x2, y2, n2, true, f.a, f.s, f.b);
        rep.fit_residual_g2 = f.rms;
        const double j = rec.truth.jitter_sigma_ps / 1000.0;
        rep.delta_tau_m_ns =
            std::sqrt(std::max(f.s * f.s - 2.0 * j * j, 0.0));
        rep.se_delta_tau_m =
            f.se_s * f.s / std::max(rep.delta_tau_m_ns, 1e-300);
        rep.g2_zero_fit = (f.b + f.a) / f.b;
        rep.se_g2_zero = f.se_a / f.b;
    }

    rep.c_est = std::sqrt(2.0) * rep.delta_tau_m_ns / rep.delta_t_m_ns;
    rep.k_est_from_c = std::sqrt(1.0 + 4.0 / (rep.c_est * rep.c_est));
    const double rt = rep.se_delta_t_m / rep.delta_t_m_ns;
    const double rq = rep.se_delta_tau_m / rep.delta_tau_m_ns;
    rep.se_c_est = rep.c_est * std::sqrt(rt * rt + rq * rq);

    const IntegratedG2 gi = g2_integrated(rec);
    rep.g2_int = gi.g2_int;
    rep.k_est_from_g2int = gi.k_est;
    rep.g2_int_degenerate = gi.degenerate;
    return rep;
}

DetectionRecord thin_record(const DetectionRecord& rec, double keep_prob,
                            std::uint64_t seed) {
    if (!(keep_prob >= 0 && keep_prob <= 1))
        throw InvalidProbability("keep_prob must be in [0, 1]");
    DetectionRecord out;
    out.truth = rec.truth;
    out.counters = rec.counters;
    out.clicks.reserve(rec.clicks.size());
    std::uint64_t idx = 0;
    for (const Click& c : rec.clicks) {
        PulseRng rng(seed, idx++);
        if (rng.next_double() < keep_prob) out.clicks.push_back(c);
    }
    return out;
}

DetectionRecord merge_records(const DetectionRecord& a,
                              const DetectionRecord& b) {
    DetectionRecord out;
    out.truth = a.truth;
    out.counters.zero = a.counters.zero + b.counters.zero;
    out.counters.one = a.counters.one + b.counters.one;
    out.counters.two = a.counters.two + b.counters.two;
    out.counters.three_plus = a.counters.three_plus + b.counters.three_plus;
    out.clicks.reserve(a.clicks.size() + b.clicks.size());
    out.clicks.insert(out.clicks.end(), a.clicks.begin(), a.clicks.end());
    out.clicks.insert(out.clicks.end(), b.clicks.begin(), b.clicks.end());
    std::sort(out.clicks.begin(), out.clicks.end(),
              [](const Click& x, const Click& y) {
                  if (x.time_ns != y.time_ns) return x.time_ns < y.time_ns;
                  if (x.pulse != y.pulse) return x.pulse < y.pulse;
                  return static_cast<int>(x.det) < static_cast<int>(y.det);
              });
    return out;
}

void write_curve_csv(const Curve& c, std::ostream& os) {
    os << "tau_ns,value,stderr\n";
    for (size_t i = 0; i < c.tau_ns.size(); ++i)
        os << c.tau_ns[i] << ',' << c.value[i] << ',' << c.stderr_[i] << '\n';
}

void write_report_json(const EstimateReport& r, std::ostream& os) {
    nlohmann::json j;
    auto curve = [](const Curve& c) {
        return nlohmann::json{{"tau_ns", c.tau_ns},
                              {"value", c.value},
                              {"stderr", c.stderr_}};
    };
    j["intensity_hist"] = {{"bin_width_ns", r.intensity_hist.bin_width_ns},
                           {"center_ns", r.intensity_hist.center_ns},
                           {"counts", r.intensity_hist.counts}};
    j["g2_curve"] = curve(r.g2_curve);
    j["g2_sh_curve"] = curve(r.g2_sh_curve);
    j["g2_dh_curve"] = curve(r.g2_dh_curve);
    j["delta_t_m_ns"] = r.delta_t_m_ns;
    j["delta_tau_m_ns"] = r.delta_tau_m_ns;
    j["c_est"] = r.c_est;
    j["k_est_from_c"] = r.k_est_from_c;
    j["g2_zero_fit"] = r.g2_zero_fit;
    j["se_delta_t_m"] = r.se_delta_t_m;
    j["se_delta_tau_m"] = r.se_delta_tau_m;
    j["se_c_est"] = r.se_c_est;
    j["se_g2_zero"] = r.se_g2_zero;
    j["g2_int"] = r.g2_int;
    j["k_est_from_g2int"] = r.k_est_from_g2int;
    j["g2_int_degenerate"] = r.g2_int_degenerate;
    j["fit_residual_intensity"] = r.fit_residual_intensity;
    j["fit_residual_g2"] = r.fit_residual_g2;
    os << j.dump(2) << '\n';
}

} // namespace pdc
