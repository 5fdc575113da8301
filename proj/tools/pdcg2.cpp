#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdc/config.hpp"
#include "pdc/errors.hpp"
#include "pdc/estimate.hpp"
#include "pdc/gaussian.hpp"
#include "pdc/oracle.hpp"
#include "pdc/params.hpp"
#include "pdc/schmidt.hpp"
#include "pdc/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw pdc::ConfigInvalid("cannot write " + (dir / name).string());
    return os;
}

void emit_resolved(const pdc::RunConfig& cfg, const fs::path& dir) {
    auto os = open_out(dir, "resolved_config.json");
    pdc::write_resolved_config(cfg, os);
}

void sweep_csv(const pdc::RunConfig& cfg, std::ostream& os) {
    os << "tau_p_ps,schmidt_number,inv_coherence\n";
    const int n = std::max(2, cfg.sweep_points);
    const double lmin = std::log(cfg.sweep_min_ps);
    const double lmax = std::log(cfg.sweep_max_ps);
    const pdc::PdcParams base = cfg.params();
    for (int i = 0; i < n; ++i) {
        const double tp = std::exp(lmin + (lmax - lmin) * i / (n - 1));
        try {
            const pdc::PdcParams p = pdc::derive_params(
                tp, base.tau_o, base.tau_e, base.sigma_s, base.crystal_length,
                base.poling_period);
            const pdc::GaussianBiphoton b = pdc::build_biphoton(p);
            os << tp << ',' << pdc::schmidt_number(p) << ','
               << 1.0 / b.coherence_c << '\n';
        } catch (const pdc::InvalidSchmidtDomain&) {
            // single-mode point itself: K = 1, 1/C = 0
            os << tp << ",1,0\n";
        }
    }
}

int cmd_analyze(const pdc::RunConfig& cfg, const fs::path& out) {
    emit_resolved(cfg, out);
    const pdc::PdcParams p = cfg.params();
    const pdc::GaussianBiphoton b = pdc::build_biphoton(p);
    const double k = pdc::schmidt_number(p);
    const int nmax = pdc::default_n_max(k);
    const pdc::SchmidtSpectrum s = pdc::schmidt_spectrum(p, nmax);

    json j;
    j["omega_p_rad_per_ps"] = p.omega_p;
    j["t_o"] = p.t_o;
    j["t_e"] = p.t_e;
    j["delta_t_o_ps"] = b.delta_t_o;
    j["delta_tau_o_ps"] = b.delta_tau_o;
    j["coherence_c"] = b.coherence_c;
    j["schmidt_number"] = k;
    j["q"] = s.q;
    j["tau1_ps"] = s.tau1;
    j["tau2_ps"] = s.tau2;
    j["n_max"] = nmax;
    double tail = 1.0;
    for (double l : s.lambdas) tail -= l;
    j["lambda_tail"] = tail;
    if (p.tau_o > 0)
        j["single_mode_pump_duration_ps"] =
            pdc::single_mode_pump_duration(p.tau_o, p.sigma_s);
    const pdc::Feasibility f =
        pdc::feasibility(b, 1e6, cfg.magnification);
    j["n_out_at_1e6_events"] = f.n_out;
    j["max_rep_rate_mhz"] = f.max_rep_rate_mhz;
    {
        auto os = open_out(out, "analysis.json");
        os << j.dump(2) << '\n';
    }
    {
        auto os = open_out(out, "fig2_sweep.csv");
        sweep_csv(cfg, os);
    }
    std::cout << "analyze: K = " << k << ", C = " << b.coherence_c
              << ", delta_t_o = " << b.delta_t_o
              << " ps, delta_tau_o = " << b.delta_tau_o << " ps\n";
    return 0;
}

struct CheckRow {
    std::string name;
    double value;
    double tol;
    bool pass;
};

int cmd_oracle(const pdc::RunConfig& cfg, const fs::path& out) {
    emit_resolved(cfg, out);
    std::vector<CheckRow> rows;
    auto add = [&](const std::string& name, double value, double tol) {
        rows.push_back({name, value, tol, value <= tol});
    };

    const pdc::PdcParams p = cfg.params();
    const pdc::GaussianBiphoton b = pdc::build_biphoton(p);

    // Appendix A identity on five probe configurations
    const std::array<std::array<double, 3>, 5> lams = {{
        {1.0, 1.0, 0.0},
        {b.lam11, b.lam22, b.lam12},
        {2.0, 0.5, 0.0},
        {1.0, 1.0, 0.9},
        {3.0, 2.0, -1.5},
    }};
    const std::array<std::array<double, 2>, 5> vs = {{
        {0.0, 0.0}, {-1.0, -2.0}, {1.0, 0.0}, {2.0, 1.0}, {0.3, -0.7}}};
    for (size_t i = 0; i < lams.size(); ++i) {
        const auto chk = pdc::verify_gaussian_integral(lams[i], vs[i]);
        add("gauss_integral_probe_" + std::to_string(i), chk.residual, 1e-8);
    }

    // Appendix B reconstruction
    if (1.0 + p.t_o * p.t_e > 0) {
        const double k = pdc::schmidt_number(p);
        const int nmax = std::max(60, pdc::default_n_max(k, 1e-7));
        const pdc::SchmidtSpectrum s = pdc::schmidt_spectrum(p, nmax);
        add("mehler_residual", pdc::mehler_check(s, b, nmax), 1e-6);
    }

    // sinc vs Gaussian half-maximum abscissa
    {
        double lo = 1.0, hi = 3.0;
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            (std::sin(mid) / mid > 0.5 ? lo : hi) = mid;
        }
        const double sinc_root = 0.5 * (lo + hi);
        const double gauss_root = p.sigma_s * std::sqrt(2.0 * std::log(2.0));
        add("sinc_gauss_fwhm_match", std::abs(sinc_root - gauss_root), 1e-3);
    }

    // grid pipeline
    try {
        const pdc::Grid2D jg = pdc::jsa_gaussian(p, cfg.grid_n);
        const auto svg = pdc::svd_schmidt(jg);
        const double k = pdc::schmidt_number(p);
        add("svd_k_gaussian_rel_err", std::abs(svg.k_num / k - 1.0), 0.01);
        const pdc::Grid2D js = pdc::jsa_sinc(p, cfg.grid_n);
        const auto svs = pdc::svd_schmidt(js);
        add("svd_k_sinc_rel_err", std::abs(svs.k_num / k - 1.0), 0.10);
        std::cout << "sinc-vs-Gaussian Schmidt number: " << svs.k_num << " vs "
                  << svg.k_num << " (analytic " << k << ")\n";

        const pdc::Grid2D jt = pdc::jta_numeric(jg);
        // Parseval with the transform's 1/(2 pi)^2 measure
        double pw = 0, pt = 0;
        for (const auto& v : jg.values) pw += std::norm(v);
        for (const auto& v : jt.values) pt += std::norm(v);
        pw *= jg.step1 * jg.step2 / (4.0 * M_PI * M_PI);
        pt *= jt.step1 * jt.step2;
        add("parseval_rel_err", std::abs(pw - pt) / pw, 1e-9);
        // pointwise vs closed form
        double worst = 0;
        const double probes[5][2] = {
            {0, 0}, {b.delta_t_o, 0}, {0.5, 0.5}, {-1.0, 2.0}, {2.5, -0.5}};
        for (const auto& pr : probes) {
            const double analytic = b.j1_shape * pdc::jta(b, pr[0], pr[1]);
            // nearest-grid evaluation of the numeric JTA
            const int i =
                static_cast<int>(std::llround(pr[0] / jt.step1)) + jt.n1 / 2;
            const int jj =
                static_cast<int>(std::llround(pr[1] / jt.step2)) + jt.n2 / 2;
            const double tgrid1 = jt.axis1[static_cast<size_t>(i)];
            const double tgrid2 = jt.axis2[static_cast<size_t>(jj)];
            const double analytic_on_grid =
                b.j1_shape * pdc::jta(b, tgrid1, tgrid2);
            const double rel =
                std::abs(jt.at(i, jj).real() - analytic_on_grid) /
                std::abs(analytic);
            worst = std::max(worst, rel);
        }
        add("jta_numeric_rel_err", worst, 1e-6);

        // quadrature g1 vs closed form over |tau| <= 3 dtau
        double worst_g1 = 0;
        const double i0 = std::abs(pdc::g1_numeric(jt, 0, 0));
        for (int m = -6; m <= 6; ++m) {
            const double tau = m * 0.5 * b.delta_tau_o;
            const double num = std::abs(pdc::g1_numeric(jt, -tau / 2, tau));
            const double closed =
                i0 * pdc::g1_normalized(b, tau) *
                std::sqrt(pdc::intensity(b, -tau / 2) * pdc::intensity(b, tau / 2)) /
                pdc::intensity(b, 0);
            worst_g1 = std::max(worst_g1, std::abs(num - closed) / i0);
        }
        add("g1_numeric_rel_err", worst_g1, 1e-4);
    } catch (const pdc::GridTooCoarse& e) {
        std::cout << "GridTooCoarse: " << e.what() << "\n";
        rows.push_back({"grid_admission", 1.0, 0.0, false});
    }

    auto os = open_out(out, "oracle_report.csv");
    os << "check,value,tolerance,pass\n";
    bool all = true;
    for (const auto& r : rows) {
        os << r.name << ',' << r.value << ',' << r.tol << ','
           << (r.pass ? "1" : "0") << '\n';
        std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name << " = "
                  << r.value << " (tol " << r.tol << ")\n";
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

int cmd_simulate(const pdc::RunConfig& cfg, const fs::path& out) {
    emit_resolved(cfg, out);
    const pdc::DetectionRecord rec = pdc::run_experiment(cfg.experiment());
    {
        auto os = open_out(out, "record.csv");
        pdc::write_record_csv(rec, os);
    }
    {
        json j;
        j["counters"] = {{"zero", rec.counters.zero},
                         {"one", rec.counters.one},
                         {"two", rec.counters.two},
                         {"three_plus", rec.counters.three_plus}};
        j["n_clicks"] = rec.clicks.size();
        auto os = open_out(out, "simulation_summary.json");
        os << j.dump(2) << '\n';
    }
    std::cout << "simulate: " << rec.clicks.size() << " clicks from "
              << cfg.n_pulses << " pulses\n";
    return 0;
}

int cmd_estimate_files(const std::string& record_path,
                       const std::string& truth_path, const fs::path& out) {
    const pdc::RunConfig truth_cfg = pdc::config_from_file(truth_path);
    std::ifstream in(record_path);
    if (!in) throw pdc::ConfigInvalid("cannot open record: " + record_path);
    const pdc::DetectionRecord rec =
        pdc::read_record_csv(in, truth_cfg.experiment());
    const pdc::EstimateReport rep = pdc::fit_report(rec, truth_cfg.window_ns);
    {
        auto os = open_out(out, "report.json");
        pdc::write_report_json(rep, os);
    }
    auto dump_curve = [&](const pdc::Curve& c, const std::string& name) {
        auto os = open_out(out, name);
        pdc::write_curve_csv(c, os);
    };
    dump_curve(rep.g2_curve, "g2_curve.csv");
    if (!rep.g2_sh_curve.tau_ns.empty()) {
        dump_curve(rep.g2_sh_curve, "g2_sh_curve.csv");
        dump_curve(rep.g2_dh_curve, "g2_dh_curve.csv");
    }
    {
        auto os = open_out(out, "intensity_hist.csv");
        os << "center_ns,count\n";
        for (size_t i = 0; i < rep.intensity_hist.center_ns.size(); ++i)
            os << rep.intensity_hist.center_ns[i] << ','
               << rep.intensity_hist.counts[i] << '\n';
    }
    std::cout << "estimate: c_est = " << rep.c_est
              << ", K(from C) = " << rep.k_est_from_c
              << ", g2(0) fit = " << rep.g2_zero_fit
              << ", K(from g2_int) = " << rep.k_est_from_g2int << "\n";
    return 0;
}

int cmd_reproduce(const pdc::RunConfig& base, const fs::path& out) {
    emit_resolved(base, out);
    {
        auto os = open_out(out, "fig2_sweep.csv");
        sweep_csv(base, os);
    }

    // fig3: magnified g2 and mean intensity, analytic vs Monte Carlo
    for (const std::string preset : {"ppktp-3ps", "ppktp-30ps"}) {
        pdc::RunConfig cfg = base;
        cfg.preset = preset;
        cfg.mean_pairs = 0.1;
        cfg.herald_efficiency = 1.0;
        const pdc::GaussianBiphoton b = pdc::build_biphoton(cfg.params());
        const pdc::DetectionRecord rec = pdc::run_experiment(cfg.experiment());
        const pdc::EstimateReport rep = pdc::fit_report(rec, cfg.window_ns);
        const double m = cfg.magnification;
        const std::string tag = preset == "ppktp-3ps" ? "3ps" : "30ps";
        {
            auto os = open_out(out, "fig3_" + tag + "_intensity.csv");
            os << "t_ns,analytic_density_per_ns,mc_density_per_ns\n";
            const double nclicks = [&] {
                double s = 0;
                for (auto c : rep.intensity_hist.counts)
                    s += static_cast<double>(c);
                return s;
            }();
            for (size_t i = 0; i < rep.intensity_hist.center_ns.size(); ++i) {
                const double t = rep.intensity_hist.center_ns[i];
                const double analytic =
                    pdc::intensity(b, t * 1000.0 / m) * 1000.0 / std::abs(m);
                const double mc =
                    static_cast<double>(rep.intensity_hist.counts[i]) /
                    std::max(nclicks * rep.intensity_hist.bin_width_ns, 1e-300);
                os << t << ',' << analytic << ',' << mc << '\n';
            }
        }
        {
            auto os = open_out(out, "fig3_" + tag + "_g2.csv");
            os << "tau_ns,analytic,mc,stderr\n";
            for (size_t i = 0; i < rep.g2_curve.tau_ns.size(); ++i) {
                const double tau = rep.g2_curve.tau_ns[i];
                if (std::abs(tau) > 0.5 * cfg.experiment().period_ns()) continue;
                os << tau << ',' << pdc::g2_magnified(b, m, tau * 1000.0) << ','
                   << rep.g2_curve.value[i] << ',' << rep.g2_curve.stderr_[i]
                   << '\n';
            }
        }
    }

    // fig5: heralded autocorrelation functions at mu = 0.2
    {
        pdc::RunConfig cfg = base;
        cfg.preset = "ppktp-30ps";
        cfg.mean_pairs = 0.2;
        cfg.herald_efficiency = 1.0;
        const pdc::GaussianBiphoton b = pdc::build_biphoton(cfg.params());
        const pdc::DetectionRecord rec = pdc::run_experiment(cfg.experiment());
        const pdc::EstimateReport rep = pdc::fit_report(rec, cfg.window_ns);
        const double m = cfg.magnification;
        const double period = cfg.experiment().period_ns();
        auto emit = [&](const pdc::Curve& c, bool dh, const std::string& name) {
            auto os = open_out(out, name);
            os << "tau_ns,closed_form,mc,stderr\n";
            for (size_t i = 0; i < c.tau_ns.size(); ++i) {
                const double tau = c.tau_ns[i];
                const bool same = std::abs(tau) < 0.5 * period;
                // closed forms take the source-frame delay tau / M
                const auto hm = pdc::heralded_g2(
                    b, cfg.mean_pairs, tau * 1000.0 / m, same);
                os << tau << ',' << (dh ? hm.dh : hm.sh) << ',' << c.value[i]
                   << ',' << c.stderr_[i] << '\n';
            }
        };
        emit(rep.g2_sh_curve, false, "fig5_sh.csv");
        emit(rep.g2_dh_curve, true, "fig5_dh.csv");
    }
    std::cout << "reproduce: wrote fig2/fig3/fig5 bundles to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-magnified g2 analysis of type-II PDC: closed forms, "
                 "numeric oracle, Monte Carlo detection, estimators"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = "out", format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--preset", preset, "parameter preset (ppktp-3ps, ppktp-30ps)");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
    app.add_option("--threads", threads, "worker thread cap");
    app.add_option("--format", format, "output format: csv or json");

    auto* analyze = app.add_subcommand("analyze", "closed-form scalars and sweep");
    auto* oracle = app.add_subcommand("oracle", "numeric oracle checks");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo detection record");
    auto* estimate = app.add_subcommand("estimate", "estimators on a record file");
    auto* reproduce = app.add_subcommand("reproduce", "figure data bundles");

    std::string record_path, truth_path;
    estimate->add_option("--record", record_path, "record CSV")->required();
    estimate->add_option("--truth", truth_path, "resolved config of the run")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        pdc::RunConfig cfg;
        if (!config_path.empty()) cfg = pdc::config_from_file(config_path);
        if (!preset.empty()) cfg.preset = preset;
        if (const char* env = std::getenv("PDCG2_SEED")) cfg.seed = std::stoull(env);
        seed_set = seed_opt->count() > 0;
        if (seed_set) cfg.seed = seed;
        if (threads > 0) cfg.threads = threads;
        if (!format.empty()) {
            if (format != "csv" && format != "json")
                throw pdc::ConfigInvalid("format must be csv or json");
            cfg.format = format;
        }

        const fs::path out(out_dir);
        if (analyze->parsed()) return cmd_analyze(cfg, out);
        if (oracle->parsed()) return cmd_oracle(cfg, out);
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (estimate->parsed())
            return cmd_estimate_files(record_path, truth_path, out);
        if (reproduce->parsed()) return cmd_reproduce(cfg, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
