#include "pdc/params.hpp"

#include <cmath>

#include "pdc/errors.hpp"

namespace pdc {

PdcParams derive_params(double pump_fwhm, double tau_o, double tau_e,
                        double sigma_s, double crystal_length,
                        double poling_period) {
    if (!(pump_fwhm > 0)) throw NonPositiveInput("pump_fwhm must be > 0");
    if (!(sigma_s > 0)) throw NonPositiveInput("sigma_s must be > 0");
    if (tau_o == tau_e)
        throw DegenerateAdvance("tau_o == tau_e: JTA amplitude diverges");

    PdcParams p;
    p.pump_fwhm = pump_fwhm;
    p.tau_o = tau_o;
    p.tau_e = tau_e;
    p.sigma_s = sigma_s;
    p.crystal_length = crystal_length;
    p.poling_period = poling_period;
    p.omega_p = std::sqrt(2.0 * std::log(2.0)) / pump_fwhm;
    p.t_o = std::sqrt(2.0) * p.omega_p * tau_o / sigma_s;
    p.t_e = std::sqrt(2.0) * p.omega_p * tau_e / sigma_s;

    // The Schmidt construction degenerates on the surface 1 + t_o t_e = 0
    // (there the coherence time diverges). Either sign away from it is fine;
    // the closed forms carry |1 + t_o t_e|.
    const double dom = 1.0 + p.t_o * p.t_e;
    if (std::abs(dom) < 1e-12 * std::max(1.0, std::abs(p.t_o * p.t_e)))
        throw InvalidSchmidtDomain("1 + t_o*t_e = 0: degenerate Schmidt domain");
    return p;
}

double single_mode_pump_duration(double tau_o, double sigma_s) {
    if (!(tau_o > 0)) throw NonPositiveInput("tau_o must be > 0");
    if (!(sigma_s > 0)) throw NonPositiveInput("sigma_s must be > 0");
    const double delta_s = 2.0 * std::sqrt(std::log(2.0)) / sigma_s;
    return delta_s * tau_o;
}

PdcParams ppktp_preset(double pump_fwhm) {
    return derive_params(pump_fwhm, 2.95, -2.95, 1.61, 40.0, 47.6);
}

PdcParams preset_by_name(const std::string& name) {
    if (name == "ppktp-3ps") return ppktp_preset(3.0);
    if (name == "ppktp-30ps") return ppktp_preset(30.0);
    throw ConfigInvalid("unknown preset: " + name);
}

} // namespace pdc
