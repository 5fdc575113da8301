#pragma once

#include <string>

namespace pdc {

// Pump/crystal inputs and the derived dimensionless quantities every other
// module consumes. Units: ps, rad/ps. Immutable after construction.
struct PdcParams {
    double pump_fwhm = 0;      // pump FWHM duration tau_p (ps)
    double tau_o = 0;          // group advance of the ordinary wave (ps)
    double tau_e = 0;          // group advance of the extraordinary wave (ps)
    double sigma_s = 1.61;     // sinc->Gaussian half-width match
    double crystal_length = 0; // mm, informational
    double poling_period = 0;  // um, informational

    double omega_p = 0; // pump spectral scale sqrt(2 ln2)/tau_p (rad/ps)
    double t_o = 0;     // dimensionless advance time sqrt(2) omega_p tau_o / sigma_s
    double t_e = 0;
};

// Validates inputs and fills in the derived fields.
// Throws NonPositiveInput, DegenerateAdvance, InvalidSchmidtDomain.
PdcParams derive_params(double pump_fwhm, double tau_o, double tau_e,
                        double sigma_s = 1.61, double crystal_length = 0,
                        double poling_period = 0);

// Pump duration delta_s * tau_o at which the symmetric-GVM source becomes
// single-mode, delta_s = 2 sqrt(ln 2)/sigma_s.
double single_mode_pump_duration(double tau_o, double sigma_s = 1.61);

// ppKTP at 791.5 nm: tau_o = -tau_e = 2.95 ps, L = 40 mm, poling 47.6 um.
PdcParams ppktp_preset(double pump_fwhm);

// "ppktp-3ps" or "ppktp-30ps". Throws ConfigInvalid on unknown names.
PdcParams preset_by_name(const std::string& name);

} // namespace pdc
