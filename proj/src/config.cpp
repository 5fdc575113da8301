#include "pdc/config.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "pdc/errors.hpp"

namespace pdc {

using nlohmann::json;

PdcParams RunConfig::params() const {
    if (!preset.empty()) return preset_by_name(preset);
    return derive_params(pump_fwhm_ps, tau_o_ps, tau_e_ps, sigma_s,
                         crystal_length_mm, poling_period_um);
}

ExperimentConfig RunConfig::experiment() const {
    ExperimentConfig e;
    e.biphoton = build_biphoton(params());
    e.mean_pairs = mean_pairs;
    e.magnification = magnification;
    e.repetition_rate_mhz = repetition_rate_mhz;
    e.n_pulses = n_pulses;
    e.jitter_sigma_ps = jitter_sigma_ps;
    e.herald_efficiency = herald_efficiency;
    e.seed = seed;
    e.n_threads = threads;
    return e;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, val] : j.items())
        if (!known.count(key))
            throw ConfigInvalid("unknown key '" + key + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

RunConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    reject_unknown(j, {"schema_version", "preset", "params", "experiment",
                       "estimator", "oracle", "sweep", "format"},
                   "config");
    get_if(j, "schema_version", c.schema_version);
    if (c.schema_version != 1)
        throw ConfigInvalid("unsupported schema_version");
    get_if(j, "preset", c.preset);
    get_if(j, "format", c.format);
    if (c.format != "csv" && c.format != "json")
        throw ConfigInvalid("format must be csv or json");

    if (j.contains("params")) {
        const json& p = j.at("params");
        reject_unknown(p,
                       {"pump_fwhm_ps", "tau_o_ps", "tau_e_ps", "sigma_s",
                        "crystal_length_mm", "poling_period_um"},
                       "params");
        c.preset.clear(); // explicit params replace the preset
        get_if(p, "pump_fwhm_ps", c.pump_fwhm_ps);
        get_if(p, "tau_o_ps", c.tau_o_ps);
        get_if(p, "tau_e_ps", c.tau_e_ps);
        get_if(p, "sigma_s", c.sigma_s);
        get_if(p, "crystal_length_mm", c.crystal_length_mm);
        get_if(p, "poling_period_um", c.poling_period_um);
    }
    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        reject_unknown(e,
                       {"mean_pairs", "magnification", "repetition_rate_mhz",
                        "n_pulses", "jitter_sigma_ps", "herald_efficiency",
                        "seed", "threads"},
                       "experiment");
        get_if(e, "mean_pairs", c.mean_pairs);
        get_if(e, "magnification", c.magnification);
        get_if(e, "repetition_rate_mhz", c.repetition_rate_mhz);
        get_if(e, "n_pulses", c.n_pulses);
        get_if(e, "jitter_sigma_ps", c.jitter_sigma_ps);
        get_if(e, "herald_efficiency", c.herald_efficiency);
        get_if(e, "seed", c.seed);
        get_if(e, "threads", c.threads);
    }
    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        reject_unknown(e, {"window_ns"}, "estimator");
        get_if(e, "window_ns", c.window_ns);
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        reject_unknown(o, {"grid_n"}, "oracle");
        get_if(o, "grid_n", c.grid_n);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown(s, {"tau_p_min_ps", "tau_p_max_ps", "points"}, "sweep");
        get_if(s, "tau_p_min_ps", c.sweep_min_ps);
        get_if(s, "tau_p_max_ps", c.sweep_max_ps);
        get_if(s, "points", c.sweep_points);
    }
    c.params(); // validate now
    return c;
}

RunConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json_text(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["preset"] = c.preset;
    j["params"] = {{"pump_fwhm_ps", c.pump_fwhm_ps},
                   {"tau_o_ps", c.tau_o_ps},
                   {"tau_e_ps", c.tau_e_ps},
                   {"sigma_s", c.sigma_s},
                   {"crystal_length_mm", c.crystal_length_mm},
                   {"poling_period_um", c.poling_period_um}};
    if (!c.preset.empty()) {
        const PdcParams p = c.params();
        j["params"] = {{"pump_fwhm_ps", p.pump_fwhm},
                       {"tau_o_ps", p.tau_o},
                       {"tau_e_ps", p.tau_e},
                       {"sigma_s", p.sigma_s},
                       {"crystal_length_mm", p.crystal_length},
                       {"poling_period_um", p.poling_period}};
    }
    j["experiment"] = {{"mean_pairs", c.mean_pairs},
                       {"magnification", c.magnification},
                       {"repetition_rate_mhz", c.repetition_rate_mhz},
                       {"n_pulses", c.n_pulses},
                       {"jitter_sigma_ps", c.jitter_sigma_ps},
                       {"herald_efficiency", c.herald_efficiency},
                       {"seed", c.seed},
                       {"threads", c.threads}};
    j["estimator"] = {{"window_ns", c.window_ns}};
    j["oracle"] = {{"grid_n", c.grid_n}};
    j["sweep"] = {{"tau_p_min_ps", c.sweep_min_ps},
                  {"tau_p_max_ps", c.sweep_max_ps},
                  {"points", c.sweep_points}};
    j["format"] = c.format;
    return j.dump(2);
}

void write_resolved_config(const RunConfig& cfg, std::ostream& os) {
    os << config_to_json_text(cfg) << '\n';
}

} // namespace pdc
