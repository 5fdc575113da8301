#include "pdc/simulate.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

#include "pdc/errors.hpp"
#include "pdc/schmidt.hpp"

namespace pdc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

PulseRng::PulseRng(std::uint64_t seed, std::uint64_t pulse)
    : state_(mix64(seed) ^ mix64(pulse * 0xD1342543DE82EF95ull + 0x632BE59BD9B4E019ull)) {}

std::uint64_t PulseRng::next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double PulseRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double PulseRng::next_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double PulseRng::next_normal() {
    const double u1 = next_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const ExperimentConfig& cfg) {
    if (!(cfg.mean_pairs > 0 && cfg.mean_pairs <= 0.3))
        throw ConfigInvalid("mean_pairs must be in (0, 0.3]");
    if (cfg.magnification == 0) throw ConfigInvalid("magnification must be nonzero");
    if (!(cfg.repetition_rate_mhz > 0))
        throw ConfigInvalid("repetition_rate_mhz must be > 0");
    if (cfg.jitter_sigma_ps < 0) throw ConfigInvalid("jitter_sigma_ps must be >= 0");
    if (!(cfg.herald_efficiency >= 0 && cfg.herald_efficiency <= 1))
        throw ConfigInvalid("herald_efficiency must be in [0, 1]");
    if (cfg.n_threads < 1) throw ConfigInvalid("n_threads must be >= 1");
    const double spread_ns =
        std::abs(cfg.magnification) * cfg.biphoton.delta_t_o / 1000.0;
    if (!(cfg.period_ns() > 6.0 * spread_ns))
        throw ConfigInvalid("repetition period must exceed 6 |M| delta_t_o");
}

PulseSampler::PulseSampler(const ExperimentConfig& cfg)
    : delta_t_o_(cfg.biphoton.delta_t_o),
      delta_tau_o_(cfg.biphoton.delta_tau_o),
      herald_efficiency_(cfg.herald_efficiency) {
    const double k = schmidt_number(cfg.biphoton.params);
    // enough modes that the neglected mean pair number is < 1e-12
    const int n = default_n_max(k, 1e-12 / cfg.mean_pairs) + 1;
    const double q2 = (k - 1.0) / (k + 1.0);
    double lam = 2.0 / (k + 1.0);
    p_mode_.resize(static_cast<size_t>(n));
    for (auto& p : p_mode_) {
        const double mu_n = cfg.mean_pairs * lam;
        p = mu_n / (1.0 + mu_n);
        lam *= q2;
    }
}

std::pair<std::vector<double>, bool> PulseSampler::sample_pulse(
    PulseRng& rng) const {
    int m = 0;
    for (const double p : p_mode_) {
        const double u = rng.next_open();
        if (u < p) m += 1 + static_cast<int>(std::log(u) / std::log(p));
    }
    std::vector<double> times;
    if (m > 0) {
        times.resize(static_cast<size_t>(m));
        if (m == 1) {
            times[0] = delta_t_o_ * rng.next_normal();
        } else {
            // Exchange-symmetrized m-photon density: propose independent
            // Gaussians, accept with permanent[g1(t_i - t_j)] / m!.
            const double inv2dtau2 = 1.0 / (2.0 * delta_tau_o_ * delta_tau_o_);
            while (true) {
                for (auto& t : times) t = delta_t_o_ * rng.next_normal();
                double accept;
                if (m == 2) {
                    const double d = times[0] - times[1];
                    accept = 0.5 * (1.0 + std::exp(-2.0 * inv2dtau2 * d * d));
                } else if (m > 20) {
                    accept = 1.0; // beyond any reachable multiplicity
                } else {
                    // Ryser permanent of the m x m amplitude kernel
                    double perm = 0;
                    const std::uint32_t full = (1u << m) - 1;
                    for (std::uint32_t sub = 1; sub <= full; ++sub) {
                        double prod = 1.0;
                        for (int i = 0; i < m; ++i) {
                            double row = 0;
                            for (int j = 0; j < m; ++j)
                                if (sub & (1u << j)) {
                                    const double d = times[static_cast<size_t>(i)] -
                                                     times[static_cast<size_t>(j)];
                                    row += std::exp(-inv2dtau2 * d * d);
                                }
                            prod *= row;
                        }
                        perm += (std::popcount(full ^ sub) & 1 ? -1.0 : 1.0) * prod;
                    }
                    double fact = 1;
                    for (int i = 2; i <= m; ++i) fact *= i;
                    accept = perm / fact;
                }
                if (rng.next_double() < accept) break;
            }
        }
    }
    bool herald = false;
    if (m > 0 && herald_efficiency_ > 0) {
        const double miss = std::pow(1.0 - herald_efficiency_, m);
        herald = rng.next_double() < 1.0 - miss;
    }
    return {std::move(times), herald};
}

void detect(const std::vector<double>& ordinary_times_ps, bool herald,
            std::uint64_t pulse, PulseRng& rng, const ExperimentConfig& cfg,
            std::vector<Click>& out) {
    const double epoch = static_cast<double>(pulse) * cfg.period_ns();
    double first1 = 0, first2 = 0;
    bool has1 = false, has2 = false;
    for (const double t : ordinary_times_ps) {
        const bool to_d1 = rng.next_double() < 0.5;
        double time = epoch + cfg.magnification * t / 1000.0;
        if (cfg.jitter_sigma_ps > 0)
            time += cfg.jitter_sigma_ps / 1000.0 * rng.next_normal();
        if (to_d1) {
            if (!has1 || time < first1) first1 = time, has1 = true;
        } else {
            if (!has2 || time < first2) first2 = time, has2 = true;
        }
    }
    if (has1) out.push_back({pulse, Detector::d1, first1});
    if (has2) out.push_back({pulse, Detector::d2, first2});
    if (herald) out.push_back({pulse, Detector::d3, epoch});
}

DetectionRecord run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    DetectionRecord rec;
    rec.truth = cfg;
    if (cfg.n_pulses == 0) return rec;

    const PulseSampler sampler(cfg);
    const int nthreads =
        static_cast<int>(std::min<std::uint64_t>(cfg.n_threads, cfg.n_pulses));

    struct Local {
        std::vector<Click> clicks;
        PairCounters counters;
    };
    std::vector<Local> locals(static_cast<size_t>(nthreads));

    auto work = [&](int w) {
        Local& loc = locals[static_cast<size_t>(w)];
        const std::uint64_t lo = cfg.n_pulses * w / nthreads;
        const std::uint64_t hi = cfg.n_pulses * (w + 1) / nthreads;
        loc.clicks.reserve(static_cast<size_t>(
            2.2 * cfg.mean_pairs * static_cast<double>(hi - lo) + 64));
        for (std::uint64_t p = lo; p < hi; ++p) {
            PulseRng rng(cfg.seed, p);
            auto [times, herald] = sampler.sample_pulse(rng);
            switch (times.size()) {
                case 0: ++loc.counters.zero; break;
                case 1: ++loc.counters.one; break;
                case 2: ++loc.counters.two; break;
                default: ++loc.counters.three_plus; break;
            }
            detect(times, herald, p, rng, cfg, loc.clicks);
        }
    };

    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nthreads));
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    size_t total = 0;
    for (const auto& loc : locals) total += loc.clicks.size();
    rec.clicks.reserve(total);
    for (auto& loc : locals) {
        rec.clicks.insert(rec.clicks.end(), loc.clicks.begin(), loc.clicks.end());
        rec.counters.zero += loc.counters.zero;
        rec.counters.one += loc.counters.one;
        rec.counters.two += loc.counters.two;
        rec.counters.three_plus += loc.counters.three_plus;
    }
    std::sort(rec.clicks.begin(), rec.clicks.end(),
              [](const Click& a, const Click& b) {
                  if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
                  if (a.pulse != b.pulse) return a.pulse < b.pulse;
                  return static_cast<int>(a.det) < static_cast<int>(b.det);
              });
    return rec;
}

namespace {

void append_double(std::string& s, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    s.append(buf, res.ptr);
}

} // namespace

void write_record_csv(const DetectionRecord& rec, std::ostream& os) {
    os << "pulse_index,detector,time_ns\n";
    std::string line;
    for (const Click& c : rec.clicks) {
        line.clear();
        line += std::to_string(c.pulse);
        line += c.det == Detector::d1 ? ",D1," : c.det == Detector::d2 ? ",D2," : ",D3,";
        if (c.det != Detector::d3) append_double(line, c.time_ns);
        line += '\n';
        os << line;
    }
}

DetectionRecord read_record_csv(std::istream& is, const ExperimentConfig& truth) {
    DetectionRecord rec;
    rec.truth = truth;
    std::string line;
    if (!std::getline(is, line) || line.rfind("pulse_index,", 0) != 0)
        throw ConfigInvalid("record CSV missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ConfigInvalid("malformed record row: " + line);
        Click c;
        c.pulse = std::stoull(line.substr(0, c1));
        const std::string det = line.substr(c1 + 1, c2 - c1 - 1);
        if (det == "D1")
            c.det = Detector::d1;
        else if (det == "D2")
            c.det = Detector::d2;
        else if (det == "D3")
            c.det = Detector::d3;
        else
            throw ConfigInvalid("unknown detector: " + det);
        if (c.det == Detector::d3) {
            c.time_ns = static_cast<double>(c.pulse) * truth.period_ns();
        } else {
            const std::string t = line.substr(c2 + 1);
            auto res = std::from_chars(t.data(), t.data() + t.size(), c.time_ns);
            if (res.ec != std::errc{})
                throw ConfigInvalid("bad time field: " + t);
        }
        rec.clicks.push_back(c);
    }
    return rec;
}

} // namespace pdc
