#include "snipcorr/seaway.hpp"

#include <cmath>

#include "snipcorr/error.hpp"
#include "snipcorr/random.hpp"

namespace snipcorr::seaway {

void SeaStateConfig::validate() const {
    if (!(significant_wave_height > 0.0)) throw DomainError("significant wave height must be positive");
    if (!(modal_period > 0.0)) throw DomainError("modal period must be positive");
    if (!(ship_speed >= 0.0)) throw DomainError("ship speed must be non-negative");
}

double SpectrumDiscretization::variance() const {
    double v = 0.0;
    for (double a : amplitudes) v += 0.5 * a * a;
    return v;
}

void SpectrumDiscretization::validate() const {
    if (frequencies.size() != amplitudes.size() || frequencies.size() != phases.size())
        throw ShapeError("spectrum component arrays differ in length");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (amplitudes[i] < 0.0) throw DomainError("negative component amplitude");
        if (i > 0 && !(frequencies[i] > frequencies[i - 1]))
            throw DomainError("component frequencies must be strictly increasing");
    }
}

double bretschneider_density(const SeaStateConfig& cfg, double omega) {
    if (!(omega > 0.0)) throw DomainError("spectral density requires omega > 0");
    const double wm = cfg.modal_frequency();
    const double hs = cfg.significant_wave_height;
    const double r4 = std::pow(wm / omega, 4);
    return (1.25 / 4.0) * r4 / omega * hs * hs * std::exp(-1.25 * r4);
}

FrequencyRange default_range(const SeaStateConfig& cfg) {
    const double wm = cfg.modal_frequency();
    return {0.3 * wm, 4.0 * wm};
}

SpectrumDiscretization discretize(const SeaStateConfig& cfg, std::size_t n_components,
                                  FrequencyRange range, std::uint64_t rng_seed) {
    cfg.validate();
    if (n_components < 1) throw DomainError("discretization needs at least one component");
    if (!(range.low > 0.0) || !(range.high > range.low))
        throw DomainError("frequency range must satisfy 0 < low < high");

    SpectrumDiscretization disc;
    disc.bin_width = (range.high - range.low) / static_cast<double>(n_components);
    disc.frequencies.resize(n_components);
    disc.amplitudes.resize(n_components);
    disc.phases.resize(n_components);

    Rng rng(rng_seed);
    for (std::size_t i = 0; i < n_components; ++i) {
        const double w = range.low + disc.bin_width * (static_cast<double>(i) + 0.5);
        disc.frequencies[i] = w;
        disc.amplitudes[i] = std::sqrt(2.0 * bretschneider_density(cfg, w) * disc.bin_width);
        disc.phases[i] = 2.0 * std::numbers::pi * rng.uniform();
    }
    return disc;
}

TimeSeries realize_elevation(const SpectrumDiscretization& disc, std::size_t n_samples, double dt) {
    if (n_samples < 1) throw DomainError("realization needs at least one sample");
    if (!(dt > 0.0)) throw DomainError("sample interval must be positive");
    disc.validate();

    std::vector<double> eta(n_samples, 0.0);
    // Each component is advanced by a complex rotation, re-anchored every
    // block so rounding drift stays far below 1e-12 m.
    constexpr std::size_t kBlock = 256;
    for (std::size_t i = 0; i < disc.size(); ++i) {
        const double a = disc.amplitudes[i];
        const double w = disc.frequencies[i];
        const double phi = disc.phases[i];
        const double cs = std::cos(w * dt);
        const double sn = std::sin(w * dt);
        for (std::size_t start = 0; start < n_samples; start += kBlock) {
            const double arg = w * static_cast<double>(start) * dt + phi;
            double re = std::cos(arg);
            double im = std::sin(arg);
            const std::size_t stop = std::min(n_samples, start + kBlock);
            for (std::size_t j = start; j < stop; ++j) {
                eta[j] += a * re;
                const double re_next = re * cs - im * sn;
                im = re * sn + im * cs;
                re = re_next;
            }
        }
    }
    return TimeSeries(std::move(eta), dt, 0.0);
}

double encounter_frequency(double omega, const SeaStateConfig& cfg) {
    return omega - omega * omega * cfg.ship_speed * std::cos(cfg.heading) / kGravity;
}

SpectrumDiscretization to_encounter_frame(const SpectrumDiscretization& disc,
                                          const SeaStateConfig& cfg) {
    SpectrumDiscretization out = disc;
    for (double& w : out.frequencies) w = encounter_frequency(w, cfg);
    return out;
}

double modal_encounter_period(const SeaStateConfig& cfg) {
    return 2.0 * std::numbers::pi / encounter_frequency(cfg.modal_frequency(), cfg);
}

double spectral_moment0(const SeaStateConfig& cfg, FrequencyRange range, std::size_t n_points) {
    if (n_points < 2) throw DomainError("moment integration needs two points");
    const double h = (range.high - range.low) / static_cast<double>(n_points - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double w = range.low + h * static_cast<double>(i);
        const double s = w > 0.0 ? bretschneider_density(cfg, w) : 0.0;
        sum += (i == 0 || i + 1 == n_points) ? 0.5 * s : s;
    }
    return sum * h;
}

}  // namespace snipcorr::seaway
