#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "snipcorr/time_series.hpp"

namespace snipcorr::seaway {

inline constexpr double kGravity = 9.80665;

struct SeaStateConfig {
    double significant_wave_height = 4.0;  // m
    double modal_period = 15.0;            // s
    double heading = std::numbers::pi;     // rad, pi = head seas
    double ship_speed = 0.0;               // m/s

    double modal_frequency() const { return 2.0 * std::numbers::pi / modal_period; }
    void validate() const;
};

// Frequency components of a Longuet-Higgins superposition.
struct SpectrumDiscretization {
    std::vector<double> frequencies;  // rad/s, strictly increasing
    std::vector<double> amplitudes;   // m
    std::vector<double> phases;       // rad in [0, 2pi)
    double bin_width = 0.0;           // rad/s

    std::size_t size() const noexcept { return frequencies.size(); }
    double variance() const;  // sum a^2/2
    void validate() const;
};

struct FrequencyRange {
    double low;
    double high;
};

// Two-parameter Bretschneider density S(omega) in m^2 s.
double bretschneider_density(const SeaStateConfig& cfg, double omega);

// Default grid [0.3, 4] * omega_m.
FrequencyRange default_range(const SeaStateConfig& cfg);
inline constexpr std::size_t kDefaultComponents = 400;

// Bin-midpoint frequencies with a_i = sqrt(2 S(w_i) dw) and seeded uniform phases.
SpectrumDiscretization discretize(const SeaStateConfig& cfg, std::size_t n_components,
                                  FrequencyRange range, std::uint64_t rng_seed);

// eta(t_j) = sum_i a_i cos(w_i t_j + phi_i), t_j = j*dt.
TimeSeries realize_elevation(const SpectrumDiscretization& disc, std::size_t n_samples, double dt);

// Deep-water head-seas Doppler shift: w_e = w + w^2 U / g. Other headings use
// the general form w - w^2 U cos(heading) / g with heading = pi for head seas.
double encounter_frequency(double omega, const SeaStateConfig& cfg);

// Same components with frequencies mapped to the encounter frame, so that
// realize_elevation gives the elevation seen at the moving ship.
SpectrumDiscretization to_encounter_frame(const SpectrumDiscretization& disc,
                                          const SeaStateConfig& cfg);

// Modal encounter period 2 pi / w_e(w_m).
double modal_encounter_period(const SeaStateConfig& cfg);

// Trapezoid-integrated zeroth moment over [low, high] on n points.
double spectral_moment0(const SeaStateConfig& cfg, FrequencyRange range, std::size_t n_points);

}  // namespace snipcorr::seaway
