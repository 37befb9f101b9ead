#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snipcorr/seaway.hpp"
#include "snipcorr/time_series.hpp"

namespace snipcorr::hydro {

// One oscillator degree of freedom. Restoring and quadratic damping are
// scaled by a reference amplitude (0.1 rad for pitch/roll, 1 m for heave):
//   x'' + 2 z w x' + q x'|x'| / (w r) + w^2 (x + c x^3 / r^2) = w^2 g F(t)
struct DofCoefficients {
    double natural_period;          // s
    double linear_damping_ratio;    // z, in (0, 1)
    double quadratic_damping_coeff;  // q
    double cubic_restoring_coeff;    // c
    double forcing_gain;             // g
};

// Geometry from the ONRT flared variant particulars; everything else is a
// surrogate coefficient of the fidelity pair.
struct HullConfig {
    double length = 154.0;        // m
    double beam = 18.8;           // m
    double draft = 5.5;           // m
    double displacement = 8730.0;  // t

    DofCoefficients pitch{8.0, 0.08, 0.0, 0.0, 0.7};
    DofCoefficients heave{7.0, 0.15, 0.0, 0.0, 1.0};
    DofCoefficients roll{12.0, 0.05, 0.0, 0.0, 0.0};

    std::size_t stations = 21;  // waterline integration points

    // High-fidelity forcing nonlinearity, applied per station to the local
    // elevation e (m): troughs saturate as s*tanh(e/s), crests gain
    // crest_quadratic*e^2 plus a bounded flare-immersion boost
    // flare_boost*tanh(((e - flare_threshold)/flare_width)^2) above the threshold.
    double fk_saturation_coeff = 0.0;  // s (m); 0 disables trough saturation
    double crest_quadratic_coeff = 0.05;  // 1/m
    double flare_threshold = 2.5;      // m
    double flare_boost = 5.5;          // m
    double flare_width = 0.75;         // m

    // Bow slam: a bounded bow-up moment once the local wave slope at the
    // slam station exceeds slam_steepness.
    double slam_station = 0.4;    // fraction of length forward of midships
    double slam_steepness = 0.05;  // rad
    double slam_moment = 0.0;      // rad of equivalent static pitch
    double slam_width = 0.02;      // rad

    // Low-fidelity degradation: forcing delay and retained quadratic damping.
    double low_fidelity_delay = 1.0;            // s
    double low_fidelity_quadratic_scale = 0.5;  // fraction of the high-fidelity q

    void validate() const;
};

enum class Fidelity { low, high };
const char* fidelity_name(Fidelity f);

struct MotionRecord {
    TimeSeries pitch;  // deg, positive bow-up
    TimeSeries heave;  // m, positive up
    TimeSeries roll;   // deg
    TimeSeries wave;   // m, elevation at the ship
    Fidelity fidelity = Fidelity::high;

    std::size_t size() const { return pitch.size(); }
    void validate() const;
};

struct SimulationSettings {
    std::size_t ramp_samples = 1000;  // linear forcing ramp
    double expected_dt = 0.1;         // s; wave sampling must match
};

MotionRecord simulate_high_fidelity(const TimeSeries& wave, const HullConfig& hull,
                                    const seaway::SeaStateConfig& cfg,
                                    const SimulationSettings& settings = {});

MotionRecord simulate_low_fidelity(const TimeSeries& wave, const HullConfig& hull,
                                   const seaway::SeaStateConfig& cfg,
                                   const SimulationSettings& settings = {});

struct GapSummary {
    std::vector<double> low_maxima;
    std::vector<double> high_maxima;
    std::vector<double> peak_time_offsets;  // s, t(LF max) - t(HF max)
    double maxima_correlation = 0.0;
    double mean_peak_ratio = 0.0;   // mean(LF max) / mean(HF max)
    double mean_time_offset = 0.0;  // s
};

// Summary from per-realization maxima and peak time offsets.
GapSummary summarize_gap(std::vector<double> low_maxima, std::vector<double> high_maxima,
                         std::vector<double> peak_time_offsets);

// Paired ensembles (same waves); statistics skip the first `skip_samples`.
GapSummary fidelity_gap_report(const std::vector<MotionRecord>& low,
                               const std::vector<MotionRecord>& high, std::size_t skip_samples = 0);

}  // namespace snipcorr::hydro
