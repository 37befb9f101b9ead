#include "snipcorr/hydro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "snipcorr/evalstats.hpp"

namespace snipcorr::hydro {

namespace {

constexpr double kPitchReference = 0.1;  // rad
constexpr double kHeaveReference = 1.0;  // m
constexpr double kSlopeHalfSpan = 2.0;   // m, finite-difference half span at the slam station

struct Oscillator {
    double omega;
    double zeta;
    double quadratic;
    double cubic;
    double gain;
    double reference;

    Oscillator(const DofCoefficients& c, double ref, bool linear, double q_scale)
        : omega(2.0 * std::numbers::pi / c.natural_period),
          zeta(c.linear_damping_ratio),
          quadratic(c.quadratic_damping_coeff * q_scale),
          cubic(linear ? 0.0 : c.cubic_restoring_coeff),
          gain(c.forcing_gain),
          reference(ref) {}

    double acceleration(double x, double v, double force) const {
        const double w2 = omega * omega;
        double a = -2.0 * zeta * omega * v - w2 * x + w2 * gain * force;
        if (quadratic != 0.0) a -= quadratic * v * std::abs(v) / (omega * reference);
        if (cubic != 0.0) a -= w2 * cubic * x * x * x / (reference * reference);
        return a;
    }
};

// Elevation along the hull under a frozen-pattern assumption: the record at
// the ship reference point is shifted by x / V_rel for a station at x.
class HullForcing {
public:
    HullForcing(const TimeSeries& wave, const HullConfig& hull, const seaway::SeaStateConfig& cfg,
                const SimulationSettings& settings, bool linear)
        : eta_(wave.values),
          dt_(wave.dt),
          hull_(hull),
          linear_(linear),
          lag_(linear ? hull.low_fidelity_delay : 0.0) {
        const double wm = cfg.modal_frequency();
        rel_speed_ = seaway::kGravity / wm - cfg.ship_speed * std::cos(cfg.heading);
        if (!(rel_speed_ > 0.0))
            throw DomainError("relative wave speed must be positive; following seas faster than the waves are not supported");
        ramp_time_ = static_cast<double>(settings.ramp_samples) * dt_;
        const std::size_t n = hull.stations;
        x_.resize(n);
        for (std::size_t s = 0; s < n; ++s)
            x_[s] = -hull.length / 2.0 + hull.length * (static_cast<double>(s) + 0.5) / static_cast<double>(n);
        xx_ = std::inner_product(x_.begin(), x_.end(), x_.begin(), 0.0);
    }

    // Returns {heave force (m), pitch force (rad)}.
    std::array<double, 2> operator()(double t) const {
        const double ramp = ramp_time_ > 0.0 ? std::min(1.0, t / ramp_time_) : 1.0;
        double sum = 0.0;
        double moment = 0.0;
        for (double x : x_) {
            double e = sample(t - lag_ + x / rel_speed_) * ramp;
            if (!linear_) e = shape(e);
            sum += e;
            moment += x * e;
        }
        double pitch = moment / xx_;
        if (!linear_ && hull_.slam_moment > 0.0) {
            const double xb = hull_.slam_station * hull_.length;
            const double slope = (sample(t + (xb + kSlopeHalfSpan) / rel_speed_) -
                                  sample(t + (xb - kSlopeHalfSpan) / rel_speed_)) /
                                 (2.0 * kSlopeHalfSpan) * ramp;
            const double excess = std::abs(slope) - hull_.slam_steepness;
            if (excess > 0.0) {
                const double u = excess / hull_.slam_width;
                pitch += hull_.slam_moment * std::tanh(u * u);
            }
        }
        return {sum / static_cast<double>(x_.size()), pitch};
    }

private:
    double sample(double t) const {
        const double s = t / dt_;
        if (s <= 0.0) return eta_.front();
        const double last = static_cast<double>(eta_.size() - 1);
        if (s >= last) return eta_.back();
        const auto i = static_cast<std::size_t>(s);
        const double f = s - static_cast<double>(i);
        return eta_[i] * (1.0 - f) + eta_[i + 1] * f;
    }

    double shape(double e) const {
        if (e < 0.0) {
            const double s = hull_.fk_saturation_coeff;
            return s > 0.0 ? s * std::tanh(e / s) : e;
        }
        double out = e + hull_.crest_quadratic_coeff * e * e;
        if (e > hull_.flare_threshold && hull_.flare_boost > 0.0) {
            const double u = (e - hull_.flare_threshold) / hull_.flare_width;
            out += hull_.flare_boost * std::tanh(u * u);
        }
        return out;
    }

    const std::vector<double>& eta_;
    double dt_;
    const HullConfig& hull_;
    bool linear_;
    double lag_;
    double rel_speed_ = 0.0;
    double ramp_time_ = 0.0;
    std::vector<double> x_;
    double xx_ = 0.0;
};

MotionRecord simulate(const TimeSeries& wave, const HullConfig& hull, const seaway::SeaStateConfig& cfg,
                      const SimulationSettings& settings, Fidelity fidelity) {
    wave.validate();
    hull.validate();
    cfg.validate();
    if (std::abs(wave.dt - settings.expected_dt) > 1e-9 * settings.expected_dt)
        throw DomainError("wave record dt does not match the simulation step");

    const bool linear = fidelity == Fidelity::low;
    const double q_scale = linear ? hull.low_fidelity_quadratic_scale : 1.0;
    const Oscillator pitch(hull.pitch, kPitchReference, linear, q_scale);
    const Oscillator heave(hull.heave, kHeaveReference, linear, q_scale);
    const HullForcing force(wave, hull, cfg, settings, linear);

    const std::size_t n = wave.size();
    const double dt = wave.dt;
    std::vector<double> th(n), z(n);

    // state: pitch, pitch rate, heave, heave rate
    using State = std::array<double, 4>;
    auto deriv = [&](const State& y, double t) {
        const auto f = force(t);
        return State{y[1], pitch.acceleration(y[0], y[1], f[1]), y[3], heave.acceleration(y[2], y[3], f[0])};
    };
    auto axpy = [](const State& y, double h, const State& k) {
        return State{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
    };

    State y{0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(y[0]) || !std::isfinite(y[2]))
            throw SimulationError(std::string(fidelity_name(fidelity)) + "-fidelity simulation produced a non-finite state", j);
        th[j] = y[0] * 180.0 / std::numbers::pi;
        z[j] = y[2];
        const double t = static_cast<double>(j) * dt;
        const State k1 = deriv(y, t);
        const State k2 = deriv(axpy(y, dt / 2.0, k1), t + dt / 2.0);
        const State k3 = deriv(axpy(y, dt / 2.0, k2), t + dt / 2.0);
        const State k4 = deriv(axpy(y, dt, k3), t + dt);
        for (int i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    MotionRecord rec;
    rec.pitch = TimeSeries(std::move(th), dt, wave.t0);
    rec.heave = TimeSeries(std::move(z), dt, wave.t0);
    rec.roll = TimeSeries(std::vector<double>(n, 0.0), dt, wave.t0);  // head seas excite no roll
    rec.wave = wave;
    rec.fidelity = fidelity;
    return rec;
}

void check_dof(const DofCoefficients& c, const char* name) {
    auto fail = [&](const char* what) { throw ConfigError(std::string(name) + ": " + what); };
    if (!(c.natural_period > 0.0) || !std::isfinite(c.natural_period)) fail("natural_period must be positive");
    if (!(c.linear_damping_ratio > 0.0 && c.linear_damping_ratio < 1.0)) fail("linear_damping_ratio must be in (0, 1)");
    if (!(c.quadratic_damping_coeff >= 0.0)) fail("quadratic_damping_coeff must be non-negative");
    if (!(c.cubic_restoring_coeff >= 0.0)) fail("cubic_restoring_coeff must be non-negative");
    if (!std::isfinite(c.forcing_gain)) fail("forcing_gain must be finite");
}

}  // namespace

void HullConfig::validate() const {
    if (!(length > 0.0 && beam > 0.0 && draft > 0.0 && displacement > 0.0))
        throw ConfigError("hull particulars must be positive");
    check_dof(pitch, "pitch");
    check_dof(heave, "heave");
    check_dof(roll, "roll");
    if (stations < 2) throw ConfigError("hull needs at least two stations");
    if (!(fk_saturation_coeff >= 0.0)) throw ConfigError("fk_saturation_coeff must be non-negative");
    if (!(crest_quadratic_coeff >= 0.0)) throw ConfigError("crest_quadratic_coeff must be non-negative");
    if (!(flare_boost >= 0.0) || !(flare_width > 0.0)) throw ConfigError("flare boost must be >= 0 and width > 0");
    if (!(slam_moment >= 0.0) || !(slam_width > 0.0) || !(slam_steepness >= 0.0))
        throw ConfigError("slam moment/steepness must be >= 0 and width > 0");
    if (!(slam_station >= -0.5 && slam_station <= 0.5)) throw ConfigError("slam_station must lie on the hull");
    if (!(low_fidelity_delay >= 0.0)) throw ConfigError("low_fidelity_delay must be non-negative");
    if (!(low_fidelity_quadratic_scale >= 0.0 && low_fidelity_quadratic_scale <= 1.0))
        throw ConfigError("low_fidelity_quadratic_scale must be in [0, 1]");
}

const char* fidelity_name(Fidelity f) {
    return f == Fidelity::low ? "low" : "high";
}

void MotionRecord::validate() const {
    pitch.validate();
    const std::size_t n = pitch.size();
    if (heave.size() != n || roll.size() != n || wave.size() != n)
        throw ShapeError("motion record channels differ in length");
    for (const TimeSeries* ts : {&pitch, &heave, &roll, &wave})
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(ts->values[j])) throw SimulationError("non-finite motion sample", j);
}

MotionRecord simulate_high_fidelity(const TimeSeries& wave, const HullConfig& hull,
                                    const seaway::SeaStateConfig& cfg, const SimulationSettings& settings) {
    return simulate(wave, hull, cfg, settings, Fidelity::high);
}

MotionRecord simulate_low_fidelity(const TimeSeries& wave, const HullConfig& hull,
                                   const seaway::SeaStateConfig& cfg, const SimulationSettings& settings) {
    return simulate(wave, hull, cfg, settings, Fidelity::low);
}

GapSummary summarize_gap(std::vector<double> low_maxima, std::vector<double> high_maxima,
                         std::vector<double> peak_time_offsets) {
    if (low_maxima.size() != high_maxima.size() || low_maxima.size() != peak_time_offsets.size())
        throw ShapeError("gap summary inputs differ in length");
    if (low_maxima.size() < 2) throw ShapeError("gap report needs at least two realizations");
    GapSummary out;
    out.low_maxima = std::move(low_maxima);
    out.high_maxima = std::move(high_maxima);
    out.peak_time_offsets = std::move(peak_time_offsets);
    const double n = static_cast<double>(out.low_maxima.size());
    out.maxima_correlation = evalstats::correlation(out.low_maxima, out.high_maxima);
    const double ml = std::accumulate(out.low_maxima.begin(), out.low_maxima.end(), 0.0) / n;
    const double mh = std::accumulate(out.high_maxima.begin(), out.high_maxima.end(), 0.0) / n;
    out.mean_peak_ratio = ml / mh;
    out.mean_time_offset = std::accumulate(out.peak_time_offsets.begin(), out.peak_time_offsets.end(), 0.0) / n;
    return out;
}

GapSummary fidelity_gap_report(const std::vector<MotionRecord>& low, const std::vector<MotionRecord>& high,
                               std::size_t skip_samples) {
    if (low.size() != high.size()) throw ShapeError("gap report needs paired ensembles");
    std::vector<double> lm, hm, off;
    for (std::size_t r = 0; r < low.size(); ++r) {
        const auto& lp = low[r].pitch;
        const auto& hp = high[r].pitch;
        if (lp.size() != hp.size()) throw ShapeError("paired records differ in length");
        if (skip_samples >= lp.size()) throw ShapeError("skip covers the whole record");
        const auto lb = lp.values.begin() + static_cast<std::ptrdiff_t>(skip_samples);
        const auto hb = hp.values.begin() + static_cast<std::ptrdiff_t>(skip_samples);
        const auto li = std::max_element(lb, lp.values.end());
        const auto hi = std::max_element(hb, hp.values.end());
        lm.push_back(*li);
        hm.push_back(*hi);
        off.push_back(lp.time(static_cast<std::size_t>(li - lp.values.begin())) -
                      hp.time(static_cast<std::size_t>(hi - hp.values.begin())));
    }
    return summarize_gap(std::move(lm), std::move(hm), std::move(off));
}

}  // namespace snipcorr::hydro
