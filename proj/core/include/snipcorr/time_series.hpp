#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snipcorr/error.hpp"

namespace snipcorr {

// Uniformly sampled scalar signal. Sample j sits at t0 + j*dt.
struct TimeSeries {
    std::vector<double> values;
    double dt = 0.1;
    double t0 = 0.0;

    TimeSeries() = default;
    TimeSeries(std::vector<double> v, double step, double start = 0.0)
        : values(std::move(v)), dt(step), t0(start) {
        validate();
    }

    std::size_t size() const noexcept { return values.size(); }
    double time(std::size_t j) const noexcept { return t0 + static_cast<double>(j) * dt; }
    double operator[](std::size_t j) const { return values[j]; }
    std::span<const double> span() const noexcept { return values; }

    void validate() const {
        if (!(dt > 0.0)) throw DomainError("time series dt must be positive");
        if (values.empty()) throw DomainError("time series must hold at least one sample");
    }
};

}  // namespace snipcorr
