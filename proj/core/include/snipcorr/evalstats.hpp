#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace snipcorr::evalstats {

struct MaximaPair {
    double method_max;
    double truth_max;
    std::size_t realization_id;
};
using MaximaSample = std::vector<MaximaPair>;

struct PdfCurve {
    std::vector<double> support;
    std::vector<double> density;

    double integral() const;  // trapezoid
};

struct MetricsReport {
    std::string method;
    std::size_t count = 0;
    double correlation = 0.0;
    double r_squared = 0.0;
    double mpm_method = 0.0;
    double mpm_truth = 0.0;
    double mpm_relative_error = 0.0;
    double mpm_signed_error = 0.0;  // (method - truth) / truth
    double p95_method = 0.0;
    double p95_truth = 0.0;
    double p95_relative_error = 0.0;
    double mean_method = 0.0;
    double mean_truth = 0.0;
    PdfCurve pdf_method;
    PdfCurve pdf_truth;
};

// Pearson coefficient, cov / (sigma_x sigma_y).
double correlation(std::span<const double> x, std::span<const double> y);

// 1 - SS_res / SS_tot. May be negative.
double r_squared(std::span<const double> truth, std::span<const double> estimate);

double silverman_bandwidth(std::span<const double> samples);

inline constexpr std::size_t kDefaultKdeGrid = 2048;

// Gaussian-kernel density on a uniform grid over [min - 3bw, max + 3bw].
PdfCurve kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt,
             std::size_t grid_points = kDefaultKdeGrid);

// Mode of the curve; ties resolve to the lowest support value.
double most_probable_maximum(const PdfCurve& pdf);

// Linear interpolation between order statistics at h = (n - 1) p.
double percentile(std::span<const double> samples, double p);

MetricsReport build_report(const MaximaSample& pairs, std::string method);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace snipcorr::evalstats
