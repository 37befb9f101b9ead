#include "snipcorr/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "snipcorr/error.hpp"

namespace snipcorr::evalstats {

namespace {

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

}  // namespace

double PdfCurve::integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < support.size(); ++i)
        s += 0.5 * (density[i] + density[i - 1]) * (support[i] - support[i - 1]);
    return s;
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StatsError("correlation: samples differ in length");
    if (x.size() < 2) throw StatsError("correlation: need at least two samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw StatsError("correlation undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double r_squared(std::span<const double> truth, std::span<const double> estimate) {
    if (truth.size() != estimate.size()) throw StatsError("r_squared: samples differ in length");
    if (truth.size() < 2) throw StatsError("r_squared: need at least two samples");
    const double ybar = mean(truth);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_res += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
        ss_tot += (truth[i] - ybar) * (truth[i] - ybar);
    }
    if (ss_tot == 0.0) throw StatsError("r_squared undefined: zero truth variance");
    return 1.0 - ss_res / ss_tot;
}

double silverman_bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw StatsError("bandwidth: need at least two samples");
    const double m = mean(samples);
    double ss = 0.0;
    for (double v : samples) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

PdfCurve kde(std::span<const double> samples, std::optional<double> bandwidth,
             std::size_t grid_points) {
    if (samples.size() < 2) throw StatsError("kde: need at least two samples");
    if (grid_points < 2) throw StatsError("kde: grid needs at least two points");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    if (*lo_it == *hi_it)
        throw StatsError("kde: all samples identical; report a point mass instead");
    const double bw = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    if (!(bw > 0.0)) throw StatsError("kde: bandwidth must be positive");

    PdfCurve pdf;
    const double lo = *lo_it - 3.0 * bw;
    const double hi = *hi_it + 3.0 * bw;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    pdf.support.resize(grid_points);
    pdf.density.resize(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double x = lo + step * static_cast<double>(g);
        double s = 0.0;
        for (double v : samples) {
            const double u = (x - v) / bw;
            s += std::exp(-0.5 * u * u);
        }
        pdf.support[g] = x;
        pdf.density[g] = s * norm;
    }
    return pdf;
}

double most_probable_maximum(const PdfCurve& pdf) {
    if (pdf.support.empty() || pdf.support.size() != pdf.density.size())
        throw StatsError("most_probable_maximum: invalid curve");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pdf.density.size(); ++i)
        if (pdf.density[i] > pdf.density[best]) best = i;
    return pdf.support[best];
}

double percentile(std::span<const double> samples, double p) {
    if (samples.empty()) throw StatsError("percentile: empty sample");
    if (!(p > 0.0 && p < 1.0)) throw StatsError("percentile: p must lie in (0, 1)");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricsReport build_report(const MaximaSample& pairs, std::string method) {
    if (pairs.size() < 10) throw StatsError("build_report: need at least 10 pairs");
    std::vector<double> m, t;
    m.reserve(pairs.size());
    t.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (!std::isfinite(p.method_max) || !std::isfinite(p.truth_max))
            throw StatsError("build_report: non-finite maximum for realization " +
                             std::to_string(p.realization_id));
        m.push_back(p.method_max);
        t.push_back(p.truth_max);
    }

    MetricsReport r;
    r.method = std::move(method);
    r.count = pairs.size();
    r.correlation = correlation(m, t);
    r.r_squared = r_squared(t, m);
    r.pdf_method = kde(m);
    r.pdf_truth = kde(t);
    r.mpm_method = most_probable_maximum(r.pdf_method);
    r.mpm_truth = most_probable_maximum(r.pdf_truth);
    r.mpm_signed_error = (r.mpm_method - r.mpm_truth) / r.mpm_truth;
    r.mpm_relative_error = std::abs(r.mpm_signed_error);
    r.p95_method = percentile(m, 0.95);
    r.p95_truth = percentile(t, 0.95);
    r.p95_relative_error = std::abs(r.p95_method - r.p95_truth) / r.p95_truth;
    r.mean_method = mean(m);
    r.mean_truth = mean(t);
    return r;
}

nlohmann::json to_json(const MetricsReport& r) {
    return nlohmann::json{
        {"method", r.method},
        {"count", r.count},
        {"correlation", r.correlation},
        {"r_squared", r.r_squared},
        {"mpm_method", r.mpm_method},
        {"mpm_truth", r.mpm_truth},
        {"mpm_relative_error", r.mpm_relative_error},
        {"mpm_signed_error", r.mpm_signed_error},
        {"p95_method", r.p95_method},
        {"p95_truth", r.p95_truth},
        {"p95_relative_error", r.p95_relative_error},
        {"mean_method", r.mean_method},
        {"mean_truth", r.mean_truth},
    };
}

}  // namespace snipcorr::evalstats
