#include "snipcorr/snippets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "snipcorr/csv.hpp"

#include "snipcorr/error.hpp"

namespace snipcorr::snippets {

std::size_t default_separation(const seaway::SeaStateConfig& cfg, double dt) {
    const double half_period = 0.5 * seaway::modal_encounter_period(cfg);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(half_period / dt)));
}

namespace {

// Descending by value, earlier index first on ties.
std::vector<std::size_t> amplitude_order(const PeakSet& peaks) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return peaks.values[a] > peaks.values[b];
    });
    return order;
}

}  // namespace

PeakSet detect_peaks(const TimeSeries& series, const PeakOptions& opts) {
    const auto& x = series.values;
    const std::size_t n = x.size();
    if (n <= 2) throw DomainError("peak detection needs more than two samples");

    PeakSet candidates;
    std::size_t i = std::max<std::size_t>(1, opts.skip_samples);
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i]) {
                candidates.indices.push_back(i);
                candidates.values.push_back(x[i]);
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    if (opts.min_separation <= 1 || candidates.empty()) return candidates;

    const auto order = amplitude_order(candidates);
    std::vector<bool> kept(candidates.size(), false);
    std::vector<std::size_t> kept_indices;  // sorted sample indices
    for (std::size_t c : order) {
        const std::size_t idx = candidates.indices[c];
        auto it = std::lower_bound(kept_indices.begin(), kept_indices.end(), idx);
        bool clash = false;
        if (it != kept_indices.end() && *it - idx < opts.min_separation) clash = true;
        if (it != kept_indices.begin() && idx - *(it - 1) < opts.min_separation) clash = true;
        if (!clash) {
            kept[c] = true;
            kept_indices.insert(it, idx);
        }
    }
    PeakSet out;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!kept[c]) continue;
        out.indices.push_back(candidates.indices[c]);
        out.values.push_back(candidates.values[c]);
    }
    return out;
}

PeakSet top_k(const PeakSet& peaks, std::size_t k) {
    if (k < 1) throw DomainError("top_k requires k >= 1");
    if (k >= peaks.size()) return peaks;
    auto order = amplitude_order(peaks);
    order.resize(k);
    std::sort(order.begin(), order.end());
    PeakSet out;
    for (std::size_t c : order) {
        out.indices.push_back(peaks.indices[c]);
        out.values.push_back(peaks.values[c]);
    }
    return out;
}

std::size_t window_samples(double window_seconds, double dt) {
    if (!(window_seconds > 0.0) || !(dt > 0.0)) throw DomainError("window and dt must be positive");
    return static_cast<std::size_t>(std::lround(window_seconds / dt)) + 1;
}

Snippet extract_snippet(const hydro::MotionRecord& lf, std::size_t center, double window_seconds,
                        const hydro::MotionRecord* hf, std::size_t realization_id) {
    const std::size_t n = lf.pitch.size();
    const std::size_t len = window_samples(window_seconds, lf.pitch.dt);
    if (n < len) throw DomainError("record shorter than snippet window");
    if (center >= n) throw DomainError("snippet centre outside record");
    if (hf && hf->pitch.size() != n) throw ShapeError("fidelity records differ in length");

    const std::size_t half = (len - 1) / 2;
    std::size_t start = center > half ? center - half : 0;
    start = std::min(start, n - len);

    auto slice = [&](const TimeSeries& ts) {
        return std::vector<double>(ts.values.begin() + static_cast<std::ptrdiff_t>(start),
                                   ts.values.begin() + static_cast<std::ptrdiff_t>(start + len));
    };
    Snippet s;
    s.channels = {slice(lf.pitch), slice(lf.heave), slice(lf.wave)};
    if (hf) s.target = slice(hf->pitch);
    s.center_index = center;
    s.start_index = start;
    s.realization_id = realization_id;
    return s;
}

std::optional<std::size_t> relative_rank(const PeakSet& lf_peaks, const TimeSeries& hf_pitch,
                                         std::size_t match_tolerance, std::size_t skip_samples) {
    if (lf_peaks.empty()) throw DomainError("relative_rank needs at least one peak");
    const auto& y = hf_pitch.values;
    if (skip_samples >= y.size()) throw DomainError("skip window covers the whole record");
    const auto hf_max = static_cast<std::size_t>(
        std::max_element(y.begin() + static_cast<std::ptrdiff_t>(skip_samples), y.end()) - y.begin());

    std::optional<std::size_t> nearest;
    std::size_t best_dist = 0;
    for (std::size_t c = 0; c < lf_peaks.size(); ++c) {
        const std::size_t idx = lf_peaks.indices[c];
        const std::size_t dist = idx > hf_max ? idx - hf_max : hf_max - idx;
        if (dist > match_tolerance) continue;
        if (!nearest || dist < best_dist) {
            nearest = c;
            best_dist = dist;
        }
    }
    if (!nearest) return std::nullopt;
    const auto order = amplitude_order(lf_peaks);
    const auto pos = std::find(order.begin(), order.end(), *nearest) - order.begin();
    return static_cast<std::size_t>(pos) + 1;
}

CoverageCurve coverage_curve(const std::vector<std::optional<std::size_t>>& ranks, std::size_t k_max) {
    if (ranks.empty()) throw DomainError("coverage curve needs at least one rank");
    if (k_max < 1) throw DomainError("coverage curve needs k_max >= 1");
    std::vector<std::size_t> hist(k_max + 1, 0);
    for (const auto& r : ranks)
        if (r && *r >= 1 && *r <= k_max) ++hist[*r];

    CoverageCurve curve;
    std::size_t covered = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        covered += hist[k];
        curve.k_values.push_back(k);
        curve.coverage.push_back(static_cast<double>(covered) / static_cast<double>(ranks.size()));
    }
    return curve;
}

KChoice choose_k(const CoverageCurve& curve, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in (0, 1]");
    if (curve.k_values.empty()) throw DomainError("empty coverage curve");
    for (std::size_t i = 0; i < curve.k_values.size(); ++i)
        if (curve.coverage[i] >= threshold) return {curve.k_values[i], true};
    return {curve.k_values.back(), false};
}

std::string serialize_snippets(const std::vector<Snippet>& snips, SnippetColumns columns) {
    const auto& names = input_channel_names();
    std::string out = "realization_id,center_index,channel,sample_index,value\n";
    auto emit = [&](const Snippet& s, const std::string& name, const std::vector<double>& v) {
        const std::string prefix = std::to_string(s.realization_id) + ',' + std::to_string(s.center_index) + ',' + name + ',';
        for (std::size_t j = 0; j < v.size(); ++j) {
            out += prefix;
            out += std::to_string(j);
            out += ',';
            out += csv::format_double(v[j]);
            out += '\n';
        }
    };
    for (const auto& s : snips) {
        if (columns != SnippetColumns::target)
            for (std::size_t c = 0; c < s.channels.size(); ++c) emit(s, names.at(c), s.channels[c]);
        if (columns != SnippetColumns::inputs) {
            if (!s.target) throw ShapeError("snippet has no target to write");
            emit(s, kTargetChannel, *s.target);
        }
    }
    return out;
}

std::vector<Snippet> parse_snippets(std::string_view text) {
    const auto& names = input_channel_names();
    std::vector<Snippet> out;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> where;
    std::size_t pos = text.find('\n');
    if (pos == std::string_view::npos || text.substr(0, pos) != "realization_id,center_index,channel,sample_index,value")
        throw IoError("not a snippet table");
    ++pos;
    std::size_t line_no = 1;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        std::string_view f[5];
        std::size_t start = 0;
        for (int k = 0; k < 5; ++k) {
            const std::size_t comma = k < 4 ? line.find(',', start) : std::string_view::npos;
            if (k < 4 && comma == std::string_view::npos) throw IoError("snippet table line " + std::to_string(line_no) + " is short");
            f[k] = line.substr(start, k < 4 ? comma - start : std::string_view::npos);
            start = comma + 1;
        }
        const auto rid = static_cast<std::size_t>(csv::parse_double(f[0]));
        const auto center = static_cast<std::size_t>(csv::parse_double(f[1]));
        const auto j = static_cast<std::size_t>(csv::parse_double(f[3]));
        const double value = csv::parse_double(f[4]);

        auto [it, fresh] = where.try_emplace({rid, center}, out.size());
        if (fresh) {
            out.emplace_back();
            out.back().realization_id = rid;
            out.back().center_index = center;
        }
        Snippet& s = out[it->second];
        std::vector<double>* dst = nullptr;
        if (f[2] == kTargetChannel) {
            if (!s.target) s.target.emplace();
            dst = &*s.target;
        } else {
            const auto c = static_cast<std::size_t>(std::find(names.begin(), names.end(), f[2]) - names.begin());
            if (c == names.size()) throw IoError("unknown snippet channel '" + std::string(f[2]) + "'");
            if (s.channels.size() < names.size()) s.channels.resize(names.size());
            dst = &s.channels[c];
        }
        if (j != dst->size()) throw IoError("snippet samples out of order on line " + std::to_string(line_no));
        dst->push_back(value);
    }
    for (const auto& s : out) {
        const std::size_t len = s.target ? s.target->size() : s.length();
        for (const auto& ch : s.channels)
            if (ch.size() != len) throw IoError("snippet channels differ in length");
    }
    return out;
}

std::size_t select_best_output(const std::vector<CorrectedWindow>& windows) {
    if (windows.empty()) throw DomainError("select_best_output needs at least one window");
    std::size_t best = 0;
    double best_max = -INFINITY;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].values.empty()) throw DomainError("empty corrected window");
        const double m = *std::max_element(windows[i].values.begin(), windows[i].values.end());
        if (m > best_max || (m == best_max && windows[i].center_index < windows[best].center_index)) {
            best = i;
            best_max = m;
        }
    }
    return best;
}

}  // namespace snipcorr::snippets
