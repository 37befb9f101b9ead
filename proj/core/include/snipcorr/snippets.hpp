#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snipcorr/hydro.hpp"
#include "snipcorr/time_series.hpp"

namespace snipcorr::snippets {

// Local maxima in chronological order.
struct PeakSet {
    std::vector<std::size_t> indices;
    std::vector<double> values;

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
};

struct PeakOptions {
    std::size_t min_separation = 1;  // samples; peaks closer than this compete
    std::size_t skip_samples = 0;    // leading samples ignored (wave ramp)
};

// Half the modal encounter period, in samples.
std::size_t default_separation(const seaway::SeaStateConfig& cfg, double dt);

// Local maxima (a flat top is reported at its first sample). Within any run of
// candidates closer than min_separation only the largest survives.
PeakSet detect_peaks(const TimeSeries& series, const PeakOptions& opts);

// The k largest peaks, returned chronologically. Equal values rank the
// earlier peak first.
PeakSet top_k(const PeakSet& peaks, std::size_t k);

// Channel order of a snippet's inputs.
inline const std::vector<std::string>& input_channel_names() {
    static const std::vector<std::string> names{"lf_pitch", "lf_heave", "wave"};
    return names;
}
inline constexpr const char* kTargetChannel = "hf_pitch";

struct Snippet {
    std::vector<std::vector<double>> channels;  // input_channel_names() order
    std::optional<std::vector<double>> target;  // hf_pitch
    std::size_t center_index = 0;   // peak sample in the source record
    std::size_t start_index = 0;    // first window sample in the source record
    std::size_t realization_id = 0;

    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

std::size_t window_samples(double window_seconds, double dt);

// Window of round(window_seconds/dt)+1 samples centred on `center`, shifted
// inward when it would overrun either end of the record.
Snippet extract_snippet(const hydro::MotionRecord& low_fidelity, std::size_t center,
                        double window_seconds, const hydro::MotionRecord* high_fidelity = nullptr,
                        std::size_t realization_id = 0);

// Amplitude rank (1-based) of the LF peak nearest in time to the HF global
// maximum, or nullopt when no LF peak lies within the tolerance.
std::optional<std::size_t> relative_rank(const PeakSet& lf_peaks, const TimeSeries& hf_pitch,
                                         std::size_t match_tolerance, std::size_t skip_samples = 0);

struct CoverageCurve {
    std::vector<std::size_t> k_values;  // 1..k_max
    std::vector<double> coverage;       // fraction of realizations matched within top-k
};

// Unmatched realizations (nullopt) never count as covered.
CoverageCurve coverage_curve(const std::vector<std::optional<std::size_t>>& ranks,
                             std::size_t k_max);

struct KChoice {
    std::size_t k;
    bool reached;  // false when no k attains the threshold; k is then k_max
};

KChoice choose_k(const CoverageCurve& curve, double threshold);

// Long-format snippet table, one row per channel sample:
//   realization_id,center_index,channel,sample_index,value
// start_index is not stored and reads back as 0.
enum class SnippetColumns { inputs_and_target, inputs, target };
std::string serialize_snippets(const std::vector<Snippet>& snippets, SnippetColumns columns);
std::vector<Snippet> parse_snippets(std::string_view text);

struct CorrectedWindow {
    std::size_t center_index;
    std::vector<double> values;
};

// Index of the window with the largest maximum; ties go to the earliest centre.
std::size_t select_best_output(const std::vector<CorrectedWindow>& windows);

}  // namespace snipcorr::snippets
