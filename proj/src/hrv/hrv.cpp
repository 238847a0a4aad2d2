#include "circadian/hrv.hpp"

#include <cmath>

namespace circadian {

HrvStats hrv_stats(std::span<const double> rri, double pnn_threshold_ms)
{
    if (rri.size() < 2)
        throw Error("hrv_stats: need at least two intervals");
    HrvStats s;
    s.n_intervals = rri.size();
    const auto n = static_cast<double>(rri.size());
    double sum = 0.0;
    for (double v : rri)
        sum += v;
    s.mean_rr = sum / n;
    double ss = 0.0;
    for (double v : rri)
        ss += (v - s.mean_rr) * (v - s.mean_rr);
    s.sdnn = std::sqrt(ss / (n - 1.0));

    double sq = 0.0;
    std::size_t over = 0;
    for (std::size_t i = 1; i < rri.size(); ++i) {
        const double d = rri[i] - rri[i - 1];
        sq += d * d;
        over += std::fabs(d) > pnn_threshold_ms ? 1 : 0;
    }
    const auto pairs = static_cast<double>(rri.size() - 1);
    s.rmssd = std::sqrt(sq / pairs);
    s.pnn50 = static_cast<double>(over) / pairs;
    return s;
}

std::vector<HrvWindow> compute_hrv_windows(const SampleSeries& rri, const HrvParams& params)
{
    if (!(params.window_s > 0.0))
        throw Error("compute_hrv_windows: window must be positive");
    if (params.min_beats < 2)
        throw Error("compute_hrv_windows: min_beats must be at least 2");
    std::vector<HrvWindow> out;
    if (rri.empty())
        return out;

    const auto window_of = [&](double t) { return static_cast<long long>(std::floor(t / params.window_s + 1e-9)); };
    const long long w0 = window_of(rri.t.front());
    const long long w1 = window_of(rri.t.back());
    out.resize(static_cast<std::size_t>(w1 - w0 + 1));
    std::size_t i = 0;
    for (std::size_t w = 0; w < out.size(); ++w) {
        auto& win = out[w];
        win.start = static_cast<double>(w0 + static_cast<long long>(w)) * params.window_s;
        win.duration = params.window_s;
        const std::size_t first = i;
        while (i < rri.size() && window_of(rri.t[i]) == w0 + static_cast<long long>(w))
            ++i;
        win.n_intervals = i - first;
        if (win.n_intervals >= params.min_beats) {
            win.valid = true;
            win.stats = hrv_stats(std::span(rri.values).subspan(first, win.n_intervals), params.pnn_threshold_ms);
        }
    }
    return out;
}

EpochSeries hrv_series(const std::vector<HrvWindow>& windows, HrvMetric metric)
{
    if (windows.empty())
        return {};
    EpochSeries s(windows.front().start, windows.front().duration, windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!windows[i].valid)
            continue;
        const auto& st = windows[i].stats;
        switch (metric) {
        case HrvMetric::mean_rr: s.set(i, st.mean_rr); break;
        case HrvMetric::sdnn: s.set(i, st.sdnn); break;
        case HrvMetric::rmssd: s.set(i, st.rmssd); break;
        case HrvMetric::pnn50: s.set(i, st.pnn50); break;
        }
    }
    return s;
}

} // namespace circadian
