#include "circadian/ingest.hpp"
#include "internal/text.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace circadian {

namespace detail {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

namespace {

struct Schema {
    std::vector<std::string_view> header;
    std::size_t value_col;
    std::optional<std::size_t> quality_col;
};

Schema schema_for(SignalKind kind)
{
    static const std::vector<std::string_view> accel{"t_unix_ms", "x_g", "y_g", "z_g"};
    static const std::vector<std::string_view> temp{"t_unix_ms", "cbt_c", "skin_c", "quality"};
    switch (kind) {
    case SignalKind::accel_x: return {accel, 1, std::nullopt};
    case SignalKind::accel_y: return {accel, 2, std::nullopt};
    case SignalKind::accel_z: return {accel, 3, std::nullopt};
    case SignalKind::rri: return {{"t_unix_ms", "rri_ms"}, 1, std::nullopt};
    case SignalKind::hr: return {{"t_unix_ms", "bpm"}, 1, std::nullopt};
    case SignalKind::cbt: return {temp, 1, 3};
    case SignalKind::skin_t: return {temp, 2, 3};
    case SignalKind::accel_vm: break;
    }
    throw Error("no file schema for signal kind " + std::string(to_string(kind)));
}

struct Row {
    double t;
    std::array<double, 3> v;
    int quality;
};

/// Parses a numeric CSV with the given header. Columns 1..k are read as
/// doubles; quality_col (if any) as an integer 1..4.
std::vector<Row> parse_rows(const std::filesystem::path& path, const std::vector<std::string_view>& header,
                            std::optional<std::size_t> quality_col, const LoadOptions& opts, LoadReport& report)
{
    const std::string text = detail::read_file(path.string());
    const auto lines = detail::lines_of(text);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty())
        ++first;
    if (first == lines.size())
        throw Error(fmt::format("{}: empty file", path.string()));

    std::vector<std::string_view> fields;
    detail::split(lines[first], ',', fields);
    if (fields != header) {
        std::string expected;
        for (auto h : header)
            expected += (expected.empty() ? "" : ",") + std::string(h);
        throw Error(fmt::format("{}:{}: expected header '{}'", path.string(), first + 1, expected));
    }

    std::vector<Row> rows;
    rows.reserve(lines.size());
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty())
            continue;
        ++report.rows_read;
        detail::split(lines[li], ',', fields);
        bool ok = fields.size() == header.size();
        Row row{0.0, {0.0, 0.0, 0.0}, 0};
        if (ok) {
            const auto t = detail::parse_double(fields[0]);
            ok = t.has_value();
            if (ok)
                row.t = *t / 1000.0;
        }
        for (std::size_t c = 1; ok && c < fields.size(); ++c) {
            if (quality_col && c == *quality_col) {
                const auto q = detail::parse_int(fields[c]);
                ok = q && *q >= 1 && *q <= 4;
                if (ok)
                    row.quality = static_cast<int>(*q);
            } else {
                const auto v = detail::parse_double(fields[c]);
                ok = v.has_value();
                if (ok && c - 1 < row.v.size())
                    row.v[c - 1] = *v;
            }
        }
        if (!ok) {
            if (opts.strict)
                throw Error(fmt::format("{}:{}: malformed row", path.string(), li + 1));
            ++report.rows_dropped;
            report.bad_lines.push_back(li + 1);
            continue;
        }
        rows.push_back(row);
    }
    if (rows.empty())
        throw Error(fmt::format("{}: no valid data rows", path.string()));

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    const auto before = rows.size();
    rows.erase(std::unique(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t == b.t; }),
               rows.end());
    report.duplicates_dropped = before - rows.size();
    return rows;
}

double round_significant(double v, int digits)
{
    if (v == 0.0)
        return 0.0;
    const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(v)))));
    return std::round(v * scale) / scale;
}

/// Rate over the regular part of the stream: intervals within 50% of the median.
std::optional<double> estimate_rate(const std::vector<double>& t)
{
    if (t.size() < 2)
        return std::nullopt;
    std::vector<double> dt(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        dt[i - 1] = t[i] - t[i - 1];
    std::vector<double> sorted = dt;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    double total = 0.0;
    std::size_t n = 0;
    for (double d : dt)
        if (d >= 0.5 * median && d <= 1.5 * median) {
            total += d;
            ++n;
        }
    if (n == 0 || total <= 0.0)
        return std::nullopt;
    return round_significant(static_cast<double>(n) / total, 4);
}

} // namespace

LoadedSignal load_signal(const std::filesystem::path& path, SignalKind kind, const LoadOptions& opts)
{
    const Schema schema = schema_for(kind);
    LoadedSignal out;
    const auto rows = parse_rows(path, schema.header, schema.quality_col, opts, out.report);
    auto& s = out.series;
    s.kind = kind;
    s.t.reserve(rows.size());
    s.values.reserve(rows.size());
    for (const auto& r : rows) {
        s.t.push_back(r.t);
        s.values.push_back(r.v[schema.value_col - 1]);
        if (schema.quality_col)
            s.quality.push_back(r.quality);
    }
    if (kind != SignalKind::rri)
        s.nominal_rate_hz = estimate_rate(s.t);
    return out;
}

LoadedAccel load_accel(const std::filesystem::path& path, const LoadOptions& opts)
{
    const Schema schema = schema_for(SignalKind::accel_x);
    LoadedAccel out;
    const auto rows = parse_rows(path, schema.header, std::nullopt, opts, out.report);
    std::array<SampleSeries*, 3> axes{&out.accel.x, &out.accel.y, &out.accel.z};
    const std::array<SignalKind, 3> kinds{SignalKind::accel_x, SignalKind::accel_y, SignalKind::accel_z};
    for (std::size_t a = 0; a < 3; ++a) {
        axes[a]->kind = kinds[a];
        axes[a]->t.reserve(rows.size());
        axes[a]->values.reserve(rows.size());
        for (const auto& r : rows) {
            axes[a]->t.push_back(r.t);
            axes[a]->values.push_back(r.v[a]);
        }
    }
    const auto rate = estimate_rate(out.accel.x.t);
    for (auto* ax : axes)
        ax->nominal_rate_hz = rate;
    return out;
}

EpochSeries load_counts(const std::filesystem::path& path, const LoadOptions& opts)
{
    LoadReport report;
    const auto rows = parse_rows(path, {"t_unix_ms", "counts"}, std::nullopt, opts, report);
    const auto minute_of = [](double t) { return static_cast<long long>(std::floor(t / 60.0 + 1e-9)); };
    const long long m0 = minute_of(rows.front().t);
    const long long m1 = minute_of(rows.back().t);
    EpochSeries s(static_cast<double>(m0) * 60.0, 60.0, static_cast<std::size_t>(m1 - m0 + 1));
    for (const auto& r : rows) {
        if (r.v[0] < 0.0)
            throw Error(fmt::format("{}: negative count at t={} ms", path.string(), r.t * 1000.0));
        const auto i = static_cast<std::size_t>(minute_of(r.t) - m0);
        if (!s.is_valid(i))
            s.set(i, r.v[0]);
    }
    return s;
}

void write_counts(const std::filesystem::path& path, const EpochSeries& counts)
{
    auto out = fmt::output_file(path.string());
    out.print("t_unix_ms,counts\n");
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts.is_valid(i))
            out.print("{},{}\n", static_cast<long long>(std::llround(counts.epoch_start(i) * 1000.0)),
                      static_cast<long long>(std::llround(counts.values[i])));
}

SampleSeries accel_magnitude(const AccelTriple& accel)
{
    if (accel.x.size() != accel.y.size() || accel.x.size() != accel.z.size())
        throw Error("accel_magnitude: axis length mismatch");
    SampleSeries vm;
    vm.kind = SignalKind::accel_vm;
    vm.t = accel.x.t;
    vm.nominal_rate_hz = accel.x.nominal_rate_hz;
    vm.values.resize(vm.t.size());
    for (std::size_t i = 0; i < vm.t.size(); ++i) {
        if (accel.y.t[i] != vm.t[i] || accel.z.t[i] != vm.t[i])
            throw Error("accel_magnitude: axes are not sample-aligned");
        vm.values[i] = std::sqrt(accel.x.values[i] * accel.x.values[i] + accel.y.values[i] * accel.y.values[i] +
                                 accel.z.values[i] * accel.z.values[i]);
    }
    return vm;
}

} // namespace circadian
