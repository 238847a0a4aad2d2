#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace circadian::detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline void split(std::string_view line, char sep, std::vector<std::string_view>& out)
{
    out.clear();
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos)
            break;
        pos = next + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s)
{
    if (s.empty())
        return std::nullopt;
    if (s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s)
{
    if (s.empty())
        return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

/// Splits a whole file buffer into lines (handles \r\n).
inline std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto next = text.find('\n', pos);
        if (next == std::string_view::npos)
            next = text.size();
        auto line = text.substr(pos, next - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        pos = next + 1;
    }
    return lines;
}

std::string read_file(const std::string& path);

} // namespace circadian::detail
