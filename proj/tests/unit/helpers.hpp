#pragma once

#include "circadian/series.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <unistd.h>

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("circadian_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fully valid series with values f(i).
inline circadian::EpochSeries make_series(double start, double len, std::size_t n,
                                          const std::function<double(std::size_t)>& f)
{
    circadian::EpochSeries s(start, len, n);
    for (std::size_t i = 0; i < n; ++i)
        s.set(i, f(i));
    return s;
}

/// 24 h cosine sampled at epoch midpoints, UTC clock.
inline circadian::EpochSeries cosine_series(double mesor, double amp, double acro_h, double start, double len,
                                            std::size_t n, double noise_sd = 0.0, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd > 0 ? noise_sd : 1.0);
    return make_series(start, len, n, [&](std::size_t i) {
        const double mid = start + (static_cast<double>(i) + 0.5) * len;
        const double v = mesor + amp * std::cos(2 * std::numbers::pi * (mid / 86400.0 - acro_h / 24.0));
        return noise_sd > 0 ? v + noise(rng) : v;
    });
}

} // namespace testing
