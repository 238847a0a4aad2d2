// Serial vs OpenMP timings of the hot kernels, with an equality check on each.
#include "circadian/kernels.hpp"
#include "circadian/synth.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace circadian;

namespace {

template <class Fn>
double seconds(Fn&& fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same)
{
    fmt::print("{:<14} serial {:8.3f} s   parallel {:8.3f} s   speedup {:5.2f}x   {}\n", name, serial, parallel,
               serial / parallel, same ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv)
{
    const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
#ifdef _OPENMP
    fmt::print("threads: {}\n", threads > 0 ? threads : omp_get_max_threads());
#endif
    synth::Pcg64 rng(42, 7);
    bool ok = true;

    {
        std::vector<std::int64_t> ranks2;
        for (int i = 1; i <= 24; ++i)
            ranks2.push_back(2 * i);
        std::uint64_t a = 0, b = 0;
        const double ts = seconds([&] { a = kernels::signed_rank_tail_serial(ranks2, 120); });
        const double tp = seconds([&] { b = kernels::signed_rank_tail_parallel(ranks2, 120, threads); });
        report("signed-rank", ts, tp, a == b);
        ok &= a == b;
    }
    {
        std::vector<double> angle, y;
        for (int i = 0; i < 2016; ++i) {
            const double th = 2.0 * std::numbers::pi * (i % 144 + 0.5) / 144.0;
            angle.push_back(th);
            y.push_back(0.5 + 0.3 * std::cos(th - 4.12) + 0.05 * rng.normal());
        }
        kernels::CosinorGrid g;
        g.acro_step_h = 0.02;
        kernels::CosinorGridResult a, b;
        const double ts = seconds([&] { a = kernels::cosinor_grid_serial(angle, y, g); });
        const double tp = seconds([&] { b = kernels::cosinor_grid_parallel(angle, y, g, threads); });
        const bool same = a.sse == b.sse && a.mesor == b.mesor && a.amplitude == b.amplitude &&
                          a.acrophase_hours == b.acrophase_hours;
        report("cosinor-grid", ts, tp, same);
        ok &= same;
    }
    {
        const std::size_t n = 400, p = 12;
        std::vector<double> x(n * p), y(n);
        for (auto& v : x)
            v = rng.normal();
        for (std::size_t i = 0; i < n; ++i)
            y[i] = x[i * p] - 0.5 * x[i * p + 3] + rng.normal();
        std::vector<std::vector<std::size_t>> subsets;
        for (std::size_t k = 2; k <= 6; ++k)
            for (auto& s : kernels::k_subsets(p, k))
                subsets.push_back(std::move(s));
        std::vector<double> a, b;
        const double ts = seconds([&] { a = kernels::subset_r2_serial(x, n, p, y, subsets); });
        const double tp = seconds([&] { b = kernels::subset_r2_parallel(x, n, p, y, subsets, threads); });
        report("subset-r2", ts, tp, a == b);
        ok &= a == b;
    }
    return ok ? 0 : 1;
}
