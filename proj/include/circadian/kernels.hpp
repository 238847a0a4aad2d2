#pragma once

// Data-parallel hot loops. Every kernel has a serial reference that the tests
// compare against and that bench/ times against the OpenMP version.

#include <cstdint>
#include <span>
#include <vector>

namespace circadian::kernels {

// ---------------------------------------------------------------------------
// Signed-rank exact null: number of the 2^n sign assignments whose statistic is
// at least as far from the null centre as the observed one. Ranks are passed
// doubled so mid-ranks stay integral; the distance is |2*S - sum(ranks2)|.
// ---------------------------------------------------------------------------

std::uint64_t signed_rank_tail_serial(std::span<const std::int64_t> ranks2, std::int64_t observed_distance);
std::uint64_t signed_rank_tail_parallel(std::span<const std::int64_t> ranks2, std::int64_t observed_distance,
                                        int threads = 0);

// ---------------------------------------------------------------------------
// Exhaustive (mesor, amplitude, phase) grid for the 24 h cosine model. The
// phase grid holds acrophase clock hours; design carries cos/sin of the phase
// angle per point so the kernel needs no time bookkeeping.
// ---------------------------------------------------------------------------

struct CosinorGrid {
    double mesor_lo = 0.0, mesor_hi = 1.0, mesor_step = 0.001;
    double amp_lo = 0.0, amp_hi = 1.0, amp_step = 0.001;
    double acro_step_h = 0.01; // acrophase grid over [0, 24)
};

struct CosinorGridResult {
    double mesor = 0.0;
    double amplitude = 0.0;
    double acrophase_hours = 0.0;
    double sse = 0.0;
};

/// angle[i] = 2*pi*t_i/24h (radians, any branch); y[i] the observations.
CosinorGridResult cosinor_grid_serial(std::span<const double> angle, std::span<const double> y, const CosinorGrid& g);
CosinorGridResult cosinor_grid_parallel(std::span<const double> angle, std::span<const double> y,
                                        const CosinorGrid& g, int threads = 0);

// ---------------------------------------------------------------------------
// Best-subset search: R^2 of the OLS fit (with intercept) of y on every size-k
// column subset of X (row-major n x p). Rank-deficient subsets get NaN.
// ---------------------------------------------------------------------------

/// All size-k subsets in lexicographic order.
std::vector<std::vector<std::size_t>> k_subsets(std::size_t p, std::size_t k);

std::vector<double> subset_r2_serial(std::span<const double> x_row_major, std::size_t n, std::size_t p,
                                     std::span<const double> y, const std::vector<std::vector<std::size_t>>& subsets);
std::vector<double> subset_r2_parallel(std::span<const double> x_row_major, std::size_t n, std::size_t p,
                                       std::span<const double> y,
                                       const std::vector<std::vector<std::size_t>>& subsets, int threads = 0);

} // namespace circadian::kernels
