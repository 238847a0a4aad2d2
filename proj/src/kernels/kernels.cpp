#include "circadian/kernels.hpp"
#include "circadian/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace circadian::kernels {

namespace {

int thread_count(int requested)
{
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

std::int64_t distance(std::int64_t s, std::int64_t total) { return s * 2 > total ? s * 2 - total : total - s * 2; }

/// Gray-code walk over masks [first, last); S tracks the rank sum of the current mask.
std::uint64_t signed_rank_tail_range(std::span<const std::int64_t> r, std::int64_t total, std::int64_t observed,
                                     std::uint64_t first, std::uint64_t last)
{
    if (first >= last)
        return 0;
    std::uint64_t gray = first ^ (first >> 1);
    std::int64_t s = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (gray >> i & 1U)
            s += r[i];
    std::uint64_t count = distance(s, total) >= observed ? 1 : 0;
    for (std::uint64_t g = first + 1; g < last; ++g) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(g));
        gray ^= std::uint64_t{1} << bit;
        s += (gray >> bit & 1U) ? r[bit] : -r[bit];
        count += distance(s, total) >= observed ? 1 : 0;
    }
    return count;
}

void check_ranks(std::span<const std::int64_t> ranks2)
{
    if (ranks2.size() > 40)
        throw Error("signed-rank enumeration: n too large for exhaustive search");
}

struct Moments {
    double n = 0, sy = 0, syy = 0;
};

Moments moments(std::span<const double> y)
{
    Moments m;
    m.n = static_cast<double>(y.size());
    for (double v : y) {
        m.sy += v;
        m.syy += v * v;
    }
    return m;
}

std::size_t grid_count(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo)
        throw Error("cosinor grid: empty grid");
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

struct PhaseBest {
    CosinorGridResult r;
    std::size_t phase_index = std::numeric_limits<std::size_t>::max();
    bool better_than(const PhaseBest& o) const
    {
        return r.sse < o.r.sse || (r.sse == o.r.sse && phase_index < o.phase_index);
    }
};

/// Exhaustive grid over mesor for one phase; the amplitude grid is searched
/// through the two cells bracketing the convex optimum.
PhaseBest best_for_phase(std::span<const double> angle, std::span<const double> y, const Moments& m,
                         const CosinorGrid& g, std::size_t pi, std::size_t nm, std::size_t na)
{
    const double acro = static_cast<double>(pi) * g.acro_step_h;
    const double theta = 2.0 * std::numbers::pi * acro / 24.0;
    double c1 = 0, c2 = 0, cy = 0;
    for (std::size_t i = 0; i < angle.size(); ++i) {
        const double c = std::cos(angle[i] - theta);
        c1 += c;
        c2 += c * c;
        cy += c * y[i];
    }
    PhaseBest best;
    best.phase_index = pi;
    best.r.sse = std::numeric_limits<double>::infinity();
    for (std::size_t mi = 0; mi < nm; ++mi) {
        const double mesor = g.mesor_lo + static_cast<double>(mi) * g.mesor_step;
        const double base = m.syy - 2.0 * mesor * m.sy + m.n * mesor * mesor;
        const auto sse_at = [&](std::size_t ai) {
            const double a = g.amp_lo + static_cast<double>(ai) * g.amp_step;
            return base - 2.0 * a * cy + 2.0 * mesor * a * c1 + a * a * c2;
        };
        std::size_t lo_i = 0, hi_i = 0;
        if (c2 > 0.0) {
            const double a_star = (cy - mesor * c1) / c2;
            const double pos = (a_star - g.amp_lo) / g.amp_step;
            const double fl = std::clamp(std::floor(pos), 0.0, static_cast<double>(na - 1));
            lo_i = static_cast<std::size_t>(fl);
            hi_i = std::min(lo_i + 1, na - 1);
        }
        for (std::size_t ai : {lo_i, hi_i}) {
            const double sse = sse_at(ai);
            if (sse < best.r.sse) {
                best.r = {mesor, g.amp_lo + static_cast<double>(ai) * g.amp_step, acro, sse};
            }
        }
    }
    return best;
}

double subset_r2(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& y,
                 const std::vector<std::size_t>& cols)
{
    const auto n = x.rows();
    Eigen::MatrixXd d(n, static_cast<Eigen::Index>(cols.size()) + 1);
    d.col(0).setOnes();
    for (std::size_t j = 0; j < cols.size(); ++j)
        d.col(static_cast<Eigen::Index>(j) + 1) = x.col(static_cast<Eigen::Index>(cols[j]));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
    if (qr.rank() < d.cols())
        return std::numeric_limits<double>::quiet_NaN();
    const Eigen::VectorXd beta = qr.solve(y);
    const double sse = (y - d * beta).squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    return sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace

std::uint64_t signed_rank_tail_serial(std::span<const std::int64_t> ranks2, std::int64_t observed_distance)
{
    check_ranks(ranks2);
    std::int64_t total = 0;
    for (auto r : ranks2)
        total += r;
    return signed_rank_tail_range(ranks2, total, observed_distance, 0, std::uint64_t{1} << ranks2.size());
}

std::uint64_t signed_rank_tail_parallel(std::span<const std::int64_t> ranks2, std::int64_t observed_distance,
                                        int threads)
{
    check_ranks(ranks2);
    std::int64_t total = 0;
    for (auto r : ranks2)
        total += r;
    const std::uint64_t masks = std::uint64_t{1} << ranks2.size();
    const std::uint64_t chunk = std::max<std::uint64_t>(masks / 256, 1024);
    const auto nchunks = static_cast<long long>((masks + chunk - 1) / chunk);
    std::uint64_t count = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : count) num_threads(thread_count(threads))
    for (long long c = 0; c < nchunks; ++c) {
        const std::uint64_t first = static_cast<std::uint64_t>(c) * chunk;
        count += signed_rank_tail_range(ranks2, total, observed_distance, first, std::min(masks, first + chunk));
    }
    return count;
}

CosinorGridResult cosinor_grid_serial(std::span<const double> angle, std::span<const double> y, const CosinorGrid& g)
{
    if (angle.size() != y.size() || y.empty())
        throw Error("cosinor grid: angle/value length mismatch or empty input");
    const std::size_t nm = grid_count(g.mesor_lo, g.mesor_hi, g.mesor_step);
    const std::size_t na = grid_count(g.amp_lo, g.amp_hi, g.amp_step);
    const std::size_t np = grid_count(0.0, 24.0 - g.acro_step_h * 0.5, g.acro_step_h);
    const Moments m = moments(y);
    PhaseBest best;
    best.r.sse = std::numeric_limits<double>::infinity();
    for (std::size_t pi = 0; pi < np; ++pi) {
        const PhaseBest cand = best_for_phase(angle, y, m, g, pi, nm, na);
        if (cand.better_than(best))
            best = cand;
    }
    return best.r;
}

CosinorGridResult cosinor_grid_parallel(std::span<const double> angle, std::span<const double> y,
                                        const CosinorGrid& g, int threads)
{
    if (angle.size() != y.size() || y.empty())
        throw Error("cosinor grid: angle/value length mismatch or empty input");
    const std::size_t nm = grid_count(g.mesor_lo, g.mesor_hi, g.mesor_step);
    const std::size_t na = grid_count(g.amp_lo, g.amp_hi, g.amp_step);
    const std::size_t np = grid_count(0.0, 24.0 - g.acro_step_h * 0.5, g.acro_step_h);
    const Moments m = moments(y);
    std::vector<PhaseBest> per_phase(np);
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count(threads))
    for (long long pi = 0; pi < static_cast<long long>(np); ++pi)
        per_phase[static_cast<std::size_t>(pi)] = best_for_phase(angle, y, m, g, static_cast<std::size_t>(pi), nm, na);
    PhaseBest best;
    best.r.sse = std::numeric_limits<double>::infinity();
    for (const auto& cand : per_phase)
        if (cand.better_than(best))
            best = cand;
    return best.r;
}

std::vector<std::vector<std::size_t>> k_subsets(std::size_t p, std::size_t k)
{
    std::vector<std::vector<std::size_t>> out;
    if (k == 0 || k > p)
        return out;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i)
        idx[i] = i;
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == p - k + (i - 1))
            --i;
        if (i == 0)
            break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
    return out;
}

std::vector<double> subset_r2_serial(std::span<const double> x_row_major, std::size_t n, std::size_t p,
                                     std::span<const double> y, const std::vector<std::vector<std::size_t>>& subsets)
{
    if (x_row_major.size() != n * p || y.size() != n)
        throw Error("subset search: matrix shape mismatch");
    const Eigen::MatrixXd x = Eigen::Map<const RowMajor>(x_row_major.data(), static_cast<Eigen::Index>(n),
                                                         static_cast<Eigen::Index>(p));
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
    std::vector<double> r2(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s)
        r2[s] = subset_r2(x, yv, subsets[s]);
    return r2;
}

std::vector<double> subset_r2_parallel(std::span<const double> x_row_major, std::size_t n, std::size_t p,
                                       std::span<const double> y,
                                       const std::vector<std::vector<std::size_t>>& subsets, int threads)
{
    if (x_row_major.size() != n * p || y.size() != n)
        throw Error("subset search: matrix shape mismatch");
    const Eigen::MatrixXd x = Eigen::Map<const RowMajor>(x_row_major.data(), static_cast<Eigen::Index>(n),
                                                         static_cast<Eigen::Index>(p));
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
    std::vector<double> r2(subsets.size());
#pragma omp parallel for schedule(static) num_threads(thread_count(threads))
    for (long long s = 0; s < static_cast<long long>(subsets.size()); ++s)
        r2[static_cast<std::size_t>(s)] = subset_r2(x, yv, subsets[static_cast<std::size_t>(s)]);
    return r2;
}

} // namespace circadian::kernels
