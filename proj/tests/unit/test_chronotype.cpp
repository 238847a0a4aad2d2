#include "circadian/chronotype.hpp"
#include "circadian/kernels.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace circadian;

namespace {

FeatureMatrix matrix(const std::vector<std::string>& names, const oracle::Matrix& cols)
{
    FeatureMatrix m;
    m.names = names;
    m.values.resize(static_cast<Eigen::Index>(cols[0].size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < cols[j].size(); ++i)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    return m;
}

oracle::Matrix random_columns(oracle::XorShift& rng, std::size_t n, std::size_t p)
{
    oracle::Matrix cols(p, std::vector<double>(n));
    for (auto& c : cols)
        for (auto& v : c)
            v = 16 + 1.5 * rng.normal();
    return cols;
}

} // namespace

TEST_CASE("chronotype classification")
{
    CHECK(classify_chronotype(36.83) == ChronotypeGroup::evening);
    CHECK(classify_chronotype(42.0) == ChronotypeGroup::intermediate);
    CHECK(classify_chronotype(58.0) == ChronotypeGroup::intermediate);
    CHECK(classify_chronotype(41.999) == ChronotypeGroup::evening);
    CHECK(classify_chronotype(58.001) == ChronotypeGroup::morning);
    CHECK(classify_chronotype(63.40) == ChronotypeGroup::morning);
    CHECK(to_string(ChronotypeGroup::intermediate) == "Intermediate");
    for (double s = 10; s < 90; s += 0.37) {
        const auto g = classify_chronotype(s);
        CHECK(int(g == ChronotypeGroup::evening) + int(g == ChronotypeGroup::intermediate) +
                  int(g == ChronotypeGroup::morning) ==
              1);
    }
}

TEST_CASE("MEQ score is the mean of administrations")
{
    const auto s = MeqScore::from_administrations("p1", {{0, 50}, {7, 53}, {14, 56}});
    CHECK(s.score == doctest::Approx(53.0));
    CHECK(s.administrations.size() == 3);
    CHECK_THROWS(MeqScore::from_administrations("p1", {{0, 90}}));
    CHECK_THROWS(MeqScore::from_administrations("p1", {}));
}

TEST_CASE("OLS matches normal-equation oracle")
{
    oracle::XorShift rng(21);
    const auto cols = random_columns(rng, 36, 3);
    std::vector<double> y;
    for (std::size_t i = 0; i < 36; ++i)
        y.push_back(135 - 5.27 * cols[0][i] + 1.1 * cols[1][i] + 5 * rng.normal());
    const auto x = matrix({"a", "b", "c"}, cols);
    const auto m = fit_ols(y, x);
    const auto o = oracle::ols(cols, y);
    CHECK(m.intercept.estimate == doctest::Approx(o.beta[0]).epsilon(1e-9));
    CHECK(m.intercept.std_error == doctest::Approx(o.se[0]).epsilon(1e-8));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m.coefficients[j].estimate == doctest::Approx(o.beta[j + 1]).epsilon(1e-9));
        CHECK(m.coefficients[j].std_error == doctest::Approx(o.se[j + 1]).epsilon(1e-8));
        const double tq = stats::t_quantile(0.975, 32);
        CHECK(m.coefficients[j].ci_lo == doctest::Approx(o.beta[j + 1] - tq * o.se[j + 1]).epsilon(1e-8));
        REQUIRE(m.coefficients[j].vif);
        CHECK(*m.coefficients[j].vif >= 1.0);
    }
    CHECK(m.r_squared == doctest::Approx(o.r2).epsilon(1e-10));
    CHECK(m.adj_r_squared <= m.r_squared);
    CHECK(m.adj_r_squared == doctest::Approx(1 - (1 - o.r2) * 35.0 / 32.0).epsilon(1e-10));
    CHECK(m.df_resid == 32);
    CHECK(m.residual_normality);

    // Residuals orthogonal to the design; R^2 equals squared corr(y, fitted).
    double scale = 0;
    for (double v : y)
        scale = std::max(scale, std::abs(v));
    for (std::size_t j = 0; j < 3; ++j) {
        double dot = 0;
        for (std::size_t i = 0; i < 36; ++i)
            dot += m.residuals[i] * cols[j][i];
        CHECK(std::abs(dot) < 1e-8 * 36 * scale * 20);
    }
    const double rc = oracle::pearson_r(y, m.fitted);
    CHECK(m.r_squared == doctest::Approx(rc * rc).epsilon(1e-10));

    // Adding a feature never lowers R^2.
    const auto smaller = fit_ols(y, x.select({0, 1}));
    CHECK(m.r_squared >= smaller.r_squared - 1e-14);
}

TEST_CASE("controls are appended after the features")
{
    oracle::XorShift rng(4);
    const auto cols = random_columns(rng, 30, 1);
    oracle::Matrix ctl(2, std::vector<double>(30));
    std::vector<double> y;
    for (std::size_t i = 0; i < 30; ++i) {
        ctl[0][i] = 20 + 30 * rng.uniform();
        ctl[1][i] = static_cast<double>(i % 2);
        y.push_back(100 - 3 * cols[0][i] + 0.2 * ctl[0][i] + 2 * ctl[1][i] + rng.normal());
    }
    const auto m = fit_ols(y, matrix({"HR"}, cols), matrix({"age", "sex"}, ctl));
    REQUIRE(m.coefficients.size() == 3);
    CHECK(m.coefficients[0].name == "HR");
    CHECK(m.coefficients[2].name == "sex");
    const auto o = oracle::ols({cols[0], ctl[0], ctl[1]}, y);
    CHECK(m.coefficients[1].estimate == doctest::Approx(o.beta[2]).epsilon(1e-9));
}

TEST_CASE("exact fit and rank deficiency")
{
    const std::vector<double> f{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> y;
    for (double v : f)
        y.push_back(3 + 2 * v);
    const auto m = fit_ols(y, matrix({"f"}, {f}));
    CHECK(m.r_squared == doctest::Approx(1.0));
    CHECK(m.f_infinite);
    CHECK(m.coefficients[0].ci_hi - m.coefficients[0].ci_lo == doctest::Approx(0.0));
    CHECK_FALSE(m.residual_normality);

    std::vector<double> twice;
    for (double v : f)
        twice.push_back(2 * v + 1);
    CHECK_THROWS_WITH(fit_ols(y, matrix({"a", "b"}, {f, twice})), doctest::Contains("b"));
    CHECK_THROWS(fit_ols(std::vector<double>{1, 2}, matrix({"a"}, {{1, 2}})));
}

TEST_CASE("null regression: R^2 near zero")
{
    std::vector<double> ps;
    for (int seed = 0; seed < 100; ++seed) {
        oracle::XorShift rng(300 + seed);
        const auto cols = random_columns(rng, 36, 1);
        std::vector<double> y;
        for (int i = 0; i < 36; ++i)
            y.push_back(50 + 8 * rng.normal());
        ps.push_back(fit_ols(y, matrix({"x"}, cols)).f_p_value);
    }
    CHECK(stats::median(ps) > 0.05);
}

TEST_CASE("variance inflation")
{
    const std::vector<double> a{1, -1, 1, -1, 1, -1, 1, -1}, b{1, 1, -1, -1, 1, 1, -1, -1};
    const auto v = compute_vif(matrix({"a", "b"}, {a, b}));
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(1.0));

    const auto dup = compute_vif(matrix({"a", "b", "a2"}, {a, b, a}));
    CHECK(std::isinf(dup[0]));
    CHECK(std::isinf(dup[2]));
    // b is orthogonal to the duplicated pair and keeps its finite value.
    CHECK(dup[1] == doctest::Approx(1.0));

    // Bivariate case with sample correlation exactly 0.9.
    oracle::XorShift rng(2);
    std::vector<double> x(40), e(40);
    for (auto& q : x)
        q = rng.normal();
    for (auto& q : e)
        q = rng.normal();
    // Orthogonalise e against x (centred), then mix.
    const double mx = oracle::mean(x), me = oracle::mean(e);
    double sxe = 0, sxx = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        sxe += (x[i] - mx) * (e[i] - me);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    std::vector<double> u(40);
    double suu = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        u[i] = (e[i] - me) - sxe / sxx * (x[i] - mx);
        suu += u[i] * u[i];
    }
    std::vector<double> z(40);
    for (std::size_t i = 0; i < 40; ++i)
        z[i] = 0.9 * (x[i] - mx) / std::sqrt(sxx) + std::sqrt(1 - 0.81) * u[i] / std::sqrt(suu);
    CHECK(oracle::pearson_r(x, z) == doctest::Approx(0.9).epsilon(1e-12));
    const auto vz = compute_vif(matrix({"x", "z"}, {x, z}));
    CHECK(vz[0] == doctest::Approx(1 / (1 - 0.81)).epsilon(1e-9));
    CHECK(vz[1] == doctest::Approx(1 / (1 - 0.81)).epsilon(1e-9));

    CHECK_THROWS(compute_vif(matrix({"a", "c"}, {a, std::vector<double>(8, 2.0)})));
}

TEST_CASE("best-subset selection matches the enumeration oracle")
{
    for (int seed = 0; seed < 20; ++seed) {
        oracle::XorShift rng(700 + seed);
        const auto cols = random_columns(rng, 36, 6);
        std::vector<double> y;
        for (std::size_t i = 0; i < 36; ++i)
            y.push_back(135 - 5 * cols[seed % 6][i] + 2 * cols[(seed + 2) % 6][i] + 5 * rng.normal());
        const std::vector<std::string> names{"CBT", "HR", "MeanRR", "RMSSD", "SkinT", "WatchAC"};
        const auto x = matrix(names, cols);
        double prev = 0;
        for (std::size_t k = 2; k <= 6; ++k) {
            const auto sel = select_top_k(y, x, k);
            double best = -1;
            std::vector<std::string> best_names;
            for (const auto& subset : kernels::k_subsets(6, k)) {
                oracle::Matrix sub;
                for (auto j : subset)
                    sub.push_back(cols[j]);
                const double r2 = oracle::ols(sub, y).r2;
                if (r2 > best + 1e-12) {
                    best = r2;
                    best_names.clear();
                    for (auto j : subset)
                        best_names.push_back(names[j]);
                }
            }
            CHECK(sel.features == best_names);
            CHECK(sel.r_squared == doctest::Approx(best).epsilon(1e-10));
            CHECK(sel.r_squared >= prev - 1e-12);
            prev = sel.r_squared;
        }
        CHECK(select_top_k(y, x, 6).features.size() == 6);
    }
    oracle::XorShift rng(1);
    const auto cols = random_columns(rng, 20, 4);
    std::vector<double> y = cols[2];
    const auto x = matrix({"a", "b", "c", "d"}, cols);
    for (std::size_t k = 2; k <= 4; ++k) {
        const auto sel = select_top_k(y, x, k);
        CHECK(std::find(sel.features.begin(), sel.features.end(), "c") != sel.features.end());
    }
    CHECK_THROWS(select_top_k(y, x, 1));
    CHECK_THROWS(select_top_k(y, x, 5));
}

TEST_CASE("subset R^2 kernels: serial and parallel agree")
{
    oracle::XorShift rng(12);
    const std::size_t n = 50, p = 7;
    std::vector<double> x(n * p), y(n);
    for (auto& v : x)
        v = rng.normal();
    for (auto& v : y)
        v = rng.normal();
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t k = 1; k <= 4; ++k)
        for (auto& s : kernels::k_subsets(p, k))
            subsets.push_back(s);
    CHECK(kernels::subset_r2_serial(x, n, p, y, subsets) == kernels::subset_r2_parallel(x, n, p, y, subsets, 3));
    CHECK(kernels::k_subsets(6, 3).size() == 20);
}

TEST_CASE("PCA against a Jacobi oracle")
{
    oracle::XorShift rng(31);
    const std::size_t n = 36, p = 5;
    auto cols = random_columns(rng, n, p);
    for (std::size_t i = 0; i < n; ++i)
        cols[1][i] = 0.7 * cols[0][i] + 0.5 * cols[1][i];
    const auto r = pca_biplot_data(matrix({"a", "b", "c", "d", "e"}, cols));

    oracle::Matrix z = cols, corr(p, std::vector<double>(p));
    for (auto& c : z) {
        const double m = oracle::mean(c);
        double ss = 0;
        for (double v : c)
            ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / (n - 1));
        for (auto& v : c)
            v = (v - m) / sd;
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i)
                s += z[a][i] * z[b][i];
            corr[a][b] = s / (n - 1);
        }
    std::vector<double> ev;
    oracle::Matrix vec;
    oracle::jacobi(corr, ev, vec);
    double total = 0;
    for (std::size_t c = 0; c < p; ++c) {
        CHECK(r.eigenvalues[c] == doctest::Approx(ev[c]).epsilon(1e-9));
        total += r.explained_variance[c];
        // Same axis up to sign; library sign puts the largest |loading| positive.
        std::size_t big = 0;
        for (std::size_t j = 1; j < p; ++j)
            if (std::abs(vec[j][c]) > std::abs(vec[big][c]))
                big = j;
        const double sign = vec[big][c] >= 0 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < p; ++j)
            CHECK(r.loadings(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) ==
                  doctest::Approx(sign * vec[j][c]).epsilon(1e-7));
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(r.scores.rows() == static_cast<Eigen::Index>(n));

    // Rank one: PC1 explains everything.
    std::vector<double> f(10), g(10);
    for (int i = 0; i < 10; ++i) {
        f[i] = i * 1.5;
        g[i] = 3 - 2 * i;
    }
    const auto one = pca_biplot_data(matrix({"f", "g"}, {f, g}));
    CHECK(one.explained_variance[0] == doctest::Approx(1.0));

    // Isotropic noise.
    std::vector<double> shares;
    for (int seed = 0; seed < 100; ++seed) {
        oracle::XorShift q(900 + seed);
        std::vector<double> u(36), v(36);
        for (int i = 0; i < 36; ++i) {
            u[i] = q.normal();
            v[i] = q.normal();
        }
        const auto res = pca_biplot_data(matrix({"u", "v"}, {u, v}));
        shares.push_back(res.explained_variance[0]);
        CHECK(res.loadings(0, 0) >= 0.0);
    }
    const double med = stats::median(shares);
    CHECK(med >= 0.5);
    CHECK(med <= 0.7);

    CHECK_THROWS(pca_biplot_data(matrix({"a", "b"}, {{1, 2, 3}, {4, 4, 4}})));
}
