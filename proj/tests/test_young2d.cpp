// SPDX-License-Identifier: MIT
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pqvar/young2d.hpp"

using namespace pqvar;

namespace {

double xy(double x, double y) { return x * y; }

SampledField sample(const Fn2& f, const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> v;
    for (double x : xs)
        for (double y : ys) v.push_back(f(x, y));
    return SampledField(xs, ys, v);
}

}  // namespace

TEST_SUITE("young2d") {

TEST_CASE("series condition examples") {
    CHECK(check_series_condition(1, 1).feasible);
    CHECK_FALSE(check_series_condition(2, 1).feasible);
    const SeriesCondition c = check_series_condition(1.4, 1);
    CHECK(c.feasible);
    CHECK(std::abs(c.alpha_lower - 4.0 / 7.0) < 1e-12);
    CHECK(std::abs(c.alpha_upper - 5.0 / 7.0) < 1e-12);
    REQUIRE(c.alpha.has_value());
    CHECK(*c.alpha > c.alpha_lower);
    CHECK(*c.alpha < c.alpha_upper);
    CHECK_THROWS_AS(check_series_condition(0.9, 1), InputError);
    CHECK_THROWS_AS(check_series_condition(1, 0.5), InputError);
}

TEST_CASE("series condition: feasibility matches 2q+1 > 2pq and sums stay bounded (property)") {
    for (int a = 10; a < 25; ++a) {
        for (int b = 20; b < 65; b += 3) {
            // p = a/10, q = b/20: 2q + 1 > 2pq  <=>  10b + 100 > ab, exactly in integers.
            const double p = a / 10.0, q = b / 20.0;
            const SeriesCondition c = check_series_condition(p, q);
            CHECK(c.feasible == (10 * b + 100 > a * b));
            if (!c.feasible) continue;
            // Exponents exceed one and alpha lies strictly inside the interval.
            CHECK(c.n_exponent > 1.0);
            CHECK(c.m_exponent > 1.0);
            CHECK(2 * (1 - 1 / p) < *c.alpha);
            CHECK(*c.alpha < 1 / (p * q));
            for (std::size_t k = 1; k < c.partial_sums.size(); ++k)
                CHECK(c.partial_sums[k].second >= c.partial_sums[k - 1].second);
            CHECK(c.partial_sums.back().second <= c.tail_bound);
            // Oracle: the product of two one-dimensional power sums up to N.
            const std::size_t N = c.partial_sums.back().first;
            long double sa = 0, sb = 0;
            for (std::size_t n = 1; n <= N; ++n) {
                sa += std::pow(static_cast<long double>(n), -c.n_exponent);
                sb += std::pow(static_cast<long double>(n), -c.m_exponent);
            }
            CHECK(c.partial_sums.back().second == doctest::Approx(static_cast<double>(sa * sb)).epsilon(1e-9));
        }
    }
}

TEST_CASE("series condition with explicit delta and general gauges") {
    const SeriesCondition c = check_series_condition(1.2, 1.0, 0.1);
    CHECK(c.delta == 0.1);
    CHECK(c.feasible);
    CHECK(c.n_exponent == doctest::Approx(*c.alpha / 2.1 + 1 / 1.2));
    CHECK(c.m_exponent == doctest::Approx(1 - *c.alpha + 1 / 1.2));
    // A delta too large for p = 1.4 leaves no admissible alpha.
    CHECK_FALSE(check_series_condition(1.4, 1.0, 5.0).feasible);
    const auto one = ConvexGauge::power(1.0);
    const SeriesCondition g = check_series_condition(one, one, one, one, 0.5);
    CHECK(g.feasible);
    CHECK_FALSE(g.guaranteed);
}

TEST_CASE("fixed-level sums match the direct oracle") {
    auto F = [](double x, double y) { return std::sin(3 * x) * std::cos(y); };
    auto G = [](double x, double y) { return std::exp(x * y) + x * x * y; };
    const auto xs = oracle::grid(0, 1, 37), ys = oracle::grid(-1, 2, 23);
    CHECK(riemann_sum_2d(F, G, xs, ys) == doctest::Approx(oracle::double_sum(F, G, xs, ys, false)).epsilon(1e-13));
    CHECK(riemann_sum_2d(F, G, xs, ys, Corner::UpperRight) ==
          doctest::Approx(oracle::double_sum(F, G, xs, ys, true)).epsilon(1e-13));
    // Field overload on index subsets.
    const SampledField sf = sample(F, xs, ys), sg = sample(G, xs, ys);
    const std::vector<std::size_t> xi{0, 5, 17, 37}, yj{0, 11, 23};
    const std::vector<double> sx{xs[0], xs[5], xs[17], xs[37]}, sy{ys[0], ys[11], ys[23]};
    CHECK(riemann_sum_2d(sf, sg, xi, yj) == doctest::Approx(oracle::double_sum(F, G, sx, sy, false)).epsilon(1e-13));
}

TEST_CASE("bilinearity and rectangle additivity (property)") {
    for (int t = 0; t < 20; ++t) {
        const auto c = oracle::random_values(6, -2, 2);
        auto F1 = [&](double x, double y) { return std::sin(c[0] * x + y); };
        auto F2 = [&](double x, double y) { return x * y * c[1]; };
        auto G = [&](double x, double y) { return std::cos(c[2] * x * y) + c[3] * x * y * y; };
        auto G2 = [&](double x, double y) { return std::exp(c[4] * x) * y; };
        const auto xs = oracle::grid(0, 1, 16 + t), ys = oracle::grid(0, 1, 12);
        auto F12 = [&](double x, double y) { return c[4] * F1(x, y) + c[5] * F2(x, y); };
        CHECK(riemann_sum_2d(F12, G, xs, ys) ==
              doctest::Approx(c[4] * riemann_sum_2d(F1, G, xs, ys) + c[5] * riemann_sum_2d(F2, G, xs, ys)).epsilon(1e-11));
        auto GG = [&](double x, double y) { return G(x, y) - 2 * G2(x, y); };
        CHECK(riemann_sum_2d(F1, GG, xs, ys) ==
              doctest::Approx(riemann_sum_2d(F1, G, xs, ys) - 2 * riemann_sum_2d(F1, G2, xs, ys)).epsilon(1e-11));
        // 2 x 2 split along grid lines.
        const std::size_t cx = xs.size() / 2, cy = ys.size() / 3;
        const std::vector<double> xl(xs.begin(), xs.begin() + cx + 1), xr(xs.begin() + cx, xs.end());
        const std::vector<double> yl(ys.begin(), ys.begin() + cy + 1), yr(ys.begin() + cy, ys.end());
        const double whole = riemann_sum_2d(F1, G, xs, ys);
        const double parts = riemann_sum_2d(F1, G, xl, yl) + riemann_sum_2d(F1, G, xl, yr) +
                             riemann_sum_2d(F1, G, xr, yl) + riemann_sum_2d(F1, G, xr, yr);
        CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
    }
}

TEST_CASE("young_integral_2d examples") {
    const Rect unit{};
    auto additive = [](double x, double y) { return std::sin(7 * x) + y * y * y; };
    const IntegralResult z = young_integral_2d([](double x, double y) { return x + y; }, additive, unit);
    for (const auto& [n, s] : z.levels) CHECK(std::abs(s) < 1e-14);
    auto G = [](double x, double y) { return std::exp(x) * std::sin(2 * y) + x; };
    const double tele = G(1, 1) - G(0, 1) - G(1, 0) + G(0, 0);
    const IntegralResult one = young_integral_2d([](double, double) { return 1.0; }, G, unit);
    const IntegralResult oneb = young_integral_2d_backward([](double, double) { return 1.0; }, G, unit);
    for (std::size_t k = 0; k < one.levels.size(); ++k) {
        CHECK(one.levels[k].second == doctest::Approx(tele).epsilon(1e-12));
        CHECK(oneb.levels[k].second == doctest::Approx(tele).epsilon(1e-12));
    }
    Young2DOptions opt;
    opt.schedule = dyadic_schedule(2, 11);
    const IntegralResult f = young_integral_2d(xy, xy, unit, opt);
    const IntegralResult b = young_integral_2d_backward(xy, xy, unit, opt);
    CHECK(std::abs(f.value - 0.25) < 1e-3);
    CHECK(std::abs(b.value - 0.25) < 1e-3);
    CHECK(f.converged);
    // Forward/backward gap decays with the mesh.
    for (std::size_t k = 1; k < f.levels.size(); ++k) {
        CHECK(std::abs(f.levels[k].second - b.levels[k].second) <
              std::abs(f.levels[k - 1].second - b.levels[k - 1].second));
    }
}

TEST_CASE("step integrand: forward and backward differ by the jump-cell term") {
    // F jumps at x = 0.5 (a grid line); on one cell [0,1]x[0,1] split at 0.5
    // the discrepancy is the hand-computed jump contribution.
    auto F = [](double x, double) { return x >= 0.5 ? 1.0 : 0.0; };
    const std::vector<double> xs{0.0, 0.5, 1.0}, ys{0.0, 1.0};
    const double fwd = riemann_sum_2d(F, xy, xs, ys);
    const double bwd = riemann_sum_2d(F, xy, xs, ys, Corner::UpperRight);
    // Forward: F(0.5,0) * ddG over [0.5,1]x[0,1] = 0.5; backward adds the cell [0,0.5]: 0.5 + 0.5.
    CHECK(fwd == doctest::Approx(0.5));
    CHECK(bwd == doctest::Approx(1.0));
    CHECK(bwd - fwd == doctest::Approx(0.5 * 1.0));
}

TEST_CASE("jump lines are part of every level") {
    Young2DOptions opt;
    opt.schedule = {4, 8};
    opt.jumps.x = {1.0 / 3.0};
    auto F = [](double x, double) { return x > 1.0 / 3.0 ? 1.0 : 0.0; };
    // G depends on x only through a product so the jump cell matters.
    const IntegralResult r = young_integral_2d(F, xy, Rect{}, opt);
    for (const auto& [n, s] : r.levels) {
        // Exact: sum over cells right of 1/3 (left corner > 1/3) of dx dy = (1 - 1/3) minus the
        // cell starting at 1/3 itself (F(1/3) = 0).
        const std::size_t m = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
        (void)m;
        CHECK(s <= 2.0 / 3.0 + 1e-12);
    }
    // With the line inserted the oracle sum on the merged grid matches.
    std::vector<double> xs = oracle::grid(0, 1, 8);
    xs.push_back(1.0 / 3.0);
    std::sort(xs.begin(), xs.end());
    const double want = oracle::double_sum(F, xy, xs, oracle::grid(0, 1, 8), false);
    CHECK(r.levels.back().second == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("adding jump sets does not change the verdict for smooth fields (property)") {
    auto F = [](double x, double y) { return std::cos(x + 2 * y); };
    Young2DOptions plain, forced;
    plain.schedule = forced.schedule = dyadic_schedule(3, 9);
    forced.jumps.x = {0.3, 0.71};
    forced.jumps.y = {0.45};
    const IntegralResult a = young_integral_2d(F, xy, Rect{}, plain);
    const IntegralResult b = young_integral_2d(F, xy, Rect{}, forced);
    CHECK(a.converged == b.converged);
    CHECK(std::abs(a.value - b.value) < 2e-3);
}

TEST_CASE("field overloads follow the grid") {
    const auto g = oracle::grid(0, 1, 256);
    const SampledField F = sample(xy, g, g), G = sample(xy, g, g);
    Young2DOptions opt;
    opt.schedule = dyadic_schedule(2, 8);
    const IntegralResult r = young_integral_2d(F, G, opt);
    CHECK(r.value == doctest::Approx(oracle::double_sum(xy, xy, g, g, false)).epsilon(1e-12));
    const IntegralResult rb = young_integral_2d_backward(F, G, opt);
    CHECK(rb.value == doctest::Approx(oracle::double_sum(xy, xy, g, g, true)).epsilon(1e-12));
    Young2DOptions bad = opt;
    bad.jumps.x = {0.123456};
    CHECK_THROWS_AS(young_integral_2d(F, G, bad), InputError);
}

TEST_CASE("dyadic refinement trace") {
    const Rect unit{};
    // Constant F: every S equals 2 * (rectangle increment of G), so all mixed
    // differences vanish; with an integrator of zero rectangle increment S
    // itself is the zero matrix.
    const RefinementTrace c = dyadic_refinement_trace([](double, double) { return 2.0; }, xy, unit, 3, 3);
    for (const auto& row : c.sums)
        for (double v : row) CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
    for (const auto& row : c.mixed_differences)
        for (double v : row) CHECK(std::abs(v) < 1e-14);
    auto closed = [](double x, double y) { return std::sin(2 * std::numbers::pi * x) * y; };
    const RefinementTrace z = dyadic_refinement_trace([](double, double) { return 2.0; }, closed, unit, 3, 3);
    for (const auto& row : z.sums)
        for (double v : row) CHECK(std::abs(v) < 1e-14);
    const RefinementTrace single = dyadic_refinement_trace(xy, xy, unit, 0, 0);
    REQUIRE(single.sums.size() == 1);
    CHECK(single.sums[0][0] == doctest::Approx(oracle::double_sum(xy, xy, {0, 1}, {0, 1}, false)));
    const RefinementTrace t = dyadic_refinement_trace(xy, xy, unit, 6, 6);
    REQUIRE(t.mixed_differences.size() == 6);
    // Diagonal mixed differences decay geometrically.
    for (std::size_t k = 1; k < 6; ++k) {
        const double now = std::abs(t.mixed_differences[k][k]);
        const double prev = std::abs(t.mixed_differences[k - 1][k - 1]);
        CHECK(now <= 0.5 * prev);
    }
    // Partitions are nested and sums match the oracle on them.
    for (std::size_t p = 1; p < t.x_partitions.size(); ++p)
        for (double x : t.x_partitions[p - 1])
            CHECK(std::find(t.x_partitions[p].begin(), t.x_partitions[p].end(), x) != t.x_partitions[p].end());
    CHECK(t.sums[4][5] == doctest::Approx(oracle::double_sum(xy, xy, t.x_partitions[4], t.y_partitions[5], false)).epsilon(1e-13));
    double min_gap = 1.0;
    for (std::size_t k = 1; k < t.x_partitions.back().size(); ++k)
        min_gap = std::min(min_gap, t.x_partitions.back()[k] - t.x_partitions.back()[k - 1]);
    for (std::size_t k = 1; k < t.y_partitions.back().size(); ++k)
        min_gap = std::min(min_gap, t.y_partitions.back()[k] - t.y_partitions.back()[k - 1]);
    CHECK(t.strip_delta == doctest::Approx(0.25 * min_gap));
}

TEST_CASE("summation by parts examples") {
    const auto s = oracle::grid(0, 1, 5), x = oracle::grid(-1, 1, 5);
    std::vector<double> tent;
    for (double si : s)
        for (double xi : x) tent.push_back(si * std::max(0.0, 0.6 - std::abs(xi)) * (std::abs(xi) < 1 ? 1 : 0));
    const SampledField L(s, x, tent);
    const SampledField gc = sample([](double, double) { return 4.0; }, s, x);
    const SummationByParts c = summation_by_parts_2d(gc, L);
    CHECK(std::abs(c.lhs) < 1e-15);
    CHECK(std::abs(c.rhs) < 1e-15);
    const SampledField gsx = sample([](double a, double b) { return a * b; }, s, x);
    CHECK(summation_by_parts_2d(gsx, L).residual < 1e-12);
    std::vector<double> bad = tent;
    bad[1 * 6 + 0] = 0.1;  // x-boundary
    CHECK_THROWS_AS(summation_by_parts_2d(gsx, SampledField(s, x, bad)), InputError);
    bad = tent;
    bad[0 * 6 + 3] = 0.1;  // initial time
    CHECK_THROWS_AS(summation_by_parts_2d(gsx, SampledField(s, x, bad)), InputError);
    CHECK_THROWS_AS(summation_by_parts_2d(sample(xy, s, oracle::grid(-1, 2, 5)), L), InputError);
}

TEST_CASE("summation by parts is an exact identity on random instances (property)") {
    for (int t = 0; t < 100; ++t) {
        const std::size_t ns = 3 + t % 7, nx = 3 + (t / 7) % 9;
        const auto s = oracle::grid(0, 1, ns - 1), x = oracle::grid(-1, 1, nx - 1);
        auto gv = oracle::random_values(ns * nx, -3, 3);
        auto lv = oracle::random_values(ns * nx, 0, 2);
        for (std::size_t i = 0; i < ns; ++i) {
            lv[i * nx] = 0.0;
            lv[i * nx + nx - 1] = 0.0;
        }
        for (std::size_t j = 0; j < nx; ++j) lv[j] = 0.0;
        const SampledField g(s, x, gv), L(s, x, lv);
        const SummationByParts r = summation_by_parts_2d(g, L);
        // Oracle: both sides from the definitions in extended precision.
        long double lhs = 0, area = 0, edge = 0;
        auto G = [&](std::size_t i, std::size_t j) { return static_cast<long double>(gv[i * nx + j]); };
        auto Lt = [&](std::size_t i, std::size_t j) { return static_cast<long double>(lv[i * nx + j]); };
        for (std::size_t i = 1; i < ns; ++i)
            for (std::size_t j = 1; j < nx; ++j) {
                lhs += G(i - 1, j - 1) * (Lt(i, j) - Lt(i - 1, j) - Lt(i, j - 1) + Lt(i - 1, j - 1));
                area += Lt(i, j) * (G(i, j) - G(i - 1, j) - G(i, j - 1) + G(i - 1, j - 1));
            }
        for (std::size_t j = 1; j < nx; ++j) edge += Lt(ns - 1, j) * (G(ns - 1, j) - G(ns - 1, j - 1));
        CHECK(r.lhs == doctest::Approx(static_cast<double>(lhs)).epsilon(1e-12));
        CHECK(r.rhs == doctest::Approx(static_cast<double>(area - edge)).epsilon(1e-12));
        double gmax = 0, lmax = 0;
        for (double v : gv) gmax = std::max(gmax, std::abs(v));
        for (double v : lv) lmax = std::max(lmax, std::abs(v));
        CHECK(r.residual <= 1e-12 * static_cast<double>(ns * nx) * gmax * lmax);
    }
}

TEST_CASE("dominated convergence harness") {
    const Rect unit{};
    Young2DOptions opt;
    opt.schedule = dyadic_schedule(2, 6);
    auto F = [](double x, double y) { return std::cos(x) * (1 + y); };
    const std::vector<ApproximationStep> same{{"a", F, xy}, {"b", F, xy}};
    const DominatedConvergenceTable t = dominated_convergence_test(same, F, xy, unit, opt);
    for (double g : t.gaps) CHECK(g == 0.0);
    CHECK(t.decaying);

    const auto seq = mollified_sequence(F, xy, {4, 16, 64});
    const DominatedConvergenceTable m = dominated_convergence_test(seq, F, xy, unit, opt);
    CHECK(m.labels.front() == "n=4");
    CHECK(m.decaying);
    CHECK(m.gaps.back() < m.gaps.front());

    // G_k = G + (1/k) xy: gaps equal (1/k) |int int F d(xy)| at a fixed level.
    std::vector<ApproximationStep> pert;
    for (int k : {1, 2, 4, 8, 16, 32}) {
        const double e = 1.0 / k;
        pert.push_back({"k", F, [e](double x, double y) { return x * y + e * x * y; }});
    }
    const DominatedConvergenceTable p = dominated_convergence_test(pert, F, xy, unit, opt);
    const double ref = std::abs(riemann_sum_2d(F, xy, oracle::grid(0, 1, 64), oracle::grid(0, 1, 64)));
    const double ks[] = {1, 2, 4, 8, 16, 32};
    for (std::size_t k = 0; k < p.gaps.size(); ++k) CHECK(p.gaps[k] == doctest::Approx(ref / ks[k]).epsilon(1e-9));
    CHECK(p.strictly_decreasing);
    CHECK(p.decaying);

    // Diverging sequence fails the uniform-convergence spot check.
    std::vector<ApproximationStep> away{{"a", F, xy}, {"b", [](double x, double y) { return 5 + x * y; }, xy}};
    CHECK_THROWS_AS(dominated_convergence_test(away, F, xy, unit, opt), InputError);
}

}  // TEST_SUITE
