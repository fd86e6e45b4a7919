// SPDX-License-Identifier: MIT
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pqvar/variation.hpp"

using namespace pqvar;

namespace {

SampledPath path_of(const std::vector<double>& v) {
    return SampledPath(oracle::grid(0.0, 1.0, v.size() - 1), v);
}

SampledField field_of(std::size_t nx, std::size_t ny, const std::function<double(double, double)>& g) {
    const auto xs = oracle::grid(0.0, 1.0, nx - 1);
    const auto ys = oracle::grid(0.0, 1.0, ny - 1);
    std::vector<double> v;
    for (double x : xs)
        for (double y : ys) v.push_back(g(x, y));
    return SampledField(xs, ys, v);
}

}  // namespace

TEST_SUITE("variation") {

TEST_CASE("p_variation_exact examples") {
    CHECK(p_variation_exact(path_of({1, 1, 1, 1}), 2).value == 0.0);
    CHECK(p_variation_exact(path_of({0, 0.3, 0.7, 1.0}), 1).value == doctest::Approx(1.0).epsilon(1e-15));
    const VariationReport r = p_variation_exact(path_of({0, 1, -1, 2}), 2);
    CHECK(r.value == 14.0);
    CHECK(r.witness.indices == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(r.exactness == Exactness::ExactOnGrid);
    CHECK(r.exponents == std::vector<double>{2.0});
    CHECK_THROWS_AS(p_variation_exact(path_of({0, 1}), 0.5), InputError);
    // Two-point path: Phi of the single increment.
    CHECK(p_variation_exact(path_of({0.0, 3.0}), 2).value == 9.0);
}

TEST_CASE("phi_variation_exact examples and gauge validation") {
    CHECK(phi_variation_exact(path_of({0, 2, 5}), ConvexGauge::power(1)).value == 5.0);
    CHECK(phi_variation_exact(path_of({0, 1, -1, 2}), ConvexGauge::power(2)).value == 14.0);
    const auto g = ConvexGauge::user("u^2+u", [](double u) { return u * u + u; },
                                     [](double v) { return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * v)); });
    CHECK(phi_variation_exact(path_of({3, 3, 3}), g).value == 0.0);
    auto make_bad = [] {
        return ConvexGauge::user("cos", [](double u) { return std::cos(u) - 1.0; }, [](double v) { return v; });
    };
    CHECK_THROWS_AS(make_bad(), InputError);
    auto make_shifted = [] {
        return ConvexGauge::user("u+1", [](double u) { return u + 1.0; }, [](double v) { return v - 1.0; });
    };
    CHECK_THROWS_AS(make_shifted(), InputError);
    auto make_wrong_inverse = [] {
        return ConvexGauge::user("u^2", [](double u) { return u * u; }, [](double v) { return v; });
    };
    CHECK_THROWS_AS(make_wrong_inverse(), InputError);
    CHECK_THROWS_AS(ConvexGauge::power(0.9), InputError);
}

TEST_CASE("DP equals exhaustive enumeration on random paths (property)") {
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);  // <= 8 interior points
        const auto v = oracle::random_values(n);
        const double p = 1.0 + (trial % 5) * 0.5;
        const VariationReport r = p_variation_exact(path_of(v), p);
        CHECK(r.value == doctest::Approx(oracle::brute_pvariation(v, p)).epsilon(1e-13));
        // Witness recomputation reproduces the value.
        CHECK(partition_variation_sum(path_of(v), r.witness, ConvexGauge::power(p)) == r.value);
    }
}

TEST_CASE("supremum property against user partitions") {
    const auto v = oracle::random_values(60);
    const SampledPath p = path_of(v);
    for (double e : {1.0, 1.7, 2.5}) {
        const double best = p_variation_exact(p, e).value;
        for (int t = 0; t < 50; ++t) {
            Partition1D part{{0}};
            for (std::size_t i = 1; i + 1 < v.size(); ++i)
                if (oracle::rng()() % 3 == 0) part.indices.push_back(i);
            part.indices.push_back(v.size() - 1);
            CHECK(partition_variation_sum(p, part, ConvexGauge::power(e)) <= best);
        }
    }
}

TEST_CASE("value is zero iff all increments vanish") {
    CHECK(p_variation_exact(path_of({2, 2, 2, 2, 2}), 1.5).value == 0.0);
    CHECK(p_variation_exact(path_of({2, 2, 2.001, 2, 2}), 1.5).value > 0.0);
}

TEST_CASE("dyadic bound examples") {
    const DyadicBound zero = dyadic_variation_bound([](double) { return 4.0; }, 0.0, 1.0, 10, 2.0, 2.0);
    CHECK(zero.value == 0.0);
    CHECK(zero.exactness == Exactness::UpperBound);
    // Linear path, p = 3, gamma = 2.5, c = 1: level term n^2.5 4^-n.
    const DyadicBound lin = dyadic_variation_bound([](double x) { return x; }, 0.0, 1.0, 22, 3.0, 2.5, 1.0);
    double limit = 0.0;
    for (int n = 1; n <= 400; ++n) limit += std::pow(n, 2.5) * std::pow(4.0, -n);
    // Tail beyond n = 22 is below 2 * 23^2.5 4^-23.
    const double tail = 2.0 * std::pow(23.0, 2.5) * std::pow(4.0, -23);
    CHECK(std::abs(lin.value - limit) <= tail + 1e-14);
    CHECK(lin.partial_sums.size() == 22);
    for (std::size_t k = 1; k < lin.partial_sums.size(); ++k) CHECK(lin.partial_sums[k] >= lin.partial_sums[k - 1]);
    CHECK_THROWS_AS(dyadic_variation_bound([](double x) { return x; }, 0.0, 1.0, 5, 3.0, 2.0), InputError);
    // Default constant: (sum n^{-gamma/(p-1)})^{p-1}.
    double s = 0.0;
    for (int n = 1; n < 2000000; ++n) s += std::pow(n, -2.5 / 1.0);
    CHECK(default_dyadic_constant(2.0, 2.5) == doctest::Approx(s).epsilon(1e-6));
    CHECK(default_dyadic_constant(1.0, 2.0) == 1.0);
}

TEST_CASE("dyadic bound dominates the variation over dyadic points (property)") {
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 7;
        auto v = oracle::random_values((1u << N) + 1, -0.2, 0.2);
        for (std::size_t i = 1; i < v.size(); ++i) v[i] += v[i - 1];  // random walk
        const SampledPath p = path_of(v);
        for (double e : {2.0, 3.0}) {
            const double gamma = e;  // gamma > p - 1
            const DyadicBound b = dyadic_variation_bound(p, N, e, gamma);
            const double exact = oracle::naive_dp_variation(v, [e](double u) { return std::pow(u, e); });
            CHECK(b.value >= exact);
        }
    }
}

TEST_CASE("pq_variation_grid examples") {
    const SampledField add = field_of(7, 6, [](double x, double y) { return std::sin(3 * x) + y * y; });
    CHECK(pq_variation_grid(add, 1.3, 1.7).value == doctest::Approx(0.0).epsilon(1e-12));
    const SampledField xy = field_of(9, 9, [](double x, double y) { return x * y; });
    CHECK(pq_variation_grid(xy, 1.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(pq_variation_grid(xy, 0.5, 1.0), InputError);

    // x sin(1/x + 1) field with three oscillations: y-grid {0, 1}.
    std::vector<double> xs{1.0};
    double partial = 0.0;
    for (int i = 1; i <= 3; ++i) {
        xs.push_back(1.0 / (i * std::numbers::pi + std::numbers::pi / 2 - 1));
        xs.push_back(1.0 / (i * std::numbers::pi - 1));
        partial += 1.0 / (i * std::numbers::pi + std::numbers::pi / 2 - 1);
    }
    std::sort(xs.begin(), xs.end());
    std::vector<double> vals;
    for (double x : xs) {
        vals.push_back(0.0);
        vals.push_back(x * std::sin(1.0 / x + 1.0));
    }
    const SampledField ex({xs}, {0.0, 1.0}, vals);
    CHECK(pq_variation_grid(ex, 1.0, 1.0).value >= partial);
}

TEST_CASE("pq exhaustive mode equals brute force and dominates hill climbing (property)") {
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t nx = 3 + trial % 4, ny = 3 + (trial / 4) % 3;
        const auto vals = oracle::random_values(nx * ny);
        const SampledField f(oracle::grid(0, 1, nx - 1), oracle::grid(0, 1, ny - 1), vals);
        const double p = 1.0 + 0.5 * (trial % 3), q = 1.0 + 0.25 * (trial % 2);
        const VariationReport ex = pq_variation_grid(f, p, q);
        CHECK(ex.exactness == Exactness::ExactOnGrid);
        const oracle::Field acc = [&](std::size_t i, std::size_t j) { return vals[i * ny + j]; };
        CHECK(ex.value == doctest::Approx(oracle::brute_pq_variation(acc, nx, ny, p, q)).epsilon(1e-12));
        PqSearchOptions hill;
        hill.exhaustive_budget = 0;
        const VariationReport lb = pq_variation_grid(f, p, q, hill);
        CHECK(lb.exactness == Exactness::LowerBound);
        CHECK(lb.value <= ex.value * (1 + 1e-12));
        // Witnesses evaluate to the reported values.
        CHECK(pq_partition_sum(f, ex.witness, *ex.witness_y, ConvexGauge::power(p), ConvexGauge::power(q)) ==
              doctest::Approx(ex.value).epsilon(1e-14));
        CHECK(pq_partition_sum(f, lb.witness, *lb.witness_y, ConvexGauge::power(p), ConvexGauge::power(q)) ==
              doctest::Approx(lb.value).epsilon(1e-14));
    }
}

TEST_CASE("large grids report a lower bound with a consistent witness") {
    const auto vals = oracle::random_values(16 * 15);
    const SampledField f(oracle::grid(0, 1, 15), oracle::grid(0, 1, 14), vals);
    const VariationReport r = pq_variation_grid(f, 2.0, 1.5);
    CHECK(r.exactness == Exactness::LowerBound);
    CHECK(pq_partition_sum(f, r.witness, *r.witness_y, ConvexGauge::power(2.0), ConvexGauge::power(1.5)) ==
          doctest::Approx(r.value).epsilon(1e-14));
    // Deterministic.
    CHECK(pq_variation_grid(f, 2.0, 1.5).value == r.value);
}

TEST_CASE("uniform_axis_variation examples") {
    const SampledField c = field_of(5, 5, [](double, double) { return 2.0; });
    CHECK(uniform_axis_variation(c, Axis::X, ConvexGauge::power(1)) == 0.0);
    const SampledField gx = field_of(11, 4, [](double x, double) { return x; });
    CHECK(uniform_axis_variation(gx, Axis::X, ConvexGauge::power(1)) == doctest::Approx(1.0));
    CHECK(uniform_axis_variation(gx, Axis::Y, ConvexGauge::power(1)) == 0.0);
    // Max over lines: line y = 1 of x*y has the largest variation.
    const SampledField xy = field_of(11, 6, [](double x, double y) { return 2 * x * y; });
    CHECK(uniform_axis_variation(xy, Axis::X, ConvexGauge::power(1)) == doctest::Approx(2.0));
}

TEST_CASE("detect_large_jumps examples") {
    const auto one = ConvexGauge::power(1);
    const SampledField xy = field_of(21, 21, [](double x, double y) { return x * y; });
    const JumpSets none = detect_large_jumps(xy, 0.5, one, one);
    CHECK(none.x.empty());
    CHECK(none.y.empty());
    const SampledField step = field_of(21, 21, [](double x, double y) { return (x >= 0.5 ? 1.0 : 0.0) * y; });
    const JumpSets j = detect_large_jumps(step, 0.5, one, one);
    REQUIRE(j.x.size() == 1);
    CHECK(j.x[0] == doctest::Approx(0.5));
    CHECK(j.y.empty());
    const JumpSets huge = detect_large_jumps(step, 1e9, one, one);
    CHECK(huge.x.empty());
    CHECK(huge.y.empty());
    CHECK_THROWS_AS(detect_large_jumps(step, 0.0, one, one), InputError);
}

}  // TEST_SUITE
