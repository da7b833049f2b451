#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mocoguard/errors.hpp"
#include "mocoguard/instance_gen.hpp"

using namespace mocoguard;

namespace {

double mean_nn_distance(const Instance& inst) {
    const std::size_t n = inst.size();
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        double best = 1e9;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double dx = inst.features(a, 0) - inst.features(b, 0);
            const double dy = inst.features(a, 1) - inst.features(b, 1);
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
        total += best;
    }
    return total / static_cast<double>(n);
}

double skewness(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        m2 += (v - m) * (v - m);
        m3 += (v - m) * (v - m) * (v - m);
    }
    m2 /= static_cast<double>(x.size());
    m3 /= static_cast<double>(x.size());
    return m3 / std::pow(m2, 1.5);
}

}  // namespace

TEST_CASE("generators are deterministic and valid") {
    for (auto kind : {ProblemKind::BiTSP, ProblemKind::TriTSP, ProblemKind::BiCVRP, ProblemKind::BiKP}) {
        const auto a = gen_uniform(kind, 10, 3, 7);
        const auto b = gen_uniform(kind, 10, 3, 7);
        CHECK(a == b);
        CHECK(gen_uniform(kind, 10, 5, 7)[2] == a[2]);
        for (const auto& x : a) CHECK_NOTHROW(validate_instance(x));
        const auto g = gen_gmm(kind, 10, 3, 10, 3, 7);
        CHECK(g == gen_gmm(kind, 10, 3, 10, 3, 7));
        for (const auto& x : g) {
            CHECK_NOTHROW(validate_instance(x));
            CHECK(x.provenance == Provenance::Gmm);
        }
        for (auto d : {HeavyTail::LogNormal, HeavyTail::Beta, HeavyTail::Gamma}) {
            const auto h = gen_heavytail(kind, 10, 2, d, 9);
            CHECK(h == gen_heavytail(kind, 10, 2, d, 9));
            for (const auto& x : h) CHECK_NOTHROW(validate_instance(x));
        }
    }
    CHECK_THROWS_AS(gen_uniform(ProblemKind::BiTSP, 3, 1, 1), ConfigError);
    CHECK_THROWS_AS(gen_gmm(ProblemKind::BiTSP, 10, 1, 0.5, 3, 1), ConfigError);
    CHECK_THROWS_AS(gen_gmm(ProblemKind::BiTSP, 10, 1, 5, 0, 1), ConfigError);
    CHECK_THROWS_AS(heavy_tail_from_string("cauchy"), ConfigError);
}

TEST_CASE("uniform features have mean one half") {
    const auto set = gen_uniform(ProblemKind::BiTSP, 100, 250, 3);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& x : set)
        for (double v : x.features.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
            ++count;
        }
    CHECK(count == 100000);
    CHECK(std::abs(sum / static_cast<double>(count) - 0.5) <= 0.005);
}

TEST_CASE("gmm columns span the unit interval") {
    for (const auto& x : gen_gmm(ProblemKind::TriTSP, 20, 5, 30, 3, 2)) {
        for (std::size_t c = 0; c < x.features.cols; ++c) {
            double lo = 1.0, hi = 0.0;
            for (std::size_t r = 0; r < x.features.rows; ++r) {
                lo = std::min(lo, x.features(r, c));
                hi = std::max(hi, x.features(r, c));
            }
            CHECK(lo == 0.0);
            CHECK(hi == 1.0);
        }
    }
}

TEST_CASE("nearest-neighbour distance shrinks as clusters spread") {
    double prev = 1e9;
    for (double c : {1.0, 10.0, 50.0}) {
        double total = 0.0;
        for (const auto& x : gen_gmm(ProblemKind::BiTSP, 20, 200, c, 3, 17)) total += mean_nn_distance(x);
        const double avg = total / 200.0;
        CHECK(avg < prev);
        prev = avg;
    }
}

TEST_CASE("heavy tail samplers") {
    Rng rng(5);
    std::vector<double> g, l;
    for (int i = 0; i < 100000; ++i) {
        const double b = sample_heavy_tail(HeavyTail::Beta, rng);
        CHECK((b > 0.0 && b < 1.0));
        g.push_back(sample_heavy_tail(HeavyTail::Gamma, rng));
        l.push_back(sample_heavy_tail(HeavyTail::LogNormal, rng));
    }
    // gamma(2, 0.5) has skewness sqrt(2) ~ 1.41; lognormal(0, 1) ~ 6.2.
    CHECK(skewness(g) == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
    CHECK(skewness(l) > skewness(g));
}

TEST_CASE("minmax projection") {
    const Matrix m = Matrix::from_rows({{-0.2, 0.3}, {0.3, 0.3}, {0.8, 0.3}});
    const Matrix p = minmax_project(m);
    CHECK(p(0, 0) == 0.0);
    CHECK(p(1, 0) == doctest::Approx(0.5));
    CHECK(p(2, 0) == 1.0);
    for (std::size_t r = 0; r < 3; ++r) CHECK(p(r, 1) == 0.5);
    CHECK(minmax_project(p) == p);

    Rng rng(1);
    Matrix x(12, 4);
    for (auto& v : x.data) v = rng.uniform(-3, 3);
    const Matrix y = minmax_project(x);
    CHECK(minmax_project(y) == y);
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t a = 0; a < 12; ++a)
            for (std::size_t b = 0; b < 12; ++b)
                if (x(a, c) < x(b, c)) CHECK(y(a, c) <= y(b, c));
}

TEST_CASE("projection leaves frozen fields alone") {
    auto cvrp = gen_uniform(ProblemKind::BiCVRP, 10, 1, 4)[0];
    Instance moved = cvrp;
    for (std::size_t r = 0; r < moved.features.rows; ++r) moved.features(r, 0) += 0.3 * r;
    project_instance(moved);
    CHECK(moved.features(0, 0) == cvrp.features(0, 0));
    CHECK(moved.features(0, 1) == cvrp.features(0, 1));
    CHECK(moved.demands == cvrp.demands);
    CHECK(moved.capacity == cvrp.capacity);

    auto kp = gen_uniform(ProblemKind::BiKP, 10, 1, 4)[0];
    Instance kmoved = kp;
    project_instance(kmoved);
    CHECK(kmoved.capacity == kp.capacity);
}

TEST_CASE("default capacities") {
    CHECK(default_kp_capacity(100) == doctest::Approx(12.5));
    CHECK(default_kp_capacity(16) == doctest::Approx(2.0));
    CHECK(default_cvrp_capacity(20) == 3.0);
    CHECK(default_cvrp_capacity(50) == 4.0);
    CHECK(default_cvrp_capacity(100) == 5.0);
}
