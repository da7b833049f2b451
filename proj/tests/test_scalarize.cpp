#include <doctest.h>

#include "mocoguard/errors.hpp"
#include "mocoguard/rng.hpp"
#include "mocoguard/scalarize.hpp"

using namespace mocoguard;
using V = std::vector<double>;

TEST_CASE("weighted sum") {
    CHECK(weighted_sum(V{5, 10}, V{0.2, 0.8}) == doctest::Approx(9.0));
    CHECK(weighted_sum(V{2, 4}, V{0.5, 0.5}) == doctest::Approx(3.0));
    CHECK(weighted_sum(V{7, 7, 7}, V{0.1, 0.3, 0.6}) == doctest::Approx(7.0));
    CHECK_THROWS_AS(weighted_sum(V{1, 1}, V{0.5, 0.6}), ConfigError);
}

TEST_CASE("tchebycheff") {
    CHECK(tchebycheff(V{10, 2}, V{0.3, 0.7}, V{1, 1}) == doctest::Approx(2.7));
    CHECK(tchebycheff(V{3, 4}, V{0.3, 0.7}, V{3, 4}) == 0.0);
    CHECK(tchebycheff(V{4, 4}, V{1, 0}, V{0, 0}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(tchebycheff(V{4, 4}, V{1, 0.1}, V{0, 0}), ConfigError);
}

TEST_CASE("update_ideal") {
    CHECK(update_ideal(V{1, 1}, V{0.5, 2}) == V{0.5, 1});
    CHECK(update_ideal(V{0, 0}, V{3, 3}) == V{0, 0});
}

TEST_CASE("ideal point fold is idempotent and order independent") {
    Rng rng(4);
    std::vector<V> pts(30, V(3));
    for (auto& p : pts)
        for (auto& v : p) v = rng.uniform(-1, 1);
    IdealPoint a, b, c;
    for (const auto& p : pts) a.observe(p);
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) b.observe(*it);
    CHECK(a.value() == b.value());
    const V before = a.value();
    for (const auto& p : pts) a.observe(p);
    CHECK(a.value() == before);
    for (std::size_t i = 0; i < 15; ++i) c.observe(pts[i]);
    IdealPoint d;
    for (std::size_t i = 15; i < pts.size(); ++i) d.observe(pts[i]);
    c.merge(d);
    CHECK(c.value() == before);
}

TEST_CASE("linearity and homogeneity") {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const V w{0.25, 0.75};
        const V f{rng.uniform(0, 5), rng.uniform(0, 5)}, g{rng.uniform(0, 5), rng.uniform(0, 5)};
        const double a = rng.uniform(0.1, 3);
        CHECK(weighted_sum(V{f[0] + a * g[0], f[1] + a * g[1]}, w) ==
              doctest::Approx(weighted_sum(f, w) + a * weighted_sum(g, w)));
        const V z{rng.uniform(-1, 0), rng.uniform(-1, 0)};
        const V scaled{z[0] + a * (f[0] - z[0]), z[1] + a * (f[1] - z[1])};
        CHECK(tchebycheff(scaled, w, z) == doctest::Approx(a * tchebycheff(f, w, z)));
    }
}

TEST_CASE("tchebycheff with a unit preference picks the f1 argmin") {
    Rng rng(12);
    for (int t = 0; t < 50; ++t) {
        std::vector<V> fs(10, V(2));
        for (auto& f : fs)
            for (auto& v : f) v = static_cast<double>(rng.index(6));
        const V z{0, 0};
        std::size_t arg_t = 0, arg_f = 0;
        for (std::size_t i = 1; i < fs.size(); ++i) {
            if (tchebycheff(fs[i], V{1, 0}, z) < tchebycheff(fs[arg_t], V{1, 0}, z)) arg_t = i;
            if (fs[i][0] < fs[arg_f][0]) arg_f = i;
        }
        CHECK(arg_t == arg_f);
    }
}

TEST_CASE("scalarization names") {
    CHECK(scalarization_from_string("ws") == Scalarization::WeightedSum);
    CHECK(scalarization_from_string("tch") == Scalarization::Tchebycheff);
    CHECK_THROWS_AS(scalarization_from_string("pbi"), ConfigError);
}
