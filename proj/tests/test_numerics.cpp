#include <cmath>
#include <numeric>

#include "doctest.h"

#include "diner/numerics.hpp"

using namespace diner;

namespace {

// Brute-force O(n^2) DFT over rows and columns, the independent oracle for
// fft2.
ComplexGrid dft2_oracle(const ComplexGrid& g, bool inverse) {
    const double sign = inverse ? 1.0 : -1.0;
    ComplexGrid out(g.height, g.width);
    for (std::size_t ky = 0; ky < g.height; ++ky) {
        for (std::size_t kx = 0; kx < g.width; ++kx) {
            double sr = 0.0, si = 0.0;
            for (std::size_t y = 0; y < g.height; ++y) {
                for (std::size_t x = 0; x < g.width; ++x) {
                    const double ang =
                        sign * 2.0 * M_PI *
                        (static_cast<double>(ky * y) / static_cast<double>(g.height) +
                         static_cast<double>(kx * x) / static_cast<double>(g.width));
                    const double cr = std::cos(ang);
                    const double ci = std::sin(ang);
                    const std::size_t i = y * g.width + x;
                    sr += g.re[i] * cr - g.im[i] * ci;
                    si += g.re[i] * ci + g.im[i] * cr;
                }
            }
            const double scale = inverse ? 1.0 / static_cast<double>(g.size()) : 1.0;
            out.re[ky * g.width + kx] = sr * scale;
            out.im[ky * g.width + kx] = si * scale;
        }
    }
    return out;
}

ComplexGrid random_grid(std::size_t h, std::size_t w, Rng& rng) {
    ComplexGrid g(h, w);
    for (double& v : g.re) v = rng.uniform(-1.0, 1.0);
    for (double& v : g.im) v = rng.uniform(-1.0, 1.0);
    return g;
}

} // namespace

TEST_CASE("dense_affine basic cases") {
    Tensor2D eye(2, 2);
    eye.at(0, 0) = 1.0;
    eye.at(1, 1) = 1.0;
    std::vector<double> b{0.0, 0.0};
    std::vector<double> x{3.0, 4.0};
    auto y = dense_affine(eye, b, x);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 4.0);

    Tensor2D zero(2, 3);
    std::vector<double> b2{1.0, 2.0};
    std::vector<double> x3{9.0, -4.0, 7.0};
    auto y2 = dense_affine(zero, b2, x3);
    CHECK(y2[0] == 1.0);
    CHECK(y2[1] == 2.0);

    // by-hand product: [[1,2],[3,4]]*(1,1) = (3,7)
    Tensor2D m(2, 2);
    m.at(0, 0) = 1.0;
    m.at(0, 1) = 2.0;
    m.at(1, 0) = 3.0;
    m.at(1, 1) = 4.0;
    auto y3 = dense_affine(m, b, std::vector<double>{1.0, 1.0});
    CHECK(y3[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(y3[1] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("dense_affine rejects mismatched shapes") {
    Tensor2D m(2, 3);
    std::vector<double> b{0.0, 0.0};
    CHECK_THROWS_AS(dense_affine(m, b, std::vector<double>{1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(dense_affine(m, std::vector<double>{0.0},
                                 std::vector<double>{1.0, 2.0, 3.0}),
                    ShapeError);
}

TEST_CASE("fft2 constant and impulse") {
    ComplexGrid g(4, 4);
    for (double& v : g.re) v = 1.0;
    ComplexGrid f = fft2(g, false);
    CHECK(f.re[0] == doctest::Approx(16.0).epsilon(1e-14));
    for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(std::abs(f.re[i]) < 1e-12);
        CHECK(std::abs(f.im[i]) < 1e-12);
    }

    ComplexGrid imp(4, 4);
    imp.re[0] = 1.0;
    ComplexGrid fi = fft2(imp, false);
    for (std::size_t i = 0; i < fi.size(); ++i) {
        CHECK(fi.re[i] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(fi.im[i]) < 1e-13);
    }
}

TEST_CASE("fft2 matches the direct DFT oracle on random 16x16") {
    Rng rng(42);
    ComplexGrid g = random_grid(16, 16, rng);
    ComplexGrid fast = fft2(g, false);
    ComplexGrid slow = dft2_oracle(g, false);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(fast.re[i] - slow.re[i]) < 1e-9);
        CHECK(std::abs(fast.im[i] - slow.im[i]) < 1e-9);
    }
}

TEST_CASE("fft2 round trip and Parseval") {
    Rng rng(7);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {16, 4}, {32, 32}}) {
        ComplexGrid g = random_grid(h, w, rng);
        ComplexGrid rt = fft2(fft2(g, false), true);
        double max_err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            max_err = std::max(max_err, std::abs(rt.re[i] - g.re[i]));
            max_err = std::max(max_err, std::abs(rt.im[i] - g.im[i]));
        }
        CHECK(max_err < 1e-12);

        ComplexGrid F = fft2(g, false);
        double e_space = 0.0, e_freq = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            e_space += g.re[i] * g.re[i] + g.im[i] * g.im[i];
            e_freq += F.re[i] * F.re[i] + F.im[i] * F.im[i];
        }
        e_freq /= static_cast<double>(g.size());
        CHECK(std::abs(e_space - e_freq) / e_space < 1e-10);
    }
}

TEST_CASE("fft2 rejects non-power-of-two sizes") {
    ComplexGrid g(3, 4);
    CHECK_THROWS_AS(fft2(g, false), SizeError);
    ComplexGrid g2(4, 6);
    CHECK_THROWS_AS(fft2(g2, false), SizeError);
}

TEST_CASE("adam first step has magnitude lr") {
    std::vector<double> p{1.0};
    std::vector<double> g{5.0};
    AdamState st(1);
    adam_step(p, g, st, {0.01});
    CHECK(std::abs((1.0 - p[0]) - 0.01) < 1e-6);
    CHECK(st.t == 1);
}

TEST_CASE("adam zero gradient leaves params unchanged") {
    std::vector<double> p{0.3, -0.7};
    std::vector<double> g{0.0, 0.0};
    AdamState st(2);
    adam_step(p, g, st, {0.1});
    CHECK(p[0] == 0.3);
    CHECK(p[1] == -0.7);
}

TEST_CASE("adam descends the scalar quadratic") {
    // oracle: run gradient descent on f(p) = p^2, grad = 2p
    std::vector<double> p{1.0};
    AdamState st(1);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> g{2.0 * p[0]};
        adam_step(p, g, st, {0.1});
    }
    CHECK(std::abs(p[0]) < 0.1);
}

TEST_CASE("adam is bit-reproducible") {
    auto run = [] {
        std::vector<double> p{0.5, -0.25, 4.0};
        AdamState st(3);
        for (int i = 0; i < 17; ++i) {
            std::vector<double> g{0.1 * p[0] - 1.0, p[1] * p[1], -p[2]};
            adam_step(p, g, st, {0.01});
        }
        return p;
    };
    CHECK(run() == run());
}

TEST_CASE("adam rejects non-finite gradients naming the index") {
    std::vector<double> p{1.0, 2.0};
    std::vector<double> g{0.0, std::nan("")};
    AdamState st(2);
    CHECK_THROWS_WITH_AS(adam_step(p, g, st, {0.1}),
                         doctest::Contains("index 1"), NumericError);
}

TEST_CASE("seeded_permutation properties") {
    Rng rng(1);
    auto p1 = seeded_permutation(rng, 1);
    CHECK(p1 == std::vector<std::uint32_t>{0});

    Rng a(99), b(99);
    CHECK(seeded_permutation(a, 257) == seeded_permutation(b, 257));

    Rng c(3);
    auto p = seeded_permutation(c, 1000);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 1000; ++i) CHECK(sorted[i] == i);

    Rng d(5);
    CHECK_THROWS_AS(seeded_permutation(d, 0), ConfigError);
}

TEST_CASE("rng stream depends only on the seed") {
    Rng a(123456), b(123456), c(123457);
    bool all_eq = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        all_eq = all_eq && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_eq);
    CHECK(any_diff);

    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sincos_batch tracks libm over the working range") {
    Rng rng(11);
    std::vector<double> x(4096);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mag = (i % 4 == 0) ? 1.0 : (i % 4 == 1) ? 40.0 : (i % 4 == 2) ? 500.0 : 2e4;
        x[i] = rng.uniform(-mag, mag);
    }
    std::vector<double> s(x.size()), c(x.size());
    sincos_batch(x.data(), s.data(), c.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(s[i] - std::sin(x[i])) < 1e-13);
        CHECK(std::abs(c[i] - std::cos(x[i])) < 1e-13);
    }
    std::vector<double> s2(x.size());
    sin_batch(x.data(), s2.data(), x.size());
    CHECK(s == s2);
}
