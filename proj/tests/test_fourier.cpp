#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sorso/errors.hpp"
#include "sorso/fourier.hpp"
#include "sorso/rng.hpp"

using namespace sorso;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("untruncated enumeration is lexicographic") {
    FourierBasis b1(2, 1);
    REQUIRE(b1.feature_count() == 3);
    CHECK(b1.coefficient(0)[0] == 0);
    CHECK(b1.coefficient(1)[0] == 1);
    CHECK(b1.coefficient(2)[0] == 2);

    FourierBasis b2(1, 2);
    REQUIRE(b2.feature_count() == 4);
    int expect[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int i = 0; i < 4; ++i) {
        CHECK(b2.coefficient(i)[0] == expect[i][0]);
        CHECK(b2.coefficient(i)[1] == expect[i][1]);
    }
}

TEST_CASE("feature values at hand-computed states") {
    FourierBasis b(2, 1);
    auto phi = b.featurize(std::vector<double>{0.5});
    REQUIRE(phi.size() == 3);
    CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(phi[2] == doctest::Approx(-1.0).epsilon(1e-15));

    FourierBasis b2(1, 2);
    auto phi2 = b2.featurize(std::vector<double>{1.0, 1.0});
    REQUIRE(phi2.size() == 4);
    CHECK(phi2[0] == doctest::Approx(1.0));
    CHECK(phi2[1] == doctest::Approx(-1.0));
    CHECK(phi2[2] == doctest::Approx(-1.0));
    CHECK(phi2[3] == doctest::Approx(1.0));
}

TEST_CASE("matches the committed golden file") {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/fourier_golden.txt");
    REQUIRE(in.good());
    std::string line;
    int cases = 0;
    while (std::getline(in, line)) {
        std::istringstream hs(line);
        std::string tag;
        int order, dim, maxf;
        hs >> tag >> order >> dim >> maxf;
        REQUIRE(tag == "case");
        std::vector<double> s(dim);
        for (auto& x : s) hs >> x;
        REQUIRE(std::getline(in, line));
        std::istringstream vs(line);
        std::vector<double> expect;
        double v;
        while (vs >> v) expect.push_back(v);

        FourierBasis b(order, dim, maxf);
        REQUIRE(b.feature_count() == static_cast<int>(expect.size()));
        auto phi = b.featurize(s);
        for (std::size_t i = 0; i < expect.size(); ++i)
            CHECK(std::abs(phi[i] - expect[i]) <= 1e-15);
        ++cases;
    }
    CHECK(cases == 4);
}

TEST_CASE("truncation orders by norm then lexicographic, zero vector first") {
    FourierBasis b(3, 8, 512);
    REQUIRE(b.feature_count() == 512);
    auto c0 = b.coefficient(0);
    for (int j = 0; j < 8; ++j) CHECK(c0[j] == 0);
    auto norm2 = [&](int i) {
        long long n = 0;
        for (int v : b.coefficient(i)) n += static_cast<long long>(v) * v;
        return n;
    };
    for (int i = 1; i < 512; ++i) {
        long long a = norm2(i - 1), bb = norm2(i);
        CHECK(a <= bb);
        if (a == bb) {
            auto ca = b.coefficient(i - 1), cb = b.coefficient(i);
            CHECK(std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end()));
        }
    }
}

TEST_CASE("per-feature learning rates divide by the coefficient norm") {
    FourierBasis b(4, 2, 0);
    auto lr = b.lr_scaling(0.1);
    REQUIRE(lr.size() == static_cast<std::size_t>(b.feature_count()));
    for (int i = 0; i < b.feature_count(); ++i) {
        auto c = b.coefficient(i);
        double n = std::sqrt(double(c[0] * c[0] + c[1] * c[1]));
        CHECK(lr[i] == doctest::Approx(0.1 / std::max(n, 1.0)).epsilon(1e-15));
        if (c[0] == 3 && c[1] == 4) CHECK(lr[i] == doctest::Approx(0.1 / 5.0).epsilon(1e-15));
    }
}

TEST_CASE("feature map is Lipschitz in the state") {
    // |cos(pi c.s) - cos(pi c.s')| <= pi ||c|| ||s - s'||, so a bound of
    // pi * order * sqrt(dim) * ||s - s'|| holds per feature.
    FourierBasis b(3, 4, 32);
    RngStream rng(11);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> s(4), t(4);
        for (int j = 0; j < 4; ++j) {
            s[j] = rng.uniform();
            t[j] = rng.uniform();
        }
        double dist = 0;
        for (int j = 0; j < 4; ++j) dist += (s[j] - t[j]) * (s[j] - t[j]);
        dist = std::sqrt(dist);
        auto ps = b.featurize(s), pt = b.featurize(t);
        double bound = kPi * 3 * std::sqrt(4.0) * dist + 1e-12;
        for (int i = 0; i < b.feature_count(); ++i)
            CHECK(std::abs(ps[i] - pt[i]) <= bound);
    }
}

TEST_CASE("rejects bad inputs and unbounded enumeration") {
    CHECK_THROWS_AS(FourierBasis(-1, 2), ConfigError);
    CHECK_THROWS_AS(FourierBasis(3, 0), ConfigError);
    // (3+1)^13 = 67M > 2^24: needs max_features
    CHECK_THROWS_AS(FourierBasis(3, 13), ConfigError);
    try {
        FourierBasis(3, 13);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("max_features") != std::string::npos);
    }
    CHECK_NOTHROW(FourierBasis(3, 13, 128));

    FourierBasis b(2, 2);
    CHECK_THROWS_AS(b.featurize(std::vector<double>{0.5}), UsageError);
    CHECK_THROWS_AS(b.featurize(std::vector<double>{0.5, 1.5}), UsageError);
    CHECK_THROWS_AS(b.featurize(std::vector<double>{-0.1, 0.5}), UsageError);
}
