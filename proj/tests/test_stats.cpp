#include <cmath>
#include <vector>

#include "doctest.h"
#include "obtree/stats.hpp"
#include "oracles.hpp"

using namespace obtree;

TEST_SUITE("stats") {

TEST_CASE("t CDF: frozen values") {
    // References computed with 50-digit arithmetic.
    CHECK(students_t_cdf(1.3, 4) == doctest::Approx(0.868274201764388).epsilon(1e-12));
    CHECK(students_t_cdf(-0.7, 9) == doctest::Approx(0.250809519608073).epsilon(1e-12));
    CHECK(students_t_cdf(2.25, 1) == doctest::Approx(0.866875061252343).epsilon(1e-12));
    CHECK(students_t_cdf(0.0, 7) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(students_t_cdf(5.5, 30) == doctest::Approx(0.999997160713527).epsilon(1e-12));
}

TEST_CASE("t CDF: agrees with Simpson integration of the density") {
    for (double dof : {1.0, 2.0, 3.0, 7.0, 15.0, 40.0}) {
        for (double t : {-6.0, -2.5, -1.0, -0.3, 0.0, 0.4, 1.1, 2.9, 5.0}) {
            double lib = students_t_cdf(t, dof);
            double ref = oracle::t_cdf_simpson(t, dof);
            CHECK(std::fabs(lib - ref) < 1e-9);
        }
    }
}

TEST_CASE("t CDF: symmetry and monotonicity") {
    for (double dof : {1.0, 5.0, 12.0}) {
        for (double t : {0.1, 0.9, 2.2, 4.5}) {
            CHECK(students_t_cdf(t, dof) + students_t_cdf(-t, dof) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
        double prev = 0.0;
        for (double t = -8.0; t <= 8.0; t += 0.5) {
            double c = students_t_cdf(t, dof);
            CHECK(c >= prev);
            prev = c;
        }
    }
    CHECK(students_t_cdf(1e308, 5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(students_t_cdf(-1e308, 5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("t quantile: frozen values and round trips") {
    CHECK(students_t_quantile(0.975, 7) == doctest::Approx(2.36462425159278).epsilon(1e-9));
    CHECK(students_t_quantile(0.975, 1) == doctest::Approx(12.7062047364321).epsilon(1e-9));
    CHECK(students_t_quantile(0.9, 12) == doctest::Approx(1.3562173340232).epsilon(1e-9));
    CHECK(std::abs(students_t_quantile(0.5, 9)) < 1e-7); // root finder tolerance
    for (double dof : {1.0, 4.0, 11.0, 25.0}) {
        for (double p : {0.011, 0.2, 0.5, 0.77, 0.975, 0.999}) {
            double t = students_t_quantile(p, dof);
            CHECK(students_t_cdf(t, dof) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("incomplete beta: boundary and symmetry identities") {
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1, b) = 1 - (1-x)^b exactly.
    for (double x : {0.1, 0.35, 0.8}) {
        CHECK(regularized_incomplete_beta(1.0, 4.0, x) ==
              doctest::Approx(1.0 - std::pow(1.0 - x, 4.0)).epsilon(1e-12));
        // Reflection: I_x(a,b) = 1 - I_{1-x}(b,a).
        CHECK(regularized_incomplete_beta(2.5, 3.5, x) ==
              doctest::Approx(1.0 - regularized_incomplete_beta(3.5, 2.5, 1.0 - x))
                  .epsilon(1e-12));
    }
}

TEST_CASE("descending ranks: plain orders and ties") {
    CHECK(rank_descending({0.9, 0.5, 0.7}) == std::vector<double>{1.0, 3.0, 2.0});
    CHECK(rank_descending({0.2, 0.2, 0.1}) == std::vector<double>{1.5, 1.5, 3.0});
    CHECK(rank_descending({1.0, 1.0, 1.0, 1.0}) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
    CHECK(rank_descending({5.0}) == std::vector<double>{1.0});
}

TEST_CASE("descending ranks: counting oracle on random rows") {
    std::vector<std::vector<double>> rows = {
        {0.3, 0.1, 0.4, 0.1, 0.5},
        {1.0, -1.0, 0.0, 0.0, 1.0, -2.0},
        {0.9, 0.85, 0.7, 0.85},
        {2.0, 2.0},
    };
    for (const auto& row : rows) {
        auto lib = rank_descending(row);
        auto ref = oracle::ranks_by_counting(row);
        REQUIRE(lib.size() == ref.size());
        for (std::size_t i = 0; i < lib.size(); ++i)
            CHECK(lib[i] == doctest::Approx(ref[i]).epsilon(1e-15));
        // Rank sum is m(m+1)/2 regardless of ties.
        double sum = 0.0;
        for (double r : lib) sum += r;
        double m = static_cast<double>(row.size());
        CHECK(sum == doctest::Approx(m * (m + 1.0) / 2.0).epsilon(1e-12));
    }
}

} // TEST_SUITE
