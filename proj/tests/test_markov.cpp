#include <doctest.h>

#include <cmath>
#include <random>

#include "pvtnet/markov.hpp"
#include "pvtnet/numerics.hpp"

using namespace pvtnet;

TEST_CASE("product form C=1 with unit ratios") {
    ChainParams cp{1, 1.0, 1.0, 1.0, 1.0};
    const auto d = stationary_distribution(cp);
    CHECK(d.prob(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(d.prob(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(d.prob(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(blocking_probability(d) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(busy_probability(d) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(mean_sojourn_time(d, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("product form C=2 weights") {
    // Direct substitution: weights {1, 2, 1, 2, 1, 0.5}, chi = 7.5.
    ChainParams cp{2, 1.0, 1.0, 1.0, 1.0};
    const auto d = stationary_distribution(cp);
    const double chi = 7.5;
    CHECK(d.prob(0, 0) == doctest::Approx(1.0 / chi).epsilon(1e-12));
    CHECK(d.prob(0, 1) == doctest::Approx(2.0 / chi).epsilon(1e-12));
    CHECK(d.prob(0, 2) == doctest::Approx(1.0 / chi).epsilon(1e-12));
    CHECK(d.prob(1, 1) == doctest::Approx(2.0 / chi).epsilon(1e-12));
    CHECK(d.prob(1, 2) == doctest::Approx(1.0 / chi).epsilon(1e-12));
    CHECK(d.prob(2, 2) == doctest::Approx(0.5 / chi).epsilon(1e-12));
    CHECK(blocking_probability(d) == doctest::Approx(3.5 / 7.5).epsilon(1e-12));
    // Mean occupancy from the same weights: (1*2 + 1*1 + 2*0.5)/7.5.
    CHECK(mean_sojourn_time(d, 1.0) == doctest::Approx(4.0 / 7.5).epsilon(1e-12));
}

TEST_CASE("no arrivals leaves a binomial availability row") {
    ChainParams cp{3, 0.0, 1.0, 2.0, 1.0};
    const auto d = stationary_distribution(cp);
    const double ratio = 2.0;
    const double denom = std::pow(1.0 + ratio, 3.0);
    for (int n = 0; n <= 3; ++n) {
        double binom = 1.0;
        for (int k = 0; k < n; ++k) {
            binom = binom * (3 - k) / (k + 1);
        }
        CHECK(d.prob(0, n) ==
              doctest::Approx(binom * std::pow(ratio, n) / denom).epsilon(1e-12));
        for (int m = 1; m <= n; ++m) {
            CHECK(d.prob(m, n) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("generator rates and conservation") {
    ChainParams cp{1, 2.0, 3.0, 5.0, 7.0};
    const auto q = build_generator(cp);
    const auto idx = [](int m, int n) {
        return static_cast<Eigen::Index>(StateDistribution::index_of(m, n));
    };
    // (0,0) -> (0,1): recovery at rate (C - n) alpha = alpha for C = 1.
    CHECK(q(idx(0, 0), idx(0, 1)) == doctest::Approx(5.0));
    // (1,1) -> (0,1): departure at rate m eta.
    CHECK(q(idx(1, 1), idx(0, 1)) == doctest::Approx(3.0));
    // (0,1) -> (1,1): arrival; (0,1) -> (0,0): loss of the idle channel.
    CHECK(q(idx(0, 1), idx(1, 1)) == doctest::Approx(2.0));
    CHECK(q(idx(0, 1), idx(0, 0)) == doctest::Approx(7.0));
    // No loss transition out of the fully-busy diagonal state.
    CHECK(q(idx(1, 1), idx(0, 0)) == doctest::Approx(0.0));
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
        CHECK(std::abs(q.row(r).sum()) < 1e-12);
    }
}

TEST_CASE("generator solve agrees with the product form") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> rate(0.1, 4.0);
    for (int C = 1; C <= 8; ++C) {
        for (int k = 0; k < 10; ++k) {
            ChainParams cp{C, rate(gen), rate(gen), rate(gen), rate(gen)};
            const auto pf = stationary_distribution(cp);
            const auto lin = solve_generator(build_generator(cp), C);
            pf.for_each_state([&](int m, int n, double p) {
                CHECK(std::abs(p - lin.prob(m, n)) < 1e-10);
            });
        }
    }
}

TEST_CASE("generator solve reproduces the C=2 blocking mass") {
    ChainParams cp{2, 1.0, 1.0, 1.0, 1.0};
    const auto lin = solve_generator(build_generator(cp), 2);
    CHECK(blocking_probability(lin) ==
          doctest::Approx(3.5 / 7.5).epsilon(1e-10));
}

TEST_CASE("normalization within 1e-12") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> rate(0.05, 8.0);
    for (int k = 0; k < 40; ++k) {
        ChainParams cp{1 + static_cast<int>(gen() % 30), rate(gen), rate(gen),
                       rate(gen), rate(gen)};
        const auto d = stationary_distribution(cp);
        double sum = 0.0;
        d.for_each_state([&](int, int, double p) { sum += p; });
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("log-space weights survive a large channel count") {
    ChainParams cp{400, 3.0, 1.0, 1e6, 1.0};
    const auto d = stationary_distribution(cp);
    double sum = 0.0;
    d.for_each_state([&](int, int, double p) { sum += p; });
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("Erlang-B limit at overwhelming availability") {
    for (int C : {1, 5, 10, 20}) {
        for (double load : {0.5, 1.0, 5.0}) {
            ChainParams cp{C, load, 1.0, 1e6, 1.0};
            const double pb = blocking_probability(stationary_distribution(cp));
            CHECK(std::abs(pb - erlang_b(C, load)) < 1e-4);
        }
    }
}

TEST_CASE("blocking monotone in channels and availability") {
    for (int i = 0; i < 10; ++i) {
        const double load = 0.5 + i;
        double prev = 1.0;
        for (int j = 0; j < 10; ++j) {
            ChainParams cp{2 + 2 * j, load, 1.0, 1.0, 1.0};
            const double pb = blocking_probability(stationary_distribution(cp));
            CHECK(pb <= prev + 1e-12);
            prev = pb;
        }
    }
    for (int i = 0; i < 10; ++i) {
        const double load = 0.5 + i;
        double prev = 1.0;
        for (int j = 0; j < 10; ++j) {
            ChainParams cp{8, load, 1.0, std::pow(2.0, j - 3), 1.0};
            const double pb = blocking_probability(stationary_distribution(cp));
            CHECK(pb <= prev + 1e-12);
            prev = pb;
        }
    }
}

TEST_CASE("blocking vanishes with light load and high availability") {
    ChainParams cp{6, 1e-6, 1.0, 1e9, 1.0};
    CHECK(blocking_probability(stationary_distribution(cp)) < 1e-5);
}

TEST_CASE("sojourn preconditions and edge cases") {
    ChainParams cp{3, 0.0, 1.0, 1.0, 1.0};
    const auto d = stationary_distribution(cp);
    CHECK(mean_occupancy(d) == doctest::Approx(0.0));
    CHECK_THROWS_AS(mean_sojourn_time(d, 0.0), std::invalid_argument);
}

TEST_CASE("state distribution validation") {
    CHECK_THROWS_AS(StateDistribution(1, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(StateDistribution(1, {0.9, 0.2, 0.2}), std::invalid_argument);
    const StateDistribution d(1, {0.2, 0.3, 0.5});
    CHECK_THROWS_AS(d.prob(1, 0), std::out_of_range);
    CHECK_THROWS_AS(d.prob(0, 2), std::out_of_range);
}
