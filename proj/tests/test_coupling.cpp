#include <doctest.h>

#include <cmath>

#include "pvtnet/coupling.hpp"
#include "pvtnet/numerics.hpp"

using namespace pvtnet;

namespace {

LinkParams defaults() { return LinkParams{}; }

InterferenceTransform default_disk(const SolverConfig& cfg,
                                   const LinkParams& link) {
    return InterferenceTransform::finite_disk(
        neighborhood_disk_radius(link.bs_density, cfg.n_max));
}

}  // namespace

TEST_CASE("outage table reproduces its nodes and respects bounds") {
    LinkParams link = defaults();
    SolverConfig cfg;
    const auto tr = default_disk(cfg, link);
    const auto grid = default_gamma_grid(cfg.outage_cache_resolution);
    OutageTable table(link, FadingModel::rayleigh(), tr, grid, 6,
                      QuadratureSpec{}, OutageEvaluator::RayleighReduction);
    for (std::size_t i = 0; i < grid.size(); i += 5) {
        const double direct =
            evaluate_outage(grid[i], 3, link, FadingModel::rayleigh(), tr,
                            QuadratureSpec{}, OutageEvaluator::RayleighReduction)
                .outage;
        CHECK(table.lookup(grid[i], 3) == doctest::Approx(direct).epsilon(1e-12));
    }
    // Flat rows interpolate flat; everything stays in [0, 1].
    OutageTable flat({1.0, 10.0, 100.0}, {{0.25, 0.25, 0.25}});
    CHECK(flat.lookup(3.7, 0) == doctest::Approx(0.25).epsilon(1e-12));
    for (double g = 0.5; g < 200.0; g *= 1.7) {
        const double v = table.lookup(g, 5);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("outage table off-grid audit stays under 1e-3") {
    LinkParams link = defaults();
    SolverConfig cfg;
    const auto tr = default_disk(cfg, link);
    OutageTable table(link, FadingModel::rayleigh(), tr,
                      default_gamma_grid(cfg.outage_cache_resolution), 3,
                      QuadratureSpec{}, OutageEvaluator::RayleighReduction);
    double worst = 0.0;
    for (int i = 0; i < 33; ++i) {
        const double g_db = -12.0 + 42.0 * i / 32.0 + 0.37;  // off the nodes
        const double g = std::pow(10.0, g_db / 10.0);
        const double direct =
            evaluate_outage(g, 2, link, FadingModel::rayleigh(), tr,
                            QuadratureSpec{}, OutageEvaluator::RayleighReduction)
                .outage;
        worst = std::max(worst, std::abs(direct - table.lookup(g, 2)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("cached-binomial unavailability identities") {
    std::vector<double> ones(25, 1.0);
    std::vector<double> zeros(25, 0.0);
    CHECK(unavailability_from_cache(0.0, ones, 24) == doctest::Approx(0.0));
    CHECK(unavailability_from_cache(0.4, zeros, 24) == doctest::Approx(0.0));
    CHECK(unavailability_from_cache(0.4, ones, 24) ==
          doctest::Approx(1.0 - std::pow(0.6, 24)).epsilon(1e-12));
    // Linear-in-delta cache: eps = E[Delta] * c excluding nothing extra.
    std::vector<double> lin(25);
    for (int d = 0; d <= 24; ++d) {
        lin[d] = d * 0.01;
    }
    CHECK(unavailability_from_cache(0.5, lin, 24) ==
          doctest::Approx(24 * 0.5 * 0.01).epsilon(1e-12));
}

TEST_CASE("fixed point at the defaults, checked by bisection") {
    LinkParams link = defaults();
    OfferedTraffic traffic;
    SolverConfig cfg;
    const auto tr = default_disk(cfg, link);
    const auto fp =
        solve_fixed_point(traffic, link, FadingModel::rayleigh(), cfg);
    CHECK(fp.converged);
    CHECK(fp.epsilon > 0.0);
    CHECK(fp.epsilon < 1.0);
    CHECK(fp.alpha_beta_ratio ==
          doctest::Approx((1.0 - fp.epsilon) / fp.epsilon).epsilon(1e-12));
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 64; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g = busy_probability_sweep(mid, traffic, link,
                                                FadingModel::rayleigh(), tr, cfg) -
                         mid;
        (g > 0.0 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - fp.p_busy) < 1e-6);
    // Self-consistency: one more sweep moves the busy probability less
    // than the solver tolerance.
    const double swept = busy_probability_sweep(fp.p_busy, traffic, link,
                                                FadingModel::rayleigh(), tr, cfg);
    CHECK(std::abs(swept - fp.p_busy) < cfg.tol * 10.0);
}

TEST_CASE("the sweep map brackets a fixed point") {
    LinkParams link = defaults();
    OfferedTraffic traffic;
    SolverConfig cfg;
    const auto tr = default_disk(cfg, link);
    const double at0 = busy_probability_sweep(0.0, traffic, link,
                                              FadingModel::rayleigh(), tr, cfg);
    const double at1 = busy_probability_sweep(1.0, traffic, link,
                                              FadingModel::rayleigh(), tr, cfg);
    CHECK(at0 >= 0.0);
    CHECK(at1 <= 1.0);
}

TEST_CASE("solution invariant to damping and start") {
    LinkParams link = defaults();
    OfferedTraffic traffic;
    SolverConfig base;
    const auto ref =
        solve_fixed_point(traffic, link, FadingModel::rayleigh(), base);
    for (double damping : {0.3, 1.0}) {
        SolverConfig cfg = base;
        cfg.damping = damping;
        const auto fp =
            solve_fixed_point(traffic, link, FadingModel::rayleigh(), cfg);
        CHECK(std::abs(fp.p_busy - ref.p_busy) < 10.0 * base.tol);
    }
}

TEST_CASE("vanishing arrivals collapse the fixed point") {
    LinkParams link = defaults();
    OfferedTraffic traffic;
    traffic.arrival_rate = 1e-9;
    const auto fp =
        solve_fixed_point(traffic, link, FadingModel::rayleigh(), SolverConfig{});
    CHECK(fp.p_busy < 1e-6);
    CHECK(fp.epsilon < 1e-6);
}

TEST_CASE("no unavailability reduces blocking to Erlang-B") {
    // A vanishing threshold with no noise gives zero outage for every
    // interferer count, the availability clamps and the chain is M/M/C/C.
    LinkParams link = defaults();
    link.noise_power = 0.0;
    link.sinr_threshold = 1e-100;
    OfferedTraffic traffic{8, 0.5, 0.1};  // 5 Erlang on 8 channels
    const auto fp =
        solve_fixed_point(traffic, link, FadingModel::rayleigh(), SolverConfig{});
    CHECK(fp.epsilon_clamped);
    CHECK(blocking_probability(fp.dist) ==
          doctest::Approx(erlang_b(8, 5.0)).epsilon(1e-4));
}

TEST_CASE("solver trace is recorded when asked") {
    SolverConfig cfg;
    cfg.keep_trace = true;
    const auto fp = solve_fixed_point(OfferedTraffic{}, defaults(),
                                      FadingModel::rayleigh(), cfg);
    CHECK(fp.trace.size() == static_cast<std::size_t>(fp.iterations));
    CHECK(fp.trace.front().iteration == 0);
    CHECK(fp.trace.back().residual < cfg.tol);
}

TEST_CASE("fixed-unavailability solve matches the chain directly") {
    OfferedTraffic traffic;
    const auto fp = solve_with_fixed_unavailability(traffic, 0.3);
    ChainParams chain{traffic.channels, traffic.arrival_rate,
                      traffic.holding_rate, 0.7 / 0.3, 1.0};
    const auto d = stationary_distribution(chain);
    CHECK(fp.p_busy == doctest::Approx(busy_probability(d)).epsilon(1e-12));
    CHECK(fp.epsilon == doctest::Approx(0.3));
}
