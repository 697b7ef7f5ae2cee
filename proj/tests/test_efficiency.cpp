#include <doctest.h>

#include <cmath>

#include "pvtnet/efficiency.hpp"

using namespace pvtnet;

namespace {

// Counts direction violations larger than tol; returns the worst overshoot.
int monotone_violations(const std::vector<double>& v, bool increasing,
                        double tol) {
    int bad = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double step = increasing ? v[i] - v[i + 1] : v[i + 1] - v[i];
        if (step > tol) {
            ++bad;
        }
    }
    return bad;
}

int sign_changes_of_differences(const std::vector<double>& v) {
    int changes = 0;
    int prev = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double d = v[i + 1] - v[i];
        const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : prev);
        if (prev != 0 && s != prev) {
            ++changes;
        }
        prev = s;
    }
    return changes;
}

}  // namespace

TEST_CASE("step-function outage gives unit capacity") {
    // p_out = 0 up to gamma = 1, then 1: the rate integral is exactly 1.
    std::vector<double> grid;
    std::vector<double> row;
    for (double g = 1e-4; g < 1e4; g *= 1.2) {
        grid.push_back(g);
        row.push_back(g <= 1.0 ? 0.0 : 1.0);
    }
    OutageTable table(grid, {row});
    const double cap = link_capacity(0, table);
    CHECK(cap == doctest::Approx(1.0).epsilon(2e-2));  // PCHIP rounds the jump
}

TEST_CASE("certain outage gives zero capacity") {
    OutageTable table({0.5, 5.0, 50.0}, {{1.0, 1.0, 1.0}});
    CHECK(link_capacity(0, table) == doctest::Approx(0.0));
}

TEST_CASE("noise-only capacity against direct rate integration") {
    LinkParams link;
    const auto tr = InterferenceTransform::finite_disk(10.0);
    OutageTable table(link, FadingModel::rayleigh(), tr, default_gamma_grid(61),
                      0, QuadratureSpec{}, OutageEvaluator::RayleighReduction);
    double trunc = 0.0;
    const double cap = link_capacity(0, table, 1e-6, &trunc);
    const auto direct =
        integrate_adaptive(
            [&](double t) -> Complex {
                const double g = std::exp2(t) - 1.0;
                if (g <= 0.0) {
                    return {1.0, 0.0};
                }
                return {noise_only_success(g, link), 0.0};
            },
            0.0, trunc)
            .value.real();
    CHECK(cap == doctest::Approx(direct).epsilon(1e-3));
    CHECK(trunc > 5.0);
}

TEST_CASE("weighted capacity interpolates between the delta rows") {
    OutageTable table({0.5, 5.0, 50.0},
                      {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
    // p = 0: only the clean row; capacity is the table-wide rate span.
    const double clean = weighted_link_capacity(0.0, 1, table);
    CHECK(clean > 0.0);
    // p = 1: always one interferer, outage certain, zero capacity.
    CHECK(weighted_link_capacity(1.0, 1, table) == doctest::Approx(0.0));
    const double mid = weighted_link_capacity(0.5, 1, table);
    CHECK(mid == doctest::Approx(0.5 * clean).epsilon(1e-9));
}

TEST_CASE("throughput, SSE and energy arithmetic") {
    RadioEconomics econ;
    CHECK(cell_throughput(1.0, 2.0, 4.0, econ) == doctest::Approx(0.0));
    CHECK(cell_throughput(0.5, 2.0, 0.0, econ) == doctest::Approx(0.0));
    CHECK(cell_throughput(0.5, 2.0, 4.0, econ) == doctest::Approx(4e5));
    CHECK(spatial_spectrum_efficiency(0.0, 0.2) == doctest::Approx(0.0));
    CHECK(spatial_spectrum_efficiency(4e5, 0.2) == doctest::Approx(8e4));
    CHECK(spatial_spectrum_efficiency(4e5, 0.4) == doctest::Approx(1.6e5));

    CHECK(operation_energy(0.0, econ) == doctest::Approx(71.5 * 3.1536e7));
    RadioEconomics zero_life = econ;
    zero_life.lifetime = 1.0;
    CHECK(operation_energy(10.0, zero_life) ==
          doctest::Approx(7.84 * 10.0 + 71.5).epsilon(1e-12));

    // 85 GJ embodied, idle BS, 1 Mbit/s for a year.
    const double phi = energy_efficiency(1e6, econ, 0.0);
    CHECK(phi == doctest::Approx(3.1536e13 / (8.5e10 + 2.25482e9)).epsilon(1e-4));
    CHECK(energy_efficiency(2e6, econ, 0.0) == doctest::Approx(2.0 * phi));
    CHECK(energy_efficiency(0.0, econ, 3.0) == doctest::Approx(0.0));
}

TEST_CASE("efficiency trends over arrival rate, exponent and density") {
    LinkParams link;
    SolverConfig cfg;
    RadioEconomics econ;
    const FadingModel ray = FadingModel::rayleigh();
    const auto tr = InterferenceTransform::finite_disk(
        neighborhood_disk_radius(link.bs_density, cfg.n_max));
    OutageTable table(link, ray, tr, default_gamma_grid(41), cfg.n_max,
                      QuadratureSpec{}, OutageEvaluator::RayleighReduction);

    std::vector<double> sse;
    std::vector<double> ee;
    for (int i = 0; i < 25; ++i) {
        const double lam = 0.2 + (5.0 - 0.2) * i / 24.0;
        OfferedTraffic traffic{20, lam, 0.1};
        const auto fp = solve_fixed_point(traffic, link, ray, tr, cfg);
        const auto rep = evaluate_efficiency(
            fp, table, link, econ, CapacityWeighting::BusyBinomial, 1, cfg.n_max);
        sse.push_back(rep.sse);
        ee.push_back(rep.ee);
    }
    // One interior maximum: exactly one sign change in the differences,
    // and the peak is not at either end.
    CHECK(sign_changes_of_differences(sse) == 1);
    CHECK(sign_changes_of_differences(ee) == 1);
    CHECK(std::max_element(sse.begin(), sse.end()) != sse.begin());
    CHECK(std::max_element(sse.begin(), sse.end()) != sse.end() - 1);

    std::vector<double> sse_b;
    std::vector<double> ee_b;
    for (double b = 3.0; b <= 6.01; b += 0.5) {
        LinkParams lb = link;
        lb.path_loss_exponent = b;
        const auto trb = InterferenceTransform::finite_disk(
            neighborhood_disk_radius(lb.bs_density, cfg.n_max));
        OutageTable tb(lb, ray, trb, default_gamma_grid(41), cfg.n_max,
                       QuadratureSpec{}, OutageEvaluator::RayleighReduction);
        const auto fp = solve_fixed_point(OfferedTraffic{}, lb, ray, trb, cfg);
        const auto rep = evaluate_efficiency(
            fp, tb, lb, econ, CapacityWeighting::BusyBinomial, 1, cfg.n_max);
        sse_b.push_back(rep.sse);
        ee_b.push_back(rep.ee);
    }
    CHECK(monotone_violations(sse_b, true, 1e-3 * sse_b.back()) == 0);
    CHECK(monotone_violations(ee_b, true, 1e-3 * ee_b.back()) == 0);

    std::vector<double> ee_density;
    for (double lb = 0.2; lb <= 1.001; lb += 0.2) {
        LinkParams ld = link;
        ld.bs_density = lb;
        const auto trd = InterferenceTransform::finite_disk(
            neighborhood_disk_radius(lb, cfg.n_max));
        OutageTable td(ld, ray, trd, default_gamma_grid(41), cfg.n_max,
                       QuadratureSpec{}, OutageEvaluator::RayleighReduction);
        const auto fp = solve_fixed_point(OfferedTraffic{}, ld, ray, trd, cfg);
        const auto rep = evaluate_efficiency(
            fp, td, ld, econ, CapacityWeighting::BusyBinomial, 1, cfg.n_max);
        ee_density.push_back(rep.ee);
    }
    // Scale freedom keeps the per-cell energy efficiency flat in the BS
    // density; non-increasing within the acceptance tolerance.
    CHECK(monotone_violations(ee_density, false, 1e-3 * ee_density.front()) == 0);
}

TEST_CASE("economics validation") {
    RadioEconomics econ;
    econ.bandwidth = 0.0;
    CHECK_THROWS_AS(econ.validate(), std::invalid_argument);
    CHECK_THROWS_AS(cell_throughput(1.5, 1.0, 1.0, RadioEconomics{}),
                    std::invalid_argument);
}
