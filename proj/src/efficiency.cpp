#include "pvtnet/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace pvtnet {

void RadioEconomics::validate() const {
    if (!(bandwidth > 0.0) || !(embodied_energy > 0.0) || !(channel_power > 0.0) ||
        !(power_slope > 0.0) || !(power_offset > 0.0) || !(lifetime > 0.0)) {
        throw std::invalid_argument("RadioEconomics: all fields must be positive");
    }
}

namespace {

// Tail integral of the success probability in rate units t = log2(1 + gamma).
double capacity_integral(const std::function<double(double)>& outage_of_gamma,
                         const OutageTable& table, double tail_eps,
                         double* truncation) {
    // Truncate where success drops below tail_eps, scanning the cached grid.
    double t_max = std::log2(1.0 + table.gamma_max());
    for (double g : table.grid()) {
        if (1.0 - outage_of_gamma(g) < tail_eps) {
            t_max = std::log2(1.0 + g);
            break;
        }
    }
    if (truncation != nullptr) {
        *truncation = t_max;
    }
    if (t_max <= 0.0) {
        return 0.0;
    }
    const auto f = [&](double t) -> Complex {
        const double gamma = std::exp2(t) - 1.0;
        if (gamma <= 0.0) {
            return {1.0, 0.0};
        }
        return {1.0 - outage_of_gamma(gamma), 0.0};
    };
    QuadratureSpec spec;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-9;
    return integrate_adaptive(f, 0.0, t_max, spec).value.real();
}

}  // namespace

double link_capacity(int delta, const OutageTable& table, double tail_eps,
                     double* truncation) {
    if (delta < 0 || delta > table.max_delta()) {
        throw std::out_of_range("link_capacity: delta outside the cached table");
    }
    return capacity_integral(
        [&](double g) { return table.lookup(g, delta); }, table, tail_eps,
        truncation);
}

double weighted_link_capacity(double p_busy, int n_max, const OutageTable& table,
                              double tail_eps, double* truncation) {
    if (!(p_busy >= 0.0 && p_busy <= 1.0)) {
        throw std::invalid_argument("weighted_link_capacity: p outside [0,1]");
    }
    if (n_max > table.max_delta()) {
        throw std::out_of_range("weighted_link_capacity: table too small");
    }
    std::vector<double> w(n_max + 1, 0.0);
    if (p_busy >= 1.0) {
        w[n_max] = 1.0;
    } else {
        w[0] = std::pow(1.0 - p_busy, n_max);
        const double ratio = p_busy / (1.0 - p_busy);
        for (int d = 1; d <= n_max; ++d) {
            w[d] = w[d - 1] * ratio * (n_max - d + 1) / d;
        }
    }
    const auto weighted_outage = [&](double g) {
        double acc = 0.0;
        for (int d = 0; d <= n_max; ++d) {
            if (w[d] > 1e-16) {
                acc += w[d] * table.lookup(g, d);
            }
        }
        return acc;
    };
    return capacity_integral(weighted_outage, table, tail_eps, truncation);
}

double cell_throughput(double blocking, double capacity, double mean_occupancy,
                       const RadioEconomics& econ) {
    econ.validate();
    if (!(blocking >= 0.0 && blocking <= 1.0)) {
        throw std::invalid_argument("cell_throughput: blocking outside [0,1]");
    }
    return (1.0 - blocking) * econ.bandwidth * capacity * mean_occupancy;
}

double spatial_spectrum_efficiency(double throughput, double bs_density) {
    return bs_density * throughput;
}

double operation_energy(double mean_occupancy, const RadioEconomics& econ) {
    return (econ.power_slope * econ.channel_power * mean_occupancy +
            econ.power_offset) *
           econ.lifetime;
}

double energy_efficiency(double throughput, const RadioEconomics& econ,
                         double mean_occupancy) {
    const double denom =
        econ.embodied_energy + operation_energy(mean_occupancy, econ);
    if (!(denom > 0.0)) {
        throw std::domain_error("energy_efficiency: zero lifetime energy");
    }
    return econ.lifetime * throughput / denom;
}

EfficiencyReport evaluate_efficiency(const FixedPointSolution& fp,
                                     const OutageTable& table,
                                     const LinkParams& link,
                                     const RadioEconomics& econ,
                                     CapacityWeighting weighting,
                                     int fixed_delta, int n_max) {
    EfficiencyReport report;
    report.blocking = blocking_probability(fp.dist);
    report.mean_occupancy = mean_occupancy(fp.dist);
    if (weighting == CapacityWeighting::FixedDelta) {
        report.link_capacity =
            link_capacity(fixed_delta, table, 1e-6, &report.capacity_truncation);
    } else {
        report.link_capacity = weighted_link_capacity(
            fp.p_busy, n_max, table, 1e-6, &report.capacity_truncation);
    }
    report.throughput = cell_throughput(report.blocking, report.link_capacity,
                                        report.mean_occupancy, econ);
    report.sse = spatial_spectrum_efficiency(report.throughput, link.bs_density);
    report.ee = energy_efficiency(report.throughput, econ, report.mean_occupancy);
    return report;
}

}  // namespace pvtnet
