#pragma once

#include "pvtnet/coupling.hpp"

namespace pvtnet {

struct RadioEconomics {
    double bandwidth = 1e5;         // Hz
    double embodied_energy = 85e9;  // J, initial plus maintenance
    double channel_power = 1.0;     // W per occupied channel
    double power_slope = 7.84;      // dimensionless, scales the radiated power
    double power_offset = 71.5;     // W drawn regardless of load
    double lifetime = 31536000.0;   // s, one year

    void validate() const;
};

struct EfficiencyReport {
    double throughput = 0.0;      // bit/s
    double link_capacity = 0.0;   // bit/s/Hz
    double sse = 0.0;             // bit/s/km^2
    double ee = 0.0;              // bit/J
    double mean_occupancy = 0.0;  // channels
    double blocking = 0.0;
    double capacity_truncation = 0.0;  // upper limit of the rate integral
};

/// Ergodic link capacity E[log2(1 + SINR)] as the tail integral of the
/// success probability, truncated where success drops below tail_eps.
double link_capacity(int delta, const OutageTable& table, double tail_eps = 1e-6,
                     double* truncation = nullptr);

/// Capacity with the interferer count binomially weighted by the busy
/// probability, the same weights as the unavailability sum but including
/// the interference-free term.
double weighted_link_capacity(double p_busy, int n_max, const OutageTable& table,
                              double tail_eps = 1e-6, double* truncation = nullptr);

/// (1 - blocking) * bandwidth * capacity * mean occupied channels.
double cell_throughput(double blocking, double capacity, double mean_occupancy,
                       const RadioEconomics& econ);

double spatial_spectrum_efficiency(double throughput, double bs_density);

/// (h * P_chl * occupancy + k) * lifetime.
double operation_energy(double mean_occupancy, const RadioEconomics& econ);

/// Lifetime bits per joule: lifetime * throughput over embodied plus
/// operation energy.
double energy_efficiency(double throughput, const RadioEconomics& econ,
                         double mean_occupancy);

enum class CapacityWeighting { FixedDelta, BusyBinomial };

EfficiencyReport evaluate_efficiency(const FixedPointSolution& fp,
                                     const OutageTable& table,
                                     const LinkParams& link,
                                     const RadioEconomics& econ,
                                     CapacityWeighting weighting,
                                     int fixed_delta, int n_max);

}  // namespace pvtnet
