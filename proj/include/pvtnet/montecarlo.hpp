#pragma once

#include <array>
#include <cstdint>

#include "pvtnet/interference.hpp"
#include "pvtnet/markov.hpp"

namespace pvtnet {

struct MCConfig {
    long trials = 100000;
    std::uint64_t seed = 1;
    double disk_radius = 0.0;  // km; conditional interferer disk
    double window = 0.0;       // km; half-width of the simulation square
    double guard = 0.0;        // km; edge margin for degenerate realizations

    void validate_disk() const;
    void validate_window() const;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long trials = 0;
};

/// Counter-based stream (Philox 4x32-10). Each trial owns a stream keyed by
/// (seed, stream index), so estimates are bit-identical for a given seed no
/// matter how trials are scheduled across threads.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    double uniform01();     // in (0, 1]
    double exponential();   // unit mean
    double normal();        // standard
    double gamma(double shape);  // unit scale, shape >= 0.05
    /// Fading power sample for any of the five propagation scenarios.
    double fading(const FadingModel& model);

private:
    void refill();

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Inverse-CDF sample of the nearest-BS distance, r = sqrt(E / (pi lambda)).
double sample_nearest_distance(double bs_density, PhiloxStream& rng);

/// Conditional disk model: `delta` interferers uniform on the disk of radius
/// cfg.disk_radius around the user, serving distance from the nearest-BS
/// density, i.i.d. fading per link.
MCEstimate mc_outage_disk(double gamma0, int delta, const LinkParams& link,
                          const FadingModel& model, const MCConfig& cfg,
                          int threads = 0);

/// Unconditioned outage of the Poisson network: one realization per trial,
/// user at the origin, nearest BS serves, every other BS interferes.
MCEstimate mc_outage_pvt(double gamma0, const LinkParams& link,
                         const FadingModel& model, const MCConfig& cfg,
                         int threads = 0, long* resampled = nullptr);

/// Hexagonal-lattice baseline: user uniform in the central cell, serving BS
/// at the cell centre, interference from every lattice BS within `rings`.
MCEstimate mc_outage_grid(double gamma0, const LinkParams& link,
                          const FadingModel& model, const MCConfig& cfg,
                          int rings, int threads = 0);

/// Event-driven simulation of the (occupied, available) chain; blocking is
/// the fraction of arrivals finding every available channel occupied. The
/// first tenth of the horizon is discarded as warm-up; the standard error
/// comes from batch means over the remainder.
MCEstimate mc_chain_blocking(const ChainParams& chain, double horizon_minutes,
                             const MCConfig& cfg);

}  // namespace pvtnet
