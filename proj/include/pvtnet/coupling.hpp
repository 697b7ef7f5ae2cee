#pragma once

#include <vector>

#include "pvtnet/interference.hpp"
#include "pvtnet/markov.hpp"

namespace pvtnet {

/// Traffic side of the chain; the channel-state rates come out of the solve.
/// The default holding rate corresponds to a ten-minute mean channel
/// occupancy, placing the default load where blocking actually moves.
struct OfferedTraffic {
    int channels = 20;
    double arrival_rate = 1.0;  // per minute
    double holding_rate = 0.1;  // per minute

    void validate() const;
};

struct SolverConfig {
    double tol = 1e-9;
    int max_iters = 400;
    double damping = 0.5;
    /// Binomial trials and truncation of the unavailability sum. The disk
    /// holding the potential interferers keeps the network's BS density,
    /// so its radius follows n_max unless a transform is supplied.
    int n_max = 24;
    int outage_cache_resolution = 41;
    bool keep_trace = false;
};

struct FixedPointIterate {
    int iteration;
    double p_busy;
    double epsilon;
    double residual;
};

struct FixedPointSolution {
    double epsilon;
    double p_busy;
    double alpha_beta_ratio;  // (1 - epsilon)/epsilon
    StateDistribution dist;
    int iterations;
    double residual;
    bool converged;
    bool epsilon_clamped;
    std::vector<FixedPointIterate> trace;
};

/// Memoized outage values over a log-spaced SINR grid for each interferer
/// count; lookups between nodes use monotone piecewise-cubic interpolation
/// and never leave [0, 1].
class OutageTable {
public:
    OutageTable(const LinkParams& link, const FadingModel& model,
                const InterferenceTransform& transform,
                std::vector<double> gamma_grid, int max_delta,
                const QuadratureSpec& spec = {},
                OutageEvaluator evaluator = OutageEvaluator::Contour);

    /// Table over externally supplied outage values, one row per interferer
    /// count (Monte Carlo estimates, for instance).
    OutageTable(std::vector<double> gamma_grid,
                std::vector<std::vector<double>> rows);

    double lookup(double gamma0, int delta) const;
    int max_delta() const noexcept { return static_cast<int>(rows_.size()) - 1; }
    double gamma_min() const { return gammas_.front(); }
    double gamma_max() const { return gammas_.back(); }
    const std::vector<double>& grid() const noexcept { return gammas_; }

private:
    std::vector<double> gammas_;
    std::vector<double> log_gammas_;
    std::vector<std::vector<double>> rows_;    // [delta][node]
    std::vector<std::vector<double>> slopes_;  // PCHIP slopes in log-gamma
};

/// Log-spaced SINR grid covering the capacity integral's range.
std::vector<double> default_gamma_grid(int resolution);

/// Unavailability at a given busy probability from cached per-delta outage
/// values, the binomial evaluated with n_max trials and truncation.
double unavailability_from_cache(double p_busy, const std::vector<double>& pout,
                                 int n_max);

/// Solves the mutual fixed point between the stationary distribution, the
/// channel-busy probability, the unavailability and the rate ratio. One
/// damped Picard sweep: eps from the binomially weighted cached outage,
/// alpha/beta = (1-eps)/eps, the product-form distribution, then the busy
/// probability. The transform defaults to the density-matched finite disk
/// holding n_max potential interferers.
FixedPointSolution solve_fixed_point(const OfferedTraffic& traffic,
                                     const LinkParams& link,
                                     const FadingModel& model,
                                     const SolverConfig& cfg = {},
                                     const QuadratureSpec& spec = {});

FixedPointSolution solve_fixed_point(const OfferedTraffic& traffic,
                                     const LinkParams& link,
                                     const FadingModel& model,
                                     const InterferenceTransform& transform,
                                     const SolverConfig& cfg,
                                     const QuadratureSpec& spec = {});

/// One full sweep of the map p -> p_new at the given busy probability,
/// using the same cached outage values as the solver. Exposed for the
/// bisection cross-check and the self-consistency tests.
double busy_probability_sweep(double p_busy, const OfferedTraffic& traffic,
                              const LinkParams& link, const FadingModel& model,
                              const InterferenceTransform& transform,
                              const SolverConfig& cfg,
                              const QuadratureSpec& spec = {});

/// Chain solution at a fixed, busy-independent unavailability; the coupling
/// collapses, so no iteration is involved. Used when an unconditioned outage
/// curve (the lattice Monte Carlo baseline) replaces the binomial mixture.
FixedPointSolution solve_with_fixed_unavailability(const OfferedTraffic& traffic,
                                                   double epsilon);

}  // namespace pvtnet
