#pragma once

#include <cmath>

#include "pvtnet/numerics.hpp"

namespace pvtnet {

/// Propagation scenarios. Scenarios 3-5 (Nakagami, log-normal and their
/// composite) are sampled by the Monte Carlo module only; the closed-form
/// paths support None and Rayleigh.
struct FadingModel {
    enum class Kind { None, Rayleigh, NakagamiM, LogNormal, NakagamiLogNormal };

    Kind kind = Kind::Rayleigh;
    double nakagami_m = 1.0;       // Gamma shape, mean kept at 1
    double shadowing_sigma = 1.0;  // exp(2 sigma G), G standard normal

    static FadingModel none() { return {Kind::None, 1.0, 1.0}; }
    static FadingModel rayleigh() { return {Kind::Rayleigh, 1.0, 1.0}; }
    static FadingModel nakagami(double m) { return {Kind::NakagamiM, m, 1.0}; }
    static FadingModel lognormal(double sigma) { return {Kind::LogNormal, 1.0, sigma}; }
    static FadingModel nakagami_lognormal(double m, double sigma) {
        return {Kind::NakagamiLogNormal, m, sigma};
    }

    bool has_closed_form() const {
        return kind == Kind::None || kind == Kind::Rayleigh;
    }
    void validate() const;
};

/// Radio-link parameters, all linear units (dB conversions happen at the CLI).
struct LinkParams {
    double bs_density = 0.2;          // BSs per km^2
    double path_loss_exponent = 4.0;  // must exceed 2 for the closed forms
    double gain_power = 1425.61;      // antenna gain times transmit power
    double noise_power = 1e-3;        // watts
    double sinr_threshold = 10.0;     // linear gamma_0 used by the coupled solve

    void validate() const;
};

/// Selects the aggregate-interference transform behind the outage integral.
struct InterferenceTransform {
    enum class Kind {
        /// Infinite-plane limit exactly as derived in the source model.
        /// Not a proper probability transform (it vanishes at 0 instead of
        /// being 1); retained so the gap against the disk model can be
        /// measured and reported rather than hidden.
        PaperLimit,
        /// Conditional disk model at finite radius with i.i.d. fading per
        /// interferer; this is what the Monte Carlo disk oracle samples.
        FiniteDisk,
    };

    Kind kind = Kind::FiniteDisk;
    double disk_radius = 0.0;  // km, used by FiniteDisk

    static InterferenceTransform paper_limit() { return {Kind::PaperLimit, 0.0}; }
    static InterferenceTransform finite_disk(double radius_km) {
        return {Kind::FiniteDisk, radius_km};
    }
};

/// Disk radius used by the Monte Carlo oracle comparisons.
inline double oracle_disk_radius(double bs_density) {
    return 50.0 / std::sqrt(bs_density);
}

/// Disk radius holding n potential interferers at the network's BS density,
/// i.e. the finite-area model whose node density stays at bs_density.
inline double neighborhood_disk_radius(double bs_density, int n_interferers) {
    constexpr double kPi = 3.14159265358979323846;
    return std::sqrt(n_interferers / (kPi * bs_density));
}

/// Picks the integration route for the outage double integral.
enum class OutageEvaluator {
    /// Parseval contour integral (inner s-line, outer serving distance).
    Contour,
    /// For Rayleigh desired fading the inner integral collapses to the
    /// interference transform at a real argument; same value, much cheaper.
    RayleighReduction,
};

struct OutageEvaluation {
    double outage = 0.0;          // clamped to [0, 1]
    double raw_real = 0.0;        // pre-clamp value
    double clamp_excursion = 0.0; // distance outside [0, 1] before clamping
    double imag_residual = 0.0;   // zero by the conjugate-symmetry reduction
    double quadrature_error = 0.0;
    double truncation_radius = 0.0;  // inner-integral cutoff
};

Complex laplace_noise(Complex s, double noise_power);

/// Laplace transform of the fading power. Throws for scenarios without one.
Complex laplace_fading(Complex s, const FadingModel& model);

/// E[S^(2 delta / b)]. Rayleigh: Gamma(1 + 2 delta / b); None: 1.
double fading_fractional_moment(const FadingModel& model, int delta, double b);

/// Infinite-plane-limit aggregate transform,
/// ((1/b) (s K')^(2/b) Gamma(-2/b))^delta * E[S^(2 delta/b)].
Complex laplace_interference(Complex s, int delta, const LinkParams& link,
                             const FadingModel& model);

/// Per-interferer transform of the finite-disk model,
/// int_0^a (2 d / a^2) L_S(z d^-b) dd, principal branch, z off (-inf, 0).
Complex disk_interferer_transform(Complex z, double disk_radius, double b,
                                  const FadingModel& model,
                                  const QuadratureSpec& spec = {});

/// Conditional outage probability with exactly `delta` interferers.
OutageEvaluation evaluate_outage(double gamma0, int delta, const LinkParams& link,
                                 const FadingModel& model,
                                 const InterferenceTransform& transform,
                                 const QuadratureSpec& spec = {},
                                 OutageEvaluator evaluator = OutageEvaluator::Contour);

/// Clamped outage value; enforces the excursion limit for probability-valid
/// transforms (throws std::runtime_error beyond 1e-3 pre-clamp excursion).
double outage_probability(double gamma0, int delta, const LinkParams& link,
                          const FadingModel& model,
                          const InterferenceTransform& transform,
                          const QuadratureSpec& spec = {},
                          OutageEvaluator evaluator = OutageEvaluator::Contour);

double success_probability(double gamma0, int delta, const LinkParams& link,
                           const FadingModel& model,
                           const InterferenceTransform& transform,
                           const QuadratureSpec& spec = {},
                           OutageEvaluator evaluator = OutageEvaluator::Contour);

/// Channel unavailability: binomially weighted outage over delta = 1..n_max
/// interferers each active with probability p_busy. The delta = 0 term is
/// excluded; a channel with no interferers is never unavailable.
double unavailable_probability(double p_busy, const LinkParams& link,
                               const FadingModel& model,
                               const InterferenceTransform& transform,
                               const QuadratureSpec& spec, int n_max);

/// Success probability of the noise-only link (delta = 0, Rayleigh desired
/// fading): int 2 pi l r exp(-pi l r^2) exp(-gamma0 sigma^2 r^b / K') dr.
/// One-dimensional reduction used as an independent check of the contour.
double noise_only_success(double gamma0, const LinkParams& link,
                          const QuadratureSpec& spec = {});

}  // namespace pvtnet
