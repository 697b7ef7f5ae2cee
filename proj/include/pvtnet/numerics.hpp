#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace pvtnet {

using Complex = std::complex<double>;

/// Tolerances and budget for the adaptive quadrature routines.
struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    int max_subdivisions = 2000;
    /// Hard cap on how far an infinite-range integral may be followed
    /// before the closed-form tail takes over (integration-variable units).
    double truncation_radius = 1e16;
};

struct QuadratureResult {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
    int subdivisions = 0;
    bool converged = true;
    /// Radius at which an infinite tail was cut, 0 if the range was finite.
    double truncation_radius = 0.0;
    /// Variable substitution applied, empty if none.
    std::string substitution;
};

/// Thrown when the subdivision budget runs out; carries the best estimate.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, QuadratureResult best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const QuadratureResult& best() const noexcept { return best_; }

private:
    QuadratureResult best_;
};

/// Real Gamma function, Lanczos g=7 with reflection for x < 0.5.
/// Throws std::domain_error at the poles (x = 0, -1, -2, ...).
double gamma_real(double x);

/// Principal-branch z^a, Arg z in (-pi, pi].
/// Throws std::domain_error for z = 0 with a <= 0.
Complex complex_power(Complex z, double a);

/// Erlang-B blocking via the stable recursion B(0)=1,
/// B(k) = a B(k-1) / (k + a B(k-1)).
double erlang_b(int channels, double offered_load);

using ComplexIntegrand = std::function<Complex(double)>;

/// Adaptive Gauss-Kronrod 7/15 over [lo, hi]. Converged when the summed
/// panel error is below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_adaptive(const ComplexIntegrand& f, double lo, double hi,
                                    const QuadratureSpec& spec = {});

/// Integral over [0, inf) via the substitution x = u / (1 - u).
QuadratureResult integrate_semi_infinite(const ComplexIntegrand& f,
                                         const QuadratureSpec& spec = {});

/// Si(x) = int_0^x sin t / t dt, for x >= 0.
double sine_integral(double x);

/// Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt, for x > 0.
double cosine_integral(double x);

/// Exponential integral E_n(z) = int_1^inf exp(-z t) t^-n dt on the
/// imaginary axis, z = i x with x > 0, n >= 1.
Complex expint_n_imag(int n, double x);

/// Oscillatory power tail T_n(W, q) = int_W^inf exp(-i q v) v^-n dv.
/// q may be negative (conjugate) or zero (then n >= 2 is required).
Complex oscillatory_power_tail(int n, double cutoff, double phase_rate);

namespace detail {
/// One non-adaptive Gauss-Kronrod 7/15 pass over [lo, hi];
/// returns (value, |K15 - G7|).
std::pair<Complex, double> gauss_kronrod_15(const ComplexIntegrand& f, double lo,
                                            double hi);
}  // namespace detail

}  // namespace pvtnet
