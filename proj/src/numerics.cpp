#include "pvtnet/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace pvtnet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;

// Lanczos coefficients, g = 7, n = 9.
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double gamma_positive(double x) {
    // Valid for x >= 0.5.
    const double z = x - 1.0;
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) {
        acc += kLanczos[i] / (z + i);
    }
    const double t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

}  // namespace

double gamma_real(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("gamma_real: non-finite argument");
    }
    if (x <= 0.0 && x == std::floor(x)) {
        throw std::domain_error("gamma_real: pole at non-positive integer " +
                                std::to_string(x));
    }
    if (x >= 0.5) {
        return gamma_positive(x);
    }
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    return kPi / (std::sin(kPi * x) * gamma_positive(1.0 - x));
}

Complex complex_power(Complex z, double a) {
    if (z == Complex{0.0, 0.0}) {
        if (a <= 0.0) {
            throw std::domain_error("complex_power: 0 raised to a non-positive power");
        }
        return {0.0, 0.0};
    }
    const double mag = std::abs(z);
    const double arg = std::arg(z);  // in (-pi, pi]
    const double r = std::pow(mag, a);
    return {r * std::cos(a * arg), r * std::sin(a * arg)};
}

double erlang_b(int channels, double offered_load) {
    if (channels < 1) {
        throw std::invalid_argument("erlang_b: channels must be >= 1");
    }
    if (!(offered_load > 0.0)) {
        throw std::invalid_argument("erlang_b: offered load must be > 0");
    }
    double b = 1.0;
    for (int k = 1; k <= channels; ++k) {
        b = offered_load * b / (k + offered_load * b);
    }
    return b;
}

namespace detail {

namespace {
// Gauss-Kronrod 7/15 abscissae (positive half) and weights (QUADPACK).
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759,
                            0.864864423359769, 0.741531185599394,
                            0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979,
                            0.104790010322250, 0.140653259715525,
                            0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};
}  // namespace

std::pair<Complex, double> gauss_kronrod_15(const ComplexIntegrand& f, double lo,
                                            double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    Complex kronrod{0.0, 0.0};
    Complex gauss{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        Complex v;
        if (i == 7) {
            v = f(c);
            kronrod += kWgk[7] * v;
            gauss += kWg[3] * v;
            break;
        }
        const Complex va = f(c - h * kXgk[i]);
        const Complex vb = f(c + h * kXgk[i]);
        kronrod += kWgk[i] * (va + vb);
        if (i % 2 == 1) {
            gauss += kWg[i / 2] * (va + vb);
        }
    }
    kronrod *= h;
    gauss *= h;
    return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

namespace {

struct Panel {
    double lo, hi, err;
    Complex value;
    bool operator<(const Panel& other) const { return err < other.err; }
};

}  // namespace

QuadratureResult integrate_adaptive(const ComplexIntegrand& f, double lo, double hi,
                                    const QuadratureSpec& spec) {
    QuadratureResult res;
    if (lo == hi) {
        return res;
    }
    auto [v0, e0] = detail::gauss_kronrod_15(f, lo, hi);
    std::priority_queue<Panel> panels;
    panels.push({lo, hi, e0, v0});
    Complex total = v0;
    double total_err = e0;
    int n = 1;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) &&
           n < spec.max_subdivisions) {
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            // Interval no longer splittable in double precision.
            panels.push(worst);
            break;
        }
        auto [va, ea] = detail::gauss_kronrod_15(f, worst.lo, mid);
        auto [vb, eb] = detail::gauss_kronrod_15(f, mid, worst.hi);
        total += va + vb - worst.value;
        total_err += ea + eb - worst.err;
        panels.push({worst.lo, mid, ea, va});
        panels.push({mid, worst.hi, eb, vb});
        ++n;
    }
    res.value = total;
    res.error_estimate = total_err;
    res.subdivisions = n;
    res.converged =
        total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    if (!res.converged) {
        throw QuadratureError("integrate_adaptive: subdivision budget exhausted", res);
    }
    return res;
}

QuadratureResult integrate_semi_infinite(const ComplexIntegrand& f,
                                         const QuadratureSpec& spec) {
    const auto g = [&f](double u) -> Complex {
        const double om = 1.0 - u;
        const double x = u / om;
        return f(x) / (om * om);
    };
    // Keep clear of u = 1 where x overflows; the slice beyond maps to
    // x > 1e16 and caller integrands are required to have decayed there.
    QuadratureResult res = integrate_adaptive(g, 0.0, 1.0 - 1e-17, spec);
    res.substitution = "x=u/(1-u)";
    return res;
}

double sine_integral(double x) {
    if (x < 0.0) {
        return -sine_integral(-x);
    }
    if (x <= 20.0) {
        // Power series, alternating; safe in double up to x ~ 20.
        double term = x;
        double sum = x;
        for (int k = 1; k < 80; ++k) {
            const int n = 2 * k + 1;
            term *= -x * x / ((2.0 * k) * n);
            const double add = term / n;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum) + 1e-300) {
                break;
            }
        }
        return sum;
    }
    // Auxiliary asymptotics: Si = pi/2 - f cos - g sin.
    double f = 0.0, g = 0.0;
    double fterm = 1.0 / x, gterm = 1.0 / (x * x);
    double fprev = std::numeric_limits<double>::max();
    for (int k = 0; k < 12; ++k) {
        if (std::abs(fterm) > fprev) {
            break;  // asymptotic series started diverging
        }
        f += (k % 2 == 0 ? fterm : -fterm);
        g += (k % 2 == 0 ? gterm : -gterm);
        fprev = std::abs(fterm);
        fterm *= (2.0 * k + 1) * (2.0 * k + 2) / (x * x);
        gterm *= (2.0 * k + 2) * (2.0 * k + 3) / (x * x);
    }
    return 0.5 * kPi - f * std::cos(x) - g * std::sin(x);
}

double cosine_integral(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("cosine_integral: requires x > 0");
    }
    if (x <= 20.0) {
        // Ci = gamma + ln x - Cin, Cin from its power series.
        double cin = 0.0;
        double term = 1.0;
        for (int k = 1; k < 80; ++k) {
            term *= -x * x / ((2.0 * k - 1) * (2.0 * k));
            const double add = -term / (2.0 * k);
            cin += add;
            if (std::abs(add) < 1e-18 * (std::abs(cin) + 1.0)) {
                break;
            }
        }
        return kEulerGamma + std::log(x) - cin;
    }
    double f = 0.0, g = 0.0;
    double fterm = 1.0 / x, gterm = 1.0 / (x * x);
    double fprev = std::numeric_limits<double>::max();
    for (int k = 0; k < 12; ++k) {
        if (std::abs(fterm) > fprev) {
            break;
        }
        f += (k % 2 == 0 ? fterm : -fterm);
        g += (k % 2 == 0 ? gterm : -gterm);
        fprev = std::abs(fterm);
        fterm *= (2.0 * k + 1) * (2.0 * k + 2) / (x * x);
        gterm *= (2.0 * k + 2) * (2.0 * k + 3) / (x * x);
    }
    return f * std::sin(x) - g * std::cos(x);
}

Complex expint_n_imag(int n, double x) {
    if (n < 1) {
        throw std::invalid_argument("expint_n_imag: n must be >= 1");
    }
    if (!(x > 0.0)) {
        throw std::domain_error("expint_n_imag: requires x > 0");
    }
    // E1(i x) = -Ci(x) + i (Si(x) - pi/2).
    Complex e{-cosine_integral(x), sine_integral(x) - 0.5 * kPi};
    const Complex z{0.0, x};
    const Complex emz = std::exp(-z);
    for (int m = 1; m < n; ++m) {
        e = (emz - z * e) / static_cast<double>(m);
    }
    return e;
}

Complex oscillatory_power_tail(int n, double cutoff, double phase_rate) {
    if (cutoff <= 0.0) {
        throw std::invalid_argument("oscillatory_power_tail: cutoff must be > 0");
    }
    if (phase_rate == 0.0) {
        if (n < 2) {
            throw std::domain_error(
                "oscillatory_power_tail: divergent (n = 1 with zero phase rate)");
        }
        return {std::pow(cutoff, 1.0 - n) / (n - 1.0), 0.0};
    }
    const double q = std::abs(phase_rate);
    const Complex t =
        std::pow(cutoff, 1.0 - n) * expint_n_imag(n, q * cutoff);
    return phase_rate > 0.0 ? t : std::conj(t);
}

}  // namespace pvtnet
