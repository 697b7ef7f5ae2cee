#include "pvtnet/interference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pvtnet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr Complex kJ{0.0, 1.0};

}  // namespace

void FadingModel::validate() const {
    if ((kind == Kind::NakagamiM || kind == Kind::NakagamiLogNormal) &&
        !(nakagami_m >= 0.5)) {
        throw std::invalid_argument("FadingModel: Nakagami shape must be >= 0.5");
    }
    if ((kind == Kind::LogNormal || kind == Kind::NakagamiLogNormal) &&
        !(shadowing_sigma > 0.0)) {
        throw std::invalid_argument("FadingModel: shadowing sigma must be > 0");
    }
}

void LinkParams::validate() const {
    if (!(bs_density > 0.0)) {
        throw std::invalid_argument("LinkParams: bs_density must be > 0");
    }
    if (!(path_loss_exponent > 2.0)) {
        throw std::invalid_argument(
            "LinkParams: path_loss_exponent must exceed 2 (the closed-form "
            "interference transform has a Gamma(-2/b) pole at b = 2)");
    }
    if (!(gain_power > 0.0)) {
        throw std::invalid_argument("LinkParams: gain_power must be > 0");
    }
    if (!(noise_power >= 0.0)) {
        throw std::invalid_argument("LinkParams: noise_power must be >= 0");
    }
    if (!(sinr_threshold > 0.0)) {
        throw std::invalid_argument("LinkParams: sinr_threshold must be > 0");
    }
}

Complex laplace_noise(Complex s, double noise_power) {
    return std::exp(-noise_power * s);
}

Complex laplace_fading(Complex s, const FadingModel& model) {
    switch (model.kind) {
        case FadingModel::Kind::None:
            return std::exp(-s);
        case FadingModel::Kind::Rayleigh:
            if (s == Complex{-1.0, 0.0}) {
                throw std::domain_error("laplace_fading: pole at s = -1");
            }
            return 1.0 / (1.0 + s);
        default:
            throw std::invalid_argument(
                "laplace_fading: no closed-form transform for this scenario "
                "(Monte Carlo only)");
    }
}

double fading_fractional_moment(const FadingModel& model, int delta, double b) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("fading_fractional_moment: b must be > 0");
    }
    if (delta < 0) {
        throw std::invalid_argument("fading_fractional_moment: delta must be >= 0");
    }
    switch (model.kind) {
        case FadingModel::Kind::None:
            return 1.0;
        case FadingModel::Kind::Rayleigh:
            return gamma_real(1.0 + 2.0 * delta / b);
        default:
            throw std::invalid_argument(
                "fading_fractional_moment: no closed form for this scenario");
    }
}

Complex laplace_interference(Complex s, int delta, const LinkParams& link,
                             const FadingModel& model) {
    link.validate();
    if (delta < 0) {
        throw std::invalid_argument("laplace_interference: delta must be >= 0");
    }
    if (delta == 0) {
        return {1.0, 0.0};
    }
    if (s == Complex{0.0, 0.0}) {
        throw std::domain_error(
            "laplace_interference: s must be nonzero for delta > 0");
    }
    const double b = link.path_loss_exponent;
    const Complex per =
        complex_power(s * link.gain_power, 2.0 / b) * (gamma_real(-2.0 / b) / b);
    Complex acc{1.0, 0.0};
    for (int i = 0; i < delta; ++i) {
        acc *= per;
    }
    return acc * fading_fractional_moment(model, delta, b);
}

// ---------------------------------------------------------------------------
// int_{t0}^inf t^alpha exp(-z t) dt, Re z >= 0, z != 0. Closed-form power
// panels while exp(-z t) is flat, Gauss-Kronrod through the transition band,
// integration-by-parts series beyond |z| t >> 1.
// ---------------------------------------------------------------------------

namespace {

struct ValueErr {
    Complex value{0.0, 0.0};
    double err = 0.0;
};

ValueErr power_exp_ibp_tail(double alpha, double t0, Complex z) {
    // term_0 = t0^alpha / z, term_{i+1} = term_i (alpha - i) / (z t0).
    ValueErr out;
    Complex term = std::pow(t0, alpha) / z;
    Complex sum{0.0, 0.0};
    double last = std::abs(term);
    for (int i = 0; i < 12; ++i) {
        sum += term;
        term *= (alpha - i) / (z * t0);
        const double mag = std::abs(term);
        if (mag >= last) {
            break;  // asymptotic series turned
        }
        last = mag;
        if (mag < 1e-18 * std::abs(sum) + 1e-300) {
            break;
        }
    }
    const Complex damp = std::exp(-z * t0);
    out.value = damp * sum;
    out.err = std::abs(damp) * last * 2.0;
    return out;
}

ValueErr power_exp_integral(double alpha, double t_lo, Complex z,
                            const QuadratureSpec& spec) {
    ValueErr out;
    const double zmag = std::abs(z);
    const double ibp_start = 14.0 + 2.0 * std::abs(alpha);
    if (zmag * t_lo >= ibp_start) {
        return power_exp_ibp_tail(alpha, t_lo, z);
    }
    const double t_ibp = ibp_start / zmag;
    double t = t_lo;
    // Closed-form panels with a quadratic exp correction while |z| t is tiny.
    while (t * zmag < 1e-3 && t < t_ibp) {
        const double hi = std::min({t * 2.0, t_ibp, 1e-3 / zmag});
        auto moment = [&](double extra) -> double {
            const double p = alpha + extra;
            if (std::abs(p + 1.0) < 1e-12) {
                return std::log(hi / t);
            }
            return (std::pow(hi, p + 1.0) - std::pow(t, p + 1.0)) / (p + 1.0);
        };
        // exp(-z t) = 1 - z t + z^2 t^2/2 + O((z t)^3)
        out.value += moment(0.0) - z * moment(1.0) + 0.5 * z * z * moment(2.0);
        out.err += std::pow(zmag * hi, 3.0) * std::abs(moment(0.0));
        t = hi;
    }
    // Doubling panels with adaptive quadrature up to the IBP handover.
    QuadratureSpec panel_spec = spec;
    panel_spec.abs_tol = spec.abs_tol / 32.0;
    while (t < t_ibp) {
        const double hi = std::min(t * 2.0, t_ibp);
        const auto f = [&](double x) -> Complex {
            return std::pow(x, alpha) * std::exp(-z * x);
        };
        QuadratureResult r = integrate_adaptive(f, t, hi, panel_spec);
        out.value += r.value;
        out.err += r.error_estimate;
        t = hi;
    }
    ValueErr tail = power_exp_ibp_tail(alpha, t_ibp, z);
    out.value += tail.value;
    out.err += tail.err;
    return out;
}

}  // namespace

Complex disk_interferer_transform(Complex z, double disk_radius, double b,
                                  const FadingModel& model,
                                  const QuadratureSpec& spec) {
    if (!(disk_radius > 0.0)) {
        throw std::invalid_argument("disk_interferer_transform: radius must be > 0");
    }
    if (!(b > 0.0)) {
        throw std::invalid_argument("disk_interferer_transform: b must be > 0");
    }
    if (z == Complex{0.0, 0.0}) {
        return {1.0, 0.0};
    }
    const double a = disk_radius;
    if (model.kind == FadingModel::Kind::Rayleigh) {
        // int_0^a (2 d / a^2) / (1 + z d^-b) dd, smooth once split at the
        // transition distance |z|^(1/b).
        const auto f = [&](double d) -> Complex {
            const double att = std::pow(d, -b);
            return (2.0 * d / (a * a)) / (1.0 + z * att);
        };
        const double dstar = std::min(std::pow(std::abs(z), 1.0 / b), a);
        QuadratureSpec half = spec;
        half.abs_tol = spec.abs_tol / 2.0;
        Complex total{0.0, 0.0};
        if (dstar > 0.0 && dstar < a) {
            total = integrate_adaptive(f, 0.0, dstar, half).value +
                    integrate_adaptive(f, dstar, a, half).value;
        } else {
            total = integrate_adaptive(f, 0.0, a, spec).value;
        }
        return total;
    }
    if (model.kind == FadingModel::Kind::None) {
        // Substituting t = d^-b maps the wildly oscillatory d -> 0 endpoint
        // to a tame power-law tail:
        // chi(z) = (2/(b a^2)) int_{a^-b}^inf t^(-2/b - 1) exp(-z t) dt.
        ValueErr r = power_exp_integral(-2.0 / b - 1.0, std::pow(a, -b), z, spec);
        return (2.0 / (b * a * a)) * r.value;
    }
    throw std::invalid_argument(
        "disk_interferer_transform: no closed form for this scenario");
}

// ---------------------------------------------------------------------------
// Inner contour integral machinery.
//
// For a serving distance r the conditional success probability is
//   (1/pi) Re int_0^inf E[e^{-j v T}] (E[e^{j v c S}] - 1) / (j v) dv
// with T = noise + interference, S the desired fading and c = K'/(gamma0 r^b)
// the decoding window. Conjugate symmetry of the two-sided integral is folded
// in analytically (real part, doubled), which is also why the imaginary
// residual diagnostic is identically zero on this path.
//
// Rayleigh desired fading collapses the window kernel exactly:
//   (E[e^{j v c S}] - 1)/(j v) = c / (1 - j v c).
// In window units w = v c the integral reads
//   (1/pi) Re int_0^inf e^{-j w q} L_I(j w / c) / (1 - j w) dw,  q = sigma^2/c,
// and for delta >= 1 it is evaluated as a deviation from the delta = 0 value,
// in interference units y where the per-interferer transform chi lives:
//   I = I0 + (1/pi) Re int_0^inf e^{-j Q y} (chi^delta(jy) - 1)/(s_z - j y) dy,
// I0 = e^{-q} (the half point 1/2 when q = 0), Q = sigma^2 / (gamma0 r^b),
// s_z = (gamma0 r^b)^2 / K'. Quadrature covers the structured band; the tails
// are closed forms, either from the small-argument expansion of chi under a
// fast noise phase or from its large-argument decay.
// ---------------------------------------------------------------------------

namespace {

struct TailTerm {
    Complex coeff{0.0, 0.0};
    double power = 1.0;       // w^-power
    double phase_rate = 0.0;  // e^{-j q w}
};

// Closed-form value of sum_k int_W^inf coeff_k e^{-j q_k w} w^-p_k dw,
// real-part semantics: a divergent 1/w term with a purely imaginary
// coefficient and no phase contributes nothing to the real part.
ValueErr eval_tails(const std::vector<TailTerm>& terms, double cutoff,
                    const QuadratureSpec& spec) {
    ValueErr out;
    for (const auto& t : terms) {
        const double lead_mag = std::abs(t.coeff) * std::pow(cutoff, 1.0 - t.power);
        if (!(lead_mag > 1e-300)) {
            continue;
        }
        const double n_round = std::round(t.power);
        const bool integer_power =
            std::abs(t.power - n_round) < 1e-9 && n_round >= 1.0;
        if (t.phase_rate == 0.0 && t.power <= 1.0 + 1e-9) {
            if (std::abs(t.coeff.real()) < 1e-14 * std::abs(t.coeff) + 1e-300 &&
                integer_power) {
                continue;  // purely imaginary log divergence, Re part is zero
            }
            throw QuadratureError("contour tail diverges at zero phase rate",
                                  QuadratureResult{});
        }
        if (integer_power) {
            out.value += t.coeff * oscillatory_power_tail(
                                       static_cast<int>(n_round), cutoff,
                                       t.phase_rate);
            continue;
        }
        if (t.phase_rate == 0.0) {
            out.value +=
                t.coeff * std::pow(cutoff, 1.0 - t.power) / (t.power - 1.0);
            continue;
        }
        const double q = std::abs(t.phase_rate);
        ValueErr r = power_exp_integral(-t.power, cutoff, Complex{0.0, q}, spec);
        if (t.phase_rate > 0.0) {
            out.value += t.coeff * r.value;
        } else {
            out.value += t.coeff * std::conj(r.value);
        }
        out.err += std::abs(t.coeff) * r.err;
    }
    return out;
}

// Adaptive doubling panels over [lo0, cutoff], widths capped so that no panel
// holds more than a few hundred phase oscillations.
struct HalfLine {
    Complex value{0.0, 0.0};
    double err = 0.0;
};

HalfLine integrate_panels(const ComplexIntegrand& f, double lo0, double first_width,
                          double cutoff, double max_phase_rate,
                          const QuadratureSpec& spec) {
    HalfLine out;
    const double width_cap =
        max_phase_rate > 0.0 ? 1500.0 / max_phase_rate
                             : std::numeric_limits<double>::infinity();
    double est_span = std::max(2.0, cutoff / std::max(first_width, 1e-300));
    int n_panels_est = 2 + static_cast<int>(std::ceil(std::log2(est_span)));
    if (std::isfinite(width_cap)) {
        n_panels_est += static_cast<int>(cutoff / width_cap) + 1;
    }
    QuadratureSpec panel_spec = spec;
    panel_spec.abs_tol = spec.abs_tol / (2.0 * n_panels_est);
    double lo = lo0;
    double hi = std::min(lo0 + std::min(first_width, width_cap), cutoff);
    while (lo < cutoff) {
        QuadratureResult r = integrate_adaptive(f, lo, hi, panel_spec);
        out.value += r.value;
        out.err += r.error_estimate;
        lo = hi;
        hi = std::min(lo + std::min(lo, width_cap), cutoff);
    }
    return out;
}

struct InnerContext {
    int delta = 0;
    double b = 4.0;
    double gain_power = 1.0;
    double noise_power = 0.0;
    double gamma0 = 1.0;
    InterferenceTransform transform;
    FadingModel model;
    QuadratureSpec spec;
};

Complex chi_power(const Complex& chi, int delta) {
    Complex acc{1.0, 0.0};
    for (int i = 0; i < delta; ++i) {
        acc *= chi;
    }
    return acc;
}

// Delta = 0 Rayleigh contour in window units; equals e^{-q} analytically.
ValueErr rayleigh_noise_only_contour(double q, const InnerContext& ctx,
                                     double* w_used) {
    const double cutoff = 200.0;
    const auto f = [q](double w) -> Complex {
        return std::exp(Complex{0.0, -w * q}) / (1.0 - kJ * w);
    };
    HalfLine body = integrate_panels(f, 0.0, 0.25, cutoff, q, ctx.spec);
    std::vector<TailTerm> tails;
    Complex ck{1.0, 0.0};
    for (int k = 1; k <= 6; ++k) {
        ck *= Complex{0.0, -1.0};
        tails.push_back({-ck, static_cast<double>(k), q});
    }
    ValueErr tail = eval_tails(tails, cutoff, ctx.spec);
    if (w_used != nullptr) {
        *w_used = std::max(*w_used, cutoff);
    }
    ValueErr out;
    out.value = {(body.value + tail.value).real() / kPi, 0.0};
    out.err = (body.err + tail.err + std::pow(cutoff, -6.0)) / kPi;
    return out;
}

// Real-argument per-interferer transform (Rayleigh interferer fading).
double chi_real(double theta0, double disk_radius, double b, const FadingModel& m,
                const QuadratureSpec& spec) {
    return disk_interferer_transform(Complex{theta0, 0.0}, disk_radius, b, m, spec)
        .real();
}

// Success probability at serving distance r, Rayleigh desired fading.
// `budget` is the absolute error this evaluation may spend.
ValueErr rayleigh_inner_contour(double r, const InnerContext& ctx, double budget,
                                double* w_used, long* reduction_fallbacks) {
    const double theta0 = ctx.gamma0 * std::pow(r, ctx.b);
    const double c = ctx.gain_power / theta0;
    const double q = ctx.noise_power / c;
    if (ctx.delta == 0 && ctx.noise_power == 0.0) {
        return {{1.0, 0.0}, 0.0};
    }
    const double noise_ub = q > 745.0 ? 0.0 : std::exp(-q);
    if (noise_ub < budget / 4.0) {
        // The whole value is bounded by P(S > q); report the midpoint.
        return {{0.5 * noise_ub, 0.0}, 0.5 * noise_ub};
    }
    if (ctx.delta == 0) {
        return rayleigh_noise_only_contour(q, ctx, w_used);
    }
    if (ctx.transform.kind == InterferenceTransform::Kind::FiniteDisk) {
        // Deep-outage bound: chi(theta0) <= 2 a^b / ((b+2) theta0).
        const double chi_ub = std::min(
            1.0, 2.0 * std::pow(ctx.transform.disk_radius, ctx.b) /
                     ((ctx.b + 2.0) * theta0));
        const double value_ub = noise_ub * std::pow(chi_ub, ctx.delta);
        if (value_ub < budget / 4.0) {
            return {{0.5 * value_ub, 0.0}, 0.5 * value_ub};
        }
    }

    if (ctx.transform.kind == InterferenceTransform::Kind::PaperLimit) {
        // Window units; the power-law transform is its own asymptote.
        // L_I(j nu) at nu = w/c has argument (j w theta0)^(2/b) per interferer.
        const double kappa = 2.0 * ctx.delta / ctx.b;
        if (q == 0.0) {
            throw QuadratureError(
                "PaperLimit contour integral is divergent without noise",
                QuadratureResult{});
        }
        const double moment = fading_fractional_moment(ctx.model, ctx.delta, ctx.b);
        double per = gamma_real(-2.0 / ctx.b) / ctx.b;
        Complex pcoeff{1.0, 0.0};
        for (int i = 0; i < ctx.delta; ++i) {
            pcoeff *= per;
        }
        pcoeff *= moment;
        const Complex zeta_unit = complex_power(kJ * theta0, kappa);
        const auto f = [=](double w) -> Complex {
            if (w == 0.0) {
                return {0.0, 0.0};
            }
            return std::exp(Complex{0.0, -w * q}) / (1.0 - kJ * w) * pcoeff *
                   zeta_unit * std::pow(w, kappa);
        };
        double cutoff = std::min(std::max(200.0, 30.0 * (kappa + 8.0) / q),
                                 ctx.spec.truncation_radius);
        HalfLine body = integrate_panels(f, 0.0, 0.25, cutoff, q, ctx.spec);
        std::vector<TailTerm> tails;
        Complex ck{1.0, 0.0};
        for (int k = 1; k <= 3; ++k) {
            ck *= Complex{0.0, -1.0};
            tails.push_back({-ck * pcoeff * zeta_unit,
                             static_cast<double>(k) - kappa, q});
        }
        ValueErr tail = eval_tails(tails, cutoff, ctx.spec);
        if (w_used != nullptr) {
            *w_used = std::max(*w_used, cutoff);
        }
        ValueErr out;
        out.value = {(body.value + tail.value).real() / kPi, 0.0};
        out.err = (body.err + tail.err +
                   std::abs(pcoeff) * std::pow(cutoff, kappa - 4.0) / (4.0 - kappa)) /
                  kPi;
        return out;
    }

    // FiniteDisk, deviation from the noise-only value in chi units
    // (y = w theta0; per-interferer argument is j y, kernel 1/(theta0 - j y),
    // noise phase rate sigma^2 / K').
    const double a = ctx.transform.disk_radius;
    const double b = ctx.b;
    const double k_s = theta0;
    const double Q = ctx.noise_power / ctx.gain_power;
    const int delta = ctx.delta;
    const double I0 = q > 0.0 ? std::exp(-q) : 0.5;
    const double a2 = a * a;
    const double ab = std::pow(a, b);
    const double moment1 = fading_fractional_moment(ctx.model, 1, b);
    const double J1 = gamma_real(1.0 - 2.0 / b) * moment1;

    QuadratureSpec chi_spec = ctx.spec;
    chi_spec.abs_tol = 1e-13;
    chi_spec.rel_tol = 1e-11;
    const FadingModel model = ctx.model;
    const auto f = [=](double y) -> Complex {
        const Complex chi =
            disk_interferer_transform(Complex{0.0, y}, a, b, model, chi_spec);
        return std::exp(Complex{0.0, -Q * y}) * (chi_power(chi, delta) - 1.0) /
               (k_s - kJ * y);
    };

    // Head skip below y0, bounded by
    // int_0^{y0} min(d J1 y^{2/b}/a^2, 2) / max(s_z, y) dy.
    const double dev_coeff = delta * J1 / a2;
    const auto head_bound_at = [&](double y_end) -> double {
        const double p = 2.0 / b;
        const double y_sat = std::pow(2.0 / dev_coeff, b / 2.0);
        double total = 0.0;
        double lo = 0.0;
        const double cuts[3] = {std::min(k_s, y_sat), std::max(k_s, y_sat), y_end};
        for (double hi : cuts) {
            hi = std::min(hi, y_end);
            if (hi <= lo) {
                continue;
            }
            const bool sat = lo >= y_sat;
            const bool kernel_y = lo >= k_s;
            if (!sat && !kernel_y) {
                total += dev_coeff / k_s *
                         (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / (p + 1.0);
            } else if (!sat && kernel_y) {
                total += dev_coeff * (std::pow(hi, p) - std::pow(lo, p)) / p;
            } else if (sat && !kernel_y) {
                total += 2.0 * (hi - lo) / k_s;
            } else {
                total += 2.0 * std::log(hi / lo);
            }
            lo = hi;
            if (lo >= y_end) {
                break;
            }
        }
        return total;
    };
    double y0 = std::min(1e-12, 1e-6 * k_s);
    const double y0_cap = 0.1 * std::min(k_s, 1.0);
    while (y0 < y0_cap && head_bound_at(y0 * 4.0) <= budget / 8.0) {
        y0 *= 4.0;
    }
    const double head_bound = head_bound_at(y0);

    // Small-argument branch: the noise phase truncates the integral before
    // the transform develops structure.
    const double y_taylor =
        std::pow(0.25 * a2 / std::max(1.0, static_cast<double>(delta)) / J1,
                 b / 2.0);
    const double y_osc = Q > 0.0 ? 45.0 / Q : std::numeric_limits<double>::infinity();
    std::vector<TailTerm> tails;
    double cutoff;
    double residual = 0.0;
    bool small_branch = Q > 0.0 && y_osc <= y_taylor && y_osc >= 4.0 * k_s;
    if (small_branch) {
        cutoff = std::max(y_osc, 16.0 * y0);
        // chi(jy) = 1 - J1 (jy)^{2/b}/a^2 + (2/(b-2)) (jy)/a^b + ...
        const Complex j2b = complex_power(kJ, 2.0 / b);
        const Complex c1 = -static_cast<double>(delta) * J1 / a2 * j2b;
        const Complex c2a = static_cast<double>(delta) * (2.0 / (b - 2.0)) /
                            std::pow(a, b) * kJ;
        const Complex c2b = delta > 1 ? 0.5 * delta * (delta - 1.0) *
                                            (J1 / a2) * (J1 / a2) * j2b * j2b
                                      : Complex{0.0, 0.0};
        // kernel 1/(k_s - jy) = j/y + k_s/y^2 + ...
        tails.push_back({kJ * c1, 1.0 - 2.0 / b, Q});
        tails.push_back({kJ * c2a, 0.0, Q});
        tails.push_back({kJ * c2b, 1.0 - 4.0 / b, Q});
        tails.push_back({k_s * c1, 2.0 - 2.0 / b, Q});
        const double r3 = std::abs(c1) * dev_coeff * J1 / a2 * 2.0;  // next order
        residual = 3.0 * r3 * std::pow(Q, -1.0 - 4.0 / b) +
                   3.0 * std::abs(c2a) * dev_coeff * std::pow(Q, -1.0 - 2.0 / b) +
                   k_s * k_s * dev_coeff * std::pow(Q, 2.0 / b - 1.0);
    } else {
        // Large-argument branch: run past the transform knee and the kernel
        // scale, then use the decay asymptotics of chi. The cutoff grows until
        // the first neglected tail orders are inside the error budget.
        cutoff = 8.0 * std::max({ab, k_s, 25.0});
        const double A3 = 2.0 * std::pow(ab, 3.0) / (3.0 * b + 2.0);
        const double A1_est = 2.0 * ab / (b + 2.0);
        const auto neglected = [&](double y_end) -> double {
            const double lead_pow =
                (delta - 1.0) * (std::log(A1_est) - std::log(y_end));
            const double lead1 = lead_pow < -60.0 ? 0.0 : std::exp(lead_pow);
            const double chi3 =
                delta * lead1 * A3 / ((delta + 2.0) * std::pow(y_end, delta + 2.0));
            const double kern4 =
                std::pow(k_s / y_end, 3.0) / y_end *
                (1.0 + lead1 * A1_est / std::pow(y_end, delta));
            return chi3 + kern4;
        };
        while (neglected(cutoff) > std::max(budget / 8.0, ctx.spec.abs_tol) &&
               cutoff < ctx.spec.truncation_radius) {
            cutoff *= 2.0;
        }
        if (cutoff > ctx.spec.truncation_radius) {
            throw QuadratureError("contour cutoff exceeds truncation radius",
                                  QuadratureResult{});
        }
        const double projected_osc = Q * cutoff / (2.0 * kPi);
        if (projected_osc > 2.0e5) {
            // Oscillation-dominated corner (tiny r, large delta): the exact
            // Rayleigh reduction stands in for the contour here.
            if (reduction_fallbacks != nullptr) {
                ++(*reduction_fallbacks);
            }
            const double chi0 = chi_real(theta0, a, b, model, chi_spec);
            double li = 1.0;
            for (int i = 0; i < delta; ++i) {
                li *= chi0;
            }
            return {{std::exp(-q) * li, 0.0}, 1e-10};
        }
        double A1;
        double chi_phase = 0.0;
        if (model.kind == FadingModel::Kind::Rayleigh) {
            A1 = 2.0 * ab / (b + 2.0);
        } else {
            A1 = 2.0 * ab / b;
            chi_phase = std::pow(a, -b);
        }
        const Complex lead = std::pow(Complex{A1, 0.0} / kJ, delta);
        // chi^delta * kernel expansions
        double ksk = 1.0;  // k_s^{k-1}
        Complex jk{1.0, 0.0};
        for (int k = 1; k <= 3; ++k) {
            jk /= kJ;  // j^{-k}
            // kernel term: -k_s^{k-1} j^{-k} y^{-k}
            const Complex kern = -ksk * jk;
            // "-1" part of the deviation: -1 * kernel
            tails.push_back({-kern, static_cast<double>(k), Q});
            // chi^delta part
            tails.push_back(
                {kern * lead, static_cast<double>(k + delta), Q + delta * chi_phase});
            ksk *= k_s;
        }
        if (model.kind == FadingModel::Kind::Rayleigh && delta >= 1) {
            // chi^d second order: d A1^{d-1} A2 (jy)^{-d-1}, paired with the
            // first two kernel orders.
            const double A2 = -std::pow(a, 2.0 * b) / (b + 1.0);
            const Complex sub =
                static_cast<double>(delta) *
                std::pow(Complex{A1, 0.0} / kJ, delta - 1) * (A2 / kJ);
            tails.push_back({sub, static_cast<double>(delta) + 2.0, Q});
            tails.push_back({sub * (k_s / kJ), static_cast<double>(delta) + 3.0, Q});
        }
        residual = 2.0 * neglected(cutoff);
    }

    const double max_rate = Q + (model.kind == FadingModel::Kind::None
                                     ? delta * std::pow(a, -b)
                                     : 0.0);
    QuadratureSpec body_spec = ctx.spec;
    body_spec.abs_tol = std::max(ctx.spec.abs_tol, budget / 8.0);
    HalfLine body = integrate_panels(f, y0, std::max(y0, 1e-3 * std::min(1.0, cutoff)),
                                     cutoff, max_rate, body_spec);
    ValueErr tail = eval_tails(tails, cutoff, ctx.spec);
    if (w_used != nullptr) {
        *w_used = std::max(*w_used, cutoff);
    }
    ValueErr out;
    out.value = {I0 + (body.value + tail.value).real() / kPi, 0.0};
    out.err = head_bound + (body.err + tail.err + residual) / kPi;
    return out;
}

// Success probability at serving distance r for a deterministic desired
// signal (scenario 1), P(noise + I < c).
ValueErr none_inner_contour(double r, const InnerContext& ctx, double budget,
                            double* w_used) {
    const double theta0 = ctx.gamma0 * std::pow(r, ctx.b);
    const double c = ctx.gain_power / theta0;
    if (ctx.delta == 0) {
        if (c > ctx.noise_power) {
            return {{1.0, 0.0}, 0.0};
        }
        return {{c == ctx.noise_power ? 0.5 : 0.0, 0.0}, 0.0};
    }
    const double b = ctx.b;

    if (ctx.transform.kind == InterferenceTransform::Kind::FiniteDisk) {
        const double a = ctx.transform.disk_radius;
        const double ab = std::pow(a, b);
        // Every interferer contributes at least K' a^-b.
        if (c <= ctx.noise_power + ctx.delta * ctx.gain_power / ab) {
            return {{0.0, 0.0}, 0.0};
        }
        // Union bound on the failure probability for the near-certain side.
        const double margin = c - ctx.noise_power;
        const double ub =
            ctx.delta *
            std::min(1.0, std::pow(ctx.delta * ctx.gain_power / margin, 2.0 / b) /
                              (a * a));
        if (ub < budget / 2.0) {
            return {{1.0 - 0.5 * ub, 0.0}, 0.5 * ub};
        }

        const double c_t = 1.0 / theta0;                    // window phase rate
        const double Q = ctx.noise_power / ctx.gain_power;  // noise phase rate
        const int delta = ctx.delta;
        QuadratureSpec chi_spec = ctx.spec;
        chi_spec.abs_tol = 1e-13;
        chi_spec.rel_tol = 1e-11;
        const FadingModel model = ctx.model;
        const auto f = [=](double y) -> Complex {
            const Complex chi =
                disk_interferer_transform(Complex{0.0, y}, a, b, model, chi_spec);
            Complex kernel;
            if (std::abs(y * c_t) < 1e-8) {
                kernel = Complex{c_t, 0.0} * (1.0 + kJ * (0.5 * y * c_t));
            } else {
                kernel = (std::exp(Complex{0.0, y * c_t}) - 1.0) / (kJ * y);
            }
            return kernel * std::exp(Complex{0.0, -Q * y}) * chi_power(chi, delta);
        };
        const double cutoff =
            std::min(8.0 * std::max(ab, 25.0), ctx.spec.truncation_radius);
        const double max_rate = std::max(c_t, Q) + delta * std::pow(a, -b);
        if (cutoff * max_rate / (2.0 * kPi) > 2.0e5) {
            // Oscillation-dominated corner; the union bound already brackets
            // the value, so return its midpoint with an honest error bar.
            return {{1.0 - 0.5 * ub, 0.0}, 0.5 * ub};
        }
        const double A1 = 2.0 * ab / b;
        const double chi_phase = std::pow(a, -b);
        const Complex lead = std::pow(Complex{A1, 0.0} / kJ, delta);
        std::vector<TailTerm> tails;
        // [e^{jyc} - 1]/(jy) = -j e^{jyc}/y + j/y
        tails.push_back(
            {-kJ * lead, 1.0 + delta, Q - c_t + delta * chi_phase});
        tails.push_back({kJ * lead, 1.0 + delta, Q + delta * chi_phase});
        const double lead_mag = std::abs(lead);
        const double residual = 3.0 * lead_mag * (delta + b) *
                                std::pow(cutoff, -1.0 - delta) / ab;
        QuadratureSpec body_spec = ctx.spec;
        body_spec.abs_tol = std::max(ctx.spec.abs_tol, budget / 8.0);
        HalfLine body =
            integrate_panels(f, 0.0, std::min(0.25, 0.25 / c_t), cutoff, max_rate,
                             body_spec);
        ValueErr tail = eval_tails(tails, cutoff, ctx.spec);
        if (w_used != nullptr) {
            *w_used = std::max(*w_used, cutoff);
        }
        ValueErr out;
        out.value = {(body.value + tail.value).real() / kPi, 0.0};
        out.err = (body.err + tail.err + residual) / kPi;
        return out;
    }

    // PaperLimit with a deterministic desired signal.
    const double kappa = 2.0 * ctx.delta / b;
    const double c_t = 1.0 / theta0;
    const double Q = ctx.noise_power / ctx.gain_power;
    if (Q == c_t || Q == 0.0) {
        throw QuadratureError(
            "PaperLimit contour integral needs nonzero phase rates",
            QuadratureResult{});
    }
    const double moment = fading_fractional_moment(ctx.model, ctx.delta, b);
    double per = gamma_real(-2.0 / b) / b;
    Complex pcoeff{1.0, 0.0};
    for (int i = 0; i < ctx.delta; ++i) {
        pcoeff *= per;
    }
    pcoeff *= moment;
    const Complex zeta_unit = complex_power(kJ, kappa);  // (j y)^kappa per unit y
    const auto f = [=](double y) -> Complex {
        if (y == 0.0) {
            return {0.0, 0.0};
        }
        const Complex kernel = (std::exp(Complex{0.0, y * c_t}) - 1.0) / (kJ * y);
        return kernel * std::exp(Complex{0.0, -Q * y}) * pcoeff * zeta_unit *
               std::pow(y, kappa);
    };
    const double min_rate = std::min(std::abs(Q - c_t), Q);
    const double cutoff =
        std::min(std::max(200.0, 30.0 * (kappa + 8.0) / min_rate),
                 ctx.spec.truncation_radius);
    std::vector<TailTerm> tails;
    tails.push_back({-kJ * pcoeff * zeta_unit, 1.0 - kappa, Q - c_t});
    tails.push_back({kJ * pcoeff * zeta_unit, 1.0 - kappa, Q});
    HalfLine body = integrate_panels(f, 0.0, std::min(0.25, 0.25 / c_t), cutoff,
                                     std::max(Q, c_t), ctx.spec);
    ValueErr tail = eval_tails(tails, cutoff, ctx.spec);
    if (w_used != nullptr) {
        *w_used = std::max(*w_used, cutoff);
    }
    ValueErr out;
    out.value = {(body.value + tail.value).real() / kPi, 0.0};
    out.err = (body.err + tail.err +
               std::abs(pcoeff) * std::pow(cutoff, kappa - 2.0) / (2.0 - kappa)) /
              kPi;
    return out;
}

// Rayleigh desired fading reduction: conditional success is
// e^{-u sigma^2} L_I(u) at the real argument u = gamma0 r^b / K'.
ValueErr rayleigh_inner_reduction(double r, const InnerContext& ctx) {
    const double theta0 = ctx.gamma0 * std::pow(r, ctx.b);
    const double q = ctx.noise_power * theta0 / ctx.gain_power;
    if (q > 745.0) {
        return {{0.0, 0.0}, 0.0};
    }
    const double noise_factor = std::exp(-q);
    if (ctx.delta == 0) {
        return {{noise_factor, 0.0}, 0.0};
    }
    QuadratureSpec chi_spec = ctx.spec;
    chi_spec.abs_tol = 1e-13;
    chi_spec.rel_tol = 1e-11;
    const double chi =
        chi_real(theta0, ctx.transform.disk_radius, ctx.b, ctx.model, chi_spec);
    double li = 1.0;
    for (int i = 0; i < ctx.delta; ++i) {
        li *= chi;
    }
    return {{noise_factor * li, 0.0}, 1e-12};
}

}  // namespace
OutageEvaluation evaluate_outage(double gamma0, int delta, const LinkParams& link,
                                 const FadingModel& model,
                                 const InterferenceTransform& transform,
                                 const QuadratureSpec& spec,
                                 OutageEvaluator evaluator) {
    link.validate();
    model.validate();
    if (!(gamma0 > 0.0)) {
        throw std::invalid_argument("evaluate_outage: gamma0 must be > 0");
    }
    if (delta < 0) {
        throw std::invalid_argument("evaluate_outage: delta must be >= 0");
    }
    if (!model.has_closed_form()) {
        throw std::invalid_argument(
            "evaluate_outage: scenario has no closed-form transforms; use the "
            "Monte Carlo module");
    }
    if (transform.kind == InterferenceTransform::Kind::FiniteDisk &&
        !(transform.disk_radius > 0.0)) {
        throw std::invalid_argument("evaluate_outage: disk radius must be > 0");
    }
    if (evaluator == OutageEvaluator::RayleighReduction) {
        if (model.kind != FadingModel::Kind::Rayleigh) {
            throw std::invalid_argument(
                "RayleighReduction evaluator requires Rayleigh fading");
        }
        if (transform.kind != InterferenceTransform::Kind::FiniteDisk) {
            throw std::invalid_argument(
                "RayleighReduction evaluator requires the finite-disk transform "
                "(the infinite-plane limit is not a probability transform)");
        }
    }

    InnerContext ctx;
    ctx.delta = delta;
    ctx.b = link.path_loss_exponent;
    ctx.gain_power = link.gain_power;
    ctx.noise_power = link.noise_power;
    ctx.gamma0 = gamma0;
    ctx.transform = transform;
    ctx.model = model;
    ctx.spec = spec;

    double inner_err_weighted = 0.0;
    double w_used = 0.0;
    long reduction_fallbacks = 0;
    const double lam = link.bs_density;
    const double r_char = 1.0 / std::sqrt(kPi * lam);
    const auto outer = [&](double r) -> Complex {
        const double weight = 2.0 * kPi * lam * r * std::exp(-kPi * lam * r * r);
        if (weight < 1e-300 || r == 0.0) {
            return {0.0, 0.0};
        }
        // Absolute error this radius may spend, scaled by its measure.
        const double budget = std::clamp(
            0.25 * spec.abs_tol / std::max(weight * r_char, 1e-2),
            0.25 * spec.abs_tol, 3e-5);
        ValueErr inner;
        if (evaluator == OutageEvaluator::RayleighReduction) {
            inner = rayleigh_inner_reduction(r, ctx);
        } else if (model.kind == FadingModel::Kind::Rayleigh) {
            inner = rayleigh_inner_contour(r, ctx, budget, &w_used,
                                           &reduction_fallbacks);
        } else {
            inner = none_inner_contour(r, ctx, budget, &w_used);
        }
        inner_err_weighted =
            std::max(inner_err_weighted, inner.err * weight * r_char);
        return weight * inner.value;
    };

    QuadratureSpec outer_spec = spec;
    outer_spec.abs_tol = std::max(spec.abs_tol, 1e-10);
    QuadratureResult success = integrate_semi_infinite(outer, outer_spec);

    OutageEvaluation eval;
    eval.raw_real = 1.0 - success.value.real();
    eval.imag_residual = std::abs(success.value.imag());
    eval.quadrature_error = success.error_estimate + inner_err_weighted;
    eval.truncation_radius = w_used;
    eval.outage = std::clamp(eval.raw_real, 0.0, 1.0);
    eval.clamp_excursion =
        std::max({0.0, -eval.raw_real, eval.raw_real - 1.0});
    return eval;
}

double outage_probability(double gamma0, int delta, const LinkParams& link,
                          const FadingModel& model,
                          const InterferenceTransform& transform,
                          const QuadratureSpec& spec, OutageEvaluator evaluator) {
    OutageEvaluation eval =
        evaluate_outage(gamma0, delta, link, model, transform, spec, evaluator);
    if (transform.kind == InterferenceTransform::Kind::FiniteDisk &&
        eval.clamp_excursion > 1e-3) {
        throw std::runtime_error(
            "outage_probability: pre-clamp excursion " +
            std::to_string(eval.clamp_excursion) +
            " exceeds 1e-3; quadrature budget insufficient for these parameters");
    }
    return eval.outage;
}

double success_probability(double gamma0, int delta, const LinkParams& link,
                           const FadingModel& model,
                           const InterferenceTransform& transform,
                           const QuadratureSpec& spec, OutageEvaluator evaluator) {
    return 1.0 -
           outage_probability(gamma0, delta, link, model, transform, spec, evaluator);
}

double unavailable_probability(double p_busy, const LinkParams& link,
                               const FadingModel& model,
                               const InterferenceTransform& transform,
                               const QuadratureSpec& spec, int n_max) {
    if (!(p_busy >= 0.0 && p_busy <= 1.0)) {
        throw std::invalid_argument("unavailable_probability: p_busy outside [0,1]");
    }
    if (n_max < 1) {
        throw std::invalid_argument("unavailable_probability: n_max must be >= 1");
    }
    link.validate();
    if (p_busy == 0.0) {
        return 0.0;
    }
    const double gamma0 = link.sinr_threshold;

    if (model.kind == FadingModel::Kind::Rayleigh &&
        transform.kind == InterferenceTransform::Kind::FiniteDisk) {
        // The binomial over delta collapses through the generating function:
        // sum_d C(N,d) p^d (1-p)^(N-d) chi^d = (1 - p + p chi)^N, so the
        // whole expectation needs two radial integrals, not N of them.
        const double lam = link.bs_density;
        const double b = link.path_loss_exponent;
        const int n = n_max;
        QuadratureSpec chi_spec = spec;
        chi_spec.abs_tol = 1e-13;
        chi_spec.rel_tol = 1e-11;
        const auto weighted = [&](double r) -> Complex {
            const double weight =
                2.0 * kPi * lam * r * std::exp(-kPi * lam * r * r);
            if (weight < 1e-300 || r == 0.0) {
                return {0.0, 0.0};
            }
            const double theta0 = gamma0 * std::pow(r, b);
            const double q = link.noise_power * theta0 / link.gain_power;
            if (q > 745.0) {
                return {0.0, 0.0};
            }
            const double chi =
                disk_interferer_transform(Complex{theta0, 0.0},
                                          transform.disk_radius, b, model, chi_spec)
                    .real();
            const double base = 1.0 - p_busy + p_busy * chi;
            return weight * std::exp(-q) * std::pow(base, n);
        };
        const auto bare = [&](double r) -> Complex {
            const double weight =
                2.0 * kPi * lam * r * std::exp(-kPi * lam * r * r);
            if (weight < 1e-300 || r == 0.0) {
                return {0.0, 0.0};
            }
            const double q =
                link.noise_power * gamma0 * std::pow(r, b) / link.gain_power;
            return weight * std::exp(-std::min(q, 745.0));
        };
        const double s_weighted = integrate_semi_infinite(weighted, spec).value.real();
        const double s_bare = integrate_semi_infinite(bare, spec).value.real();
        const double miss = std::pow(1.0 - p_busy, n);
        const double eps = (1.0 - miss) - s_weighted + miss * s_bare;
        return std::clamp(eps, 0.0, 1.0);
    }

    // General path: explicit binomial sum over clamped outage values.
    double eps = 0.0;
    const double log_p = std::log(p_busy);
    const double log_1p = p_busy < 1.0 ? std::log1p(-p_busy) : 0.0;
    for (int d = 1; d <= n_max; ++d) {
        double log_binom = std::lgamma(n_max + 1.0) - std::lgamma(d + 1.0) -
                           std::lgamma(n_max - d + 1.0);
        double log_w = log_binom + d * log_p;
        if (p_busy < 1.0) {
            log_w += (n_max - d) * log_1p;
        } else if (d != n_max) {
            continue;
        }
        const double w = std::exp(log_w);
        if (w < 1e-16) {
            continue;
        }
        eps += w * evaluate_outage(gamma0, d, link, model, transform, spec).outage;
    }
    return std::clamp(eps, 0.0, 1.0);
}

double noise_only_success(double gamma0, const LinkParams& link,
                          const QuadratureSpec& spec) {
    link.validate();
    const double lam = link.bs_density;
    const double b = link.path_loss_exponent;
    const auto f = [&](double r) -> Complex {
        const double weight = 2.0 * kPi * lam * r * std::exp(-kPi * lam * r * r);
        if (weight < 1e-300) {
            return {0.0, 0.0};
        }
        const double q = gamma0 * link.noise_power * std::pow(r, b) / link.gain_power;
        return weight * std::exp(-std::min(q, 745.0));
    };
    return integrate_semi_infinite(f, spec).value.real();
}

}  // namespace pvtnet
