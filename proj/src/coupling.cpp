#include "pvtnet/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pvtnet {

void OfferedTraffic::validate() const {
    if (channels < 1) {
        throw std::invalid_argument("OfferedTraffic: channels must be >= 1");
    }
    if (!(arrival_rate >= 0.0) || !(holding_rate > 0.0)) {
        throw std::invalid_argument("OfferedTraffic: bad rates");
    }
}

std::vector<double> default_gamma_grid(int resolution) {
    if (resolution < 4) {
        throw std::invalid_argument("default_gamma_grid: resolution too small");
    }
    std::vector<double> grid(resolution);
    const double lo = std::log(1e-7);
    const double hi = std::log(1e8);
    for (int i = 0; i < resolution; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * i / (resolution - 1.0));
    }
    return grid;
}

namespace {

// Fritsch-Carlson monotone cubic slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) {
        return d;
    }
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        s[i] = (y[i + 1] - y[i]) / h[i];
    }
    d[0] = s[0];
    d[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    // Clamp endpoint slopes to keep the interpolant monotone in the
    // terminal intervals.
    for (std::size_t i : {std::size_t{0}, n - 1}) {
        const double sec = i == 0 ? s[0] : s[n - 2];
        if (sec == 0.0) {
            d[i] = 0.0;
        } else if (d[i] / sec < 0.0) {
            d[i] = 0.0;
        } else if (std::abs(d[i]) > 3.0 * std::abs(sec)) {
            d[i] = 3.0 * sec;
        }
    }
    return d;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& d, double xq) {
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = it == x.begin() ? 0 : (it - x.begin()) - 1;
    i = std::min(i, x.size() - 2);
    const double h = x[i + 1] - x[i];
    const double t = (xq - x[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
}

}  // namespace

OutageTable::OutageTable(const LinkParams& link, const FadingModel& model,
                         const InterferenceTransform& transform,
                         std::vector<double> gamma_grid, int max_delta,
                         const QuadratureSpec& spec, OutageEvaluator evaluator) {
    if (gamma_grid.size() < 2 ||
        !std::is_sorted(gamma_grid.begin(), gamma_grid.end())) {
        throw std::invalid_argument("OutageTable: grid must be increasing");
    }
    if (max_delta < 0) {
        throw std::invalid_argument("OutageTable: max_delta must be >= 0");
    }
    gammas_ = std::move(gamma_grid);
    log_gammas_.resize(gammas_.size());
    for (std::size_t i = 0; i < gammas_.size(); ++i) {
        if (!(gammas_[i] > 0.0)) {
            throw std::invalid_argument("OutageTable: gamma values must be > 0");
        }
        log_gammas_[i] = std::log(gammas_[i]);
    }
    rows_.resize(max_delta + 1);
    slopes_.resize(max_delta + 1);
    for (int delta = 0; delta <= max_delta; ++delta) {
        rows_[delta].resize(gammas_.size());
        for (std::size_t i = 0; i < gammas_.size(); ++i) {
            rows_[delta][i] =
                evaluate_outage(gammas_[i], delta, link, model, transform, spec,
                                evaluator)
                    .outage;
        }
        slopes_[delta] = pchip_slopes(log_gammas_, rows_[delta]);
    }
}

OutageTable::OutageTable(std::vector<double> gamma_grid,
                         std::vector<std::vector<double>> rows) {
    if (gamma_grid.size() < 2 ||
        !std::is_sorted(gamma_grid.begin(), gamma_grid.end())) {
        throw std::invalid_argument("OutageTable: grid must be increasing");
    }
    if (rows.empty()) {
        throw std::invalid_argument("OutageTable: need at least one row");
    }
    gammas_ = std::move(gamma_grid);
    log_gammas_.resize(gammas_.size());
    for (std::size_t i = 0; i < gammas_.size(); ++i) {
        if (!(gammas_[i] > 0.0)) {
            throw std::invalid_argument("OutageTable: gamma values must be > 0");
        }
        log_gammas_[i] = std::log(gammas_[i]);
    }
    rows_ = std::move(rows);
    slopes_.resize(rows_.size());
    for (std::size_t d = 0; d < rows_.size(); ++d) {
        if (rows_[d].size() != gammas_.size()) {
            throw std::invalid_argument("OutageTable: row length mismatch");
        }
        slopes_[d] = pchip_slopes(log_gammas_, rows_[d]);
    }
}

double OutageTable::lookup(double gamma0, int delta) const {
    if (delta < 0 || delta > max_delta()) {
        throw std::out_of_range("OutageTable: delta outside cached range");
    }
    if (!(gamma0 > 0.0)) {
        throw std::invalid_argument("OutageTable: gamma0 must be > 0");
    }
    if (gamma0 <= gammas_.front()) {
        return rows_[delta].front();
    }
    if (gamma0 >= gammas_.back()) {
        return rows_[delta].back();
    }
    const double v =
        pchip_eval(log_gammas_, rows_[delta], slopes_[delta], std::log(gamma0));
    return std::clamp(v, 0.0, 1.0);
}

double unavailability_from_cache(double p_busy, const std::vector<double>& pout,
                                 int n_max) {
    if (!(p_busy >= 0.0 && p_busy <= 1.0)) {
        throw std::invalid_argument("unavailability_from_cache: p outside [0,1]");
    }
    if (static_cast<int>(pout.size()) < n_max + 1) {
        throw std::invalid_argument("unavailability_from_cache: cache too small");
    }
    if (p_busy == 0.0) {
        return 0.0;
    }
    // Binomial weights accumulated by the stable forward recurrence.
    double eps = 0.0;
    double w = std::pow(1.0 - p_busy, n_max);  // weight of delta = 0
    const double ratio = p_busy < 1.0 ? p_busy / (1.0 - p_busy) : 0.0;
    if (p_busy == 1.0) {
        return std::clamp(pout[n_max], 0.0, 1.0);
    }
    for (int d = 1; d <= n_max; ++d) {
        w *= ratio * (n_max - d + 1) / d;
        eps += w * pout[d];
    }
    return std::clamp(eps, 0.0, 1.0);
}

namespace {

std::vector<double> cache_outage_by_delta(double gamma0, const LinkParams& link,
                                          const FadingModel& model,
                                          const InterferenceTransform& transform,
                                          int n_max, const QuadratureSpec& spec) {
    std::vector<double> pout(n_max + 1, 0.0);
    const OutageEvaluator evaluator =
        model.kind == FadingModel::Kind::Rayleigh &&
                transform.kind == InterferenceTransform::Kind::FiniteDisk
            ? OutageEvaluator::RayleighReduction
            : OutageEvaluator::Contour;
    for (int d = 0; d <= n_max; ++d) {
        pout[d] =
            evaluate_outage(gamma0, d, link, model, transform, spec, evaluator)
                .outage;
    }
    return pout;
}

struct SweepContext {
    OfferedTraffic traffic;
    std::vector<double> pout;
    int n_max;
};

// eps -> alpha/beta -> product form -> busy probability.
double sweep_once(double p_busy, const SweepContext& ctx, double* eps_out,
                  bool* clamped_out, StateDistribution* dist_out) {
    double eps = unavailability_from_cache(p_busy, ctx.pout, ctx.n_max);
    bool clamped = false;
    if (eps < 1e-12) {
        eps = 1e-12;
        clamped = true;
    } else if (eps > 1.0 - 1e-12) {
        eps = 1.0 - 1e-12;
        clamped = true;
    }
    const double ab_ratio = (1.0 - eps) / eps;
    ChainParams chain;
    chain.channels = ctx.traffic.channels;
    chain.arrival_rate = ctx.traffic.arrival_rate;
    chain.holding_rate = ctx.traffic.holding_rate;
    chain.recovery_rate = ab_ratio;  // only the ratio enters the product form
    chain.loss_rate = 1.0;
    StateDistribution dist = stationary_distribution(chain);
    const double p_new = busy_probability(dist);
    if (eps_out != nullptr) {
        *eps_out = eps;
    }
    if (clamped_out != nullptr) {
        *clamped_out = clamped;
    }
    if (dist_out != nullptr) {
        *dist_out = std::move(dist);
    }
    return p_new;
}

}  // namespace

double busy_probability_sweep(double p_busy, const OfferedTraffic& traffic,
                              const LinkParams& link, const FadingModel& model,
                              const InterferenceTransform& transform,
                              const SolverConfig& cfg,
                              const QuadratureSpec& spec) {
    traffic.validate();
    SweepContext ctx{traffic,
                     cache_outage_by_delta(link.sinr_threshold, link, model,
                                           transform, cfg.n_max, spec),
                     cfg.n_max};
    return sweep_once(p_busy, ctx, nullptr, nullptr, nullptr);
}

FixedPointSolution solve_fixed_point(const OfferedTraffic& traffic,
                                     const LinkParams& link,
                                     const FadingModel& model,
                                     const SolverConfig& cfg,
                                     const QuadratureSpec& spec) {
    const InterferenceTransform transform = InterferenceTransform::finite_disk(
        neighborhood_disk_radius(link.bs_density, cfg.n_max));
    return solve_fixed_point(traffic, link, model, transform, cfg, spec);
}

FixedPointSolution solve_fixed_point(const OfferedTraffic& traffic,
                                     const LinkParams& link,
                                     const FadingModel& model,
                                     const InterferenceTransform& transform,
                                     const SolverConfig& cfg,
                                     const QuadratureSpec& spec) {
    traffic.validate();
    link.validate();
    if (!(cfg.tol > 0.0) || cfg.max_iters < 1 || cfg.damping <= 0.0 ||
        cfg.damping > 1.0 || cfg.n_max < 1) {
        throw std::invalid_argument("SolverConfig: invalid settings");
    }

    SweepContext ctx{traffic,
                     cache_outage_by_delta(link.sinr_threshold, link, model,
                                           transform, cfg.n_max, spec),
                     cfg.n_max};

    const double load =
        traffic.arrival_rate / traffic.holding_rate / traffic.channels;
    double p = std::clamp(load, 0.01, 0.99);
    double eps = 0.0;
    bool clamped = false;
    double residual = std::numeric_limits<double>::infinity();
    std::vector<FixedPointIterate> trace;
    int iter = 0;
    StateDistribution dist(1, {1.0, 0.0, 0.0});
    bool converged = false;
    for (; iter < cfg.max_iters; ++iter) {
        bool clamped_now = false;
        const double p_new = sweep_once(p, ctx, &eps, &clamped_now, &dist);
        clamped = clamped || clamped_now;
        residual = std::abs(p_new - p);
        if (cfg.keep_trace) {
            trace.push_back({iter, p, eps, residual});
        }
        if (residual < cfg.tol) {
            p = p_new;
            converged = true;
            ++iter;
            break;
        }
        p = (1.0 - cfg.damping) * p + cfg.damping * p_new;
    }
    // Refresh the distribution at the final busy probability.
    bool clamped_final = false;
    sweep_once(p, ctx, &eps, &clamped_final, &dist);
    clamped = clamped || clamped_final;

    return FixedPointSolution{eps,
                              p,
                              (1.0 - eps) / eps,
                              std::move(dist),
                              iter,
                              residual,
                              converged,
                              clamped,
                              std::move(trace)};
}

FixedPointSolution solve_with_fixed_unavailability(const OfferedTraffic& traffic,
                                                   double epsilon) {
    traffic.validate();
    bool clamped = false;
    if (epsilon < 1e-12) {
        epsilon = 1e-12;
        clamped = true;
    } else if (epsilon > 1.0 - 1e-12) {
        epsilon = 1.0 - 1e-12;
        clamped = true;
    }
    ChainParams chain;
    chain.channels = traffic.channels;
    chain.arrival_rate = traffic.arrival_rate;
    chain.holding_rate = traffic.holding_rate;
    chain.recovery_rate = (1.0 - epsilon) / epsilon;
    chain.loss_rate = 1.0;
    StateDistribution dist = stationary_distribution(chain);
    const double p = busy_probability(dist);
    return FixedPointSolution{epsilon,
                              p,
                              (1.0 - epsilon) / epsilon,
                              std::move(dist),
                              1,
                              0.0,
                              true,
                              clamped,
                              {}};
}

}  // namespace pvtnet
