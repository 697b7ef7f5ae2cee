#include "pvtnet/markov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pvtnet {

void ChainParams::validate() const {
    if (channels < 1) {
        throw std::invalid_argument("ChainParams: channels must be >= 1");
    }
    if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate)) {
        throw std::invalid_argument("ChainParams: arrival_rate must be >= 0");
    }
    if (!(holding_rate > 0.0) || !(recovery_rate > 0.0) || !(loss_rate > 0.0)) {
        throw std::invalid_argument("ChainParams: rates must be > 0");
    }
}

std::size_t StateDistribution::state_count(int channels) {
    return static_cast<std::size_t>(channels + 1) * (channels + 2) / 2;
}

std::size_t StateDistribution::index_of(int occupied, int available) {
    return static_cast<std::size_t>(available) * (available + 1) / 2 + occupied;
}

StateDistribution::StateDistribution(int channels, std::vector<double> probs)
    : channels_(channels), probs_(std::move(probs)) {
    if (probs_.size() != state_count(channels_)) {
        throw std::invalid_argument("StateDistribution: wrong state count");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= -1e-12) || !std::isfinite(p)) {
            throw std::invalid_argument("StateDistribution: invalid probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("StateDistribution: probabilities must sum to 1");
    }
    // Remove the rounding drift so downstream sums see exactly 1.
    for (double& p : probs_) {
        p = std::max(p, 0.0) / sum;
    }
}

double StateDistribution::prob(int occupied, int available) const {
    if (occupied < 0 || available < occupied || available > channels_) {
        throw std::out_of_range("StateDistribution: state outside triangular space");
    }
    return probs_[index_of(occupied, available)];
}

void StateDistribution::for_each_state(
    const std::function<void(int, int, double)>& fn) const {
    for (int n = 0; n <= channels_; ++n) {
        for (int m = 0; m <= n; ++m) {
            fn(m, n, probs_[index_of(m, n)]);
        }
    }
}

StateDistribution stationary_distribution(const ChainParams& params) {
    params.validate();
    const int C = params.channels;
    const double log_load = params.arrival_rate > 0.0
                                ? std::log(params.arrival_rate / params.holding_rate)
                                : -std::numeric_limits<double>::infinity();
    const double log_avail = std::log(params.recovery_rate / params.loss_rate);

    std::vector<double> logw(StateDistribution::state_count(C),
                             -std::numeric_limits<double>::infinity());
    double max_logw = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= C; ++n) {
        const double log_binom =
            std::lgamma(C + 1.0) - std::lgamma(n + 1.0) - std::lgamma(C - n + 1.0);
        for (int m = 0; m <= n; ++m) {
            double lw = log_binom + n * log_avail - std::lgamma(m + 1.0);
            if (m > 0) {
                lw += m * log_load;  // -inf when there are no arrivals
            }
            logw[StateDistribution::index_of(m, n)] = lw;
            max_logw = std::max(max_logw, lw);
        }
    }
    if (!std::isfinite(max_logw)) {
        throw std::overflow_error("stationary_distribution: weights not representable");
    }
    std::vector<double> w(logw.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        w[i] = std::exp(logw[i] - max_logw);
        sum += w[i];
    }
    for (double& x : w) {
        x /= sum;
    }
    return {C, std::move(w)};
}

Eigen::MatrixXd build_generator(const ChainParams& params) {
    params.validate();
    const int C = params.channels;
    const auto T = static_cast<Eigen::Index>(StateDistribution::state_count(C));
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(T, T);
    for (int n = 0; n <= C; ++n) {
        for (int m = 0; m <= n; ++m) {
            const auto i = static_cast<Eigen::Index>(StateDistribution::index_of(m, n));
            if (m < n) {  // call arrival
                q(i, StateDistribution::index_of(m + 1, n)) += params.arrival_rate;
            }
            if (m > 0) {  // call departure
                q(i, StateDistribution::index_of(m - 1, n)) +=
                    m * params.holding_rate;
            }
            if (n < C) {  // channel recovery
                q(i, StateDistribution::index_of(m, n + 1)) +=
                    (C - n) * params.recovery_rate;
            }
            if (n > m) {  // channel loss; an idle channel departs, so m is kept
                q(i, StateDistribution::index_of(m, n - 1)) += n * params.loss_rate;
            }
            q(i, i) = -q.row(i).sum();
        }
    }
    return q;
}

StateDistribution solve_generator(const Eigen::MatrixXd& generator, int channels) {
    const auto T = static_cast<Eigen::Index>(StateDistribution::state_count(channels));
    if (generator.rows() != T || generator.cols() != T) {
        throw std::invalid_argument("solve_generator: generator size mismatch");
    }
    // v Q = 0 with sum v = 1: transpose and swap one balance row for the
    // normalization constraint.
    Eigen::MatrixXd a = generator.transpose();
    a.row(T - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(T);
    rhs(T - 1) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd v = lu.solve(rhs);
    if (!v.allFinite() || (a * v - rhs).norm() > 1e-8) {
        throw std::runtime_error("solve_generator: reducible or singular generator");
    }
    std::vector<double> probs(v.data(), v.data() + v.size());
    return {channels, std::move(probs)};
}

double blocking_probability(const StateDistribution& dist) {
    double sum = 0.0;
    for (int n = 0; n <= dist.channels(); ++n) {
        sum += dist.prob(n, n);
    }
    return sum;
}

double busy_probability(const StateDistribution& dist) {
    double sum = 0.0;
    dist.for_each_state([&](int m, int, double p) { sum += p * m; });
    return sum / dist.channels();
}

double mean_occupancy(const StateDistribution& dist) {
    double sum = 0.0;
    dist.for_each_state([&](int m, int, double p) { sum += p * m; });
    return sum;
}

double mean_sojourn_time(const StateDistribution& dist, double arrival_rate) {
    if (!(arrival_rate > 0.0)) {
        throw std::invalid_argument("mean_sojourn_time: arrival_rate must be > 0");
    }
    return mean_occupancy(dist) / arrival_rate;
}

}  // namespace pvtnet
