#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace pvtnet {

/// Parameters of the two-dimensional channel-access chain. States are
/// (occupied, available) pairs with occupied <= available <= channels.
struct ChainParams {
    int channels = 20;           // C
    double arrival_rate = 1.0;   // calls per minute
    double holding_rate = 1.0;   // channel releases per minute (session + handoff)
    double recovery_rate = 1.0;  // unavailable -> available, per minute
    double loss_rate = 1.0;      // available -> unavailable, per minute

    void validate() const;
};

/// Stationary probabilities over the triangular state space.
class StateDistribution {
public:
    StateDistribution(int channels, std::vector<double> probs);

    int channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double prob(int occupied, int available) const;

    void for_each_state(
        const std::function<void(int occupied, int available, double p)>& fn) const;

    static std::size_t state_count(int channels);
    static std::size_t index_of(int occupied, int available);

private:
    int channels_;
    std::vector<double> probs_;
};

/// Product-form stationary distribution, weights accumulated in log space.
StateDistribution stationary_distribution(const ChainParams& params);

/// Conservative transition-rate matrix over the triangular state space.
Eigen::MatrixXd build_generator(const ChainParams& params);

/// Brute-force stationary vector of a conservative generator (v Q = 0,
/// sum v = 1) by dense LU with a normalization row.
StateDistribution solve_generator(const Eigen::MatrixXd& generator, int channels);

/// Probability an arriving call finds every available channel occupied.
double blocking_probability(const StateDistribution& dist);

/// Expected fraction of the C channels occupied.
double busy_probability(const StateDistribution& dist);

/// Mean sojourn time in minutes, Little's law on the mean occupancy.
double mean_sojourn_time(const StateDistribution& dist, double arrival_rate);

/// Mean number of occupied channels.
double mean_occupancy(const StateDistribution& dist);

}  // namespace pvtnet
