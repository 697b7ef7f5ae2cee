#include "pvtnet/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pvtnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                      std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

void MCConfig::validate_disk() const {
    if (trials < 1) {
        throw std::invalid_argument("MCConfig: trials must be >= 1");
    }
    if (!(disk_radius > 0.0)) {
        throw std::invalid_argument("MCConfig: disk_radius must be > 0");
    }
}

void MCConfig::validate_window() const {
    if (trials < 1) {
        throw std::invalid_argument("MCConfig: trials must be >= 1");
    }
    if (!(window > 2.0 * guard) || !(guard > 0.0)) {
        throw std::invalid_argument("MCConfig: requires window > 2*guard > 0");
    }
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
}

void PhiloxStream::refill() {
    std::array<std::uint32_t, 4> x = counter_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0;
        std::uint32_t hi0;
        std::uint32_t lo1;
        std::uint32_t hi1;
        mul_hi_lo(kPhiloxM4x32A, x[0], lo0, hi0);
        mul_hi_lo(kPhiloxM4x32B, x[2], lo1, hi1);
        x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
        k[0] += kPhiloxW32A;
        k[1] += kPhiloxW32B;
    }
    block_ = x;
    block_pos_ = 0;
    if (++counter_[0] == 0u) {
        ++counter_[1];
    }
}

std::uint32_t PhiloxStream::next_u32() {
    if (block_pos_ >= 4) {
        refill();
    }
    return block_[block_pos_++];
}

double PhiloxStream::uniform01() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;  // in (0, 1]
}

double PhiloxStream::exponential() {
    return -std::log(uniform01());
}

double PhiloxStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    cached_normal_ = r * std::sin(phi);
    has_cached_normal_ = true;
    return r * std::cos(phi);
}

double PhiloxStream::gamma(double shape) {
    if (!(shape >= 0.05)) {
        throw std::invalid_argument("PhiloxStream::gamma: shape too small");
    }
    if (shape < 1.0) {
        // Boost to shape + 1 and scale back by U^(1/shape).
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform01(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double PhiloxStream::fading(const FadingModel& model) {
    switch (model.kind) {
        case FadingModel::Kind::None:
            return 1.0;
        case FadingModel::Kind::Rayleigh:
            return exponential();
        case FadingModel::Kind::NakagamiM:
            return gamma(model.nakagami_m) / model.nakagami_m;
        case FadingModel::Kind::LogNormal:
            return std::exp(2.0 * model.shadowing_sigma * normal());
        case FadingModel::Kind::NakagamiLogNormal:
            return gamma(model.nakagami_m) / model.nakagami_m *
                   std::exp(2.0 * model.shadowing_sigma * normal());
    }
    throw std::logic_error("PhiloxStream::fading: unknown scenario");
}

double sample_nearest_distance(double bs_density, PhiloxStream& rng) {
    if (!(bs_density > 0.0)) {
        throw std::invalid_argument("sample_nearest_distance: density must be > 0");
    }
    return std::sqrt(rng.exponential() / (kPi * bs_density));
}

namespace {

struct BlockMoments {
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;
    long extra = 0;  // op-specific tally (resampled realizations)
};

// Runs fn over [0, trials) in fixed-size blocks on a pool of threads and
// combines the per-block moments in block order, so the reduction is
// independent of scheduling.
template <typename PerTrial>
MCEstimate run_trials(long trials, int threads, long* extra_out,
                      PerTrial per_trial) {
    constexpr long kBlock = 8192;
    const long n_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<BlockMoments> blocks(n_blocks);
    int n_threads = threads > 0
                        ? threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp<long>(n_threads, 1, n_blocks);
    auto worker = [&](int tid) {
        for (long bi = tid; bi < n_blocks; bi += n_threads) {
            BlockMoments m;
            const long lo = bi * kBlock;
            const long hi = std::min(lo + kBlock, trials);
            for (long t = lo; t < hi; ++t) {
                const double v = per_trial(t, m.extra);
                m.sum += v;
                m.sum_sq += v * v;
                ++m.count;
            }
            blocks[bi] = m;
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker, t);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;
    long extra = 0;
    for (const auto& m : blocks) {
        sum += m.sum;
        sum_sq += m.sum_sq;
        count += m.count;
        extra += m.extra;
    }
    if (extra_out != nullptr) {
        *extra_out = extra;
    }
    MCEstimate est;
    est.trials = count;
    est.mean = sum / count;
    const double var =
        std::max(0.0, (sum_sq - sum * sum / count) / std::max<long>(1, count - 1));
    est.std_error = std::sqrt(var / count);
    return est;
}

inline double path_gain(double dist_sq, double b) {
    if (b == 4.0) {
        return 1.0 / (dist_sq * dist_sq);
    }
    return std::pow(dist_sq, -0.5 * b);
}

}  // namespace

MCEstimate mc_outage_disk(double gamma0, int delta, const LinkParams& link,
                          const FadingModel& model, const MCConfig& cfg,
                          int threads) {
    cfg.validate_disk();
    link.validate();
    model.validate();
    if (!(gamma0 > 0.0) || delta < 0) {
        throw std::invalid_argument("mc_outage_disk: bad gamma0 or delta");
    }
    const double b = link.path_loss_exponent;
    const double a = cfg.disk_radius;
    return run_trials(cfg.trials, threads, nullptr, [&](long t, long&) -> double {
        PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(t));
        const double r = sample_nearest_distance(link.bs_density, rng);
        const double signal =
            link.gain_power * rng.fading(model) * std::pow(r, -b);
        double interference = 0.0;
        for (int i = 0; i < delta; ++i) {
            const double d = a * std::sqrt(rng.uniform01());
            interference +=
                link.gain_power * rng.fading(model) * std::pow(d, -b);
        }
        const double sinr = signal / (link.noise_power + interference);
        return sinr < gamma0 ? 1.0 : 0.0;
    });
}

MCEstimate mc_outage_pvt(double gamma0, const LinkParams& link,
                         const FadingModel& model, const MCConfig& cfg,
                         int threads, long* resampled) {
    cfg.validate_window();
    link.validate();
    model.validate();
    if (!(gamma0 > 0.0)) {
        throw std::invalid_argument("mc_outage_pvt: gamma0 must be > 0");
    }
    const double b = link.path_loss_exponent;
    const double w = cfg.window;
    const double area_mean = link.bs_density * 4.0 * w * w;
    return run_trials(
        cfg.trials, threads, resampled, [&](long t, long& extra) -> double {
            PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(t));
            for (;;) {
                // Poisson count via unit-exponential arrivals.
                long n = 0;
                for (double acc = rng.exponential(); acc < area_mean;
                     acc += rng.exponential()) {
                    ++n;
                }
                if (n == 0) {
                    ++extra;  // empty window, resample
                    continue;
                }
                double best_sq = std::numeric_limits<double>::infinity();
                double sum_power = 0.0;
                double best_power = 0.0;
                for (long i = 0; i < n; ++i) {
                    const double x = w * (2.0 * rng.uniform01() - 1.0);
                    const double y = w * (2.0 * rng.uniform01() - 1.0);
                    const double d_sq = x * x + y * y;
                    const double p = link.gain_power * rng.fading(model) *
                                     path_gain(d_sq, b);
                    sum_power += p;
                    if (d_sq < best_sq) {
                        best_sq = d_sq;
                        best_power = p;
                    }
                }
                const double sinr =
                    best_power / (link.noise_power + sum_power - best_power);
                return sinr < gamma0 ? 1.0 : 0.0;
            }
        });
}

namespace {

// Triangular-lattice offsets within `rings` rings, excluding the origin.
std::vector<std::pair<double, double>> lattice_offsets(double spacing, int rings) {
    std::vector<std::pair<double, double>> pts;
    for (int i = -rings; i <= rings; ++i) {
        for (int j = -rings; j <= rings; ++j) {
            const int ring = (std::abs(i) + std::abs(j) + std::abs(i + j)) / 2;
            if (ring == 0 || ring > rings) {
                continue;
            }
            pts.emplace_back(spacing * (i + 0.5 * j),
                             spacing * (0.8660254037844386 * j));
        }
    }
    return pts;
}

}  // namespace

MCEstimate mc_outage_grid(double gamma0, const LinkParams& link,
                          const FadingModel& model, const MCConfig& cfg,
                          int rings, int threads) {
    if (cfg.trials < 1) {
        throw std::invalid_argument("mc_outage_grid: trials must be >= 1");
    }
    if (rings < 1) {
        throw std::invalid_argument("mc_outage_grid: rings must be >= 1");
    }
    link.validate();
    model.validate();
    const double b = link.path_loss_exponent;
    // Lattice constant matching the BS density: cell area = 1 / density.
    const double d = std::sqrt(2.0 / (std::sqrt(3.0) * link.bs_density));
    const auto interferers = lattice_offsets(d, rings);
    const double circum = d / std::sqrt(3.0);
    return run_trials(cfg.trials, threads, nullptr, [&](long t, long&) -> double {
        PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(t));
        // Uniform point in the central hexagonal cell by rejection.
        double ux;
        double uy;
        for (;;) {
            ux = circum * (2.0 * rng.uniform01() - 1.0);
            uy = circum * (2.0 * rng.uniform01() - 1.0);
            const double p1 = std::abs(ux);
            const double p2 = std::abs(0.5 * ux + 0.8660254037844386 * uy);
            const double p3 = std::abs(-0.5 * ux + 0.8660254037844386 * uy);
            if (std::max({p1, p2, p3}) <= 0.5 * d) {
                break;
            }
        }
        const double r_sq = ux * ux + uy * uy;
        const double signal =
            link.gain_power * rng.fading(model) * path_gain(r_sq, b);
        double interference = 0.0;
        for (const auto& [bx, by] : interferers) {
            const double dx = ux - bx;
            const double dy = uy - by;
            interference += link.gain_power * rng.fading(model) *
                            path_gain(dx * dx + dy * dy, b);
        }
        const double sinr = signal / (link.noise_power + interference);
        return sinr < gamma0 ? 1.0 : 0.0;
    });
}

MCEstimate mc_chain_blocking(const ChainParams& chain, double horizon_minutes,
                             const MCConfig& cfg) {
    chain.validate();
    if (!(horizon_minutes > 0.0)) {
        throw std::invalid_argument("mc_chain_blocking: horizon must be > 0");
    }
    if (!(chain.arrival_rate > 0.0)) {
        throw std::invalid_argument("mc_chain_blocking: needs arrivals");
    }
    PhiloxStream rng(cfg.seed, 0x434841494eull);  // dedicated stream
    const int C = chain.channels;
    int occupied = 0;
    int available = C;
    double now = 0.0;
    const double warmup = 0.1 * horizon_minutes;
    constexpr int kBatches = 20;
    const double batch_len = (horizon_minutes - warmup) / kBatches;
    std::vector<long> arrivals(kBatches, 0);
    std::vector<long> blocked(kBatches, 0);
    while (now < horizon_minutes) {
        const double rate_arrival = chain.arrival_rate;
        const double rate_depart = occupied * chain.holding_rate;
        const double rate_up = (C - available) * chain.recovery_rate;
        const double rate_down =
            available > occupied ? available * chain.loss_rate : 0.0;
        const double total = rate_arrival + rate_depart + rate_up + rate_down;
        now += rng.exponential() / total;
        if (now >= horizon_minutes) {
            break;
        }
        const double u = rng.uniform01() * total;
        if (u < rate_arrival) {
            if (now > warmup) {
                const int bi = std::min<int>(
                    kBatches - 1, static_cast<int>((now - warmup) / batch_len));
                ++arrivals[bi];
                if (occupied == available) {
                    ++blocked[bi];
                }
            }
            if (occupied < available) {
                ++occupied;
            }
        } else if (u < rate_arrival + rate_depart) {
            --occupied;
        } else if (u < rate_arrival + rate_depart + rate_up) {
            ++available;
        } else {
            --available;  // an idle channel turns unavailable
        }
    }
    long total_arrivals = 0;
    long total_blocked = 0;
    std::vector<double> means;
    means.reserve(kBatches);
    for (int i = 0; i < kBatches; ++i) {
        total_arrivals += arrivals[i];
        total_blocked += blocked[i];
        if (arrivals[i] > 0) {
            means.push_back(static_cast<double>(blocked[i]) / arrivals[i]);
        }
    }
    if (total_arrivals == 0) {
        throw std::runtime_error("mc_chain_blocking: horizon saw no arrivals");
    }
    MCEstimate est;
    est.trials = total_arrivals;
    est.mean = static_cast<double>(total_blocked) / total_arrivals;
    double var = 0.0;
    for (double m : means) {
        var += (m - est.mean) * (m - est.mean);
    }
    if (means.size() > 1) {
        var /= (means.size() - 1.0);
        est.std_error = std::sqrt(var / means.size());
    }
    return est;
}

}  // namespace pvtnet
