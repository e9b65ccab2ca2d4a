// Two-layer transmit composition and the AWGN channel.
#pragma once

#include <cstdint>
#include <limits>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "chirplayer/waveform.hpp"

namespace chirplayer {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Low/high SF pair, segment offset and low-to-high power ratio.
struct SuperposConfig {
    int sf_low = 7;
    int sf_high = 12;
    std::size_t offset = 1984;  ///< base-rate chips into the high-SF upchirp
    double kappa = kInfinity;   ///< P_l / P_h, linear; infinity disables the high layer

    /// (N_h - N_l) / 2, which centres the segment's mean frequency at DC.
    [[nodiscard]] static std::size_t centered_offset(int sf_low, int sf_high);

    void validate() const;
};

/// Powers relative to P_l = 1.
struct PowerModel {
    double p_low = 1.0;
    double p_high = 0.0;
    double p_noise = 0.0;

    /// gamma and kappa are linear; either may be infinite.
    [[nodiscard]] static PowerModel from(double gamma, double kappa);
};

/// BPSK symbol c = 1 - 2 bit.
[[nodiscard]] constexpr double bpsk_symbol(int bit) { return bit == 0 ? 1.0 : -1.0; }

/// low_symbol + sqrt(1/kappa) c high_segment.
[[nodiscard]] IqBuffer compose_tx(const IqBuffer& low_symbol, const IqBuffer& high_segment,
                                  int bit, const SuperposConfig& cfg);

/// Seedable Gaussian source. Per-trial streams come from for_trial(), which maps
/// (master seed, trial index) through a bijective 64-bit mixer so that trials can run
/// in any order on any number of workers.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] static RandomStream for_trial(std::uint64_t master_seed, std::uint64_t trial_index);

    /// Standard normal variate.
    double normal() { return normal_(engine_); }
    /// Uniform integer in [0, bound).
    std::uint64_t uniform_below(std::uint64_t bound) {
        return boost::random::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
    }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;  // ziggurat, exact in distribution
};

/// splitmix64 finalizer; a bijection on 64-bit words.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);

/// Adds CN(0, 1/gamma) to every sample, independent of the oversampling factor.
/// gamma = infinity returns the input unchanged.
[[nodiscard]] IqBuffer awgn(const IqBuffer& buf, double gamma_linear, RandomStream& rng);

/// In-place variant used on the simulator hot path.
void add_awgn(std::span<cplx> samples, double gamma_linear, RandomStream& rng);

[[nodiscard]] double db_to_linear(double db);
[[nodiscard]] double linear_to_db(double linear);

}  // namespace chirplayer
