#include "chirplayer/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chirplayer {

std::size_t SuperposConfig::centered_offset(int sf_low, int sf_high) {
    return ((std::size_t{1} << sf_high) - (std::size_t{1} << sf_low)) / 2;
}

void SuperposConfig::validate() const {
    LoraConfig{sf_low}.validate();
    LoraConfig{sf_high}.validate();
    if (sf_high <= sf_low) throw std::domain_error("sf_high must exceed sf_low");
    const std::size_t max_offset = (std::size_t{1} << sf_high) - (std::size_t{1} << sf_low);
    if (offset > max_offset) {
        throw std::domain_error("segment offset " + std::to_string(offset) + " exceeds " +
                                std::to_string(max_offset));
    }
    if (!(kappa > 0.0)) throw std::domain_error("kappa must be positive");
}

PowerModel PowerModel::from(double gamma, double kappa) {
    if (!(gamma > 0.0) || !(kappa > 0.0)) throw std::domain_error("gamma and kappa must be positive");
    return PowerModel{1.0, std::isinf(kappa) ? 0.0 : 1.0 / kappa,
                      std::isinf(gamma) ? 0.0 : 1.0 / gamma};
}

IqBuffer compose_tx(const IqBuffer& low_symbol, const IqBuffer& high_segment, int bit,
                    const SuperposConfig& cfg) {
    if (low_symbol.size() != high_segment.size() ||
        low_symbol.oversample != high_segment.oversample) {
        throw std::domain_error("compose_tx: layers differ in length or sampling rate");
    }
    if (bit != 0 && bit != 1) throw std::domain_error("compose_tx: bit must be 0 or 1");
    if (!(cfg.kappa > 0.0)) throw std::domain_error("compose_tx: kappa must be positive");
    IqBuffer out = low_symbol;
    if (std::isinf(cfg.kappa)) return out;
    const double amp = std::sqrt(1.0 / cfg.kappa) * bpsk_symbol(bit);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += amp * high_segment.samples[i];
    return out;
}

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
    // Weyl step on the index keeps the map bijective in trial_index for a fixed seed.
    return RandomStream(mix64(mix64(master_seed) + (trial_index + 1) * 0x9e3779b97f4a7c15ULL));
}

void add_awgn(std::span<cplx> samples, double gamma_linear, RandomStream& rng) {
    if (!(gamma_linear > 0.0)) throw std::domain_error("awgn: SNR must be positive");
    if (std::isinf(gamma_linear)) return;
    const double sigma = std::sqrt(0.5 / gamma_linear);
    for (auto& x : samples) {
        const double re = rng.normal();
        const double im = rng.normal();
        x += cplx(sigma * re, sigma * im);
    }
}

IqBuffer awgn(const IqBuffer& buf, double gamma_linear, RandomStream& rng) {
    IqBuffer out = buf;
    add_awgn(out.samples, gamma_linear, rng);
    return out;
}

double db_to_linear(double db) {
    if (std::isinf(db)) return db > 0 ? kInfinity : 0.0;
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double linear) {
    if (std::isinf(linear)) return kInfinity;
    return 10.0 * std::log10(linear);
}

}  // namespace chirplayer
