// LoRa baseband chirp synthesis, dechirping and the unitary decision DFT.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace chirplayer {

using cplx = std::complex<double>;

inline constexpr int kMinSpreadingFactor = 2;
inline constexpr int kMaxSpreadingFactor = 12;
inline constexpr int kMaxOversample = 256;

/// Spreading factor, bandwidth and receiver oversampling of one LoRa symbol stream.
struct LoraConfig {
    int sf = 7;
    double bandwidth_hz = 125000.0;
    int oversample = 1;

    /// Chips per symbol, 2^sf.
    [[nodiscard]] std::size_t n() const { return std::size_t{1} << sf; }
    [[nodiscard]] std::size_t total_samples() const {
        return n() * static_cast<std::size_t>(oversample);
    }
    [[nodiscard]] double sample_rate() const { return bandwidth_hz * oversample; }
    [[nodiscard]] double symbol_duration() const {
        return static_cast<double>(n()) / bandwidth_hz;
    }

    /// Same symbol stream at another oversampling factor.
    [[nodiscard]] LoraConfig at_oversample(int beta) const {
        return LoraConfig{sf, bandwidth_hz, beta};
    }

    /// Throws std::domain_error when any field is out of range.
    void validate() const;
};

/// Complex baseband samples tagged with the oversampling factor they were taken at.
struct IqBuffer {
    std::vector<cplx> samples;
    int oversample = 1;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] double energy() const;
    [[nodiscard]] double mean_power() const { return energy() / static_cast<double>(size()); }
};

/// DFT bins Y[k] produced by the legacy demodulator.
struct DecisionMetric {
    std::vector<cplx> bins;

    [[nodiscard]] std::size_t size() const { return bins.size(); }
    [[nodiscard]] double energy() const;
};

/// Symbol `symbol` of `cfg`, sampled at cfg.oversample samples per chip.
///
/// At oversample 1 this is x_s[n] = exp(j 2pi/N (n^2/2 + (s - N/2) n)). Above that the
/// instantaneous frequency is folded explicitly at +B/2: the sweep is split at
/// m_fold = beta (N - s) and the second piece is shifted down by B with continuous
/// phase, so the waveform stays inside [-B/2, B/2) and every beta-th sample equals the
/// critically sampled value bit for bit.
[[nodiscard]] IqBuffer gen_symbol(const LoraConfig& cfg, std::size_t symbol);

/// The N_l-chip window of the high-SF upchirp starting at chip `offset`, sampled at the
/// shared oversampling factor. Unit modulus, so its mean power is 1.
[[nodiscard]] IqBuffer gen_high_segment(const LoraConfig& cfg_high, const LoraConfig& cfg_low,
                                        std::size_t offset);

/// Like gen_high_segment but for an arbitrary high-SF symbol index; the window may span
/// the frequency fold of that symbol.
[[nodiscard]] IqBuffer gen_symbol_window(const LoraConfig& cfg_high, std::size_t symbol,
                                         std::size_t offset, std::size_t chips);

/// y[n] = conj(x_0[n]) r[n]. Critically sampled input only.
[[nodiscard]] IqBuffer dechirp(const IqBuffer& buf, const LoraConfig& cfg);

/// Y[k] = 1/sqrt(N) sum_n y[n] exp(-j 2pi k n / N). Length must be a power of two.
[[nodiscard]] DecisionMetric dft_metric(const IqBuffer& buf);

/// Keeps samples 0, beta, 2 beta, ... with no anti-alias filter.
[[nodiscard]] IqBuffer decimate(const IqBuffer& buf, int beta);

/// All N symbols of one configuration, synthesized once. Used by the simulator where
/// the same symbols are modulated and reconstructed many times.
class SymbolBank {
public:
    explicit SymbolBank(const LoraConfig& cfg);

    [[nodiscard]] const LoraConfig& config() const { return cfg_; }
    [[nodiscard]] std::span<const cplx> symbol(std::size_t s) const;
    [[nodiscard]] IqBuffer buffer(std::size_t s) const;

private:
    LoraConfig cfg_;
    std::vector<cplx> table_;
};

[[nodiscard]] bool is_power_of_two(std::size_t v);

}  // namespace chirplayer
