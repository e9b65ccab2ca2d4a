// Legacy dechirp-and-DFT demodulation and successive cancellation of the low-SF layer.
#pragma once

#include <span>
#include <vector>

#include "chirplayer/waveform.hpp"

namespace chirplayer {

struct DemodResult {
    std::size_t s_hat = 0;
    DecisionMetric metric;
    double peak_magnitude = 0.0;
};

struct SuperposDecision {
    cplx z;
    int bit_hat = 0;  ///< 0 iff Re(z) >= 0
};

/// argmax_k |Y[k]|, lowest index on ties.
[[nodiscard]] std::size_t argmax_magnitude(std::span<const cplx> bins);

/// Decimates rx to one sample per chip (by its oversample tag), dechirps with the
/// cfg.sf upchirp and picks the strongest DFT bin.
[[nodiscard]] DemodResult demod_lora(const IqBuffer& rx, const LoraConfig& cfg);

/// rx - x_{s_hat}, with the low-SF symbol synthesized at rx's oversampling factor and
/// unit amplitude.
[[nodiscard]] IqBuffer reconstruct_and_cancel(const IqBuffer& rx, std::size_t s_hat,
                                              const LoraConfig& cfg_low);

/// Subtracts an already synthesized reference symbol.
[[nodiscard]] IqBuffer cancel(const IqBuffer& rx, std::span<const cplx> reference);

/// z = sum conj(template[m]) residual[m]; bit from the sign of Re(z).
[[nodiscard]] SuperposDecision correlate_bpsk(const IqBuffer& residual, const IqBuffer& templ);
[[nodiscard]] SuperposDecision correlate_bpsk(std::span<const cplx> residual,
                                              std::span<const cplx> templ);

/// Linear-phase complex band-pass FIR: a Kaiser-windowed sinc low-pass shifted to
/// `center_hz`. The pass band is center +- width/2; the stop band starts at
/// center +- 2 width and is attenuated by at least `stop_atten_db`.
class BandpassFilter {
public:
    BandpassFilter(double sample_rate_hz, double center_hz, double width_hz,
                   double stop_atten_db = 60.0);

    /// Default stage for the superposed layer: width 2 B N_l / N_h around the segment's
    /// mean frequency.
    [[nodiscard]] static BandpassFilter for_segment(const LoraConfig& cfg_low, int sf_high,
                                                    std::size_t offset);

    /// Zero-phase ("same" length) filtering: the group delay is removed so the output
    /// stays time-aligned with the input.
    [[nodiscard]] IqBuffer apply(const IqBuffer& in) const;

    /// H(f) of the designed taps.
    [[nodiscard]] cplx response(double freq_hz) const;

    [[nodiscard]] const std::vector<cplx>& taps() const { return taps_; }
    [[nodiscard]] double center_hz() const { return center_hz_; }
    [[nodiscard]] double width_hz() const { return width_hz_; }
    [[nodiscard]] double sample_rate_hz() const { return sample_rate_hz_; }

private:
    double sample_rate_hz_;
    double center_hz_;
    double width_hz_;
    std::vector<cplx> taps_;
};

/// Applies `filter`, or returns the input unchanged when `filter` is null (bypass).
[[nodiscard]] IqBuffer bandpass(const IqBuffer& residual, const BandpassFilter* filter);

/// Designs and applies a filter in one call.
[[nodiscard]] IqBuffer bandpass(const IqBuffer& residual, double sample_rate_hz, double center_hz,
                                double width_hz);

}  // namespace chirplayer
