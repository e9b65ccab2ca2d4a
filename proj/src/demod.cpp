#include "chirplayer/demod.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace chirplayer {

std::size_t argmax_magnitude(std::span<const cplx> bins) {
    if (bins.empty()) throw std::domain_error("argmax over an empty metric");
    std::size_t best = 0;
    double best_mag = std::norm(bins[0]);
    for (std::size_t k = 1; k < bins.size(); ++k) {
        const double mag = std::norm(bins[k]);
        if (mag > best_mag) {
            best = k;
            best_mag = mag;
        }
    }
    return best;
}

DemodResult demod_lora(const IqBuffer& rx, const LoraConfig& cfg) {
    cfg.validate();
    const IqBuffer chips = decimate(rx, rx.oversample);
    if (chips.size() != cfg.n()) {
        throw std::domain_error("demod_lora: " + std::to_string(chips.size()) +
                                " chips after decimation, expected " + std::to_string(cfg.n()));
    }
    DemodResult out;
    out.metric = dft_metric(dechirp(chips, cfg.at_oversample(1)));
    out.s_hat = argmax_magnitude(out.metric.bins);
    out.peak_magnitude = std::abs(out.metric.bins[out.s_hat]);
    return out;
}

IqBuffer cancel(const IqBuffer& rx, std::span<const cplx> reference) {
    if (rx.size() != reference.size()) {
        throw std::domain_error("cancel: received buffer and reference differ in length");
    }
    IqBuffer out = rx;
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] -= reference[i];
    return out;
}

IqBuffer reconstruct_and_cancel(const IqBuffer& rx, std::size_t s_hat, const LoraConfig& cfg_low) {
    const IqBuffer reference = gen_symbol(cfg_low.at_oversample(rx.oversample), s_hat);
    return cancel(rx, reference.samples);
}

SuperposDecision correlate_bpsk(std::span<const cplx> residual, std::span<const cplx> templ) {
    if (residual.size() != templ.size()) {
        throw std::domain_error("correlate_bpsk: residual and template differ in length");
    }
    cplx z{0.0, 0.0};
    for (std::size_t i = 0; i < residual.size(); ++i) z += std::conj(templ[i]) * residual[i];
    return SuperposDecision{z, z.real() >= 0.0 ? 0 : 1};
}

SuperposDecision correlate_bpsk(const IqBuffer& residual, const IqBuffer& templ) {
    return correlate_bpsk(std::span<const cplx>(residual.samples), std::span<const cplx>(templ.samples));
}

namespace {

// Kaiser's empirical formulas for the window shape and length.
double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

}  // namespace

BandpassFilter::BandpassFilter(double sample_rate_hz, double center_hz, double width_hz,
                               double stop_atten_db)
    : sample_rate_hz_(sample_rate_hz), center_hz_(center_hz), width_hz_(width_hz) {
    if (!(sample_rate_hz > 0.0) || !(width_hz > 0.0) || width_hz >= sample_rate_hz) {
        throw std::domain_error("bandpass: width must be positive and below the sample rate");
    }
    if (std::abs(center_hz) + 2.0 * width_hz > sample_rate_hz / 2.0) {
        throw std::domain_error("bandpass: band does not fit inside the Nyquist range");
    }
    if (!(stop_atten_db > 0.0)) throw std::domain_error("bandpass: attenuation must be positive");

    const double pass_edge = width_hz / 2.0;
    const double stop_edge = 2.0 * width_hz;
    const double cutoff = (pass_edge + stop_edge) / 2.0 / sample_rate_hz;  // cycles per sample
    const double transition = 2.0 * std::numbers::pi * (stop_edge - pass_edge) / sample_rate_hz;
    auto order = static_cast<std::size_t>(std::ceil((stop_atten_db - 8.0) / (2.285 * transition)));
    if (order % 2 == 1) ++order;
    const std::size_t half = order / 2;
    const double beta = kaiser_beta(stop_atten_db);
    const double norm = std::cyl_bessel_i(0.0, beta);

    std::vector<double> lowpass(order + 1);
    double dc_gain = 0.0;
    for (std::size_t i = 0; i <= order; ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(half);
        const double sinc =
            t == 0.0 ? 2.0 * cutoff : std::sin(2.0 * std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
        const double ratio = t / static_cast<double>(half);
        const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - ratio * ratio)) / norm;
        lowpass[i] = sinc * window;
        dc_gain += lowpass[i];
    }
    taps_.resize(order + 1);
    for (std::size_t i = 0; i <= order; ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(half);
        taps_[i] = lowpass[i] / dc_gain *
                   std::polar(1.0, 2.0 * std::numbers::pi * center_hz / sample_rate_hz * t);
    }
}

BandpassFilter BandpassFilter::for_segment(const LoraConfig& cfg_low, int sf_high, std::size_t offset) {
    cfg_low.validate();
    const double n_low = static_cast<double>(cfg_low.n());
    const double n_high = std::ldexp(1.0, sf_high);
    const double b = cfg_low.bandwidth_hz;
    // Mean instantaneous frequency of the upchirp over chips [offset, offset + N_l).
    const double center = -b / 2.0 + (static_cast<double>(offset) + n_low / 2.0) * b / n_high;
    return BandpassFilter(cfg_low.sample_rate(), center, 2.0 * b * n_low / n_high);
}

IqBuffer BandpassFilter::apply(const IqBuffer& in) const {
    const std::size_t half = (taps_.size() - 1) / 2;
    const auto len = static_cast<std::ptrdiff_t>(in.size());
    IqBuffer out{std::vector<cplx>(in.size()), in.oversample};
    for (std::ptrdiff_t n = 0; n < len; ++n) {
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < taps_.size(); ++i) {
            const std::ptrdiff_t j = n + static_cast<std::ptrdiff_t>(half) - static_cast<std::ptrdiff_t>(i);
            if (j >= 0 && j < len) acc += taps_[i] * in.samples[static_cast<std::size_t>(j)];
        }
        out.samples[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

cplx BandpassFilter::response(double freq_hz) const {
    const std::size_t half = (taps_.size() - 1) / 2;
    cplx h{0.0, 0.0};
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(half);
        h += taps_[i] * std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate_hz_ * t);
    }
    return h;
}

IqBuffer bandpass(const IqBuffer& residual, const BandpassFilter* filter) {
    if (filter == nullptr) return residual;
    return filter->apply(residual);
}

IqBuffer bandpass(const IqBuffer& residual, double sample_rate_hz, double center_hz, double width_hz) {
    return BandpassFilter(sample_rate_hz, center_hz, width_hz).apply(residual);
}

}  // namespace chirplayer
