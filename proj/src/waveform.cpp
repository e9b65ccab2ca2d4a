#include "chirplayer/waveform.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace chirplayer {

namespace {

// Sample m of symbol s at beta samples per chip.
//
// The phase in cycles is an exact rational num/den with den = 2 beta^2 N:
//   num = m^2 + beta (2s - N) m                         before the fold,
//   num -= 2 beta N m - 2 beta^2 N (N - s)              after it (shift by -B).
// Reducing num modulo den in integers keeps the phase accurate for long symbols and
// makes the decimated samples identical to the critically sampled ones.
cplx chirp_sample(std::int64_t n_chips, std::int64_t beta, std::int64_t symbol, std::int64_t m) {
    const std::int64_t den = 2 * beta * beta * n_chips;
    std::int64_t num = m * m + beta * (2 * symbol - n_chips) * m;
    if (m >= beta * (n_chips - symbol)) {
        num -= 2 * beta * n_chips * m - 2 * beta * beta * n_chips * (n_chips - symbol);
    }
    std::int64_t r = num % den;
    if (r < 0) r += den;
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(den);
    return {std::cos(phase), std::sin(phase)};
}

void fill_symbol(const LoraConfig& cfg, std::size_t symbol, std::size_t first, std::size_t count,
                 cplx* out) {
    const auto n = static_cast<std::int64_t>(cfg.n());
    const auto beta = static_cast<std::int64_t>(cfg.oversample);
    const auto s = static_cast<std::int64_t>(symbol);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = chirp_sample(n, beta, s, static_cast<std::int64_t>(first + i));
    }
}

void check_symbol(const LoraConfig& cfg, std::size_t symbol) {
    if (symbol >= cfg.n()) {
        throw std::domain_error("symbol index " + std::to_string(symbol) + " out of range for SF" +
                                std::to_string(cfg.sf));
    }
}

}  // namespace

void LoraConfig::validate() const {
    if (sf < kMinSpreadingFactor || sf > kMaxSpreadingFactor) {
        throw std::domain_error("spreading factor must be in [2, 12], got " + std::to_string(sf));
    }
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
        throw std::domain_error("bandwidth must be positive and finite");
    }
    if (oversample < 1 || oversample > kMaxOversample) {
        throw std::domain_error("oversampling factor must be in [1, 256], got " +
                                std::to_string(oversample));
    }
}

double IqBuffer::energy() const {
    double e = 0.0;
    for (const auto& x : samples) e += std::norm(x);
    return e;
}

double DecisionMetric::energy() const {
    double e = 0.0;
    for (const auto& y : bins) e += std::norm(y);
    return e;
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

IqBuffer gen_symbol(const LoraConfig& cfg, std::size_t symbol) {
    cfg.validate();
    check_symbol(cfg, symbol);
    IqBuffer out{std::vector<cplx>(cfg.total_samples()), cfg.oversample};
    fill_symbol(cfg, symbol, 0, out.samples.size(), out.samples.data());
    return out;
}

IqBuffer gen_symbol_window(const LoraConfig& cfg_high, std::size_t symbol, std::size_t offset,
                           std::size_t chips) {
    cfg_high.validate();
    check_symbol(cfg_high, symbol);
    if (chips == 0 || offset + chips > cfg_high.n()) {
        throw std::domain_error("window [" + std::to_string(offset) + ", " +
                                std::to_string(offset + chips) + ") exceeds the SF" +
                                std::to_string(cfg_high.sf) + " symbol");
    }
    const auto beta = static_cast<std::size_t>(cfg_high.oversample);
    IqBuffer out{std::vector<cplx>(chips * beta), cfg_high.oversample};
    fill_symbol(cfg_high, symbol, offset * beta, out.samples.size(), out.samples.data());
    return out;
}

IqBuffer gen_high_segment(const LoraConfig& cfg_high, const LoraConfig& cfg_low,
                          std::size_t offset) {
    cfg_low.validate();
    if (cfg_high.sf <= cfg_low.sf) {
        throw std::domain_error("high spreading factor must exceed the low one");
    }
    if (cfg_high.oversample != cfg_low.oversample || cfg_high.bandwidth_hz != cfg_low.bandwidth_hz) {
        throw std::domain_error("high and low configurations must share bandwidth and oversampling");
    }
    if (offset > cfg_high.n() - cfg_low.n()) {
        throw std::domain_error("segment offset " + std::to_string(offset) + " exceeds N_h - N_l");
    }
    return gen_symbol_window(cfg_high, 0, offset, cfg_low.n());
}

IqBuffer dechirp(const IqBuffer& buf, const LoraConfig& cfg) {
    cfg.validate();
    if (buf.oversample != 1) throw std::domain_error("dechirp expects a critically sampled buffer");
    if (buf.size() != cfg.n()) {
        throw std::domain_error("dechirp: buffer length " + std::to_string(buf.size()) +
                                " does not match N = " + std::to_string(cfg.n()));
    }
    IqBuffer out{buf.samples, 1};
    const auto n = static_cast<std::int64_t>(cfg.n());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] *= std::conj(chirp_sample(n, 1, 0, static_cast<std::int64_t>(i)));
    }
    return out;
}

DecisionMetric dft_metric(const IqBuffer& buf) {
    if (!is_power_of_two(buf.size())) {
        throw std::domain_error("dft_metric: length " + std::to_string(buf.size()) +
                                " is not a power of two");
    }
    DecisionMetric out{std::vector<cplx>(buf.size())};
    detail::fft_forward(buf.samples, out.bins);
    const double scale = 1.0 / std::sqrt(static_cast<double>(buf.size()));
    for (auto& y : out.bins) y *= scale;
    return out;
}

IqBuffer decimate(const IqBuffer& buf, int beta) {
    if (beta < 1) throw std::domain_error("decimation factor must be positive");
    const auto step = static_cast<std::size_t>(beta);
    if (buf.size() % step != 0) {
        throw std::domain_error("decimate: length " + std::to_string(buf.size()) +
                                " not divisible by " + std::to_string(beta));
    }
    const int tag = buf.oversample % beta == 0 ? buf.oversample / beta : 1;
    IqBuffer out{std::vector<cplx>(buf.size() / step), tag};
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = buf.samples[i * step];
    return out;
}

SymbolBank::SymbolBank(const LoraConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t len = cfg_.total_samples();
    table_.resize(len * cfg_.n());
    for (std::size_t s = 0; s < cfg_.n(); ++s) fill_symbol(cfg_, s, 0, len, table_.data() + s * len);
}

std::span<const cplx> SymbolBank::symbol(std::size_t s) const {
    check_symbol(cfg_, s);
    const std::size_t len = cfg_.total_samples();
    return {table_.data() + s * len, len};
}

IqBuffer SymbolBank::buffer(std::size_t s) const {
    auto view = symbol(s);
    return IqBuffer{{view.begin(), view.end()}, cfg_.oversample};
}

}  // namespace chirplayer
