#include "chirplayer/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace chirplayer {

namespace {

// Symbol tables above this many samples are synthesized per trial instead.
constexpr std::size_t kMaxBankSamples = std::size_t{1} << 22;

}  // namespace

void Scenario::validate() const {
    superpos.validate();
    if (trials < 1) throw std::domain_error("scenario needs at least one trial");
    LoraConfig{superpos.sf_low, bandwidth_hz, beta}.validate();
    if (std::isnan(gamma_db)) throw std::domain_error("gamma must be a number or +inf");
    if (std::isinf(gamma_db) && gamma_db < 0) throw std::domain_error("gamma of -inf dB is not a channel");
}

TrialRunner::TrialRunner(const Scenario& scenario)
    : scenario_(scenario),
      low_{scenario.superpos.sf_low, scenario.bandwidth_hz, scenario.beta},
      gamma_(db_to_linear(scenario.gamma_db)) {
    scenario_.validate();
    if (low_.total_samples() * low_.n() <= kMaxBankSamples) bank_.emplace(low_);
    const LoraConfig high{scenario.superpos.sf_high, scenario.bandwidth_hz, scenario.beta};
    segment_ = gen_high_segment(high, low_, scenario.superpos.offset);
    if (!scenario.bypass_bpf) {
        filter_.emplace(BandpassFilter::for_segment(low_, scenario.superpos.sf_high, scenario.superpos.offset));
    }
}

TrialOutcome TrialRunner::run(std::uint64_t trial_index) const {
    RandomStream rng = RandomStream::for_trial(scenario_.master_seed, trial_index);
    const auto symbol = static_cast<std::size_t>(rng.uniform_below(low_.n()));
    const int bit = static_cast<int>(rng.uniform_below(2));

    auto synth = [&](std::size_t s) { return bank_ ? bank_->buffer(s) : gen_symbol(low_, s); };

    IqBuffer rx = compose_tx(synth(symbol), segment_, bit, scenario_.superpos);
    add_awgn(rx.samples, gamma_, rng);

    const DemodResult lora = demod_lora(rx, low_);
    const std::size_t cancelled = scenario_.cancellation == Cancellation::ideal ? symbol : lora.s_hat;
    const IqBuffer residual = bank_ ? cancel(rx, bank_->symbol(cancelled)) : reconstruct_and_cancel(rx, cancelled, low_);
    const SuperposDecision decision =
        correlate_bpsk(filter_ ? filter_->apply(residual) : residual, segment_);

    return TrialOutcome{lora.s_hat == symbol, decision.bit_hat == bit};
}

TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_index) {
    return TrialRunner(scenario).run(trial_index);
}

double binomial_stderr(double p, std::uint64_t trials) {
    if (trials == 0) return 0.0;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

ErrorRatePoint ErrorRatePoint::from_counts(double gamma_db, double kappa_db, std::uint64_t trials,
                                           std::uint64_t symbol_errors, std::uint64_t bit_errors) {
    ErrorRatePoint pt;
    pt.gamma_db = gamma_db;
    pt.kappa_db = kappa_db;
    pt.trials = trials;
    pt.symbol_errors = symbol_errors;
    pt.bit_errors = bit_errors;
    pt.ser = static_cast<double>(symbol_errors) / static_cast<double>(trials);
    pt.ber = static_cast<double>(bit_errors) / static_cast<double>(trials);
    pt.stderr_ser = binomial_stderr(pt.ser, trials);
    pt.stderr_ber = binomial_stderr(pt.ber, trials);
    return pt;
}

bool ErrorRatePoint::ser_low_confidence() const { return symbol_errors < kMinReliableErrors; }
bool ErrorRatePoint::ber_low_confidence() const { return bit_errors < kMinReliableErrors; }

unsigned default_workers() {
    if (const char* env = std::getenv("CHIRPLAYER_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw std::invalid_argument(std::string("CHIRPLAYER_WORKERS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ErrorRatePoint> sweep(std::span<const Scenario> scenarios, const SweepOptions& options) {
    if (scenarios.empty()) throw std::domain_error("sweep needs at least one scenario");
    const unsigned workers = std::max(1u, options.workers);
    std::vector<ErrorRatePoint> points;
    points.reserve(scenarios.size());

    for (const Scenario& sc : scenarios) {
        const TrialRunner runner(sc);
        const std::uint64_t chunks = std::min<std::uint64_t>(workers, sc.trials);
        std::vector<std::uint64_t> symbol_errors(chunks, 0), bit_errors(chunks, 0);
        auto work = [&](std::uint64_t c) {
            const std::uint64_t begin = sc.trials * c / chunks;
            const std::uint64_t end = sc.trials * (c + 1) / chunks;
            for (std::uint64_t t = begin; t < end; ++t) {
                const TrialOutcome o = runner.run(t);
                symbol_errors[c] += o.symbol_ok ? 0 : 1;
                bit_errors[c] += o.bit_ok ? 0 : 1;
            }
        };
        if (chunks == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(chunks);
            for (std::uint64_t c = 0; c < chunks; ++c) pool.emplace_back(work, c);
        }
        std::uint64_t se = 0, be = 0;
        for (std::uint64_t c = 0; c < chunks; ++c) {
            se += symbol_errors[c];
            be += bit_errors[c];
        }
        points.push_back(ErrorRatePoint::from_counts(sc.gamma_db, linear_to_db(sc.superpos.kappa), sc.trials, se, be));
    }
    return points;
}

}  // namespace chirplayer
