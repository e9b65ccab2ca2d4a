// Monte Carlo measurement of the low-SF symbol error rate and the superposed-layer bit
// error rate.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chirplayer/channel.hpp"
#include "chirplayer/demod.hpp"
#include "chirplayer/waveform.hpp"

namespace chirplayer {

/// Which low-SF symbol the receiver subtracts before correlating.
enum class Cancellation {
    detected,  ///< the demodulator's decision s_hat
    ideal,     ///< the transmitted symbol (genie-aided, perfect cancellation)
};

struct Scenario {
    SuperposConfig superpos;
    double gamma_db = kInfinity;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 1;
    int beta = 16;
    double bandwidth_hz = 125000.0;
    bool bypass_bpf = true;
    Cancellation cancellation = Cancellation::detected;

    void validate() const;
};

struct TrialOutcome {
    bool symbol_ok = false;
    bool bit_ok = false;

    bool operator==(const TrialOutcome&) const = default;
};

/// Everything a scenario needs that does not change between trials.
class TrialRunner {
public:
    explicit TrialRunner(const Scenario& scenario);

    /// One end-to-end pass. Deterministic in (master_seed, trial_index).
    [[nodiscard]] TrialOutcome run(std::uint64_t trial_index) const;

    [[nodiscard]] const Scenario& scenario() const { return scenario_; }

private:
    Scenario scenario_;
    LoraConfig low_;
    double gamma_;
    std::optional<SymbolBank> bank_;
    IqBuffer segment_;
    std::optional<BandpassFilter> filter_;
};

[[nodiscard]] TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_index);

struct ErrorRatePoint {
    double gamma_db = 0.0;
    double kappa_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t symbol_errors = 0;
    std::uint64_t bit_errors = 0;
    double ser = 0.0;
    double ber = 0.0;
    double stderr_ser = 0.0;
    double stderr_ber = 0.0;

    /// Fewer than kMinReliableErrors errors: binomial sigma is not trustworthy.
    [[nodiscard]] bool ser_low_confidence() const;
    [[nodiscard]] bool ber_low_confidence() const;

    [[nodiscard]] static ErrorRatePoint from_counts(double gamma_db, double kappa_db, std::uint64_t trials,
                                                    std::uint64_t symbol_errors, std::uint64_t bit_errors);
};

inline constexpr std::uint64_t kMinReliableErrors = 10;

/// sqrt(p (1 - p) / trials).
[[nodiscard]] double binomial_stderr(double p, std::uint64_t trials);

struct SweepOptions {
    unsigned workers = 1;
};

/// Worker count from CHIRPLAYER_WORKERS, falling back to the hardware concurrency.
[[nodiscard]] unsigned default_workers();

/// One point per scenario. Trials are split into contiguous index ranges across
/// workers and the error counts are summed, so the result does not depend on the
/// worker count.
[[nodiscard]] std::vector<ErrorRatePoint> sweep(std::span<const Scenario> scenarios,
                                                const SweepOptions& options = {});

}  // namespace chirplayer
