// Command implementations behind the chirplayer CLI. Each returns the CSV it would
// write, so tests can run commands in-process.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chirplayer/analysis.hpp"
#include "chirplayer/sim.hpp"

namespace chirplayer::cli {

/// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan" otherwise.
[[nodiscard]] std::string format_double(double v);

/// Parses a scalar ("-6", "inf"), an inclusive range "start:stop:step", or a
/// comma-separated list of either.
[[nodiscard]] std::vector<double> parse_grid(std::string_view text);

struct SpectrumOptions {
    int sf_low = 7;
    int sf_high = 12;
    std::optional<std::size_t> offset;  ///< defaults to the DC-centred offset
    std::size_t high_symbol = 0;
};

/// Columns: k, mag_bruteforce, mag_stationary_prediction, in_block_K.
[[nodiscard]] std::string cmd_spectrum(const SpectrumOptions& opt);

enum class WaveformSelector { low, high, composite };
[[nodiscard]] WaveformSelector parse_waveform(std::string_view name);

struct SpectrogramOptions {
    WaveformSelector waveform = WaveformSelector::low;
    int sf_low = 7;
    int sf_high = 12;
    std::optional<std::size_t> offset;
    std::size_t symbol = 0;
    double kappa_db = 0.0;
    int beta = 16;
    double bandwidth_hz = 125000.0;
    std::size_t window = 64;
    std::size_t hop = 16;
    std::size_t nfft = 256;
};

/// Short-time Fourier magnitudes with a Hann window. Header: frame, time_s, then one
/// column per frequency in Hz (ascending, centred on DC); one row per frame.
[[nodiscard]] std::string cmd_spectrogram(const SpectrogramOptions& opt);

struct SimulateOptions {
    int sf_low = 7;
    int sf_high = 12;
    std::optional<std::size_t> offset;
    std::vector<double> kappa_db{3.0, 6.0, 10.0, kInfinity};
    std::vector<double> gamma_db{-6.0};
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int beta = 16;
    double bandwidth_hz = 125000.0;
    bool bypass_bpf = true;
    Cancellation cancellation = Cancellation::detected;
    unsigned workers = 1;
};

[[nodiscard]] Cancellation parse_cancellation(std::string_view name);

/// Builds the scenario list in output order (kappa outer, gamma inner).
[[nodiscard]] std::vector<Scenario> build_scenarios(const SimulateOptions& opt);

/// Columns: gamma_db, kappa_db, trials, ser, ser_stderr, ber, ber_stderr, ser_theory,
/// ber_theory, ser_low_confidence, ber_low_confidence.
[[nodiscard]] std::string cmd_simulate(const SimulateOptions& opt);

struct FeasibleOptions {
    std::vector<double> gamma_db;  ///< empty: -20:10:0.25
    std::vector<double> kappa_db;  ///< empty: 0:40:0.25
    FeasibilityCriteria criteria;
    bool boundary_only = false;
};

/// Columns: gamma_db, kappa_db, lora_ok, high_ok, both_ok.
[[nodiscard]] std::string cmd_feasible(const FeasibleOptions& opt);

enum class CurveKind {
    ser,      ///< ser_lora(eff_snr_low(gamma, kappa)) over gamma x kappa
    ber,      ///< ber_bpsk(eff_snr_high(gamma, kappa)) over gamma x kappa
    ser_eff,  ///< ser_lora over an effective-SNR grid
    ber_eff,  ///< ber_bpsk over a gamma_h grid
};
[[nodiscard]] CurveKind parse_curve(std::string_view name);

struct AnalyzeOptions {
    CurveKind curve = CurveKind::ser;
    int sf_low = 7;
    int beta = 16;
    std::vector<double> gamma_db;  ///< baseline or effective SNR grid depending on curve
    std::vector<double> kappa_db{kInfinity};
};

/// ser:     gamma_db, kappa_db, gamma_l_db, ser_theory
/// ber:     gamma_db, kappa_db, gamma_h_db, ber_theory
/// ser-eff: snr_db, ser_theory
/// ber-eff: snr_db, ber_theory
[[nodiscard]] std::string cmd_analyze(const AnalyzeOptions& opt);

/// Command name, parameters, seed, library version and a UTC timestamp.
[[nodiscard]] nlohmann::json make_manifest(std::string_view command, const nlohmann::json& parameters,
                                           std::optional<std::uint64_t> seed);

[[nodiscard]] nlohmann::json to_json(const SpectrumOptions& opt);
[[nodiscard]] nlohmann::json to_json(const SpectrogramOptions& opt);
[[nodiscard]] nlohmann::json to_json(const SimulateOptions& opt);
[[nodiscard]] nlohmann::json to_json(const FeasibleOptions& opt);
[[nodiscard]] nlohmann::json to_json(const AnalyzeOptions& opt);

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace chirplayer::cli
