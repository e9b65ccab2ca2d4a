// Closed-form and numerical error-rate models, and the interference spectrum that a
// high-SF segment leaves in the low-SF decision metric.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chirplayer/waveform.hpp"

namespace chirplayer {

/// Stationary-phase description of |U[k]|.
///
/// U[k] is a quadratic exponential sum with chirp-rate mismatch p and per-bin linear
/// term q_k. q_k is reduced into [0, 1) (the sum only depends on it modulo 1), so a bin
/// belongs to K when its stationary point -q_k/p lies strictly inside (0, N_l). K is
/// contiguous modulo N_l and may wrap past bin N_l - 1.
struct SpectrumPrediction {
    double p = 0.0;
    std::vector<double> q;
    std::size_t k_start = 0;
    std::size_t k_end = 0;
    std::size_t block_size = 0;            ///< |K| counted from the inequality
    double block_size_predicted = 0.0;     ///< N_l (1 - N_l / N_h)
    double flat_level = 0.0;               ///< 1 / sqrt(N_l |p|)
    std::vector<bool> in_block;

    /// Bins of K in cyclic order starting at k_start.
    [[nodiscard]] std::vector<std::size_t> block_bins() const;
};

/// |U[k]| for k = 0..N_l-1: the high-SF symbol `high_symbol` windowed at `offset`,
/// dechirped with the low-SF upchirp and transformed by the unitary N_l-point DFT.
[[nodiscard]] std::vector<double> u_spectrum_bruteforce(const LoraConfig& cfg_low,
                                                        const LoraConfig& cfg_high, std::size_t offset,
                                                        std::size_t high_symbol = 0);

[[nodiscard]] SpectrumPrediction u_spectrum_stationary(const LoraConfig& cfg_low,
                                                       const LoraConfig& cfg_high, std::size_t offset,
                                                       std::size_t high_symbol = 0);

/// max_k |U[k]|^2 >= sum_k |U[k]|^2 / N, allowing `slack` of absolute error.
[[nodiscard]] bool satisfies_minmax_bound(std::span<const double> magnitudes, double slack = 1e-12);

// Amplitude statistics of the decision bins with P_l = 1.

[[nodiscard]] double rayleigh_cdf(double r, double gamma);
[[nodiscard]] double rayleigh_pdf(double r, double gamma);
/// Rice density of the signal bin with mean amplitude sqrt(n_l).
[[nodiscard]] double rice_pdf(double r, double gamma, std::size_t n_l);
/// log of rice_pdf, finite wherever the density is representable in log form.
[[nodiscard]] double log_rice_pdf(double r, double gamma, std::size_t n_l);

/// Symbol error rate of dechirp-and-DFT detection in AWGN: the probability that the
/// largest of N-1 Rayleigh noise bins reaches the Rice signal bin. gamma_eff = infinity
/// gives 0.
[[nodiscard]] double ser_lora(double gamma_eff, int sf);

/// gamma kappa / (gamma + kappa); either argument may be infinite.
[[nodiscard]] double eff_snr_low(double gamma, double kappa);

/// (gamma / kappa) beta N_l; zero when kappa is infinite.
[[nodiscard]] double eff_snr_high(double gamma, double kappa, int beta, std::size_t n_l);

/// Gaussian tail probability Q(x) = erfc(x / sqrt 2) / 2.
[[nodiscard]] double q_function(double x);

/// Q(sqrt(2 gamma_h)).
[[nodiscard]] double ber_bpsk(double gamma_h);

struct FeasibilityCriteria {
    double lora_threshold_db = -6.0;
    double ber_target = 1e-5;
    int beta = 16;
    int sf_low = 7;
};

struct FeasibleCell {
    double gamma_db = 0.0;
    double kappa_db = 0.0;
    bool lora_ok = false;
    bool high_ok = false;

    [[nodiscard]] bool both_ok() const { return lora_ok && high_ok; }
};

[[nodiscard]] FeasibleCell evaluate_cell(double gamma_db, double kappa_db,
                                         const FeasibilityCriteria& criteria = {});

/// Row-major grid, gamma outer and kappa inner. Both grids must be non-empty and sorted
/// ascending.
[[nodiscard]] std::vector<FeasibleCell> feasible_region(std::span<const double> gamma_grid_db,
                                                        std::span<const double> kappa_grid_db,
                                                        const FeasibilityCriteria& criteria = {});

/// Cells of a feasible_region() grid whose joint feasibility differs from at least one
/// horizontal or vertical neighbour.
[[nodiscard]] std::vector<FeasibleCell> feasibility_boundary(std::span<const FeasibleCell> cells,
                                                             std::size_t gamma_count,
                                                             std::size_t kappa_count);

}  // namespace chirplayer
