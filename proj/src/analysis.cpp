#include "chirplayer/analysis.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "chirplayer/channel.hpp"

namespace chirplayer {

namespace {

void check_pair(const LoraConfig& cfg_low, const LoraConfig& cfg_high, std::size_t offset,
                std::size_t high_symbol) {
    cfg_low.validate();
    cfg_high.validate();
    if (cfg_high.sf <= cfg_low.sf) {
        throw std::domain_error("SF_h must exceed SF_l (equal factors give p = 0)");
    }
    if (offset > cfg_high.n() - cfg_low.n()) {
        throw std::domain_error("offset " + std::to_string(offset) + " exceeds N_h - N_l");
    }
    if (high_symbol >= cfg_high.n()) throw std::domain_error("high-SF symbol index out of range");
}

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

}  // namespace

std::vector<std::size_t> SpectrumPrediction::block_bins() const {
    std::vector<std::size_t> bins;
    bins.reserve(block_size);
    const std::size_t n = in_block.size();
    for (std::size_t i = 0; i < block_size; ++i) bins.push_back((k_start + i) % n);
    return bins;
}

std::vector<double> u_spectrum_bruteforce(const LoraConfig& cfg_low, const LoraConfig& cfg_high,
                                          std::size_t offset, std::size_t high_symbol) {
    check_pair(cfg_low, cfg_high, offset, high_symbol);
    const LoraConfig low = cfg_low.at_oversample(1);
    const IqBuffer segment = gen_symbol_window(cfg_high.at_oversample(1), high_symbol, offset, low.n());
    const DecisionMetric metric = dft_metric(dechirp(segment, low));
    std::vector<double> mags(metric.size());
    std::transform(metric.bins.begin(), metric.bins.end(), mags.begin(),
                   [](const cplx& y) { return std::abs(y); });
    return mags;
}

SpectrumPrediction u_spectrum_stationary(const LoraConfig& cfg_low, const LoraConfig& cfg_high,
                                         std::size_t offset, std::size_t high_symbol) {
    check_pair(cfg_low, cfg_high, offset, high_symbol);
    const auto n_low = static_cast<std::int64_t>(cfg_low.n());
    const auto n_high = static_cast<std::int64_t>(cfg_high.n());
    const auto ratio = n_high / n_low;

    SpectrumPrediction out;
    out.p = static_cast<double>(n_low - n_high) / static_cast<double>(n_low * n_high);
    out.flat_level = 1.0 / std::sqrt(static_cast<double>(n_low) * std::abs(out.p));
    out.block_size_predicted =
        static_cast<double>(n_low) * (1.0 - static_cast<double>(n_low) / static_cast<double>(n_high));
    out.q.resize(static_cast<std::size_t>(n_low));
    out.in_block.resize(static_cast<std::size_t>(n_low));

    // q_k N_h = offset + s_h - k N_h / N_l is an integer; 0 < -q_k/p < N_l reduces to
    // 0 < (q_k mod 1) N_h < N_h - N_l.
    const auto base = static_cast<std::int64_t>(offset + high_symbol);
    for (std::int64_t k = 0; k < n_low; ++k) {
        std::int64_t num = (base - k * ratio) % n_high;
        if (num < 0) num += n_high;
        const auto idx = static_cast<std::size_t>(k);
        out.q[idx] = static_cast<double>(num) / static_cast<double>(n_high);
        out.in_block[idx] = num > 0 && num < n_high - n_low;
    }

    const std::size_t n = out.in_block.size();
    out.block_size = static_cast<std::size_t>(std::count(out.in_block.begin(), out.in_block.end(), true));
    if (out.block_size == 0 || out.block_size == n) {
        out.k_start = 0;
        out.k_end = out.block_size == 0 ? 0 : n - 1;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (out.in_block[k] && !out.in_block[(k + n - 1) % n]) {
            out.k_start = k;
            break;
        }
    }
    out.k_end = (out.k_start + out.block_size - 1) % n;
    return out;
}

bool satisfies_minmax_bound(std::span<const double> magnitudes, double slack) {
    if (magnitudes.empty()) return true;
    double energy = 0.0;
    double peak = 0.0;
    for (double m : magnitudes) {
        energy += m * m;
        peak = std::max(peak, m * m);
    }
    return peak + slack >= energy / static_cast<double>(magnitudes.size());
}

double rayleigh_cdf(double r, double gamma) {
    if (r < 0.0) throw std::domain_error("rayleigh_cdf: negative amplitude");
    if (!(gamma > 0.0)) throw std::domain_error("rayleigh_cdf: SNR must be positive");
    return -std::expm1(-r * r * gamma);
}

double rayleigh_pdf(double r, double gamma) {
    if (r < 0.0) throw std::domain_error("rayleigh_pdf: negative amplitude");
    if (!(gamma > 0.0)) throw std::domain_error("rayleigh_pdf: SNR must be positive");
    return 2.0 * r * gamma * std::exp(-r * r * gamma);
}

double log_rice_pdf(double r, double gamma, std::size_t n_l) {
    if (r < 0.0) throw std::domain_error("rice_pdf: negative amplitude");
    if (!(gamma > 0.0) || std::isinf(gamma)) throw std::domain_error("rice_pdf: SNR must be positive and finite");
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    disable_gsl_abort();
    const double a = std::sqrt(static_cast<double>(n_l));
    const double x = 2.0 * r * gamma * a;
    // I0(x) = exp(x) I0e(x); the exp(x) term is folded into the Gaussian exponent.
    const double d = r - a;
    return std::log(2.0 * r * gamma) - gamma * d * d + std::log(gsl_sf_bessel_I0_scaled(x));
}

double rice_pdf(double r, double gamma, std::size_t n_l) {
    return std::exp(log_rice_pdf(r, gamma, n_l));
}

namespace {

struct SerIntegrand {
    double gamma;
    std::size_t n;
};

// (1 - F_Ra(r)^(N-1)) f_Ri(r), written to keep full relative precision when the result
// is far below 1.
double ser_integrand(double r, void* params) {
    const auto& p = *static_cast<const SerIntegrand*>(params);
    if (r <= 0.0) return 0.0;
    const double log_f = std::log1p(-std::exp(-r * r * p.gamma));
    const double miss = -std::expm1(static_cast<double>(p.n - 1) * log_f);
    return miss * std::exp(log_rice_pdf(r, p.gamma, p.n));
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

}  // namespace

double ser_lora(double gamma_eff, int sf) {
    LoraConfig{sf}.validate();
    if (!(gamma_eff > 0.0)) throw std::domain_error("ser_lora: SNR must be positive");
    if (std::isinf(gamma_eff)) return 0.0;
    disable_gsl_abort();

    const std::size_t n = std::size_t{1} << sf;
    const double a = std::sqrt(static_cast<double>(n));
    const double sigma = std::sqrt(0.5 / gamma_eff);
    // The Rice tail beyond a + 9 sigma carries less than 1e-18 of the mass.
    const double upper = a + 9.0 * sigma;

    // Breakpoints around the Rice peak and around a/2, where the product of the Rice
    // density and the Rayleigh-maximum tail peaks at high SNR.
    std::vector<double> pts{0.0, upper};
    for (double centre : {a / 2.0, a}) {
        for (double k : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
            const double x = centre + k * sigma;
            if (x > 0.0 && x < upper) pts.push_back(x);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    constexpr std::size_t kLimit = 2000;
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(gsl_integration_workspace_alloc(kLimit));
    SerIntegrand params{gamma_eff, n};
    gsl_function fn{&ser_integrand, &params};
    double result = 0.0;
    double abserr = 0.0;
    const int status =
        gsl_integration_qagp(&fn, pts.data(), pts.size(), 0.0, 1e-10, kLimit, ws.get(), &result, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND) {
        throw std::runtime_error(std::string("ser_lora: quadrature failed: ") + gsl_strerror(status));
    }
    return std::clamp(result, 0.0, 1.0);
}

double eff_snr_low(double gamma, double kappa) {
    if (!(gamma > 0.0) || !(kappa > 0.0)) throw std::domain_error("eff_snr_low: inputs must be positive");
    if (std::isinf(kappa)) return gamma;
    if (std::isinf(gamma)) return kappa;
    return gamma * kappa / (gamma + kappa);
}

double eff_snr_high(double gamma, double kappa, int beta, std::size_t n_l) {
    if (!(gamma > 0.0) || !(kappa > 0.0) || beta < 1 || n_l == 0) {
        throw std::domain_error("eff_snr_high: inputs must be positive");
    }
    if (std::isinf(kappa)) return 0.0;
    return gamma / kappa * static_cast<double>(beta) * static_cast<double>(n_l);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ber_bpsk(double gamma_h) {
    if (!(gamma_h >= 0.0)) throw std::domain_error("ber_bpsk: SNR must be non-negative");
    return q_function(std::sqrt(2.0 * gamma_h));
}

FeasibleCell evaluate_cell(double gamma_db, double kappa_db, const FeasibilityCriteria& criteria) {
    const double gamma = db_to_linear(gamma_db);
    const double kappa = db_to_linear(kappa_db);
    const double gamma_l = eff_snr_low(gamma, kappa);
    const double gamma_h = eff_snr_high(gamma, kappa, criteria.beta, std::size_t{1} << criteria.sf_low);
    FeasibleCell cell;
    cell.gamma_db = gamma_db;
    cell.kappa_db = kappa_db;
    cell.lora_ok = linear_to_db(gamma_l) >= criteria.lora_threshold_db;
    cell.high_ok = ber_bpsk(gamma_h) <= criteria.ber_target;
    return cell;
}

std::vector<FeasibleCell> feasible_region(std::span<const double> gamma_grid_db,
                                          std::span<const double> kappa_grid_db,
                                          const FeasibilityCriteria& criteria) {
    if (gamma_grid_db.empty() || kappa_grid_db.empty()) {
        throw std::domain_error("feasible_region: grids must be non-empty");
    }
    if (!std::is_sorted(gamma_grid_db.begin(), gamma_grid_db.end()) ||
        !std::is_sorted(kappa_grid_db.begin(), kappa_grid_db.end())) {
        throw std::domain_error("feasible_region: grids must be sorted ascending");
    }
    LoraConfig{criteria.sf_low}.validate();
    std::vector<FeasibleCell> cells;
    cells.reserve(gamma_grid_db.size() * kappa_grid_db.size());
    for (double g : gamma_grid_db) {
        for (double k : kappa_grid_db) cells.push_back(evaluate_cell(g, k, criteria));
    }
    return cells;
}

std::vector<FeasibleCell> feasibility_boundary(std::span<const FeasibleCell> cells,
                                               std::size_t gamma_count, std::size_t kappa_count) {
    if (cells.size() != gamma_count * kappa_count) {
        throw std::domain_error("feasibility_boundary: grid shape does not match cell count");
    }
    std::vector<FeasibleCell> edge;
    auto at = [&](std::size_t i, std::size_t j) { return cells[i * kappa_count + j].both_ok(); };
    for (std::size_t i = 0; i < gamma_count; ++i) {
        for (std::size_t j = 0; j < kappa_count; ++j) {
            const bool v = at(i, j);
            const bool changes = (i > 0 && at(i - 1, j) != v) || (i + 1 < gamma_count && at(i + 1, j) != v) ||
                                 (j > 0 && at(i, j - 1) != v) || (j + 1 < kappa_count && at(i, j + 1) != v);
            if (changes) edge.push_back(cells[i * kappa_count + j]);
        }
    }
    return edge;
}

}  // namespace chirplayer
