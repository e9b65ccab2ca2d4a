#include "commands.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "chirplayer/analysis.hpp"
#include "chirplayer/channel.hpp"
#include "chirplayer/waveform.hpp"

namespace chirplayer::cli {

namespace {

class CsvWriter {
public:
    CsvWriter() = default;
    explicit CsvWriter(std::initializer_list<std::string_view> header) { row(header); }

    void row(std::initializer_list<std::string_view> cells) {
        bool first = true;
        for (auto c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

std::string_view flag(bool v) { return v ? "true" : "false"; }

std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

double parse_number(std::string_view text) {
    if (text == "inf" || text == "+inf") return kInfinity;
    if (text == "-inf") return -kInfinity;
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

std::size_t resolve_offset(const std::optional<std::size_t>& offset, int sf_low, int sf_high) {
    if (offset) return *offset;
    if (sf_high <= sf_low) throw std::domain_error("sf_high must exceed sf_low");
    return SuperposConfig::centered_offset(sf_low, sf_high);
}

std::vector<double> default_grid(double start, double stop, double step) {
    return parse_grid(format_double(start) + ":" + format_double(stop) + ":" + format_double(step));
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return {buf.data(), ptr};
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) throw std::invalid_argument("empty grid element");

        const auto c1 = item.find(':');
        if (c1 == std::string_view::npos) {
            out.push_back(parse_number(item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw std::invalid_argument("range must be start:stop:step");
        const double start = parse_number(item.substr(0, c1));
        const double stop = parse_number(item.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_number(item.substr(c2 + 1));
        if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) || !(step > 0.0) || stop < start) {
            throw std::invalid_argument("range needs finite start <= stop and a positive step");
        }
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 10'000'000) throw std::invalid_argument("range has too many points");
        for (std::size_t i = 0; i < count; ++i) {
            // Round away accumulated binary error so 0.1-style steps print cleanly.
            const double v = start + static_cast<double>(i) * step;
            out.push_back(std::round(v * 1e9) / 1e9);
        }
    }
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

std::string cmd_spectrum(const SpectrumOptions& opt) {
    const std::size_t offset = resolve_offset(opt.offset, opt.sf_low, opt.sf_high);
    const LoraConfig low{opt.sf_low};
    const LoraConfig high{opt.sf_high};
    const auto mags = u_spectrum_bruteforce(low, high, offset, opt.high_symbol);
    const auto pred = u_spectrum_stationary(low, high, offset, opt.high_symbol);

    CsvWriter csv{"k", "mag_bruteforce", "mag_stationary_prediction", "in_block_K"};
    for (std::size_t k = 0; k < mags.size(); ++k) {
        const bool in = pred.in_block[k];
        csv.row({fmt_int(k), format_double(mags[k]), format_double(in ? pred.flat_level : 0.0), flag(in)});
    }
    return csv.str();
}

WaveformSelector parse_waveform(std::string_view name) {
    if (name == "low") return WaveformSelector::low;
    if (name == "high") return WaveformSelector::high;
    if (name == "composite") return WaveformSelector::composite;
    throw std::invalid_argument("unknown waveform '" + std::string(name) + "' (low, high, composite)");
}

std::string cmd_spectrogram(const SpectrogramOptions& opt) {
    const LoraConfig low{opt.sf_low, opt.bandwidth_hz, opt.beta};
    low.validate();
    if (opt.window < 2 || opt.hop < 1) throw std::domain_error("spectrogram window must be >= 2 and hop >= 1");
    if (!is_power_of_two(opt.nfft) || opt.nfft < opt.window) {
        throw std::domain_error("nfft must be a power of two no smaller than the window");
    }

    auto high_segment = [&] {
        const std::size_t offset = resolve_offset(opt.offset, opt.sf_low, opt.sf_high);
        return gen_high_segment(LoraConfig{opt.sf_high, opt.bandwidth_hz, opt.beta}, low, offset);
    };
    IqBuffer wave;
    switch (opt.waveform) {
        case WaveformSelector::low:
            wave = gen_symbol(low, opt.symbol);
            break;
        case WaveformSelector::high:
            wave = high_segment();
            break;
        case WaveformSelector::composite: {
            const SuperposConfig sp{opt.sf_low, opt.sf_high, resolve_offset(opt.offset, opt.sf_low, opt.sf_high),
                                    db_to_linear(opt.kappa_db)};
            wave = compose_tx(gen_symbol(low, opt.symbol), high_segment(), 0, sp);
            break;
        }
    }
    if (wave.size() < opt.window) throw std::domain_error("window longer than the waveform");

    std::vector<double> hann(opt.window);
    double wsum = 0.0;
    for (std::size_t i = 0; i < opt.window; ++i) {
        hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(opt.window)));
        wsum += hann[i];
    }
    const double fs = low.sample_rate();
    const double scale = std::sqrt(static_cast<double>(opt.nfft)) / wsum;

    std::vector<std::string> header{"frame", "time_s"};
    for (std::size_t j = 0; j < opt.nfft; ++j) {
        const double f = (static_cast<double>(j) - static_cast<double>(opt.nfft / 2)) * fs / static_cast<double>(opt.nfft);
        header.push_back(format_double(f));
    }
    CsvWriter csv;
    csv.raw_row(header);

    IqBuffer frame{std::vector<cplx>(opt.nfft), opt.beta};
    for (std::size_t start = 0, f = 0; start + opt.window <= wave.size(); start += opt.hop, ++f) {
        std::fill(frame.samples.begin(), frame.samples.end(), cplx{});
        for (std::size_t i = 0; i < opt.window; ++i) frame.samples[i] = hann[i] * wave.samples[start + i];
        const DecisionMetric spec = dft_metric(frame);
        std::vector<std::string> row{fmt_int(f),
                                     format_double((static_cast<double>(start) + static_cast<double>(opt.window) / 2.0) / fs)};
        for (std::size_t j = 0; j < opt.nfft; ++j) {
            row.push_back(format_double(std::abs(spec.bins[(j + opt.nfft / 2) % opt.nfft]) * scale));
        }
        csv.raw_row(row);
    }
    return csv.str();
}

Cancellation parse_cancellation(std::string_view name) {
    if (name == "detected") return Cancellation::detected;
    if (name == "ideal") return Cancellation::ideal;
    throw std::invalid_argument("unknown cancellation mode '" + std::string(name) + "' (detected, ideal)");
}

std::vector<Scenario> build_scenarios(const SimulateOptions& opt) {
    if (opt.trials < 1) throw std::domain_error("trials must be at least 1");
    if (opt.gamma_db.empty() || opt.kappa_db.empty()) throw std::domain_error("gamma and kappa grids must be non-empty");
    const std::size_t offset = resolve_offset(opt.offset, opt.sf_low, opt.sf_high);
    std::vector<Scenario> out;
    for (double kdb : opt.kappa_db) {
        for (double gdb : opt.gamma_db) {
            Scenario sc;
            sc.superpos = SuperposConfig{opt.sf_low, opt.sf_high, offset, db_to_linear(kdb)};
            sc.gamma_db = gdb;
            sc.trials = opt.trials;
            sc.master_seed = opt.seed;
            sc.beta = opt.beta;
            sc.bandwidth_hz = opt.bandwidth_hz;
            sc.bypass_bpf = opt.bypass_bpf;
            sc.cancellation = opt.cancellation;
            sc.validate();
            out.push_back(sc);
        }
    }
    return out;
}

std::string cmd_simulate(const SimulateOptions& opt) {
    const auto scenarios = build_scenarios(opt);
    const auto points = sweep(scenarios, SweepOptions{opt.workers});
    const std::size_t n_low = std::size_t{1} << opt.sf_low;

    CsvWriter csv{"gamma_db", "kappa_db", "trials", "ser", "ser_stderr", "ber", "ber_stderr",
                  "ser_theory", "ber_theory", "ser_low_confidence", "ber_low_confidence"};
    const std::size_t gamma_count = opt.gamma_db.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        const Scenario& sc = scenarios[i];
        // Report the requested value rather than the dB -> linear -> dB round trip.
        const double kappa_db = opt.kappa_db[i / gamma_count];
        const double gamma = db_to_linear(sc.gamma_db);
        const double ser_th = ser_lora(eff_snr_low(gamma, sc.superpos.kappa), opt.sf_low);
        const double ber_th = ber_bpsk(eff_snr_high(gamma, sc.superpos.kappa, opt.beta, n_low));
        csv.row({format_double(pt.gamma_db), format_double(kappa_db), fmt_int(pt.trials), format_double(pt.ser),
                 format_double(pt.stderr_ser), format_double(pt.ber), format_double(pt.stderr_ber),
                 format_double(ser_th), format_double(ber_th), flag(pt.ser_low_confidence()),
                 flag(pt.ber_low_confidence())});
    }
    return csv.str();
}

std::string cmd_feasible(const FeasibleOptions& opt) {
    const auto gammas = opt.gamma_db.empty() ? default_grid(-20.0, 10.0, 0.25) : opt.gamma_db;
    const auto kappas = opt.kappa_db.empty() ? default_grid(0.0, 40.0, 0.25) : opt.kappa_db;
    auto cells = feasible_region(gammas, kappas, opt.criteria);
    if (opt.boundary_only) cells = feasibility_boundary(cells, gammas.size(), kappas.size());

    CsvWriter csv{"gamma_db", "kappa_db", "lora_ok", "high_ok", "both_ok"};
    for (const auto& c : cells) {
        csv.row({format_double(c.gamma_db), format_double(c.kappa_db), flag(c.lora_ok), flag(c.high_ok),
                 flag(c.both_ok())});
    }
    return csv.str();
}

CurveKind parse_curve(std::string_view name) {
    if (name == "ser") return CurveKind::ser;
    if (name == "ber") return CurveKind::ber;
    if (name == "ser-eff") return CurveKind::ser_eff;
    if (name == "ber-eff") return CurveKind::ber_eff;
    throw std::invalid_argument("unknown curve '" + std::string(name) + "' (ser, ber, ser-eff, ber-eff)");
}

std::string cmd_analyze(const AnalyzeOptions& opt) {
    if (opt.gamma_db.empty()) throw std::domain_error("analyze needs an SNR grid");
    const std::size_t n_low = std::size_t{1} << opt.sf_low;
    LoraConfig{opt.sf_low, 125000.0, opt.beta}.validate();

    switch (opt.curve) {
        case CurveKind::ser: {
            CsvWriter csv{"gamma_db", "kappa_db", "gamma_l_db", "ser_theory"};
            for (double kdb : opt.kappa_db) {
                for (double gdb : opt.gamma_db) {
                    const double gl = eff_snr_low(db_to_linear(gdb), db_to_linear(kdb));
                    csv.row({format_double(gdb), format_double(kdb), format_double(linear_to_db(gl)),
                             format_double(ser_lora(gl, opt.sf_low))});
                }
            }
            return csv.str();
        }
        case CurveKind::ber: {
            CsvWriter csv{"gamma_db", "kappa_db", "gamma_h_db", "ber_theory"};
            for (double kdb : opt.kappa_db) {
                for (double gdb : opt.gamma_db) {
                    const double gh = eff_snr_high(db_to_linear(gdb), db_to_linear(kdb), opt.beta, n_low);
                    csv.row({format_double(gdb), format_double(kdb),
                             format_double(gh > 0.0 ? linear_to_db(gh) : -kInfinity), format_double(ber_bpsk(gh))});
                }
            }
            return csv.str();
        }
        case CurveKind::ser_eff: {
            CsvWriter csv{"snr_db", "ser_theory"};
            for (double db : opt.gamma_db) csv.row({format_double(db), format_double(ser_lora(db_to_linear(db), opt.sf_low))});
            return csv.str();
        }
        case CurveKind::ber_eff: {
            CsvWriter csv{"snr_db", "ber_theory"};
            for (double db : opt.gamma_db) csv.row({format_double(db), format_double(ber_bpsk(db_to_linear(db)))});
            return csv.str();
        }
    }
    throw std::logic_error("unreachable");
}

nlohmann::json make_manifest(std::string_view command, const nlohmann::json& parameters,
                             std::optional<std::uint64_t> seed) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::array<char, 32> stamp{};
    std::strftime(stamp.data(), stamp.size(), "%Y-%m-%dT%H:%M:%SZ", &utc);
    nlohmann::json m;
    m["command"] = command;
    m["parameters"] = parameters;
    m["master_seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    m["library_version"] = kVersion;
    m["timestamp"] = std::string(stamp.data());
    return m;
}

namespace {

nlohmann::json grid_json(const std::vector<double>& grid) {
    auto arr = nlohmann::json::array();
    for (double v : grid) arr.push_back(format_double(v));
    return arr;
}

nlohmann::json offset_json(const std::optional<std::size_t>& offset) {
    return offset ? nlohmann::json(*offset) : nlohmann::json("centered");
}

}  // namespace

nlohmann::json to_json(const SpectrumOptions& opt) {
    return {{"sf_low", opt.sf_low}, {"sf_high", opt.sf_high}, {"offset", offset_json(opt.offset)},
            {"high_symbol", opt.high_symbol}};
}

nlohmann::json to_json(const SpectrogramOptions& opt) {
    static constexpr std::array<std::string_view, 3> names{"low", "high", "composite"};
    return {{"waveform", names[static_cast<std::size_t>(opt.waveform)]},
            {"sf_low", opt.sf_low},
            {"sf_high", opt.sf_high},
            {"offset", offset_json(opt.offset)},
            {"symbol", opt.symbol},
            {"kappa_db", format_double(opt.kappa_db)},
            {"beta", opt.beta},
            {"bandwidth_hz", opt.bandwidth_hz},
            {"window", opt.window},
            {"hop", opt.hop},
            {"nfft", opt.nfft}};
}

nlohmann::json to_json(const SimulateOptions& opt) {
    return {{"sf_low", opt.sf_low},
            {"sf_high", opt.sf_high},
            {"offset", offset_json(opt.offset)},
            {"kappa_db", grid_json(opt.kappa_db)},
            {"gamma_db", grid_json(opt.gamma_db)},
            {"trials", opt.trials},
            {"beta", opt.beta},
            {"bandwidth_hz", opt.bandwidth_hz},
            {"bypass_bpf", opt.bypass_bpf},
            {"cancellation", opt.cancellation == Cancellation::ideal ? "ideal" : "detected"},
            {"workers", opt.workers}};
}

nlohmann::json to_json(const FeasibleOptions& opt) {
    return {{"gamma_db", opt.gamma_db.empty() ? nlohmann::json("-20:10:0.25") : grid_json(opt.gamma_db)},
            {"kappa_db", opt.kappa_db.empty() ? nlohmann::json("0:40:0.25") : grid_json(opt.kappa_db)},
            {"lora_threshold_db", opt.criteria.lora_threshold_db},
            {"ber_target", opt.criteria.ber_target},
            {"beta", opt.criteria.beta},
            {"sf_low", opt.criteria.sf_low},
            {"boundary_only", opt.boundary_only}};
}

nlohmann::json to_json(const AnalyzeOptions& opt) {
    static constexpr std::array<std::string_view, 4> names{"ser", "ber", "ser-eff", "ber-eff"};
    return {{"curve", names[static_cast<std::size_t>(opt.curve)]},
            {"sf_low", opt.sf_low},
            {"beta", opt.beta},
            {"gamma_db", grid_json(opt.gamma_db)},
            {"kappa_db", grid_json(opt.kappa_db)}};
}

}  // namespace chirplayer::cli
