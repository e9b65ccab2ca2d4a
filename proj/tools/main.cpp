// chirplayer: command-line front end for the chirp-layered superposition simulator.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace chirplayer;
using namespace chirplayer::cli;

struct Output {
    std::string path;
    std::string manifest;
};

void add_output(CLI::App& cmd, Output& out) {
    cmd.add_option("--out", out.path, "Write CSV here instead of stdout");
    cmd.add_option("--manifest", out.manifest, "Run manifest path (default: <out>.manifest.json)");
}

void emit(const Output& out, const std::string& csv, const nlohmann::json& manifest) {
    if (out.path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(out.path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out.path);
        f << csv;
    }
    std::string manifest_path = out.manifest;
    if (manifest_path.empty() && !out.path.empty()) manifest_path = out.path + ".manifest.json";
    if (!manifest_path.empty()) {
        std::ofstream f(manifest_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + manifest_path);
        f << manifest.dump(2) << '\n';
    }
}

std::optional<std::size_t> optional_offset(const CLI::Option* opt, std::size_t value) {
    if (opt->count() == 0) return std::nullopt;
    return value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chirp-layered superposition on LoRa: waveforms, error-rate models and Monte Carlo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // spectrum
    SpectrumOptions spec_opt;
    std::size_t spec_offset = 0;
    Output spec_out;
    auto* spectrum = app.add_subcommand("spectrum", "Interference spectrum |U[k]| of a high-SF segment");
    spectrum->add_option("--sf-low", spec_opt.sf_low, "Low spreading factor")->capture_default_str();
    spectrum->add_option("--sf-high", spec_opt.sf_high, "High spreading factor")->capture_default_str();
    auto* spec_offset_opt = spectrum->add_option("--offset", spec_offset, "Segment offset in chips (default: centred)");
    spectrum->add_option("--high-symbol", spec_opt.high_symbol, "High-SF symbol index")->capture_default_str();
    add_output(*spectrum, spec_out);

    // spectrogram
    SpectrogramOptions sg_opt;
    std::string sg_waveform = "low";
    std::size_t sg_offset = 0;
    Output sg_out;
    auto* spectrogram = app.add_subcommand("spectrogram", "STFT magnitude of a low symbol, high segment or composite");
    spectrogram->add_option("--waveform", sg_waveform, "low | high | composite")->capture_default_str();
    spectrogram->add_option("--sf-low", sg_opt.sf_low)->capture_default_str();
    spectrogram->add_option("--sf-high", sg_opt.sf_high)->capture_default_str();
    auto* sg_offset_opt = spectrogram->add_option("--offset", sg_offset, "Segment offset in chips (default: centred)");
    spectrogram->add_option("--symbol", sg_opt.symbol, "Low-SF symbol index")->capture_default_str();
    spectrogram->add_option("--kappa-db", sg_opt.kappa_db, "Low-to-high power ratio for the composite")->capture_default_str();
    spectrogram->add_option("--beta", sg_opt.beta, "Oversampling factor")->capture_default_str();
    spectrogram->add_option("--bandwidth-hz", sg_opt.bandwidth_hz)->capture_default_str();
    spectrogram->add_option("--window", sg_opt.window, "Hann window length in samples")->capture_default_str();
    spectrogram->add_option("--hop", sg_opt.hop, "Hop in samples")->capture_default_str();
    spectrogram->add_option("--nfft", sg_opt.nfft, "Zero-padded DFT size")->capture_default_str();
    add_output(*spectrogram, sg_out);

    // simulate
    SimulateOptions sim_opt;
    std::string sim_gamma = "-6";
    std::string sim_kappa = "3,6,10,inf";
    std::string sim_cancel = "detected";
    std::size_t sim_offset = 0;
    bool bypass = true;
    Output sim_out;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo SER/BER over gamma and kappa grids");
    simulate->add_option("--sf-low", sim_opt.sf_low)->capture_default_str();
    simulate->add_option("--sf-high", sim_opt.sf_high)->capture_default_str();
    auto* sim_offset_opt = simulate->add_option("--offset", sim_offset, "Segment offset in chips (default: centred)");
    simulate->add_option("--gamma-db", sim_gamma, "Baseline SNR: value, inf, start:stop:step or list")->capture_default_str();
    simulate->add_option("--kappa-db", sim_kappa, "Low-to-high power ratio: value, inf, range or list")->capture_default_str();
    simulate->add_option("--trials", sim_opt.trials, "Trials per point")->capture_default_str();
    simulate->add_option("--seed", sim_opt.seed, "Master seed")->capture_default_str();
    simulate->add_option("--beta", sim_opt.beta, "Oversampling factor")->capture_default_str();
    simulate->add_option("--bandwidth-hz", sim_opt.bandwidth_hz)->capture_default_str();
    simulate->add_option("--bypass-bpf", bypass, "Skip the band-pass stage before the correlator")->capture_default_str();
    simulate->add_option("--cancellation", sim_cancel, "detected | ideal")->capture_default_str();
    add_output(*simulate, sim_out);

    // feasible
    FeasibleOptions fz_opt;
    std::string fz_gamma = "-20:10:0.25";
    std::string fz_kappa = "0:40:0.25";
    Output fz_out;
    auto* feasible = app.add_subcommand("feasible", "Feasible (gamma, kappa) region for both layers");
    feasible->add_option("--gamma-db", fz_gamma)->capture_default_str();
    feasible->add_option("--kappa-db", fz_kappa)->capture_default_str();
    feasible->add_option("--lora-threshold-db", fz_opt.criteria.lora_threshold_db)->capture_default_str();
    feasible->add_option("--ber-target", fz_opt.criteria.ber_target)->capture_default_str();
    feasible->add_option("--beta", fz_opt.criteria.beta)->capture_default_str();
    feasible->add_option("--sf-low", fz_opt.criteria.sf_low)->capture_default_str();
    feasible->add_flag("--boundary", fz_opt.boundary_only, "Only emit cells on the feasibility boundary");
    add_output(*feasible, fz_out);

    // analyze
    AnalyzeOptions an_opt;
    std::string an_curve = "ser";
    std::string an_gamma = "-16:0:0.5";
    std::string an_kappa = "inf";
    Output an_out;
    auto* analyze = app.add_subcommand("analyze", "Theoretical SER/BER curves");
    analyze->add_option("--curve", an_curve, "ser | ber | ser-eff | ber-eff")->capture_default_str();
    analyze->add_option("--sf-low", an_opt.sf_low)->capture_default_str();
    analyze->add_option("--beta", an_opt.beta)->capture_default_str();
    analyze->add_option("--gamma-db", an_gamma, "SNR grid (effective SNR for the -eff curves)")->capture_default_str();
    analyze->add_option("--kappa-db", an_kappa)->capture_default_str();
    add_output(*analyze, an_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (*spectrum) {
            spec_opt.offset = optional_offset(spec_offset_opt, spec_offset);
            emit(spec_out, cmd_spectrum(spec_opt), make_manifest("spectrum", to_json(spec_opt), std::nullopt));
        } else if (*spectrogram) {
            sg_opt.waveform = parse_waveform(sg_waveform);
            sg_opt.offset = optional_offset(sg_offset_opt, sg_offset);
            emit(sg_out, cmd_spectrogram(sg_opt), make_manifest("spectrogram", to_json(sg_opt), std::nullopt));
        } else if (*simulate) {
            sim_opt.offset = optional_offset(sim_offset_opt, sim_offset);
            sim_opt.gamma_db = parse_grid(sim_gamma);
            sim_opt.kappa_db = parse_grid(sim_kappa);
            sim_opt.cancellation = parse_cancellation(sim_cancel);
            sim_opt.bypass_bpf = bypass;
            sim_opt.workers = default_workers();
            emit(sim_out, cmd_simulate(sim_opt), make_manifest("simulate", to_json(sim_opt), sim_opt.seed));
        } else if (*feasible) {
            fz_opt.gamma_db = parse_grid(fz_gamma);
            fz_opt.kappa_db = parse_grid(fz_kappa);
            emit(fz_out, cmd_feasible(fz_opt), make_manifest("feasible", to_json(fz_opt), std::nullopt));
        } else if (*analyze) {
            an_opt.curve = parse_curve(an_curve);
            an_opt.gamma_db = parse_grid(an_gamma);
            an_opt.kappa_db = parse_grid(an_kappa);
            emit(an_out, cmd_analyze(an_opt), make_manifest("analyze", to_json(an_opt), std::nullopt));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
