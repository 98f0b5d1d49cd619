// heraldsim: simulate, count, correct and analyze heralded single-photon
// detection streams from the command line. Subcommands mirror the library
// modules; every report echoes its full config and the tool version so runs
// are reproducible from the output alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heraldsim/bell.hpp"
#include "heraldsim/coincidence.hpp"
#include "heraldsim/correction.hpp"
#include "heraldsim/errors.hpp"
#include "heraldsim/fit.hpp"
#include "heraldsim/io.hpp"
#include "heraldsim/rng.hpp"
#include "heraldsim/simulation.hpp"
#include "heraldsim/trace.hpp"
#include "heraldsim/types.hpp"
#include "heraldsim/version.hpp"

namespace {

using heraldsim::TimePs;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

void emit(const std::string& out_path, const json& report) {
    const std::string text = report.dump(2) + "\n";
    if (out_path == "-")
        std::cout << text;
    else
        heraldsim::atomic_write_file(out_path, text);
}

json source_model_json(const heraldsim::SourceModel& m) {
    return json{{"pair_rate_hz", m.pair_rate_hz},
                {"eta_signal", m.eta_signal},
                {"eta_herald", m.eta_herald},
                {"deadtime_signal_ps", m.deadtime_signal_ps},
                {"deadtime_herald_ps", m.deadtime_herald_ps},
                {"jitter_fwhm_signal_ps", m.jitter_fwhm_signal_ps},
                {"jitter_fwhm_herald_ps", m.jitter_fwhm_herald_ps},
                {"background_rate_signal_hz", m.background_rate_signal_hz},
                {"background_rate_herald_hz", m.background_rate_herald_hz},
                {"duration_ps", m.duration_ps},
                {"rng_seed", m.rng_seed}};
}

json coincidence_config_json(const heraldsim::CoincidenceConfig& c) {
    return json{{"pulse_len_signal_ps", c.pulse_len_signal_ps},
                {"pulse_len_herald_ps", c.pulse_len_herald_ps},
                {"min_overlap_ps", c.min_overlap_ps},
                {"delay_offset_ps", c.delay_offset_ps}};
}

json window_params_json(const heraldsim::WindowParams& w) {
    return json{{"tau_w_ps", w.tau_w_ps},
                {"tau_max_ps", w.tau_max_ps},
                {"tau_d1_ps", w.tau_d_signal_ps},
                {"tau_d2_ps", w.tau_d_herald_ps}};
}

json counts_summary_json(const heraldsim::CountsSummary& s) {
    return json{{"singles_signal_hz", s.singles_signal_hz},
                {"singles_herald_hz", s.singles_herald_hz},
                {"coincidences_hz", s.coincidences_hz},
                {"duration_s", s.duration_s},
                {"singles_signal_count", s.singles_signal_count},
                {"singles_herald_count", s.singles_herald_count},
                {"coincidences_count", s.coincidences_count}};
}

json estimate_json(const heraldsim::CorrectedEstimate& e) {
    return json{{"pair_rate_hz", e.pair_rate_hz},
                {"eta_signal", e.eta_signal},
                {"eta_herald", e.eta_herald},
                {"sigma_pair_rate", e.sigma_pair_rate},
                {"sigma_eta_signal", e.sigma_eta_signal},
                {"sigma_eta_herald", e.sigma_eta_herald}};
}

void add_source_model_flags(CLI::App* cmd, heraldsim::SourceModel& m) {
    cmd->add_option("--pair_rate_hz", m.pair_rate_hz, "Pair production rate R0 [Hz]")->required();
    cmd->add_option("--eta_signal", m.eta_signal, "Signal-arm efficiency (default 1)");
    cmd->add_option("--eta_herald", m.eta_herald, "Herald-arm efficiency (default 1)");
    cmd->add_option("--deadtime_signal_ps", m.deadtime_signal_ps, "Signal dead-time [ps]");
    cmd->add_option("--deadtime_herald_ps", m.deadtime_herald_ps, "Herald dead-time [ps]");
    cmd->add_option("--jitter_fwhm_signal_ps", m.jitter_fwhm_signal_ps, "Signal jitter FWHM [ps]");
    cmd->add_option("--jitter_fwhm_herald_ps", m.jitter_fwhm_herald_ps, "Herald jitter FWHM [ps]");
    cmd->add_option("--background_rate_signal_hz", m.background_rate_signal_hz, "Signal background rate [Hz]");
    cmd->add_option("--background_rate_herald_hz", m.background_rate_herald_hz, "Herald background rate [Hz]");
    cmd->add_option("--duration_ps", m.duration_ps, "Run duration [ps]")->required();
    cmd->add_option("--rng_seed", m.rng_seed, "RNG seed (default 1)");
}

void add_coincidence_flags(CLI::App* cmd, heraldsim::CoincidenceConfig& c) {
    cmd->add_option("--pulse_len_signal_ps", c.pulse_len_signal_ps, "Signal logic pulse length [ps]");
    cmd->add_option("--pulse_len_herald_ps", c.pulse_len_herald_ps, "Herald logic pulse length [ps]");
    cmd->add_option("--min_overlap_ps", c.min_overlap_ps, "Minimum pulse overlap to count [ps]");
    cmd->add_option("--delay_offset_ps", c.delay_offset_ps, "Delay applied to the signal channel [ps]");
}

std::pair<heraldsim::EventStream, heraldsim::EventStream> load_streams(const std::string& in_path,
                                                                       TimePs duration_ps) {
    if (in_path == "-") return heraldsim::read_event_csv(std::cin, duration_ps);
    if (duration_ps < 0) {
        // look for a sidecar written by `simulate`
        std::ifstream side(in_path + ".json");
        if (side) {
            json meta;
            try {
                side >> meta;
                if (meta.contains("duration_ps")) duration_ps = meta["duration_ps"].get<TimePs>();
            } catch (const json::exception&) {
                // fall through to inference from the data
            }
        }
    }
    return heraldsim::read_event_csv_file(in_path, duration_ps);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    heraldsim::SourceModel model;
    std::string out = "-";
    std::string meta;
};

int run_simulate(const SimulateArgs& a) {
    const heraldsim::ArmStreams arms = heraldsim::simulate_streams(a.model);
    if (a.out == "-")
        heraldsim::write_event_csv(std::cout, arms.signal, arms.herald);
    else
        heraldsim::write_event_csv_file(a.out, arms.signal, arms.herald);

    json meta = {{"duration_ps", a.model.duration_ps},
                 {"source_model", source_model_json(a.model)},
                 {"singles_signal_count", arms.signal.size()},
                 {"singles_herald_count", arms.herald.size()},
                 {"tool_version", heraldsim::kVersion}};
    std::string meta_path = a.meta;
    if (meta_path.empty() && a.out != "-") meta_path = a.out + ".json";
    if (!meta_path.empty()) heraldsim::atomic_write_file(meta_path, meta.dump(2) + "\n");
    return kExitOk;
}

// ------------------------------------------------------------------- count

struct CountArgs {
    std::string in;
    TimePs duration_ps = -1;
    heraldsim::CoincidenceConfig cfg;
    std::string out = "-";
};

int run_count(const CountArgs& a) {
    const auto [signal, herald] = load_streams(a.in, a.duration_ps);
    const heraldsim::CountsSummary s = heraldsim::count_coincidences(signal, herald, a.cfg);
    const heraldsim::HeraldingRatio ratio = s.singles_herald_count > 0
                                                ? heraldsim::heralding_ratio(s)
                                                : heraldsim::HeraldingRatio{};
    json report = counts_summary_json(s);
    report["heralding_ratio"] = ratio.value;
    report["heralding_ratio_sigma"] = ratio.sigma;
    report["config"] = coincidence_config_json(a.cfg);
    report["tool_version"] = heraldsim::kVersion;
    emit(a.out, report);
    return kExitOk;
}

// -------------------------------------------------------------- scan-delay

struct ScanArgs {
    std::string in;
    TimePs duration_ps = -1;
    heraldsim::CoincidenceConfig cfg;
    TimePs delay_start_ps = 0;
    TimePs delay_stop_ps = 0;
    TimePs delay_step_ps = 10'000;
    std::string out = "-";
    bool fit = false;
};

int run_scan(const ScanArgs& a) {
    if (a.delay_step_ps <= 0) throw heraldsim::ValidationError("scan-delay: delay_step_ps must be > 0");
    if (a.delay_stop_ps < a.delay_start_ps)
        throw heraldsim::ValidationError("scan-delay: delay_stop_ps must be >= delay_start_ps");
    std::vector<TimePs> delays;
    for (TimePs d = a.delay_start_ps; d <= a.delay_stop_ps; d += a.delay_step_ps) delays.push_back(d);

    const auto [signal, herald] = load_streams(a.in, a.duration_ps);
    const heraldsim::DelayScan scan = heraldsim::delay_scan(signal, herald, a.cfg, delays);

    json report = {{"delays_ps", scan.delays_ps},
                   {"coincidence_rates_hz", scan.coincidence_rates_hz},
                   {"config", coincidence_config_json(a.cfg)},
                   {"tool_version", heraldsim::kVersion}};
    if (a.fit) {
        std::vector<double> x(scan.delays_ps.begin(), scan.delays_ps.end());
        const heraldsim::GaussianFit g = heraldsim::fit_gaussian(x, scan.coincidence_rates_hz);
        report["gaussian_fit"] = {{"amplitude_hz", g.amplitude},
                                  {"center_ps", g.center},
                                  {"sigma_ps", g.sigma},
                                  {"fwhm_ps", g.fwhm()},
                                  {"offset_hz", g.offset},
                                  {"converged", g.converged}};
    }
    emit(a.out, report);
    return kExitOk;
}

// ----------------------------------------------------------------- correct

struct CorrectArgs {
    std::string in;
    std::string out = "-";
    bool monte_carlo = false;
    int mc_draws = 10'000;
    std::uint64_t mc_seed = 1;
};

int run_correct(const CorrectArgs& a) {
    json rates;
    if (a.in == "-") {
        try {
            std::cin >> rates;
        } catch (const json::exception& e) {
            throw heraldsim::IoError(std::string("correct: bad JSON on stdin: ") + e.what());
        }
    } else {
        std::ifstream in(a.in);
        if (!in) throw heraldsim::IoError("correct: cannot open " + a.in);
        try {
            in >> rates;
        } catch (const json::exception& e) {
            throw heraldsim::IoError("correct: bad JSON in " + a.in + ": " + e.what());
        }
    }

    heraldsim::CountsSummary measured;
    heraldsim::WindowParams w;
    try {
        measured.singles_signal_hz = rates.at("s1_hz").get<double>();
        measured.singles_herald_hz = rates.at("s2_hz").get<double>();
        measured.coincidences_hz = rates.at("cc_hz").get<double>();
        measured.duration_s = rates.at("duration_s").get<double>();
        w.tau_w_ps = rates.at("tau_w_ps").get<TimePs>();
        w.tau_max_ps = rates.at("tau_max_ps").get<TimePs>();
        w.tau_d_signal_ps = rates.at("tau_d1_ps").get<TimePs>();
        w.tau_d_herald_ps = rates.at("tau_d2_ps").get<TimePs>();
    } catch (const json::exception& e) {
        throw heraldsim::ValidationError(std::string("correct: missing or malformed input field: ") + e.what());
    }
    measured.singles_signal_count = static_cast<std::int64_t>(std::llround(measured.singles_signal_hz * measured.duration_s));
    measured.singles_herald_count = static_cast<std::int64_t>(std::llround(measured.singles_herald_hz * measured.duration_s));
    measured.coincidences_count = static_cast<std::int64_t>(std::llround(measured.coincidences_hz * measured.duration_s));

    heraldsim::ErrorOptions opts;
    opts.mode = a.monte_carlo ? heraldsim::ErrorMode::monte_carlo : heraldsim::ErrorMode::jacobian;
    opts.mc_draws = a.mc_draws;
    opts.mc_seed = a.mc_seed;
    const heraldsim::CorrectedEstimate est = heraldsim::propagate_errors(measured, w, opts);

    json report = estimate_json(est);
    report["config"] = {{"input", rates}, {"error_mode", a.monte_carlo ? "monte_carlo" : "jacobian"}};
    report["tool_version"] = heraldsim::kVersion;
    emit(a.out, report);
    return kExitOk;
}

// ------------------------------------------------------------- discriminate

struct DiscriminateArgs {
    std::string in;
    heraldsim::DiscriminatorConfig cfg;
    std::string polarity = "positive";
    int channel = 1;
    std::string out = "-";
};

int run_discriminate(const DiscriminateArgs& a) {
    auto [w, file_polarity] = heraldsim::read_waveform_file(a.in);
    heraldsim::DiscriminatorConfig cfg = a.cfg;
    cfg.polarity = a.polarity == "negative" ? heraldsim::Polarity::negative : heraldsim::Polarity::positive;
    if (a.polarity == "file") cfg.polarity = file_polarity;
    const heraldsim::Channel chan = a.channel == 2 ? heraldsim::Channel::herald : heraldsim::Channel::signal;

    const heraldsim::EventStream events = heraldsim::discriminate(w, cfg, chan);
    heraldsim::EventStream empty;
    empty.channel = chan == heraldsim::Channel::signal ? heraldsim::Channel::herald : heraldsim::Channel::signal;
    empty.duration_ps = events.duration_ps;
    const heraldsim::EventStream& signal = chan == heraldsim::Channel::signal ? events : empty;
    const heraldsim::EventStream& herald = chan == heraldsim::Channel::signal ? empty : events;
    if (a.out == "-")
        heraldsim::write_event_csv(std::cout, signal, herald);
    else
        heraldsim::write_event_csv_file(a.out, signal, herald);
    return kExitOk;
}

// --------------------------------------------------------------------- phd

struct PhdArgs {
    std::string in;
    heraldsim::DiscriminatorConfig cfg;
    std::string polarity = "positive";
    int bins = 100;
    double lo = 0.0;
    double hi = 0.0;
    std::string out = "-";
};

int run_phd(const PhdArgs& a) {
    auto [w, file_polarity] = heraldsim::read_waveform_file(a.in);
    heraldsim::DiscriminatorConfig cfg = a.cfg;
    cfg.polarity = a.polarity == "negative" ? heraldsim::Polarity::negative : heraldsim::Polarity::positive;
    if (a.polarity == "file") cfg.polarity = file_polarity;

    const heraldsim::Histogram h = heraldsim::pulse_height_histogram(w, cfg, a.bins, a.lo, a.hi);
    json report = {{"bin_edges", h.bin_edges},
                   {"counts", h.counts},
                   {"config",
                    {{"threshold", cfg.threshold},
                     {"rearm_dead_ps", cfg.rearm_dead_ps},
                     {"polarity", cfg.polarity == heraldsim::Polarity::positive ? "positive" : "negative"},
                     {"bins", a.bins}}},
                   {"tool_version", heraldsim::kVersion}};
    emit(a.out, report);
    return kExitOk;
}

// -------------------------------------------------------------------- chsh

struct ChshArgs {
    heraldsim::EntangledModel model = heraldsim::EntangledModel::canonical(1.0);
    double pair_rate_hz = 0.0;
    double integration_s_per_setting = 10.0;
    std::uint64_t rng_seed = 1;
    bool analytic_only = false;
    std::string out = "-";
};

int run_chsh(const ChshArgs& a) {
    json report = {{"analytic_S", heraldsim::chsh_S(a.model)},
                   {"config",
                    {{"visibility", a.model.visibility},
                     {"angle_a", a.model.angle_a},
                     {"angle_a_prime", a.model.angle_a_prime},
                     {"angle_b", a.model.angle_b},
                     {"angle_b_prime", a.model.angle_b_prime},
                     {"heralding_eta", a.model.heralding_eta},
                     {"analyzer_transmission", a.model.analyzer_transmission},
                     {"pair_rate_hz", a.pair_rate_hz},
                     {"integration_s_per_setting", a.integration_s_per_setting},
                     {"rng_seed", a.rng_seed}}},
                   {"tool_version", heraldsim::kVersion}};

    if (!a.analytic_only) {
        const heraldsim::ChshResult r =
            heraldsim::simulate_chsh(a.model, a.pair_rate_hz, a.integration_s_per_setting, a.rng_seed);
        json settings = json::array();
        for (const auto& s : r.settings) {
            settings.push_back({{"angle_1", s.angle_1},
                                {"angle_2", s.angle_2},
                                {"counts", s.counts},
                                {"e_value", s.e_value},
                                {"sigma_e", s.sigma_e}});
        }
        report["S"] = r.S;
        report["sigma_S"] = r.sigma_S;
        report["settings"] = settings;
        report["sigmas_above_classical"] = (r.S - 2.0) / r.sigma_S;
    }
    emit(a.out, report);
    return kExitOk;
}

// ---------------------------------------------------------------- pipeline

struct PipelineArgs {
    heraldsim::SourceModel model;
    heraldsim::CoincidenceConfig cfg;
    int seeds = 1;
    std::string out = "-";
};

int run_pipeline(const PipelineArgs& a) {
    if (a.seeds < 1) throw heraldsim::ValidationError("pipeline: seeds must be >= 1");

    // TTL convention: the logic pulse lengths double as the per-channel
    // dead-times entering the correction, unless the model overrides them.
    heraldsim::SourceModel model = a.model;
    if (model.deadtime_signal_ps == 0) model.deadtime_signal_ps = a.cfg.pulse_len_signal_ps;
    if (model.deadtime_herald_ps == 0) model.deadtime_herald_ps = a.cfg.pulse_len_herald_ps;

    heraldsim::WindowParams w;
    w.tau_w_ps = a.cfg.coincidence_window_ps();
    w.tau_max_ps = std::max(a.cfg.pulse_len_signal_ps, a.cfg.pulse_len_herald_ps);
    w.tau_d_signal_ps = model.deadtime_signal_ps;
    w.tau_d_herald_ps = model.deadtime_herald_ps;

    json runs = json::array();
    double sum_z = 0.0, sum_z2 = 0.0, max_abs_z = 0.0;
    int solved = 0;
    for (int trial = 0; trial < a.seeds; ++trial) {
        heraldsim::SourceModel m = model;
        m.rng_seed = heraldsim::splitmix64(model.rng_seed ^ heraldsim::splitmix64(static_cast<std::uint64_t>(trial)));
        const heraldsim::ArmStreams arms = heraldsim::simulate_streams(m);
        const heraldsim::CountsSummary s = heraldsim::count_coincidences(arms.signal, arms.herald, a.cfg);

        json run = {{"trial", trial}, {"rng_seed", m.rng_seed}, {"measured", counts_summary_json(s)}};
        try {
            const heraldsim::CorrectedEstimate est = heraldsim::propagate_errors(s, w);
            const Eigen::Vector3d sampling = heraldsim::recovery_sampling_sigmas(s, w);
            const double z_r0 = (est.pair_rate_hz - model.pair_rate_hz) / sampling[0];
            const double z_e1 = (est.eta_signal - model.eta_signal) / sampling[1];
            const double z_e2 = (est.eta_herald - model.eta_herald) / sampling[2];
            run["estimate"] = estimate_json(est);
            run["sampling_sigma"] = {{"pair_rate_hz", sampling[0]},
                                     {"eta_signal", sampling[1]},
                                     {"eta_herald", sampling[2]}};
            run["z"] = {{"pair_rate_hz", z_r0}, {"eta_signal", z_e1}, {"eta_herald", z_e2}};
            sum_z += z_e1;
            sum_z2 += z_e1 * z_e1;
            max_abs_z = std::max(max_abs_z, std::abs(z_e1));
            ++solved;
        } catch (const std::runtime_error& e) {
            run["error"] = e.what();
        }
        runs.push_back(std::move(run));
    }
    if (solved == 0) throw heraldsim::ConvergenceError("pipeline: no trial produced a solvable summary");

    const double mean_z = sum_z / solved;
    const double var_z = solved > 1 ? (sum_z2 - solved * mean_z * mean_z) / (solved - 1) : 0.0;
    json report = {{"truth", source_model_json(model)},
                   {"window", window_params_json(w)},
                   {"coincidence_config", coincidence_config_json(a.cfg)},
                   {"runs", runs},
                   {"aggregate",
                    {{"trials", a.seeds},
                     {"solved", solved},
                     {"mean_z_eta_signal", mean_z},
                     {"std_z_eta_signal", std::sqrt(std::max(0.0, var_z))},
                     {"max_abs_z_eta_signal", max_abs_z}}},
                   {"tool_version", heraldsim::kVersion}};
    emit(a.out, report);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heralded single-photon source simulation, counting and correction toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Generate detection event streams from a source model");
    add_source_model_flags(c_sim, sim.model);
    c_sim->add_option("--out", sim.out, "Output CSV path or - for stdout");
    c_sim->add_option("--meta", sim.meta, "Sidecar metadata path (default <out>.json)");

    CountArgs cnt;
    CLI::App* c_cnt = app.add_subcommand("count", "Count singles and coincidences in an event CSV");
    c_cnt->add_option("--in", cnt.in, "Input CSV path or -")->required();
    c_cnt->add_option("--duration_ps", cnt.duration_ps, "Stream duration [ps] (default: sidecar or inferred)");
    add_coincidence_flags(c_cnt, cnt.cfg);
    c_cnt->add_option("--out", cnt.out, "Output JSON path or -");

    ScanArgs scan;
    CLI::App* c_scan = app.add_subcommand("scan-delay", "Coincidence rate vs signal-channel delay");
    c_scan->add_option("--in", scan.in, "Input CSV path or -")->required();
    c_scan->add_option("--duration_ps", scan.duration_ps, "Stream duration [ps]");
    add_coincidence_flags(c_scan, scan.cfg);
    c_scan->add_option("--delay_start_ps", scan.delay_start_ps, "First delay [ps]")->required();
    c_scan->add_option("--delay_stop_ps", scan.delay_stop_ps, "Last delay [ps]")->required();
    c_scan->add_option("--delay_step_ps", scan.delay_step_ps, "Delay step [ps]");
    c_scan->add_flag("--fit", scan.fit, "Fit a Gaussian to the scan profile");
    c_scan->add_option("--out", scan.out, "Output JSON path or -");

    CorrectArgs cor;
    CLI::App* c_cor = app.add_subcommand("correct", "Invert the accidental/dead-time model for (R0, eta1, eta2)");
    c_cor->add_option("--in", cor.in, "Rates JSON path or - (fields s1_hz, s2_hz, cc_hz, duration_s, tau_w_ps, "
                                      "tau_max_ps, tau_d1_ps, tau_d2_ps)")
        ->required();
    c_cor->add_flag("--mc", cor.monte_carlo, "Monte Carlo error propagation instead of the Jacobian");
    c_cor->add_option("--mc_draws", cor.mc_draws, "Monte Carlo draws (default 10000)");
    c_cor->add_option("--mc_seed", cor.mc_seed, "Monte Carlo RNG seed");
    c_cor->add_option("--out", cor.out, "Output JSON path or -");

    DiscriminateArgs dis;
    CLI::App* c_dis = app.add_subcommand("discriminate", "Leading-edge discrimination of a waveform file");
    c_dis->add_option("--in", dis.in, "Waveform file (raw f32le + .json sidecar)")->required();
    c_dis->add_option("--threshold", dis.cfg.threshold, "Discriminator threshold")->required();
    c_dis->add_option("--rearm_dead_ps", dis.cfg.rearm_dead_ps, "Re-arm dead-time [ps]");
    c_dis->add_option("--polarity", dis.polarity, "positive|negative|file (default positive)");
    c_dis->add_option("--channel", dis.channel, "Output CSV channel: 1 signal, 2 herald");
    c_dis->add_option("--out", dis.out, "Output CSV path or -");

    PhdArgs phd;
    CLI::App* c_phd = app.add_subcommand("phd", "Pulse-height distribution of a waveform file");
    c_phd->add_option("--in", phd.in, "Waveform file (raw f32le + .json sidecar)")->required();
    c_phd->add_option("--threshold", phd.cfg.threshold, "Discriminator threshold")->required();
    c_phd->add_option("--rearm_dead_ps", phd.cfg.rearm_dead_ps, "Re-arm dead-time [ps]");
    c_phd->add_option("--polarity", phd.polarity, "positive|negative|file (default positive)");
    c_phd->add_option("--bins", phd.bins, "Histogram bins (default 100)");
    c_phd->add_option("--lo", phd.lo, "Histogram lower edge (default auto)");
    c_phd->add_option("--hi", phd.hi, "Histogram upper edge (default auto)");
    c_phd->add_option("--out", phd.out, "Output JSON path or -");

    ChshArgs chsh;
    CLI::App* c_chsh = app.add_subcommand("chsh", "Analytic and simulated CHSH Bell parameter");
    c_chsh->add_option("--visibility", chsh.model.visibility, "Correlation visibility V")->required();
    c_chsh->add_option("--angle_a", chsh.model.angle_a, "Analyzer angle a [rad]");
    c_chsh->add_option("--angle_a_prime", chsh.model.angle_a_prime, "Analyzer angle a' [rad]");
    c_chsh->add_option("--angle_b", chsh.model.angle_b, "Analyzer angle b [rad]");
    c_chsh->add_option("--angle_b_prime", chsh.model.angle_b_prime, "Analyzer angle b' [rad]");
    c_chsh->add_option("--heralding_eta", chsh.model.heralding_eta, "Heralding efficiency entering count rates");
    c_chsh->add_option("--analyzer_transmission", chsh.model.analyzer_transmission, "Per-arm analyzer transmission");
    c_chsh->add_option("--pair_rate_hz", chsh.pair_rate_hz, "Pair rate for the simulated run [Hz]");
    c_chsh->add_option("--integration_s_per_setting", chsh.integration_s_per_setting, "Seconds per setting");
    c_chsh->add_option("--rng_seed", chsh.rng_seed, "RNG seed");
    c_chsh->add_flag("--analytic_only", chsh.analytic_only, "Skip the finite-count simulation");
    c_chsh->add_option("--out", chsh.out, "Output JSON path or -");

    PipelineArgs pipe;
    CLI::App* c_pipe = app.add_subcommand("pipeline", "simulate -> count -> correct closure report");
    add_source_model_flags(c_pipe, pipe.model);
    add_coincidence_flags(c_pipe, pipe.cfg);
    c_pipe->add_option("--seeds", pipe.seeds, "Number of independent trials (default 1)");
    c_pipe->add_option("--out", pipe.out, "Output JSON path or -");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*c_sim) return run_simulate(sim);
        if (*c_cnt) return run_count(cnt);
        if (*c_scan) return run_scan(scan);
        if (*c_cor) return run_correct(cor);
        if (*c_dis) return run_discriminate(dis);
        if (*c_phd) return run_phd(phd);
        if (*c_chsh) return run_chsh(chsh);
        if (*c_pipe) return run_pipeline(pipe);
    } catch (const heraldsim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const heraldsim::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const heraldsim::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
