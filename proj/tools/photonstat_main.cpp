// photonstat command-line front end.
//
// simulate -> digitize -> herald -> stats -> report, each step reading and
// writing the documented file formats so any stage can be swapped for real
// instrument data.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "photonstat/digitize.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/event_series.hpp"
#include "photonstat/manifest.hpp"
#include "photonstat/report.hpp"
#include "photonstat/rng.hpp"
#include "photonstat/sim.hpp"
#include "photonstat/stats.hpp"
#include "photonstat/trace.hpp"
#include "photonstat/version.hpp"

namespace {

using namespace photonstat;

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
    std::string format = "csv"; // csv | svg
    std::string command_line;
};

std::string join_command_line(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

std::string iteration_label(std::size_t i, std::size_t total) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "iter%0*zu", total > 99 ? 3 : 2, i + 1);
    return buf;
}

// Run fn(i) for i in [0, count) on a worker pool; the first exception wins.
void run_iterations(std::size_t count, unsigned threads,
                    const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i =
                    cursor.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

WindowMode parse_window_mode(const std::string& mode) {
    if (mode == "symmetric") return WindowMode::symmetric;
    if (mode == "forward") return WindowMode::forward;
    throw ArgumentError("window mode must be 'symmetric' or 'forward'");
}

std::uint64_t resolve_window_slots(std::int64_t requested, double resolution) {
    if (requested >= 0) return static_cast<std::uint64_t>(requested);
    // Default coincidence window: 1 ns expressed in slots.
    return static_cast<std::uint64_t>(
        std::max<std::int64_t>(0, std::llround(1e-9 / resolution)));
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config_path;
    std::string out_prefix;
    std::size_t iterations = 1;
    bool emit_trace = false;
};

int cmd_simulate(const SimulateArgs& args, const GlobalOptions& global) {
    const auto t0 = std::chrono::steady_clock::now();
    SimConfig cfg = load_sim_config(args.config_path);
    if (global.seed_given) cfg.rng_seed = global.seed;

    std::vector<std::vector<std::string>> warnings(args.iterations);
    std::vector<std::vector<std::string>> written(args.iterations);
    run_iterations(args.iterations, global.threads, [&](std::size_t i) {
        SimConfig iter_cfg = cfg;
        iter_cfg.rng_seed = derive_seed(cfg.rng_seed, kStreamIteration, i);
        const std::string stem =
            args.out_prefix + "." + iteration_label(i, args.iterations);
        if (cfg.kind == SourceKind::coherent) {
            const EventSeries series =
                gen_coherent(iter_cfg, &warnings[i]);
            write_event_series(series, stem + ".ev");
            written[i].push_back(stem + ".ev");
            if (args.emit_trace) {
                save_trace(synth_trace(series, cfg.pulse_width_s,
                                       cfg.pulse_amplitude_v, "coherent"),
                           stem + ".trace.rawf32", TraceFormat::rawf32);
                written[i].push_back(stem + ".trace.rawf32");
            }
        } else {
            const SpdcPair pair = gen_spdc(iter_cfg, &warnings[i]);
            write_event_series(pair.signal, stem + ".signal.ev");
            write_event_series(pair.idler, stem + ".idler.ev");
            written[i].push_back(stem + ".signal.ev");
            written[i].push_back(stem + ".idler.ev");
            if (args.emit_trace) {
                save_trace(synth_trace(pair.signal, cfg.pulse_width_s,
                                       cfg.pulse_amplitude_v, "signal"),
                           stem + ".signal.trace.rawf32", TraceFormat::rawf32);
                save_trace(synth_trace(pair.idler, cfg.pulse_width_s,
                                       cfg.pulse_amplitude_v, "idler"),
                           stem + ".idler.trace.rawf32", TraceFormat::rawf32);
                written[i].push_back(stem + ".signal.trace.rawf32");
                written[i].push_back(stem + ".idler.trace.rawf32");
            }
        }
    });

    RunManifest manifest;
    manifest.command_line = global.command_line;
    manifest.sim_config = cfg;
    manifest.inputs.push_back(
        {args.config_path, fnv1a64_file(args.config_path)});
    for (const auto& iter_files : written)
        for (const auto& path : iter_files)
            manifest.outputs.push_back({path, fnv1a64_file(path)});
    for (const auto& iter_warnings : warnings)
        for (const auto& w : iter_warnings) {
            manifest.warnings.push_back(w);
            std::cerr << "warning: " << w << '\n';
        }
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(manifest, args.out_prefix + ".manifest.json");

    std::cout << "wrote " << manifest.outputs.size() << " event/trace files, "
              << args.out_prefix << ".manifest.json\n";
    return kExitOk;
}

// ---------------------------------------------------------------- digitize

struct DigitizeArgs {
    std::string in_path;
    std::string out_path;
    double threshold_high = 1.5;
    double threshold_low = 0.5;
    double single_threshold = 0.0;
    bool single_given = false;
    std::string trace_format = "auto";
};

int cmd_digitize(const DigitizeArgs& args, const GlobalOptions& global) {
    AnalogTrace trace;
    if (args.trace_format == "auto")
        trace = load_trace(args.in_path);
    else if (args.trace_format == "csv")
        trace = load_trace(args.in_path, TraceFormat::csv);
    else if (args.trace_format == "rawf32")
        trace = load_trace(args.in_path, TraceFormat::rawf32);
    else
        throw ArgumentError("trace format must be auto, csv or rawf32");

    DigitizeOptions opt;
    if (args.single_given) {
        opt.mode = ThresholdMode::single;
        opt.threshold_high_v = args.single_threshold;
    } else {
        opt.threshold_high_v = args.threshold_high;
        opt.threshold_low_v = args.threshold_low;
    }
    const EventSeries events = digitize(trace, opt, global.threads);
    write_event_series(events, args.out_path);
    std::cout << args.out_path << ": " << events.count() << " events in "
              << events.slot_count() << " slots\n";
    return kExitOk;
}

// ------------------------------------------------------------------ herald

struct HeraldArgs {
    std::string signal_path;
    std::string idler_path;
    std::string out_path;
    std::int64_t window = -1;
    std::string window_mode = "symmetric";
};

int cmd_herald(const HeraldArgs& args) {
    const EventSeries signal = read_event_series(args.signal_path);
    const EventSeries idler = read_event_series(args.idler_path);
    const EventSeries coincidences =
        herald(signal, idler,
               resolve_window_slots(args.window, signal.resolution_s()),
               parse_window_mode(args.window_mode));
    write_event_series(coincidences, args.out_path);
    std::cout << args.out_path << ": " << coincidences.count()
              << " coincidences from " << signal.count() << " signal / "
              << idler.count() << " idler events\n";
    return kExitOk;
}

// ------------------------------------------------------------------- stats

struct StatsArgs {
    std::vector<std::string> event_paths;
    std::vector<std::string> herald_paths;
    std::int64_t window = -1;
    std::string window_mode = "symmetric";
    double target_mean = 1.0;
    std::uint64_t bin_width = 0; // 0 = calibrate
    std::string out_prefix;
};

struct IterationResult {
    std::uint64_t bin_width_slots = 0;
    Moments moments;
    double q = 0.0;
};

int cmd_stats(const StatsArgs& args, const GlobalOptions& global) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!args.herald_paths.empty() &&
        args.herald_paths.size() != args.event_paths.size())
        throw ArgumentError(
            "stats: --herald needs one idler file per event file");

    const std::size_t iterations = args.event_paths.size();
    std::vector<IterationResult> results(iterations);
    run_iterations(iterations, global.threads, [&](std::size_t i) {
        EventSeries series = read_event_series(args.event_paths[i]);
        if (!args.herald_paths.empty()) {
            const EventSeries idler = read_event_series(args.herald_paths[i]);
            series = herald(
                series, idler,
                resolve_window_slots(args.window, series.resolution_s()),
                parse_window_mode(args.window_mode));
        }
        const std::uint64_t width =
            args.bin_width > 0 ? args.bin_width
                               : calibrate_bin_width(series, args.target_mean);
        const auto counts = bin_counts(series, width);
        if (counts.empty())
            throw StatsError("stats: bin width " + std::to_string(width) +
                             " leaves no complete bin in " +
                             args.event_paths[i]);
        const CountHistogram hist = histogram(counts, width);
        const Moments m = moments(hist);
        if (m.mean <= 0.0)
            throw StatsError("stats: no events in the binned region of " +
                             args.event_paths[i]);
        const double q = mandel_q(m.mean, m.variance);
        results[i] = {width, m, q};

        const std::string stem =
            args.out_prefix + "." + iteration_label(i, iterations);
        write_histogram_csv(hist, m, q, stem + ".hist.csv");
        if (global.format == "svg")
            write_histogram_svg(hist, m, q,
                                "photon number distribution (" +
                                    iteration_label(i, iterations) + ")",
                                stem + ".hist.svg");
    });

    QReport report;
    for (const auto& r : results) report.per_iteration_q.push_back(r.q);
    if (iterations >= 2) {
        report = aggregate(report.per_iteration_q);
    } else {
        report.q_mean = results[0].q;
        report.q_std = std::numeric_limits<double>::quiet_NaN();
    }
    for (const auto& r : results) {
        report.mean += r.moments.mean / static_cast<double>(iterations);
        report.variance += r.moments.variance / static_cast<double>(iterations);
    }
    report.q = (report.variance - report.mean) / report.mean;
    write_qreport(report, args.out_prefix + ".qreport.txt");

    RunManifest manifest;
    manifest.command_line = global.command_line;
    for (const auto& path : args.event_paths)
        manifest.inputs.push_back({path, fnv1a64_file(path)});
    for (const auto& path : args.herald_paths)
        manifest.inputs.push_back({path, fnv1a64_file(path)});
    for (std::size_t i = 0; i < iterations; ++i) {
        const std::string stem =
            args.out_prefix + "." + iteration_label(i, iterations);
        manifest.outputs.push_back(
            {stem + ".hist.csv", fnv1a64_file(stem + ".hist.csv")});
        if (global.format == "svg")
            manifest.outputs.push_back(
                {stem + ".hist.svg", fnv1a64_file(stem + ".hist.svg")});
    }
    manifest.outputs.push_back({args.out_prefix + ".qreport.txt",
                                fnv1a64_file(args.out_prefix + ".qreport.txt")});
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(manifest, args.out_prefix + ".manifest.json");

    std::cout << "iterations=" << iterations << "  q_mean="
              << format_display(report.q_mean) << "  q_std="
              << format_display(report.q_std) << '\n';
    for (std::size_t i = 0; i < iterations; ++i)
        std::cout << "  " << iteration_label(i, iterations)
                  << ": bin_width=" << results[i].bin_width_slots
                  << " mean=" << format_display(results[i].moments.mean)
                  << " variance="
                  << format_display(results[i].moments.variance)
                  << " q=" << format_display(results[i].q) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
    std::string in_path;
    std::string out_path;
    bool verify = false;
};

int cmd_report(const ReportArgs& args, const GlobalOptions& global) {
    std::ifstream probe(args.in_path, std::ios::binary);
    if (!probe) throw FormatError("cannot open: " + args.in_path);
    std::string first_line;
    std::getline(probe, first_line);
    probe.close();

    if (first_line.rfind("# photonstat-histogram", 0) == 0) {
        const CountHistogram h = read_histogram_csv(args.in_path);
        const Moments m = moments(h);
        const double q = mandel_q(m.mean, m.variance);
        if (global.format == "svg" || !args.out_path.empty()) {
            const std::string out = args.out_path.empty()
                                        ? args.in_path + ".svg"
                                        : args.out_path;
            write_histogram_svg(h, m, q, "photon number distribution", out);
            std::cout << "wrote " << out << '\n';
        } else {
            std::cout << "bins=" << h.total_bins
                      << " bin_width_slots=" << h.bin_width_slots
                      << " mean=" << format_display(m.mean)
                      << " variance=" << format_display(m.variance)
                      << " q=" << format_display(q) << '\n';
        }
        return kExitOk;
    }
    if (first_line.rfind("# photonstat-qreport", 0) == 0) {
        const QReport r = read_qreport(args.in_path);
        std::cout << "iterations=" << r.per_iteration_q.size()
                  << " q_mean=" << format_display(r.q_mean)
                  << " q_std=" << format_display(r.q_std) << '\n';
        for (std::size_t i = 0; i < r.per_iteration_q.size(); ++i)
            std::cout << "  q[" << i
                      << "]=" << format_display(r.per_iteration_q[i]) << '\n';
        return kExitOk;
    }
    // Otherwise treat as a manifest.
    const RunManifest manifest = read_manifest(args.in_path);
    std::cout << "tool: " << manifest.tool << '\n'
              << "command: " << manifest.command_line << '\n'
              << "inputs: " << manifest.inputs.size()
              << "  outputs: " << manifest.outputs.size() << '\n'
              << "wall_seconds: " << format_display(manifest.wall_seconds)
              << '\n';
    for (const auto& w : manifest.warnings)
        std::cout << "warning: " << w << '\n';
    if (args.verify) {
        const auto bad = verify_manifest(manifest);
        if (!bad.empty()) {
            for (const auto& path : bad)
                std::cerr << "digest mismatch or missing: " << path << '\n';
            throw DataError("manifest verification failed");
        }
        std::cout << "all digests match\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    GlobalOptions global;
    global.command_line = join_command_line(argc, argv);

    CLI::App app{"photon counting statistics toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version",
                         std::string(kToolName) + " " + kToolVersion);
    auto* seed_opt =
        app.add_option("--seed", global.seed,
                       "override the RNG seed from the config");
    app.add_option("--threads", global.threads,
                   "worker threads (default 1)")
        ->envname("PHOTONSTAT_THREADS");
    app.add_option("--format", global.format, "output format: csv or svg")
        ->check(CLI::IsMember({"csv", "svg"}));

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand(
        "simulate", "generate event series from a source config");
    sim->add_option("config", sim_args.config_path, "SimConfig file")
        ->required();
    sim->add_option("-o,--out", sim_args.out_prefix, "output path prefix")
        ->required();
    sim->add_option("-n,--iterations", sim_args.iterations,
                    "number of independent iterations")
        ->check(CLI::PositiveNumber);
    sim->add_flag("--emit-trace", sim_args.emit_trace,
                  "also write synthetic TTL traces (RAWF32)");

    DigitizeArgs dig_args;
    auto* dig = app.add_subcommand(
        "digitize", "convert an analog trace into an event series");
    dig->add_option("trace", dig_args.in_path, "input trace file")->required();
    dig->add_option("-o,--out", dig_args.out_path, "output event file")
        ->required();
    dig->add_option("--threshold-high", dig_args.threshold_high,
                    "rising-edge threshold, volts (default 1.5)");
    dig->add_option("--threshold-low", dig_args.threshold_low,
                    "re-arm threshold, volts (default 0.5)");
    auto* single = dig->add_option(
        "--single-threshold", dig_args.single_threshold,
        "use one threshold for both edge and re-arm (no hysteresis)");
    dig->add_option("--trace-format", dig_args.trace_format,
                    "auto, csv or rawf32");

    HeraldArgs her_args;
    auto* her = app.add_subcommand(
        "herald", "keep signal events coincident with an idler event");
    her->add_option("signal", her_args.signal_path, "signal event file")
        ->required();
    her->add_option("idler", her_args.idler_path, "idler event file")
        ->required();
    her->add_option("-o,--out", her_args.out_path, "output event file")
        ->required();
    her->add_option("--window", her_args.window,
                    "coincidence window in slots (default: 1 ns worth)");
    her->add_option("--window-mode", her_args.window_mode,
                    "symmetric: idler within +/-window of the signal slot; "
                    "forward: idler gates forward, signal follows it")
        ->check(CLI::IsMember({"symmetric", "forward"}));

    StatsArgs stats_args;
    auto* stats = app.add_subcommand(
        "stats", "histogram + Mandel Q for one or more event files");
    stats->add_option("events", stats_args.event_paths,
                      "event files, one per iteration")
        ->required();
    stats->add_option("--herald", stats_args.herald_paths,
                      "idler event files for coincidence gating");
    stats->add_option("--window", stats_args.window,
                      "coincidence window in slots (default: 1 ns worth)");
    stats->add_option("--window-mode", stats_args.window_mode, "")
        ->check(CLI::IsMember({"symmetric", "forward"}));
    stats->add_option("--target-mean", stats_args.target_mean,
                      "bin-width calibration target (default 1)");
    stats->add_option("--bin-width", stats_args.bin_width,
                      "fixed bin width in slots (default: calibrate)");
    stats->add_option("-o,--out", stats_args.out_prefix, "output path prefix")
        ->required();

    ReportArgs report_args;
    auto* report = app.add_subcommand(
        "report", "summarize or render a histogram, qreport or manifest");
    report->add_option("input", report_args.in_path, "file to summarize")
        ->required();
    report->add_option("-o,--out", report_args.out_path,
                       "output path for rendered SVG");
    report->add_flag("--verify", report_args.verify,
                     "recompute manifest digests and fail on mismatch");

    for (auto* sub : {sim, dig, her, stats, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgError;
    }
    global.seed_given = seed_opt->count() > 0;
    dig_args.single_given = single->count() > 0;

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, global);
        if (dig->parsed()) return cmd_digitize(dig_args, global);
        if (her->parsed()) return cmd_herald(her_args);
        if (stats->parsed()) return cmd_stats(stats_args, global);
        if (report->parsed()) return cmd_report(report_args, global);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitArgError;
}
