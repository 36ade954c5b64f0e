#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "photonstat/event_series.hpp"
#include "photonstat/report.hpp"
#include "photonstat/stats.hpp"

// End-to-end checks of the installed binary: exit codes, file outputs, and
// agreement between the CLI pipeline and direct library calls.

using namespace photonstat;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("photonstat-cli-" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
    const fs::path out = scratch() / "stdout.txt";
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + PHOTONSTAT_BIN +
                            " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_coherent_config(const std::string& name, std::uint64_t seed) {
    const fs::path path = scratch() / name;
    spit(path,
         "kind = coherent\n"
         "duration_s = 2e-3\n"
         "photon_rate_hz = 1e7\n"
         "dead_time_s = 0\n"
         "rng_seed = " +
             std::to_string(seed) + "\n");
    return path;
}

fs::path write_spdc_config(const std::string& name, std::uint64_t seed) {
    const fs::path path = scratch() / name;
    spit(path,
         "kind = spdc_pair\n"
         "duration_s = 2e-3\n"
         "mode_time_s = 2e-9\n"
         "mean_pairs_per_mode = 0.01\n"
         "efficiency_signal = 0.95\n"
         "efficiency_idler = 0.95\n"
         "dead_time_s = 22e-9\n"
         "rng_seed = " +
             std::to_string(seed) + "\n");
    return path;
}

} // namespace

TEST_CASE("simulate coherent: one iteration, one event file plus manifest") {
    const auto cfg = write_coherent_config("coh1.cfg", 7);
    const auto prefix = (scratch() / "coh1").string();
    const RunResult r =
        run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 1");
    CHECK(r.code == 0);
    CHECK(fs::exists(prefix + ".iter01.ev"));
    CHECK(fs::exists(prefix + ".manifest.json"));
    CHECK(read_event_series(prefix + ".iter01.ev").count() > 0);

    SUBCASE("manifest verifies and then detects tampering") {
        CHECK(run_cli("report " + prefix + ".manifest.json --verify").code ==
              0);
        spit(cfg, "tampered\n");
        const RunResult bad =
            run_cli("report " + prefix + ".manifest.json --verify");
        CHECK(bad.code == 3);
        CHECK(bad.err.find("mismatch") != std::string::npos);
    }
}

TEST_CASE("simulate spdc: ten iterations produce twenty event files") {
    const auto cfg = write_spdc_config("spdc10.cfg", 11);
    const auto prefix = (scratch() / "spdc10").string();
    const RunResult r =
        run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 10");
    CHECK(r.code == 0);
    int files = 0;
    for (int i = 1; i <= 10; ++i) {
        char stem[64];
        std::snprintf(stem, sizeof stem, "%s.iter%02d", prefix.c_str(), i);
        if (fs::exists(std::string(stem) + ".signal.ev")) ++files;
        if (fs::exists(std::string(stem) + ".idler.ev")) ++files;
    }
    CHECK(files == 20);
}

TEST_CASE("simulate: identical seeds give byte-identical outputs") {
    const auto cfg = write_coherent_config("det.cfg", 99);
    const auto p1 = (scratch() / "det_a").string();
    const auto p2 = (scratch() / "det_b").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + p1 + " -n 2").code ==
          0);
    CHECK(run_cli("simulate " + cfg.string() + " -o " + p2 + " -n 2").code ==
          0);
    CHECK(slurp(p1 + ".iter01.ev") == slurp(p2 + ".iter01.ev"));
    CHECK(slurp(p1 + ".iter02.ev") == slurp(p2 + ".iter02.ev"));
    CHECK(!slurp(p1 + ".iter01.ev").empty());
}

TEST_CASE("simulate: worker count never changes the data bytes") {
    const auto cfg = write_spdc_config("thr.cfg", 123);
    const auto p1 = (scratch() / "thr1").string();
    const auto p2 = (scratch() / "thr4").string();
    const auto p3 = (scratch() / "thrE").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + p1 +
                  " -n 4 --threads 1")
              .code == 0);
    CHECK(run_cli("simulate " + cfg.string() + " -o " + p2 +
                  " -n 4 --threads 4")
              .code == 0);
    // PHOTONSTAT_THREADS is the fallback when --threads is absent.
    CHECK(run_cli("simulate " + cfg.string() + " -o " + p3 + " -n 4",
                  "PHOTONSTAT_THREADS=3")
              .code == 0);
    for (int i = 1; i <= 4; ++i) {
        char a[64], b[64], c[64];
        std::snprintf(a, sizeof a, "%s.iter%02d.signal.ev", p1.c_str(), i);
        std::snprintf(b, sizeof b, "%s.iter%02d.signal.ev", p2.c_str(), i);
        std::snprintf(c, sizeof c, "%s.iter%02d.signal.ev", p3.c_str(), i);
        CHECK(slurp(a) == slurp(b));
        CHECK(slurp(a) == slurp(c));
    }
}

TEST_CASE("emit-trace round trip: digitize reproduces the simulator events") {
    const auto cfg = write_spdc_config("trace.cfg", 17);
    const auto prefix = (scratch() / "trace").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix +
                  " -n 1 --emit-trace")
              .code == 0);
    const std::string trace = prefix + ".iter01.signal.trace.rawf32";
    REQUIRE(fs::exists(trace));
    const std::string redig = prefix + ".redigitized.ev";
    CHECK(run_cli("digitize " + trace + " -o " + redig).code == 0);
    CHECK(slurp(redig) == slurp(prefix + ".iter01.signal.ev"));
}

TEST_CASE("digitize: flat trace gives an event-free file") {
    const fs::path trace = scratch() / "flat.csv";
    std::string body = "# photonstat-trace v1\nsample_period_s=1e-9\nchannel=x\n";
    for (int i = 0; i < 1000; ++i) body += "0.0\n";
    spit(trace, body);
    const std::string out = (scratch() / "flat.ev").string();
    const RunResult r = run_cli("digitize " + trace.string() + " -o " + out);
    CHECK(r.code == 0);
    CHECK(read_event_series(out).count() == 0);
}

TEST_CASE("digitize: missing input is an I/O error naming the path") {
    const RunResult r = run_cli("digitize /no/such/file.rawf32 -o " +
                                (scratch() / "x.ev").string());
    CHECK(r.code == 3);
    CHECK(r.err.find("/no/such/file.rawf32") != std::string::npos);
}

TEST_CASE("exit codes: argument, data and calibration failures") {
    // Unknown flag -> 2.
    CHECK(run_cli("stats --bogus-flag x").code == 2);
    // Unknown subcommand -> 2.
    CHECK(run_cli("frobnicate").code == 2);
    // Malformed trace -> 3.
    const fs::path garbage = scratch() / "garbage.csv";
    spit(garbage, "not a trace\n");
    CHECK(run_cli("digitize " + garbage.string() + " -o " +
                  (scratch() / "g.ev").string())
              .code == 3);
    // Event-free series cannot be calibrated -> 4.
    const fs::path empty_ev = scratch() / "empty.ev";
    write_event_series(EventSeries(1e-9, 4096), empty_ev);
    CHECK(run_cli("stats " + empty_ev.string() + " -o " +
                  (scratch() / "empty_stats").string())
              .code == 4);
    // A bin width wider than the series leaves no statistics -> 4.
    const fs::path one_ev = scratch() / "one.ev";
    EventSeries one(1e-9, 64);
    one.set(5);
    write_event_series(one, one_ev);
    CHECK(run_cli("stats " + one_ev.string() + " --bin-width 1000 -o " +
                  (scratch() / "one_stats").string())
              .code == 4);
    // Invalid config -> 2.
    const fs::path bad_cfg = scratch() / "bad.cfg";
    spit(bad_cfg, "kind = coherent\nduration_s = -1\n");
    CHECK(run_cli("simulate " + bad_cfg.string() + " -o " +
                  (scratch() / "bad").string())
              .code == 2);
}

TEST_CASE("stats matches direct library calls bit for bit") {
    const auto cfg = write_coherent_config("eq.cfg", 31);
    const auto prefix = (scratch() / "eq").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 3")
              .code == 0);
    const std::string files = prefix + ".iter01.ev " + prefix + ".iter02.ev " +
                              prefix + ".iter03.ev";
    const RunResult r =
        run_cli("stats " + files + " --target-mean 1 -o " + prefix);
    CHECK(r.code == 0);
    const QReport cli_report = read_qreport(prefix + ".qreport.txt");

    std::vector<double> qs;
    for (int i = 1; i <= 3; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s.iter%02d.ev", prefix.c_str(), i);
        const EventSeries s = read_event_series(name);
        const std::uint64_t w = calibrate_bin_width(s, 1.0);
        const Moments m = moments(histogram(bin_counts(s, w), w));
        qs.push_back(mandel_q(m.mean, m.variance));
    }
    const QReport lib_report = aggregate(qs);
    REQUIRE(cli_report.per_iteration_q.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(cli_report.per_iteration_q[i] == qs[i]); // 17 digits round-trip
    CHECK(cli_report.q_mean == lib_report.q_mean);
    CHECK(cli_report.q_std == lib_report.q_std);
    CHECK(std::fabs(cli_report.q_mean) < 0.05);
}

TEST_CASE("stats on single SPDC arms reports super-Poissonian light") {
    const fs::path cfg = scratch() / "thermal.cfg";
    spit(cfg,
         "kind = spdc_pair\n"
         "duration_s = 2e-3\n"
         "mode_time_s = 50e-9\n"
         "mean_pairs_per_mode = 0.25\n"
         "dead_time_s = 0\n"
         "rng_seed = 61\n");
    const auto prefix = (scratch() / "thermal").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 2")
              .code == 0);
    for (const char* arm : {"signal", "idler"}) {
        const std::string out = prefix + "." + arm;
        CHECK(run_cli("stats " + prefix + ".iter01." + arm + ".ev " + prefix +
                      ".iter02." + arm + ".ev -o " + out)
                  .code == 0);
        CHECK(read_qreport(out + ".qreport.txt").q_mean > 0.0);
    }
}

TEST_CASE("stats --herald produces a sub-Poissonian coincidence stream") {
    const auto cfg = write_spdc_config("her.cfg", 41);
    const auto prefix = (scratch() / "her").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 2")
              .code == 0);
    const RunResult r = run_cli(
        "stats " + prefix + ".iter01.signal.ev " + prefix +
        ".iter02.signal.ev --herald " + prefix + ".iter01.idler.ev " + prefix +
        ".iter02.idler.ev --window 1 -o " + prefix);
    CHECK(r.code == 0);
    const QReport report = read_qreport(prefix + ".qreport.txt");
    CHECK(report.q_mean < 0.0);
}

TEST_CASE("herald subcommand agrees with stats --herald") {
    const auto cfg = write_spdc_config("hcmd.cfg", 43);
    const auto prefix = (scratch() / "hcmd").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 1")
              .code == 0);
    const std::string coinc = prefix + ".coinc.ev";
    CHECK(run_cli("herald " + prefix + ".iter01.signal.ev " + prefix +
                  ".iter01.idler.ev --window 1 -o " + coinc)
              .code == 0);
    const EventSeries c = read_event_series(coinc);
    const EventSeries s = read_event_series(prefix + ".iter01.signal.ev");
    const EventSeries i = read_event_series(prefix + ".iter01.idler.ev");
    CHECK(c == herald(s, i, 1));
    CHECK(c.count() > 0);
    CHECK(c.count() <= s.count());
}

TEST_CASE("stats --format svg also writes charts") {
    const auto cfg = write_coherent_config("svg.cfg", 53);
    const auto prefix = (scratch() / "svg").string();
    CHECK(run_cli("simulate " + cfg.string() + " -o " + prefix + " -n 1")
              .code == 0);
    CHECK(run_cli("stats " + prefix + ".iter01.ev --format svg -o " + prefix)
              .code == 0);
    const std::string svg = slurp(prefix + ".iter01.hist.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    SUBCASE("report renders an existing histogram CSV to SVG") {
        const std::string out = prefix + ".render.svg";
        CHECK(run_cli("report " + prefix + ".iter01.hist.csv -o " + out)
                  .code == 0);
        CHECK(slurp(out).find("<svg") != std::string::npos);
    }
    SUBCASE("report summarizes a qreport") {
        const RunResult r = run_cli("report " + prefix + ".qreport.txt");
        CHECK(r.code == 0);
        CHECK(r.out.find("q_mean=") != std::string::npos);
    }
}
