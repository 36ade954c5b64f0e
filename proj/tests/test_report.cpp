#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "photonstat/errors.hpp"
#include "photonstat/manifest.hpp"
#include "photonstat/report.hpp"
#include "photonstat/stats.hpp"

using namespace photonstat;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("photonstat-report-" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CountHistogram sample_hist() {
    CountHistogram h;
    h.bin_width_slots = 40;
    h.total_bins = 10;
    h.counts_per_n = {3, 4, 2, 1};
    return h;
}

} // namespace

TEST_CASE("histogram csv: header carries the moments, rows round-trip") {
    const CountHistogram h = sample_hist();
    const Moments m = moments(h);
    const double q = mandel_q(m.mean, m.variance);
    std::ostringstream out;
    write_histogram_csv(h, m, q, out);
    const std::string text = out.str();
    CHECK(text.find("# photonstat-histogram v1\n") == 0);
    CHECK(text.find("# bin_width_slots=40") != std::string::npos);
    CHECK(text.find("# total_bins=10") != std::string::npos);
    CHECK(text.find("n,count,probability") != std::string::npos);

    std::istringstream in(text);
    const CountHistogram back = read_histogram_csv(in);
    CHECK(back.bin_width_slots == h.bin_width_slots);
    CHECK(back.total_bins == h.total_bins);
    CHECK(back.counts_per_n == h.counts_per_n);
}

TEST_CASE("qreport: full-precision values survive the text round trip") {
    QReport r;
    r.mean = 0.9998004071059987;
    r.variance = 0.8991230458212345;
    r.q = (r.variance - r.mean) / r.mean;
    r.per_iteration_q = {-0.1007, -0.0993, -0.1012};
    r.q_mean = -0.1004;
    r.q_std = 0.00098;
    std::ostringstream out;
    write_qreport(r, out);
    const std::string text = out.str();
    CHECK(text.find("# photonstat-qreport v1\n") == 0);
    CHECK(text.find("iterations=3") != std::string::npos);
    CHECK(text.find("q_mean=") != std::string::npos);
    CHECK(text.find("# display") != std::string::npos);

    std::istringstream in(text);
    const QReport back = read_qreport(in);
    CHECK(back.mean == r.mean);
    CHECK(back.variance == r.variance);
    CHECK(back.q == r.q);
    CHECK(back.q_mean == r.q_mean);
    CHECK(back.q_std == r.q_std);
    CHECK(back.per_iteration_q == r.per_iteration_q);
}

TEST_CASE("qreport: malformed documents are rejected") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_qreport(in);
    };
    CHECK_THROWS_AS(parse("nonsense\n"), FormatError);
    CHECK_THROWS_AS(parse("# photonstat-qreport v1\nq[0]=0.1\n"), FormatError);
    CHECK_THROWS_AS(
        parse("# photonstat-qreport v1\niterations=1\nq[3]=0.1\n"),
        FormatError);
    CHECK_THROWS_AS(parse("# photonstat-qreport v1\niterations=0\nwho=1\n"),
                    FormatError);
}

TEST_CASE("svg output is self-contained and scaled") {
    const CountHistogram h = sample_hist();
    const Moments m = moments(h);
    std::ostringstream out;
    write_histogram_svg(h, m, mandel_q(m.mean, m.variance), "demo", out);
    const std::string svg = out.str();
    CHECK(svg.find("<svg xmlns=") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
    CHECK(svg.find("demo") != std::string::npos);
    // One bar per occupied n value.
    std::size_t bars = 0, at = 0;
    while ((at = svg.find("<rect", at + 1)) != std::string::npos) ++bars;
    CHECK(bars == 1 + h.counts_per_n.size()); // background + data bars
}

TEST_CASE("manifest: json round trip and digest verification") {
    const fs::path input = scratch() / "input.bin";
    {
        std::ofstream f(input, std::ios::binary);
        f << "payload-123";
    }
    RunManifest m;
    m.command_line = "photonstat simulate demo.cfg -o demo -n 2";
    m.inputs.push_back({input.string(), fnv1a64_file(input)});
    m.warnings.push_back("demo warning");
    m.wall_seconds = 1.25;
    SimConfig cfg;
    cfg.kind = SourceKind::spdc_pair;
    cfg.duration_s = 1e-3;
    cfg.mean_pairs_per_mode = 0.01;
    m.sim_config = cfg;

    const fs::path path = scratch() / "run.manifest.json";
    write_manifest(m, path);
    const RunManifest back = read_manifest(path);
    CHECK(back.command_line == m.command_line);
    CHECK(back.format_version == 1);
    CHECK(back.rng == std::string("xoshiro256++ over splitmix64 stream "
                                  "derivation"));
    CHECK(back.inputs.size() == 1);
    CHECK(back.inputs[0].fnv1a64 == m.inputs[0].fnv1a64);
    CHECK(back.warnings == m.warnings);
    REQUIRE(back.sim_config.has_value());
    CHECK(back.sim_config->duration_s == 1e-3);
    CHECK(back.sim_config->kind == SourceKind::spdc_pair);

    CHECK(verify_manifest(back).empty());
    {
        std::ofstream f(input, std::ios::binary);
        f << "payload-124";
    }
    const auto bad = verify_manifest(back);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0] == input.string());
}

TEST_CASE("fnv1a64 matches the published test vectors") {
    const fs::path p = scratch() / "fnv.bin";
    {
        std::ofstream f(p, std::ios::binary);
        f << "a";
    }
    CHECK(fnv1a64_file(p) == 0xaf63dc4c8601ec8cull);
    {
        std::ofstream f(p, std::ios::binary);
        f << "foobar";
    }
    CHECK(fnv1a64_file(p) == 0x85944171f73967e8ull);
}
