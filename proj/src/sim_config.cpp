#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "photonstat/errors.hpp"
#include "photonstat/sim.hpp"

namespace photonstat {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::uint64_t line, const std::string& what) {
    std::ostringstream msg;
    msg << "config: line " << line << ": " << what;
    throw ArgumentError(msg.str());
}

double parse_number(std::string_view v, std::uint64_t line) {
    double out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out))
        fail(line, "expected a finite number, got '" + std::string(v) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view v, std::uint64_t line) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size())
        fail(line, "expected an unsigned integer, got '" + std::string(v) + "'");
    return out;
}

} // namespace

SimConfig parse_sim_config(std::istream& in) {
    SimConfig cfg;
    bool saw_kind = false, saw_duration = false;
    std::string raw;
    std::uint64_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line{raw};
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(lineno, "expected 'key = value'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (value.empty()) fail(lineno, "empty value for '" + key + "'");

        if (key == "kind") {
            if (value == "coherent")
                cfg.kind = SourceKind::coherent;
            else if (value == "spdc_pair")
                cfg.kind = SourceKind::spdc_pair;
            else
                fail(lineno, "kind must be 'coherent' or 'spdc_pair'");
            saw_kind = true;
        } else if (key == "duration_s") {
            cfg.duration_s = parse_number(value, lineno);
            saw_duration = true;
        } else if (key == "resolution_s") {
            cfg.resolution_s = parse_number(value, lineno);
        } else if (key == "photon_rate_hz") {
            cfg.photon_rate_hz = parse_number(value, lineno);
        } else if (key == "pair_rate_hz") {
            cfg.pair_rate_hz = parse_number(value, lineno);
        } else if (key == "mean_pairs_per_mode") {
            cfg.mean_pairs_per_mode = parse_number(value, lineno);
        } else if (key == "mode_time_s") {
            cfg.mode_time_s = parse_number(value, lineno);
        } else if (key == "efficiency_signal") {
            cfg.efficiency_signal = parse_number(value, lineno);
        } else if (key == "efficiency_idler") {
            cfg.efficiency_idler = parse_number(value, lineno);
        } else if (key == "dark_rate_hz") {
            cfg.dark_rate_hz = parse_number(value, lineno);
        } else if (key == "dead_time_s") {
            cfg.dead_time_s = parse_number(value, lineno);
        } else if (key == "pump_oam_order") {
            cfg.pump_oam_order = static_cast<unsigned>(parse_u64(value, lineno));
        } else if (key == "oam_heralding_scale") {
            cfg.oam_heralding_scale = parse_number(value, lineno);
        } else if (key == "rng_seed") {
            cfg.rng_seed = parse_u64(value, lineno);
        } else if (key == "pulse_width_s") {
            cfg.pulse_width_s = parse_number(value, lineno);
        } else if (key == "pulse_amplitude_v") {
            cfg.pulse_amplitude_v = parse_number(value, lineno);
        } else {
            fail(lineno, "unknown key '" + key + "'");
        }
    }
    if (!saw_kind) throw ArgumentError("config: missing required key 'kind'");
    if (!saw_duration)
        throw ArgumentError("config: missing required key 'duration_s'");
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path.string());
    return parse_sim_config(in);
}

} // namespace photonstat
