#include "photonstat/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "photonstat/errors.hpp"
#include "photonstat/version.hpp"

namespace photonstat {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s, const char* where) {
    if (s.size() != 18 || s[0] != '0' || s[1] != 'x')
        throw FormatError(std::string(where) + ": bad digest '" + s + "'");
    return std::stoull(s.substr(2), nullptr, 16);
}

json config_to_json(const SimConfig& cfg) {
    json j;
    j["kind"] = cfg.kind == SourceKind::coherent ? "coherent" : "spdc_pair";
    j["duration_s"] = cfg.duration_s;
    j["resolution_s"] = cfg.resolution_s;
    j["photon_rate_hz"] = cfg.photon_rate_hz;
    j["mean_pairs_per_mode"] = cfg.mean_pairs_per_mode;
    j["pair_rate_hz"] = cfg.pair_rate_hz;
    j["mode_time_s"] = cfg.mode_time_s;
    j["efficiency_signal"] = cfg.efficiency_signal;
    j["efficiency_idler"] = cfg.efficiency_idler;
    j["dark_rate_hz"] = cfg.dark_rate_hz;
    j["dead_time_s"] = cfg.dead_time_s;
    j["pump_oam_order"] = cfg.pump_oam_order;
    j["oam_heralding_scale"] = cfg.oam_heralding_scale;
    j["rng_seed"] = cfg.rng_seed;
    j["pulse_width_s"] = cfg.pulse_width_s;
    j["pulse_amplitude_v"] = cfg.pulse_amplitude_v;
    return j;
}

SimConfig config_from_json(const json& j) {
    SimConfig cfg;
    cfg.kind = j.at("kind").get<std::string>() == "coherent"
                   ? SourceKind::coherent
                   : SourceKind::spdc_pair;
    cfg.duration_s = j.at("duration_s").get<double>();
    cfg.resolution_s = j.at("resolution_s").get<double>();
    cfg.photon_rate_hz = j.at("photon_rate_hz").get<double>();
    cfg.mean_pairs_per_mode = j.at("mean_pairs_per_mode").get<double>();
    cfg.pair_rate_hz = j.at("pair_rate_hz").get<double>();
    cfg.mode_time_s = j.at("mode_time_s").get<double>();
    cfg.efficiency_signal = j.at("efficiency_signal").get<double>();
    cfg.efficiency_idler = j.at("efficiency_idler").get<double>();
    cfg.dark_rate_hz = j.at("dark_rate_hz").get<double>();
    cfg.dead_time_s = j.at("dead_time_s").get<double>();
    cfg.pump_oam_order = j.at("pump_oam_order").get<unsigned>();
    cfg.oam_heralding_scale = j.at("oam_heralding_scale").get<double>();
    cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    cfg.pulse_width_s = j.at("pulse_width_s").get<double>();
    cfg.pulse_amplitude_v = j.at("pulse_amplitude_v").get<double>();
    return cfg;
}

json digests_to_json(const std::vector<FileDigest>& digests) {
    json arr = json::array();
    for (const auto& d : digests)
        arr.push_back({{"path", d.path}, {"fnv1a64", hex64(d.fnv1a64)}});
    return arr;
}

std::vector<FileDigest> digests_from_json(const json& arr, const char* where) {
    std::vector<FileDigest> out;
    for (const auto& item : arr)
        out.push_back({item.at("path").get<std::string>(),
                       parse_hex64(item.at("fnv1a64").get<std::string>(),
                                   where)});
    return out;
}

} // namespace

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return hash;
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path) {
    json j;
    j["tool"] = manifest.tool.empty()
                    ? std::string(kToolName) + " " + kToolVersion
                    : manifest.tool;
    j["format_version"] =
        manifest.format_version ? manifest.format_version : kFormatVersion;
    j["command_line"] = manifest.command_line;
    j["rng"] = manifest.rng.empty() ? kRngDescription : manifest.rng;
    j["inputs"] = digests_to_json(manifest.inputs);
    j["outputs"] = digests_to_json(manifest.outputs);
    if (manifest.sim_config)
        j["sim_config"] = config_to_json(*manifest.sim_config);
    else
        j["sim_config"] = nullptr;
    j["warnings"] = manifest.warnings;
    j["wall_seconds"] = manifest.wall_seconds;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw FormatError("manifest: write failed");
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("manifest: " + std::string(e.what()));
    }
    try {
        RunManifest m;
        m.tool = j.at("tool").get<std::string>();
        m.format_version = j.at("format_version").get<int>();
        m.command_line = j.at("command_line").get<std::string>();
        m.rng = j.value("rng", std::string{});
        m.inputs = digests_from_json(j.at("inputs"), "manifest inputs");
        m.outputs = digests_from_json(j.at("outputs"), "manifest outputs");
        if (!j.at("sim_config").is_null())
            m.sim_config = config_from_json(j.at("sim_config"));
        m.warnings = j.value("warnings", std::vector<std::string>{});
        m.wall_seconds = j.at("wall_seconds").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw FormatError("manifest: " + std::string(e.what()));
    }
}

std::vector<std::string> verify_manifest(const RunManifest& manifest) {
    std::vector<std::string> bad;
    const auto check = [&](const std::vector<FileDigest>& digests) {
        for (const auto& d : digests) {
            try {
                if (fnv1a64_file(d.path) != d.fnv1a64) bad.push_back(d.path);
            } catch (const FormatError&) {
                bad.push_back(d.path);
            }
        }
    };
    check(manifest.inputs);
    check(manifest.outputs);
    return bad;
}

} // namespace photonstat
