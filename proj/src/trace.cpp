#include "photonstat/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "photonstat/errors.hpp"
#include "le_io.hpp"

namespace photonstat {

namespace {

constexpr char kCsvMagic[] = "# photonstat-trace v1";
constexpr char kRawMagic[9] = "PHSTRACE";
constexpr std::uint16_t kRawVersion = 1;

[[noreturn]] void fail_line(std::uint64_t line, const std::string& what) {
    std::ostringstream msg;
    msg << "trace csv: line " << line << ": " << what;
    throw FormatError(msg.str());
}

double parse_double_field(std::string_view text, std::uint64_t line,
                          const char* name) {
    double value = 0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
        fail_line(line, std::string("cannot parse ") + name);
    return value;
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

AnalogTrace parse_trace_csv(std::istream& in, std::uint64_t reserve_hint) {
    AnalogTrace trace;
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kCsvMagic)
        fail_line(1, "expected header '# photonstat-trace v1'");
    if (!std::getline(in, line))
        fail_line(2, "missing sample_period_s line");
    std::string_view l2 = strip_cr(line);
    if (!l2.starts_with("sample_period_s="))
        fail_line(2, "expected 'sample_period_s=<float>'");
    trace.sample_period_s =
        parse_double_field(l2.substr(16), 2, "sample_period_s");
    if (!(trace.sample_period_s > 0.0) || !std::isfinite(trace.sample_period_s))
        fail_line(2, "sample_period_s must be positive and finite");
    if (!std::getline(in, line)) fail_line(3, "missing channel line");
    std::string_view l3 = strip_cr(line);
    if (!l3.starts_with("channel=")) fail_line(3, "expected 'channel=<text>'");
    trace.channel_label = std::string(l3.substr(8));

    if (reserve_hint > 0) trace.samples.reserve(reserve_hint);
    std::uint64_t lineno = 3;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view text = strip_cr(line);
        if (text.empty()) {
            // A single trailing newline is tolerated; a blank line mid-file
            // is not.
            if (in.peek() == std::char_traits<char>::eof()) break;
            fail_line(lineno, "blank sample line");
        }
        float value = 0;
        const auto [end, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || end != text.data() + text.size())
            fail_line(lineno, "cannot parse sample value");
        if (!std::isfinite(value)) {
            std::ostringstream msg;
            msg << "trace csv: line " << lineno << ": non-finite sample value";
            throw DataError(msg.str());
        }
        trace.samples.push_back(value);
    }
    if (trace.samples.empty())
        fail_line(lineno + 1, "empty sample section");
    return trace;
}

AnalogTrace parse_trace_rawf32(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8))
        throw FormatError("trace rawf32: truncated before magic (byte 0)");
    if (std::memcmp(magic, kRawMagic, 8) != 0)
        throw FormatError("trace rawf32: bad magic at byte 0");
    std::uint16_t version = 0, reserved16 = 0;
    std::uint32_t reserved32 = 0;
    if (!detail::get_le(in, version) || !detail::get_le(in, reserved16) ||
        !detail::get_le(in, reserved32))
        throw FormatError("trace rawf32: truncated header at byte 8");
    if (version != kRawVersion) {
        std::ostringstream msg;
        msg << "trace rawf32: unsupported version " << version << " at byte 8";
        throw FormatError(msg.str());
    }
    AnalogTrace trace;
    std::uint64_t count = 0;
    if (!detail::get_le(in, trace.sample_period_s))
        throw FormatError("trace rawf32: truncated header at byte 16");
    if (!detail::get_le(in, count))
        throw FormatError("trace rawf32: truncated header at byte 24");
    if (!(trace.sample_period_s > 0.0) || !std::isfinite(trace.sample_period_s))
        throw DataError("trace rawf32: non-positive sample period in header");
    if (count == 0)
        throw FormatError("trace rawf32: empty sample section");

    try {
        trace.samples.resize(count);
    } catch (const std::bad_alloc&) {
        throw FormatError("trace rawf32: sample count exceeds available memory");
    }
    // Bulk read, then fix endianness in place (no-op on LE hosts).
    in.read(reinterpret_cast<char*>(trace.samples.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::uint64_t>(in.gcount()) != count * sizeof(float)) {
        std::ostringstream msg;
        msg << "trace rawf32: truncated payload at byte "
            << (32 + static_cast<std::uint64_t>(std::max<std::streamsize>(
                         in.gcount(), 0)));
        throw FormatError(msg.str());
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (float& f : trace.samples) {
            auto v = std::bit_cast<std::uint32_t>(f);
            v = __builtin_bswap32(v);
            f = std::bit_cast<float>(v);
        }
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("trace rawf32: trailing bytes after payload");
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!std::isfinite(trace.samples[i])) {
            std::ostringstream msg;
            msg << "trace rawf32: non-finite sample at index " << i;
            throw DataError(msg.str());
        }
    }
    return trace;
}

} // namespace

AnalogTrace parse_trace(std::istream& in, TraceFormat format) {
    return format == TraceFormat::csv ? parse_trace_csv(in, 0)
                                      : parse_trace_rawf32(in);
}

void write_trace(const AnalogTrace& trace, std::ostream& out,
                 TraceFormat format) {
    if (format == TraceFormat::csv) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", trace.sample_period_s);
        out << kCsvMagic << '\n'
            << "sample_period_s=" << buf << '\n'
            << "channel=" << trace.channel_label << '\n';
        for (float v : trace.samples) {
            // 9 significant digits round-trips any f32 through decimal.
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
            out << buf << '\n';
        }
    } else {
        out.write(kRawMagic, 8);
        detail::put_le(out, kRawVersion);
        detail::put_le(out, std::uint16_t{0});
        detail::put_le(out, std::uint32_t{0});
        detail::put_le(out, trace.sample_period_s);
        detail::put_le(out, static_cast<std::uint64_t>(trace.samples.size()));
        if constexpr (std::endian::native == std::endian::little) {
            out.write(reinterpret_cast<const char*>(trace.samples.data()),
                      static_cast<std::streamsize>(trace.samples.size() *
                                                   sizeof(float)));
        } else {
            for (float f : trace.samples) detail::put_le(out, f);
        }
    }
    if (!out) throw FormatError("trace: write failed");
}

AnalogTrace load_trace(const std::filesystem::path& path, TraceFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    if (format == TraceFormat::csv) {
        // Count sample lines first so one exact allocation holds the data.
        std::uint64_t lines = 0;
        {
            std::ifstream counting(path, std::ios::binary);
            char buf[1 << 16];
            while (counting.read(buf, sizeof buf) || counting.gcount() > 0) {
                lines += static_cast<std::uint64_t>(
                    std::count(buf, buf + counting.gcount(), '\n'));
                if (!counting) break;
            }
        }
        const std::uint64_t hint = lines > 3 ? lines - 3 : 0;
        return parse_trace_csv(in, hint);
    }
    return parse_trace_rawf32(in);
}

AnalogTrace load_trace(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw FormatError("cannot open: " + path.string());
    char head[8] = {};
    probe.read(head, 8);
    const bool raw = probe.gcount() == 8 && std::memcmp(head, kRawMagic, 8) == 0;
    return load_trace(path, raw ? TraceFormat::rawf32 : TraceFormat::csv);
}

void save_trace(const AnalogTrace& trace, const std::filesystem::path& path,
                TraceFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot open for writing: " + path.string());
    write_trace(trace, out, format);
}

} // namespace photonstat
