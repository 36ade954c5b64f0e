#include "photonstat/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

constexpr char kHistMagic[] = "# photonstat-histogram v1";
constexpr char kQReportMagic[] = "# photonstat-qreport v1";

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view v, const char* where) {
    double out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size())
        throw FormatError(std::string(where) + ": bad number '" +
                          std::string(v) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view v, const char* where) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size())
        throw FormatError(std::string(where) + ": bad integer '" +
                          std::string(v) + "'");
    return out;
}

} // namespace

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_display(double v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void write_histogram_csv(const CountHistogram& h, const Moments& m, double q,
                         std::ostream& out) {
    out << kHistMagic << '\n';
    out << "# bin_width_slots=" << h.bin_width_slots << '\n';
    out << "# total_bins=" << h.total_bins << '\n';
    out << "# mean=" << format_full(m.mean) << " (" << format_display(m.mean)
        << ")\n";
    out << "# variance=" << format_full(m.variance) << " ("
        << format_display(m.variance) << ")\n";
    out << "# q=" << format_full(q) << " (" << format_display(q) << ")\n";
    out << "n,count,probability\n";
    for (std::uint64_t n = 0; n < h.counts_per_n.size(); ++n)
        out << n << ',' << h.counts_per_n[n] << ','
            << format_full(h.probability(n)) << '\n';
    if (!out) throw FormatError("histogram csv: write failed");
}

void write_histogram_csv(const CountHistogram& h, const Moments& m, double q,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    write_histogram_csv(h, m, q, out);
}

CountHistogram read_histogram_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kHistMagic)
        throw FormatError("histogram csv: bad magic line");
    CountHistogram h;
    h.total_bins = 0;
    bool in_rows = false;
    while (std::getline(in, line)) {
        std::string_view text = strip_cr(line);
        if (text.empty()) continue;
        if (text.starts_with("# bin_width_slots=")) {
            h.bin_width_slots = parse_u64(text.substr(18), "histogram csv");
            continue;
        }
        if (text.starts_with("#")) continue;
        if (text == "n,count,probability") {
            in_rows = true;
            continue;
        }
        if (!in_rows) throw FormatError("histogram csv: missing column header");
        const auto c1 = text.find(',');
        const auto c2 = text.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
            throw FormatError("histogram csv: malformed row '" +
                              std::string(text) + "'");
        const std::uint64_t n = parse_u64(text.substr(0, c1), "histogram csv");
        const std::uint64_t count =
            parse_u64(text.substr(c1 + 1, c2 - c1 - 1), "histogram csv");
        if (n >= h.counts_per_n.size()) h.counts_per_n.resize(n + 1, 0);
        h.counts_per_n[n] = count;
        h.total_bins += count;
    }
    if (!in_rows || h.total_bins == 0)
        throw FormatError("histogram csv: no data rows");
    return h;
}

CountHistogram read_histogram_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return read_histogram_csv(in);
}

void write_histogram_svg(const CountHistogram& h, const Moments& m, double q,
                         const std::string& title, std::ostream& out) {
    const int width = 640, height = 420;
    const int left = 60, right = 20, top = 50, bottom = 50;
    const int plot_w = width - left - right;
    const int plot_h = height - top - bottom;
    const std::size_t bars = std::max<std::size_t>(h.counts_per_n.size(), 1);
    double pmax = 0.0;
    for (std::uint64_t n = 0; n < h.counts_per_n.size(); ++n)
        pmax = std::max(pmax, h.probability(n));
    if (pmax <= 0.0) pmax = 1.0;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"40\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"12\">mean="
        << format_display(m.mean) << "  variance=" << format_display(m.variance)
        << "  Q=" << format_display(q) << "</text>\n";
    // axes
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
        << left + plot_w << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    const double bar_w = static_cast<double>(plot_w) / static_cast<double>(bars);
    for (std::size_t n = 0; n < h.counts_per_n.size(); ++n) {
        const double p = h.probability(n);
        const double bh = p / pmax * plot_h;
        const double x = left + bar_w * static_cast<double>(n) + bar_w * 0.1;
        out << "<rect x=\"" << x << "\" y=\"" << top + plot_h - bh
            << "\" width=\"" << bar_w * 0.8 << "\" height=\"" << bh
            << "\" fill=\"#4878cf\"/>\n";
        if (bars <= 24)
            out << "<text x=\"" << x + bar_w * 0.4 << "\" y=\""
                << top + plot_h + 16
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"11\">"
                << n << "</text>\n";
    }
    out << "<text x=\"" << left - 8 << "\" y=\"" << top + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_display(pmax) << "</text>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << top + plot_h
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">0</text>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">events per bin, n</text>\n";
    out << "<text x=\"16\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 16 "
        << top + plot_h / 2 << ")\">p(n)</text>\n";
    out << "</svg>\n";
    if (!out) throw FormatError("histogram svg: write failed");
}

void write_histogram_svg(const CountHistogram& h, const Moments& m, double q,
                         const std::string& title,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    write_histogram_svg(h, m, q, title, out);
}

void write_qreport(const QReport& report, std::ostream& out) {
    const auto kv = [&](const char* key, double v) {
        out << key << '=' << format_full(v) << "  # display "
            << format_display(v) << '\n';
    };
    out << kQReportMagic << '\n';
    out << "iterations=" << report.per_iteration_q.size() << '\n';
    kv("q_mean", report.q_mean);
    kv("q_std", report.q_std);
    kv("mean", report.mean);
    kv("variance", report.variance);
    kv("q", report.q);
    for (std::size_t i = 0; i < report.per_iteration_q.size(); ++i) {
        std::ostringstream key;
        key << "q[" << i << "]";
        kv(key.str().c_str(), report.per_iteration_q[i]);
    }
    if (!out) throw FormatError("qreport: write failed");
}

void write_qreport(const QReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    write_qreport(report, out);
}

QReport read_qreport(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kQReportMagic)
        throw FormatError("qreport: bad magic line");
    QReport report;
    std::size_t iterations = 0;
    while (std::getline(in, line)) {
        std::string_view text = strip_cr(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos)
            text = text.substr(0, hash);
        while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw FormatError("qreport: malformed line '" + std::string(text) +
                              "'");
        const std::string_view key = text.substr(0, eq);
        const std::string_view value = text.substr(eq + 1);
        if (key == "iterations") {
            iterations = parse_u64(value, "qreport");
            report.per_iteration_q.assign(iterations, 0.0);
        } else if (key == "q_mean") {
            report.q_mean = parse_double(value, "qreport");
        } else if (key == "q_std") {
            report.q_std = parse_double(value, "qreport");
        } else if (key == "mean") {
            report.mean = parse_double(value, "qreport");
        } else if (key == "variance") {
            report.variance = parse_double(value, "qreport");
        } else if (key == "q") {
            report.q = parse_double(value, "qreport");
        } else if (key.starts_with("q[") && key.ends_with("]")) {
            const std::uint64_t i =
                parse_u64(key.substr(2, key.size() - 3), "qreport");
            if (i >= report.per_iteration_q.size())
                throw FormatError("qreport: q index out of range");
            report.per_iteration_q[i] = parse_double(value, "qreport");
        } else {
            throw FormatError("qreport: unknown key '" + std::string(key) +
                              "'");
        }
    }
    if (report.per_iteration_q.size() != iterations)
        throw FormatError("qreport: missing iterations line");
    return report;
}

QReport read_qreport(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return read_qreport(in);
}

} // namespace photonstat
