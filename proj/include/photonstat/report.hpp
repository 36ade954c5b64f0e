#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "photonstat/stats.hpp"

// Plot-ready exports. Floating-point values are printed with 17
// significant digits (lossless for doubles) alongside a rounded display
// value for human readers.

namespace photonstat {

// CSV columns n,count,probability; header comments carry bin width, bin
// total, mean, variance and Q.
void write_histogram_csv(const CountHistogram& h, const Moments& m, double q,
                         std::ostream& out);
void write_histogram_csv(const CountHistogram& h, const Moments& m, double q,
                         const std::filesystem::path& path);
// Round-trips the CSV above (comments ignored beyond the magic line).
CountHistogram read_histogram_csv(std::istream& in);
CountHistogram read_histogram_csv(const std::filesystem::path& path);

// Self-contained SVG bar chart of p(n).
void write_histogram_svg(const CountHistogram& h, const Moments& m, double q,
                         const std::string& title, std::ostream& out);
void write_histogram_svg(const CountHistogram& h, const Moments& m, double q,
                         const std::string& title,
                         const std::filesystem::path& path);

// Key-value text: iterations=, q_mean=, q_std=, one q[i]= per iteration,
// plus the pooled mean/variance/q summary lines.
void write_qreport(const QReport& report, std::ostream& out);
void write_qreport(const QReport& report, const std::filesystem::path& path);
QReport read_qreport(std::istream& in);
QReport read_qreport(const std::filesystem::path& path);

// "%.17g" / "%.4g" helpers shared by the writers.
std::string format_full(double v);
std::string format_display(double v);

} // namespace photonstat
