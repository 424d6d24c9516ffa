#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lesion/error.hpp"
#include "lesion/eval.hpp"

namespace lesion::eval {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fixed(*v, 4) : "NA"; }

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                    "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};

}  // namespace

std::string render_metrics_csv(const MetricsReport& report) {
  std::string out = "Metric";
  for (std::size_t f = 0; f < report.folds.size(); ++f) out += ",Fold-" + std::to_string(f + 1);
  out += ",Average\n";
  for (Metric m : kAllMetrics) {
    out += metric_name(m);
    for (const MetricsRow& row : report.folds) {
      const auto& v = row[m];
      out += "," + cell(v ? std::optional<double>(v->value()) : std::nullopt);
    }
    out += "," + cell(report.average_of(m)) + "\n";
  }
  return out;
}

ParsedTable parse_metrics_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  ParsedTable table;
  if (!std::getline(in, line)) fail(ErrorKind::CorruptStream, "empty metrics CSV");
  table.header = split(line, ',');
  if (table.header.size() < 2 || table.header.front() != "Metric" || table.header.back() != "Average")
    fail(ErrorKind::CorruptStream, "metrics CSV header must be Metric,...,Average");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != table.header.size())
      fail(ErrorKind::CorruptStream, "metrics CSV row '" + parts.front() + "' has " +
                                         std::to_string(parts.size()) + " cells, expected " +
                                         std::to_string(table.header.size()));
    std::vector<std::optional<double>> values;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (parts[i] == "NA") {
        values.emplace_back();
        continue;
      }
      try {
        std::size_t used = 0;
        values.emplace_back(std::stod(parts[i], &used));
        if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      } catch (const std::logic_error&) {
        fail(ErrorKind::CorruptStream, "metrics CSV cell '" + parts[i] + "' is not a number");
      }
    }
    table.rows.emplace_back(parts.front(), std::move(values));
  }
  return table;
}

std::string render_metrics_svg(const MetricsReport& report, const std::string& title) {
  const std::size_t groups = kAllMetrics.size();
  const std::size_t series = report.folds.size() + 1;  // folds plus the average
  const double left = 50, top = 40, plot_h = 260, group_w = std::max<double>(90, 16.0 * series + 20);
  const double bar_w = (group_w - 20) / static_cast<double>(series);
  const double width = left + group_w * groups + 20, height = top + plot_h + 90;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = top + plot_h - plot_h * tick / 4.0;
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 20 << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << fixed(tick / 4.0, 2) << "</text>\n";
  }
  for (std::size_t g = 0; g < groups; ++g) {
    const Metric m = kAllMetrics[g];
    const double x0 = left + group_w * static_cast<double>(g) + 10;
    for (std::size_t s = 0; s < series; ++s) {
      std::optional<double> v;
      if (s < report.folds.size()) {
        if (const auto& f = report.folds[s][m]) v = f->value();
      } else {
        v = report.average_of(m);
      }
      if (!v) continue;
      const double h = plot_h * std::clamp(*v, 0.0, 1.0);
      svg << "<rect x=\"" << x0 + bar_w * static_cast<double>(s) << "\" y=\"" << top + plot_h - h
          << "\" width=\"" << bar_w - 1 << "\" height=\"" << h << "\" fill=\""
          << (s + 1 == series ? "#333" : kPalette[s % 8]) << "\"><title>"
          << (s + 1 == series ? std::string("Average") : "Fold-" + std::to_string(s + 1)) << " "
          << fixed(*v, 4) << "</title></rect>\n";
    }
    svg << "<text x=\"" << x0 + (group_w - 20) / 2 << "\" y=\"" << top + plot_h + 16
        << "\" text-anchor=\"middle\">" << metric_name(m) << "</text>\n";
  }
  double lx = left;
  for (std::size_t s = 0; s < series; ++s) {
    const bool avg = s + 1 == series;
    svg << "<rect x=\"" << lx << "\" y=\"" << top + plot_h + 40 << "\" width=\"10\" height=\"10\" fill=\""
        << (avg ? "#333" : kPalette[s % 8]) << "\"/>";
    svg << "<text x=\"" << lx + 14 << "\" y=\"" << top + plot_h + 49 << "\">"
        << (avg ? std::string("Average") : "Fold-" + std::to_string(s + 1)) << "</text>\n";
    lx += 70;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_histogram_csv(const ive::HistogramReport& report) {
  if (report.entries.empty()) fail(ErrorKind::InvalidArgument, "histogram report has no entries");
  std::string out = "label,bin,count\n";
  for (const auto& e : report.entries)
    for (std::size_t b = 0; b < e.bins.size(); ++b)
      out += e.label + "," + std::to_string(b) + "," + std::to_string(e.bins[b]) + "\n";
  return out;
}

std::string render_histogram_svg(const ive::HistogramReport& report, const std::string& title) {
  if (report.entries.empty()) fail(ErrorKind::InvalidArgument, "histogram report has no entries");
  const double panel_w = 300, panel_h = 160, pad = 40;
  const std::size_t n = report.entries.size();
  const double width = pad + (panel_w + pad) * static_cast<double>(n);
  const double height = panel_h + 2 * pad + 30;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = report.entries[i];
    const double x0 = pad + (panel_w + pad) * static_cast<double>(i), y0 = pad + 10;
    // Bin 0 holds the masked-out background and would flatten every other bar.
    const std::uint64_t peak = std::max<std::uint64_t>(
        1, *std::max_element(e.bins.begin() + 1, e.bins.end()));
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\""
        << panel_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg << "<path fill=\"" << kPalette[i % 8] << "\" d=\"";
    const double bw = panel_w / 256.0;
    for (std::size_t b = 1; b < 256; ++b) {
      if (!e.bins[b]) continue;
      const double h = panel_h * static_cast<double>(std::min(e.bins[b], peak)) /
                       static_cast<double>(peak);
      svg << "M" << fixed(x0 + bw * static_cast<double>(b), 2) << " " << fixed(y0 + panel_h, 2)
          << "h" << fixed(bw, 3) << "v" << fixed(-h, 2) << "h" << fixed(-bw, 3) << "z";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 + panel_h + 18
        << "\" text-anchor=\"middle\">" << escape_xml(e.label) << " (bin 0: " << e.bins[0]
        << ")</text>\n";
    svg << "<text x=\"" << x0 << "\" y=\"" << y0 + panel_h + 32 << "\">0</text>";
    svg << "<text x=\"" << x0 + panel_w << "\" y=\"" << y0 + panel_h + 32
        << "\" text-anchor=\"end\">255</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "threshold,accuracy\n";
  for (const SweepPoint& p : points) out += fixed(p.threshold, 4) + "," + cell(p.accuracy) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

ReportFiles write_metrics_report(const MetricsReport& report, const std::filesystem::path& dir,
                                 const std::string& stem, const std::string& title) {
  ReportFiles files{dir / (stem + ".csv"), dir / (stem + ".svg")};
  write_text(files.csv, render_metrics_csv(report));
  write_text(files.svg, render_metrics_svg(report, title));
  return files;
}

ReportFiles write_histogram_report(const ive::HistogramReport& report,
                                   const std::filesystem::path& dir, const std::string& stem,
                                   const std::string& title) {
  ReportFiles files{dir / (stem + ".csv"), dir / (stem + ".svg")};
  write_text(files.csv, render_histogram_csv(report));
  write_text(files.svg, render_histogram_svg(report, title));
  return files;
}

}  // namespace lesion::eval
