#include "faithkit/report.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "faithkit/error.hpp"
#include "json.hpp"

namespace faithkit {
namespace {

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_report_tsv(const std::vector<CorrelationReport>& reports) {
  std::string out = "metric\tgrouping\tn\trho\tci_low\tci_high\tpearson\tkendall_tau_b\n";
  for (const auto& r : reports) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.metric, to_string(r.grouping), r.n,
                       fixed(r.rho), r.ci_low ? fixed(*r.ci_low) : "",
                       r.ci_high ? fixed(*r.ci_high) : "", fixed(r.pearson),
                       fixed(r.kendall_tau_b));
  }
  return out;
}

std::string format_report_json(const std::vector<CorrelationReport>& reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json obj{{"metric", r.metric},
                       {"grouping", to_string(r.grouping)},
                       {"n", r.n},
                       {"rho", r.rho},
                       {"ci_low", nullptr},
                       {"ci_high", nullptr},
                       {"pearson", r.pearson},
                       {"kendall_tau_b", r.kendall_tau_b}};
    if (r.ci_low) obj["ci_low"] = *r.ci_low;
    if (r.ci_high) obj["ci_high"] = *r.ci_high;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

void write_report(const std::vector<CorrelationReport>& reports, const std::filesystem::path& tsv,
                  const std::filesystem::path& json) {
  if (!tsv.empty()) write_text(tsv, format_report_tsv(reports));
  if (!json.empty()) write_text(json, format_report_json(reports));
}

std::string render_scatter_svg(const PairedSeries& series, const std::string& title) {
  constexpr double kW = 480, kH = 360, kPad = 48;
  const auto [xmin_it, xmax_it] =
      std::minmax_element(series.metric_values.begin(), series.metric_values.end());
  const auto [ymin_it, ymax_it] =
      std::minmax_element(series.human_values.begin(), series.human_values.end());
  double xmin = series.metric_values.empty() ? 0.0 : *xmin_it;
  double xmax = series.metric_values.empty() ? 1.0 : *xmax_it;
  double ymin = series.human_values.empty() ? 0.0 : *ymin_it;
  double ymax = series.human_values.empty() ? 1.0 : *ymax_it;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" "
      "text-anchor=\"middle\">{3}</text>\n"
      "<line x1=\"{4}\" y1=\"{5}\" x2=\"{6}\" y2=\"{5}\" stroke=\"black\"/>\n"
      "<line x1=\"{4}\" y1=\"{7}\" x2=\"{4}\" y2=\"{5}\" stroke=\"black\"/>\n"
      "<text x=\"{2}\" y=\"{8}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">metric [{9:.4g}, {10:.4g}]</text>\n"
      "<text x=\"14\" y=\"{11}\" font-family=\"sans-serif\" font-size=\"12\" "
      "transform=\"rotate(-90 14 {11})\" text-anchor=\"middle\">human [{12:.4g}, {13:.4g}]</text>\n",
      kW, kH, kW / 2, xml_escape(title), kPad, kH - kPad, kW - kPad / 2, kPad / 2, kH - 12, xmin,
      xmax, kH / 2, ymin, ymax);
  for (std::size_t i = 0; i < series.metric_values.size(); ++i) {
    const double x = kPad + (series.metric_values[i] - xmin) / (xmax - xmin) * (kW - 1.5 * kPad);
    const double y = (kH - kPad) - (series.human_values[i] - ymin) / (ymax - ymin) * (kH - 1.5 * kPad);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"steelblue\" "
                       "fill-opacity=\"0.6\"/>\n",
                       x, y);
  }
  out += "</svg>\n";
  return out;
}

void write_scatter_svg(const PairedSeries& series, const std::string& title,
                       const std::filesystem::path& path) {
  write_text(path, render_scatter_svg(series, title));
}

}  // namespace faithkit
