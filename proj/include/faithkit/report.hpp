#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "faithkit/metaeval.hpp"

namespace faithkit {

// Header: metric grouping n rho ci_low ci_high pearson kendall_tau_b.
// Missing CI bounds are written as empty fields. Numbers use fixed
// 6-decimal formatting so reports diff cleanly.
std::string format_report_tsv(const std::vector<CorrelationReport>& reports);
std::string format_report_json(const std::vector<CorrelationReport>& reports);

void write_report(const std::vector<CorrelationReport>& reports, const std::filesystem::path& tsv,
                  const std::filesystem::path& json);

// Metric (x) against human score (y), one point per pair.
std::string render_scatter_svg(const PairedSeries& series, const std::string& title);
void write_scatter_svg(const PairedSeries& series, const std::string& title,
                       const std::filesystem::path& path);

}  // namespace faithkit
