#pragma once

// Result summaries: quantile tables, a text table, and a static SVG with one
// MSE panel per method plus a stability panel. All output is deterministic
// (fixed formatting, fixed ordering) so regenerated reports are byte-equal.

#include <string>
#include <vector>

#include "decon/experiments.hpp"

namespace decon {

struct QuantileRow {
    std::string series;  // "mse" or "stability"
    AdjustmentMethod method = AdjustmentMethod::CausalityAware;
    std::size_t test_index = 0;  // 0 for stability rows
    double q10 = 0, q25 = 0, q50 = 0, q75 = 0, q90 = 0;
};

std::vector<QuantileRow> summarize_results(const LoadedResults& results);

std::string quantile_csv(const std::vector<QuantileRow>& rows);

// Median MSE per (method, test set) and median stability error per method.
std::string summary_text(const LoadedResults& results);

std::string render_report_svg(const std::vector<QuantileRow>& rows);

}  // namespace decon
