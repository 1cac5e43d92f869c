#include "decon/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "decon/errors.hpp"
#include "decon/stats.hpp"

namespace decon {

namespace {

const AdjustmentMethod kMethodOrder[] = {AdjustmentMethod::CausalityAware,
                                         AdjustmentMethod::Baseline1, AdjustmentMethod::Baseline2,
                                         AdjustmentMethod::NoAdjustment};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_coord(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::vector<QuantileRow> summarize_results(const LoadedResults& results) {
    if (results.records.empty()) throw SchemaError("no result records to summarize");

    std::map<std::pair<int, std::size_t>, std::vector<double>> mse_groups;
    std::map<int, std::vector<double>> stability_groups;
    for (const MseRecord& r : results.records)
        mse_groups[{static_cast<int>(r.method), r.test_index}].push_back(r.mse);
    for (const StabilityRecord& r : results.stability)
        stability_groups[static_cast<int>(r.method)].push_back(r.stability_error);

    std::vector<QuantileRow> rows;
    for (const AdjustmentMethod m : kMethodOrder) {
        for (std::size_t k = 1; k <= 9; ++k) {
            const auto it = mse_groups.find({static_cast<int>(m), k});
            if (it == mse_groups.end()) continue;
            QuantileRow row;
            row.series = "mse";
            row.method = m;
            row.test_index = k;
            row.q10 = stats::quantile(it->second, 0.10);
            row.q25 = stats::quantile(it->second, 0.25);
            row.q50 = stats::quantile(it->second, 0.50);
            row.q75 = stats::quantile(it->second, 0.75);
            row.q90 = stats::quantile(it->second, 0.90);
            rows.push_back(row);
        }
    }
    for (const AdjustmentMethod m : kMethodOrder) {
        const auto it = stability_groups.find(static_cast<int>(m));
        if (it == stability_groups.end()) continue;
        QuantileRow row;
        row.series = "stability";
        row.method = m;
        row.test_index = 0;
        row.q10 = stats::quantile(it->second, 0.10);
        row.q25 = stats::quantile(it->second, 0.25);
        row.q50 = stats::quantile(it->second, 0.50);
        row.q75 = stats::quantile(it->second, 0.75);
        row.q90 = stats::quantile(it->second, 0.90);
        rows.push_back(row);
    }
    return rows;
}

std::string quantile_csv(const std::vector<QuantileRow>& rows) {
    std::string out = "series,method,test_index,q10,q25,q50,q75,q90\n";
    for (const QuantileRow& r : rows) {
        out += r.series;
        out += ',';
        out += method_name(r.method);
        out += ',';
        out += (r.series == "stability") ? "" : std::to_string(r.test_index);
        out += ',';
        out += fmt(r.q10);
        out += ',';
        out += fmt(r.q25);
        out += ',';
        out += fmt(r.q50);
        out += ',';
        out += fmt(r.q75);
        out += ',';
        out += fmt(r.q90);
        out += '\n';
    }
    return out;
}

std::string summary_text(const LoadedResults& results) {
    const std::vector<QuantileRow> rows = summarize_results(results);
    std::string out = "median MSE per test set\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s", "method");
    out += buf;
    for (int k = 1; k <= 9; ++k) {
        std::snprintf(buf, sizeof(buf), " %8s%d", "test", k);
        out += buf;
    }
    out += '\n';
    for (const AdjustmentMethod m : kMethodOrder) {
        bool any = false;
        std::string line;
        std::snprintf(buf, sizeof(buf), "%-16s", method_name(m));
        line += buf;
        for (std::size_t k = 1; k <= 9; ++k) {
            const auto it = std::find_if(rows.begin(), rows.end(), [&](const QuantileRow& r) {
                return r.series == "mse" && r.method == m && r.test_index == k;
            });
            if (it == rows.end()) {
                std::snprintf(buf, sizeof(buf), " %9s", "-");
            } else {
                any = true;
                std::snprintf(buf, sizeof(buf), " %9.4f", it->q50);
            }
            line += buf;
        }
        if (any) {
            out += line;
            out += '\n';
        }
    }
    out += "\nmedian stability error\n";
    for (const AdjustmentMethod m : kMethodOrder) {
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const QuantileRow& r) {
            return r.series == "stability" && r.method == m;
        });
        if (it == rows.end()) continue;
        std::snprintf(buf, sizeof(buf), "%-16s %9.4f\n", method_name(m), it->q50);
        out += buf;
    }
    return out;
}

namespace {

struct Panel {
    std::string title;
    std::vector<QuantileRow> boxes;  // drawn left to right
};

void draw_panel(std::string& svg, const Panel& panel, double x0, double y0, double w, double h) {
    double lo = 0.0, hi = 1e-12;
    for (const QuantileRow& b : panel.boxes) hi = std::max(hi, b.q90);
    hi *= 1.08;

    svg += "<rect x=\"" + fmt_coord(x0) + "\" y=\"" + fmt_coord(y0) + "\" width=\"" +
           fmt_coord(w) + "\" height=\"" + fmt_coord(h) +
           "\" fill=\"white\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt_coord(x0 + w / 2) + "\" y=\"" + fmt_coord(y0 - 8) +
           "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" + panel.title +
           "</text>\n";

    const std::size_t nb = panel.boxes.size();
    if (nb == 0) return;
    const double slot = w / static_cast<double>(nb);
    auto ypix = [&](double v) { return y0 + h - (v - lo) / (hi - lo) * h; };

    for (std::size_t i = 0; i < nb; ++i) {
        const QuantileRow& b = panel.boxes[i];
        const double cx = x0 + slot * (static_cast<double>(i) + 0.5);
        const double bw = slot * 0.55;
        // whiskers q10-q90
        svg += "<line x1=\"" + fmt_coord(cx) + "\" y1=\"" + fmt_coord(ypix(b.q10)) + "\" x2=\"" +
               fmt_coord(cx) + "\" y2=\"" + fmt_coord(ypix(b.q90)) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        // box q25-q75
        svg += "<rect x=\"" + fmt_coord(cx - bw / 2) + "\" y=\"" + fmt_coord(ypix(b.q75)) +
               "\" width=\"" + fmt_coord(bw) + "\" height=\"" +
               fmt_coord(std::max(0.5, ypix(b.q25) - ypix(b.q75))) +
               "\" fill=\"#9ecae1\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        // median
        svg += "<line x1=\"" + fmt_coord(cx - bw / 2) + "\" y1=\"" + fmt_coord(ypix(b.q50)) +
               "\" x2=\"" + fmt_coord(cx + bw / 2) + "\" y2=\"" + fmt_coord(ypix(b.q50)) +
               "\" stroke=\"#08306b\" stroke-width=\"2\"/>\n";
    }
    // y-axis extremes
    svg += "<text x=\"" + fmt_coord(x0 - 4) + "\" y=\"" + fmt_coord(y0 + h) +
           "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">" + fmt(lo) +
           "</text>\n";
    svg += "<text x=\"" + fmt_coord(x0 - 4) + "\" y=\"" + fmt_coord(y0 + 10) +
           "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">" + fmt(hi) +
           "</text>\n";
}

}  // namespace

std::string render_report_svg(const std::vector<QuantileRow>& rows) {
    std::vector<Panel> panels;
    for (const AdjustmentMethod m : kMethodOrder) {
        Panel p;
        p.title = method_name(m);
        for (const QuantileRow& r : rows)
            if (r.series == "mse" && r.method == m) p.boxes.push_back(r);
        if (!p.boxes.empty()) panels.push_back(std::move(p));
    }
    Panel stab;
    stab.title = "stability error";
    for (const QuantileRow& r : rows)
        if (r.series == "stability") stab.boxes.push_back(r);
    if (!stab.boxes.empty()) panels.push_back(std::move(stab));

    const double pw = 250, ph = 230, gap = 46, top = 40, bottom = 30;
    const double width = gap + panels.size() * (pw + gap);
    const double height = top + ph + bottom;

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      fmt_coord(width) + "\" height=\"" + fmt_coord(height) + "\" viewBox=\"0 0 " +
                      fmt_coord(width) + " " + fmt_coord(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        draw_panel(svg, panels[i], gap + static_cast<double>(i) * (pw + gap), top, pw, ph);
    svg += "</svg>\n";
    return svg;
}

}  // namespace decon
