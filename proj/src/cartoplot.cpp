#include "cartograf/cartoplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cartograf/errors.hpp"

namespace cartograf::cartoplot {

namespace {

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string glyph_element(GlyphShape shape, double x, double y, double s,
                          const std::string& color, const char* css_class) {
    std::string e;
    switch (shape) {
    case GlyphShape::plus:
        e = "<path class=\"" + std::string(css_class) + "\" d=\"M " + fmt2(x - s) + " " + fmt2(y) +
            " H " + fmt2(x + s) + " M " + fmt2(x) + " " + fmt2(y - s) + " V " + fmt2(y + s) +
            "\" stroke=\"" + color + "\" stroke-width=\"1.2\" fill=\"none\"/>";
        break;
    case GlyphShape::diamond:
        e = "<path class=\"" + std::string(css_class) + "\" d=\"M " + fmt2(x) + " " + fmt2(y - s) +
            " L " + fmt2(x + s) + " " + fmt2(y) + " L " + fmt2(x) + " " + fmt2(y + s) + " L " +
            fmt2(x - s) + " " + fmt2(y) + " Z\" fill=\"" + color + "\"/>";
        break;
    case GlyphShape::triangle_down:
        e = "<path class=\"" + std::string(css_class) + "\" d=\"M " + fmt2(x - s) + " " +
            fmt2(y - s) + " L " + fmt2(x + s) + " " + fmt2(y - s) + " L " + fmt2(x) + " " +
            fmt2(y + s) + " Z\" fill=\"" + color + "\"/>";
        break;
    case GlyphShape::circle:
        e = "<circle class=\"" + std::string(css_class) + "\" cx=\"" + fmt2(x) + "\" cy=\"" +
            fmt2(y) + "\" r=\"" + fmt2(s) + "\" stroke=\"" + color + "\" stroke-width=\"1\" fill=\"none\"/>";
        break;
    case GlyphShape::circle_filled:
        e = "<circle class=\"" + std::string(css_class) + "\" cx=\"" + fmt2(x) + "\" cy=\"" +
            fmt2(y) + "\" r=\"" + fmt2(s) + "\" fill=\"" + color + "\"/>";
        break;
    case GlyphShape::square:
        e = "<rect class=\"" + std::string(css_class) + "\" x=\"" + fmt2(x - s) + "\" y=\"" +
            fmt2(y - s) + "\" width=\"" + fmt2(2 * s) + "\" height=\"" + fmt2(2 * s) +
            "\" fill=\"" + color + "\"/>";
        break;
    }
    return e;
}

const char* shape_label(GlyphShape s) {
    switch (s) {
    case GlyphShape::plus: return "plus";
    case GlyphShape::diamond: return "diamond";
    case GlyphShape::triangle_down: return "triangle-down";
    case GlyphShape::circle: return "circle";
    case GlyphShape::circle_filled: return "circle-filled";
    default: return "square";
    }
}

std::string svg_open(int w, int h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
           "width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " +
           std::to_string(w) + " " + std::to_string(h) +
           "\">\n<rect width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" fill=\"#ffffff\"/>\n";
}

std::string text_at(double x, double y, const std::string& s, int size = 14,
                    const char* anchor = "middle") {
    return "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

// Shared rank logic with label_regions, without its minimum-size guard, so
// the export table stays total for 1- and 2-row inputs.
dynamics::RegionLabeling region_labels_total(const std::vector<dynamics::DynamicsSummary>& summaries) {
    if (summaries.size() >= 3) return dynamics::label_regions(summaries);
    dynamics::RegionLabeling labels;
    std::vector<const dynamics::DynamicsSummary*> order;
    for (const auto& s : summaries) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->confidence != b->confidence) return a->confidence > b->confidence;
        return a->example_id < b->example_id;
    });
    const size_t n_easy = (order.size() + 1) / 2;
    for (size_t i = 0; i < order.size(); ++i)
        labels[order[i]->example_id] = i < n_easy ? dynamics::Region::easy : dynamics::Region::hard;
    return labels;
}

} // namespace

size_t bucket_for(const PlotConfig& config, double correctness) {
    if (config.correctness_buckets.empty()) throw DataError("plot config has no buckets");
    size_t best = 0;
    double best_d = 1e300;
    for (size_t i = 0; i < config.correctness_buckets.size(); ++i) {
        const double d = std::fabs(config.correctness_buckets[i].value - correctness);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::string render_map(const std::vector<dynamics::DynamicsSummary>& summaries,
                       const PlotConfig& config) {
    if (summaries.empty()) throw DataError("render_map: no summaries");

    const double W = config.width_px, H = config.height_px, M = config.margin_px;
    double x_max = 0.05;
    for (const auto& s : summaries) x_max = std::max(x_max, s.variability);

    auto x_px = [&](double variability) { return M + (variability / x_max) * (W - 2 * M); };
    auto y_px = [&](double conf) { return M + (1.0 - conf) * (H - 2 * M); };

    std::string svg = svg_open(config.width_px, config.height_px);

    // axes
    svg += "<line x1=\"" + fmt2(M) + "\" y1=\"" + fmt2(H - M) + "\" x2=\"" + fmt2(W - M) +
           "\" y2=\"" + fmt2(H - M) + "\" stroke=\"#333333\"/>\n";
    svg += "<line x1=\"" + fmt2(M) + "\" y1=\"" + fmt2(M) + "\" x2=\"" + fmt2(M) + "\" y2=\"" +
           fmt2(H - M) + "\" stroke=\"#333333\"/>\n";
    for (int t = 0; t <= 2; ++t) {
        const double v = x_max * t / 2.0;
        svg += text_at(x_px(v), H - M + 22, fmt2(v), 12);
        const double c = t / 2.0;
        svg += text_at(M - 26, y_px(c) + 4, fmt2(c), 12);
    }
    svg += text_at(W / 2.0, H - M + 44, "variability");
    svg += "<text x=\"" + fmt2(M - 44) + "\" y=\"" + fmt2(H / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           fmt2(M - 44) + " " + fmt2(H / 2.0) + ")\">confidence</text>\n";

    // one glyph per summary, input order
    for (const auto& s : summaries) {
        const auto& bucket = config.correctness_buckets[bucket_for(config, s.correctness)];
        svg += glyph_element(bucket.shape, x_px(s.variability), y_px(s.confidence),
                             config.glyph_size_px, bucket.color, "glyph");
        svg.push_back('\n');
    }

    // bucket legend, top right
    double ly = M + 10;
    const double lx = W - M - 150;
    for (const auto& b : config.correctness_buckets) {
        svg += glyph_element(b.shape, lx, ly, config.glyph_size_px, b.color, "legend-glyph");
        svg.push_back('\n');
        char label[64];
        std::snprintf(label, sizeof label, "correctness %.1f (%s)", b.value, shape_label(b.shape));
        svg += text_at(lx + 14, ly + 4, label, 11, "start");
        ly += 18;
    }

    svg += "</svg>\n";
    return svg;
}

std::string render_density(const std::vector<dynamics::DensityBin>& histogram,
                           const std::string& dimension_name, const PlotConfig& config) {
    if (histogram.empty()) throw DataError("render_density: empty histogram");

    const double W = config.width_px, H = config.height_px, M = config.margin_px;
    long long max_count = 1;
    for (const auto& b : histogram) max_count = std::max(max_count, b.count);

    const double bin_width = 1.0 / static_cast<double>(histogram.size());
    auto x_px = [&](double v) { return M + v * (W - 2 * M); };

    std::string svg = svg_open(config.width_px, config.height_px);
    svg += "<line x1=\"" + fmt2(M) + "\" y1=\"" + fmt2(H - M) + "\" x2=\"" + fmt2(W - M) +
           "\" y2=\"" + fmt2(H - M) + "\" stroke=\"#333333\"/>\n";
    svg += "<line x1=\"" + fmt2(M) + "\" y1=\"" + fmt2(M) + "\" x2=\"" + fmt2(M) + "\" y2=\"" +
           fmt2(H - M) + "\" stroke=\"#333333\"/>\n";

    for (const auto& b : histogram) {
        const double height = (H - 2 * M) * static_cast<double>(b.count) /
                              static_cast<double>(max_count);
        const double x0 = x_px(b.bin_start) + 1;
        const double bw = bin_width * (W - 2 * M) - 2;
        svg += "<rect class=\"bar\" x=\"" + fmt2(x0) + "\" y=\"" + fmt2(H - M - height) +
               "\" width=\"" + fmt2(bw) + "\" height=\"" + fmt2(height) +
               "\" fill=\"#5dade2\"/>\n";
    }
    for (int t = 0; t <= 2; ++t)
        svg += text_at(x_px(t / 2.0), H - M + 22, fmt2(t / 2.0), 12);
    svg += text_at(W / 2.0, H - M + 44, dimension_name);
    svg += text_at(M - 26, M - 10, "count " + std::to_string(max_count), 12, "end");
    svg += "</svg>\n";
    return svg;
}

std::string export_plot_table(const std::vector<dynamics::DynamicsSummary>& summaries) {
    auto labels = summaries.empty() ? dynamics::RegionLabeling{} : region_labels_total(summaries);
    std::string out = "id,confidence,variability,correctness,region\n";
    char buf[160];
    for (const auto& s : summaries) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%s\n", s.example_id.c_str(),
                      s.confidence, s.variability, s.correctness,
                      dynamics::to_string(labels.at(s.example_id)));
        out += buf;
    }
    return out;
}

} // namespace cartograf::cartoplot
