#pragma once

#include <string>
#include <vector>

#include "cartograf/dynamics.hpp"

namespace cartograf::cartoplot {

enum class GlyphShape { diamond, triangle_down, circle, circle_filled, square, plus };

struct CorrectnessBucket {
    double value = 0.0;
    GlyphShape shape = GlyphShape::circle;
    std::string color;
};

struct PlotConfig {
    int width_px = 1000;
    int height_px = 800;
    int margin_px = 70;
    double glyph_size_px = 5.0;
    // Six buckets cover the correctness values reachable with 5 epochs;
    // other epoch counts map each value to the nearest bucket.
    std::vector<CorrectnessBucket> correctness_buckets = {
        {0.0, GlyphShape::diamond, "#c0392b"},
        {0.2, GlyphShape::triangle_down, "#e67e22"},
        {0.4, GlyphShape::circle, "#2980b9"},
        {0.6, GlyphShape::circle_filled, "#2471a3"},
        {0.8, GlyphShape::square, "#7d6608"},
        {1.0, GlyphShape::plus, "#6e2c00"},
    };
};

/// Index into config.correctness_buckets for a correctness value: nearest
/// bucket value, ties toward the lower bucket.
size_t bucket_for(const PlotConfig& config, double correctness);

/// The data map as an SVG 1.1 document: variability on x (domain
/// [0, max(0.05, max observed)]), confidence on y (domain [0,1]), one
/// glyph per summary (marked class="glyph"), axes and a bucket legend.
/// Byte-deterministic for fixed input. Throws DataError on empty input.
std::string render_map(const std::vector<dynamics::DynamicsSummary>& summaries,
                       const PlotConfig& config);

/// Bar chart of a density histogram, bars proportional to counts.
std::string render_density(const std::vector<dynamics::DensityBin>& histogram,
                           const std::string& dimension_name, const PlotConfig& config);

/// summaries.csv schema plus a `region` column from label_regions.
std::string export_plot_table(const std::vector<dynamics::DynamicsSummary>& summaries);

} // namespace cartograf::cartoplot
