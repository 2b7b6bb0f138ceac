#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbseries/geometry.hpp"

namespace mb {

enum class PlotKind { singular, cones, regions };

struct PlotOptions {
    PlotKind what = PlotKind::singular;
    // z-plane window for singular/cones, parameter window (0, range] for regions
    double xmin = -6, xmax = 6, ymin = -6, ymax = 6;
    int cone = 0;  // cones plot: 0 draws every cone
    int grid = 100;
    double range = 3.0;
    std::vector<std::string> axes;
    std::map<std::string, double> fixed;
    int width = 600;
    int height = 600;
};

// Deterministic SVG 1.1 text.  Throws MathError for unsupported dimensions and
// std::logic_error when a drawn family point falls outside its cone.
std::string render_svg(const MBSpec& spec, const PlotOptions& opt);

}  // namespace mb
