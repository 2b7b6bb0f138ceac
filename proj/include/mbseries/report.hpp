#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbseries/quadrature.hpp"
#include "mbseries/series.hpp"

namespace mb {

using nlohmann::json;

json family_json(const IndexedFamily& f, const std::vector<std::string>& vars);
json cone_json(const MBSpec& spec, const Cone& cone);

json analyze_report(const MBSpec& spec);
json cones_report(const MBSpec& spec);

struct RegionGrid {
    int n = 100;
    double range = 3.0;           // axes cover (0, range]
    std::vector<std::string> axes;  // defaults to the first two parameters
    std::map<std::string, double> fixed;  // other parameters, default 1
};

json regions_report(const MBSpec& spec, const RegionGrid& grid);

json series_json(const SeriesResult& r);
json selection_json(const Selection& s);
json resolution_json(const EpsResolution& r, const std::vector<std::string>& vars);
json laurent_json(const LaurentFit& f);
json quadrature_json(const QuadratureResult& q);

}  // namespace mb
