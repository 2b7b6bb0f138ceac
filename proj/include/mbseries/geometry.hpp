#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbseries/model.hpp"

namespace mb {

// Working eps and contour base point (real parts).
struct Setting {
    double eps = 0.0;
    std::vector<double> base;
};
Setting default_setting(const MBSpec& spec);

// A factor after reflection normalisation: every argument is positive on the
// contour.  gamma: Gamma(<a,z>+b)^power, otherwise (<a,z>+b)^power.
struct NFactor {
    IVec a;
    EpsAffine b;
    int power = 1;
    bool gamma = true;
    int source = -1;          // index into spec.gammas or spec.monomials
    bool from_monomial = false;

    bool pole_bearing() const { return gamma ? power > 0 : power < 0; }
    EpsAffine at(const EVec& z) const;
    double at(const std::vector<double>& z, double eps) const;
};

struct Normalized {
    int dimension = 0;
    std::vector<NFactor> factors;
    double sign = 1.0;  // product of (-1)^k picked up by flipping linear factors
};

Normalized normalize(const MBSpec& spec, const Setting& st);
// Rebuilds a spec from normalised factors (used for the idempotence check).
MBSpec to_spec(const MBSpec& like, const Normalized& nf);

// Local divisor through a singular point: primitive normal oriented so that
// the contour side is positive, and net pole order.
struct Divisor {
    IVec normal;
    int order = 0;
    std::vector<int> factors;
};

struct PointInfo {
    EVec point;
    std::vector<int> active;          // factors singular (or vanishing) here
    std::map<int, int> levels;        // factor -> K with argument = -K
    std::vector<Divisor> divisors;    // net order > 0 only
};

PointInfo analyze_point(const Normalized& nf, const EVec& p, const Setting& st);

struct HalfSpace {
    enum class Sense { greater, less };
    LinearForm form;
    Sense sense = Sense::greater;
    std::string str(const std::vector<std::string>& vars) const;
    // canonical text with leading coefficient positive, e.g. "z1 + z2 < -1"
    std::string canonical(const std::vector<std::string>& vars) const;
};

struct DeltaVector {
    enum class Kind { degenerate, nondegenerate, semi_degenerate };
    IVec components;
    Kind classification = Kind::degenerate;
    std::optional<std::int64_t> alpha;
};

enum class CrossSide { arrow, tail, parallel };

struct Cone {
    int id = 0;
    int dimension = 2;
    std::vector<HalfSpace> constraints;
    std::vector<int> generating_gammas;
    // 2D
    RVec l_direction;
    bool east = true;
    std::map<int, CrossSide> side_of_l;
    // 3D: oriented normals of the three generating forms
    std::vector<IVec> frame;
    // 1D: +1 closes to the right, -1 to the left
    int side = 0;
    Setting setting;
};

struct IndexedFamily {
    EVec offset;
    std::vector<RVec> index_matrix;  // dimension rows, arity columns
    std::map<int, int> divisor_orders;
    bool spurious = false;

    int arity() const { return index_matrix.empty() ? 0 : static_cast<int>(index_matrix[0].size()); }
    EVec point(const IVec& k) const;
    std::string str(const std::vector<std::string>& idx = {"m", "n", "p"}) const;
};

std::vector<HalfSpace> fundamental_polytope(const MBSpec& spec, const Setting& st);
std::vector<HalfSpace> fundamental_polytope(const MBSpec& spec);
// average of the vertices, exact in eps; empty when fewer than n+1 vertices
std::optional<EVec> polytope_centroid(const MBSpec& spec, const Setting& st);
DeltaVector delta_vector(const MBSpec& spec);

std::vector<Cone> enumerate_cones(const MBSpec& spec, const Setting& st);
std::vector<Cone> enumerate_cones(const MBSpec& spec);
Cone onefold_cone(const MBSpec& spec, int side, const Setting& st);

std::vector<IndexedFamily> intersection_families(const MBSpec& spec, const Cone& cone);
bool detect_spurious(const MBSpec& spec, const Cone& cone, const IndexedFamily& family);

// Divisors at a point split into the groups f_1..f_n for the cone; each group
// lists indices into info.divisors.  Throws MathError when undecidable.
struct Orientation {
    std::vector<std::vector<int>> groups;
    int sign = 1;
};
Orientation orient(const Cone& cone, const PointInfo& info);
std::pair<std::vector<int>, std::vector<int>> orientation_partition(const MBSpec& spec, const Cone& cone,
                                                                    const IndexedFamily& family);

// membership of a singular point in a cone: contributing, spurious or outside
enum class PointRole { outside, contributing, spurious };
PointRole classify_point(const Cone& cone, const PointInfo& info);

// all singular points with |Re z_i - base_i| <= window
std::vector<PointInfo> singular_points(const Normalized& nf, const Setting& st, double window);

}  // namespace mb
