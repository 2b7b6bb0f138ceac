#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mbseries/convergence.hpp"
#include "mbseries/geometry.hpp"
#include "mbseries/residue.hpp"

namespace mb {

// MB_THREADS if set, otherwise hardware concurrency (at least 1)
int thread_count();

struct FamilySum {
    cplx value;
    std::vector<double> shells;  // sum of |term| per shell 0..L
    long terms = 0;
};

// Sum of a family over 0 <= k_i <= orders[i].  Blocks along the first index
// run in parallel; the reduction order is fixed.
FamilySum sum_family(ResidueEngine& engine, const IndexedFamily& family, const std::vector<int>& orders);

// geometric extrapolation from the last two shells
double tail_from_shells(const std::vector<double>& shells);

struct SeriesResult {
    cplx value;
    std::vector<int> orders;
    double tail_estimate = 0.0;
    std::vector<std::pair<std::string, cplx>> breakdown;
    bool inside_region = true;
    std::string note;
    long terms = 0;
};

// Cone sum at the cone's working setting.  With check_region the parameter
// point is tested against the convergence region and a note is attached.
SeriesResult sum_cone(const MBSpec& spec, const Cone& cone, const std::vector<int>& orders, const ParamMap& params,
                      bool check_region = true);

// 1D: closing to the right (+1) or the left (-1)
SeriesResult onefold_series(const MBSpec& spec, int side, int order, const ParamMap& params);

struct Selection {
    std::optional<int> cone;
    std::string reason;
    std::vector<int> candidates;
};

// Cone whose region contains |params|; smallest sampled region wins ties.
Selection select_cone(const MBSpec& spec, const std::map<std::string, double>& mags);

struct SignedFamily {
    int sign = 1;  // +1: pole of the original cone only, -1: of the new one only
    IndexedFamily family;
};

struct EpsResolution {
    RVec new_base;
    int new_cone = 0;
    std::vector<SignedFamily> corrections;
    cplx original_value;
    cplx relocated_value;
    cplx correction_value;
    cplx identity_residual;
};

// Move the contour to `new_base`, pick the matching cone there, and collect
// the residues crossed on the way.  The residual compares
// S_old = S_new + sum(+corrections) - sum(-corrections) at `params`.
EpsResolution epsilon_resolve(const MBSpec& spec, const Cone& cone, const RVec& new_base, const ParamMap& params,
                              const std::vector<int>& orders);

struct LaurentFit {
    int lowest = -2;
    std::vector<cplx> coeffs;  // A_lowest, A_lowest+1, ...
    double condition = 0.0;
    std::vector<std::pair<double, cplx>> samples;
};

// Least squares fit of sum_k A_k eps^k through sampled values.
LaurentFit laurent_fit(const std::vector<std::pair<double, cplx>>& samples, int lowest, int count);

// Cone sum evaluated at each eps in `samples`, with the contour at the vertex
// average of the fundamental polytope of that eps.
std::vector<std::pair<double, cplx>> eps_samples(const MBSpec& spec, int cone_id, const std::vector<Rational>& samples,
                                                 const ParamMap& params, const std::vector<int>& orders);

}  // namespace mb
