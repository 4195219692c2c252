#pragma once

#include <vector>

#include "shockflow/legendre.hpp"

namespace shockflow {

struct Ball {
    Vec center;
    double radius = 0.0;
};

/// Exact smallest enclosing ball by Welzl's recursion over support sets of at
/// most d + 1 points.
Ball min_enclosing_ball(const std::vector<Vec>& points);

struct HullProjection {
    std::vector<double> weights;  ///< convex weights, one per input point
    Vec point;                    ///< sum_j w_j p_j
    double distance = 0.0;        ///< |point - query|
};

/// Least-distance problem min |sum_j w_j p_j - q| over the simplex, solved by a
/// primal active-set method.
HullProjection project_onto_hull(const std::vector<Vec>& points, const Vec& query);

/// Distance from q to the relative boundary of conv(points), measured inside
/// their affine hull by enumerating facets. Zero when q lies outside the
/// relative interior.
double relative_boundary_distance(const std::vector<Vec>& points, const Vec& query);

}  // namespace shockflow
