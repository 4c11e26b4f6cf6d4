#pragma once

#include "hedgehog/geometry.hpp"
#include "hedgehog/options.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hedgehog {

struct AdmissibilityConfig {
    double eps_g = 1e-6;   ///< geometry fit tolerance
    double eps_f = 1e-6;   ///< boundary data interpolation tolerance
    double eps_opt = 1e-14;
    EvalOptions check;     ///< a, b, p (and sqrt scaling) of the check points
    double min_length = 0.0; ///< patches are not split below this length; 0 = unlimited
    bool two_sided = true;   ///< test check centers on both sides of the surface
    int max_depth = 14;
};

struct UpsamplingConfig {
    int n_skip = 2;        ///< sweeps that refine on box containment alone
    int max_depth = 14;
    bool two_sided = true; ///< check points of both sides (needed by the solver)
};

struct RefinementSweep {
    int sweep = 0;
    std::size_t patches = 0;
    std::size_t refined = 0;
    double max_length = 0.0;
    double min_length = 0.0;
    std::vector<int> offending; ///< ids of the patches split in this sweep
};

/// Text log of a refinement loop.
struct RefinementReport {
    std::string stage;
    std::vector<RefinementSweep> sweeps;
    std::vector<int> unresolved; ///< patches left failing because of min_length

    bool converged() const { return unresolved.empty(); }
    void write(std::ostream& out) const;
};

struct RefinementResult {
    PatchSet patches;
    RefinementReport report;
};

/// Criterion 1: quadtree least-squares fit of every quad until the fit error
/// (positions and first partials) is below eps_g.
RefinementResult refine_for_geometry(const QuadMesh& mesh, int degree, double eps_g,
                                     int max_depth = 14, double min_length = 0.0);

/// Criterion 2: tensor Chebyshev interpolation of f on q x q nodes per patch, refined
/// until its error on a 2q x 2q grid is below eps_f times the largest |f| seen.
RefinementResult refine_for_boundary_condition(const PatchSet& set, const BoundaryCondition& f,
                                               double eps_f, int q, int max_depth = 14,
                                               double min_length = 0.0);

/// Criterion 3: every check center must have its generating node as closest surface
/// point. Offending patches are quadrisected until all pass.
RefinementResult enforce_admissibility(const PatchSet& set, const AdmissibilityConfig& cfg);

/// True when every node of patch `i` passes the check-center test against `set`.
bool patch_is_admissible(const PatchSet& set, std::size_t i, const AdmissibilityConfig& cfg);

/// Fine set whose smooth quadrature is accurate at every check point of the coarse
/// nodes: all check points end up at distance >= L(P) from every fine patch P.
RefinementResult adaptive_upsample(const PatchSet& coarse, const EvalOptions& opts,
                                   const UpsamplingConfig& cfg = {});

/// Fine set from `levels` rounds of quadrisection of every coarse patch.
PatchSet uniform_upsample(const PatchSet& coarse, int levels);

/// All check points used by the on-surface operator on the coarse nodes, ordered
/// node-major, then side (interior first), then s.
std::vector<Vec3> operator_check_points(const PatchSet& coarse, const EvalOptions& opts,
                                        bool two_sided);

}  // namespace hedgehog
