#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treedual/duality.hpp"
#include "treedual/polyhedron.hpp"

namespace treedual {

struct StrictFeasibilityReport {
    bool holds = false;
    bool inconclusive = false;
    AdaptedProcess anchor;
    /// Leaf whose domain cone is not linear, -1 when none.
    int failing_leaf = -1;
    /// Direction g of that cone with -g outside it (leaf coordinates (x, u)).
    Eigen::VectorXd failing_generator;
    std::string detail;
};

struct Rec1Report {
    bool holds = false;
    bool inconclusive = false;
    int failing_leaf = -1;
    Eigen::VectorXd witness;
    /// Fourier-Motzkin route was run and agreed with the LP route.
    bool cross_checked = false;
    std::string detail;
};

struct Rec2Report {
    bool holds = false;
    bool inconclusive = false;
    int samples = 0;
    int failing_stage = -1;
    int failing_leaf = -1;
    /// The sampled feasible z (leaf process) whose conditional expectation could not be extended.
    LeafProcess witness;
    std::string detail;
};

struct BoundedRecourseReport {
    bool holds = false;
    bool inconclusive = false;
    double radius = 0.0;
    /// Id of the stage-t node under which the projections differ, -1 when none.
    int failing_node = -1;
    int failing_stage = -1;
    std::string detail;
};

struct QualificationReport {
    StrictFeasibilityReport strict_feasibility;
    Rec1Report rec1;
    Rec2Report rec2;
    BoundedRecourseReport bounded_recourse;
};

/// Lifted domain of a leaf integrand over (x, u, aux).
Polyhedron leaf_domain(const StochasticProgram& sp, std::size_t leaf);

/// Relative interior point of {x adapted : (x, ubar) in dom Ef}; nullopt if empty.
std::optional<AdaptedProcess> strictly_feasible_candidate(const StochasticProgram& sp);

/// Without an anchor, the relative interior candidate is used.
StrictFeasibilityReport check_strict_feasibility(const StochasticProgram& sp, const AdaptedProcess* anchor = nullptr);
Rec1Report check_rec1(const StochasticProgram& sp);
/// `extra` adds caller-supplied feasible points (e.g. a lifted solution).
Rec2Report check_rec2(const StochasticProgram& sp, int samples = 8, unsigned seed = 7,
                      const std::vector<LeafProcess>& extra = {});
BoundedRecourseReport check_bounded_recourse(const StochasticProgram& sp, double radius);

struct QualificationOptions {
    double radius = 10.0;
    int samples = 8;
    unsigned seed = 7;
};
QualificationReport qualify(const StochasticProgram& sp, const QualificationOptions& opts = {},
                            const AdaptedProcess* solution = nullptr);

}  // namespace treedual
