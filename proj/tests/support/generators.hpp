#pragma once

#include <random>
#include <string>
#include <vector>

#include "treedual/apps/control.hpp"
#include "treedual/apps/hedging.hpp"
#include "treedual/apps/lagrange.hpp"
#include "treedual/apps/stopping.hpp"
#include "treedual/convex_function.hpp"
#include "treedual/duality.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);
Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0);
Eigen::MatrixXd random_matrix(Rng& rng, int r, int c, double scale = 1.0);
/// B B' + shift I
Eigen::MatrixXd random_psd(Rng& rng, int n, double shift = 0.0, int rank = -1);

/// Horizon in [0, max_horizon], branching per node in [1, max_branching],
/// conditional probabilities bounded away from zero, ids shuffled.
FilteredTree random_tree(Rng& rng, int max_horizon, int max_branching);

/// Variants of the function algebra used by the property tests.
enum class Variant { quadratic, affine_box, polyhedron, max_affine, sum, precompose, scale, box, monotone_compose };
inline constexpr Variant kAllVariants[] = {Variant::quadratic,  Variant::affine_box, Variant::polyhedron,
                                           Variant::max_affine, Variant::sum,        Variant::precompose,
                                           Variant::scale,      Variant::box,        Variant::monotone_compose};
std::string variant_name(Variant v);
/// Random proper function of the requested variant; `bounded` forces its
/// domain inside [-2, 2]^dim.
ConvexFunction random_function(Rng& rng, Variant v, int dim, bool bounded);
/// A point of dom f found by the polyhedral machinery (f proper).
Eigen::VectorXd domain_point(const ConvexFunction& f, Rng& rng);

/// Scenario-tree program from the randomized corpus: quadratic, polyhedral
/// and mixed integrands with a box on every decision so the problem is
/// bounded; `family` in 0..5 picks the shape.
StochasticProgram random_program(Rng& rng, int family);
inline constexpr int kProgramFamilies = 6;

RewardProcess random_reward(Rng& rng, const FilteredTree& tree);
ControlSystem random_lq(Rng& rng, const FilteredTree& tree, int N, int M);
LagrangeProblem random_lagrange(Rng& rng, const FilteredTree& tree, int d);
HedgingProblem random_hedging(Rng& rng, const FilteredTree& tree);

/// Path to the golden instance directory (compile definition).
std::string data_dir();

}  // namespace treedual::testing
