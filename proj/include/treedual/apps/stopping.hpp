#pragma once

#include <vector>

#include <Eigen/Dense>

#include "treedual/duality.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual {

/// Scalar adapted reward, one value per node.
struct RewardProcess {
    FilteredTree tree = FilteredTree::trivial();
    Eigen::VectorXd R;

    void validate() const;
};

/// Stop stage per leaf; horizon + 1 means the process is never stopped.
struct StoppingTime {
    std::vector<int> stage;
};

bool is_stopping_time(const FilteredTree& tree, const StoppingTime& tau);
/// E R_tau with R_{T+1} = 0.
double stopping_value(const RewardProcess& rp, const StoppingTime& tau);

/// S_T = max(R_T, 0), S_t = max(R_t, E_t S_{t+1}); indexed by node.
Eigen::VectorXd snell_envelope(const RewardProcess& rp);
double snell_value(const RewardProcess& rp);

/// Earliest node with R_t = S_t when the value is positive, otherwise never.
StoppingTime optimal_stopping_time(const RewardProcess& rp, double tol = 1e-12);

struct StoppingOracle {
    double value = 0.0;
    double count = 0.0;  // stopping times visited
};
/// Brute force over every stopping time. Throws std::length_error when the
/// number of stopping times exceeds `cap`.
StoppingOracle exhaustive_stopping_oracle(const RewardProcess& rp, double cap = 2e9);

struct StoppingDual {
    Eigen::VectorXd y;  // martingale, by node
    LeafProcess p;      // p_t = y_T - y_t
    double value = 0.0;
};
/// Doob martingale of the Snell envelope, or y = 0 when the value is zero.
StoppingDual stopping_dual(const RewardProcess& rp);

struct StoppingReport {
    double martingale = 0.0;
    double dominance = 0.0;
    double nonnegativity = 0.0;
    double slackness = 0.0;
    bool measurable = false;
    bool certified = false;
};
StoppingReport verify_stopping_certificate(const RewardProcess& rp, const StoppingTime& tau, const Eigen::VectorXd& y,
                                           double tol = 1e-9);

/// Relaxed problem over randomized stopping times: minimize -E sum R_t x_t
/// over x >= 0 with sum x_t <= 1.
StochasticProgram ros_compile(const RewardProcess& rp);
/// (p, y_T) as a dual point of the relaxed program.
DualPoint ros_dual_point(const RewardProcess& rp, const StoppingDual& dual);
/// First stage with positive weight on each path.
StoppingTime stopping_time_from_relaxation(const RewardProcess& rp, const AdaptedProcess& x, double tol = 1e-6);

}  // namespace treedual
