#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treedual {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kIdentityTol = 1e-12;

/// Node of a scenario tree as supplied by the user. `parent` is -1 for the root.
struct TreeNode {
    int id = 0;
    int parent = -1;
    int time = 0;
    double prob = 1.0;
};

/// Finite filtered probability space. The sigma-algebra at stage t is generated
/// by the partition of the leaves into the subtrees of the stage-t nodes.
///
/// Nodes are stored by index 0..size()-1 in ascending id order; leaves are
/// ordered by ascending id as well. Construction only checks structural
/// soundness (ids unique, parents exist); use validate_tree() for the
/// probabilistic invariants.
class FilteredTree {
public:
    explicit FilteredTree(std::vector<TreeNode> nodes);

    /// Deterministic single-stage space (one node, T = 0).
    static FilteredTree trivial();
    /// Complete tree with `branching` children per node and uniform
    /// conditional probabilities.
    static FilteredTree uniform(int horizon, int branching);

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const TreeNode& node(std::size_t idx) const { return nodes_.at(idx); }
    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

    [[nodiscard]] int parent(std::size_t idx) const { return parent_idx_.at(idx); }
    [[nodiscard]] int time(std::size_t idx) const { return nodes_.at(idx).time; }
    [[nodiscard]] double prob(std::size_t idx) const { return nodes_.at(idx).prob; }
    [[nodiscard]] const std::vector<int>& children(std::size_t idx) const { return children_.at(idx); }
    [[nodiscard]] int root() const noexcept { return root_; }

    [[nodiscard]] std::size_t num_leaves() const noexcept { return leaves_.size(); }
    /// Node index of the i-th leaf.
    [[nodiscard]] int leaf_node(std::size_t leaf) const { return leaves_.at(leaf); }
    [[nodiscard]] double leaf_prob(std::size_t leaf) const { return nodes_[leaves_.at(leaf)].prob; }
    /// Node index of the stage-t ancestor of a leaf (the F_t atom containing it).
    [[nodiscard]] int ancestor(std::size_t leaf, int t) const;
    /// Leaf positions below a node, ascending.
    [[nodiscard]] const std::vector<int>& leaves_under(std::size_t idx) const { return leaves_under_.at(idx); }
    /// Node indices at stage t, ascending id.
    [[nodiscard]] const std::vector<int>& stage_nodes(int t) const { return stage_nodes_.at(t); }
    /// Index of the node with the given id; throws std::out_of_range.
    [[nodiscard]] int index_of(int id) const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<int> parent_idx_;
    std::vector<std::vector<int>> children_;
    std::vector<int> leaves_;
    std::vector<std::vector<int>> leaves_under_;
    std::vector<std::vector<int>> stage_nodes_;
    std::vector<std::vector<int>> ancestors_;  // per leaf, per stage
    int horizon_ = 0;
    int root_ = 0;
};

/// List of violated invariants; empty iff the tree is a valid filtered space.
std::vector<std::string> validate_tree(const FilteredTree& tree, double tol = kIdentityTol);

/// F-measurable random vector: one row per leaf.
struct RandomVector {
    Eigen::MatrixXd values;  // num_leaves x dim

    RandomVector() = default;
    explicit RandomVector(Eigen::MatrixXd v) : values(std::move(v)) {}
    static RandomVector constant(const FilteredTree& tree, const Eigen::VectorXd& v);
    static RandomVector zeros(const FilteredTree& tree, int dim);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values.cols()); }
    [[nodiscard]] Eigen::VectorXd at(std::size_t leaf) const { return values.row(static_cast<Eigen::Index>(leaf)).transpose(); }
};

/// Process with one stage-t block of size dims[t] stored on every stage-t node.
struct AdaptedProcess {
    std::vector<int> dims;
    std::vector<Eigen::VectorXd> values;  // indexed by node

    AdaptedProcess() = default;
    static AdaptedProcess zeros(const FilteredTree& tree, std::vector<int> dims);

    [[nodiscard]] const Eigen::VectorXd& at(std::size_t node) const { return values.at(node); }
    [[nodiscard]] int total_dim() const;
};

/// Leaf-indexed process with stage blocks of sizes dims[t]. Not necessarily
/// adapted; this is the carrier of shadow prices p and lifted strategies.
struct LeafProcess {
    std::vector<int> dims;
    Eigen::MatrixXd values;  // num_leaves x sum(dims)

    LeafProcess() = default;
    static LeafProcess zeros(const FilteredTree& tree, std::vector<int> dims);

    [[nodiscard]] int total_dim() const noexcept { return static_cast<int>(values.cols()); }
    [[nodiscard]] int offset(int t) const;
    [[nodiscard]] Eigen::VectorXd block(std::size_t leaf, int t) const;
    void set_block(std::size_t leaf, int t, const Eigen::VectorXd& v);
    [[nodiscard]] Eigen::VectorXd at(std::size_t leaf) const { return values.row(static_cast<Eigen::Index>(leaf)).transpose(); }
    /// Stage-t block as a random vector.
    [[nodiscard]] RandomVector stage(int t) const;
};

/// E_t: average over the leaves of each stage-t node.
RandomVector conditional_expectation(const FilteredTree& tree, const RandomVector& rv, int t);
/// E[a . b]
double inner_product(const FilteredTree& tree, const RandomVector& a, const RandomVector& b);
/// E[sum_t a_t . b_t]
double inner_product(const FilteredTree& tree, const LeafProcess& a, const LeafProcess& b);
/// Expectation of every column.
Eigen::VectorXd expectation(const FilteredTree& tree, const RandomVector& rv);

/// (ap q)_t = E_t q_t
AdaptedProcess adapted_projection(const FilteredTree& tree, const LeafProcess& q);
/// p_t = q_t - E_t q_t; the result is orthogonal to every adapted process.
LeafProcess shadow_price_projection(const FilteredTree& tree, const LeafProcess& q);
/// max_t ||E_t p_t||_inf
double nonanticipativity_residual(const FilteredTree& tree, const LeafProcess& p);
bool is_nonanticipativity_dual(const FilteredTree& tree, const LeafProcess& p, double tol = 1e-10);

/// Copies each node value to all leaves under it.
LeafProcess lift(const FilteredTree& tree, const AdaptedProcess& x);
/// Reads an adapted process off a leaf process; throws std::invalid_argument
/// if the input is not constant across leaves of some node (tolerance tol).
AdaptedProcess restrict_adapted(const FilteredTree& tree, const LeafProcess& q, double tol = kFeasibilityTol);
/// Stage-t values of a random vector that is F_t-measurable, indexed by node.
Eigen::VectorXd node_value(const FilteredTree& tree, const RandomVector& rv, int node);

}  // namespace treedual
