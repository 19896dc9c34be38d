#include "treedual/scenario_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace treedual {

FilteredTree::FilteredTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("FilteredTree: no nodes");
    std::sort(nodes_.begin(), nodes_.end(), [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
    const auto n = nodes_.size();
    std::unordered_map<int, int> index;
    for (std::size_t i = 0; i < n; ++i) {
        if (!index.emplace(nodes_[i].id, static_cast<int>(i)).second)
            throw std::invalid_argument("FilteredTree: duplicate node id " + std::to_string(nodes_[i].id));
    }
    parent_idx_.assign(n, -1);
    children_.assign(n, {});
    int roots = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes_[i].parent < 0) {
            root_ = static_cast<int>(i);
            ++roots;
            continue;
        }
        auto it = index.find(nodes_[i].parent);
        if (it == index.end())
            throw std::invalid_argument("FilteredTree: node " + std::to_string(nodes_[i].id) + " has unknown parent");
        parent_idx_[i] = it->second;
        children_[it->second].push_back(static_cast<int>(i));
    }
    if (roots != 1) throw std::invalid_argument("FilteredTree: expected exactly one root");

    // Depth-first traversal from the root; also rejects cycles/unreachable nodes.
    leaves_under_.assign(n, {});
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> stack{root_};
    std::vector<char> seen(n, 0);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (seen[v]) throw std::invalid_argument("FilteredTree: cycle detected");
        seen[v] = 1;
        order.push_back(v);
        for (int c : children_[v]) stack.push_back(c);
    }
    if (order.size() != n) throw std::invalid_argument("FilteredTree: nodes unreachable from root");

    for (std::size_t i = 0; i < n; ++i)
        if (children_[i].empty()) leaves_.push_back(static_cast<int>(i));
    std::vector<int> leaf_pos(n, -1);
    for (std::size_t l = 0; l < leaves_.size(); ++l) leaf_pos[leaves_[l]] = static_cast<int>(l);

    horizon_ = 0;
    for (const auto& nd : nodes_) horizon_ = std::max(horizon_, nd.time);
    if (nodes_[root_].time < 0) throw std::invalid_argument("FilteredTree: negative time");
    for (const auto& nd : nodes_)
        if (nd.time < 0) throw std::invalid_argument("FilteredTree: negative time");

    stage_nodes_.assign(horizon_ + 1, {});
    for (std::size_t i = 0; i < n; ++i) stage_nodes_[nodes_[i].time].push_back(static_cast<int>(i));

    ancestors_.assign(leaves_.size(), std::vector<int>(horizon_ + 1, -1));
    for (std::size_t l = 0; l < leaves_.size(); ++l) {
        int v = leaves_[l];
        std::vector<int> path;
        for (int u = v; u >= 0; u = parent_idx_[u]) path.push_back(u);
        std::reverse(path.begin(), path.end());
        for (int t = 0; t <= horizon_; ++t)
            ancestors_[l][t] = path[std::min<std::size_t>(static_cast<std::size_t>(t), path.size() - 1)];
        for (int u : path) leaves_under_[u].push_back(static_cast<int>(l));
    }
}

FilteredTree FilteredTree::trivial() { return FilteredTree({TreeNode{0, -1, 0, 1.0}}); }

FilteredTree FilteredTree::uniform(int horizon, int branching) {
    if (horizon < 0 || branching < 1) throw std::invalid_argument("FilteredTree::uniform: bad shape");
    std::vector<TreeNode> nodes{TreeNode{0, -1, 0, 1.0}};
    std::vector<int> frontier{0};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            for (int b = 0; b < branching; ++b) {
                int id = static_cast<int>(nodes.size());
                nodes.push_back(TreeNode{id, parent, t, nodes[parent].prob / branching});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return FilteredTree(std::move(nodes));
}

int FilteredTree::ancestor(std::size_t leaf, int t) const {
    if (t < 0 || t > horizon_) throw std::out_of_range("FilteredTree::ancestor: stage out of range");
    return ancestors_.at(leaf)[t];
}

int FilteredTree::index_of(int id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const TreeNode& a, int v) { return a.id < v; });
    if (it == nodes_.end() || it->id != id) throw std::out_of_range("FilteredTree: unknown node id " + std::to_string(id));
    return static_cast<int>(it - nodes_.begin());
}

std::vector<std::string> validate_tree(const FilteredTree& tree, double tol) {
    std::vector<std::string> out;
    const int root = tree.root();
    if (tree.node(root).time != 0) out.push_back("root time must be 0");
    if (std::abs(tree.prob(root) - 1.0) > tol) out.push_back("root probability must be 1");
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& nd = tree.node(i);
        std::ostringstream where;
        where << " at node " << nd.id;
        if (!(nd.prob > 0.0) || !std::isfinite(nd.prob)) out.push_back("nonpositive probability" + where.str());
        if (tree.parent(i) >= 0 && nd.time != tree.time(tree.parent(i)) + 1)
            out.push_back("time must be parent time + 1" + where.str());
        const auto& ch = tree.children(i);
        if (ch.empty()) {
            if (nd.time != tree.horizon()) out.push_back("leaf not at horizon" + where.str());
        } else {
            double s = 0.0;
            for (int c : ch) s += tree.prob(c);
            if (std::abs(s - nd.prob) > tol) out.push_back("probability conservation" + where.str());
        }
    }
    return out;
}

RandomVector RandomVector::constant(const FilteredTree& tree, const Eigen::VectorXd& v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(tree.num_leaves()), v.size());
    m.rowwise() = v.transpose();
    return RandomVector(std::move(m));
}

RandomVector RandomVector::zeros(const FilteredTree& tree, int dim) {
    return RandomVector(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tree.num_leaves()), dim));
}

AdaptedProcess AdaptedProcess::zeros(const FilteredTree& tree, std::vector<int> dims) {
    if (static_cast<int>(dims.size()) != tree.horizon() + 1)
        throw std::invalid_argument("AdaptedProcess: need one dimension per stage");
    AdaptedProcess x;
    x.values.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) x.values[i] = Eigen::VectorXd::Zero(dims[tree.time(i)]);
    x.dims = std::move(dims);
    return x;
}

int AdaptedProcess::total_dim() const {
    int s = 0;
    for (int d : dims) s += d;
    return s;
}

LeafProcess LeafProcess::zeros(const FilteredTree& tree, std::vector<int> dims) {
    if (static_cast<int>(dims.size()) != tree.horizon() + 1)
        throw std::invalid_argument("LeafProcess: need one dimension per stage");
    LeafProcess p;
    int total = 0;
    for (int d : dims) total += d;
    p.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tree.num_leaves()), total);
    p.dims = std::move(dims);
    return p;
}

int LeafProcess::offset(int t) const {
    if (t < 0 || t >= static_cast<int>(dims.size())) throw std::out_of_range("LeafProcess: stage out of range");
    int off = 0;
    for (int s = 0; s < t; ++s) off += dims[s];
    return off;
}

Eigen::VectorXd LeafProcess::block(std::size_t leaf, int t) const {
    return values.row(static_cast<Eigen::Index>(leaf)).segment(offset(t), dims[t]).transpose();
}

void LeafProcess::set_block(std::size_t leaf, int t, const Eigen::VectorXd& v) {
    if (v.size() != dims.at(t)) throw std::invalid_argument("LeafProcess::set_block: dimension mismatch");
    values.row(static_cast<Eigen::Index>(leaf)).segment(offset(t), dims[t]) = v.transpose();
}

RandomVector LeafProcess::stage(int t) const { return RandomVector(values.middleCols(offset(t), dims.at(t))); }

namespace {

void check_leaves(const FilteredTree& tree, const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != static_cast<Eigen::Index>(tree.num_leaves()))
        throw std::invalid_argument(std::string(what) + ": expected one row per leaf");
}

void check_dims(const FilteredTree& tree, const LeafProcess& q) {
    check_leaves(tree, q.values, "LeafProcess");
    if (static_cast<int>(q.dims.size()) != tree.horizon() + 1)
        throw std::invalid_argument("LeafProcess: need one dimension per stage");
    int total = 0;
    for (int d : q.dims) total += d;
    if (total != q.values.cols()) throw std::invalid_argument("LeafProcess: dims do not match values");
}

// Conditional expectation of a leaf-indexed block onto the stage-t partition.
Eigen::MatrixXd cond_exp(const FilteredTree& tree, const Eigen::MatrixXd& v, int t) {
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (int node : tree.stage_nodes(t)) {
        const auto& under = tree.leaves_under(node);
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(v.cols());
        double mass = 0.0;
        for (int l : under) {
            const double p = tree.leaf_prob(l);
            acc += p * v.row(l);
            mass += p;
        }
        acc /= mass;
        for (int l : under) out.row(l) = acc;
    }
    return out;
}

}  // namespace

RandomVector conditional_expectation(const FilteredTree& tree, const RandomVector& rv, int t) {
    check_leaves(tree, rv.values, "conditional_expectation");
    if (t < 0 || t > tree.horizon()) throw std::out_of_range("conditional_expectation: stage out of range");
    if (t == tree.horizon()) return rv;
    return RandomVector(cond_exp(tree, rv.values, t));
}

double inner_product(const FilteredTree& tree, const RandomVector& a, const RandomVector& b) {
    check_leaves(tree, a.values, "inner_product");
    check_leaves(tree, b.values, "inner_product");
    if (a.dim() != b.dim()) throw std::invalid_argument("inner_product: dimension mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const auto r = static_cast<Eigen::Index>(l);
        s += tree.leaf_prob(l) * a.values.row(r).dot(b.values.row(r));
    }
    return s;
}

double inner_product(const FilteredTree& tree, const LeafProcess& a, const LeafProcess& b) {
    if (a.dims != b.dims) throw std::invalid_argument("inner_product: dimension mismatch");
    return inner_product(tree, RandomVector(a.values), RandomVector(b.values));
}

Eigen::VectorXd expectation(const FilteredTree& tree, const RandomVector& rv) {
    check_leaves(tree, rv.values, "expectation");
    Eigen::VectorXd s = Eigen::VectorXd::Zero(rv.dim());
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        s += tree.leaf_prob(l) * rv.values.row(static_cast<Eigen::Index>(l)).transpose();
    return s;
}

AdaptedProcess adapted_projection(const FilteredTree& tree, const LeafProcess& q) {
    check_dims(tree, q);
    AdaptedProcess x = AdaptedProcess::zeros(tree, q.dims);
    for (int t = 0; t <= tree.horizon(); ++t) {
        const Eigen::MatrixXd block = q.values.middleCols(q.offset(t), q.dims[t]);
        for (int node : tree.stage_nodes(t)) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(q.dims[t]);
            double mass = 0.0;
            for (int l : tree.leaves_under(node)) {
                acc += tree.leaf_prob(l) * block.row(l).transpose();
                mass += tree.leaf_prob(l);
            }
            x.values[node] = acc / mass;
        }
    }
    return x;
}

LeafProcess shadow_price_projection(const FilteredTree& tree, const LeafProcess& q) {
    check_dims(tree, q);
    LeafProcess p = q;
    for (int t = 0; t <= tree.horizon(); ++t) {
        if (q.dims[t] == 0) continue;
        const Eigen::MatrixXd block = q.values.middleCols(q.offset(t), q.dims[t]);
        p.values.middleCols(q.offset(t), q.dims[t]) = block - cond_exp(tree, block, t);
    }
    return p;
}

double nonanticipativity_residual(const FilteredTree& tree, const LeafProcess& p) {
    check_dims(tree, p);
    double worst = 0.0;
    for (int t = 0; t <= tree.horizon(); ++t) {
        if (p.dims[t] == 0) continue;
        const Eigen::MatrixXd e = cond_exp(tree, p.values.middleCols(p.offset(t), p.dims[t]), t);
        worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
    return worst;
}

bool is_nonanticipativity_dual(const FilteredTree& tree, const LeafProcess& p, double tol) {
    return nonanticipativity_residual(tree, p) <= tol;
}

LeafProcess lift(const FilteredTree& tree, const AdaptedProcess& x) {
    if (x.values.size() != tree.size()) throw std::invalid_argument("lift: expected one value per node");
    LeafProcess q = LeafProcess::zeros(tree, x.dims);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        for (int t = 0; t <= tree.horizon(); ++t) q.set_block(l, t, x.values[tree.ancestor(l, t)]);
    return q;
}

AdaptedProcess restrict_adapted(const FilteredTree& tree, const LeafProcess& q, double tol) {
    AdaptedProcess x = adapted_projection(tree, q);
    const LeafProcess back = lift(tree, x);
    if (q.values.size() > 0 && (back.values - q.values).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("restrict_adapted: process is not adapted");
    return x;
}

Eigen::VectorXd node_value(const FilteredTree& tree, const RandomVector& rv, int node) {
    const auto& under = tree.leaves_under(node);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(rv.dim());
    double mass = 0.0;
    for (int l : under) {
        acc += tree.leaf_prob(l) * rv.values.row(l).transpose();
        mass += tree.leaf_prob(l);
    }
    return acc / mass;
}

}  // namespace treedual
