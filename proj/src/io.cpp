#include "treedual/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw InputError(path, msg); }

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(at(path, key), "missing required field");
    return *it;
}

const json* optional_field(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

VectorXd vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from_json(j[i], at(path, i));
    return v;
}

MatrixXd mat(const json& j, const std::string& path, int cols = -1) {
    if (!j.is_array()) fail(path, "expected an array of rows");
    if (j.empty()) {
        if (cols < 0) fail(path, "empty matrix needs a known column count");
        return MatrixXd(0, cols);
    }
    const std::size_t c = j[0].is_array() ? j[0].size() : 0;
    MatrixXd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(c));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != c) fail(at(path, r), "rows must be arrays of equal length");
        for (std::size_t k = 0; k < c; ++k)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = number_from_json(row[k], at(at(path, r), k));
    }
    if (cols >= 0 && M.cols() != cols) fail(path, "expected " + std::to_string(cols) + " columns");
    return M;
}

// A value given once for all entries or as {"per_node": [...]} / {"per_leaf": [...]}.
template <class F>
auto spread(const json& j, const std::string& path, const char* key, std::size_t count, F&& parse)
    -> std::vector<decltype(parse(j, path))> {
    std::vector<decltype(parse(j, path))> out;
    if (j.is_object() && j.contains(key)) {
        const json& arr = j.at(key);
        const std::string p = at(path, key);
        if (!arr.is_array() || arr.size() != count)
            fail(p, "expected an array with " + std::to_string(count) + " entries");
        for (std::size_t i = 0; i < count; ++i) out.push_back(parse(arr[i], at(p, i)));
    } else {
        auto v = parse(j, path);
        out.assign(count, v);
    }
    return out;
}


std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json vec_json(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_to_json(v(i)));
    return a;
}

}  // namespace

json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json number_to_json(const ExtendedReal& v) { return number_to_json(v.to_double()); }

double number_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
    }
    fail(path, "expected a number or \"inf\"/\"-inf\"");
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("", "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str());
}

std::string content_hash(const json& j) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return hex64(h);
}

FilteredTree parse_tree(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    if (const json* u = optional_field(j, "uniform")) {
        const int T = integer(field(*u, "horizon", at(path, "uniform")), at(at(path, "uniform"), "horizon"));
        const int b = integer(field(*u, "branching", at(path, "uniform")), at(at(path, "uniform"), "branching"));
        if (T < 0 || b < 1) fail(at(path, "uniform"), "horizon must be >= 0 and branching >= 1");
        return FilteredTree::uniform(T, b);
    }
    const json& nodes = field(j, "nodes", path);
    const std::string np = at(path, "nodes");
    if (!nodes.is_array() || nodes.empty()) fail(np, "expected a nonempty array");
    std::vector<TreeNode> tn;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = at(np, i);
        TreeNode n;
        n.id = integer(field(nodes[i], "id", p), at(p, "id"));
        n.parent = integer(field(nodes[i], "parent", p), at(p, "parent"));
        n.time = integer(field(nodes[i], "time", p), at(p, "time"));
        n.prob = number_from_json(field(nodes[i], "prob", p), at(p, "prob"));
        tn.push_back(n);
    }
    FilteredTree tree = [&] {
        try {
            return FilteredTree(tn);
        } catch (const std::exception& e) {
            fail(np, e.what());
        }
    }();
    const auto issues = validate_tree(tree, 1e-9);
    if (!issues.empty()) fail(np, issues.front());
    return tree;
}

json tree_to_json(const FilteredTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) nodes.push_back({{"id", n.id}, {"parent", n.parent}, {"time", n.time}, {"prob", n.prob}});
    return {{"nodes", nodes}};
}

ConvexFunction parse_function(const json& j, const std::string& path, int dim_hint) {
    if (!j.is_object()) fail(path, "expected a function descriptor object");
    if (!j.contains("type") || !j.at("type").is_string()) fail(at(path, "type"), "missing function type");
    const std::string type = j.at("type").get<std::string>();
    int dim = dim_hint;
    if (const json* d = optional_field(j, "dim")) dim = integer(*d, at(path, "dim"));
    try {
        if (type == "quadratic") {
            const MatrixXd Q = mat(field(j, "Q", path), at(path, "Q"), dim);
            const VectorXd b = j.contains("b") ? vec(j.at("b"), at(path, "b")) : VectorXd(VectorXd::Zero(Q.rows()));
            const double c = j.contains("c") ? number_from_json(j.at("c"), at(path, "c")) : 0.0;
            return ConvexFunction::quadratic(Q, b, c);
        }
        if (type == "affine") {
            const VectorXd b = vec(field(j, "b", path), at(path, "b"));
            const double c = j.contains("c") ? number_from_json(j.at("c"), at(path, "c")) : 0.0;
            return ConvexFunction::affine(b, c);
        }
        if (type == "zero") {
            if (dim < 0) fail(at(path, "dim"), "zero function needs a dimension");
            return ConvexFunction::zero(dim);
        }
        if (type == "polyhedron") {
            if (dim < 0) {
                if (j.contains("A") && !j.at("A").empty()) dim = static_cast<int>(j.at("A")[0].size());
                else if (j.contains("C") && !j.at("C").empty()) dim = static_cast<int>(j.at("C")[0].size());
                else fail(at(path, "dim"), "polyhedron needs a dimension");
            }
            const MatrixXd A = j.contains("A") ? mat(j.at("A"), at(path, "A"), dim) : MatrixXd(0, dim);
            const VectorXd a = j.contains("a") ? vec(j.at("a"), at(path, "a")) : VectorXd(0);
            const MatrixXd C = j.contains("C") ? mat(j.at("C"), at(path, "C"), dim) : MatrixXd(0, dim);
            const VectorXd c = j.contains("c") ? vec(j.at("c"), at(path, "c")) : VectorXd(0);
            if (a.size() != A.rows()) fail(at(path, "a"), "length must match the rows of A");
            if (c.size() != C.rows()) fail(at(path, "c"), "length must match the rows of C");
            return ConvexFunction::polyhedron(A, a, C, c, dim);
        }
        if (type == "max_affine") {
            const MatrixXd B = mat(field(j, "B", path), at(path, "B"), dim);
            const VectorXd c = j.contains("c") ? vec(j.at("c"), at(path, "c")) : VectorXd(VectorXd::Zero(B.rows()));
            return ConvexFunction::max_affine(B, c);
        }
        if (type == "sum") {
            const json& terms = field(j, "terms", path);
            if (!terms.is_array() || terms.empty()) fail(at(path, "terms"), "expected a nonempty array");
            std::vector<ConvexFunction> fs;
            for (std::size_t i = 0; i < terms.size(); ++i) {
                fs.push_back(parse_function(terms[i], at(at(path, "terms"), i), dim));
                if (dim < 0) dim = fs.back().dim();
            }
            return ConvexFunction::sum(std::move(fs), dim);
        }
        if (type == "precompose") {
            const ConvexFunction inner = parse_function(field(j, "inner", path), at(path, "inner"));
            const MatrixXd M = mat(field(j, "M", path), at(path, "M"), dim);
            const VectorXd m = j.contains("m") ? vec(j.at("m"), at(path, "m")) : VectorXd(VectorXd::Zero(M.rows()));
            return ConvexFunction::precompose(inner, M, m);
        }
        if (type == "scale") {
            const double lambda = number_from_json(field(j, "lambda", path), at(path, "lambda"));
            return ConvexFunction::scale(lambda, parse_function(field(j, "fn", path), at(path, "fn"), dim));
        }
        if (type == "box") {
            return ConvexFunction::box(vec(field(j, "lo", path), at(path, "lo")), vec(field(j, "hi", path), at(path, "hi")));
        }
        if (type == "monotone_compose") {
            const ConvexFunction outer = parse_function(field(j, "outer", path), at(path, "outer"), 1);
            return ConvexFunction::monotone_compose(outer, parse_function(field(j, "inner", path), at(path, "inner"), dim));
        }
    } catch (const InputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(at(path, "type"), "unknown function type '" + type + "'");
}

namespace {

StochasticProgram parse_raw(const json& j, const FilteredTree& tree) {
    StochasticProgram sp;
    sp.tree = tree;
    const json& dims = field(j, "dims", "");
    if (!dims.is_array()) fail("/dims", "expected an array");
    for (std::size_t i = 0; i < dims.size(); ++i) sp.dims.push_back(integer(dims[i], at("/dims", i)));
    if (static_cast<int>(sp.dims.size()) != tree.horizon() + 1) fail("/dims", "need one entry per stage");
    sp.m = j.contains("m") ? integer(j.at("m"), "/m") : 0;
    const int n = sp.n_total() + sp.m;
    if (const json* f = optional_field(j, "integrand")) {
        sp.integrands.push_back(parse_function(*f, "/integrand", n));
    } else {
        const json& fs = field(j, "integrands", "");
        if (!fs.is_array() || fs.size() != tree.num_leaves()) fail("/integrands", "need one integrand per leaf");
        for (std::size_t i = 0; i < fs.size(); ++i) sp.integrands.push_back(parse_function(fs[i], at("/integrands", i), n));
    }
    for (std::size_t i = 0; i < sp.integrands.size(); ++i)
        if (sp.integrands[i].dim() != n) fail("/integrand", "dimension must be sum(dims) + m = " + std::to_string(n));
    sp.ubar = RandomVector::zeros(tree, sp.m);
    if (const json* u = optional_field(j, "ubar")) {
        const auto rows = spread(*u, "/ubar", "per_leaf", tree.num_leaves(), vec);
        for (std::size_t l = 0; l < rows.size(); ++l) {
            if (rows[l].size() != sp.m) fail("/ubar", "entries must have m components");
            sp.ubar.values.row(static_cast<Eigen::Index>(l)) = rows[l].transpose();
        }
    }
    return sp;
}

RewardProcess parse_stopping(const json& j, const FilteredTree& tree) {
    RewardProcess rp{tree, vec(field(j, "reward", ""), "/reward")};
    if (rp.R.size() != static_cast<Eigen::Index>(tree.size())) fail("/reward", "need one reward per node");
    if (!rp.R.allFinite()) fail("/reward", "rewards must be finite");
    return rp;
}

ControlSystem parse_control(const json& j, const FilteredTree& tree) {
    ControlSystem cs;
    cs.tree = tree;
    cs.N = integer(field(j, "N", ""), "/N");
    cs.M = integer(field(j, "M", ""), "/M");
    if (cs.N <= 0 || cs.M < 0) fail("/N", "need N > 0 and M >= 0");
    const std::size_t nn = tree.size();
    const int N = cs.N, M = cs.M;
    cs.A = spread(field(j, "A", ""), "/A", "per_node", nn, [&](const json& v, const std::string& p) { return mat(v, p, N); });
    cs.B = spread(field(j, "B", ""), "/B", "per_node", nn, [&](const json& v, const std::string& p) { return mat(v, p, M); });
    cs.W = j.contains("W") ? spread(j.at("W"), "/W", "per_node", nn, vec) : std::vector<VectorXd>(nn, VectorXd::Zero(N));
    cs.L = spread(field(j, "L", ""), "/L", "per_node", nn,
                  [&](const json& v, const std::string& p) { return parse_function(v, p, N + M); });
    for (std::size_t i = 0; i < nn; ++i) {
        if (static_cast<int>(i) == tree.root()) continue;
        if (cs.A[i].rows() != N) fail("/A", "A must be N x N");
        if (cs.B[i].rows() != N) fail("/B", "B must be N x M");
        if (cs.W[i].size() != N) fail("/W", "W must have N entries");
    }
    return cs;
}

LagrangeProblem parse_lagrange(const json& j, const FilteredTree& tree) {
    LagrangeProblem lp;
    lp.tree = tree;
    lp.d = integer(field(j, "d", ""), "/d");
    if (lp.d <= 0) fail("/d", "must be positive");
    const int d = lp.d;
    lp.K = spread(field(j, "K", ""), "/K", "per_node", tree.size(),
                  [&](const json& v, const std::string& p) { return parse_function(v, p, 2 * d); });
    return lp;
}

MathProgram parse_mathprog(const json& j, const FilteredTree& tree) {
    MathProgram mp;
    mp.tree = tree;
    const json& dims = field(j, "dims", "");
    if (!dims.is_array()) fail("/dims", "expected an array");
    for (std::size_t i = 0; i < dims.size(); ++i) mp.dims.push_back(integer(dims[i], at("/dims", i)));
    if (static_cast<int>(mp.dims.size()) != tree.horizon() + 1) fail("/dims", "need one entry per stage");
    const json& nodes = field(j, "nodes", "");
    if (!nodes.is_array() || nodes.size() != tree.size()) fail("/nodes", "need one entry per node");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = at("/nodes", i);
        const int t = tree.time(i);
        int h = 0;
        for (int k = 0; k <= t; ++k) h += mp.dims[k];
        MathNode nd;
        nd.f0 = nodes[i].contains("f0") ? parse_function(nodes[i].at("f0"), at(p, "f0"), h) : ConvexFunction::zero(h);
        if (const json* F = optional_field(nodes[i], "F")) {
            if (!F->is_array()) fail(at(p, "F"), "expected an array");
            for (std::size_t k = 0; k < F->size(); ++k) nd.F.push_back(parse_function((*F)[k], at(at(p, "F"), k), h));
        }
        nd.A = nodes[i].contains("A") ? mat(nodes[i].at("A"), at(p, "A"), h) : MatrixXd(0, h);
        nd.b = nodes[i].contains("b") ? vec(nodes[i].at("b"), at(p, "b")) : VectorXd(0);
        if (nd.b.size() != nd.A.rows()) fail(at(p, "b"), "length must match the rows of A");
        mp.nodes.push_back(std::move(nd));
    }
    return mp;
}

HedgingProblem parse_hedging(const json& j, const FilteredTree& tree) {
    HedgingProblem h;
    h.tree = tree;
    h.J = integer(field(j, "J", ""), "/J");
    h.K = j.contains("K") ? integer(j.at("K"), "/K") : 0;
    if (h.J < 0 || h.K < 0) fail("/J", "dimensions must be nonnegative");
    const json& s = field(j, "s", "");
    if (!s.is_array() || s.size() != tree.size()) fail("/s", "need one price vector per node");
    for (std::size_t i = 0; i < s.size(); ++i) h.s.push_back(vec(s[i], at("/s", i)));
    const std::size_t nl = tree.num_leaves();
    h.C = MatrixXd::Zero(static_cast<Eigen::Index>(nl), h.K);
    if (h.K > 0) {
        const json& C = field(j, "C", "");
        if (!C.is_array() || C.size() != nl) fail("/C", "need one payoff vector per leaf");
        for (std::size_t l = 0; l < nl; ++l) {
            const VectorXd r = vec(C[l], at("/C", l));
            if (r.size() != h.K) fail(at("/C", l), "payoff vectors need K entries");
            h.C.row(static_cast<Eigen::Index>(l)) = r.transpose();
        }
        h.premium = parse_function(field(j, "premium", ""), "/premium", h.K);
    }
    const json& V = field(j, "V", "");
    if (V.is_array()) {
        if (V.size() != nl) fail("/V", "need one loss per leaf");
        for (std::size_t l = 0; l < nl; ++l) h.V.push_back(parse_function(V[l], at("/V", l), 1));
    } else {
        h.V.push_back(parse_function(V, "/V", 1));
    }
    if (const json* D = optional_field(j, "D")) {
        const int J = h.J;
        h.D = spread(*D, "/D", "per_node", tree.size(),
                     [&](const json& v, const std::string& p) { return parse_function(v, p, J); });
    }
    const json& c = field(j, "c", "");
    h.c = c.is_array() ? vec(c, "/c") : VectorXd(VectorXd::Constant(static_cast<Eigen::Index>(nl), number_from_json(c, "/c")));
    if (h.c.size() != static_cast<Eigen::Index>(nl)) fail("/c", "need one claim value per leaf");
    return h;
}

}  // namespace

Instance parse_instance(const json& j) {
    if (!j.is_object()) fail("", "instance must be a JSON object");
    const json& ver = field(j, "format_version", "");
    if (integer(ver, "/format_version") != kFormatVersion) fail("/format_version", "unsupported format version");
    const json& k = field(j, "kind", "");
    if (!k.is_string()) fail("/kind", "expected a string");
    Instance inst;
    inst.kind = k.get<std::string>();
    inst.hash = content_hash(j);
    inst.tree = j.contains("tree") ? parse_tree(j.at("tree")) : FilteredTree::trivial();
    try {
        if (inst.kind == "raw-sp") inst.raw = parse_raw(j, inst.tree);
        else if (inst.kind == "stopping") inst.stopping = parse_stopping(j, inst.tree);
        else if (inst.kind == "control") inst.control = parse_control(j, inst.tree);
        else if (inst.kind == "lagrange") inst.lagrange = parse_lagrange(j, inst.tree);
        else if (inst.kind == "mathprog") inst.mathprog = parse_mathprog(j, inst.tree);
        else if (inst.kind == "hedging") inst.hedging = parse_hedging(j, inst.tree);
        else fail("/kind", "unknown kind '" + inst.kind + "'");
        compile(inst).validate();
    } catch (const InputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail("", e.what());
    }
    return inst;
}

Instance load_instance(const std::string& path) { return parse_instance(read_json_file(path)); }

StochasticProgram compile(const Instance& inst) {
    if (inst.raw) return *inst.raw;
    if (inst.stopping) return ros_compile(*inst.stopping);
    if (inst.control) return control_compile(*inst.control);
    if (inst.lagrange) return lagrange_compile(*inst.lagrange);
    if (inst.mathprog) return mathprog_compile(*inst.mathprog);
    if (inst.hedging) return hedging_compile(*inst.hedging);
    throw std::logic_error("compile: empty instance");
}

json certificate_to_json(const Instance& inst, const StochasticProgram& sp, const AdaptedProcess& x,
                         const DualPoint& dp, const Certificate& cert) {
    const FilteredTree& tree = sp.tree;
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = inst.kind;
    j["instance_hash"] = inst.hash;
    j["status"] = to_string(cert.status);
    j["tolerance"] = cert.tol;
    j["primal_value"] = number_to_json(cert.primal);
    j["dual_value"] = number_to_json(cert.dual);
    j["gap"] = number_to_json(cert.gap);
    json leaf_res = json::array();
    for (double r : cert.kkt.leaf_residuals) leaf_res.push_back(number_to_json(r));
    j["kkt"] = {{"certified", cert.kkt.certified},
                {"max_leaf_residual", number_to_json(cert.kkt.max_leaf_residual)},
                {"nonanticipativity", number_to_json(cert.kkt.nonanticipativity)},
                {"leaf_residuals", leaf_res}};
    if (!cert.note.empty()) j["note"] = cert.note;
    json ids = json::array(), xs = json::array();
    for (std::size_t n = 0; n < tree.size(); ++n) {
        ids.push_back(tree.node(n).id);
        xs.push_back(x.values.empty() ? json::array() : vec_json(x.at(n)));
    }
    j["node_ids"] = ids;
    j["x"] = xs;
    json lids = json::array(), ps = json::array(), ys = json::array();
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        lids.push_back(tree.node(tree.leaf_node(l)).id);
        ps.push_back(dp.p.values.rows() ? vec_json(dp.p.at(l)) : json::array());
        ys.push_back(dp.y.values.rows() ? vec_json(dp.y.at(l)) : json::array());
    }
    j["leaf_ids"] = lids;
    j["p"] = ps;
    j["y"] = ys;
    return j;
}

json certificate_to_json(const Instance& inst, const StochasticProgram& sp, const StochasticSolution& sol) {
    json j = certificate_to_json(inst, sp, sol.x, sol.dual, sol.certificate);
    j["solver_status"] = to_string(sol.solver_status);
    if (sol.direction.size()) j["direction"] = vec_json(sol.direction);
    return j;
}

void read_certificate(const json& j, const StochasticProgram& sp, AdaptedProcess& x, DualPoint& dp) {
    const FilteredTree& tree = sp.tree;
    const json& xs = field(j, "x", "");
    if (!xs.is_array() || xs.size() != tree.size()) fail("/x", "need one value per node");
    x = AdaptedProcess::zeros(tree, sp.dims);
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const VectorXd v = vec(xs[n], at("/x", n));
        if (v.size() != sp.dims[tree.time(n)]) fail(at("/x", n), "wrong stage dimension");
        x.values[n] = v;
    }
    const json& ps = field(j, "p", "");
    const json& ys = field(j, "y", "");
    if (!ps.is_array() || ps.size() != tree.num_leaves()) fail("/p", "need one value per leaf");
    if (!ys.is_array() || ys.size() != tree.num_leaves()) fail("/y", "need one value per leaf");
    dp.p = LeafProcess::zeros(tree, sp.dims);
    dp.y = RandomVector::zeros(tree, sp.m);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const VectorXd p = vec(ps[l], at("/p", l));
        const VectorXd y = vec(ys[l], at("/y", l));
        if (p.size() != sp.n_total()) fail(at("/p", l), "wrong length");
        if (y.size() != sp.m) fail(at("/y", l), "wrong length");
        dp.p.values.row(static_cast<Eigen::Index>(l)) = p.transpose();
        dp.y.values.row(static_cast<Eigen::Index>(l)) = y.transpose();
    }
}

json qualification_to_json(const FilteredTree& tree, const QualificationReport& q) {
    auto status = [](bool holds, bool inconclusive) { return inconclusive ? "inconclusive" : (holds ? "holds" : "fails"); };
    auto leaf_id = [&](int l) -> json { return l < 0 ? json(nullptr) : json(tree.node(tree.leaf_node(l)).id); };
    json j;
    const auto& sf = q.strict_feasibility;
    j["strict_feasibility"] = {{"status", status(sf.holds, sf.inconclusive)}, {"detail", sf.detail},
                               {"failing_leaf", leaf_id(sf.failing_leaf)}};
    if (sf.failing_generator.size()) j["strict_feasibility"]["witness"] = vec_json(sf.failing_generator);
    const auto& r1 = q.rec1;
    j["parameter_recession"] = {{"status", status(r1.holds, r1.inconclusive)}, {"detail", r1.detail},
                                {"failing_leaf", leaf_id(r1.failing_leaf)}, {"cross_checked", r1.cross_checked}};
    if (r1.witness.size()) j["parameter_recession"]["witness"] = vec_json(r1.witness);
    const auto& r2 = q.rec2;
    j["conditional_recourse"] = {{"status", status(r2.holds, r2.inconclusive)}, {"detail", r2.detail},
                                 {"samples", r2.samples}, {"failing_stage", r2.failing_stage},
                                 {"failing_leaf", leaf_id(r2.failing_leaf)}};
    const auto& br = q.bounded_recourse;
    j["bounded_recourse"] = {{"status", status(br.holds, br.inconclusive)}, {"detail", br.detail},
                             {"radius", br.radius}, {"failing_stage", br.failing_stage},
                             {"failing_node", br.holds || br.inconclusive ? json(nullptr) : json(br.failing_node)}};
    return j;
}

}  // namespace treedual
