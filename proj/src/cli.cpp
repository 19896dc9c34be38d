#include "treedual/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "treedual/io.hpp"

namespace treedual::cli {

namespace {

struct Options {
    std::string in;
    std::string out;
    std::string cert;
    std::string report = "json";
    double tol = 1e-6;
    int max_iter = 200;
    double radius = 10.0;
    int samples = 8;
    double box = 2.0;
    double resolution = 1e-3;
};

struct Outcome {
    json doc;
    int code = kPassed;
    std::vector<std::pair<std::string, std::string>> lines;  // check -> verdict
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::string verdict(bool ok, double value, double tol) {
    return std::string(ok ? "PASS" : "FAIL") + "  " + fmt(value) + " (tol " + fmt(tol) + ")";
}

int code_of(CertificateStatus s) {
    switch (s) {
        case CertificateStatus::certified_optimal: return kPassed;
        case CertificateStatus::inconclusive: return kInconclusive;
        default: return kFailed;
    }
}

int combine(int a, int b) {
    if (a == kFailed || b == kFailed) return kFailed;
    if (a == kInconclusive || b == kInconclusive) return kInconclusive;
    return kPassed;
}

void certificate_lines(Outcome& o, const Certificate& c) {
    o.lines.emplace_back("status", to_string(c.status));
    o.lines.emplace_back("primal value", c.primal.to_string());
    o.lines.emplace_back("dual value", c.dual.to_string());
    const double scale = c.primal.is_finite() ? std::max(1.0, std::abs(c.primal.value())) : 1.0;
    const double gap = c.gap.to_double();
    o.lines.emplace_back("zero duality gap", verdict(std::abs(gap) <= c.tol * scale, gap, c.tol * scale));
    o.lines.emplace_back("scenario-wise subgradient condition",
                         verdict(c.kkt.max_leaf_residual <= c.tol * scale, c.kkt.max_leaf_residual, c.tol * scale));
    o.lines.emplace_back("shadow price orthogonal to adapted",
                         verdict(c.kkt.nonanticipativity <= c.tol, c.kkt.nonanticipativity, c.tol));
    if (!c.note.empty()) o.lines.emplace_back("note", c.note);
}

Outcome solve_outcome(const Instance& inst, const Options& opt, StochasticSolution* keep = nullptr) {
    const StochasticProgram sp = compile(inst);
    const StochasticSolution sol = solve(sp, opt.tol, opt.max_iter);
    Outcome o;
    o.doc = certificate_to_json(inst, sp, sol);
    o.code = code_of(sol.certificate.status);
    certificate_lines(o, sol.certificate);
    if (keep) *keep = sol;
    return o;
}

Outcome cmd_solve(const Instance& inst, const Options& opt) {
    Outcome o = solve_outcome(inst, opt);
    o.doc["command"] = "solve";
    return o;
}

Outcome cmd_certify(const Instance& inst, const Options& opt) {
    if (opt.cert.empty()) throw InputError("", "certify needs --cert PATH");
    const json cj = read_json_file(opt.cert);
    if (!cj.contains("instance_hash") || cj.at("instance_hash") != inst.hash)
        throw InputError("/instance_hash", "certificate does not belong to this instance");
    const StochasticProgram sp = compile(inst);
    AdaptedProcess x;
    DualPoint dp;
    read_certificate(cj, sp, x, dp);
    const Certificate c = certify(sp, x, dp, opt.tol);
    Outcome o;
    o.doc = certificate_to_json(inst, sp, x, dp, c);
    o.doc["command"] = "certify";
    o.code = code_of(c.status);
    certificate_lines(o, c);
    return o;
}

Outcome cmd_qualify(const Instance& inst, const Options& opt) {
    const StochasticProgram sp = compile(inst);
    QualificationOptions qo;
    qo.radius = opt.radius;
    qo.samples = opt.samples;
    const QualificationReport q = qualify(sp, qo);
    Outcome o;
    o.doc["format_version"] = kFormatVersion;
    o.doc["command"] = "qualify";
    o.doc["kind"] = inst.kind;
    o.doc["instance_hash"] = inst.hash;
    o.doc["checks"] = qualification_to_json(sp.tree, q);
    const std::pair<const char*, std::pair<bool, bool>> parts[] = {
        {"strict feasibility", {q.strict_feasibility.holds, q.strict_feasibility.inconclusive}},
        {"parameter-domain linearity", {q.rec1.holds, q.rec1.inconclusive}},
        {"conditional recourse", {q.rec2.holds, q.rec2.inconclusive}},
        {"bounded recourse adaptedness", {q.bounded_recourse.holds, q.bounded_recourse.inconclusive}}};
    const std::string details[] = {q.strict_feasibility.detail, q.rec1.detail, q.rec2.detail, q.bounded_recourse.detail};
    int code = kPassed;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [holds, inc] = parts[i].second;
        const int c = inc ? kInconclusive : (holds ? kPassed : kFailed);
        code = combine(code, c);
        o.lines.emplace_back(parts[i].first, std::string(inc ? "INCONCLUSIVE" : (holds ? "PASS" : "FAIL")) + "  " + details[i]);
    }
    o.code = code;
    o.doc["passed"] = code == kPassed;
    return o;
}

Instance require_kind(const Instance& inst, const std::string& kind) {
    if (inst.kind != kind) throw InputError("/kind", "this command needs a '" + kind + "' instance");
    return inst;
}

json node_values(const FilteredTree& tree, const Eigen::VectorXd& v) {
    json a = json::array();
    for (std::size_t n = 0; n < tree.size(); ++n) a.push_back(number_to_json(v(static_cast<Eigen::Index>(n))));
    return a;
}

json process_json(const AdaptedProcess& x) {
    json a = json::array();
    for (const auto& v : x.values) {
        json r = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(number_to_json(v(i)));
        a.push_back(r);
    }
    return a;
}

Outcome cmd_stopping(const Instance& inst, const Options& opt) {
    require_kind(inst, "stopping");
    const RewardProcess& rp = *inst.stopping;
    const FilteredTree& tree = rp.tree;
    const Eigen::VectorXd S = snell_envelope(rp);
    const StoppingTime tau = optimal_stopping_time(rp);
    const StoppingDual dual = stopping_dual(rp);
    const StoppingReport rep = verify_stopping_certificate(rp, tau, dual.y, opt.tol);
    const StochasticProgram sp = ros_compile(rp);
    AdaptedProcess x = AdaptedProcess::zeros(tree, sp.dims);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (tau.stage[l] <= tree.horizon()) x.values[tree.ancestor(l, tau.stage[l])](0) = 1.0;
    const Certificate cert = certify(sp, x, ros_dual_point(rp, dual), opt.tol);
    Outcome o;
    o.doc = certificate_to_json(inst, sp, x, ros_dual_point(rp, dual), cert);
    o.doc["command"] = "stopping";
    json tj = json::array();
    for (int s : tau.stage) tj.push_back(s);
    o.doc["stopping"] = {{"value", snell_value(rp)},
                         {"stopping_value", stopping_value(rp, tau)},
                         {"snell_envelope", node_values(tree, S)},
                         {"stop_stage", tj},
                         {"martingale", node_values(tree, dual.y)},
                         {"report",
                          {{"martingale", rep.martingale},
                           {"dominance", rep.dominance},
                           {"nonnegativity", rep.nonnegativity},
                           {"slackness", rep.slackness},
                           {"measurable", rep.measurable},
                           {"certified", rep.certified}}}};
    o.code = combine(code_of(cert.status), rep.certified ? kPassed : kFailed);
    o.lines.emplace_back("optimal stopping value", fmt(snell_value(rp)));
    o.lines.emplace_back("stopping time measurable", rep.measurable ? "PASS" : "FAIL");
    o.lines.emplace_back("dual is a martingale", verdict(rep.martingale <= opt.tol, rep.martingale, opt.tol));
    o.lines.emplace_back("martingale dominates reward", verdict(rep.dominance <= opt.tol, rep.dominance, opt.tol));
    o.lines.emplace_back("martingale nonnegative", verdict(rep.nonnegativity <= opt.tol, rep.nonnegativity, opt.tol));
    o.lines.emplace_back("reward meets martingale at stop", verdict(rep.slackness <= opt.tol, rep.slackness, opt.tol));
    certificate_lines(o, cert);
    return o;
}

Outcome cmd_control(const Instance& inst, const Options& opt) {
    require_kind(inst, "control");
    const ControlSystem& cs = *inst.control;
    StochasticSolution sol;
    Outcome o = solve_outcome(inst, opt, &sol);
    o.doc["command"] = "control";
    if (sol.certificate.status != CertificateStatus::certified_optimal) return o;
    AdaptedProcess X, U;
    control_split(cs, sol.x, X, U);
    const AdaptedProcess y = control_costate(cs, sol.dual.y);
    const ControlDualReport rep = control_dual_residual(cs, X, U, y, opt.tol);
    json cj = {{"states", process_json(X)},
               {"controls", process_json(U)},
               {"costates", process_json(y)},
               {"stationarity", rep.stationarity},
               {"dynamics", rep.dynamics},
               {"nonanticipativity", rep.nonanticipativity},
               {"certified", rep.certified}};
    o.lines.emplace_back("costate optimality system", verdict(rep.stationarity <= opt.tol, rep.stationarity, opt.tol));
    o.lines.emplace_back("dynamics", verdict(rep.dynamics <= opt.tol, rep.dynamics, opt.tol));
    int code = combine(o.code, rep.certified ? kPassed : kFailed);
    try {
        const LqSolution lq = lq_riccati_oracle(cs);
        const double diff = std::abs(lq.value - sol.certificate.primal.value());
        const bool agree = diff <= opt.tol * std::max(1.0, std::abs(lq.value));
        cj["riccati_value"] = lq.value;
        cj["riccati_agrees"] = agree;
        o.lines.emplace_back("riccati dynamic program agrees", verdict(agree, diff, opt.tol));
        code = combine(code, agree ? kPassed : kFailed);
    } catch (const std::invalid_argument&) {
        cj["riccati_value"] = nullptr;
    }
    o.doc["control"] = cj;
    o.code = code;
    return o;
}

Outcome cmd_lagrange(const Instance& inst, const Options& opt) {
    require_kind(inst, "lagrange");
    const LagrangeProblem& lp = *inst.lagrange;
    StochasticSolution sol;
    Outcome o = solve_outcome(inst, opt, &sol);
    o.doc["command"] = "lagrange";
    if (sol.certificate.status != CertificateStatus::certified_optimal) return o;
    const AdaptedProcess y = lagrange_costate(lp, sol.dual.y);
    const LagrangeDualReport rep = lagrange_dual_residual(lp, sol.x, y, opt.tol);
    o.doc["lagrange"] = {{"costates", process_json(y)},
                         {"max_residual", rep.max_residual},
                         {"nonanticipativity", rep.nonanticipativity},
                         {"certified", rep.certified}};
    o.lines.emplace_back("hamiltonian conditions", verdict(rep.max_residual <= opt.tol, rep.max_residual, opt.tol));
    o.code = combine(o.code, rep.certified ? kPassed : kFailed);
    return o;
}

Outcome cmd_mathprog(const Instance& inst, const Options& opt) {
    require_kind(inst, "mathprog");
    StochasticSolution sol;
    Outcome o = solve_outcome(inst, opt, &sol);
    o.doc["command"] = "mathprog";
    if (sol.certificate.status != CertificateStatus::certified_optimal) return o;
    const MathProgKkt k = mathprog_kkt(*inst.mathprog, sol.x, sol.dual.p, sol.dual.y, opt.tol);
    o.doc["mathprog"] = {{"stationarity", k.stationarity},
                         {"primal_feasibility", k.primal_feasibility},
                         {"dual_cone", k.dual_cone},
                         {"complementarity", k.complementarity},
                         {"nonanticipativity", k.nonanticipativity},
                         {"certified", k.certified}};
    o.lines.emplace_back("stationarity", verdict(k.stationarity <= opt.tol, k.stationarity, opt.tol));
    o.lines.emplace_back("primal feasibility", verdict(k.primal_feasibility <= opt.tol, k.primal_feasibility, opt.tol));
    o.lines.emplace_back("multiplier sign", verdict(k.dual_cone <= opt.tol, k.dual_cone, opt.tol));
    o.lines.emplace_back("complementary slackness", verdict(k.complementarity <= opt.tol, k.complementarity, opt.tol));
    o.code = combine(o.code, k.certified ? kPassed : kFailed);
    return o;
}

Outcome cmd_hedge(const Instance& inst, const Options& opt) {
    require_kind(inst, "hedging");
    StochasticSolution sol;
    Outcome o = solve_outcome(inst, opt, &sol);
    o.doc["command"] = "hedge";
    if (sol.certificate.status != CertificateStatus::certified_optimal) return o;
    const HedgingDualReport r = hedging_dual_residual(*inst.hedging, sol.x, sol.dual.y, opt.tol);
    o.doc["hedging"] = {{"loss", number_to_json(r.loss)},
                        {"trading", number_to_json(r.trading)},
                        {"derivatives", number_to_json(r.derivatives)},
                        {"terminal", number_to_json(r.terminal)},
                        {"nonanticipativity", number_to_json(r.nonanticipativity)},
                        {"certified", r.certified}};
    o.lines.emplace_back("marginal loss condition", verdict(r.loss <= opt.tol, r.loss, opt.tol));
    o.lines.emplace_back("martingale trading condition", verdict(r.trading <= opt.tol, r.trading, opt.tol));
    o.lines.emplace_back("static position condition", verdict(r.derivatives <= opt.tol, r.derivatives, opt.tol));
    o.lines.emplace_back("terminal position zero", verdict(r.terminal <= opt.tol, r.terminal, opt.tol));
    o.code = combine(o.code, r.certified ? kPassed : kFailed);
    return o;
}

Outcome cmd_oracle(const Instance& inst, const Options& opt) {
    Outcome o;
    o.doc["format_version"] = kFormatVersion;
    o.doc["command"] = "oracle";
    o.doc["kind"] = inst.kind;
    o.doc["instance_hash"] = inst.hash;
    if (inst.stopping) {
        const RewardProcess& rp = *inst.stopping;
        const double snell = snell_value(rp);
        const StoppingOracle ex = exhaustive_stopping_oracle(rp);
        const double diff = std::abs(snell - ex.value);
        o.doc["oracle"] = {{"method", "exhaustive stopping times"}, {"value", ex.value}, {"count", ex.count}, {"snell_value", snell}};
        o.code = diff <= 1e-9 ? kPassed : kFailed;
        o.lines.emplace_back("enumeration matches snell envelope", verdict(diff <= 1e-9, diff, 1e-9));
        return o;
    }
    const StochasticProgram sp = compile(inst);
    const StochasticSolution sol = solve(sp, opt.tol, opt.max_iter);
    if (sol.certificate.status != CertificateStatus::certified_optimal) {
        o.doc["oracle"] = {{"method", "none"}, {"solve_status", to_string(sol.certificate.status)}};
        o.code = kInconclusive;
        o.lines.emplace_back("solve", to_string(sol.certificate.status));
        return o;
    }
    const double value = sol.certificate.primal.value();
    if (inst.control) {
        try {
            const LqSolution lq = lq_riccati_oracle(*inst.control);
            const double diff = std::abs(lq.value - value);
            const bool ok = diff <= opt.tol * std::max(1.0, std::abs(value));
            o.doc["oracle"] = {{"method", "riccati dynamic program"}, {"value", lq.value}, {"solve_value", value}};
            o.code = ok ? kPassed : kFailed;
            o.lines.emplace_back("riccati dynamic program agrees", verdict(ok, diff, opt.tol));
            return o;
        } catch (const std::invalid_argument&) {
        }
    }
    const CompositeProgram prog = build_program(sp, nullptr, sp.ubar);
    if (prog.dim > 3) {
        o.doc["oracle"] = {{"method", "none"}, {"reason", "no independent oracle for this size"}};
        o.code = kInconclusive;
        o.lines.emplace_back("oracle", "INCONCLUSIVE  no independent oracle for this size");
        return o;
    }
    const std::vector<int> off = node_offsets(sp);
    Eigen::VectorXd center(prog.dim);
    for (std::size_t n = 0; n < sp.tree.size(); ++n)
        center.segment(off[n], sp.dims[sp.tree.time(n)]) = sol.x.at(n);
    const Eigen::VectorXd lo = center.array() - opt.box;
    const Eigen::VectorXd hi = center.array() + opt.box;
    const double per_axis = std::floor(std::pow(4e6, 1.0 / std::max(1, prog.dim)));
    const double resolution = std::max(opt.resolution, 2.0 * opt.box / (per_axis - 2.0));
    const BruteForceResult bf = brute_force_minimize(prog, lo, hi, resolution);
    const double diff = bf.value.to_double() - value;
    const bool ok = bf.value.is_finite() && diff >= -opt.tol * std::max(1.0, std::abs(value)) && diff <= bf.bound + opt.tol;
    o.doc["oracle"] = {{"method", "grid search"}, {"value", number_to_json(bf.value)}, {"bound", bf.bound}, {"resolution", resolution}, {"solve_value", value}};
    o.code = ok ? kPassed : kFailed;
    o.lines.emplace_back("grid search brackets the optimum", verdict(ok, diff, bf.bound));
    return o;
}

void emit(const Outcome& o, const Options& opt, std::ostream& out) {
    if (!opt.out.empty()) {
        std::ofstream f(opt.out, std::ios::binary);
        if (!f) throw InputError("", "cannot write " + opt.out);
        f << o.doc.dump(2) << "\n";
    }
    if (opt.report == "text") {
        for (const auto& [k, v] : o.lines) out << std::left << std::setw(38) << k << v << "\n";
    } else if (opt.out.empty()) {
        out << o.doc.dump(2) << "\n";
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scenario-tree convex stochastic programs: solve, certify, check qualification", "treedual"};
    app.require_subcommand(1);
    Options opt;
    using Handler = std::function<Outcome(const Instance&, const Options&)>;
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"solve", "Solve an instance and emit a certificate", cmd_solve},
        {"certify", "Re-verify a certificate against an instance", cmd_certify},
        {"qualify", "Run the qualification checks", cmd_qualify},
        {"stopping", "Optimal stopping with its martingale dual", cmd_stopping},
        {"control", "Optimal control with the costate optimality system", cmd_control},
        {"lagrange", "Problem of Lagrange with the Hamiltonian conditions", cmd_lagrange},
        {"mathprog", "Mathematical program with its KKT conditions", cmd_mathprog},
        {"hedge", "Semi-static hedging with its dual conditions", cmd_hedge},
        {"oracle", "Compare the solver against an independent oracle", cmd_oracle}};
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--in", opt.in, "Instance file")->required();
        sub->add_option("--out", opt.out, "Write the JSON result here");
        sub->add_option("--tol", opt.tol, "Tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", opt.max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);
        sub->add_option("--report", opt.report, "Report format")->check(CLI::IsMember({"json", "text"}));
        if (name == "certify") sub->add_option("--cert", opt.cert, "Certificate file")->required();
        if (name == "qualify") {
            sub->add_option("--radius", opt.radius, "Box radius for the bounded recourse test");
            sub->add_option("--samples", opt.samples, "Random feasible points for the recourse test");
        }
        if (name == "oracle") {
            sub->add_option("--box", opt.box, "Half width of the grid search box around the solver point");
            sub->add_option("--resolution", opt.resolution, "Smallest grid spacing; coarsened to fit the point budget");
        }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInputError;
    }
    for (const auto& [name, help, fn] : commands) {
        if (!app.got_subcommand(name)) continue;
        try {
            const Instance inst = load_instance(opt.in);
            const Outcome o = fn(inst, opt);
            emit(o, opt, out);
            return o.code;
        } catch (const InputError& e) {
            err << "input error: " << e.what() << "\n";
            return kInputError;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kInconclusive;
        }
    }
    return kInputError;
}

}  // namespace treedual::cli
