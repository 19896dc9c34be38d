#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "treedual/apps/control.hpp"
#include "treedual/apps/hedging.hpp"
#include "treedual/apps/lagrange.hpp"
#include "treedual/apps/mathprog.hpp"
#include "treedual/apps/stopping.hpp"
#include "treedual/duality.hpp"
#include "treedual/qualification.hpp"

namespace treedual {

using json = nlohmann::json;

/// Bad instance or certificate file. `path` is a JSON pointer into the document.
class InputError : public std::runtime_error {
public:
    InputError(std::string path, const std::string& msg)
        : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline constexpr int kFormatVersion = 1;

struct Instance {
    std::string kind;
    std::string hash;
    FilteredTree tree = FilteredTree::trivial();
    std::optional<StochasticProgram> raw;
    std::optional<RewardProcess> stopping;
    std::optional<ControlSystem> control;
    std::optional<LagrangeProblem> lagrange;
    std::optional<MathProgram> mathprog;
    std::optional<HedgingProblem> hedging;
};

/// Parses text; malformed JSON is reported with its byte offset.
json parse_json_text(const std::string& text);
json read_json_file(const std::string& path);

Instance parse_instance(const json& j);
Instance load_instance(const std::string& path);
/// The stochastic program behind any instance kind; stopping instances
/// compile to their randomized relaxation.
StochasticProgram compile(const Instance& inst);

FilteredTree parse_tree(const json& j, const std::string& path = "/tree");
ConvexFunction parse_function(const json& j, const std::string& path, int dim_hint = -1);
json tree_to_json(const FilteredTree& tree);

/// 64-bit FNV-1a over the compact dump of the document, as 16 hex digits.
std::string content_hash(const json& j);

json number_to_json(double v);
json number_to_json(const ExtendedReal& v);
double number_from_json(const json& j, const std::string& path);

json certificate_to_json(const Instance& inst, const StochasticProgram& sp, const StochasticSolution& sol);
json certificate_to_json(const Instance& inst, const StochasticProgram& sp, const AdaptedProcess& x,
                         const DualPoint& dp, const Certificate& cert);
/// Reads the primal and dual parts of a certificate back against a program.
void read_certificate(const json& j, const StochasticProgram& sp, AdaptedProcess& x, DualPoint& dp);

json qualification_to_json(const FilteredTree& tree, const QualificationReport& q);

}  // namespace treedual
