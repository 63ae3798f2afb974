#ifndef WQ_QUANTCHECK_HPP
#define WQ_QUANTCHECK_HPP

#include "wq/cechdr.hpp"
#include "wq/starprod.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace wq {

struct TransitionSpec {
    int from = 0, to = 0;
    bool solve = true;
    VectorField beta1; // target-chart coordinates, when not solved
};

struct BundleTransition {
    int from = 0, to = 0;
    Series phi; // chart-`from` coordinates on the overlap
};

struct PeriodData {
    int index = 2;
    std::vector<Form> forms; // closed ambient 2-forms per chart
    std::optional<std::map<Pair, Form>> corrections;
};

struct Scenario {
    std::string name;
    int order = 1;
    Atlas atlas;
    std::vector<StarProduct> stars;
    std::vector<TransitionSpec> transitions;
    std::vector<std::vector<Series>> lagrangian; // ideal generators per chart
    std::vector<Form> omega;
    std::vector<BundleTransition> line_bundle; // empty: trivial bundle
    std::vector<PeriodData> periods;
    int beta_degree = 3;
    int reduce_degree = -1;
};

/// Throws InvalidScenario naming the offending field.
Scenario load_scenario(const nlohmann::json &j);
Scenario load_scenario_file(const std::string &path);

/// {"base": [...], "fiber": [...], "kind": "moyal" | "custom", "order": k, "extra": [...]}
StarProduct load_star(const nlohmann::json &j);
/// {"charts": [...], "overlaps": [...]} as in a scenario.
Atlas load_atlas(const nlohmann::json &j);
/// [{"from", "to", "phi"}] over `atlas`, completed to every overlapping pair.
LineBundle load_line_bundle(const Atlas &atlas, const nlohmann::json &j);
nlohmann::json read_json_file(const std::string &path);
nlohmann::json to_json(const ReducedClass &c);

/// omega restricted along the ideal vanishes on every chart and the ideal
/// has half the chart dimension. Generators must each be solvable for one
/// variable with a constant coefficient. Throws MissingData.
bool check_lagrangian(const Scenario &s);

/// Coordinate normals per chart; Unsupported when a generator is not a coordinate.
std::vector<std::vector<std::string>> normal_coordinates(const Scenario &s);

struct TransitionReport {
    int from = 0, to = 0;
    bool solved = false;
    std::size_t unknowns = 0, kernel_dim = 0, gauge_dim = 0, period_dim = 0;
    VectorField beta1;
};

struct HalfCanonical {
    Atlas y_atlas;
    ReducedClass c1_L, c1_K, at, condition; // condition = c1(L) - 1/2 c1(K_Y) - At
    std::vector<TransitionReport> transitions;
};

HalfCanonical half_canonical_condition(const Scenario &s);

struct PeriodReport {
    int index = 0;
    enum class Status { Verified, Failed, Missing, Unsupported } status = Status::Missing;
    ReducedClass reduced;
    std::string note;
};

struct Verdict {
    std::string scenario;
    int order = 1;
    bool lagrangian_ok = false;
    std::optional<HalfCanonical> chern;
    bool chern_ok = false;
    std::vector<PeriodReport> periods;
    bool quantizable = false; // conjunction of every check that could be performed
    bool conclusive = false;  // every condition required at this order was checkable
    std::vector<std::string> report;

    /// 0 quantizable, 3 not quantizable, 4 inconclusive.
    int exit_code() const;
    nlohmann::json to_json() const;
    std::string text() const;
};

Verdict run_scenario(const Scenario &s, std::optional<int> order = std::nullopt);

} // namespace wq

#endif
