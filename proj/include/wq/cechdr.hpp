#ifndef WQ_CECHDR_HPP
#define WQ_CECHDR_HPP

#include "wq/forms.hpp"
#include "wq/series.hpp"
#include "wq/starprod.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wq {

inline constexpr std::size_t kMaxCharts = 3;

struct Chart {
    std::string name;
    std::vector<std::string> coords;
};

using Substitution = std::map<std::string, Series>;
using Pair = std::pair<int, int>;

/// Charts with coordinate substitutions on overlaps. The map stored for
/// (i, j) expresses the chart-i coordinates in chart-j coordinates, over a
/// ring whose chart-j variables listed as invertible may appear with negative
/// exponents.
class Atlas {
public:
    int add_chart(const std::string &name, const std::vector<std::string> &coords);
    void add_overlap(int from, int to, Substitution map, const std::vector<std::string> &invertible);

    std::size_t size() const { return charts_.size(); }
    const Chart &chart(int i) const { return charts_.at(static_cast<std::size_t>(i)); }
    int chart_index(const std::string &name) const; // -1 when absent
    bool has_overlap(int i, int j) const { return maps_.count({i, j}) > 0; }
    const Substitution &map(int i, int j) const;
    /// Overlapping pairs (i, j) with i < j.
    std::vector<Pair> pairs() const;

    Ring chart_ring(int i) const;
    /// Chart-i coordinates on U_i n U_j (and n U_k).
    Ring ring_on(int i, int j) const;
    Ring ring_on(int i, int j, int k) const;

    /// Rewrites an object in chart-`from` coordinates in chart-`to`
    /// coordinates on the overlap, over `target` when given.
    Series transport(const Series &f, int from, int to) const;
    Form transport(const Form &w, int from, int to) const;
    Form transport(const Form &w, int from, int to, const Ring &target) const;

    /// Exact checks: i -> j -> i is the identity and i -> j -> k agrees with
    /// i -> k. Throws NotCocycle.
    void verify() const;

private:
    std::vector<Chart> charts_;
    std::map<Pair, Substitution> maps_;
    std::map<Pair, std::vector<std::string>> invertible_; // chart-`to` variables
};

/// Transition units with e_j = phi^{ij} e_i, phi^{ij} in chart-i coordinates.
struct LineBundle {
    std::map<Pair, Series> phi; // i < j

    static LineBundle trivial(const Atlas &atlas);
    /// Any order; phi^{ji} is derived as the transported inverse.
    Series phi_at(const Atlas &atlas, int i, int j) const;
    LineBundle tensor(const Atlas &atlas, const LineBundle &other) const;
    LineBundle power(const Atlas &atlas, int k) const;
    /// phi^{ij} phi^{jk} phi^{ki} = 1 on triple overlaps. Throws NotCocycle.
    void verify(const Atlas &atlas) const;
};

/// Determinant of d(chart-j coordinates)/d(chart-i coordinates).
LineBundle canonical_bundle(const Atlas &atlas);

/// A degree-2 cochain (eta^i, xi^{ij}) of the truncated Cech-de Rham complex.
/// xi^{ij} for i < j lives in chart-i coordinates; xi^{ji} = -xi^{ij}.
struct CechClass {
    std::vector<Form> eta;
    std::map<Pair, Form> xi;

    static CechClass zero(const Atlas &atlas);
    Form xi_at(const Atlas &atlas, int i, int j) const;

    CechClass &operator+=(const CechClass &o);
    friend CechClass operator+(CechClass a, const CechClass &b) { return a += b; }
    friend CechClass operator*(const Rational &c, const CechClass &x);
    friend CechClass operator-(const CechClass &a, const CechClass &b) { return a + Rational(-1) * b; }
    std::string str(const Atlas &atlas) const;
};

/// d eta^i = 0, eta^i - eta^j = d xi^{ij}, xi^{ij} + xi^{jk} + xi^{ki} = 0. Throws NotAClass.
void verify_class(const Atlas &atlas, const CechClass &c);

/// eta = 0, xi^{ij} = d phi^{ij} / phi^{ij}.
CechClass chern_class(const Atlas &atlas, const LineBundle &l);

struct ReduceOptions {
    int degree = -1;       // coefficient degree of coboundary generators; -1 picks span + 2
    bool de_rham = false;  // also divide by d of functions on overlaps (two charts only)
};

/// Canonical residual of a class modulo coboundaries, as labelled
/// coefficients such as "xi[U0,U1] t^-1 dt".
struct ReducedClass {
    std::map<std::string, Rational> coords;
    CechClass residual;

    bool is_zero() const { return coords.empty(); }
    /// 0 when empty, the value when there is a single coordinate; Unsupported otherwise.
    Rational scalar() const;
    bool operator==(const ReducedClass &o) const { return coords == o.coords; }
    std::string str() const;
};

ReducedClass class_reduce(const Atlas &atlas, const CechClass &c, ReduceOptions opts = {});

/// The atlas of Y = {normal coordinates = 0}. Throws NotLagrangian when a
/// transition does not preserve the ideal.
Atlas restrict_atlas(const Atlas &ambient, const std::vector<std::vector<std::string>> &normals);

/// Restriction of ambient functions and forms to Y on chart i (overlap ring `ring`).
Series restrict_to(const Series &f, const std::vector<std::string> &normals, const Ring &ring);
Form restrict_to(const Form &w, const std::vector<std::string> &normals, const Ring &ring);

struct ObstructionInput {
    Atlas ambient;
    std::vector<StarProduct> stars;
    /// Keyed by (source chart, target chart); either direction of a pair suffices.
    std::map<Pair, VectorField> beta1;
    std::vector<std::vector<std::string>> normals;
    std::vector<Form> omega;
};

struct ObstructionResult {
    Atlas y_atlas;
    CechClass cls;
};

/// eta^i from the antisymmetrized alpha_2 on normal generators, xi^{ij} from
/// the normal part of beta1^{ij} on Y, both converted to forms on Y through
/// omega. Throws NotWeylNormalized, NotSymplectic, NotLagrangian, GluingDefect.
ObstructionResult obstruction_class(const ObstructionInput &in);

/// beta^{ji} from beta^{ij} so that the two transitions invert mod h^2.
VectorField reverse_beta(const Atlas &ambient, int i, int j, const VectorField &beta_ij);

/// Representative of i_Y^*[w]. Corrections lambda^{ij} (chart-i coordinates,
/// i < j) must satisfy w^i - w^j = d lambda^{ij}; without them the overlap
/// 1-forms are solved for within `degree`. Throws NotClosed, NoPrimitive.
ObstructionResult restrict_2form_class(const Atlas &ambient, const std::vector<std::vector<std::string>> &normals,
                                       const std::vector<Form> &w,
                                       const std::optional<std::map<Pair, Form>> &corrections = std::nullopt,
                                       int degree = 4);

} // namespace wq

#endif
