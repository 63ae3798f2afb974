#ifndef WQ_SERIES_HPP
#define WQ_SERIES_HPP

#include "wq/error.hpp"
#include "wq/rational.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wq {

/// Sentinel for "no truncation": exact polynomials carry this cap and order.
inline constexpr int kUnbounded = 1 << 20;
inline constexpr int kDefaultNegativeFloor = -12;
inline constexpr int kMinHbarFloor = -2;

/// Adds `delta` to a cap or validity order, leaving kUnbounded untouched.
inline int shift_cap(int cap, int delta) { return cap >= kUnbounded ? kUnbounded : cap + delta; }

/// x^exps * hbar^hbar
struct Monomial {
    std::vector<int> exps;
    int hbar = 0;

    int degree() const;
    bool operator==(const Monomial &) const = default;
};

/// Canonical order: total degree, then lexicographic by variable order
/// (larger leading exponent first), then hbar power.
struct MonomialLess {
    bool operator()(const Monomial &a, const Monomial &b) const;
};

/// The variables a series lives over. Variables flagged invertible may carry
/// negative exponents down to `negative_floor` (Laurent coordinates on chart overlaps).
struct Ring {
    std::vector<std::string> vars;
    std::vector<bool> invertible;
    int negative_floor = kDefaultNegativeFloor;

    Ring() = default;
    explicit Ring(std::vector<std::string> v, std::vector<bool> inv = {},
                  int floor = kDefaultNegativeFloor);

    std::size_t size() const { return vars.size(); }
    int index_of(const std::string &name) const; // -1 when absent
    bool is_invertible(const std::string &name) const;
    Ring with_invertible(const std::vector<std::string> &names) const;

    bool operator==(const Ring &) const = default;
};

/// Smallest ring containing both; throws IncompatibleVariables unless one
/// variable set contains the other.
Ring merge_rings(const Ring &a, const Ring &b);

/// Truncated formal series over Q in the ring variables and hbar.
///
/// `x_cap` bounds the total x-degree of stored terms and `hbar_order` is the
/// validity order: coefficients of hbar^k for k > hbar_order are unknown and
/// never stored. Both propagate through arithmetic as validity bounds.
class Series {
public:
    using TermMap = std::map<Monomial, Rational, MonomialLess>;

    Series() = default;
    explicit Series(Ring ring, int x_cap = kUnbounded, int hbar_order = kUnbounded, int min_hbar = 0);

    static Series constant(const Ring &ring, const Rational &c);
    static Series variable(const Ring &ring, const std::string &name);
    static Series hbar(const Ring &ring, int power = 1);
    static Series monomial(const Ring &ring, const Monomial &m, const Rational &c);

    const Ring &ring() const { return ring_; }
    const std::vector<std::string> &vars() const { return ring_.vars; }
    int x_cap() const { return x_cap_; }
    int hbar_order() const { return hbar_order_; }
    int min_hbar() const { return min_hbar_; }
    const TermMap &terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_exact() const { return x_cap_ >= kUnbounded && hbar_order_ >= kUnbounded; }
    Rational coefficient(const Monomial &m) const;
    Rational constant_term() const;
    /// Lowest stored hbar power; kUnbounded for the zero series.
    int lowest_hbar() const;
    /// Lowest stored total x-degree; kUnbounded for the zero series.
    int lowest_degree() const;
    int highest_degree() const;

    /// Adds c * m, enforcing the invariants (caps, floor, no zero entries).
    void add_term(const Monomial &m, const Rational &c);

    /// Lowers caps (never raises them) and drops terms beyond them.
    Series truncated(int x_cap, int hbar_order) const;
    Series with_min_hbar(int min_hbar) const;
    /// Re-expresses the series over a ring containing its variables.
    Series embed(const Ring &target) const;

    /// Coefficient of hbar^k as a series without hbar.
    Series hbar_coefficient(int k) const;
    /// Multiplies by hbar^k; negative k divides (consuming validity).
    Series shift_hbar(int k) const;

    Series operator-() const;
    Series &operator+=(const Series &other);
    Series &operator-=(const Series &other);
    Series &operator*=(const Rational &c);

    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }
    friend Series operator*(Series a, const Rational &c) { return a *= c; }
    friend Series operator*(const Rational &c, Series a) { return a *= c; }
    friend Series operator*(const Series &a, const Series &b);

    /// Same ring and identical term table (caps are not compared).
    bool operator==(const Series &other) const;

    std::string str() const;

private:
    Ring ring_;
    int x_cap_ = kUnbounded;
    int hbar_order_ = kUnbounded;
    int min_hbar_ = 0;
    TermMap terms_;

    void check_monomial(const Monomial &m) const;
};

/// True when a - b vanishes within the merged validity.
bool equal_within_validity(const Series &a, const Series &b);

Series power(const Series &f, int k);

/// Formal partial derivative. The x-cap drops by one: the top-degree
/// coefficients of the derivative depend on terms beyond the cap.
Series differentiate(const Series &f, const std::string &var);

/// Result of integrating a closed 1-form along coordinate axes.
struct PathIntegral {
    Series potential;
    /// Monomials x_j^{-1}*(...) met while integrating along axis j; they have
    /// no Laurent primitive. Keyed by (axis, monomial of the form coefficient).
    std::vector<std::pair<std::pair<int, Monomial>, Rational>> log_terms;
};

/// Integrates sum_j g_j dx_j along the coordinate axes in order. Throws
/// NotClosed when dg != 0; logarithmic terms are collected, not thrown.
PathIntegral integrate_axes(const std::vector<Series> &g, const std::vector<std::string> &vars);

/// Returns G with dG = sum_j g_j dx_j, zero constant term and no pure-hbar
/// terms. Throws NotClosed, or NoPrimitive when a logarithm would be needed.
Series integrate_path(const std::vector<Series> &g, const std::vector<std::string> &vars);

/// sum g^k/k! truncated to the caps of g. Requires every term to have
/// positive x-degree or positive hbar power.
Series exp_series(const Series &g);

/// Inverse of a unit whose lowest-degree hbar-free part is a single monomial
/// in invertible variables.
Series inverse(const Series &u);

/// Composition: every assigned variable is replaced by its image. Images may
/// live over a different ring; the result lives over the merged ring.
Series substitute(const Series &f, const std::map<std::string, Series> &assignment);

} // namespace wq

#endif
