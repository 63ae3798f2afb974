#ifndef WQ_FORMS_HPP
#define WQ_FORMS_HPP

#include "wq/series.hpp"

#include <map>
#include <string>
#include <vector>

namespace wq {

/// Differential form of degree 0, 1 or 2 on a chart. Components are keyed by
/// strictly increasing index tuples into the ring's variables.
class Form {
public:
    using Key = std::vector<int>;

    Form() = default;
    Form(Ring ring, int degree);

    static Form function(const Series &f);
    /// df for a function f.
    static Form differential(const Series &f);

    const Ring &ring() const { return ring_; }
    int degree() const { return degree_; }
    const std::map<Key, Series> &components() const { return comps_; }
    Series component(const Key &key) const;
    /// Component by variable names, e.g. {"t","p"}; sign follows the permutation.
    Series component_named(const std::vector<std::string> &names) const;
    bool is_zero() const { return comps_.empty(); }
    /// Highest absolute total degree among coefficient monomials.
    int coefficient_span() const;

    /// Adds c * dx_{key[0]} ^ ... ; unsorted keys are canonicalized.
    void add(Key key, const Series &c);
    void add_named(const std::vector<std::string> &names, const Series &c);

    Form embed(const Ring &target) const;

    Form operator-() const;
    Form &operator+=(const Form &other);
    Form &operator-=(const Form &other) { return *this += -other; }
    friend Form operator+(Form a, const Form &b) { return a += b; }
    friend Form operator-(Form a, const Form &b) { return a -= b; }
    friend Form operator*(const Series &f, const Form &w);
    friend Form operator*(const Rational &c, const Form &w);

    bool operator==(const Form &other) const;
    std::string str() const;

private:
    Ring ring_;
    int degree_ = 0;
    std::map<Key, Series> comps_;
};

Form exterior_d(const Form &w);
Form wedge(const Form &a, const Form &b);

/// Pulls w back along a map given by the images of the source variables in
/// `target`. Source variables without an image must exist in `target`.
Form pullback(const Form &w, const Ring &target, const std::map<std::string, Series> &images);

/// Interior product i_v w, with v given by components over w's variables.
Form contract(const std::vector<Series> &v, const Form &w);

} // namespace wq

#endif
