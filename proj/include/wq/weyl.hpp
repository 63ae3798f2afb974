#ifndef WQ_WEYL_HPP
#define WQ_WEYL_HPP

#include "wq/series.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace wq {

/// x^a y^b hbar^k, x factors to the left of y factors.
struct WeylMonomial {
    std::vector<int> a, b;
    int k = 0;

    int degree() const; // |a| + |b| + 2k
    bool operator==(const WeylMonomial &) const = default;
};

struct WeylMonomialLess {
    bool operator()(const WeylMonomial &u, const WeylMonomial &v) const;
};

/// Normal-ordered element of D or hbar^{-1} D on n symplectic pairs.
/// hbar_order is the validity order; min_hbar (>= -2) bounds stored powers.
class WeylElement {
public:
    using TermMap = std::map<WeylMonomial, Rational, WeylMonomialLess>;

    WeylElement() = default;
    explicit WeylElement(int n, int hbar_order = kUnbounded, int min_hbar = 0);

    static WeylElement constant(int n, const Rational &c);
    static WeylElement x(int n, int i); // 1-based
    static WeylElement y(int n, int i);
    static WeylElement hbar(int n, int power = 1);
    /// f(x, hbar) embedded with x factors only; ring variables must be x1..xn.
    static WeylElement from_series(int n, const Series &f);

    int n() const { return n_; }
    int hbar_order() const { return hbar_order_; }
    int min_hbar() const { return min_hbar_; }
    const TermMap &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_plain() const; // all stored hbar powers >= 0
    int lowest_hbar() const;
    Rational coefficient(const WeylMonomial &m) const;

    void add_term(const WeylMonomial &m, const Rational &c);
    WeylElement truncated(int hbar_order) const;
    WeylElement shift_hbar(int k) const;

    WeylElement operator-() const;
    WeylElement &operator+=(const WeylElement &o);
    WeylElement &operator-=(const WeylElement &o) { return *this += -o; }
    WeylElement &operator*=(const Rational &c);
    friend WeylElement operator+(WeylElement a, const WeylElement &b) { return a += b; }
    friend WeylElement operator-(WeylElement a, const WeylElement &b) { return a -= b; }
    friend WeylElement operator*(WeylElement a, const Rational &c) { return a *= c; }
    friend WeylElement operator*(const Rational &c, WeylElement a) { return a *= c; }

    bool operator==(const WeylElement &o) const { return n_ == o.n_ && terms_ == o.terms_; }
    std::string str() const;

private:
    int n_ = 0;
    int hbar_order_ = kUnbounded;
    int min_hbar_ = 0;
    TermMap terms_;
};

WeylElement weyl_mul(const WeylElement &u, const WeylElement &v);
WeylElement weyl_bracket(const WeylElement &u, const WeylElement &v);

/// Product of two single normal-ordered monomials, summed over contractions.
WeylElement monomial_product(int n, const WeylMonomial &u, const WeylMonomial &v);

/// Minimum of |a| + |b| + 2k over stored monomials. Throws ZeroElement.
int filtration_degree(const WeylElement &u);

/// Weyl-symmetric image of a commutative polynomial in x1..xn, y1..yn, h.
WeylElement symmetrize(int n, const Series &f);
/// Normal-ordered symbol: the commutative polynomial with the same table.
Series normal_symbol(const WeylElement &u);
Ring weyl_ring(int n); // x1..xn, y1..yn

/// Parses a literal over x1..xn, y1..yn, h, multiplying factors in the
/// written order (so "y1 x1" is x1 y1 + h).
WeylElement parse_weyl(const std::string &text, int n);
nlohmann::json to_json(const WeylElement &u);

/// Element of sp(2n) acting on span(x1..xn, y1..yn) by columns:
/// a(e_k) = sum_l a(l,k) e_l with e = (x1..xn, y1..yn).
class SpMatrix {
public:
    SpMatrix() = default;
    explicit SpMatrix(int n);
    SpMatrix(int n, std::vector<std::vector<Rational>> entries);
    /// Block form [[g, h], [c, -g^T]].
    static SpMatrix from_blocks(const std::vector<std::vector<Rational>> &g,
                                const std::vector<std::vector<Rational>> &h,
                                const std::vector<std::vector<Rational>> &c);

    int n() const { return n_; }
    const Rational &operator()(int row, int col) const { return m_[row][col]; }
    Rational &operator()(int row, int col) { return m_[row][col]; }
    /// a^T J + J a == 0 with J = [[0, I], [-I, 0]].
    bool is_symplectic() const;
    /// Stabilizer of span(y): upper-right block zero.
    bool is_parabolic() const;
    Rational trace_g() const;
    Rational trace_lower_right() const;
    /// Image of the generator e_k as a linear Weyl element.
    WeylElement apply(int k) const;

    friend SpMatrix operator*(const SpMatrix &a, const SpMatrix &b);
    friend SpMatrix operator-(const SpMatrix &a, const SpMatrix &b);
    bool operator==(const SpMatrix &) const = default;

private:
    int n_ = 0;
    std::vector<std::vector<Rational>> m_;
};

SpMatrix commutator(const SpMatrix &a, const SpMatrix &b);
WeylElement generator(int n, int k); // e_k

/// hbar^{-1} times the Weyl-symmetric quadratic Q_a with [sigma(a), w] = a(w).
WeylElement sigma_embed(const SpMatrix &a);
/// theta_D(a)(u) = [sigma(a), u].
WeylElement theta_D(const SpMatrix &a, const WeylElement &u);

} // namespace wq

#endif
