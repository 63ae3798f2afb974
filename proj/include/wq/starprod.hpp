#ifndef WQ_STARPROD_HPP
#define WQ_STARPROD_HPP

#include "wq/forms.hpp"
#include "wq/series.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wq {

/// sum c_{mu,nu} d^mu f d^nu g over the chart variables.
class BidiffOp {
public:
    using Key = std::pair<std::vector<int>, std::vector<int>>;

    BidiffOp() = default;
    explicit BidiffOp(Ring chart) : chart_(std::move(chart)) {}

    const Ring &chart() const { return chart_; }
    const std::map<Key, Series> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add(const std::vector<int> &left, const std::vector<int> &right, const Series &c);
    Series apply(const Series &f, const Series &g) const;
    /// (f, g) -> op(g, f)
    BidiffOp transposed() const;

    BidiffOp &operator+=(const BidiffOp &o);
    friend BidiffOp operator+(BidiffOp a, const BidiffOp &b) { return a += b; }
    friend BidiffOp operator*(const Rational &c, const BidiffOp &op);
    /// Composition of constant-coefficient operators: multi-indices add.
    friend BidiffOp operator*(const BidiffOp &a, const BidiffOp &b);
    bool operator==(const BidiffOp &o) const;

private:
    Ring chart_;
    std::map<Key, Series> terms_;
};

/// P = sum_i d_{q_i} (x) d_{p_i} - d_{p_i} (x) d_{q_i}, so {q_i, p_i} = 1.
BidiffOp poisson_bivector(const Ring &chart, const std::vector<std::string> &base,
                          const std::vector<std::string> &fiber);

struct StarProduct {
    Ring chart; // base then fiber coordinates
    std::vector<std::string> base, fiber;
    int order = 2;
    std::vector<BidiffOp> alphas; // alphas[k-1] = alpha_k

    BidiffOp poisson() const { return poisson_bivector(chart, base, fiber); }
    /// alpha_k, or the zero operator past the stored order.
    BidiffOp alpha(int k) const;
    /// alpha_1 == P / 2 exactly.
    bool weyl_normalized() const;
    /// alpha_1(a, b) - alpha_1(b, a) == P(da, db).
    bool satisfies_commutator_axiom() const;
    /// alpha_2(a, b) - alpha_2(b, a), evaluated on functions.
    Series antisymmetric_alpha2(const Series &a, const Series &b) const;
};

StarProduct make_chart(const std::vector<std::string> &base, const std::vector<std::string> &fiber, int order);

/// Moyal product: alpha_k = (1/2)^k / k! P^k.
StarProduct moyal(int order, const std::vector<std::string> &base, const std::vector<std::string> &fiber);

/// fg + sum_k h^k alpha_k(f, g), valid to h^order.
Series star_apply(const StarProduct &s, const Series &f, const Series &g);
/// (f*g)*h - f*(g*h)
Series assoc_defect(const StarProduct &s, const Series &f, const Series &g, const Series &h);

struct VectorField {
    Ring ring;
    std::vector<Series> comps; // one per ring variable

    static VectorField zero(const Ring &ring);
    Series apply(const Series &f) const;
    bool is_zero() const;
    VectorField &operator+=(const VectorField &o);
    friend VectorField operator+(VectorField a, const VectorField &b) { return a += b; }
    friend VectorField operator*(const Rational &c, const VectorField &v);
    bool operator==(const VectorField &o) const;
    std::string str() const;
};

/// Functions on the source chart go to T(f) = phi*(f) + h beta1(phi*(f)) + h^2 beta2(phi*(f)),
/// where phi expresses the source coordinates in the target overlap ring.
struct TransitionMap {
    std::map<std::string, Series> coordinate_map;
    Ring target; // target chart coordinates with overlap-invertible flags
    VectorField beta1;
    std::map<std::vector<int>, Series> beta2; // unary differential operator, carried only

    Series pull(const Series &f) const;
    Series apply(const Series &f, int order) const;
};

struct Beta1Solution {
    VectorField beta1;
    std::size_t unknowns = 0;
    std::size_t equations = 0;
    std::size_t kernel_dim = 0;
    std::vector<VectorField> kernel;            // symplectic vector fields in the search space
    std::vector<VectorField> gauge_kernel;      // Hamiltonian part of the kernel
    std::vector<VectorField> period_directions; // kernel directions with logarithmic periods
};

/// Solves the first-order gluing equations for beta1 over Laurent monomial
/// vector fields with exponents bounded by `degree_bound`. Returns the basic
/// solution (free unknowns zero) together with the kernel.
Beta1Solution solve_beta1(const StarProduct &src, const StarProduct &dst,
                          const std::map<std::string, Series> &coord_map, const Ring &target,
                          int degree_bound = 3);

/// The hbar^0 and hbar^1 parts of T(f *_src g) - T(f) *_dst T(g).
Series intertwining_defect(const StarProduct &src, const StarProduct &dst, const TransitionMap &t,
                           const Series &f, const Series &g);
/// hbar^2 part of the same defect, antisymmetrized in (f, g).
Series antisymmetric_defect2(const StarProduct &src, const StarProduct &dst, const TransitionMap &t,
                             const Series &f, const Series &g);

/// The vector field beta of a transition expressed in the other chart's
/// coordinates: v'(z_a) = psi*(v(phi_a)).
VectorField transport(const VectorField &v, const std::map<std::string, Series> &phi,
                      const std::map<std::string, Series> &psi, const Ring &target);

/// sum_i dq_i ^ dp_i on the chart.
Form canonical_form(const Ring &chart, const std::vector<std::string> &base, const std::vector<std::string> &fiber);

} // namespace wq

#endif
