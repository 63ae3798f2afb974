#ifndef WQ_TESTS_GEN_HPP
#define WQ_TESTS_GEN_HPP

#include "wq/series.hpp"
#include "wq/weyl.hpp"

#include <random>

namespace wq::gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin() { return uniform(0, 1) == 1; }

    /// Small nonzero rationals with denominators up to 3.
    Rational rational()
    {
        int num = 0;
        while (num == 0)
            num = uniform(-4, 4);
        Rational q(num, uniform(1, 3));
        q.canonicalize();
        return q;
    }

    /// Random polynomial over `ring` with at most `terms` terms, nonnegative
    /// exponents, total degree in [min_deg, max_deg] and hbar power in [0, max_h].
    Series polynomial(const Ring &ring, int terms, int max_deg, int max_h, int min_deg = 0)
    {
        Series s(ring);
        for (int t = 0; t < terms; ++t) {
            Monomial m{std::vector<int>(ring.size(), 0), uniform(0, max_h)};
            int deg = uniform(min_deg, max_deg);
            for (int k = 0; k < deg && !ring.vars.empty(); ++k)
                m.exps[static_cast<std::size_t>(uniform(0, static_cast<int>(ring.size()) - 1))] += 1;
            s.add_term(m, rational());
        }
        return s;
    }

    /// Normal-ordered element with monomials of x/y-degree <= max_deg and
    /// hbar powers in [min_h, max_h].
    WeylElement weyl(int n, int terms, int max_deg, int min_h, int max_h)
    {
        WeylElement u(n, kUnbounded, std::min(0, min_h));
        for (int t = 0; t < terms; ++t) {
            WeylMonomial m{std::vector<int>(n, 0), std::vector<int>(n, 0), uniform(min_h, max_h)};
            int deg = uniform(0, max_deg);
            for (int k = 0; k < deg; ++k) {
                auto i = static_cast<std::size_t>(uniform(0, n - 1));
                (coin() ? m.a : m.b)[i] += 1;
            }
            u.add_term(m, rational());
        }
        return u;
    }

    /// [[g, h], [c, -g^T]] with h, c symmetric and entries in [-2, 2].
    SpMatrix sp(int n, bool parabolic = false)
    {
        using M = std::vector<std::vector<Rational>>;
        M g(n, std::vector<Rational>(n)), h = g, c = g;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                g[i][j] = uniform(-2, 2);
                if (j >= i) {
                    h[i][j] = h[j][i] = parabolic ? 0 : uniform(-2, 2);
                    c[i][j] = c[j][i] = uniform(-2, 2);
                }
            }
        return SpMatrix::from_blocks(g, h, c);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace wq::gen

#endif
