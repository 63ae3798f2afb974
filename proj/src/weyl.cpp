#include "wq/weyl.hpp"

#include "wq/parse.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace wq {

int WeylMonomial::degree() const
{
    return std::accumulate(a.begin(), a.end(), 0) + std::accumulate(b.begin(), b.end(), 0) + 2 * k;
}

bool WeylMonomialLess::operator()(const WeylMonomial &u, const WeylMonomial &v) const
{
    int du = u.degree(), dv = v.degree();
    if (du != dv)
        return du < dv;
    if (u.a != v.a)
        return u.a > v.a;
    if (u.b != v.b)
        return u.b > v.b;
    return u.k < v.k;
}

WeylElement::WeylElement(int n, int hbar_order, int min_hbar) : n_(n), hbar_order_(hbar_order), min_hbar_(min_hbar)
{
    if (n < 0)
        throw Error(ErrorKind::RankMismatch, "negative rank");
    if (min_hbar < kMinHbarFloor)
        throw Error(ErrorKind::ValidityExhausted, "min hbar power below -2");
}

WeylElement WeylElement::constant(int n, const Rational &c)
{
    WeylElement u(n);
    u.add_term(WeylMonomial{std::vector<int>(n, 0), std::vector<int>(n, 0), 0}, c);
    return u;
}

WeylElement WeylElement::x(int n, int i)
{
    if (i < 1 || i > n)
        throw Error(ErrorKind::RankMismatch, "x" + std::to_string(i) + " outside rank " + std::to_string(n));
    WeylMonomial m{std::vector<int>(n, 0), std::vector<int>(n, 0), 0};
    m.a[static_cast<std::size_t>(i - 1)] = 1;
    WeylElement u(n);
    u.add_term(m, 1);
    return u;
}

WeylElement WeylElement::y(int n, int i)
{
    if (i < 1 || i > n)
        throw Error(ErrorKind::RankMismatch, "y" + std::to_string(i) + " outside rank " + std::to_string(n));
    WeylMonomial m{std::vector<int>(n, 0), std::vector<int>(n, 0), 0};
    m.b[static_cast<std::size_t>(i - 1)] = 1;
    WeylElement u(n);
    u.add_term(m, 1);
    return u;
}

WeylElement WeylElement::hbar(int n, int power)
{
    WeylElement u(n, kUnbounded, std::min(0, power));
    u.add_term(WeylMonomial{std::vector<int>(n, 0), std::vector<int>(n, 0), power}, 1);
    return u;
}

WeylElement WeylElement::from_series(int n, const Series &f)
{
    std::vector<int> where;
    for (const auto &v : f.vars()) {
        int i = 0;
        if (v.size() < 2 || v[0] != 'x' || (i = std::atoi(v.c_str() + 1)) < 1 || i > n ||
            v != "x" + std::to_string(i))
            throw Error(ErrorKind::RankMismatch, "module variable " + v + " is not one of x1..x" + std::to_string(n));
        where.push_back(i - 1);
    }
    WeylElement u(n, f.hbar_order(), f.min_hbar());
    for (const auto &[m, c] : f.terms()) {
        WeylMonomial w{std::vector<int>(n, 0), std::vector<int>(n, 0), m.hbar};
        for (std::size_t j = 0; j < where.size(); ++j) {
            if (m.exps[j] < 0)
                throw Error(ErrorKind::RankMismatch, "negative exponent in a Weyl element");
            w.a[static_cast<std::size_t>(where[j])] += m.exps[j];
        }
        u.add_term(w, c);
    }
    return u;
}

bool WeylElement::is_plain() const { return lowest_hbar() >= 0; }

int WeylElement::lowest_hbar() const
{
    int low = kUnbounded;
    for (const auto &[m, c] : terms_)
        low = std::min(low, m.k);
    return low;
}

Rational WeylElement::coefficient(const WeylMonomial &m) const
{
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

void WeylElement::add_term(const WeylMonomial &m, const Rational &c)
{
    if (c == 0)
        return;
    if (static_cast<int>(m.a.size()) != n_ || static_cast<int>(m.b.size()) != n_)
        throw Error(ErrorKind::RankMismatch, "monomial rank does not match element");
    if (m.k > hbar_order_)
        return;
    if (m.k < min_hbar_) {
        if (m.k < kMinHbarFloor)
            throw Error(ErrorKind::ValidityExhausted, "hbar power below -2");
        min_hbar_ = m.k;
    }
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

WeylElement WeylElement::truncated(int hbar_order) const
{
    WeylElement r(n_, std::min(hbar_order, hbar_order_), min_hbar_);
    for (const auto &[m, c] : terms_)
        r.add_term(m, c);
    return r;
}

WeylElement WeylElement::shift_hbar(int k) const
{
    WeylElement r(n_, shift_cap(hbar_order_, k), std::max(min_hbar_ + k, kMinHbarFloor));
    for (const auto &[m, c] : terms_)
        r.add_term(WeylMonomial{m.a, m.b, m.k + k}, c);
    return r;
}

WeylElement WeylElement::operator-() const
{
    WeylElement r = *this;
    for (auto &[m, c] : r.terms_)
        c = -c;
    return r;
}

WeylElement &WeylElement::operator+=(const WeylElement &o)
{
    if (o.n_ != n_)
        throw Error(ErrorKind::RankMismatch, "adding Weyl elements of different rank");
    int order = std::min(hbar_order_, o.hbar_order_);
    WeylElement r(n_, order, std::min(min_hbar_, o.min_hbar_));
    for (const auto &[m, c] : terms_)
        r.add_term(m, c);
    for (const auto &[m, c] : o.terms_)
        r.add_term(m, c);
    *this = std::move(r);
    return *this;
}

WeylElement &WeylElement::operator*=(const Rational &c)
{
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto &[m, v] : terms_)
        v *= c;
    return *this;
}

std::string WeylElement::str() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto &[m, c] : terms_) {
        Rational mag = abs(c);
        out << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
        first = false;
        std::vector<std::string> f;
        for (int i = 0; i < n_; ++i)
            if (int e = m.a[static_cast<std::size_t>(i)])
                f.push_back("x" + std::to_string(i + 1) + (e == 1 ? "" : "^" + std::to_string(e)));
        for (int i = 0; i < n_; ++i)
            if (int e = m.b[static_cast<std::size_t>(i)])
                f.push_back("y" + std::to_string(i + 1) + (e == 1 ? "" : "^" + std::to_string(e)));
        if (m.k != 0)
            f.push_back(std::string("h") + (m.k == 1 ? "" : "^" + std::to_string(m.k)));
        bool unit = mag == 1;
        if (!unit || f.empty())
            out << mag.get_str();
        for (std::size_t i = 0; i < f.size(); ++i)
            out << ((i == 0 && unit) ? "" : " ") << f[i];
    }
    return out.str();
}

WeylElement monomial_product(int n, const WeylMonomial &u, const WeylMonomial &v)
{
    WeylElement out(n, kUnbounded, kMinHbarFloor);
    WeylMonomial m{std::vector<int>(n, 0), std::vector<int>(n, 0), 0};
    // Contract k_i of the y_i in u with k_i of the x_i in v, pair by pair.
    auto rec = [&](auto &&self, int i, int total, Rational coeff) -> void {
        if (i == n) {
            m.k = u.k + v.k + total;
            out.add_term(m, coeff);
            return;
        }
        auto s = static_cast<std::size_t>(i);
        int top = std::min(u.b[s], v.a[s]);
        for (int k = 0; k <= top; ++k) {
            m.a[s] = u.a[s] + v.a[s] - k;
            m.b[s] = u.b[s] + v.b[s] - k;
            self(self, i + 1, total + k, coeff * binomial(u.b[s], k) * binomial(v.a[s], k) * factorial(k));
        }
    };
    rec(rec, 0, 0, Rational(1));
    return out;
}

namespace {

WeylElement raw_product(const WeylElement &u, const WeylElement &v, int order)
{
    WeylElement out(u.n(), kUnbounded, kMinHbarFloor);
    for (const auto &[mu, cu] : u.terms())
        for (const auto &[mv, cv] : v.terms()) {
            if (mu.k + mv.k > order)
                continue;
            out += monomial_product(u.n(), mu, mv) * (cu * cv);
        }
    return out;
}

void same_rank(const WeylElement &u, const WeylElement &v)
{
    if (u.n() != v.n())
        throw Error(ErrorKind::RankMismatch,
                    "rank " + std::to_string(u.n()) + " vs rank " + std::to_string(v.n()));
}

WeylElement finish(const WeylElement &raw, int order, int min_h)
{
    WeylElement r(raw.n(), order, std::max(min_h, kMinHbarFloor));
    for (const auto &[m, c] : raw.terms())
        r.add_term(m, c);
    return r;
}

} // namespace

WeylElement weyl_mul(const WeylElement &u, const WeylElement &v)
{
    same_rank(u, v);
    int order = std::min(shift_cap(u.hbar_order(), std::min(0, v.lowest_hbar())),
                         shift_cap(v.hbar_order(), std::min(0, u.lowest_hbar())));
    return finish(raw_product(u, v, order), order, std::min(0, u.lowest_hbar()) + std::min(0, v.lowest_hbar()));
}

WeylElement weyl_bracket(const WeylElement &u, const WeylElement &v)
{
    same_rank(u, v);
    // [D, D] lies in hbar D, so an unknown tail loses one order less than in a product.
    int order = std::min(shift_cap(u.hbar_order(), std::min(0, v.lowest_hbar()) + 1),
                         shift_cap(v.hbar_order(), std::min(0, u.lowest_hbar()) + 1));
    int min_h = std::min(0, u.lowest_hbar()) + std::min(0, v.lowest_hbar()) + 1;
    // Brackets land in h^-1 D; a result not known even at h^-1 carries no information.
    int floor = std::max(min_h, -1);
    if (order < floor)
        throw Error(ErrorKind::ValidityExhausted, "bracket valid only to h^" + std::to_string(order) +
                                                      ", below h^" + std::to_string(floor));
    return finish(raw_product(u, v, order) - raw_product(v, u, order), order, min_h);
}

int filtration_degree(const WeylElement &u)
{
    if (u.is_zero())
        throw Error(ErrorKind::ZeroElement, "filtration degree of zero");
    int d = kUnbounded;
    for (const auto &[m, c] : u.terms())
        d = std::min(d, m.degree());
    return d;
}

Ring weyl_ring(int n)
{
    std::vector<std::string> vars;
    for (int i = 1; i <= n; ++i)
        vars.push_back("x" + std::to_string(i));
    for (int i = 1; i <= n; ++i)
        vars.push_back("y" + std::to_string(i));
    return Ring(vars);
}

WeylElement symmetrize(int n, const Series &f)
{
    Ring ring = weyl_ring(n);
    Series g = f.embed(ring);
    WeylElement out(n, g.hbar_order(), std::min(0, g.min_hbar()));
    for (const auto &[m, c] : g.terms()) {
        WeylElement term = WeylElement::hbar(n, m.hbar) * c;
        for (int i = 0; i < n; ++i) {
            int a = m.exps[static_cast<std::size_t>(i)];
            int b = m.exps[static_cast<std::size_t>(n + i)];
            // Sym(x^a y^b) = 2^-a sum_j C(a,j) x^j y^b x^(a-j).
            WeylElement yb = WeylElement::constant(n, 1);
            for (int e = 0; e < b; ++e)
                yb = weyl_mul(yb, WeylElement::y(n, i + 1));
            std::vector<WeylElement> xp{WeylElement::constant(n, 1)};
            for (int e = 0; e < a; ++e)
                xp.push_back(weyl_mul(xp.back(), WeylElement::x(n, i + 1)));
            WeylElement sym(n);
            for (int j = 0; j <= a; ++j)
                sym += weyl_mul(weyl_mul(xp[static_cast<std::size_t>(j)], yb), xp[static_cast<std::size_t>(a - j)]) *
                       binomial(a, j);
            sym *= Rational(1) / Rational(Integer(1) << a);
            term = weyl_mul(term, sym);
        }
        out += term;
    }
    return out;
}

Series normal_symbol(const WeylElement &u)
{
    Ring ring = weyl_ring(u.n());
    Series s(ring, kUnbounded, u.hbar_order(), std::min(0, u.min_hbar()));
    for (const auto &[m, c] : u.terms()) {
        Monomial mono{m.a, m.k};
        mono.exps.insert(mono.exps.end(), m.b.begin(), m.b.end());
        s.add_term(mono, c);
    }
    return s;
}

WeylElement parse_weyl(const std::string &text, int n)
{
    WeylElement out(n, kUnbounded, kMinHbarFloor);
    for (const auto &t : parse_literal(text)) {
        WeylElement term = WeylElement::constant(n, t.coeff);
        for (const auto &[name, power] : t.factors) {
            if (name == "h") {
                term = weyl_mul(term, WeylElement::hbar(n, power));
                continue;
            }
            int i = 0;
            bool ok = name.size() >= 2 && (name[0] == 'x' || name[0] == 'y') &&
                      (i = std::atoi(name.c_str() + 1)) >= 1 && name == name.substr(0, 1) + std::to_string(i);
            if (!ok)
                throw Error(ErrorKind::UnknownVariable, name);
            if (i > n)
                throw Error(ErrorKind::RankMismatch, name + " outside rank " + std::to_string(n));
            if (power < 0)
                throw Error(ErrorKind::Parse, "negative power of " + name);
            WeylElement g = name[0] == 'x' ? WeylElement::x(n, i) : WeylElement::y(n, i);
            for (int e = 0; e < power; ++e)
                term = weyl_mul(term, g);
        }
        out += term;
    }
    return finish(out, kUnbounded, std::min(0, out.lowest_hbar()));
}

nlohmann::json to_json(const WeylElement &u)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[m, c] : u.terms())
        terms.push_back({m.a, m.b, m.k, to_json(Integer(c.get_num())), to_json(Integer(c.get_den()))});
    return {{"n", u.n()},
            {"hbar_order", u.hbar_order() >= kUnbounded ? nlohmann::json() : nlohmann::json(u.hbar_order())},
            {"terms", terms}};
}

SpMatrix::SpMatrix(int n) : n_(n), m_(static_cast<std::size_t>(2 * n), std::vector<Rational>(static_cast<std::size_t>(2 * n)))
{
}

SpMatrix::SpMatrix(int n, std::vector<std::vector<Rational>> entries) : n_(n), m_(std::move(entries))
{
    if (static_cast<int>(m_.size()) != 2 * n)
        throw Error(ErrorKind::RankMismatch, "matrix is not 2n x 2n");
    for (const auto &row : m_)
        if (static_cast<int>(row.size()) != 2 * n)
            throw Error(ErrorKind::RankMismatch, "matrix is not 2n x 2n");
}

SpMatrix SpMatrix::from_blocks(const std::vector<std::vector<Rational>> &g, const std::vector<std::vector<Rational>> &h,
                               const std::vector<std::vector<Rational>> &c)
{
    int n = static_cast<int>(g.size());
    SpMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            a(i, j) = g.at(si).at(sj);
            a(i, n + j) = h.at(si).at(sj);
            a(n + i, j) = c.at(si).at(sj);
            a(n + i, n + j) = -g.at(sj).at(si);
        }
    return a;
}

bool SpMatrix::is_symplectic() const
{
    // (a^T J)_{kl} = sum_m a_{mk} J_{ml},  (J a)_{kl} = sum_m J_{km} a_{ml}.
    auto J = [this](int r, int c) -> int {
        if (r < n_ && c == r + n_)
            return 1;
        if (r >= n_ && c == r - n_)
            return -1;
        return 0;
    };
    for (int k = 0; k < 2 * n_; ++k)
        for (int l = 0; l < 2 * n_; ++l) {
            Rational s = 0;
            for (int m = 0; m < 2 * n_; ++m)
                s += m_[m][k] * J(m, l) + J(k, m) * m_[m][l];
            if (s != 0)
                return false;
        }
    return true;
}

bool SpMatrix::is_parabolic() const
{
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (m_[i][n_ + j] != 0)
                return false;
    return true;
}

Rational SpMatrix::trace_g() const
{
    Rational t = 0;
    for (int i = 0; i < n_; ++i)
        t += m_[i][i];
    return t;
}

Rational SpMatrix::trace_lower_right() const
{
    Rational t = 0;
    for (int i = n_; i < 2 * n_; ++i)
        t += m_[i][i];
    return t;
}

WeylElement generator(int n, int k) { return k < n ? WeylElement::x(n, k + 1) : WeylElement::y(n, k - n + 1); }

WeylElement SpMatrix::apply(int k) const
{
    WeylElement out(n_);
    for (int l = 0; l < 2 * n_; ++l)
        if (m_[l][k] != 0)
            out += generator(n_, l) * m_[l][k];
    return out;
}

SpMatrix operator*(const SpMatrix &a, const SpMatrix &b)
{
    if (a.n_ != b.n_)
        throw Error(ErrorKind::RankMismatch, "matrix ranks differ");
    SpMatrix c(a.n_);
    for (int i = 0; i < 2 * a.n_; ++i)
        for (int j = 0; j < 2 * a.n_; ++j)
            for (int k = 0; k < 2 * a.n_; ++k)
                c.m_[i][j] += a.m_[i][k] * b.m_[k][j];
    return c;
}

SpMatrix operator-(const SpMatrix &a, const SpMatrix &b)
{
    if (a.n_ != b.n_)
        throw Error(ErrorKind::RankMismatch, "matrix ranks differ");
    SpMatrix c = a;
    for (int i = 0; i < 2 * a.n_; ++i)
        for (int j = 0; j < 2 * a.n_; ++j)
            c.m_[i][j] -= b.m_[i][j];
    return c;
}

SpMatrix commutator(const SpMatrix &a, const SpMatrix &b) { return a * b - b * a; }

WeylElement sigma_embed(const SpMatrix &a)
{
    if (!a.is_symplectic())
        throw Error(ErrorKind::NotSymplectic, "matrix violates a^T J + J a = 0");
    int n = a.n();
    // [e_k, e_l] = h C_{kl} with C = [[0, -I], [I, 0]]; S = -a C is symmetric.
    auto C = [n](int r, int c) -> int {
        if (r < n && c == r + n)
            return -1;
        if (r >= n && c == r - n)
            return 1;
        return 0;
    };
    WeylElement q(n);
    for (int k = 0; k < 2 * n; ++k)
        for (int l = 0; l < 2 * n; ++l) {
            Rational s = 0;
            for (int m = 0; m < 2 * n; ++m)
                s -= a(k, m) * C(m, l);
            if (s != 0)
                q += weyl_mul(generator(n, k), generator(n, l)) * (s / 2);
        }
    return q.shift_hbar(-1);
}

WeylElement theta_D(const SpMatrix &a, const WeylElement &u) { return weyl_bracket(sigma_embed(a), u); }

} // namespace wq
