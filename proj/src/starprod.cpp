#include "wq/starprod.hpp"

#include "wq/linalg.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace wq {

namespace {

Ring merged_or_mismatch(const Ring &chart, const Ring &other)
{
    try {
        Ring r = merge_rings(chart, other);
        if (r.size() != chart.size())
            throw Error(ErrorKind::ChartMismatch, "function uses variables outside the chart");
        return r;
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::IncompatibleVariables)
            throw Error(ErrorKind::ChartMismatch, e.what());
        throw;
    }
}

class DerivativeCache {
public:
    DerivativeCache(const Series &f, const Ring &chart) : chart_(chart) { cache_.emplace(zero(), f); }

    const Series &get(const std::vector<int> &mu)
    {
        auto it = cache_.find(mu);
        if (it != cache_.end())
            return it->second;
        std::size_t i = 0;
        while (mu[i] == 0)
            ++i;
        std::vector<int> lower = mu;
        lower[i] -= 1;
        Series d = differentiate(get(lower), chart_.vars[i]);
        return cache_.emplace(mu, std::move(d)).first->second;
    }

private:
    const Ring &chart_;
    std::map<std::vector<int>, Series> cache_;

    std::vector<int> zero() const { return std::vector<int>(chart_.size(), 0); }
};

Series star_to(const StarProduct &s, const Series &f, const Series &g, int order)
{
    Ring ring = merged_or_mismatch(merged_or_mismatch(s.chart, f.ring()), g.ring());
    Series out = f.embed(ring) * g.embed(ring);
    for (int k = 1; k <= order && k <= s.order; ++k) {
        BidiffOp a = s.alpha(k);
        if (!a.is_zero())
            out += a.apply(f, g).shift_hbar(k);
    }
    return out.truncated(kUnbounded, order);
}

std::vector<int> unit(std::size_t n, std::size_t i)
{
    std::vector<int> v(n, 0);
    v[i] = 1;
    return v;
}

} // namespace

void BidiffOp::add(const std::vector<int> &left, const std::vector<int> &right, const Series &c)
{
    if (left.size() != chart_.size() || right.size() != chart_.size())
        throw Error(ErrorKind::ChartMismatch, "multi-index length differs from the chart");
    if (c.is_zero())
        return;
    Key key{left, right};
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(key, c.embed(merged_or_mismatch(chart_, c.ring())));
        return;
    }
    it->second += c.embed(merged_or_mismatch(chart_, c.ring()));
    if (it->second.is_zero())
        terms_.erase(it);
}

Series BidiffOp::apply(const Series &f, const Series &g) const
{
    Ring ring = merged_or_mismatch(chart_, f.ring());
    ring = merged_or_mismatch(ring, g.ring());
    Series fe = f.embed(ring), ge = g.embed(ring);
    DerivativeCache df(fe, ring), dg(ge, ring);
    Series out(ring, std::min(f.x_cap(), g.x_cap()), std::min(f.hbar_order(), g.hbar_order()),
               std::min({0, f.min_hbar(), g.min_hbar()}));
    for (const auto &[key, c] : terms_) {
        const Series &a = df.get(key.first);
        if (a.is_zero())
            continue;
        const Series &b = dg.get(key.second);
        if (b.is_zero())
            continue;
        out += c.embed(ring) * a * b;
    }
    return out;
}

BidiffOp BidiffOp::transposed() const
{
    BidiffOp out(chart_);
    for (const auto &[key, c] : terms_)
        out.add(key.second, key.first, c);
    return out;
}

BidiffOp &BidiffOp::operator+=(const BidiffOp &o)
{
    if (chart_.vars.empty())
        chart_ = o.chart_;
    for (const auto &[key, c] : o.terms_)
        add(key.first, key.second, c);
    return *this;
}

BidiffOp operator*(const Rational &c, const BidiffOp &op)
{
    BidiffOp out(op.chart_);
    if (c == 0)
        return out;
    for (const auto &[key, s] : op.terms_)
        out.add(key.first, key.second, s * c);
    return out;
}

BidiffOp operator*(const BidiffOp &a, const BidiffOp &b)
{
    BidiffOp out(a.chart_);
    for (const auto &[ka, ca] : a.terms_)
        for (const auto &[kb, cb] : b.terms_) {
            std::vector<int> l = ka.first, r = ka.second;
            for (std::size_t i = 0; i < l.size(); ++i) {
                l[i] += kb.first[i];
                r[i] += kb.second[i];
            }
            out.add(l, r, ca * cb);
        }
    return out;
}

bool BidiffOp::operator==(const BidiffOp &o) const
{
    if (terms_.size() != o.terms_.size())
        return false;
    for (const auto &[key, c] : terms_) {
        auto it = o.terms_.find(key);
        if (it == o.terms_.end() || !(c - it->second.embed(c.ring())).is_zero())
            return false;
    }
    return true;
}

BidiffOp poisson_bivector(const Ring &chart, const std::vector<std::string> &base,
                          const std::vector<std::string> &fiber)
{
    if (base.size() != fiber.size())
        throw Error(ErrorKind::ChartMismatch, "base and fiber coordinates must pair up");
    BidiffOp p(chart);
    Series one = Series::constant(chart, 1);
    for (std::size_t i = 0; i < base.size(); ++i) {
        int q = chart.index_of(base[i]), r = chart.index_of(fiber[i]);
        if (q < 0 || r < 0)
            throw Error(ErrorKind::ChartMismatch, "coordinate pair " + base[i] + "," + fiber[i] + " not in chart");
        auto uq = unit(chart.size(), static_cast<std::size_t>(q));
        auto ur = unit(chart.size(), static_cast<std::size_t>(r));
        p.add(uq, ur, one);
        p.add(ur, uq, -one);
    }
    return p;
}

BidiffOp StarProduct::alpha(int k) const
{
    if (k >= 1 && k <= static_cast<int>(alphas.size()))
        return alphas[static_cast<std::size_t>(k - 1)];
    return BidiffOp(chart);
}

bool StarProduct::weyl_normalized() const { return alpha(1) == Rational(1, 2) * poisson(); }

bool StarProduct::satisfies_commutator_axiom() const
{
    BidiffOp a = alpha(1);
    return a + Rational(-1) * a.transposed() == poisson();
}

Series StarProduct::antisymmetric_alpha2(const Series &a, const Series &b) const
{
    BidiffOp a2 = alpha(2);
    return a2.apply(a, b) - a2.apply(b, a);
}

StarProduct make_chart(const std::vector<std::string> &base, const std::vector<std::string> &fiber, int order)
{
    if (base.size() != fiber.size())
        throw Error(ErrorKind::ChartMismatch, "base and fiber coordinates must pair up");
    std::vector<std::string> vars = base;
    vars.insert(vars.end(), fiber.begin(), fiber.end());
    StarProduct s;
    s.chart = Ring(vars);
    s.base = base;
    s.fiber = fiber;
    s.order = order;
    s.alphas.assign(static_cast<std::size_t>(std::max(order, 0)), BidiffOp(s.chart));
    return s;
}

StarProduct moyal(int order, const std::vector<std::string> &base, const std::vector<std::string> &fiber)
{
    StarProduct s = make_chart(base, fiber, order);
    BidiffOp p = s.poisson();
    BidiffOp pk = p;
    Rational c(1, 2);
    for (int k = 1; k <= order; ++k) {
        s.alphas[static_cast<std::size_t>(k - 1)] = c * pk;
        pk = pk * p;
        c /= 2 * (k + 1);
    }
    return s;
}

Series star_apply(const StarProduct &s, const Series &f, const Series &g) { return star_to(s, f, g, s.order); }

Series assoc_defect(const StarProduct &s, const Series &f, const Series &g, const Series &h)
{
    return star_apply(s, star_apply(s, f, g), h) - star_apply(s, f, star_apply(s, g, h));
}

VectorField VectorField::zero(const Ring &ring) { return VectorField{ring, std::vector<Series>(ring.size(), Series(ring))}; }

Series VectorField::apply(const Series &f) const
{
    Ring r = merged_or_mismatch(ring, f.ring());
    Series fe = f.embed(r);
    Series out(r, fe.x_cap(), fe.hbar_order(), std::min(0, fe.min_hbar()));
    for (std::size_t i = 0; i < comps.size(); ++i)
        if (!comps[i].is_zero())
            out += comps[i].embed(r) * differentiate(fe, ring.vars[i]);
    return out;
}

bool VectorField::is_zero() const
{
    return std::all_of(comps.begin(), comps.end(), [](const Series &c) { return c.is_zero(); });
}

VectorField &VectorField::operator+=(const VectorField &o)
{
    if (comps.empty()) {
        *this = o;
        return *this;
    }
    if (o.ring.vars != ring.vars)
        throw Error(ErrorKind::ChartMismatch, "vector fields live on different charts");
    for (std::size_t i = 0; i < comps.size(); ++i)
        comps[i] += o.comps[i];
    return *this;
}

VectorField operator*(const Rational &c, const VectorField &v)
{
    VectorField out = v;
    for (auto &s : out.comps)
        s *= c;
    return out;
}

bool VectorField::operator==(const VectorField &o) const
{
    if (o.ring.vars != ring.vars)
        return false;
    for (std::size_t i = 0; i < comps.size(); ++i)
        if (!(comps[i] - o.comps[i]).is_zero())
            return false;
    return true;
}

std::string VectorField::str() const
{
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i].is_zero())
            continue;
        if (!first)
            os << " + ";
        os << "(" << comps[i].str() << ") d/d" << ring.vars[i];
        first = false;
    }
    return first ? "0" : os.str();
}

Series TransitionMap::pull(const Series &f) const { return substitute(f, coordinate_map).embed(target); }

Series TransitionMap::apply(const Series &f, int order) const
{
    Series p = pull(f);
    Series out = p;
    if (order >= 1 && !beta1.comps.empty())
        out += beta1.apply(p).shift_hbar(1);
    if (order >= 2 && !beta2.empty()) {
        DerivativeCache d(p, target);
        for (const auto &[mu, c] : beta2)
            out += (c.embed(target) * d.get(mu)).shift_hbar(2);
    }
    return out.truncated(kUnbounded, order);
}

Form canonical_form(const Ring &chart, const std::vector<std::string> &base, const std::vector<std::string> &fiber)
{
    Form w(chart, 2);
    for (std::size_t i = 0; i < base.size(); ++i)
        w.add_named({base[i], fiber[i]}, Series::constant(chart, 1));
    return w;
}

Beta1Solution solve_beta1(const StarProduct &src, const StarProduct &dst,
                          const std::map<std::string, Series> &coord_map, const Ring &target, int degree_bound)
{
    for (const auto &v : src.chart.vars)
        if (!coord_map.count(v))
            throw Error(ErrorKind::ChartMismatch, "no image for source coordinate " + v);
    if (coord_map.size() != src.chart.size())
        throw Error(ErrorKind::ChartMismatch, "coordinate map has images for unknown variables");
    {
        auto a = target.vars, b = dst.chart.vars;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b)
            throw Error(ErrorKind::ChartMismatch, "overlap ring does not carry the target chart coordinates");
    }
    if (!src.weyl_normalized() || !dst.weyl_normalized())
        throw Error(ErrorKind::NotWeylNormalized, "alpha_1 must equal P/2 on both charts");

    const auto &zs = src.chart.vars;
    std::vector<Series> F;
    for (const auto &z : zs)
        F.push_back(coord_map.at(z).embed(merged_or_mismatch(target, coord_map.at(z).ring())));

    BidiffOp ps = src.poisson(), pd = dst.poisson();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Series> rhs;
    for (std::size_t a = 0; a < zs.size(); ++a)
        for (std::size_t b = a + 1; b < zs.size(); ++b) {
            Series za = Series::variable(src.chart, zs[a]), zb = Series::variable(src.chart, zs[b]);
            Series lhs = pd.apply(F[a], F[b]);
            Series pulled = substitute(ps.apply(za, zb), coord_map).embed(target);
            if (!(lhs - pulled).is_zero())
                throw Error(ErrorKind::NotSymplectic,
                            "{" + zs[a] + "," + zs[b] + "} is not preserved: " + (lhs - pulled).str());
            Series r = dst.antisymmetric_alpha2(F[a], F[b]) -
                       substitute(src.antisymmetric_alpha2(za, zb), coord_map).embed(target);
            pairs.emplace_back(a, b);
            rhs.push_back(r);
        }

    // Laurent monomials: invertible exponents in [-B, B], others in [0, B], total degree <= B.
    std::vector<std::vector<int>> monos;
    std::vector<int> cur(target.size(), 0);
    auto enumerate = [&](auto &&self, std::size_t i, int deg) -> void {
        if (i == target.size()) {
            if (deg <= degree_bound)
                monos.push_back(cur);
            return;
        }
        int lo = target.invertible[i] ? -degree_bound : 0;
        for (int e = lo; e <= degree_bound; ++e) {
            cur[i] = e;
            self(self, i + 1, deg + e);
        }
        cur[i] = 0;
    };
    enumerate(enumerate, 0, 0);

    struct Unknown {
        std::size_t mono, axis;
    };
    std::vector<Unknown> unknowns;
    for (std::size_t m = 0; m < monos.size(); ++m)
        for (std::size_t k = 0; k < target.size(); ++k)
            unknowns.push_back({m, k});

    auto field_of = [&](const std::vector<Rational> &x) {
        VectorField v = VectorField::zero(target);
        for (std::size_t u = 0; u < unknowns.size(); ++u)
            if (x[u] != 0)
                v.comps[unknowns[u].axis].add_term(Monomial{monos[unknowns[u].mono], 0}, x[u]);
        return v;
    };

    using RowKey = std::tuple<std::size_t, std::vector<int>, int>;
    std::map<RowKey, SparseVec> rows;
    std::map<RowKey, Rational> rhs_rows;
    for (std::size_t p = 0; p < pairs.size(); ++p)
        for (const auto &[m, c] : rhs[p].terms()) {
            rows[{p, m.exps, m.hbar}];
            rhs_rows[{p, m.exps, m.hbar}] = c;
        }

    std::vector<Series> pf;
    for (const auto &[a, b] : pairs)
        pf.push_back(pd.apply(F[a], F[b]));
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
        VectorField k = VectorField::zero(target);
        k.comps[unknowns[u].axis] = Series::monomial(target, Monomial{monos[unknowns[u].mono], 0}, 1);
        std::vector<Series> kF;
        for (const auto &f : F)
            kF.push_back(k.apply(f));
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            auto [a, b] = pairs[p];
            Series l = k.apply(pf[p]) - pd.apply(kF[a], F[b]) - pd.apply(F[a], kF[b]);
            for (const auto &[m, c] : l.terms())
                rows[{p, m.exps, m.hbar}][static_cast<int>(u)] += c;
        }
    }

    std::vector<std::pair<SparseVec, Rational>> eqs;
    for (auto &[key, row] : rows) {
        for (auto it = row.begin(); it != row.end();)
            it = it->second == 0 ? row.erase(it) : std::next(it);
        auto r = rhs_rows.find(key);
        eqs.emplace_back(row, r == rhs_rows.end() ? Rational(0) : r->second);
    }
    LinearSolution sol = solve_linear(unknowns.size(), eqs);
    if (!sol.consistent)
        throw Error(ErrorKind::NoSolution, "the gluing equations have no solution in the degree bound " +
                                               std::to_string(degree_bound));

    Beta1Solution out;
    out.beta1 = field_of(sol.particular);
    out.unknowns = unknowns.size();
    out.equations = eqs.size();
    out.kernel_dim = sol.kernel.size();

    // Split the kernel by the logarithmic periods of i_k omega.
    Form omega = canonical_form(target, dst.base, dst.fiber);
    std::map<std::tuple<int, std::vector<int>, int>, int> labels;
    std::vector<SparseVec> residues;
    for (const auto &kv : sol.kernel) {
        VectorField k = field_of(kv);
        out.kernel.push_back(k);
        Form one = contract(k.comps, omega);
        std::vector<Series> g;
        for (std::size_t j = 0; j < target.size(); ++j)
            g.push_back(one.component({static_cast<int>(j)}).embed(target));
        PathIntegral pi = integrate_axes(g, target.vars);
        SparseVec r;
        for (const auto &[key, c] : pi.log_terms) {
            auto label = std::make_tuple(key.first, key.second.exps, key.second.hbar);
            auto it = labels.emplace(label, static_cast<int>(labels.size())).first;
            r[it->second] += c;
        }
        residues.push_back(r);
    }
    Echelon periods;
    for (std::size_t i = 0; i < residues.size(); ++i)
        if (periods.insert(residues[i]))
            out.period_directions.push_back(out.kernel[i]);
    std::vector<std::pair<SparseVec, Rational>> period_eqs;
    for (const auto &[label, idx] : labels) {
        SparseVec row;
        for (std::size_t i = 0; i < residues.size(); ++i) {
            auto it = residues[i].find(idx);
            if (it != residues[i].end() && it->second != 0)
                row[static_cast<int>(i)] = it->second;
        }
        period_eqs.emplace_back(row, Rational(0));
    }
    LinearSolution gauge = solve_linear(residues.size(), period_eqs);
    for (const auto &c : gauge.kernel) {
        VectorField v = VectorField::zero(target);
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] != 0)
                v += c[i] * out.kernel[i];
        out.gauge_kernel.push_back(v);
    }
    return out;
}

Series intertwining_defect(const StarProduct &src, const StarProduct &dst, const TransitionMap &t,
                           const Series &f, const Series &g)
{
    Series lhs = t.apply(star_to(src, f, g, 1), 1);
    Series rhs = star_to(dst, t.apply(f, 1), t.apply(g, 1), 1);
    return (lhs - rhs).truncated(kUnbounded, 1);
}

Series antisymmetric_defect2(const StarProduct &src, const StarProduct &dst, const TransitionMap &t,
                             const Series &f, const Series &g)
{
    auto defect = [&](const Series &a, const Series &b) {
        Series lhs = t.apply(star_to(src, a, b, 2), 2);
        Series rhs = star_to(dst, t.apply(a, 2), t.apply(b, 2), 2);
        return (lhs - rhs).hbar_coefficient(2);
    };
    return defect(f, g) - defect(g, f);
}

VectorField transport(const VectorField &v, const std::map<std::string, Series> &phi,
                      const std::map<std::string, Series> &psi, const Ring &target)
{
    VectorField out = VectorField::zero(target);
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto it = phi.find(target.vars[i]);
        if (it == phi.end())
            throw Error(ErrorKind::ChartMismatch, "no image for coordinate " + target.vars[i]);
        out.comps[i] = substitute(v.apply(it->second), psi).embed(target);
    }
    return out;
}

} // namespace wq
