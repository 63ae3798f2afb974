#include "wq/cechdr.hpp"

#include "wq/linalg.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace wq {

namespace {

std::vector<std::vector<int>> laurent_monomials(const Ring &ring, int bound, bool laurent)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur(ring.size(), 0);
    auto rec = [&](auto &&self, std::size_t i, int deg) -> void {
        if (i == ring.size()) {
            if (deg <= bound)
                out.push_back(cur);
            return;
        }
        int lo = laurent && ring.invertible[i] ? -bound : 0;
        for (int e = lo; e <= bound; ++e) {
            cur[i] = e;
            self(self, i + 1, deg + e);
        }
        cur[i] = 0;
    };
    rec(rec, 0, 0);
    return out;
}

bool same(const Form &a, const Form &b) { return (a - b).is_zero(); }

std::string pair_name(const Atlas &atlas, int i, int j)
{
    return atlas.chart(i).name + "," + atlas.chart(j).name;
}

} // namespace

int Atlas::add_chart(const std::string &name, const std::vector<std::string> &coords)
{
    if (charts_.size() >= kMaxCharts)
        throw Error(ErrorKind::Unsupported, "at most " + std::to_string(kMaxCharts) + " charts");
    if (chart_index(name) >= 0)
        throw Error(ErrorKind::ChartMismatch, "duplicate chart " + name);
    charts_.push_back(Chart{name, coords});
    return static_cast<int>(charts_.size()) - 1;
}

int Atlas::chart_index(const std::string &name) const
{
    for (std::size_t i = 0; i < charts_.size(); ++i)
        if (charts_[i].name == name)
            return static_cast<int>(i);
    return -1;
}

void Atlas::add_overlap(int from, int to, Substitution map, const std::vector<std::string> &invertible)
{
    if (from == to || from < 0 || to < 0 || from >= static_cast<int>(size()) || to >= static_cast<int>(size()))
        throw Error(ErrorKind::ChartMismatch, "overlap between unknown charts");
    const Chart &src = chart(from), &dst = chart(to);
    for (const auto &v : invertible)
        if (std::find(dst.coords.begin(), dst.coords.end(), v) == dst.coords.end())
            throw Error(ErrorKind::ChartMismatch, "invertible variable " + v + " is not a coordinate of " + dst.name);
    invertible_[{from, to}] = invertible;
    Ring ring = ring_on(to, from);
    Substitution embedded;
    for (const auto &v : src.coords) {
        auto it = map.find(v);
        if (it == map.end())
            throw Error(ErrorKind::ChartMismatch, "no image for " + v + " on " + src.name + " -> " + dst.name);
        Ring merged = merge_rings(ring, it->second.ring());
        if (merged.size() != ring.size())
            throw Error(ErrorKind::ChartMismatch, "image of " + v + " uses variables outside " + dst.name);
        embedded.emplace(v, it->second.embed(ring));
    }
    if (map.size() != src.coords.size())
        throw Error(ErrorKind::ChartMismatch, "images given for unknown coordinates of " + src.name);
    maps_[{from, to}] = std::move(embedded);
}

const Substitution &Atlas::map(int i, int j) const
{
    auto it = maps_.find({i, j});
    if (it == maps_.end())
        throw Error(ErrorKind::ChartMismatch, "no overlap map " + std::to_string(i) + " -> " + std::to_string(j));
    return it->second;
}

std::vector<Pair> Atlas::pairs() const
{
    std::vector<Pair> out;
    for (int i = 0; i < static_cast<int>(size()); ++i)
        for (int j = i + 1; j < static_cast<int>(size()); ++j)
            if (has_overlap(i, j) || has_overlap(j, i))
                out.emplace_back(i, j);
    return out;
}

Ring Atlas::chart_ring(int i) const { return Ring(chart(i).coords); }

Ring Atlas::ring_on(int i, int j) const
{
    Ring r = chart_ring(i);
    auto it = invertible_.find({j, i});
    return it == invertible_.end() ? r : r.with_invertible(it->second);
}

Ring Atlas::ring_on(int i, int j, int k) const { return merge_rings(ring_on(i, j), ring_on(i, k)); }

Series Atlas::transport(const Series &f, int from, int to) const
{
    return substitute(f, map(from, to)).embed(ring_on(to, from));
}

Form Atlas::transport(const Form &w, int from, int to) const { return transport(w, from, to, ring_on(to, from)); }

Form Atlas::transport(const Form &w, int from, int to, const Ring &target) const
{
    Substitution images;
    for (const auto &[v, img] : map(from, to))
        images.emplace(v, img.embed(target));
    return pullback(w, target, images);
}

void Atlas::verify() const
{
    int n = static_cast<int>(size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !has_overlap(i, j))
                continue;
            if (!has_overlap(j, i))
                throw Error(ErrorKind::NotCocycle, "overlap " + pair_name(*this, i, j) + " has no inverse map");
            for (const auto &[v, img] : map(i, j)) {
                Series back = substitute(img, map(j, i)).embed(ring_on(i, j));
                if (!(back == Series::variable(ring_on(i, j), v)))
                    throw Error(ErrorKind::NotCocycle,
                                v + " does not return to itself through " + pair_name(*this, i, j) + ": " + back.str());
            }
            for (int k = 0; k < n; ++k) {
                if (k == i || k == j || !has_overlap(j, k) || !has_overlap(i, k))
                    continue;
                Ring triple = ring_on(k, i, j);
                Substitution jk;
                for (const auto &[v, img] : map(j, k))
                    jk.emplace(v, img.embed(triple));
                for (const auto &[v, img] : map(i, k)) {
                    Series via = substitute(map(i, j).at(v), jk).embed(triple);
                    if (!(via == img.embed(triple)))
                        throw Error(ErrorKind::NotCocycle, "maps " + chart(i).name + " -> " + chart(j).name + " -> " +
                                                               chart(k).name + " disagree on " + v);
                }
            }
        }
}

LineBundle LineBundle::trivial(const Atlas &atlas)
{
    LineBundle l;
    for (auto [i, j] : atlas.pairs())
        l.phi[{i, j}] = Series::constant(atlas.ring_on(i, j), 1);
    return l;
}

Series LineBundle::phi_at(const Atlas &atlas, int i, int j) const
{
    if (i < j) {
        auto it = phi.find({i, j});
        if (it == phi.end())
            throw Error(ErrorKind::NotCocycle, "no transition for " + pair_name(atlas, i, j));
        return it->second.embed(merge_rings(atlas.ring_on(i, j), it->second.ring()));
    }
    return inverse(atlas.transport(phi_at(atlas, j, i), j, i));
}

LineBundle LineBundle::tensor(const Atlas &atlas, const LineBundle &other) const
{
    LineBundle out;
    for (auto [i, j] : atlas.pairs())
        out.phi[{i, j}] = phi_at(atlas, i, j) * other.phi_at(atlas, i, j);
    return out;
}

LineBundle LineBundle::power(const Atlas &atlas, int k) const
{
    LineBundle out;
    for (auto [i, j] : atlas.pairs())
        out.phi[{i, j}] = wq::power(phi_at(atlas, i, j), k);
    return out;
}

void LineBundle::verify(const Atlas &atlas) const
{
    for (auto [i, j] : atlas.pairs()) {
        Series u = phi_at(atlas, i, j);
        try {
            (void)inverse(u);
        } catch (const Error &) {
            throw Error(ErrorKind::NotCocycle, "transition " + u.str() + " is not a unit on " + pair_name(atlas, i, j));
        }
    }
    int n = static_cast<int>(atlas.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                if (!atlas.has_overlap(i, j) || !atlas.has_overlap(j, k) || !atlas.has_overlap(i, k))
                    continue;
                Ring triple = atlas.ring_on(i, j, k);
                Substitution ji;
                for (const auto &[v, img] : atlas.map(j, i))
                    ji.emplace(v, img.embed(triple));
                Series lhs = phi_at(atlas, i, j).embed(triple) * substitute(phi_at(atlas, j, k), ji).embed(triple);
                if (!(lhs == phi_at(atlas, i, k).embed(triple)))
                    throw Error(ErrorKind::NotCocycle, "phi^{ij} phi^{jk} != phi^{ik} on the triple overlap");
            }
}

LineBundle canonical_bundle(const Atlas &atlas)
{
    LineBundle out;
    for (auto [i, j] : atlas.pairs()) {
        const Chart &ci = atlas.chart(i), &cj = atlas.chart(j);
        if (ci.coords.size() != cj.coords.size())
            throw Error(ErrorKind::ChartMismatch, "charts of different dimension");
        std::size_t d = ci.coords.size();
        std::vector<std::vector<Series>> jac(d, std::vector<Series>(d));
        for (std::size_t b = 0; b < d; ++b) {
            Series img = atlas.map(j, i).at(cj.coords[b]);
            for (std::size_t a = 0; a < d; ++a)
                jac[b][a] = differentiate(img, ci.coords[a]);
        }
        // Leibniz expansion; d <= 2 in practice.
        std::vector<std::size_t> perm(d);
        for (std::size_t k = 0; k < d; ++k)
            perm[k] = k;
        Series det(atlas.ring_on(i, j));
        do {
            int sign = 1;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a + 1; b < d; ++b)
                    if (perm[a] > perm[b])
                        sign = -sign;
            Series term = Series::constant(atlas.ring_on(i, j), sign);
            for (std::size_t b = 0; b < d; ++b)
                term = term * jac[b][perm[b]];
            det += term;
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.phi[{i, j}] = det;
    }
    return out;
}

CechClass CechClass::zero(const Atlas &atlas)
{
    CechClass c;
    for (int i = 0; i < static_cast<int>(atlas.size()); ++i)
        c.eta.emplace_back(atlas.chart_ring(i), 2);
    for (auto [i, j] : atlas.pairs())
        c.xi.emplace(Pair{i, j}, Form(atlas.ring_on(i, j), 1));
    return c;
}

Form CechClass::xi_at(const Atlas &atlas, int i, int j) const
{
    if (i < j) {
        auto it = xi.find({i, j});
        return it == xi.end() ? Form(atlas.ring_on(i, j), 1) : it->second;
    }
    return -atlas.transport(xi_at(atlas, j, i), j, i);
}

CechClass &CechClass::operator+=(const CechClass &o)
{
    if (eta.empty() && xi.empty())
        return *this = o;
    for (std::size_t i = 0; i < o.eta.size() && i < eta.size(); ++i)
        eta[i] += o.eta[i];
    for (const auto &[p, f] : o.xi) {
        auto it = xi.find(p);
        if (it == xi.end())
            xi.emplace(p, f);
        else
            it->second += f;
    }
    return *this;
}

CechClass operator*(const Rational &c, const CechClass &x)
{
    CechClass out = x;
    for (auto &e : out.eta)
        e = c * e;
    for (auto &[p, f] : out.xi)
        f = c * f;
    return out;
}

std::string CechClass::str(const Atlas &atlas) const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < eta.size(); ++i)
        os << "eta[" << atlas.chart(static_cast<int>(i)).name << "] = " << eta[i].str() << "\n";
    for (const auto &[p, f] : xi)
        os << "xi[" << pair_name(atlas, p.first, p.second) << "] = " << f.str() << "\n";
    return os.str();
}

void verify_class(const Atlas &atlas, const CechClass &c)
{
    int n = static_cast<int>(atlas.size());
    if (static_cast<int>(c.eta.size()) != n)
        throw Error(ErrorKind::NotAClass, "one eta per chart expected");
    for (int i = 0; i < n; ++i)
        if (!exterior_d(c.eta[static_cast<std::size_t>(i)]).is_zero())
            throw Error(ErrorKind::NotAClass, "eta on " + atlas.chart(i).name + " is not closed");
    for (auto [i, j] : atlas.pairs()) {
        Ring r = atlas.ring_on(i, j);
        Form lhs = c.eta[static_cast<std::size_t>(i)].embed(r) -
                   atlas.transport(c.eta[static_cast<std::size_t>(j)], j, i);
        Form dxi = exterior_d(c.xi_at(atlas, i, j).embed(r));
        if (!same(lhs, dxi))
            throw Error(ErrorKind::NotAClass, "eta^i - eta^j != d xi^{ij} on " + pair_name(atlas, i, j) + ": " +
                                                  (lhs - dxi).str());
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                if (!atlas.has_overlap(i, j) || !atlas.has_overlap(j, k) || !atlas.has_overlap(i, k))
                    continue;
                Ring triple = atlas.ring_on(i, j, k);
                Form sum = c.xi_at(atlas, i, j).embed(triple) +
                           atlas.transport(c.xi_at(atlas, j, k), j, i, triple) - c.xi_at(atlas, i, k).embed(triple);
                if (!sum.is_zero())
                    throw Error(ErrorKind::NotAClass, "xi fails the cocycle condition: " + sum.str());
            }
}

CechClass chern_class(const Atlas &atlas, const LineBundle &l)
{
    l.verify(atlas);
    CechClass c = CechClass::zero(atlas);
    for (auto [i, j] : atlas.pairs()) {
        Series u = l.phi_at(atlas, i, j);
        c.xi[{i, j}] = inverse(u) * Form::differential(u);
    }
    verify_class(atlas, c);
    return c;
}

Rational ReducedClass::scalar() const
{
    if (coords.empty())
        return 0;
    if (coords.size() > 1)
        throw Error(ErrorKind::Unsupported, "class has " + std::to_string(coords.size()) + " residual coordinates");
    return coords.begin()->second;
}

std::string ReducedClass::str() const
{
    if (coords.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto &[label, v] : coords) {
        os << (first ? "" : "; ") << label << ": " << v.get_str();
        first = false;
    }
    return os.str();
}

namespace {

/// Coordinate of a cochain: which component, which basis form, which monomial.
struct Label {
    int weight; // |coefficient degree + form degree|, larger first
    int kind;   // 0 eta, 1 xi
    int a, b;
    Form::Key key;
    std::vector<int> exps;

    auto tie() const { return std::tie(kind, a, b, key, exps); }
    bool operator<(const Label &o) const
    {
        if (weight != o.weight)
            return weight > o.weight;
        return tie() < o.tie();
    }
};

using Flat = std::map<Label, Rational>;

void flatten_form(Flat &out, const Form &w, int kind, int a, int b)
{
    for (const auto &[key, c] : w.components())
        for (const auto &[m, v] : c.terms()) {
            if (m.hbar != 0)
                throw Error(ErrorKind::Unsupported, "class components must not carry hbar");
            int weight = std::abs(m.degree() + static_cast<int>(key.size()));
            Label l{weight, kind, a, b, key, m.exps};
            Rational &slot = out[l];
            slot += v;
            if (slot == 0)
                out.erase(l);
        }
}

Flat flatten(const Atlas &atlas, const CechClass &c)
{
    Flat out;
    for (std::size_t i = 0; i < c.eta.size(); ++i)
        flatten_form(out, c.eta[i].embed(atlas.chart_ring(static_cast<int>(i))), 0, static_cast<int>(i), -1);
    for (auto [i, j] : atlas.pairs())
        flatten_form(out, c.xi_at(atlas, i, j).embed(atlas.ring_on(i, j)), 1, i, j);
    return out;
}

std::string label_name(const Atlas &atlas, const Label &l)
{
    Ring r = l.kind == 0 ? atlas.chart_ring(l.a) : atlas.ring_on(l.a, l.b);
    std::string name = l.kind == 0 ? "eta[" + atlas.chart(l.a).name + "]" : "xi[" + pair_name(atlas, l.a, l.b) + "]";
    std::string mono = Series::monomial(r, Monomial{l.exps, 0}, 1).str();
    if (mono != "1")
        name += " " + mono;
    for (std::size_t i = 0; i < l.key.size(); ++i)
        name += (i == 0 ? " d" : "^d") + r.vars[static_cast<std::size_t>(l.key[i])];
    return name;
}

} // namespace

ReducedClass class_reduce(const Atlas &atlas, const CechClass &c, ReduceOptions opts)
{
    verify_class(atlas, c);
    int n = static_cast<int>(atlas.size());
    int degree = opts.degree;
    if (degree < 0) {
        int span = 0;
        for (const auto &e : c.eta)
            span = std::max(span, e.coefficient_span());
        for (const auto &[p, f] : c.xi)
            span = std::max(span, f.coefficient_span());
        degree = span + 2;
    }
    if (opts.de_rham && n > 2)
        throw Error(ErrorKind::Unsupported, "de Rham reduction is implemented for at most two charts");

    std::vector<Flat> generators;
    for (int a = 0; a < n; ++a) {
        Ring r = atlas.chart_ring(a);
        for (const auto &exps : laurent_monomials(r, degree, false))
            for (std::size_t v = 0; v < r.size(); ++v) {
                Form theta(r, 1);
                theta.add({static_cast<int>(v)}, Series::monomial(r, Monomial{exps, 0}, 1));
                CechClass g = CechClass::zero(atlas);
                g.eta[static_cast<std::size_t>(a)] = exterior_d(theta);
                for (auto [i, j] : atlas.pairs()) {
                    if (a == i)
                        g.xi[{i, j}] += theta.embed(atlas.ring_on(i, j));
                    else if (a == j)
                        g.xi[{i, j}] -= atlas.transport(theta, j, i);
                }
                generators.push_back(flatten(atlas, g));
            }
    }
    if (opts.de_rham)
        for (auto [i, j] : atlas.pairs()) {
            Ring r = atlas.ring_on(i, j);
            for (const auto &exps : laurent_monomials(r, degree, true)) {
                CechClass g = CechClass::zero(atlas);
                g.xi[{i, j}] = Form::differential(Series::monomial(r, Monomial{exps, 0}, 1));
                generators.push_back(flatten(atlas, g));
            }
        }

    Flat input = flatten(atlas, c);
    std::set<Label> all;
    for (const auto &[l, v] : input)
        all.insert(l);
    for (const auto &g : generators)
        for (const auto &[l, v] : g)
            all.insert(l);
    std::map<Label, int> index;
    std::vector<Label> by_index;
    for (const auto &l : all) {
        index.emplace(l, static_cast<int>(by_index.size()));
        by_index.push_back(l);
    }
    auto to_vec = [&](const Flat &f) {
        SparseVec v;
        for (const auto &[l, x] : f)
            v[index.at(l)] = x;
        return v;
    };

    Echelon span;
    for (const auto &g : generators)
        span.insert(to_vec(g));
    SparseVec residual = span.reduce(to_vec(input));

    ReducedClass out;
    out.residual = CechClass::zero(atlas);
    for (const auto &[idx, v] : residual) {
        if (v == 0)
            continue;
        const Label &l = by_index[static_cast<std::size_t>(idx)];
        out.coords[label_name(atlas, l)] = v;
        Ring r = l.kind == 0 ? atlas.chart_ring(l.a) : atlas.ring_on(l.a, l.b);
        Form piece(r, static_cast<int>(l.key.size()));
        piece.add(l.key, Series::monomial(r, Monomial{l.exps, 0}, v));
        if (l.kind == 0)
            out.residual.eta[static_cast<std::size_t>(l.a)] += piece;
        else
            out.residual.xi[{l.a, l.b}] += piece;
    }
    return out;
}

Series restrict_to(const Series &f, const std::vector<std::string> &normals, const Ring &ring)
{
    Substitution zero;
    for (const auto &n : normals)
        if (f.ring().index_of(n) >= 0)
            zero.emplace(n, Series(ring));
    return substitute(f, zero).embed(ring);
}

Form restrict_to(const Form &w, const std::vector<std::string> &normals, const Ring &ring)
{
    Substitution zero;
    for (const auto &n : normals)
        if (w.ring().index_of(n) >= 0)
            zero.emplace(n, Series(ring));
    return pullback(w, ring, zero);
}

namespace {

std::vector<std::string> tangent_coords(const Chart &c, const std::vector<std::string> &normals)
{
    std::vector<std::string> out;
    for (const auto &v : c.coords)
        if (std::find(normals.begin(), normals.end(), v) == normals.end())
            out.push_back(v);
    return out;
}

Ring y_ring(const Ring &ambient, const std::vector<std::string> &normals)
{
    Ring r;
    for (std::size_t i = 0; i < ambient.size(); ++i)
        if (std::find(normals.begin(), normals.end(), ambient.vars[i]) == normals.end()) {
            r.vars.push_back(ambient.vars[i]);
            r.invertible.push_back(ambient.invertible[i]);
        }
    r.negative_floor = ambient.negative_floor;
    return r;
}

} // namespace

Atlas restrict_atlas(const Atlas &ambient, const std::vector<std::vector<std::string>> &normals)
{
    int n = static_cast<int>(ambient.size());
    if (static_cast<int>(normals.size()) != n)
        throw Error(ErrorKind::NotLagrangian, "one list of normal coordinates per chart expected");
    Atlas y;
    for (int i = 0; i < n; ++i) {
        for (const auto &v : normals[static_cast<std::size_t>(i)])
            if (ambient.chart_ring(i).index_of(v) < 0)
                throw Error(ErrorKind::NotLagrangian, v + " is not a coordinate of " + ambient.chart(i).name);
        y.add_chart(ambient.chart(i).name, tangent_coords(ambient.chart(i), normals[static_cast<std::size_t>(i)]));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !ambient.has_overlap(i, j))
                continue;
            const auto &nj = normals[static_cast<std::size_t>(j)];
            const auto &ni = normals[static_cast<std::size_t>(i)];
            Ring target = y_ring(ambient.ring_on(j, i), nj);
            Substitution m;
            for (const auto &[v, img] : ambient.map(i, j)) {
                Series r = restrict_to(img, nj, target);
                if (std::find(ni.begin(), ni.end(), v) != ni.end()) {
                    if (!r.is_zero())
                        throw Error(ErrorKind::NotLagrangian, "transition " + pair_name(ambient, i, j) +
                                                                  " does not preserve the ideal: " + v + " -> " +
                                                                  r.str() + " on Y");
                } else {
                    m.emplace(v, r);
                }
            }
            std::vector<std::string> inv;
            for (std::size_t k = 0; k < target.size(); ++k)
                if (target.invertible[k])
                    inv.push_back(target.vars[k]);
            y.add_overlap(i, j, m, inv);
        }
    return y;
}

VectorField reverse_beta(const Atlas &ambient, int i, int j, const VectorField &beta_ij)
{
    Ring ri = ambient.ring_on(i, j);
    return Rational(-1) * transport(beta_ij, ambient.map(i, j), ambient.map(j, i), ri);
}

namespace {

/// (i_{d/dn} omega) restricted to Y.
Form conormal_to_form(const Form &omega, const std::string &n, const std::vector<std::string> &normals,
                      const Ring &ambient, const Ring &y)
{
    Form w = omega.embed(merge_rings(ambient, omega.ring()));
    std::vector<Series> unit;
    for (const auto &v : w.ring().vars)
        unit.push_back(Series::constant(w.ring(), v == n ? 1 : 0));
    return restrict_to(contract(unit, w), normals, y);
}

/// Components of v indexed by the variables of `ring`, by name.
std::vector<Series> components_on(const VectorField &v, const Ring &ring)
{
    std::vector<Series> out;
    for (const auto &name : ring.vars) {
        int k = v.ring.index_of(name);
        out.push_back(k < 0 || v.comps.empty() ? Series(ring)
                                               : v.comps[static_cast<std::size_t>(k)].embed(
                                                     merge_rings(ring, v.comps[static_cast<std::size_t>(k)].ring())));
    }
    return out;
}

} // namespace

ObstructionResult obstruction_class(const ObstructionInput &in)
{
    const Atlas &x = in.ambient;
    int n = static_cast<int>(x.size());
    if (static_cast<int>(in.stars.size()) != n || static_cast<int>(in.omega.size()) != n ||
        static_cast<int>(in.normals.size()) != n)
        throw Error(ErrorKind::ChartMismatch, "one star product, symplectic form and normal list per chart expected");
    x.verify();
    ObstructionResult out;
    out.y_atlas = restrict_atlas(x, in.normals);
    const Atlas &y = out.y_atlas;
    out.cls = CechClass::zero(y);

    for (int i = 0; i < n; ++i) {
        auto si = static_cast<std::size_t>(i);
        const StarProduct &s = in.stars[si];
        const auto &ni = in.normals[si];
        Ring chart = x.chart_ring(i);
        {
            auto a = s.chart.vars, b = chart.vars;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b)
                throw Error(ErrorKind::ChartMismatch, "star product on " + x.chart(i).name + " uses other coordinates");
        }
        if (!s.weyl_normalized())
            throw Error(ErrorKind::NotWeylNormalized, "alpha_1 on " + x.chart(i).name + " is not P/2");
        if (!same(in.omega[si].embed(chart), canonical_form(chart, s.base, s.fiber)))
            throw Error(ErrorKind::NotSymplectic, "omega on " + x.chart(i).name + " is not inverse to the star bivector");
        if (2 * ni.size() != chart.size())
            throw Error(ErrorKind::NotLagrangian, "Y must have half the dimension on " + x.chart(i).name);
        Ring yr = y.chart_ring(i);
        if (!restrict_to(in.omega[si], ni, yr).is_zero())
            throw Error(ErrorKind::NotLagrangian, "omega does not vanish on Y in " + x.chart(i).name);

        Form eta(yr, 2);
        for (std::size_t k = 0; k < ni.size(); ++k)
            for (std::size_t l = k + 1; l < ni.size(); ++l) {
                Series a = s.antisymmetric_alpha2(Series::variable(s.chart, ni[k]), Series::variable(s.chart, ni[l]));
                Series coeff = restrict_to(a.embed(chart), ni, yr);
                if (coeff.is_zero())
                    continue;
                eta += coeff * wedge(conormal_to_form(in.omega[si], ni[k], ni, chart, yr),
                                     conormal_to_form(in.omega[si], ni[l], ni, chart, yr));
            }
        out.cls.eta[si] = eta;
    }

    for (auto [i, j] : y.pairs()) {
        VectorField beta;
        if (auto it = in.beta1.find({i, j}); it != in.beta1.end())
            beta = it->second;
        else if (auto jt = in.beta1.find({j, i}); jt != in.beta1.end())
            beta = reverse_beta(x, j, i, jt->second);
        else
            continue;
        // beta^{ij} acts on chart-j functions: its normal part lives on Y_j.
        const auto &nj = in.normals[static_cast<std::size_t>(j)];
        Ring amb = x.ring_on(j, i);
        Ring yr = y.ring_on(j, i);
        std::vector<Series> comps = components_on(beta, amb);
        Form xi_j(yr, 1);
        for (std::size_t k = 0; k < amb.size(); ++k) {
            if (std::find(nj.begin(), nj.end(), amb.vars[k]) == nj.end())
                continue;
            Series c = restrict_to(comps[k], nj, yr);
            if (!c.is_zero())
                xi_j += c * conormal_to_form(in.omega[static_cast<std::size_t>(j)], amb.vars[k], nj, amb, yr);
        }
        out.cls.xi[{i, j}] = y.transport(xi_j, j, i);
    }

    try {
        verify_class(y, out.cls);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::NotAClass)
            throw Error(ErrorKind::GluingDefect, e.what());
        throw;
    }
    return out;
}

ObstructionResult restrict_2form_class(const Atlas &ambient, const std::vector<std::vector<std::string>> &normals,
                                       const std::vector<Form> &w,
                                       const std::optional<std::map<Pair, Form>> &corrections, int degree)
{
    int n = static_cast<int>(ambient.size());
    if (static_cast<int>(w.size()) != n)
        throw Error(ErrorKind::ChartMismatch, "one 2-form per chart expected");
    ObstructionResult out;
    out.y_atlas = restrict_atlas(ambient, normals);
    const Atlas &y = out.y_atlas;
    out.cls = CechClass::zero(y);
    std::vector<Form> wa;
    for (int i = 0; i < n; ++i) {
        auto si = static_cast<std::size_t>(i);
        Form wi = w[si].embed(merge_rings(ambient.chart_ring(i), w[si].ring()));
        if (wi.degree() != 2)
            throw Error(ErrorKind::NotClosed, "expected a 2-form on " + ambient.chart(i).name);
        if (!exterior_d(wi).is_zero())
            throw Error(ErrorKind::NotClosed, "the 2-form on " + ambient.chart(i).name + " is not closed");
        wa.push_back(wi);
        out.cls.eta[si] = restrict_to(wi, normals[si], y.chart_ring(i));
    }
    for (auto [i, j] : y.pairs()) {
        const auto &ni = normals[static_cast<std::size_t>(i)];
        Ring yr = y.ring_on(i, j);
        if (corrections) {
            Ring amb = ambient.ring_on(i, j);
            auto it = corrections->find({i, j});
            Form lambda = it == corrections->end() ? Form(amb, 1) : it->second.embed(merge_rings(amb, it->second.ring()));
            Form gap = wa[static_cast<std::size_t>(i)].embed(amb) -
                       ambient.transport(wa[static_cast<std::size_t>(j)], j, i) - exterior_d(lambda);
            if (!gap.is_zero())
                throw Error(ErrorKind::NoPrimitive, "w^i - w^j != d lambda on " + pair_name(ambient, i, j) + ": " +
                                                        gap.str());
            out.cls.xi[{i, j}] = restrict_to(lambda, ni, yr);
            continue;
        }
        Form delta = out.cls.eta[static_cast<std::size_t>(i)].embed(yr) -
                     y.transport(out.cls.eta[static_cast<std::size_t>(j)], j, i);
        if (delta.is_zero())
            continue;
        auto monos = laurent_monomials(yr, degree, true);
        std::vector<Form> basis;
        std::map<std::tuple<Form::Key, std::vector<int>>, SparseVec> rows;
        std::map<std::tuple<Form::Key, std::vector<int>>, Rational> rhs;
        Form target_delta = delta.embed(yr);
        for (const auto &[key, c] : target_delta.components())
            for (const auto &[m, v] : c.terms()) {
                rows[{key, m.exps}];
                rhs[{key, m.exps}] = v;
            }
        for (const auto &exps : monos)
            for (std::size_t v = 0; v < yr.size(); ++v) {
                Form t(yr, 1);
                t.add({static_cast<int>(v)}, Series::monomial(yr, Monomial{exps, 0}, 1));
                int u = static_cast<int>(basis.size());
                basis.push_back(t);
                Form dt = exterior_d(t).embed(yr);
                for (const auto &[key, c] : dt.components())
                    for (const auto &[m, x] : c.terms())
                        rows[{key, m.exps}][u] += x;
            }
        std::vector<std::pair<SparseVec, Rational>> eqs;
        for (const auto &[k, row] : rows) {
            auto r = rhs.find(k);
            eqs.emplace_back(row, r == rhs.end() ? Rational(0) : r->second);
        }
        LinearSolution sol = solve_linear(basis.size(), eqs);
        if (!sol.consistent)
            throw Error(ErrorKind::NoPrimitive, "no overlap correction on " + pair_name(y, i, j) +
                                                    " within degree " + std::to_string(degree));
        Form xi(yr, 1);
        for (std::size_t u = 0; u < basis.size(); ++u)
            if (sol.particular[u] != 0)
                xi += sol.particular[u] * basis[u];
        out.cls.xi[{i, j}] = xi;
    }
    verify_class(y, out.cls);
    return out;
}

} // namespace wq
