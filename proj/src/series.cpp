#include "wq/series.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace wq {

const char *to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::IncompatibleVariables: return "IncompatibleVariables";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NoPrimitive: return "NoPrimitive";
    case ErrorKind::NonNilpotentConstantTerm: return "NonNilpotentConstantTerm";
    case ErrorKind::NonInvertibleImage: return "NonInvertibleImage";
    case ErrorKind::NegativeFloor: return "NegativeFloor";
    case ErrorKind::CapRequired: return "CapRequired";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::ValidityExhausted: return "ValidityExhausted";
    case ErrorKind::NotSymplectic: return "NotSymplectic";
    case ErrorKind::ZeroElement: return "ZeroElement";
    case ErrorKind::IllDefinedAction: return "IllDefinedAction";
    case ErrorKind::NotParabolic: return "NotParabolic";
    case ErrorKind::NotIntegrable: return "NotIntegrable";
    case ErrorKind::ChartMismatch: return "ChartMismatch";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::NotWeylNormalized: return "NotWeylNormalized";
    case ErrorKind::NotCocycle: return "NotCocycle";
    case ErrorKind::NotAClass: return "NotAClass";
    case ErrorKind::NotLagrangian: return "NotLagrangian";
    case ErrorKind::GluingDefect: return "GluingDefect";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::MissingData: return "MissingData";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    }
    return "Unknown";
}

int Monomial::degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }

bool MonomialLess::operator()(const Monomial &a, const Monomial &b) const
{
    int da = a.degree(), db = b.degree();
    if (da != db)
        return da < db;
    if (a.exps != b.exps)
        return a.exps > b.exps;
    return a.hbar < b.hbar;
}

Ring::Ring(std::vector<std::string> v, std::vector<bool> inv, int floor)
    : vars(std::move(v)), invertible(std::move(inv)), negative_floor(floor)
{
    if (invertible.empty())
        invertible.assign(vars.size(), false);
    if (invertible.size() != vars.size())
        throw Error(ErrorKind::IncompatibleVariables, "invertible flags do not match variable list");
    std::set<std::string> seen(vars.begin(), vars.end());
    if (seen.size() != vars.size())
        throw Error(ErrorKind::IncompatibleVariables, "duplicate variable name");
    if (seen.count("h"))
        throw Error(ErrorKind::IncompatibleVariables, "'h' is reserved for hbar");
}

int Ring::index_of(const std::string &name) const
{
    auto it = std::find(vars.begin(), vars.end(), name);
    return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

bool Ring::is_invertible(const std::string &name) const
{
    int i = index_of(name);
    return i >= 0 && invertible[static_cast<std::size_t>(i)];
}

Ring Ring::with_invertible(const std::vector<std::string> &names) const
{
    Ring r = *this;
    for (const auto &n : names) {
        int i = index_of(n);
        if (i < 0)
            throw Error(ErrorKind::UnknownVariable, n);
        r.invertible[static_cast<std::size_t>(i)] = true;
    }
    return r;
}

namespace {

bool contains_all(const Ring &big, const Ring &small)
{
    return std::all_of(small.vars.begin(), small.vars.end(),
                       [&](const std::string &v) { return big.index_of(v) >= 0; });
}

Ring absorb_flags(Ring base, const Ring &other)
{
    for (std::size_t i = 0; i < other.vars.size(); ++i)
        if (other.invertible[i])
            base.invertible[static_cast<std::size_t>(base.index_of(other.vars[i]))] = true;
    base.negative_floor = std::min(base.negative_floor, other.negative_floor);
    return base;
}

} // namespace

Ring merge_rings(const Ring &a, const Ring &b)
{
    if (contains_all(a, b))
        return absorb_flags(a, b);
    if (contains_all(b, a))
        return absorb_flags(b, a);
    throw Error(ErrorKind::IncompatibleVariables, "variable lists do not embed into one another");
}

Series::Series(Ring ring, int x_cap, int hbar_order, int min_hbar)
    : ring_(std::move(ring)), x_cap_(x_cap), hbar_order_(hbar_order), min_hbar_(min_hbar)
{
    if (min_hbar_ < kMinHbarFloor)
        throw Error(ErrorKind::ValidityExhausted, "min hbar power below -2");
}

Series Series::constant(const Ring &ring, const Rational &c)
{
    Series s(ring);
    s.add_term(Monomial{std::vector<int>(ring.size(), 0), 0}, c);
    return s;
}

Series Series::variable(const Ring &ring, const std::string &name)
{
    int i = ring.index_of(name);
    if (i < 0)
        throw Error(ErrorKind::UnknownVariable, name);
    Monomial m{std::vector<int>(ring.size(), 0), 0};
    m.exps[static_cast<std::size_t>(i)] = 1;
    Series s(ring);
    s.add_term(m, 1);
    return s;
}

Series Series::hbar(const Ring &ring, int power)
{
    Series s(ring, kUnbounded, kUnbounded, std::min(0, power));
    s.add_term(Monomial{std::vector<int>(ring.size(), 0), power}, 1);
    return s;
}

Series Series::monomial(const Ring &ring, const Monomial &m, const Rational &c)
{
    Series s(ring, kUnbounded, kUnbounded, std::min(0, m.hbar));
    s.add_term(m, c);
    return s;
}

Rational Series::coefficient(const Monomial &m) const
{
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

Rational Series::constant_term() const
{
    return coefficient(Monomial{std::vector<int>(ring_.size(), 0), 0});
}

int Series::lowest_hbar() const
{
    int low = kUnbounded;
    for (const auto &[m, c] : terms_)
        low = std::min(low, m.hbar);
    return low;
}

int Series::lowest_degree() const
{
    return terms_.empty() ? kUnbounded : terms_.begin()->first.degree();
}

int Series::highest_degree() const
{
    return terms_.empty() ? -kUnbounded : terms_.rbegin()->first.degree();
}

void Series::check_monomial(const Monomial &m) const
{
    if (m.exps.size() != ring_.size())
        throw Error(ErrorKind::IncompatibleVariables, "monomial arity does not match ring");
    for (std::size_t i = 0; i < m.exps.size(); ++i) {
        if (m.exps[i] >= 0)
            continue;
        if (!ring_.invertible[i])
            throw Error(ErrorKind::NonInvertibleImage,
                        "negative exponent on non-invertible variable " + ring_.vars[i]);
        if (m.exps[i] < ring_.negative_floor)
            throw Error(ErrorKind::NegativeFloor, "exponent of " + ring_.vars[i] + " below floor " +
                                                      std::to_string(ring_.negative_floor));
    }
}

void Series::add_term(const Monomial &m, const Rational &c)
{
    if (c == 0)
        return;
    check_monomial(m);
    if (m.degree() > x_cap_ || m.hbar > hbar_order_)
        return;
    if (m.hbar < min_hbar_) {
        if (m.hbar < kMinHbarFloor)
            throw Error(ErrorKind::ValidityExhausted, "hbar power below -2");
        min_hbar_ = m.hbar;
    }
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

Series Series::truncated(int x_cap, int hbar_order) const
{
    Series r(ring_, std::min(x_cap, x_cap_), std::min(hbar_order, hbar_order_), min_hbar_);
    for (const auto &[m, c] : terms_)
        r.add_term(m, c);
    return r;
}

Series Series::with_min_hbar(int min_hbar) const
{
    Series r = *this;
    if (min_hbar < kMinHbarFloor || min_hbar > lowest_hbar())
        throw Error(ErrorKind::ValidityExhausted, "invalid min hbar power");
    r.min_hbar_ = min_hbar;
    return r;
}

Series Series::embed(const Ring &target) const
{
    if (target == ring_)
        return *this;
    std::vector<int> where(ring_.size());
    for (std::size_t i = 0; i < ring_.size(); ++i) {
        where[i] = target.index_of(ring_.vars[i]);
        if (where[i] < 0)
            throw Error(ErrorKind::IncompatibleVariables, "variable " + ring_.vars[i] + " missing in target ring");
    }
    Series r(target, x_cap_, hbar_order_, min_hbar_);
    for (const auto &[m, c] : terms_) {
        Monomial t{std::vector<int>(target.size(), 0), m.hbar};
        for (std::size_t i = 0; i < m.exps.size(); ++i)
            t.exps[static_cast<std::size_t>(where[i])] = m.exps[i];
        r.add_term(t, c);
    }
    return r;
}

Series Series::hbar_coefficient(int k) const
{
    if (k > hbar_order_)
        throw Error(ErrorKind::ValidityExhausted, "coefficient of h^" + std::to_string(k) + " is beyond validity");
    Series r(ring_, x_cap_, kUnbounded, 0);
    for (const auto &[m, c] : terms_)
        if (m.hbar == k)
            r.add_term(Monomial{m.exps, 0}, c);
    return r;
}

Series Series::shift_hbar(int k) const
{
    int min_h = min_hbar_ + k;
    if (min_h < kMinHbarFloor) {
        if (lowest_hbar() + k < kMinHbarFloor)
            throw Error(ErrorKind::ValidityExhausted, "dividing by hbar below h^-2");
        min_h = kMinHbarFloor;
    }
    Series r(ring_, x_cap_, shift_cap(hbar_order_, k), min_h);
    for (const auto &[m, c] : terms_)
        r.add_term(Monomial{m.exps, m.hbar + k}, c);
    return r;
}

Series Series::operator-() const
{
    Series r = *this;
    for (auto &[m, c] : r.terms_)
        c = -c;
    return r;
}

Series &Series::operator+=(const Series &other)
{
    Ring ring = merge_rings(ring_, other.ring_);
    Series lhs = embed(ring);
    Series rhs = other.embed(ring);
    Series r(ring, std::min(lhs.x_cap_, rhs.x_cap_), std::min(lhs.hbar_order_, rhs.hbar_order_),
             std::min(lhs.min_hbar_, rhs.min_hbar_));
    for (const auto &[m, c] : lhs.terms_)
        r.add_term(m, c);
    for (const auto &[m, c] : rhs.terms_)
        r.add_term(m, c);
    *this = std::move(r);
    return *this;
}

Series &Series::operator-=(const Series &other) { return *this += -other; }

Series &Series::operator*=(const Rational &c)
{
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto &[m, v] : terms_)
        v *= c;
    return *this;
}

Series operator*(const Series &a, const Series &b)
{
    Ring ring = merge_rings(a.ring_, b.ring_);
    Series lhs = a.embed(ring);
    Series rhs = b.embed(ring);
    // Unknown tails multiply the other factor's lowest terms.
    int x_cap = std::min(shift_cap(lhs.x_cap_, std::min(0, rhs.lowest_degree())),
                         shift_cap(rhs.x_cap_, std::min(0, lhs.lowest_degree())));
    int order = std::min(shift_cap(lhs.hbar_order_, std::min(0, rhs.lowest_hbar())),
                         shift_cap(rhs.hbar_order_, std::min(0, lhs.lowest_hbar())));
    int min_h = std::max(lhs.min_hbar_ + rhs.min_hbar_, kMinHbarFloor);
    Series r(ring, x_cap, order, min_h);
    Monomial m{std::vector<int>(ring.size(), 0), 0};
    for (const auto &[ma, ca] : lhs.terms_) {
        for (const auto &[mb, cb] : rhs.terms_) {
            m.hbar = ma.hbar + mb.hbar;
            if (m.hbar > order)
                continue;
            for (std::size_t i = 0; i < m.exps.size(); ++i)
                m.exps[i] = ma.exps[i] + mb.exps[i];
            if (m.degree() > x_cap)
                continue;
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

bool Series::operator==(const Series &other) const
{
    return ring_.vars == other.ring_.vars && terms_ == other.terms_;
}

std::string Series::str() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto &[m, c] : terms_) {
        Rational mag = abs(c);
        if (first)
            out << (c < 0 ? "-" : "");
        else
            out << (c < 0 ? " - " : " + ");
        first = false;
        std::vector<std::string> factors;
        for (std::size_t i = 0; i < m.exps.size(); ++i) {
            if (m.exps[i] == 0)
                continue;
            factors.push_back(ring_.vars[i] + (m.exps[i] == 1 ? "" : "^" + std::to_string(m.exps[i])));
        }
        if (m.hbar != 0)
            factors.push_back(std::string("h") + (m.hbar == 1 ? "" : "^" + std::to_string(m.hbar)));
        bool unit = (mag == 1);
        if (!unit || factors.empty())
            out << mag.get_str();
        for (std::size_t i = 0; i < factors.size(); ++i)
            out << ((i == 0 && unit) ? "" : " ") << factors[i];
    }
    return out.str();
}

bool equal_within_validity(const Series &a, const Series &b) { return (a - b).is_zero(); }

Series power(const Series &f, int k)
{
    if (k < 0)
        return power(inverse(f), -k);
    if (k == 0)
        return Series::constant(f.ring(), 1).truncated(f.x_cap(), f.hbar_order());
    Series result = Series::constant(f.ring(), 1);
    Series base = f;
    while (k > 0) {
        if (k & 1)
            result = result * base;
        k >>= 1;
        if (k > 0)
            base = base * base;
    }
    return result;
}

Series differentiate(const Series &f, const std::string &var)
{
    int idx = f.ring().index_of(var);
    if (idx < 0)
        throw Error(ErrorKind::UnknownVariable, var);
    auto i = static_cast<std::size_t>(idx);
    Series r(f.ring(), shift_cap(f.x_cap(), -1), f.hbar_order(), f.min_hbar());
    for (const auto &[m, c] : f.terms()) {
        if (m.exps[i] == 0)
            continue;
        Monomial d = m;
        d.exps[i] -= 1;
        r.add_term(d, c * m.exps[i]);
    }
    return r;
}

namespace {

Ring merged_ring(const std::vector<Series> &parts)
{
    Ring ring;
    for (const auto &s : parts)
        ring = merge_rings(ring, s.ring());
    return ring;
}

} // namespace

PathIntegral integrate_axes(const std::vector<Series> &g, const std::vector<std::string> &vars)
{
    if (g.size() != vars.size())
        throw Error(ErrorKind::IncompatibleVariables, "one component per variable expected");
    Ring ring = merged_ring(g);
    for (const auto &v : vars)
        if (ring.index_of(v) < 0)
            ring = merge_rings(Ring({v}), ring);
    std::vector<Series> comps;
    int x_cap = kUnbounded, order = kUnbounded;
    for (const auto &s : g) {
        comps.push_back(s.embed(ring));
        x_cap = std::min(x_cap, s.x_cap());
        order = std::min(order, s.hbar_order());
    }
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            if (!equal_within_validity(differentiate(comps[j], vars[i]), differentiate(comps[i], vars[j])))
                throw Error(ErrorKind::NotClosed, "d/d" + vars[i] + " g_" + vars[j] + " != d/d" + vars[j] +
                                                      " g_" + vars[i]);

    PathIntegral out;
    out.potential = Series(ring, shift_cap(x_cap, 1), order, 0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
        auto axis = static_cast<std::size_t>(ring.index_of(vars[j]));
        Series rest = comps[j] - differentiate(out.potential, vars[j]);
        for (const auto &[m, c] : rest.terms()) {
            if (m.exps[axis] == -1) {
                out.log_terms.push_back({{static_cast<int>(j), m}, c});
                continue;
            }
            Monomial up = m;
            up.exps[axis] += 1;
            out.potential.add_term(up, c / (m.exps[axis] + 1));
        }
    }
    return out;
}

Series integrate_path(const std::vector<Series> &g, const std::vector<std::string> &vars)
{
    PathIntegral p = integrate_axes(g, vars);
    if (!p.log_terms.empty())
        throw Error(ErrorKind::NoPrimitive, "closed form has a logarithmic period along " +
                                                vars[static_cast<std::size_t>(p.log_terms.front().first.first)]);
    return p.potential;
}

namespace {

/// Termination of sum r^k needs every term to be nilpotent modulo the caps.
void require_nilpotent(const Series &r, ErrorKind kind)
{
    for (const auto &[m, c] : r.terms()) {
        bool x_small = m.degree() >= 1 && m.hbar >= 0;
        bool h_small = m.hbar >= 1;
        if (!x_small && !h_small)
            throw Error(kind, "term " + Series::monomial(r.ring(), m, c).str() + " is not nilpotent");
        bool terminates = (x_small && r.x_cap() < kUnbounded) || (h_small && r.hbar_order() < kUnbounded);
        if (!terminates)
            throw Error(ErrorKind::CapRequired, "series expansion needs a finite x-degree cap or hbar order");
    }
}

constexpr int kMaxExpansionTerms = 100000;

} // namespace

Series exp_series(const Series &g)
{
    if (g.constant_term() != 0)
        throw Error(ErrorKind::NonNilpotentConstantTerm, "exp of a series with nonzero constant term");
    require_nilpotent(g, ErrorKind::NonNilpotentConstantTerm);
    Series sum = Series::constant(g.ring(), 1).truncated(g.x_cap(), g.hbar_order());
    Series term = Series::constant(g.ring(), 1);
    for (int k = 1; k < kMaxExpansionTerms; ++k) {
        term = term * g;
        term *= Rational(1, k);
        if (term.is_zero())
            return sum;
        sum += term;
    }
    throw Error(ErrorKind::CapRequired, "exp expansion did not terminate");
}

Series inverse(const Series &u)
{
    if (u.lowest_hbar() < 0)
        throw Error(ErrorKind::NonInvertibleImage, "negative hbar powers in " + u.str());
    const Monomial *lead = nullptr;
    Rational lead_c;
    for (const auto &[m, c] : u.terms()) {
        if (m.hbar != 0)
            continue;
        if (lead && m.degree() == lead->degree())
            throw Error(ErrorKind::NonInvertibleImage, "leading part of " + u.str() + " is not a monomial");
        if (!lead) {
            lead = &m;
            lead_c = c;
        }
    }
    if (!lead)
        throw Error(ErrorKind::NonInvertibleImage, u.str() + " has no hbar-free part");
    Monomial inv{lead->exps, 0};
    for (std::size_t i = 0; i < inv.exps.size(); ++i) {
        if (inv.exps[i] != 0 && !u.ring().invertible[i])
            throw Error(ErrorKind::NonInvertibleImage, "leading monomial of " + u.str() + " involves non-invertible " +
                                                           u.ring().vars[i]);
        inv.exps[i] = -inv.exps[i];
    }
    Series lead_inv = Series::monomial(u.ring(), inv, 1 / lead_c);
    Series r = u * lead_inv - Series::constant(u.ring(), 1);
    if (r.is_zero())
        return lead_inv;
    require_nilpotent(r, ErrorKind::NonInvertibleImage);
    Series sum = Series::constant(u.ring(), 1).truncated(r.x_cap(), r.hbar_order());
    Series term = Series::constant(u.ring(), 1);
    Series minus_r = -r;
    for (int k = 1; k < kMaxExpansionTerms; ++k) {
        term = term * minus_r;
        if (term.is_zero())
            return sum * lead_inv;
        sum += term;
    }
    throw Error(ErrorKind::CapRequired, "inverse expansion did not terminate");
}

Series substitute(const Series &f, const std::map<std::string, Series> &assignment)
{
    for (const auto &[v, img] : assignment)
        if (f.ring().index_of(v) < 0)
            throw Error(ErrorKind::UnknownVariable, v);

    Ring target;
    for (const auto &[v, img] : assignment)
        target = merge_rings(target, img.ring());
    for (std::size_t i = 0; i < f.ring().size(); ++i) {
        const auto &v = f.ring().vars[i];
        if (assignment.count(v) || target.index_of(v) >= 0)
            continue;
        target.vars.push_back(v);
        target.invertible.push_back(f.ring().invertible[i]);
    }

    std::vector<Series> images;
    bool low_images = false;
    for (std::size_t i = 0; i < f.ring().size(); ++i) {
        const auto &v = f.ring().vars[i];
        auto it = assignment.find(v);
        Series img = it == assignment.end() ? Series::variable(target, v) : it->second.embed(target);
        if (img.lowest_degree() < 1)
            low_images = true;
        images.push_back(std::move(img));
    }
    if (low_images && f.x_cap() < kUnbounded && !f.is_zero())
        throw Error(ErrorKind::CapRequired,
                    "substituting images of degree <= 0 into a series truncated in x is ill-defined");

    std::map<std::pair<std::size_t, int>, Series> powers;
    auto pow_of = [&](std::size_t i, int e) -> const Series & {
        auto key = std::make_pair(i, e);
        auto it = powers.find(key);
        if (it == powers.end())
            it = powers.emplace(key, power(images[i], e)).first;
        return it->second;
    };

    Series result(target, f.x_cap(), f.hbar_order(), std::min(0, f.min_hbar()));
    for (const auto &[m, c] : f.terms()) {
        Series term = Series::monomial(target, Monomial{std::vector<int>(target.size(), 0), m.hbar}, c);
        for (std::size_t i = 0; i < m.exps.size(); ++i)
            if (m.exps[i] != 0)
                term = term * pow_of(i, m.exps[i]);
        result += term;
    }
    return result;
}

} // namespace wq
