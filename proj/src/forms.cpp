#include "wq/forms.hpp"

#include <algorithm>
#include <sstream>

namespace wq {

namespace {

/// Sorts in place; returns the permutation sign, or 0 on a repeated index.
int canonicalize(Form::Key &key)
{
    int sign = 1;
    for (std::size_t i = 0; i < key.size(); ++i)
        for (std::size_t j = 0; j + 1 < key.size() - i; ++j)
            if (key[j] > key[j + 1]) {
                std::swap(key[j], key[j + 1]);
                sign = -sign;
            }
    for (std::size_t j = 0; j + 1 < key.size(); ++j)
        if (key[j] == key[j + 1])
            return 0;
    return sign;
}

} // namespace

Form::Form(Ring ring, int degree) : ring_(std::move(ring)), degree_(degree)
{
    if (degree < 0)
        throw Error(ErrorKind::Unsupported, "negative form degree");
}

Form Form::function(const Series &f)
{
    Form w(f.ring(), 0);
    w.add(Key{}, f);
    return w;
}

Form Form::differential(const Series &f)
{
    Form w(f.ring(), 1);
    for (std::size_t k = 0; k < f.ring().size(); ++k)
        w.add(Key{static_cast<int>(k)}, differentiate(f, f.ring().vars[k]));
    return w;
}

Series Form::component(const Key &key) const
{
    Key sorted = key;
    int sign = canonicalize(sorted);
    auto it = comps_.find(sorted);
    if (sign == 0 || it == comps_.end())
        return Series(ring_);
    return sign > 0 ? it->second : -it->second;
}

Series Form::component_named(const std::vector<std::string> &names) const
{
    Key key;
    for (const auto &n : names) {
        int i = ring_.index_of(n);
        if (i < 0)
            throw Error(ErrorKind::UnknownVariable, n);
        key.push_back(i);
    }
    return component(key);
}

int Form::coefficient_span() const
{
    int span = 0;
    for (const auto &[k, c] : comps_)
        span = std::max({span, std::abs(c.lowest_degree()), std::abs(c.highest_degree())});
    return span;
}

void Form::add(Key key, const Series &c)
{
    if (static_cast<int>(key.size()) != degree_)
        throw Error(ErrorKind::Unsupported, "component arity does not match form degree");
    if (c.is_zero())
        return;
    Ring merged = merge_rings(ring_, c.ring());
    if (!(merged == ring_)) {
        std::vector<std::string> names;
        for (int k : key)
            names.push_back(ring_.vars.at(static_cast<std::size_t>(k)));
        *this = embed(merged);
        add_named(names, c);
        return;
    }
    int sign = canonicalize(key);
    if (sign == 0)
        return;
    Series v = c.embed(ring_);
    if (sign < 0)
        v = -v;
    auto it = comps_.find(key);
    if (it == comps_.end()) {
        comps_.emplace(key, std::move(v));
        return;
    }
    it->second += v;
    if (it->second.is_zero())
        comps_.erase(it);
}

void Form::add_named(const std::vector<std::string> &names, const Series &c)
{
    Key key;
    for (const auto &n : names) {
        int i = ring_.index_of(n);
        if (i < 0)
            throw Error(ErrorKind::UnknownVariable, n);
        key.push_back(i);
    }
    add(std::move(key), c);
}

Form Form::embed(const Ring &target) const
{
    if (target == ring_)
        return *this;
    Form out(target, degree_);
    for (const auto &[k, c] : comps_) {
        std::vector<std::string> names;
        for (int i : k)
            names.push_back(ring_.vars[static_cast<std::size_t>(i)]);
        out.add_named(names, c.embed(target));
    }
    return out;
}

Form Form::operator-() const
{
    Form out = *this;
    for (auto &[k, c] : out.comps_)
        c = -c;
    return out;
}

Form &Form::operator+=(const Form &other)
{
    if (other.degree_ != degree_)
        throw Error(ErrorKind::Unsupported, "adding forms of different degrees");
    Ring merged = merge_rings(ring_, other.ring_);
    Form rhs = other.embed(merged);
    if (!(merged == ring_))
        *this = embed(merged);
    for (const auto &[k, c] : rhs.comps_)
        add(k, c);
    return *this;
}

Form operator*(const Series &f, const Form &w)
{
    Ring merged = merge_rings(f.ring(), w.ring());
    Form out(merged, w.degree());
    Series g = f.embed(merged);
    Form we = w.embed(merged);
    for (const auto &[k, c] : we.components())
        out.add(k, g * c);
    return out;
}

Form operator*(const Rational &c, const Form &w)
{
    Form out(w.ring(), w.degree());
    for (const auto &[k, v] : w.components())
        out.add(k, v * c);
    return out;
}

bool Form::operator==(const Form &other) const
{
    return degree_ == other.degree_ && (*this - other).is_zero();
}

std::string Form::str() const
{
    if (comps_.empty())
        return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto &[k, c] : comps_) {
        if (!first)
            out << " + ";
        first = false;
        out << "(" << c.str() << ")";
        for (std::size_t i = 0; i < k.size(); ++i)
            out << (i == 0 ? " d" : "^d") << ring_.vars[static_cast<std::size_t>(k[i])];
    }
    return out.str();
}

Form exterior_d(const Form &w)
{
    Form out(w.ring(), w.degree() + 1);
    for (const auto &[k, c] : w.components())
        for (std::size_t v = 0; v < w.ring().size(); ++v) {
            Form::Key key{static_cast<int>(v)};
            key.insert(key.end(), k.begin(), k.end());
            out.add(key, differentiate(c, w.ring().vars[v]));
        }
    return out;
}

Form wedge(const Form &a, const Form &b)
{
    Ring merged = merge_rings(a.ring(), b.ring());
    Form lhs = a.embed(merged), rhs = b.embed(merged);
    Form out(merged, a.degree() + b.degree());
    for (const auto &[ka, ca] : lhs.components())
        for (const auto &[kb, cb] : rhs.components()) {
            Form::Key key = ka;
            key.insert(key.end(), kb.begin(), kb.end());
            out.add(key, ca * cb);
        }
    return out;
}

Form pullback(const Form &w, const Ring &target, const std::map<std::string, Series> &images)
{
    std::vector<Form> dphi;
    std::map<std::string, Series> assignment;
    for (const auto &v : w.ring().vars) {
        auto it = images.find(v);
        Series img = it != images.end() ? it->second : Series::variable(target, v);
        assignment.emplace(v, img);
        dphi.push_back(Form::differential(img));
    }
    Form out(target, w.degree());
    for (const auto &[k, c] : w.components()) {
        Form piece = Form::function(substitute(c, assignment));
        for (int i : k)
            piece = wedge(piece, dphi[static_cast<std::size_t>(i)]);
        out += piece;
    }
    Ring merged = merge_rings(target, out.ring());
    if (merged.size() != target.size())
        throw Error(ErrorKind::IncompatibleVariables, "pullback leaves variables outside the target chart");
    return out.embed(merged);
}

Form contract(const std::vector<Series> &v, const Form &w)
{
    if (v.size() != w.ring().size())
        throw Error(ErrorKind::IncompatibleVariables, "vector field arity does not match form");
    if (w.degree() == 0)
        return Form(w.ring(), 0);
    Form out(w.ring(), w.degree() - 1);
    for (const auto &[k, c] : w.components())
        for (std::size_t p = 0; p < k.size(); ++p) {
            Form::Key rest = k;
            rest.erase(rest.begin() + static_cast<long>(p));
            Series term = v[static_cast<std::size_t>(k[p])] * c;
            out.add(rest, p % 2 == 0 ? term : -term);
        }
    return out;
}

} // namespace wq
