#include "wq/lagmodule.hpp"

#include <map>

namespace wq {

Ring module_ring(int n)
{
    std::vector<std::string> vars;
    for (int i = 1; i <= n; ++i)
        vars.push_back("x" + std::to_string(i));
    return Ring(vars);
}

ModuleData ModuleData::trivial(int n)
{
    return ModuleData{n, std::vector<Series>(static_cast<std::size_t>(n), Series(module_ring(n)))};
}

namespace {

void check_data(const ModuleData &data)
{
    if (static_cast<int>(data.f.size()) != data.n)
        throw Error(ErrorKind::RankMismatch, "expected one f_j per pair");
    for (std::size_t j = 0; j < data.f.size(); ++j)
        if (data.f[j].lowest_hbar() < 1)
            throw Error(ErrorKind::IllDefinedAction, "f_" + std::to_string(j + 1) + " is not divisible by h");
}

/// y_j on v * 1_M.
Series apply_y(int j, const Series &v, const ModuleData *data)
{
    const std::string x = "x" + std::to_string(j + 1);
    Series out = differentiate(v, x).shift_hbar(1);
    if (data)
        out += data->f[static_cast<std::size_t>(j)] * v;
    return out;
}

Series act_impl(const WeylElement &u, const Series &v, const ModuleData *data)
{
    int n = u.n();
    Ring ring = module_ring(n);
    Series w = v.embed(ring);
    if (w.lowest_hbar() < 0)
        throw Error(ErrorKind::IllDefinedAction, "module elements carry no negative hbar powers");

    std::map<std::vector<int>, Series> ys;
    // y^b = y1^b1 ... yn^bn acts right to left.
    auto y_power = [&](auto &&self, const std::vector<int> &b) -> const Series & {
        auto it = ys.find(b);
        if (it != ys.end())
            return it->second;
        int j = -1;
        for (int i = 0; i < n; ++i)
            if (b[static_cast<std::size_t>(i)] > 0) {
                j = i;
                break;
            }
        Series val = w;
        if (j >= 0) {
            std::vector<int> rest = b;
            rest[static_cast<std::size_t>(j)] -= 1;
            val = apply_y(j, self(self, rest), data);
        }
        return ys.emplace(b, std::move(val)).first->second;
    };

    Series out(ring, w.x_cap(), w.hbar_order(), -1);
    for (const auto &[m, c] : u.terms()) {
        const Series &yv = y_power(y_power, m.b);
        out += Series::monomial(ring, Monomial{m.a, m.k}, c) * yv;
    }
    out = out.truncated(kUnbounded, u.hbar_order());
    if (out.lowest_hbar() < 0)
        throw Error(ErrorKind::IllDefinedAction, "hbar^-1 part does not cancel: " + out.str());
    return out.with_min_hbar(0);
}

} // namespace

Series act(const WeylElement &u, const Series &v) { return act_impl(u, v, nullptr); }

Series act(const WeylElement &u, const Series &v, const ModuleData &data)
{
    if (data.n != u.n())
        throw Error(ErrorKind::RankMismatch, "module data rank differs from the element");
    check_data(data);
    return act_impl(u, v, &data);
}

SigmaWeight sigma_weight(const SpMatrix &a)
{
    if (!a.is_parabolic())
        throw Error(ErrorKind::NotParabolic, "a does not preserve span(y1..yn)");
    int n = a.n();
    Series one = Series::constant(module_ring(n), 1);
    Series image = act(sigma_embed(a), one);
    Rational lambda = image.constant_term();
    if (!(image == one * lambda))
        throw Error(ErrorKind::IllDefinedAction, "sigma(a) does not act on 1_M by a scalar");
    return SigmaWeight{lambda, a.trace_g() / 2, a.trace_lower_right() / 2};
}

bool integrable_reduced(const ModuleData &data)
{
    check_data(data);
    std::vector<Series> g;
    for (const auto &f : data.f)
        g.push_back(f.shift_hbar(-1));
    for (int i = 0; i < data.n; ++i)
        for (int j = i + 1; j < data.n; ++j) {
            auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            if (!equal_within_validity(differentiate(g[sj], "x" + std::to_string(i + 1)),
                                       differentiate(g[si], "x" + std::to_string(j + 1))))
                return false;
        }
    return true;
}

bool integrable_full(const ModuleData &data)
{
    check_data(data);
    Series one = Series::constant(module_ring(data.n), 1);
    for (int i = 0; i < data.n; ++i)
        for (int j = i + 1; j < data.n; ++j) {
            Series ij = apply_y(i, apply_y(j, one, &data), &data);
            Series ji = apply_y(j, apply_y(i, one, &data), &data);
            if (!equal_within_validity(ij, ji))
                return false;
        }
    return true;
}

LiftResult lift_module(const ModuleData &data, int x_cap)
{
    check_data(data);
    if (!integrable_reduced(data))
        throw Error(ErrorKind::NotIntegrable, "d_i g_j != d_j g_i: the data is not a flat module");
    Ring ring = module_ring(data.n);
    std::vector<Series> g;
    for (const auto &f : data.f)
        g.push_back(f.embed(ring).shift_hbar(-1));
    LiftResult out;
    out.g = integrate_path(g, ring.vars);
    if (out.g.x_cap() >= kUnbounded)
        out.g = out.g.truncated(x_cap, kUnbounded);
    out.m = exp_series(-out.g);
    for (int j = 1; j <= data.n; ++j) {
        out.residuals.push_back(act(WeylElement::y(data.n, j), out.m, data));
        if (!out.residuals.back().is_zero())
            throw Error(ErrorKind::NotIntegrable, "y_" + std::to_string(j) + "(m) = " + out.residuals.back().str());
    }
    return out;
}

ModuleData twist_action(const ModuleData &data, const std::vector<Series> &a)
{
    check_data(data);
    if (static_cast<int>(a.size()) != data.n)
        throw Error(ErrorKind::RankMismatch, "expected one a_j per pair");
    Ring ring = module_ring(data.n);
    for (int i = 0; i < data.n; ++i)
        for (int j = i + 1; j < data.n; ++j) {
            auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            if (!equal_within_validity(differentiate(a[sj].embed(ring), ring.vars[si]),
                                       differentiate(a[si].embed(ring), ring.vars[sj])))
                throw Error(ErrorKind::NotClosed, "sum a_j dx_j is not closed");
        }
    ModuleData out = data;
    for (std::size_t j = 0; j < a.size(); ++j)
        out.f[j] = data.f[j].embed(ring) + a[j].embed(ring).shift_hbar(1);
    return out;
}

bool verify_error_identity(const SpMatrix &a, const Series &v)
{
    SigmaWeight w = sigma_weight(a);
    int n = a.n();
    Series lhs = act(sigma_embed(a), v);
    Series one = Series::constant(module_ring(n), 1);
    Series theta = act(theta_D(a, WeylElement::from_series(n, v.embed(module_ring(n)))), one);
    return equal_within_validity(lhs, theta + v * w.eigenvalue);
}

} // namespace wq
