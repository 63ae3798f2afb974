#include "wq/quantcheck.hpp"

#include "wq/parse.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wq {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string &field, const std::string &msg)
{
    throw Error(ErrorKind::InvalidScenario, field + ": " + msg);
}

template <class F>
auto guarded(const std::string &field, F &&f)
{
    try {
        return f();
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::InvalidScenario)
            throw;
        invalid(field, e.what());
    } catch (const json::exception &e) {
        invalid(field, e.what());
    }
}

std::string literal(const json &j, const std::string &field)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number_integer())
        return std::to_string(j.get<long long>());
    invalid(field, "expected a literal string or an integer");
}

Series series_at(const json &j, const Ring &ring, const std::string &field)
{
    std::string text = literal(j, field);
    return guarded(field, [&] { return parse_series(text, ring); });
}

std::vector<std::string> string_list(const json &j, const std::string &field)
{
    if (!j.is_array())
        invalid(field, "expected an array of names");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_string())
            invalid(field + "[" + std::to_string(k) + "]", "expected a name");
        out.push_back(j[k].get<std::string>());
    }
    return out;
}

int integer(const json &j, const std::string &field, int lo)
{
    if (!j.is_number_integer())
        invalid(field, "expected an integer");
    long long v = j.get<long long>();
    if (v < lo || v > 1000)
        invalid(field, "out of range: " + std::to_string(v));
    return static_cast<int>(v);
}

const json &require(const json &j, const char *key, const std::string &field)
{
    if (!j.is_object() || !j.contains(key))
        invalid(field, std::string("missing field \"") + key + "\"");
    return j.at(key);
}

int chart_ref(const Atlas &atlas, const json &j, const std::string &field)
{
    if (!j.is_string())
        invalid(field, "expected a chart name");
    int i = atlas.chart_index(j.get<std::string>());
    if (i < 0)
        invalid(field, "unknown chart " + j.get<std::string>());
    return i;
}

/// {"a,b": literal} with comma-separated coordinate names.
Form form_at(const json &j, const Ring &ring, int degree, const std::string &field)
{
    if (!j.is_object())
        invalid(field, "expected an object of components");
    Form w(ring, degree);
    for (const auto &[key, value] : j.items()) {
        std::vector<std::string> names;
        std::stringstream ss(key);
        std::string name;
        while (std::getline(ss, name, ','))
            names.push_back(name);
        if (static_cast<int>(names.size()) != degree)
            invalid(field + "." + key, "expected " + std::to_string(degree) + " coordinate names");
        for (const auto &n : names)
            if (ring.index_of(n) < 0)
                invalid(field + "." + key, "unknown coordinate " + n);
        Series c = series_at(value, ring, field + "." + key);
        guarded(field + "." + key, [&] {
            w.add_named(names, c);
            return 0;
        });
    }
    return w;
}

std::vector<int> multi_index(const json &j, const Ring &ring, const std::string &field)
{
    if (!j.is_object())
        invalid(field, "expected {coordinate: count}");
    std::vector<int> out(ring.size(), 0);
    for (const auto &[name, count] : j.items()) {
        int k = ring.index_of(name);
        if (k < 0)
            invalid(field + "." + name, "unknown coordinate");
        out[static_cast<std::size_t>(k)] = integer(count, field + "." + name, 0);
    }
    return out;
}

StarProduct star_at(const json &j, const std::vector<std::string> &base,
                    const std::vector<std::string> &fiber, const std::string &field)
{
    std::string kind = "moyal";
    if (j.contains("kind")) {
        if (!j["kind"].is_string())
            invalid(field + ".kind", "expected \"moyal\" or \"custom\"");
        kind = j["kind"].get<std::string>();
    }
    int order = j.contains("order") ? integer(j["order"], field + ".order", 1) : 2;
    StarProduct s;
    if (kind == "moyal")
        s = moyal(order, base, fiber);
    else if (kind == "custom")
        s = make_chart(base, fiber, order);
    else
        invalid(field + ".kind", "unknown kind " + kind);
    if (j.contains("extra")) {
        const json &extra = j["extra"];
        if (!extra.is_array())
            invalid(field + ".extra", "expected an array");
        for (std::size_t k = 0; k < extra.size(); ++k) {
            std::string f = field + ".extra[" + std::to_string(k) + "]";
            int power = integer(require(extra[k], "power", f), f + ".power", 1);
            if (power > order)
                invalid(f + ".power", "exceeds the stored order " + std::to_string(order));
            auto left = multi_index(require(extra[k], "left", f), s.chart, f + ".left");
            auto right = multi_index(require(extra[k], "right", f), s.chart, f + ".right");
            Series coeff = series_at(require(extra[k], "coeff", f), s.chart, f + ".coeff");
            s.alphas[static_cast<std::size_t>(power - 1)].add(left, right, coeff);
        }
    }
    return s;
}

Ring chart_without(const Chart &c, const std::vector<std::string> &solved)
{
    std::vector<std::string> vars;
    for (const auto &v : c.coords)
        if (std::find(solved.begin(), solved.end(), v) == solved.end())
            vars.push_back(v);
    return Ring(vars);
}

/// g = c v + r with c a nonzero constant and r free of v; tries coordinates last to first.
std::optional<std::pair<std::string, Series>> solve_linear(const Series &g)
{
    const auto &vars = g.ring().vars;
    for (std::size_t k = vars.size(); k-- > 0;) {
        Rational c = 0;
        bool ok = true;
        for (const auto &[m, coef] : g.terms()) {
            if (m.exps[k] == 0)
                continue;
            bool pure = std::count(m.exps.begin(), m.exps.end(), 0) + 1 == static_cast<long>(m.exps.size());
            if (m.exps[k] != 1 || !pure || m.hbar != 0) {
                ok = false;
                break;
            }
            c += coef;
        }
        if (!ok || c == 0)
            continue;
        Series rest = substitute(g - c * Series::variable(g.ring(), vars[k]), {{vars[k], Series(Ring())}});
        return std::make_pair(vars[k], Rational(-1) / c * rest);
    }
    return std::nullopt;
}

/// Embeds into `ring`, dropping variables that `f` does not actually use.
Series reembed(const Series &f, const Ring &ring)
{
    Substitution drop;
    for (std::size_t k = 0; k < f.ring().size(); ++k) {
        const auto &v = f.ring().vars[k];
        if (ring.index_of(v) >= 0)
            continue;
        for (const auto &[m, c] : f.terms())
            if (m.exps[k] != 0)
                throw Error(ErrorKind::IncompatibleVariables, v + " is not a coordinate of the target chart");
        drop.emplace(v, Series(Ring()));
    }
    return (drop.empty() ? f : substitute(f, drop)).embed(ring);
}

std::string pair_label(const Atlas &atlas, int i, int j)
{
    return atlas.chart(i).name + "," + atlas.chart(j).name;
}

LineBundle complete_bundle(const Atlas &atlas, const std::vector<BundleTransition> &given,
                           const std::string &field)
{
    LineBundle l;
    for (auto [i, j] : atlas.pairs()) {
        auto direct = std::find_if(given.begin(), given.end(), [&](const auto &b) { return b.from == i && b.to == j; });
        auto back = std::find_if(given.begin(), given.end(), [&](const auto &b) { return b.from == j && b.to == i; });
        std::string f = field + "[" + pair_label(atlas, i, j) + "]";
        l.phi[{i, j}] = guarded(f, [&] {
            if (direct != given.end())
                return reembed(direct->phi, atlas.ring_on(i, j));
            if (back != given.end())
                return inverse(atlas.transport(reembed(back->phi, atlas.ring_on(j, i)), j, i));
            invalid(f, "no transition function for this overlap");
        });
    }
    guarded(field, [&] {
        l.verify(atlas);
        return 0;
    });
    return l;
}

std::vector<BundleTransition> bundle_entries(const Atlas &atlas, const json &j, const std::string &field)
{
    if (!j.is_array())
        invalid(field, "expected an array of transitions");
    std::vector<BundleTransition> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        std::string f = field + "[" + std::to_string(k) + "]";
        BundleTransition b;
        b.from = chart_ref(atlas, require(j[k], "from", f), f + ".from");
        b.to = chart_ref(atlas, require(j[k], "to", f), f + ".to");
        if (!atlas.has_overlap(b.from, b.to))
            invalid(f, "charts do not overlap");
        b.phi = series_at(require(j[k], "phi", f), atlas.ring_on(b.from, b.to), f + ".phi");
        out.push_back(std::move(b));
    }
    return out;
}

std::string status_name(PeriodReport::Status s)
{
    switch (s) {
    case PeriodReport::Status::Verified: return "verified";
    case PeriodReport::Status::Failed: return "failed";
    case PeriodReport::Status::Missing: return "not supplied";
    case PeriodReport::Status::Unsupported: return "not checkable";
    }
    return "";
}

} // namespace

nlohmann::json read_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        invalid(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        invalid(path, e.what());
    }
}

StarProduct load_star(const json &j)
{
    auto base = string_list(require(j, "base", "star"), "base");
    auto fiber = string_list(require(j, "fiber", "star"), "fiber");
    if (base.size() != fiber.size() || base.empty())
        invalid("fiber", "base and fiber need the same nonzero size");
    return star_at(j, base, fiber, "star");
}

Atlas load_atlas(const json &j)
{
    Atlas atlas;
    const json &charts = require(j, "charts", "scenario");
    if (!charts.is_array() || charts.empty())
        invalid("charts", "expected a nonempty array");
    for (std::size_t k = 0; k < charts.size(); ++k) {
        std::string f = "charts[" + std::to_string(k) + "]";
        const json &name = require(charts[k], "name", f);
        if (!name.is_string())
            invalid(f + ".name", "expected a string");
        if (atlas.chart_index(name.get<std::string>()) >= 0)
            invalid(f + ".name", "duplicate chart " + name.get<std::string>());
        std::vector<std::string> coords;
        if (charts[k].contains("coords")) {
            coords = string_list(charts[k]["coords"], f + ".coords");
        } else {
            coords = string_list(require(charts[k], "base", f), f + ".base");
            auto fiber = string_list(require(charts[k], "fiber", f), f + ".fiber");
            if (fiber.size() != coords.size())
                invalid(f + ".fiber", "base and fiber sizes differ");
            coords.insert(coords.end(), fiber.begin(), fiber.end());
        }
        if (coords.empty())
            invalid(f, "chart without coordinates");
        guarded(f, [&] { return atlas.add_chart(name.get<std::string>(), coords); });
    }
    if (j.contains("overlaps")) {
        const json &ov = j["overlaps"];
        if (!ov.is_array())
            invalid("overlaps", "expected an array");
        for (std::size_t k = 0; k < ov.size(); ++k) {
            std::string f = "overlaps[" + std::to_string(k) + "]";
            int from = chart_ref(atlas, require(ov[k], "from", f), f + ".from");
            int to = chart_ref(atlas, require(ov[k], "to", f), f + ".to");
            if (from == to)
                invalid(f, "an overlap joins two distinct charts");
            std::vector<std::string> inv;
            if (ov[k].contains("invertible"))
                inv = string_list(ov[k]["invertible"], f + ".invertible");
            for (const auto &v : inv)
                if (atlas.chart_ring(to).index_of(v) < 0)
                    invalid(f + ".invertible", v + " is not a coordinate of " + atlas.chart(to).name);
            Ring ring = atlas.chart_ring(to).with_invertible(inv);
            const json &m = require(ov[k], "map", f);
            if (!m.is_object())
                invalid(f + ".map", "expected {coordinate: literal}");
            Substitution sub;
            for (const auto &v : atlas.chart(from).coords) {
                if (!m.contains(v))
                    invalid(f + ".map", "no image for " + v);
                sub.emplace(v, series_at(m[v], ring, f + ".map." + v));
            }
            guarded(f, [&] {
                atlas.add_overlap(from, to, sub, inv);
                return 0;
            });
        }
    }
    guarded("overlaps", [&] {
        atlas.verify();
        return 0;
    });
    return atlas;
}

LineBundle load_line_bundle(const Atlas &atlas, const json &j)
{
    return complete_bundle(atlas, bundle_entries(atlas, j, "line_bundle"), "line_bundle");
}

Scenario load_scenario(const json &j)
{
    if (!j.is_object())
        invalid("scenario", "expected a JSON object");
    Scenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string())
            invalid("name", "expected a string");
        s.name = j["name"].get<std::string>();
    }
    if (j.contains("order"))
        s.order = integer(j["order"], "order", 1);
    s.atlas = load_atlas(j);
    int n = static_cast<int>(s.atlas.size());
    const json &charts = j["charts"];
    for (int i = 0; i < n; ++i) {
        const json &c = charts[static_cast<std::size_t>(i)];
        if (!c.contains("base") || !c.contains("fiber"))
            invalid("charts[" + std::to_string(i) + "]", "scenario charts need base and fiber coordinates");
    }

    if (j.contains("caps")) {
        const json &caps = j["caps"];
        if (caps.contains("beta_degree"))
            s.beta_degree = integer(caps["beta_degree"], "caps.beta_degree", 0);
        if (caps.contains("reduce_degree"))
            s.reduce_degree = integer(caps["reduce_degree"], "caps.reduce_degree", -1);
    }

    const json &stars = require(j, "stars", "scenario");
    if (!stars.is_object())
        invalid("stars", "expected {chart: star}");
    for (const auto &[key, value] : stars.items())
        if (key != "*" && s.atlas.chart_index(key) < 0)
            invalid("stars." + key, "unknown chart");
    for (int i = 0; i < n; ++i) {
        const auto &name = s.atlas.chart(i).name;
        const json &c = charts[static_cast<std::size_t>(i)];
        std::string key = stars.contains(name) ? name : "*";
        if (!stars.contains(key))
            invalid("stars." + name, "no star product for this chart");
        s.stars.push_back(star_at(stars[key], c["base"].get<std::vector<std::string>>(),
                                  c["fiber"].get<std::vector<std::string>>(), "stars." + key));
    }

    if (j.contains("transitions")) {
        const json &tr = j["transitions"];
        if (!tr.is_array())
            invalid("transitions", "expected an array");
        for (std::size_t k = 0; k < tr.size(); ++k) {
            std::string f = "transitions[" + std::to_string(k) + "]";
            TransitionSpec t;
            t.from = chart_ref(s.atlas, require(tr[k], "from", f), f + ".from");
            t.to = chart_ref(s.atlas, require(tr[k], "to", f), f + ".to");
            if (!s.atlas.has_overlap(t.from, t.to))
                invalid(f, "charts do not overlap");
            for (const auto &o : s.transitions)
                if ((o.from == t.from && o.to == t.to) || (o.from == t.to && o.to == t.from))
                    invalid(f, "duplicate transition for " + pair_label(s.atlas, t.from, t.to));
            const json &b = tr[k].contains("beta1") ? tr[k]["beta1"] : json("solve");
            Ring target = s.atlas.ring_on(t.to, t.from);
            t.beta1 = VectorField::zero(target);
            if (b.is_string() && b.get<std::string>() == "solve") {
                t.solve = true;
            } else if (b.is_object()) {
                t.solve = false;
                for (const auto &[v, c] : b.items()) {
                    int idx = target.index_of(v);
                    if (idx < 0)
                        invalid(f + ".beta1." + v, "not a coordinate of " + s.atlas.chart(t.to).name);
                    t.beta1.comps[static_cast<std::size_t>(idx)] = series_at(c, target, f + ".beta1." + v);
                }
            } else {
                invalid(f + ".beta1", "expected \"solve\" or {coordinate: literal}");
            }
            s.transitions.push_back(std::move(t));
        }
    }

    if (j.contains("lagrangian")) {
        const json &lag = j["lagrangian"];
        if (!lag.is_object())
            invalid("lagrangian", "expected {chart: [generators]}");
        for (int i = 0; i < n; ++i) {
            const auto &name = s.atlas.chart(i).name;
            std::string f = "lagrangian." + name;
            const json &gens = require(lag, name.c_str(), "lagrangian");
            if (!gens.is_array() || gens.empty())
                invalid(f, "expected a nonempty array of generators");
            std::vector<Series> g;
            for (std::size_t k = 0; k < gens.size(); ++k)
                g.push_back(series_at(gens[k], s.atlas.chart_ring(i), f + "[" + std::to_string(k) + "]"));
            s.lagrangian.push_back(std::move(g));
        }
    }

    if (j.contains("symplectic_form")) {
        const json &om = j["symplectic_form"];
        for (int i = 0; i < n; ++i) {
            const auto &name = s.atlas.chart(i).name;
            s.omega.push_back(
                form_at(require(om, name.c_str(), "symplectic_form"), s.atlas.chart_ring(i), 2, "symplectic_form." + name));
        }
    }

    if (j.contains("line_bundle"))
        s.line_bundle = bundle_entries(s.atlas, j["line_bundle"], "line_bundle");

    if (j.contains("periods")) {
        const json &ps = j["periods"];
        if (!ps.is_array())
            invalid("periods", "expected an array");
        for (std::size_t k = 0; k < ps.size(); ++k) {
            std::string f = "periods[" + std::to_string(k) + "]";
            PeriodData p;
            p.index = integer(require(ps[k], "index", f), f + ".index", 2);
            for (const auto &o : s.periods)
                if (o.index == p.index)
                    invalid(f + ".index", "duplicate period index " + std::to_string(p.index));
            const json &forms = require(ps[k], "forms", f);
            for (int i = 0; i < n; ++i) {
                const auto &name = s.atlas.chart(i).name;
                p.forms.push_back(form_at(require(forms, name.c_str(), f + ".forms"), s.atlas.chart_ring(i), 2,
                                          f + ".forms." + name));
            }
            if (ps[k].contains("corrections")) {
                const json &cs = ps[k]["corrections"];
                if (!cs.is_array())
                    invalid(f + ".corrections", "expected an array");
                std::map<Pair, Form> corr;
                for (std::size_t m = 0; m < cs.size(); ++m) {
                    std::string g = f + ".corrections[" + std::to_string(m) + "]";
                    int a = chart_ref(s.atlas, require(cs[m], "from", g), g + ".from");
                    int b = chart_ref(s.atlas, require(cs[m], "to", g), g + ".to");
                    if (a >= b || !s.atlas.has_overlap(a, b))
                        invalid(g, "corrections are given for overlapping pairs in chart order");
                    corr[{a, b}] = form_at(require(cs[m], "form", g), s.atlas.ring_on(a, b), 1, g + ".form");
                }
                p.corrections = std::move(corr);
            }
            s.periods.push_back(std::move(p));
        }
        std::sort(s.periods.begin(), s.periods.end(), [](const auto &a, const auto &b) { return a.index < b.index; });
    }
    return s;
}

Scenario load_scenario_file(const std::string &path)
{
    Scenario s = load_scenario(read_json_file(path));
    if (s.name.empty())
        s.name = std::filesystem::path(path).stem().string();
    return s;
}

bool check_lagrangian(const Scenario &s)
{
    std::size_t n = s.atlas.size();
    if (s.lagrangian.size() != n)
        throw Error(ErrorKind::MissingData, "Lagrangian ideal generators are required on every chart");
    if (s.omega.size() != n)
        throw Error(ErrorKind::MissingData, "the symplectic form is required on every chart");
    for (std::size_t i = 0; i < n; ++i) {
        const Chart &c = s.atlas.chart(static_cast<int>(i));
        if (2 * s.lagrangian[i].size() != c.coords.size())
            return false;
        std::vector<std::string> solved;
        std::map<std::string, Series> images;
        std::vector<Series> gens = s.lagrangian[i];
        for (std::size_t k = 0; k < gens.size(); ++k) {
            auto sol = solve_linear(gens[k]);
            if (!sol)
                throw Error(ErrorKind::Unsupported, "generator " + gens[k].str() + " on " + c.name +
                                                        " is not linear in any coordinate");
            auto [v, img] = *sol;
            solved.push_back(v);
            for (auto &[w, im] : images)
                if (im.ring().index_of(v) >= 0)
                    im = substitute(im, {{v, img}});
            for (std::size_t m = k + 1; m < gens.size(); ++m)
                if (gens[m].ring().index_of(v) >= 0)
                    gens[m] = substitute(gens[m], {{v, img}});
            images.emplace(v, img);
        }
        Ring target = chart_without(c, solved);
        for (auto &[v, img] : images)
            img = img.embed(target);
        if (!pullback(s.omega[i], target, images).is_zero())
            return false;
    }
    return true;
}

std::vector<std::vector<std::string>> normal_coordinates(const Scenario &s)
{
    if (s.lagrangian.size() != s.atlas.size())
        throw Error(ErrorKind::MissingData, "Lagrangian ideal generators are required on every chart");
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < s.lagrangian.size(); ++i) {
        std::vector<std::string> normals;
        for (const auto &g : s.lagrangian[i]) {
            const auto &t = g.terms();
            const auto &e = t.empty() ? std::vector<int>{} : t.begin()->first.exps;
            if (t.size() != 1 || std::count(e.begin(), e.end(), 1) != 1 || std::count(e.begin(), e.end(), 0) + 1 != static_cast<long>(e.size()) || t.begin()->first.hbar != 0)
                throw Error(ErrorKind::Unsupported, "generator " + g.str() + " on " + s.atlas.chart(static_cast<int>(i)).name +
                                                        " is not a coordinate; the class computation needs coordinate normals");
            const auto &exps = t.begin()->first.exps;
            auto k = static_cast<std::size_t>(std::find(exps.begin(), exps.end(), 1) - exps.begin());
            normals.push_back(g.ring().vars[k]);
        }
        out.push_back(std::move(normals));
    }
    return out;
}

HalfCanonical half_canonical_condition(const Scenario &s)
{
    ObstructionInput in;
    in.ambient = s.atlas;
    in.stars = s.stars;
    in.normals = normal_coordinates(s);
    if (s.omega.size() != s.atlas.size())
        throw Error(ErrorKind::MissingData, "the symplectic form is required on every chart");
    in.omega = s.omega;

    HalfCanonical h;
    auto report_for = [&](int from, int to) -> TransitionReport & {
        h.transitions.push_back({});
        h.transitions.back().from = from;
        h.transitions.back().to = to;
        return h.transitions.back();
    };
    for (const auto &t : s.transitions) {
        TransitionReport &r = report_for(t.from, t.to);
        if (t.solve) {
            auto sol = solve_beta1(s.stars[static_cast<std::size_t>(t.from)], s.stars[static_cast<std::size_t>(t.to)],
                                   s.atlas.map(t.from, t.to), s.atlas.ring_on(t.to, t.from), s.beta_degree);
            r.solved = true;
            r.unknowns = sol.unknowns;
            r.kernel_dim = sol.kernel_dim;
            r.gauge_dim = sol.gauge_kernel.size();
            r.period_dim = sol.period_directions.size();
            r.beta1 = sol.beta1;
        } else {
            r.beta1 = t.beta1;
        }
        in.beta1[{t.from, t.to}] = r.beta1;
    }
    for (auto [i, j] : s.atlas.pairs()) {
        if (in.beta1.count({i, j}) || in.beta1.count({j, i}))
            continue;
        auto sol = solve_beta1(s.stars[static_cast<std::size_t>(i)], s.stars[static_cast<std::size_t>(j)],
                               s.atlas.map(i, j), s.atlas.ring_on(j, i), s.beta_degree);
        TransitionReport &r = report_for(i, j);
        r.solved = true;
        r.unknowns = sol.unknowns;
        r.kernel_dim = sol.kernel_dim;
        r.gauge_dim = sol.gauge_kernel.size();
        r.period_dim = sol.period_directions.size();
        r.beta1 = sol.beta1;
        in.beta1[{i, j}] = r.beta1;
    }

    ObstructionResult ob = obstruction_class(in);
    h.y_atlas = ob.y_atlas;
    LineBundle l = s.line_bundle.empty() ? LineBundle::trivial(h.y_atlas)
                                         : complete_bundle(h.y_atlas, s.line_bundle, "line_bundle");
    CechClass cl = chern_class(h.y_atlas, l);
    CechClass ck = chern_class(h.y_atlas, canonical_bundle(h.y_atlas));
    ReduceOptions opts;
    opts.degree = s.reduce_degree;
    h.c1_L = class_reduce(h.y_atlas, cl, opts);
    h.c1_K = class_reduce(h.y_atlas, ck, opts);
    h.at = class_reduce(h.y_atlas, ob.cls, opts);
    h.condition = class_reduce(h.y_atlas, cl - Rational(1, 2) * ck - ob.cls, opts);
    return h;
}

int Verdict::exit_code() const
{
    if (!quantizable)
        return 3;
    return conclusive ? 0 : 4;
}

nlohmann::json to_json(const ReducedClass &c)
{
    json out = json::object();
    for (const auto &[label, v] : c.coords)
        out[label] = v.get_str();
    return out;
}

nlohmann::json Verdict::to_json() const
{
    json out;
    out["scenario"] = scenario;
    out["order"] = order;
    out["lagrangian_ok"] = lagrangian_ok;
    if (chern) {
        const Atlas &y = chern->y_atlas;
        out["classes"] = {{"c1_L", wq::to_json(chern->c1_L)},
                          {"c1_K_Y", wq::to_json(chern->c1_K)},
                          {"At", wq::to_json(chern->at)}};
        out["chern_condition"] = wq::to_json(chern->condition);
        json tr = json::array();
        for (const auto &t : chern->transitions) {
            json e = {{"from", y.chart(t.from).name}, {"to", y.chart(t.to).name}, {"solved", t.solved},
                      {"beta1", t.beta1.str()}};
            if (t.solved) {
                e["unknowns"] = t.unknowns;
                e["kernel_dim"] = t.kernel_dim;
                e["gauge_dim"] = t.gauge_dim;
                e["period_dim"] = t.period_dim;
            }
            tr.push_back(e);
        }
        out["transitions"] = tr;
    } else {
        out["chern_condition"] = nullptr;
    }
    out["chern_condition_holds"] = chern_ok;
    json ps = json::array();
    for (const auto &p : periods) {
        json e = {{"index", p.index}, {"status", status_name(p.status)}};
        if (p.status == PeriodReport::Status::Verified || p.status == PeriodReport::Status::Failed)
            e["coordinates"] = wq::to_json(p.reduced);
        if (!p.note.empty())
            e["note"] = p.note;
        ps.push_back(e);
    }
    out["period_conditions"] = ps;
    out["quantizable_at_order"] = quantizable;
    out["conclusive"] = conclusive;
    out["exit_code"] = exit_code();
    out["report"] = report;
    return out;
}

std::string Verdict::text() const
{
    std::ostringstream os;
    os << "scenario: " << scenario << "\n";
    os << "order: " << order << "\n";
    os << "lagrangian: " << (lagrangian_ok ? "ok" : "fails") << "\n";
    if (chern) {
        os << "c1(L): " << chern->c1_L.str() << "\n";
        os << "c1(K_Y): " << chern->c1_K.str() << "\n";
        os << "At: " << chern->at.str() << "\n";
        os << "c1(L) - 1/2 c1(K_Y) - At: " << chern->condition.str() << (chern_ok ? "  [holds]" : "  [fails]")
           << "\n";
    }
    for (const auto &p : periods) {
        os << "period " << p.index << ": " << status_name(p.status);
        if (p.status == PeriodReport::Status::Verified || p.status == PeriodReport::Status::Failed)
            os << " (" << p.reduced.str() << ")";
        os << "\n";
    }
    for (const auto &line : report)
        os << "  - " << line << "\n";
    os << "verdict: ";
    switch (exit_code()) {
    case 0: os << "quantizable at order " << order; break;
    case 3: os << "not quantizable at order " << order; break;
    default: os << "inconclusive at order " << order << " (all checkable conditions hold)"; break;
    }
    os << "\n";
    return os.str();
}

Verdict run_scenario(const Scenario &s, std::optional<int> order)
{
    Verdict v;
    v.scenario = s.name;
    v.order = order ? *order : s.order;
    if (v.order < 1)
        invalid("order", "must be at least 1");

    std::vector<std::string> checked, unchecked;
    v.lagrangian_ok = check_lagrangian(s);
    checked.push_back("Lagrangian condition");
    if (!v.lagrangian_ok) {
        v.quantizable = false;
        v.conclusive = true;
        v.report.push_back("the symplectic form does not restrict to zero along the ideal on every chart, or the "
                           "ideal is not of half dimension");
        v.report.push_back("checked: Lagrangian condition");
        return v;
    }

    bool chern_checked = true;
    try {
        v.chern = half_canonical_condition(s);
        v.chern_ok = v.chern->condition.is_zero();
        checked.push_back("Chern condition c1(L) - 1/2 c1(K_Y) = At");
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::Unsupported)
            throw;
        chern_checked = false;
        v.chern_ok = true;
        unchecked.push_back(std::string("Chern condition (") + e.what() + ")");
    }

    std::vector<std::vector<std::string>> normals;
    bool have_normals = true;
    try {
        normals = normal_coordinates(s);
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::Unsupported)
            throw;
        have_normals = false;
    }

    bool periods_ok = true, periods_complete = true;
    for (const auto &p : s.periods) {
        PeriodReport r;
        r.index = p.index;
        if (!have_normals) {
            r.status = PeriodReport::Status::Unsupported;
            r.note = "restriction needs coordinate normals";
        } else {
            try {
                ObstructionResult res = restrict_2form_class(s.atlas, normals, p.forms, p.corrections);
                ReduceOptions opts;
                opts.degree = s.reduce_degree;
                opts.de_rham = true;
                r.reduced = class_reduce(res.y_atlas, res.cls, opts);
                r.status = r.reduced.is_zero() ? PeriodReport::Status::Verified : PeriodReport::Status::Failed;
            } catch (const Error &e) {
                if (e.kind() != ErrorKind::Unsupported)
                    throw;
                r.status = PeriodReport::Status::Unsupported;
                r.note = e.what();
            }
        }
        if (r.status == PeriodReport::Status::Failed)
            periods_ok = false;
        if (r.status == PeriodReport::Status::Unsupported) {
            periods_complete = false;
            unchecked.push_back("period condition " + std::to_string(p.index) + " (" + r.note + ")");
        } else {
            checked.push_back("period condition " + std::to_string(p.index));
        }
        v.periods.push_back(std::move(r));
    }
    for (int i = 2; i <= v.order; ++i) {
        bool supplied = std::any_of(s.periods.begin(), s.periods.end(), [&](const auto &p) { return p.index == i; });
        if (supplied)
            continue;
        PeriodReport r;
        r.index = i;
        r.status = PeriodReport::Status::Missing;
        v.periods.push_back(std::move(r));
        periods_complete = false;
        unchecked.push_back("period condition " + std::to_string(i) + " (coefficient not supplied)");
    }
    std::sort(v.periods.begin(), v.periods.end(), [](const auto &a, const auto &b) { return a.index < b.index; });

    v.quantizable = v.lagrangian_ok && v.chern_ok && periods_ok;
    v.conclusive = chern_checked && periods_complete;

    if (chern_checked && !v.chern_ok)
        v.report.push_back("the Chern condition fails: c1(L) - 1/2 c1(K_Y) - At has coordinates " +
                           v.chern->condition.str());
    for (const auto &p : v.periods)
        if (p.status == PeriodReport::Status::Failed)
            v.report.push_back("period condition " + std::to_string(p.index) + " fails: restriction has coordinates " +
                               p.reduced.str());
    v.report.push_back("omega_1 is never supplied: its restriction to Y enters only through At");
    std::string line = "checked:";
    for (std::size_t k = 0; k < checked.size(); ++k)
        line += (k ? "; " : " ") + checked[k];
    v.report.push_back(line);
    if (!unchecked.empty()) {
        line = "not checkable:";
        for (std::size_t k = 0; k < unchecked.size(); ++k)
            line += (k ? "; " : " ") + unchecked[k];
        v.report.push_back(line);
    }
    v.report.push_back("finite-order status only: passing conditions are not an existence proof of a module beyond "
                       "order 1, and filtration obstructions are not computed");
    return v;
}

} // namespace wq
