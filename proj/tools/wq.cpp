#include "wq/cechdr.hpp"
#include "wq/lagmodule.hpp"
#include "wq/parse.hpp"
#include "wq/quantcheck.hpp"
#include "wq/starprod.hpp"
#include "wq/weyl.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <sstream>

using namespace wq;
using nlohmann::json;

namespace {

constexpr int kInvalid = 2;

SpMatrix parse_matrix(const std::string &text)
{
    std::vector<std::vector<Rational>> rows;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), '|', ';');
    std::stringstream all(normalized);
    std::string row;
    while (std::getline(all, row, ';')) {
        for (auto &ch : row)
            if (ch == ',')
                ch = ' ';
        std::stringstream rs(row);
        std::vector<Rational> r;
        std::string tok;
        while (rs >> tok) {
            Rational q;
            if (q.set_str(tok, 10) != 0)
                throw Error(ErrorKind::Parse, "bad matrix entry " + tok);
            q.canonicalize();
            r.push_back(q);
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty() || rows.size() % 2 != 0)
        throw Error(ErrorKind::RankMismatch, "matrix needs an even number of rows");
    for (const auto &r : rows)
        if (r.size() != rows.size())
            throw Error(ErrorKind::RankMismatch, "matrix is not square");
    return SpMatrix(static_cast<int>(rows.size() / 2), rows);
}

json weyl_out(const WeylElement &u)
{
    json j = to_json(u);
    j["literal"] = u.str();
    return j;
}

std::vector<Series> monomials_up_to(const Ring &ring, int degree)
{
    std::vector<Series> out;
    std::vector<int> e(ring.size(), 0);
    auto rec = [&](auto &&self, std::size_t k, int left) -> void {
        if (k == e.size()) {
            Monomial m;
            m.exps = e;
            out.push_back(Series::monomial(ring, m, 1));
            return;
        }
        for (int d = 0; d <= left; ++d) {
            e[k] = d;
            self(self, k + 1, left - d);
        }
        e[k] = 0;
    };
    rec(rec, 0, degree);
    return out;
}

int total_degree(const Series &f) { return f.terms().begin()->first.degree(); }

void emit(const json &j) { std::cout << j.dump(2) << "\n"; }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Weyl algebra, deformation quantization and quantizability checks"};
    app.require_subcommand(1);
    int code = 0;

    auto *weyl = app.add_subcommand("weyl", "Weyl algebra operations");
    weyl->require_subcommand(1);
    int n = 1;
    std::string a_lit, b_lit, matrix;
    auto *wmul = weyl->add_subcommand("mul", "product of two literals");
    auto *wbr = weyl->add_subcommand("bracket", "commutator of two literals");
    for (auto *c : {wmul, wbr}) {
        c->add_option("a", a_lit)->required();
        c->add_option("b", b_lit)->required();
        c->add_option("-n,--pairs", n, "number of symplectic pairs");
    }
    auto *wdeg = weyl->add_subcommand("degree", "filtration degree of a literal");
    wdeg->add_option("a", a_lit)->required();
    wdeg->add_option("-n,--pairs", n, "number of symplectic pairs");
    auto *wsig = weyl->add_subcommand("sigma", "quadratic element of an sp(2n) matrix");
    wsig->add_option("matrix", matrix, "rows separated by ';' or '|', entries by spaces or commas")->required();

    wmul->callback([&] { emit(weyl_out(weyl_mul(parse_weyl(a_lit, n), parse_weyl(b_lit, n)))); });
    wbr->callback([&] { emit(weyl_out(weyl_bracket(parse_weyl(a_lit, n), parse_weyl(b_lit, n)))); });
    wdeg->callback([&] { emit({{"degree", filtration_degree(parse_weyl(a_lit, n))}}); });
    wsig->callback([&] {
        SpMatrix a = parse_matrix(matrix);
        json out = weyl_out(sigma_embed(a));
        if (a.is_parabolic()) {
            SigmaWeight w = sigma_weight(a);
            out["weight"] = {{"eigenvalue", w.eigenvalue.get_str()},
                             {"half_trace_g", w.half_trace_g.get_str()},
                             {"half_trace_lower_right", w.half_trace_stated.get_str()}};
        }
        emit(out);
    });

    auto *module = app.add_subcommand("module", "Lagrangian module operations");
    module->require_subcommand(1);
    std::string data_path;
    int x_cap = 8;
    auto *lift = module->add_subcommand("lift", "lift a module structure to its generator");
    lift->add_option("data", data_path, "JSON with n and the f_j literals")->required();
    lift->add_option("--x-cap", x_cap, "x-degree truncation of exact potentials");
    lift->callback([&] {
        json j = read_json_file(data_path);
        ModuleData d;
        d.n = j.at("n").get<int>();
        Ring ring = module_ring(d.n);
        for (const auto &f : j.at("f"))
            d.f.push_back(parse_series(f.get<std::string>(), ring));
        if (static_cast<int>(d.f.size()) != d.n)
            throw Error(ErrorKind::InvalidScenario, "f: expected " + std::to_string(d.n) + " literals");
        try {
            LiftResult r = lift_module(d, x_cap);
            bool zero = std::all_of(r.residuals.begin(), r.residuals.end(), [](const Series &s) { return s.is_zero(); });
            emit({{"g", r.g.str()}, {"m", r.m.str()}, {"verification", {{"y_j(m) = 0", zero}}}});
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::NotIntegrable)
                throw;
            emit({{"error", e.what()}});
            code = 3;
        }
    });

    auto *star = app.add_subcommand("star", "star products and transitions");
    star->require_subcommand(1);
    std::string star_path, dst_path, map_path;
    int degree = 4;
    auto *assoc = star->add_subcommand("assoc", "associativity defect on monomial triples");
    assoc->add_option("star", star_path)->required();
    assoc->add_option("--degree", degree, "bound on the total degree of a triple");
    assoc->callback([&] {
        StarProduct s = load_star(read_json_file(star_path));
        auto mons = monomials_up_to(s.chart, degree);
        std::size_t triples = 0;
        json failures = json::array();
        for (const auto &f : mons)
            for (const auto &g : mons)
                for (const auto &h : mons) {
                    if (total_degree(f) + total_degree(g) + total_degree(h) > degree)
                        continue;
                    ++triples;
                    Series d = assoc_defect(s, f, g, h);
                    if (!d.is_zero() && failures.size() < 10)
                        failures.push_back({{"f", f.str()}, {"g", g.str()}, {"h", h.str()}, {"defect", d.str()}});
                }
        emit({{"triples", triples}, {"associative", failures.empty()}, {"failures", failures}});
        code = failures.empty() ? 0 : 3;
    });
    int beta_degree = 3;
    auto *beta = star->add_subcommand("beta1", "solve the first-order gluing equations");
    beta->add_option("src", star_path)->required();
    beta->add_option("dst", dst_path)->required();
    beta->add_option("map", map_path, "{\"map\": {src coordinate: literal}, \"invertible\": [...]}")->required();
    beta->add_option("--degree", beta_degree, "exponent bound of the search space");
    beta->callback([&] {
        StarProduct src = load_star(read_json_file(star_path));
        StarProduct dst = load_star(read_json_file(dst_path));
        json m = read_json_file(map_path);
        std::vector<std::string> inv = m.value("invertible", std::vector<std::string>{});
        Ring target = dst.chart.with_invertible(inv);
        std::map<std::string, Series> phi;
        for (const auto &[k, v] : m.at("map").items())
            phi.emplace(k, parse_series(v.get<std::string>(), target));
        Beta1Solution sol = solve_beta1(src, dst, phi, target, beta_degree);
        json gauge = json::array(), periods = json::array();
        for (const auto &v : sol.gauge_kernel)
            gauge.push_back(v.str());
        for (const auto &v : sol.period_directions)
            periods.push_back(v.str());
        emit({{"beta1", sol.beta1.str()},
              {"unknowns", sol.unknowns},
              {"equations", sol.equations},
              {"kernel_dim", sol.kernel_dim},
              {"gauge_kernel", gauge},
              {"period_directions", periods}});
    });

    auto *cech = app.add_subcommand("cech", "Cech-de Rham classes");
    cech->require_subcommand(1);
    std::string atlas_path, bundle_path, scenario_path;
    auto *c1 = cech->add_subcommand("c1", "first Chern class of a line bundle");
    c1->add_option("atlas", atlas_path)->required();
    c1->add_option("bundle", bundle_path, "[{from, to, phi}] or {\"line_bundle\": [...]}")->required();
    c1->callback([&] {
        Atlas atlas = load_atlas(read_json_file(atlas_path));
        json b = read_json_file(bundle_path);
        LineBundle l = load_line_bundle(atlas, b.is_object() ? b.at("line_bundle") : b);
        ReducedClass r = class_reduce(atlas, chern_class(atlas, l));
        emit({{"c1", to_json(r)}, {"c1_K", to_json(class_reduce(atlas, chern_class(atlas, canonical_bundle(atlas))))}});
    });
    auto *obst = cech->add_subcommand("obstruction", "At and the half-canonical condition of a scenario");
    obst->add_option("scenario", scenario_path)->required();
    obst->callback([&] {
        HalfCanonical h = half_canonical_condition(load_scenario_file(scenario_path));
        emit({{"At", to_json(h.at)},
              {"c1_L", to_json(h.c1_L)},
              {"c1_K_Y", to_json(h.c1_K)},
              {"condition", to_json(h.condition)}});
    });
    auto *restrict = cech->add_subcommand("restrict", "restrictions of the supplied period forms");
    restrict->add_option("scenario", scenario_path)->required();
    restrict->callback([&] {
        Scenario s = load_scenario_file(scenario_path);
        auto normals = normal_coordinates(s);
        json out = json::array();
        for (const auto &p : s.periods) {
            ObstructionResult r = restrict_2form_class(s.atlas, normals, p.forms, p.corrections);
            ReduceOptions opts;
            opts.de_rham = true;
            out.push_back({{"index", p.index}, {"class", to_json(class_reduce(r.y_atlas, r.cls, opts))}});
        }
        emit(out);
    });

    auto *check = app.add_subcommand("check", "quantizability verdict of a scenario");
    int order = 0;
    bool as_json = false, as_text = false;
    check->add_option("scenario", scenario_path)->required();
    check->add_option("--order", order, "requested order s")->check(CLI::PositiveNumber);
    auto *jflag = check->add_flag("--json", as_json, "JSON output");
    check->add_flag("--text", as_text, "text output (default)")->excludes(jflag);
    check->callback([&] {
        Scenario s = load_scenario_file(scenario_path);
        Verdict v = run_scenario(s, order > 0 ? std::optional<int>(order) : std::nullopt);
        if (as_json)
            emit(v.to_json());
        else
            std::cout << v.text();
        code = v.exit_code();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int r = app.exit(e);
        return r == 0 ? 0 : kInvalid;
    } catch (const Error &e) {
        std::cerr << e.what() << "\n";
        return kInvalid;
    } catch (const json::exception &e) {
        std::cerr << "InvalidScenario: " << e.what() << "\n";
        return kInvalid;
    }
    return code;
}
