#include "gen.hpp"
#include "wq/cechdr.hpp"
#include "wq/parse.hpp"

#include <doctest.h>

using namespace wq;

namespace {

Series L(const std::string &text, const Ring &ring) { return parse_series(text, ring); }

Atlas p1()
{
    Atlas a;
    a.add_chart("U0", {"t"});
    a.add_chart("U1", {"s"});
    a.add_overlap(0, 1, {{"t", parse_series("s^-1")}}, {"s"});
    a.add_overlap(1, 0, {{"s", parse_series("t^-1")}}, {"t"});
    return a;
}

/// Homogeneous coordinates X0, X1, X2 with x = X1/X0, y = X2/X0; u = X0/X1, v = X2/X1; a = X0/X2, b = X1/X2.
Atlas p2()
{
    Atlas at;
    at.add_chart("U0", {"x", "y"});
    at.add_chart("U1", {"u", "v"});
    at.add_chart("U2", {"a", "b"});
    auto add = [&](int i, int j, std::map<std::string, std::string> m, std::string inv) {
        Ring r = at.ring_on(j, i).with_invertible({inv});
        Substitution s;
        for (const auto &[k, v] : m)
            s.emplace(k, parse_series(v, r));
        at.add_overlap(i, j, s, {inv});
    };
    add(0, 1, {{"x", "u^-1"}, {"y", "v u^-1"}}, "u");
    add(1, 0, {{"u", "x^-1"}, {"v", "y x^-1"}}, "x");
    add(0, 2, {{"x", "b a^-1"}, {"y", "a^-1"}}, "a");
    add(2, 0, {{"a", "y^-1"}, {"b", "x y^-1"}}, "y");
    add(1, 2, {{"u", "a b^-1"}, {"v", "b^-1"}}, "b");
    add(2, 1, {{"a", "u v^-1"}, {"b", "v^-1"}}, "v");
    return at;
}

LineBundle bundle_p1(const Atlas &a, const std::string &phi)
{
    LineBundle l;
    l.phi[{0, 1}] = L(phi, a.ring_on(0, 1));
    return l;
}

/// O(1) on P^2: phi^{ij} = X_j / X_i in chart-i coordinates.
LineBundle o1_p2(const Atlas &a)
{
    LineBundle l;
    l.phi[{0, 1}] = L("x", a.ring_on(0, 1));
    l.phi[{0, 2}] = L("y", a.ring_on(0, 2));
    l.phi[{1, 2}] = L("v", a.ring_on(1, 2));
    return l;
}

CechClass xi_class(const Atlas &a, const std::string &xi_dt)
{
    CechClass c = CechClass::zero(a);
    Ring r = a.ring_on(0, 1);
    Form f(r, 1);
    f.add_named({"t"}, L(xi_dt, r));
    c.xi[{0, 1}] = f;
    return c;
}

std::map<std::string, Rational> combine(const ReducedClass &a, const Rational &ca, const ReducedClass &b,
                                        const Rational &cb)
{
    std::map<std::string, Rational> out;
    for (const auto &[k, v] : a.coords)
        out[k] += ca * v;
    for (const auto &[k, v] : b.coords)
        out[k] += cb * v;
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

/// T*P^1 with charts (t, p) and (s, q).
struct TP1 {
    Atlas atlas;
    std::vector<StarProduct> stars{moyal(2, {"t"}, {"p"}), moyal(2, {"s"}, {"q"})};
    std::vector<std::vector<std::string>> normals{{"p"}, {"q"}};
    std::vector<Form> omega;

    TP1()
    {
        atlas.add_chart("U0", {"t", "p"});
        atlas.add_chart("U1", {"s", "q"});
        Ring r1 = Ring({"s", "q"}, {true, false}), r0 = Ring({"t", "p"}, {true, false});
        atlas.add_overlap(0, 1, {{"t", L("s^-1", r1)}, {"p", L("-s^2 q", r1)}}, {"s"});
        atlas.add_overlap(1, 0, {{"s", L("t^-1", r0)}, {"q", L("-t^2 p", r0)}}, {"t"});
        omega.push_back(canonical_form(atlas.chart_ring(0), {"t"}, {"p"}));
        omega.push_back(canonical_form(atlas.chart_ring(1), {"s"}, {"q"}));
    }

    ObstructionInput input(const VectorField &beta) const
    {
        return ObstructionInput{atlas, stars, {{{0, 1}, beta}}, normals, omega};
    }
};

} // namespace

TEST_CASE("atlas cocycle checks")
{
    CHECK_NOTHROW(p1().verify());
    CHECK_NOTHROW(p2().verify());
    Atlas bad;
    bad.add_chart("U0", {"t"});
    bad.add_chart("U1", {"s"});
    bad.add_overlap(0, 1, {{"t", parse_series("s^-1")}}, {"s"});
    bad.add_overlap(1, 0, {{"s", parse_series("2 t^-1")}}, {"t"});
    try {
        bad.verify();
        FAIL("expected NotCocycle");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotCocycle);
    }
    Atlas four;
    four.add_chart("A", {"x"});
    four.add_chart("B", {"y"});
    four.add_chart("C", {"z"});
    CHECK_THROWS_AS(four.add_chart("D", {"w"}), Error);
}

TEST_CASE("chern classes on the projective line")
{
    Atlas a = p1();
    CHECK(class_reduce(a, chern_class(a, LineBundle::trivial(a))).is_zero());
    for (int d = -4; d <= 4; ++d) {
        Series phi = power(L("t", a.ring_on(0, 1)), d);
        LineBundle l;
        l.phi[{0, 1}] = phi;
        CechClass c = chern_class(a, l);
        CHECK(c.xi.at({0, 1}) == Rational(d) * xi_class(a, "t^-1").xi.at({0, 1}));
        CHECK(class_reduce(a, c).scalar() == d);
    }
    LineBundle k = canonical_bundle(a);
    CHECK(k.phi.at({0, 1}) == L("-t^-2", a.ring_on(0, 1)));
    CHECK(class_reduce(a, chern_class(a, k)).scalar() == -2);
    ReducedClass one = class_reduce(a, chern_class(a, bundle_p1(a, "t")));
    CHECK(one.coords.size() == 1);
    CHECK(one.coords.begin()->first == "xi[U0,U1] t^-1 dt");
}

TEST_CASE("property: chern_class is additive")
{
    Atlas a = p1();
    gen::Rng rng(121);
    ReduceOptions opts;
    opts.degree = 3;
    for (int t = 0; t < 20; ++t) {
        LineBundle l, m;
        l.phi[{0, 1}] = Series::monomial(a.ring_on(0, 1), Monomial{{rng.uniform(-3, 3)}, 0}, rng.rational());
        m.phi[{0, 1}] = Series::monomial(a.ring_on(0, 1), Monomial{{rng.uniform(-3, 3)}, 0}, rng.rational());
        ReducedClass lm = class_reduce(a, chern_class(a, l.tensor(a, m)), opts);
        CHECK(lm.coords == combine(class_reduce(a, chern_class(a, l), opts), 1,
                                   class_reduce(a, chern_class(a, m), opts), 1));
    }
}

TEST_CASE("chern classes on the projective plane")
{
    Atlas a = p2();
    LineBundle o1 = o1_p2(a);
    CHECK_NOTHROW(o1.verify(a));
    ReduceOptions opts;
    opts.degree = 3;
    ReducedClass h = class_reduce(a, chern_class(a, o1), opts);
    CHECK(!h.is_zero());
    ReducedClass k = class_reduce(a, chern_class(a, canonical_bundle(a)), opts);
    CHECK(k.coords == combine(h, -3, h, 0));
    ReducedClass o2 = class_reduce(a, chern_class(a, o1.tensor(a, o1)), opts);
    CHECK(o2.coords == combine(h, 2, h, 0));
    CHECK(class_reduce(a, chern_class(a, o1.power(a, 3).tensor(a, canonical_bundle(a))), opts).is_zero());

    LineBundle broken = o1;
    broken.phi[{1, 2}] = L("2 v", a.ring_on(1, 2));
    try {
        broken.verify(a);
        FAIL("expected NotCocycle");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotCocycle);
    }
}

TEST_CASE("class_reduce examples")
{
    Atlas a = p1();
    CHECK(class_reduce(a, xi_class(a, "t^-1")).scalar() == 1);
    CHECK(class_reduce(a, xi_class(a, "1")).is_zero());
    CHECK(class_reduce(a, xi_class(a, "3 t^2 - t^-3 + 5 t^-1")).scalar() == 5);

    // xi = theta^0 - theta^1 with theta^0 = t^2 dt, theta^1 = s ds.
    CechClass cob = CechClass::zero(a);
    Form th0(a.chart_ring(0), 1), th1(a.chart_ring(1), 1);
    th0.add_named({"t"}, L("t^2", a.chart_ring(0)));
    th1.add_named({"s"}, L("s", a.chart_ring(1)));
    cob.xi[{0, 1}] = th0.embed(a.ring_on(0, 1)) - a.transport(th1, 1, 0);
    CHECK(class_reduce(a, cob).is_zero());

    // On P^2 a lone xi^{01} violates the triple cocycle condition.
    Atlas b = p2();
    CechClass bad = CechClass::zero(b);
    bad.xi[{0, 1}].add_named({"x"}, L("1", b.ring_on(0, 1)));
    try {
        (void)class_reduce(b, bad);
        FAIL("expected NotAClass");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotAClass);
    }
}

TEST_CASE("property: class_reduce is idempotent and linear")
{
    Atlas a = p1();
    gen::Rng rng(131);
    ReduceOptions opts;
    opts.degree = 4;
    auto random_xi = [&]() {
        Series s(a.ring_on(0, 1));
        for (int k = 0; k < 3; ++k)
            s.add_term(Monomial{{rng.uniform(-4, 2)}, 0}, rng.rational());
        CechClass c = CechClass::zero(a);
        Form f(a.ring_on(0, 1), 1);
        f.add_named({"t"}, s);
        c.xi[{0, 1}] = f;
        return c;
    };
    for (int t = 0; t < 20; ++t) {
        CechClass x = random_xi(), y = random_xi();
        Rational c = rng.rational();
        ReducedClass rx = class_reduce(a, x, opts), ry = class_reduce(a, y, opts);
        CHECK(class_reduce(a, rx.residual, opts) == rx);
        CHECK(class_reduce(a, x + c * y, opts).coords == combine(rx, 1, ry, c));
    }
    Atlas b = p2();
    for (int t = 0; t < 5; ++t) {
        LineBundle l;
        l.phi[{0, 1}] = L("x", b.ring_on(0, 1));
        l.phi[{0, 2}] = L("y", b.ring_on(0, 2));
        l.phi[{1, 2}] = L("v", b.ring_on(1, 2));
        ReduceOptions o;
        o.degree = 3;
        ReducedClass r = class_reduce(b, chern_class(b, l.power(b, rng.uniform(-2, 2))), o);
        CHECK(class_reduce(b, r.residual, o) == r);
    }
}

TEST_CASE("obstruction class: single chart")
{
    Atlas a;
    a.add_chart("U", {"q", "p"});
    Ring r = a.chart_ring(0);
    ObstructionInput in{a, {moyal(2, {"q"}, {"p"})}, {}, {{"p"}}, {canonical_form(r, {"q"}, {"p"})}};
    ObstructionResult res = obstruction_class(in);
    CHECK(res.cls.eta[0].is_zero());
    CHECK(class_reduce(res.y_atlas, res.cls).is_zero());

    // Two pairs: symmetric additions to alpha_2 leave eta zero, antisymmetric ones do not.
    Atlas b;
    b.add_chart("U", {"q1", "q2", "p1", "p2"});
    Ring rb = b.chart_ring(0);
    StarProduct s = moyal(2, {"q1", "q2"}, {"p1", "p2"});
    BidiffOp extra(s.chart);
    extra.add({0, 0, 1, 0}, {0, 0, 0, 1}, L("q1 + 2", rb));
    extra.add({0, 1, 0, 0}, {0, 0, 2, 0}, L("q2", rb));
    StarProduct sym = s;
    sym.alphas[1] += extra + extra.transposed();
    ObstructionInput in2{b, {sym}, {}, {{"p1", "p2"}}, {canonical_form(rb, {"q1", "q2"}, {"p1", "p2"})}};
    CHECK(obstruction_class(in2).cls.eta[0].is_zero());

    StarProduct skew = s;
    skew.alphas[1] += Rational(3) * extra;
    in2.stars = {skew};
    ObstructionResult r2 = obstruction_class(in2);
    // A(p1, p2) = 3(q1 + 2) and i_{d/dp_k} omega = -dq_k on Y.
    Form expect(r2.y_atlas.chart_ring(0), 2);
    expect.add_named({"q1", "q2"}, L("3 q1 + 6", r2.y_atlas.chart_ring(0)));
    CHECK(r2.cls.eta[0] == expect);
    CHECK(class_reduce(r2.y_atlas, r2.cls).is_zero());

    StarProduct unnormalized = s;
    unnormalized.alphas[0] = s.poisson();
    in2.stars = {unnormalized};
    try {
        (void)obstruction_class(in2);
        FAIL("expected NotWeylNormalized");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotWeylNormalized);
    }
    in2.stars = {s};
    in2.normals = {{"q1", "p1"}};
    try {
        (void)obstruction_class(in2);
        FAIL("expected NotLagrangian");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotLagrangian);
    }
}

TEST_CASE("obstruction class on the cotangent bundle of the projective line")
{
    TP1 x;
    Ring target = x.atlas.ring_on(1, 0);
    Beta1Solution sol = solve_beta1(x.stars[0], x.stars[1], x.atlas.map(0, 1), target);
    REQUIRE(sol.gauge_kernel.size() >= 5);
    ObstructionResult base = obstruction_class(x.input(sol.beta1));
    ReducedClass r0 = class_reduce(base.y_atlas, base.cls);
    CHECK(r0.scalar() == 0);

    gen::Rng rng(141);
    for (int g = 0; g < 8; ++g) {
        VectorField beta = sol.beta1;
        for (const auto &k : sol.gauge_kernel)
            if (rng.coin())
                beta += rng.rational() * k;
        ObstructionResult res = obstruction_class(x.input(beta));
        CHECK(class_reduce(res.y_atlas, res.cls).scalar() == r0.scalar());
    }

    // s^-1 d/dq is symplectic but not Hamiltonian: it shifts the class by dt/t.
    VectorField period = VectorField::zero(target);
    period.comps[1] = L("s^-1", target);
    ObstructionResult shifted = obstruction_class(x.input(sol.beta1 + period));
    CHECK(class_reduce(shifted.y_atlas, shifted.cls).scalar() == 1);

    // Relabeled atlas: U1 first, transition supplied in the reverse direction.
    Atlas swapped;
    swapped.add_chart("U1", {"s", "q"});
    swapped.add_chart("U0", {"t", "p"});
    swapped.add_overlap(1, 0, x.atlas.map(0, 1), {"s"});
    swapped.add_overlap(0, 1, x.atlas.map(1, 0), {"t"});
    ObstructionInput in{swapped, {x.stars[1], x.stars[0]}, {{{1, 0}, sol.beta1 + period}}, {{"q"}, {"p"}},
                        {x.omega[1], x.omega[0]}};
    ObstructionResult rel = obstruction_class(in);
    // xi^{U1,U0} = -dt/t = ds/s, so the normalized coordinate is unchanged.
    CHECK(class_reduce(rel.y_atlas, rel.cls).coords.begin()->first == "xi[U1,U0] s^-1 ds");
    CHECK(class_reduce(rel.y_atlas, rel.cls).scalar() == 1);
}

TEST_CASE("obstruction gluing with a constant alpha_2 perturbation")
{
    // Cotangent bundle of P^1 x A^1; chart U0 carries alpha_2 + c d_p (x) d_r.
    Atlas x;
    x.add_chart("U0", {"t", "u", "p", "r"});
    x.add_chart("U1", {"s", "w", "q", "z"});
    Ring r1 = Ring({"s", "w", "q", "z"}, {true, false, false, false});
    Ring r0 = Ring({"t", "u", "p", "r"}, {true, false, false, false});
    x.add_overlap(0, 1, {{"t", L("s^-1", r1)}, {"u", L("w", r1)}, {"p", L("-s^2 q", r1)}, {"r", L("z", r1)}}, {"s"});
    x.add_overlap(1, 0, {{"s", L("t^-1", r0)}, {"w", L("u", r0)}, {"q", L("-t^2 p", r0)}, {"z", L("r", r0)}}, {"t"});
    StarProduct s0 = moyal(2, {"t", "u"}, {"p", "r"});
    StarProduct s1 = moyal(2, {"s", "w"}, {"q", "z"});
    s0.alphas[1].add({0, 0, 1, 0}, {0, 0, 0, 1}, Series::constant(s0.chart, Rational(5, 2)));
    Beta1Solution sol = solve_beta1(s0, s1, x.map(0, 1), x.ring_on(1, 0));
    CHECK(!sol.beta1.is_zero());
    std::vector<Form> omega{canonical_form(x.chart_ring(0), {"t", "u"}, {"p", "r"}),
                            canonical_form(x.chart_ring(1), {"s", "w"}, {"q", "z"})};
    ObstructionInput in{x, {s0, s1}, {{{0, 1}, sol.beta1}}, {{"p", "r"}, {"q", "z"}}, omega};
    ObstructionResult res = obstruction_class(in); // verifies eta^0 - eta^1 = d xi^{01}
    Form expect(res.y_atlas.chart_ring(0), 2);
    expect.add_named({"t", "u"}, Series::constant(res.y_atlas.chart_ring(0), Rational(5, 2)));
    CHECK(res.cls.eta[0] == expect);
    CHECK(res.cls.eta[1].is_zero());

    ReducedClass r = class_reduce(res.y_atlas, res.cls);
    gen::Rng rng(151);
    for (int g = 0; g < 5 && !sol.gauge_kernel.empty(); ++g) {
        VectorField beta = sol.beta1;
        for (const auto &k : sol.gauge_kernel)
            if (rng.uniform(0, 3) == 0)
                beta += rng.rational() * k;
        in.beta1 = {{{0, 1}, beta}};
        ObstructionResult rg = obstruction_class(in);
        CHECK(class_reduce(rg.y_atlas, rg.cls) == r);
    }

    // Flipping the sign of xi breaks the gluing identity.
    CechClass flipped = res.cls;
    flipped.xi[{0, 1}] = Rational(-1) * flipped.xi[{0, 1}];
    CHECK_THROWS_AS(verify_class(res.y_atlas, flipped), Error);
}

TEST_CASE("restrict_2form_class")
{
    TP1 x;
    std::vector<Form> zero{Form(x.atlas.chart_ring(0), 2), Form(x.atlas.chart_ring(1), 2)};
    ObstructionResult z = restrict_2form_class(x.atlas, x.normals, zero);
    CHECK(class_reduce(z.y_atlas, z.cls, {-1, true}).is_zero());

    ObstructionResult om = restrict_2form_class(x.atlas, x.normals, x.omega);
    CHECK(om.cls.eta[0].is_zero());
    CHECK(class_reduce(om.y_atlas, om.cls, {-1, true}).is_zero());

    // w = d(p dt) glues with lambda = 0.
    Form pdt(x.atlas.chart_ring(0), 1);
    pdt.add_named({"t"}, L("p", x.atlas.chart_ring(0)));
    Form qds(x.atlas.chart_ring(1), 1);
    qds.add_named({"s"}, L("q", x.atlas.chart_ring(1)));
    std::vector<Form> exact{exterior_d(pdt), exterior_d(qds)};
    ObstructionResult ex = restrict_2form_class(x.atlas, x.normals, exact, std::map<Pair, Form>{});
    CHECK(class_reduce(ex.y_atlas, ex.cls, {-1, true}).is_zero());

    // A logarithmic overlap correction carries the period.
    Ring r = x.atlas.ring_on(0, 1);
    Form dlog(r, 1);
    dlog.add_named({"t"}, L("t^-1", r));
    ObstructionResult per = restrict_2form_class(x.atlas, x.normals, zero, std::map<Pair, Form>{{{0, 1}, dlog}});
    CHECK(class_reduce(per.y_atlas, per.cls, {-1, true}).scalar() == 1);
    Form dt(r, 1);
    dt.add_named({"t"}, L("t^-3 + 4 t", r));
    ObstructionResult ex2 = restrict_2form_class(x.atlas, x.normals, zero, std::map<Pair, Form>{{{0, 1}, dt}});
    CHECK(class_reduce(ex2.y_atlas, ex2.cls, {-1, true}).is_zero());

    Form tdp(r, 1);
    tdp.add_named({"p"}, L("t", r));
    try {
        (void)restrict_2form_class(x.atlas, x.normals, zero, std::map<Pair, Form>{{{0, 1}, tdp}});
        FAIL("expected NoPrimitive");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NoPrimitive);
    }

    Atlas b;
    b.add_chart("U", {"q1", "q2", "p1", "p2"});
    Form open(b.chart_ring(0), 2);
    open.add_named({"q2", "p1"}, L("q1", b.chart_ring(0)));
    try {
        (void)restrict_2form_class(b, {{"p1", "p2"}}, {open});
        FAIL("expected NotClosed");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NotClosed);
    }
}

TEST_CASE("obstruction class under a linear symplectic change of chart coordinates")
{
    // U1 coordinates rescaled by (s, q) -> (2 s, q / 2), which fixes Y = {q = 0}.
    TP1 x;
    Atlas a;
    a.add_chart("U0", {"t", "p"});
    a.add_chart("U1", {"s", "q"});
    Ring r1 = Ring({"s", "q"}, {true, false}), r0 = Ring({"t", "p"}, {true, false});
    a.add_overlap(0, 1, {{"t", L("2 s^-1", r1)}, {"p", L("-1/2 s^2 q", r1)}}, {"s"});
    a.add_overlap(1, 0, {{"s", L("2 t^-1", r0)}, {"q", L("-1/2 t^2 p", r0)}}, {"t"});
    a.verify();

    Ring target = a.ring_on(1, 0);
    Beta1Solution sol = solve_beta1(x.stars[0], x.stars[1], a.map(0, 1), target);
    ObstructionInput in{a, x.stars, {{{0, 1}, sol.beta1}}, x.normals, x.omega};
    ObstructionResult res = obstruction_class(in);
    CHECK(class_reduce(res.y_atlas, res.cls).is_zero());
    CHECK(class_reduce(res.y_atlas, chern_class(res.y_atlas, canonical_bundle(res.y_atlas))).scalar() == -2);

    // s_old^-1 d/dq_old is s^-1 d/dq in the new coordinates; the shift is still 1.
    VectorField period = VectorField::zero(target);
    period.comps[1] = L("s^-1", target);
    in.beta1 = {{{0, 1}, sol.beta1 + period}};
    ObstructionResult shifted = obstruction_class(in);
    CHECK(class_reduce(shifted.y_atlas, shifted.cls).scalar() == 1);

    gen::Rng rng(151);
    for (int g = 0; g < 5; ++g) {
        VectorField beta = sol.beta1 + period;
        for (const auto &k : sol.gauge_kernel)
            if (rng.coin())
                beta += rng.rational() * k;
        in.beta1 = {{{0, 1}, beta}};
        ObstructionResult r = obstruction_class(in);
        CHECK(class_reduce(r.y_atlas, r.cls).scalar() == 1);
    }
}
