#include <random>

#include "doctest.h"
#include "mbseries/convergence.hpp"
#include "support.hpp"

using namespace mb;
using testsupport::data;

namespace {

Poly idx(std::initializer_list<std::pair<std::vector<int>, int>> terms) {
    Poly p;
    p.n = 2;
    for (auto& [e, c] : terms) p.terms[e] = c;
    return p;
}

RationalFunction ratio(Poly a, Poly b) { return {std::move(a), std::move(b)}; }

IndexedFamily find_family(const MBSpec& spec, const Cone& cone, const std::string& name) {
    for (auto& f : intersection_families(spec, cone))
        if (f.str() == name) return f;
    FAIL("family " << name << " not found");
    return {};
}

struct GridStats {
    int checked = 0;
    int mismatched = 0;
    int inside = 0;
};

// 100 x 100 grid over (0, 3]^2; points within `band` of the closed-form
// boundary are skipped
GridStats compare_grid(const RegionPredicate& got, const testsupport::Pred2& want, const std::string& a,
                       const std::string& b, std::map<std::string, double> fixed = {}, double band = 0.02) {
    GridStats s;
    for (int i = 1; i <= 100; ++i)
        for (int j = 1; j <= 100; ++j) {
            double x = 0.03 * i, y = 0.03 * j;
            if (!testsupport::stable(want, x, y, band)) continue;
            auto mags = fixed;
            mags[a] = x;
            mags[b] = y;
            bool w = want(x, y);
            ++s.checked;
            s.inside += w;
            if (got.contains(mags) != w) ++s.mismatched;
        }
    return s;
}

}  // namespace

TEST_SUITE("convergence") {

TEST_CASE("Horn ratios of the R-1 cone series") {
    auto spec = load_spec(data("R-1.json"));
    auto cones = enumerate_cones(spec);
    auto h = horn_functions(gamma_ratio_term(spec, find_family(spec, cones[0], "(1+m,1+n)")));
    REQUIRE(h.F.size() == 2);
    Poly m = idx({{{1, 0}, 1}}), n = idx({{{0, 1}, 1}}), mn = idx({{{1, 0}, 1}, {{0, 1}, 1}});
    CHECK(h.F[0].equals(ratio(mn, m)));
    CHECK(h.F[1].equals(ratio(mn, n)));
    CHECK_FALSE(h.F[0].equals(ratio(mn, n)));

    // reference cone 4
    auto c4 = cones[testsupport::local_id(testsupport::kR1Ref, 4) - 1];
    auto h4 = horn_functions(gamma_ratio_term(spec, find_family(spec, c4, "(1+m+n,-1-n)")));
    CHECK(h4.F[0].equals(ratio(m, mn)));
    CHECK(h4.F[1].equals(ratio(idx({{{0, 1}, -1}}), mn)));
}

TEST_CASE("degenerate integrals have balanced Horn ratios") {
    auto spec = load_spec(data("R-1.json"));
    auto h = horn_functions(gamma_ratio_term(spec, find_family(spec, enumerate_cones(spec)[0], "(1+m,1+n)")));
    CHECK(h.degrees[0].first == h.degrees[0].second);
    CHECK(h.degrees[1].first == h.degrees[1].second);
}

TEST_CASE("Horn ratios need integral steps and at least one index") {
    GammaTerm t;
    t.arity = 1;
    t.factors.push_back({RVec{Rational(1, 2)}, EpsAffine(Rational(1)), 1, true});
    CHECK_FALSE(t.integral());
    CHECK_THROWS_AS(horn_functions(t), MathError);

    auto spec = load_spec(data("R-1.json"));
    auto point = gamma_ratio_term(spec, find_family(spec, enumerate_cones(spec)[0], "(0,0)"));
    CHECK_THROWS_AS(horn_functions(point), MathError);
}

TEST_CASE("region grids agree with closed forms for R-1") {
    auto spec = load_spec(data("R-1.json"));
    auto cones = enumerate_cones(spec);
    auto ref = testsupport::r1_regions();
    for (int id = 1; id <= 5; ++id) {
        CAPTURE(id);
        auto s = compare_grid(convergence_region(spec, cones[id - 1]), ref[testsupport::kR1Ref[id - 1] - 1], "u1", "u2");
        CHECK(s.mismatched == 0);
        CHECK(s.inside > 0);
        CHECK(s.checked > 9000);
    }
}

TEST_CASE("region grids agree with closed forms for R-1-z1 at u3 = 1") {
    auto spec = load_spec(data("R-1-z1.json"));
    auto cones = enumerate_cones(spec);
    auto ref = testsupport::r1z1_regions();
    for (int id = 1; id <= 5; ++id) {
        CAPTURE(id);
        auto s = compare_grid(convergence_region(spec, cones[id - 1]), ref[testsupport::kR1z1Ref[id - 1] - 1], "u1",
                              "u2", {{"u3", 1.0}});
        CHECK(s.mismatched == 0);
        // reference cone 5 lies beyond u1 = 3 at u3 = 1
        if (testsupport::kR1z1Ref[id - 1] == 5)
            CHECK(convergence_region(spec, cones[id - 1]).contains({{"u1", 50.0}, {"u2", 5.0}, {"u3", 1.0}}));
        else
            CHECK(s.inside > 0);
    }
}

TEST_CASE("region grids agree with closed forms for the box") {
    auto spec = load_spec(data("box.json"));
    auto cones = enumerate_cones(spec);
    auto ref = testsupport::box_regions();
    for (int id = 1; id <= 5; ++id) {
        CAPTURE(id);
        auto s = compare_grid(convergence_region(spec, cones[id - 1]), ref[testsupport::kBoxRef[id - 1] - 1], "x", "y");
        CHECK(s.mismatched == 0);
        CHECK(s.inside > 0);
    }
}

TEST_CASE("Kampe de Feriet recognition") {
    auto r1 = load_spec(data("R-1.json"));
    auto reg = convergence_region(r1, enumerate_cones(r1)[0]);
    REQUIRE(reg.recognized_form);
    auto strs = reg.recognized_strings();
    CHECK(std::find(strs.begin(), strs.end(), "|u1| + |u2| < 1") != strs.end());

    auto phi = load_spec(data("phi.json"));
    auto pr = convergence_region(phi, enumerate_cones(phi)[0]);
    REQUIRE(pr.recognized_form);
    CHECK(pr.recognized_strings() == std::vector<std::string>{"|t1| + |t2| < 1"});

    // quadratic Horn ratios are outside the recognised class
    auto z1 = load_spec(data("R-1-z1.json"));
    CHECK_FALSE(convergence_region(z1, enumerate_cones(z1)[0]).recognized_form.has_value());
}

TEST_CASE("recognised forms agree with the swept regions") {
    for (auto name : {"R-1.json", "phi.json"}) {
        auto spec = load_spec(data(name));
        for (auto& c : enumerate_cones(spec)) {
            auto reg = convergence_region(spec, c);
            if (!reg.recognized_form) continue;
            auto swept = reg;
            swept.recognized_form.reset();
            const auto& names = spec.parameters;
            int mismatched = 0;
            for (int i = 1; i <= 60; ++i)
                for (int j = 1; j <= 60; ++j) {
                    std::map<std::string, double> m{{names[0].name, 0.05 * i}, {names[1].name, 0.05 * j}};
                    bool a = reg.contains(m);
                    // skip the boundary band
                    bool edge = false;
                    for (int k = 0; k < 8 && !edge; ++k) {
                        auto mm = m;
                        mm[names[0].name] += 0.02 * std::cos(k * M_PI / 4);
                        mm[names[1].name] += 0.02 * std::sin(k * M_PI / 4);
                        edge = reg.contains(mm) != a;
                    }
                    if (!edge && swept.contains(m) != a) ++mismatched;
                }
            CHECK(mismatched == 0);
        }
    }
}

TEST_CASE("three-fold toy region") {
    auto spec = load_spec(data("toy3.json"));
    auto cones = enumerate_cones(spec);
    auto reg = convergence_region(spec, cones[0]);
    REQUIRE(reg.recognized_form);
    CHECK(reg.recognized_strings() == std::vector<std::string>{"|u1|^(1/2) + |u2|^(1/2) + |u3|^(1/2) < 1"});
    auto swept = reg;
    swept.recognized_form.reset();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(0.0, 0.7);
    int tested = 0, inside = 0;
    for (int k = 0; k < 400; ++k) {
        double ra = d(rng), rb = d(rng), rc = d(rng);
        double a = ra * ra, b = rb * rb, c = rc * rc;
        double lhs = ra + rb + rc;
        if (std::abs(lhs - 1) < 0.02) continue;
        std::map<std::string, double> m{{"u1", a}, {"u2", b}, {"u3", c}};
        ++tested;
        inside += lhs < 1;
        CHECK(swept.contains(m) == (lhs < 1));
    }
    CHECK(inside > 40);
    CHECK(tested > 350);
}

TEST_CASE("sweep refinement does not move the boundary") {
    auto spec = load_spec(data("R-1-z1.json"));
    auto cones = enumerate_cones(spec);
    for (auto& f : intersection_families(spec, cones[2])) {
        if (f.spurious) continue;
        auto term = gamma_ratio_term(spec, f);
        FamilyRegion coarse(term, 512), fine(term, 4096);
        int diff = 0, total = 0;
        for (int i = 1; i <= 40; ++i)
            for (int j = 1; j <= 40; ++j) {
                std::map<std::string, double> m{{"u1", 0.2 * i}, {"u2", 0.2 * j}, {"u3", 1.0}};
                ++total;
                diff += coarse.contains(m) != fine.contains(m);
            }
        CHECK(diff <= total / 200);
    }
}

TEST_CASE("onefold classification") {
    auto z0 = onefold_classify(load_spec(data("z0.json")));
    CHECK(z0.delta == Rational(-1));
    CHECK(z0.alpha == Rational(3));
    CHECK(z0.left_verdict == "divergent_asymptotic");
    CHECK(z0.right_verdict == "convergent_everywhere");
    CHECK_FALSE(z0.disk_radius.has_value());

    auto al = onefold_classify(load_spec(data("aL.json")));
    CHECK(al.delta == Rational(0));
    CHECK(al.alpha == Rational(4));
    CHECK(al.left_verdict == "convergent_inside_disk");
    CHECK(al.right_verdict == "convergent_outside_disk");
    REQUIRE(al.disk_radius.has_value());
    CHECK(*al.disk_radius == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(al.right_region.contains({{"r", 4.0}}));
    CHECK_FALSE(al.right_region.contains({{"r", 0.5}}));
    CHECK(al.left_region.contains({{"r", 0.5}}));

    CHECK_THROWS_AS(onefold_classify(load_spec(data("R-1.json"))), SpecError);
}

}
