#include <algorithm>

#include "doctest.h"
#include "mbseries/residue.hpp"
#include "support.hpp"

using namespace mb;
using testsupport::data;
using P = std::pair<double, double>;

namespace {

std::vector<std::vector<std::string>> listings(const MBSpec& spec) {
    std::vector<std::vector<std::string>> out;
    for (auto& c : enumerate_cones(spec)) {
        std::vector<std::string> cs;
        for (auto& h : c.constraints) cs.push_back(h.canonical(spec.variables));
        std::sort(cs.begin(), cs.end());
        out.push_back(cs);
    }
    return out;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("delta vectors and degeneracy") {
    auto r1 = delta_vector(load_spec(data("R-1.json")));
    CHECK(r1.components == IVec{0, 0});
    CHECK(r1.classification == DeltaVector::Kind::degenerate);
    auto z0 = delta_vector(load_spec(data("z0.json")));
    CHECK(z0.components == IVec{-1});
    CHECK(z0.alpha == 3);
    auto al = delta_vector(load_spec(data("aL.json")));
    CHECK(al.components == IVec{0});
    CHECK(al.alpha == 4);
}

TEST_CASE("fundamental polytopes") {
    auto box = load_spec(data("box.json"));
    CHECK(sorted({"z1 < 0", "z2 < -1+eps", "z1 + z2 > -1"}) ==
          [&] {
              std::vector<std::string> v;
              for (auto& h : fundamental_polytope(box)) v.push_back(h.canonical(box.variables));
              return sorted(v);
          }());
    auto c = polytope_centroid(box, default_setting(box));
    REQUIRE(c);
    CHECK((*c)[0] == EpsAffine(Rational(0), Rational(-1, 3)));
    CHECK((*c)[1] == EpsAffine(Rational(-1), Rational(2, 3)));

    auto toy = load_spec(data("toy3.json"));
    std::vector<std::string> v;
    for (auto& h : fundamental_polytope(toy)) v.push_back(h.canonical(toy.variables));
    CHECK(sorted(v) == sorted({"s < 0", "t < 0", "u < 0", "s + t + u > -1"}));

    // at eps = 0 the triangle collapses onto the pole (0, -1)
    CHECK((*c)[0].at(0) == 0.0);
    CHECK((*c)[1].at(0) == -1.0);
}

TEST_CASE("cone listings of R-1 and the toy integral") {
    auto r1 = load_spec(data("R-1.json"));
    auto got = listings(r1);
    REQUIRE(got.size() == 5);
    // reference order 1..5
    std::vector<std::vector<std::string>> ref{{"z1 > 0", "z2 > 0"},
                                              {"z1 < -1", "z2 > 0"},
                                              {"z1 + z2 < -1", "z2 < -1"},
                                              {"z1 > 0", "z2 < -1"},
                                              {"z1 + z2 < -1", "z1 < -1"}};
    for (int r = 1; r <= 5; ++r)
        CHECK(got[testsupport::local_id(testsupport::kR1Ref, r) - 1] == sorted(ref[r - 1]));

    auto toy = load_spec(data("toy3.json"));
    auto tc = listings(toy);
    REQUIRE(tc.size() == 4);
    std::vector<std::vector<std::string>> tref{{"s > 0", "t > 0", "u > 0"},
                                               {"s + t + u < -1", "s > 0", "t > 0"},
                                               {"s + t + u < -1", "s > 0", "u > 0"},
                                               {"s + t + u < -1", "t > 0", "u > 0"}};
    for (auto& want : tref) CHECK(std::find(tc.begin(), tc.end(), sorted(want)) != tc.end());
}

TEST_CASE("cone listings of R-1-z1 and the box") {
    auto z1 = listings(load_spec(data("R-1-z1.json")));
    std::vector<std::vector<std::string>> z1ref{{"z1 > 0", "z2 > 0"},
                                                {"z1 < -1", "z2 > 0"},
                                                {"z1 + z2 < -1", "z1 < -1"},
                                                {"z1 + z2 < -1", "z1 - z2 > 0"},
                                                {"z1 - z2 > 0", "z1 > 0"}};
    REQUIRE(z1.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(z1[i] == sorted(z1ref[i]));

    auto box = listings(load_spec(data("box.json")));
    std::vector<std::vector<std::string>> bref{{"z1 > 0", "z1 + z2 > -1+eps"},
                                               {"z1 + z2 > -1+eps", "z2 > -1+eps"},
                                               {"z1 + z2 < -1", "z2 > -1+eps"},
                                               {"z1 + z2 < -1", "z2 < -1"},
                                               {"z1 > 0", "z2 < -1"}};
    REQUIRE(box.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(box[i] == sorted(bref[i]));
}

TEST_CASE("family point sets match the listed singular types") {
    const int n = 12;
    const double w = 6;
    auto r1 = load_spec(data("R-1.json"));
    auto cones = enumerate_cones(r1);
    auto fam = [&](const MBSpec& s, int id) { return intersection_families(s, enumerate_cones(s)[id - 1]); };

    // R-1, reference cone 1
    auto want1 = testsupport::listing({[](int m, int k) { return P{1 + m, 1 + k}; }, [](int, int) { return P{0, 0}; },
                                       [](int m, int) { return P{1 + m, 0}; }, [](int m, int) { return P{0, 1 + m}; }},
                                      n, w);
    CHECK(testsupport::point_set(fam(r1, 1), n, 0, w) == want1);
    // R-1, reference cone 3
    auto want3 = testsupport::listing({[](int m, int k) { return P{-1 - m, -1 - k}; },
                                       [](int m, int) { return P{0, -1 - m}; },
                                       [](int m, int k) { return P{1 + m, -2 - m - k}; }},
                                      n, w);
    CHECK(testsupport::point_set(fam(r1, testsupport::local_id(testsupport::kR1Ref, 3)), n, 0, w) == want3);

    // R-1-z1, reference cone 1
    auto z1 = load_spec(data("R-1-z1.json"));
    auto wz = testsupport::listing({[](int m, int k) { return P{1 + m, 2 + m + k}; },
                                    [](int m, int) { return P{1 + m, 0}; },
                                    [](int m, int k) { return P{1 + m + k, 1 + k}; },
                                    [](int m, int) { return P{0, 1 + m}; }, [](int, int) { return P{0, 0}; }},
                                   n, w);
    CHECK(testsupport::point_set(fam(z1, 1), n, 0, w) == wz);

    // box at eps = 0.3, reference cones 1 and 2
    auto box = load_spec(data("box.json"));
    const double e = 0.3;
    auto wb1 = testsupport::listing({[&](int k, int m) { return P{k, m - 1 + e}; }, [](int k, int m) { return P{k, m}; },
                                     [&](int k, int m) { return P{e + k + m, -1 - m}; },
                                     [&](int k, int m) { return P{1 + k + m, -2 - k + e}; }},
                                    n, w);
    CHECK(testsupport::point_set(fam(box, 1), n, e, w) == wb1);
    auto wb2 = testsupport::listing({[&](int k, int m) { return P{-m - e - k, m - 1 + e}; },
                                     [](int k, int m) { return P{-1 - m - k, m}; },
                                     [&](int k, int m) { return P{-2 - k - m + e, m}; },
                                     [&](int k, int m) { return P{-1 - m - k, m - 1 + e}; }},
                                    n, w);
    CHECK(testsupport::point_set(fam(box, testsupport::local_id(testsupport::kBoxRef, 2)), n, e, w) == wb2);
}

TEST_CASE("spurious families") {
    const int n = 12;
    const double w = 6;
    auto z1 = load_spec(data("R-1-z1.json"));
    auto zc = enumerate_cones(z1);
    auto spur = [&](const MBSpec& s, const Cone& c, double eps) {
        return testsupport::point_set(intersection_families(s, c), n, eps, w, true);
    };
    auto half1 = testsupport::listing({[](int m, int k) { return P{0.5 + k, -1.5 - m - k}; }}, n, w);
    auto half2 = testsupport::listing({[](int m, int k) { return P{-1.5 - m, -1.5 - m - k}; }}, n, w);
    using testsupport::kR1z1Ref;
    using testsupport::local_id;
    CHECK(spur(z1, zc[local_id(kR1z1Ref, 4) - 1], 0) == half1);
    CHECK(spur(z1, zc[local_id(kR1z1Ref, 5) - 1], 0) == half2);
    CHECK(spur(z1, zc[local_id(kR1z1Ref, 1) - 1], 0).empty());
    CHECK(spur(z1, zc[local_id(kR1z1Ref, 2) - 1], 0).empty());
    // relevant in the middle cone: both sets are among its contributing points
    auto mid = testsupport::point_set(intersection_families(z1, zc[local_id(kR1z1Ref, 3) - 1]), n, 0, w);
    for (auto& p : half1) CHECK(mid.count(p));
    for (auto& p : half2) CHECK(mid.count(p));

    auto box = load_spec(data("box.json"));
    auto bc = enumerate_cones(box);
    const double e = 0.3;
    auto wb = testsupport::listing({[](int k, int m) { return P{1 + k + m, -1 - k}; },
                                    [&](int k, int m) { return P{e + k, m}; }},
                                   n, w);
    CHECK(spur(box, bc[0], e) == wb);

    // no spurious families for R-1
    auto r1 = load_spec(data("R-1.json"));
    for (auto& c : enumerate_cones(r1)) CHECK(spur(r1, c, 0).empty());
}

TEST_CASE("residues on spurious families are undecidable") {
    auto box = load_spec(data("box.json"));
    auto cones = enumerate_cones(box);
    ParamMap p{{"x", 3.0}, {"y", 3.0}};
    int seen = 0;
    for (auto& f : intersection_families(box, cones[0])) {
        if (!f.spurious) continue;
        ++seen;
        try {
            residue_at(box, cones[0], f, IVec(f.arity(), 0), p);
            FAIL("expected an undecidable error");
        } catch (const MathError& e) {
            CHECK(std::string(e.what()).find("undecidable") != std::string::npos);
        }
    }
    CHECK(seen == 2);
}

TEST_CASE("family counts per cone") {
    auto counts = [](const MBSpec& s) {
        std::vector<int> v;
        for (auto& c : enumerate_cones(s)) v.push_back(static_cast<int>(intersection_families(s, c).size()));
        return v;
    };
    CHECK(counts(load_spec(data("R-1.json"))) == std::vector<int>{4, 3, 3, 3, 3});
    CHECK(enumerate_cones(load_spec(data("toy3.json"))).size() == 4);
}

TEST_CASE("onefold cones close on either side") {
    auto z0 = load_spec(data("z0.json"));
    auto right = onefold_cone(z0, +1, default_setting(z0));
    auto left = onefold_cone(z0, -1, default_setting(z0));
    auto fr = intersection_families(z0, right);
    auto fl = intersection_families(z0, left);
    REQUIRE(fr.size() == 1);
    REQUIRE(fl.size() == 1);
    CHECK(fr[0].str() == "(1/4+m/2)");
    CHECK(fl[0].str() == "(-m)");
}

}
