#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expdiff/domain_map.hpp"
#include "support/test_util.hpp"

using namespace expdiff;

TEST_CASE("image lies strictly inside the A_theta domain") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> uo(-20.0, 20.0);
    for (FamilyKind kind : all_family_kinds()) {
        LikelihoodFamily f;
        f.kind = kind;
        f.n = 7;
        f.r = 3;
        f.a = 1.7;
        f.xm = 1.3;
        f.mu = 0.4;
        f.k = 2.2;
        const DomainMap dm(f);
        for (int rep = 0; rep < 500; ++rep) {
            const double o1 = uo(gen), o2 = uo(gen);
            const ZetaAndJacobian z = dm.map(o1, o2);
            CHECK(zeta_in_domain(f, z.nu, z.tau));
            CHECK(std::isfinite(prior_log_partition(f, z.nu, z.tau)));
        }
    }
}

TEST_CASE("jacobian matches finite differences") {
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> uo(-4.0, 4.0);
    for (FamilyKind kind : all_family_kinds()) {
        LikelihoodFamily f;
        f.kind = kind;
        f.n = 5;
        f.r = 2;
        f.a = 0.8;
        f.xm = 0.6;
        f.mu = -0.3;
        f.k = 1.4;
        const DomainMap dm(f);
        for (int rep = 0; rep < 25; ++rep) {
            const double o1 = uo(gen), o2 = uo(gen);
            const ZetaAndJacobian z = dm.map(o1, o2);
            const double h = 1e-6;
            auto at = [&](double a, double b) { return dm.map(a, b); };
            const double dnu_do1 =
                (at(o1 + h, o2).nu - at(o1 - h, o2).nu) / (2 * h);
            const double dnu_do2 =
                (at(o1, o2 + h).nu - at(o1, o2 - h).nu) / (2 * h);
            const double dtau_do1 =
                (at(o1 + h, o2).tau - at(o1 - h, o2).tau) / (2 * h);
            const double dtau_do2 =
                (at(o1, o2 + h).tau - at(o1, o2 - h).tau) / (2 * h);
            CHECK(z.j[0][0] == doctest::Approx(dnu_do1).epsilon(1e-5));
            CHECK(z.j[0][1] == doctest::Approx(dnu_do2).epsilon(1e-5));
            CHECK(z.j[1][0] == doctest::Approx(dtau_do1).epsilon(1e-5));
            CHECK(z.j[1][1] == doctest::Approx(dtau_do2).epsilon(1e-5));
        }
    }
}

TEST_CASE("map_all layout: first half nu inputs, second half tau inputs") {
    LikelihoodFamily f;
    f.kind = FamilyKind::poisson;
    const DomainMap dm(f);
    const Vec out{0.3, -1.0, 0.9, 2.0};  // d = 2
    const ConjugateHyperparams z = dm.map_all(out, 2);
    const ZetaAndJacobian z0 = dm.map(0.3, 0.9);
    const ZetaAndJacobian z1 = dm.map(-1.0, 2.0);
    CHECK(z.nu[0] == doctest::Approx(z0.nu));
    CHECK(z.tau[0] == doctest::Approx(z0.tau));
    CHECK(z.nu[1] == doctest::Approx(z1.nu));
    CHECK(z.tau[1] == doctest::Approx(z1.tau));
}
