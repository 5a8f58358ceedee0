#include "expdiff/domain_map.hpp"

#include "expdiff/errors.hpp"
#include "expdiff/special.hpp"

namespace expdiff {

ZetaAndJacobian DomainMap::map(double o1, double o2) const {
    ZetaAndJacobian out;
    if (family_.conjugate() == ConjugateKind::normal) {
        const double mu0 = o1;
        const double tau = softplus(o2) + kEps;
        out.nu = tau * mu0;
        out.tau = tau;
        const double dtau = logistic(o2);
        out.j[0][0] = tau;
        out.j[0][1] = mu0 * dtau;
        out.j[1][0] = 0.0;
        out.j[1][1] = dtau;
        return out;
    }
    const double alpha = softplus(o1) + kEps;
    const double beta = softplus(o2) + kEps;
    auto [nu, tau] = classical_to_zeta(family_, alpha, beta);
    out.nu = nu;
    out.tau = tau;
    // (nu, tau) is affine in (alpha, beta) for every non-normal conjugate,
    // so the classical-space Jacobian can be extracted by differencing.
    auto [nu_a, tau_a] = classical_to_zeta(family_, alpha + 1.0, beta);
    auto [nu_b, tau_b] = classical_to_zeta(family_, alpha, beta + 1.0);
    const double da = logistic(o1);
    const double db = logistic(o2);
    out.j[0][0] = (nu_a - nu) * da;
    out.j[0][1] = (nu_b - nu) * db;
    out.j[1][0] = (tau_a - tau) * da;
    out.j[1][1] = (tau_b - tau) * db;
    return out;
}

ConjugateHyperparams DomainMap::map_all(const Vec& net_out, std::size_t d) const {
    if (net_out.size() != 2 * d)
        throw ConfigError("inference network output must have length 2d");
    ConjugateHyperparams zeta;
    zeta.nu.resize(d);
    zeta.tau.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const ZetaAndJacobian zj = map(net_out[j], net_out[d + j]);
        zeta.nu[j] = zj.nu;
        zeta.tau[j] = zj.tau;
    }
    return zeta;
}

}  // namespace expdiff
